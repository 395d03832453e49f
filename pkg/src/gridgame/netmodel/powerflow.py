"""Backward/forward-sweep load flow for radial islands.

Each energized island is solved independently against its own voltage
reference (the slack bus, or the island's largest online DER).  Loads are
constant-power; DERs are constant-P injections at unity power factor.
Islands without a reference node are reported de-energized with zero
voltage.  The sweep itself is the hot kernel: it runs jitted under the
numba backend and as the identical plain-numpy loop under the fallback.
"""

from __future__ import annotations

import numpy as np

from .. import backend
from .types import NetworkState, PowerFlowSolution
from . import topology

TOLERANCE = 1e-6  # p.u., max-norm of successive voltage change
MAX_SWEEPS = 100
UNDERVOLTAGE_PU = 0.90


@backend.kernel
def _sweep_kernel(parent, zr, zx, sp, sq, tol, max_iter):
    """Solve one radial island ordered so that parent[i] < i and parent[0] = -1.

    parent/z/s are compact per-node arrays; z is the impedance of the edge
    toward the parent (p.u.), s the net constant-power draw (p.u., consumption
    positive).  Entry 0 is the reference node; its voltage is pinned at 1+0j
    and its local power is served by the swing source directly.
    Returns (voltages, iterations, final max |dV|).
    """
    k = parent.shape[0]
    v = np.ones(k, dtype=np.complex128)
    flow = np.zeros(k, dtype=np.complex128)
    iters = 0
    max_dv = 0.0
    for _ in range(max_iter):
        iters += 1
        # backward: node load currents, then accumulate into branch currents
        for i in range(1, k):
            s = complex(sp[i], sq[i])
            flow[i] = (s / v[i]).conjugate()
        flow[0] = 0.0 + 0.0j
        for i in range(k - 1, 0, -1):
            flow[parent[i]] += flow[i]
        # forward: voltage drop along each edge
        max_dv = 0.0
        for i in range(1, k):
            z = complex(zr[i], zx[i])
            vnew = v[parent[i]] - z * flow[i]
            dv = abs(vnew - v[i])
            if dv > max_dv:
                max_dv = dv
            v[i] = vnew
        if max_dv <= tol:
            break
    return v, iters, max_dv


def _island_arrays(state: NetworkState, comp: frozenset[int], root: int):
    """Compact BFS-ordered arrays for the sweep kernel, plus the bus order."""
    order, parent, branch = topology.bfs_tree(state, comp, root)
    pos = {bus: i for i, bus in enumerate(order)}
    k = len(order)
    parent_idx = np.empty(k, dtype=np.int64)
    zr = np.zeros(k, dtype=np.float64)
    zx = np.zeros(k, dtype=np.float64)
    sp = np.zeros(k, dtype=np.float64)
    sq = np.zeros(k, dtype=np.float64)
    z_base = state.base_kv**2 / state.base_mva
    s_base_kw = 1000.0 * state.base_mva
    der_by_bus: dict[int, float] = {}
    for d in state.ders:
        if d.online and d.bus in comp:
            der_by_bus[d.bus] = der_by_bus.get(d.bus, 0.0) + d.output_kw()
    for b in state.buses:
        if b.id not in comp or b.id == root:
            continue
        i = pos[b.id]
        keep = 1.0 - state.shed(b.id)
        sp[i] = (b.load_p * keep - der_by_bus.get(b.id, 0.0)) / s_base_kw
        sq[i] = (b.load_q * keep) / s_base_kw
    parent_idx[0] = -1
    for bus in order[1:]:
        i = pos[bus]
        parent_idx[i] = pos[parent[bus]]
        r, x = branch[bus]
        zr[i] = r / z_base
        zx[i] = x / z_base
    return order, parent_idx, zr, zx, sp, sq


def power_flow(state: NetworkState, tol: float = TOLERANCE,
               max_sweeps: int = MAX_SWEEPS) -> PowerFlowSolution:
    """Per-island sweep solution. Deterministic for identical states.

    Raises RadialityError if an energized island contains a loop. Islands
    that fail to converge within the sweep budget are reported with
    converged=False; the caller decides on a shedding fallback.
    """
    comps = tuple(topology.islands(state))
    assign = {bus: idx for idx, comp in enumerate(comps) for bus in comp}
    voltages: dict[int, complex] = {b.id: 0j for b in state.buses}
    energized = []
    refs: dict[int, int] = {}
    all_converged = True
    iterations = 0
    max_mismatch = 0.0
    for idx, comp in enumerate(comps):
        ref = topology.reference_bus(state, comp)
        if ref is None:
            energized.append(False)
            continue
        energized.append(True)
        refs[idx] = ref
        topology.check_radial(state, comp)
        order, parent_idx, zr, zx, sp, sq = _island_arrays(state, comp, ref)
        v, iters, max_dv = _sweep_kernel(parent_idx, zr, zx, sp, sq, tol, max_sweeps)
        for bus, volt in zip(order, v):
            voltages[bus] = complex(volt)
        iterations = max(iterations, int(iters))
        max_mismatch = max(max_mismatch, float(max_dv))
        if max_dv > tol:
            all_converged = False
    under = tuple(
        b.id for b in state.buses
        if energized[assign[b.id]] and abs(voltages[b.id]) < UNDERVOLTAGE_PU
    )
    return PowerFlowSolution(
        voltages=voltages,
        converged=all_converged,
        iterations=iterations,
        max_mismatch=max_mismatch,
        island_assignment=assign,
        islands=comps,
        energized=tuple(energized),
        reference_bus=refs,
        undervoltage_buses=under,
    )
