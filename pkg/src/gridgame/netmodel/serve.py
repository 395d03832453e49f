"""Served-load determination: which demand survives islanding and shedding.

The policy is energy-balance based.  De-energized islands serve nothing.
Energized islands serve the post-shedding demand, except that an isolated
(non-slack) island whose online DER capacity falls short curtails
non-critical load proportionally first, then critical load, until demand
fits the capacity.
"""

from __future__ import annotations

from .types import NetworkState, PowerFlowSolution, ServedLoadReport
from . import topology


def serve_loads(state: NetworkState, solution: PowerFlowSolution) -> ServedLoadReport:
    served_p: dict[int, float] = {}
    served_q: dict[int, float] = {}
    effective_shed: dict[int, float] = {}
    der_utilized: dict[str, float] = {d.id: 0.0 for d in state.ders}
    der_available: dict[str, float] = {d.id: d.output_kw() for d in state.ders}
    connected: set[int] = set()
    curtailed = False

    bus_by_id = {b.id: b for b in state.buses}
    for idx, comp in enumerate(solution.islands):
        members = sorted(comp)
        if not solution.energized[idx]:
            for bus_id in members:
                served_p[bus_id] = 0.0
                served_q[bus_id] = 0.0
                effective_shed[bus_id] = 1.0
            continue
        connected.update(members)
        # post-shedding demand per bus
        demand_p = {b: bus_by_id[b].load_p * (1.0 - state.shed(b)) for b in members}
        demand_q = {b: bus_by_id[b].load_q * (1.0 - state.shed(b)) for b in members}
        island_ders = topology.online_ders_in(state, comp)
        capacity = sum(d.output_kw() for d in island_ders)

        if state.slack_bus in comp:
            # grid-connected: the slack covers any balance, nothing curtailed
            factors = {b: 1.0 for b in members}
            for d in island_ders:
                der_utilized[d.id] = d.output_kw()
        else:
            factors = _curtail_factors(bus_by_id, members, demand_p, capacity)
            if any(f < 1.0 for f in factors.values()):
                curtailed = True
            served_total = sum(demand_p[b] * factors[b] for b in members)
            rating_total = sum(d.rating_p for d in island_ders)
            for d in island_ders:
                share = served_total * d.rating_p / rating_total if rating_total else 0.0
                der_utilized[d.id] = min(d.output_kw(), share)

        for b in members:
            served_p[b] = demand_p[b] * factors[b]
            served_q[b] = demand_q[b] * factors[b]
            load_p = bus_by_id[b].load_p
            effective_shed[b] = 1.0 - served_p[b] / load_p if load_p > 0 else 0.0

    return ServedLoadReport(
        served_p=served_p,
        served_q=served_q,
        der_utilized=der_utilized,
        der_available=der_available,
        connected_buses=frozenset(connected),
        effective_shed=effective_shed,
        capacity_curtailed=curtailed,
    )


def _curtail_factors(bus_by_id, members, demand_p, capacity) -> dict[int, float]:
    """Per-bus serving factors for a DER island with limited capacity.

    Non-critical demand scales down first; critical demand is touched only
    when capacity cannot even cover the critical total.
    """
    crit = sum(demand_p[b] for b in members if bus_by_id[b].is_critical)
    noncrit = sum(demand_p[b] for b in members if not bus_by_id[b].is_critical)
    total = crit + noncrit
    if total <= capacity:
        return {b: 1.0 for b in members}
    if crit <= capacity:
        nc_factor = (capacity - crit) / noncrit if noncrit > 0 else 0.0
        return {
            b: (1.0 if bus_by_id[b].is_critical else nc_factor) for b in members
        }
    crit_factor = capacity / crit if crit > 0 else 0.0
    return {b: (crit_factor if bus_by_id[b].is_critical else 0.0) for b in members}
