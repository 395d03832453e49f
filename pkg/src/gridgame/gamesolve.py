"""Solvers for the two-player matrix game over a defender-maximizing payoff.

The attacker picks rows to minimize the resilience score, the defender picks
columns to maximize it. The game is treated as strictly competitive, so the
exact solution is the zero-sum minimax pair, computed with a built-in dense
simplex (Bland's rule, deterministic). Iterative methods (fictitious play,
regret matching) and bounded-rationality responses (softmax, QRE) come with
an epsilon verifier so every report carries its true equilibrium gap.

Ties in argmin/argmax are broken by lowest index everywhere.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import SolverError

FP_DEFAULT_ITERS = 100_000
FP_DEFAULT_TOL = 1e-3
QRE_DEFAULT_DAMPING = 0.5


def _entries(m) -> np.ndarray:
    arr = np.asarray(getattr(m, "entries", m), dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise SolverError("payoff matrix must be a non-empty 2-d array")
    return arr


@dataclass(frozen=True)
class MixedStrategy:
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", p)
        if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
            raise SolverError(f"not a probability vector: {p}")

    def __len__(self):
        return len(self.probs)

    @classmethod
    def uniform(cls, k: int) -> "MixedStrategy":
        return cls(np.full(k, 1.0 / k))

    @classmethod
    def pure(cls, k: int, index: int) -> "MixedStrategy":
        p = np.zeros(k)
        p[index] = 1.0
        return cls(p)


@dataclass(frozen=True)
class EquilibriumReport:
    attacker: MixedStrategy
    defender: MixedStrategy
    game_value: float
    method: str
    iterations: int
    epsilon: float
    trajectory: tuple = ()  # rows of (iteration, avg_regret_a, avg_regret_d, value)

    def to_json(self, path=None):
        obj = {
            "method": self.method,
            "value": self.game_value,
            "epsilon": self.epsilon,
            "attacker_probs": [float(p) for p in self.attacker.probs],
            "defender_probs": [float(p) for p in self.defender.probs],
            "iterations": self.iterations,
        }
        if path is None:
            return obj
        with open(path, "w") as fh:
            json.dump(obj, fh, indent=2)
            fh.write("\n")
        return obj

    def trajectory_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["iteration", "avg_regret_attacker", "avg_regret_defender", "value"])
            for row in self.trajectory:
                writer.writerow([int(row[0])] + [f"{v:.12g}" for v in row[1:]])


def _report(method, M, pa, pd, iterations, trajectory=()) -> EquilibriumReport:
    attacker = MixedStrategy(pa)
    defender = MixedStrategy(pd)
    value = float(attacker.probs @ M @ defender.probs)
    eps = verify_epsilon_equilibrium(M, attacker, defender)
    return EquilibriumReport(
        attacker=attacker, defender=defender, game_value=value, method=method,
        iterations=iterations, epsilon=eps, trajectory=tuple(trajectory),
    )


def best_response(M, opponent_mix, side: str) -> tuple[int, float]:
    """Pure best response and its value; lowest index wins ties."""
    m = _entries(M)
    mix = opponent_mix.probs if isinstance(opponent_mix, MixedStrategy) else np.asarray(opponent_mix)
    if side == "attacker":
        if len(mix) != m.shape[1]:
            raise SolverError("defender mix length does not match columns")
        scores = m @ mix
        idx = int(np.argmin(scores))
    elif side == "defender":
        if len(mix) != m.shape[0]:
            raise SolverError("attacker mix length does not match rows")
        scores = mix @ m
        idx = int(np.argmax(scores))
    else:
        raise SolverError(f"unknown side {side!r}")
    return idx, float(scores[idx])


def verify_epsilon_equilibrium(M, attacker_mix, defender_mix) -> float:
    """Max unilateral improvement over pure deviations (exact by linearity)."""
    m = _entries(M)
    pa = attacker_mix.probs if isinstance(attacker_mix, MixedStrategy) else np.asarray(attacker_mix)
    pd = defender_mix.probs if isinstance(defender_mix, MixedStrategy) else np.asarray(defender_mix)
    value = float(pa @ m @ pd)
    attacker_gain = value - float(np.min(m @ pd))
    defender_gain = float(np.max(pa @ m)) - value
    return max(attacker_gain, defender_gain)


# -- fictitious play ---------------------------------------------------------


@backend.kernel
def _fp_kernel(M, max_iters, tol, check_every):
    """Simultaneous-update fictitious play with empirical-frequency beliefs.

    u_a[i] accumulates sum_t M[i, d_t]; u_d[j] accumulates sum_t M[a_t, j],
    so each step costs O(m+n). The epsilon of the averaged strategies is
    checked every check_every steps.
    """
    m, n = M.shape
    count_a = np.zeros(m)
    count_d = np.zeros(n)
    u_a = np.zeros(m)
    u_d = np.zeros(n)
    a = 0
    d = 0
    eps = np.inf
    t = 0
    while t < max_iters:
        t += 1
        count_a[a] += 1.0
        count_d[d] += 1.0
        for i in range(m):
            u_a[i] += M[i, d]
        for j in range(n):
            u_d[j] += M[a, j]
        # best responses to the opponent's empirical frequency
        a = 0
        best = u_a[0]
        for i in range(1, m):
            if u_a[i] < best:
                best = u_a[i]
                a = i
        d = 0
        best = u_d[0]
        for j in range(1, n):
            if u_d[j] > best:
                best = u_d[j]
                d = j
        if t % check_every == 0 or t == max_iters:
            pa = count_a / t
            pd = count_d / t
            value = 0.0
            worst_row = np.inf
            best_col = -np.inf
            for i in range(m):
                row = 0.0
                for j in range(n):
                    row += M[i, j] * pd[j]
                if row < worst_row:
                    worst_row = row
                value += row * pa[i]
            for j in range(n):
                col = 0.0
                for i in range(m):
                    col += M[i, j] * pa[i]
                if col > best_col:
                    best_col = col
            eps = max(value - worst_row, best_col - value)
            if eps <= tol:
                break
    return count_a / t, count_d / t, t, eps


def nash_fictitious_play(M, max_iters: int = FP_DEFAULT_ITERS,
                         tol: float = FP_DEFAULT_TOL) -> EquilibriumReport:
    m = _entries(M)
    if max_iters < 1:
        raise SolverError("max_iters must be at least 1")
    pa, pd, iters, _eps = _fp_kernel(m, max_iters, tol, 100)
    return _report("fictitious-play", m, pa, pd, int(iters))


# -- exact zero-sum solution -------------------------------------------------


def _simplex_max(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """max 1'x  s.t.  A x <= b, x >= 0, with b > 0.

    Dense tableau, Bland's rule. Returns (x, y) where y holds the duals on
    the rows. Small problems only; this is exact up to float arithmetic.
    """
    rows, cols = A.shape
    # tableau: [A | I | b] with objective row [-c | 0 | 0]
    t = np.zeros((rows + 1, cols + rows + 1))
    t[:rows, :cols] = A
    t[:rows, cols:cols + rows] = np.eye(rows)
    t[:rows, -1] = b
    t[rows, :cols] = -1.0
    basis = list(range(cols, cols + rows))
    for _ in range(50_000):
        # Bland: first column with negative reduced cost
        enter = -1
        for j in range(cols + rows):
            if t[rows, j] < -1e-12:
                enter = j
                break
        if enter < 0:
            break
        # ratio test, lowest basis index on ties
        leave = -1
        best = np.inf
        for i in range(rows):
            if t[i, enter] > 1e-12:
                ratio = t[i, -1] / t[i, enter]
                if ratio < best - 1e-12 or (
                    abs(ratio - best) <= 1e-12 and (leave < 0 or basis[i] < basis[leave])
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            raise SolverError("unbounded game LP; payoff matrix is not finite")
        piv = t[leave, enter]
        t[leave] /= piv
        for i in range(rows + 1):
            if i != leave and t[i, enter] != 0.0:
                t[i] -= t[i, enter] * t[leave]
        basis[leave] = enter
    else:
        raise SolverError("simplex failed to terminate")
    x = np.zeros(cols)
    for i, bi in enumerate(basis):
        if bi < cols:
            x[bi] = t[i, -1]
    y = t[rows, cols:cols + rows].copy()  # duals = reduced costs of slacks
    return x, y


def nash_exact(M) -> EquilibriumReport:
    """Exact minimax pair via the standard LP reduction.

    Shift the matrix positive, solve max 1'x s.t. M''x <= 1 for the attacker
    weights, read the defender weights off the duals, then normalize. The
    reported epsilon is re-verified against the original matrix.
    """
    m = _entries(M)
    shift = 1.0 - float(m.min())
    pos = m + shift
    x, y = _simplex_max(pos.T, np.ones(pos.shape[1]))
    total = x.sum()
    if total <= 0 or y.sum() <= 0:
        raise SolverError("degenerate game LP solution")
    pa = x / total
    pd = y / y.sum()
    report = _report("nash-exact", m, pa, pd, iterations=1)
    if report.epsilon > 1e-7:
        raise SolverError(f"simplex solution failed verification: eps={report.epsilon}")
    return report


def stackelberg(M) -> tuple[int, float, int]:
    """Leader commitment to the pure column with the best security level."""
    m = _entries(M)
    levels = m.min(axis=0)
    j = int(np.argmax(levels))
    i = int(np.argmin(m[:, j]))
    return j, float(levels[j]), i


# -- regret matching ----------------------------------------------------------


@backend.kernel
def _rm_kernel(M, uniforms, record_every):
    """Self-play regret matching; both sides sample from positive-regret mixes.

    uniforms is a (T, 2) array of pre-drawn U(0,1) variates so the loop is
    backend-independent bit for bit. Records (t, avg_regret_a, avg_regret_d,
    running value estimate) every record_every steps.
    """
    T = uniforms.shape[0]
    m, n = M.shape
    regret_a = np.zeros(m)
    regret_d = np.zeros(n)
    mix_sum_a = np.zeros(m)
    mix_sum_d = np.zeros(n)
    pa = np.full(m, 1.0 / m)
    pd = np.full(n, 1.0 / n)
    rows = T // record_every + (1 if T % record_every else 0)
    traj = np.zeros((rows, 4))
    payoff_sum = 0.0
    r = 0
    for t in range(T):
        # sample actions from the current mixes
        ua = uniforms[t, 0]
        a = m - 1
        acc = 0.0
        for i in range(m):
            acc += pa[i]
            if ua < acc:
                a = i
                break
        ud = uniforms[t, 1]
        d = n - 1
        acc = 0.0
        for j in range(n):
            acc += pd[j]
            if ud < acc:
                d = j
                break
        got = M[a, d]
        payoff_sum += got
        # attacker minimizes: regret of row i is M[a,d] - M[i,d]
        for i in range(m):
            regret_a[i] += got - M[i, d]
        for j in range(n):
            regret_d[j] += M[a, j] - got
        for i in range(m):
            mix_sum_a[i] += pa[i]
        for j in range(n):
            mix_sum_d[j] += pd[j]
        # next mixes from positive parts
        pos = 0.0
        for i in range(m):
            if regret_a[i] > 0.0:
                pos += regret_a[i]
        if pos > 0.0:
            for i in range(m):
                pa[i] = regret_a[i] / pos if regret_a[i] > 0.0 else 0.0
        else:
            for i in range(m):
                pa[i] = 1.0 / m
        pos = 0.0
        for j in range(n):
            if regret_d[j] > 0.0:
                pos += regret_d[j]
        if pos > 0.0:
            for j in range(n):
                pd[j] = regret_d[j] / pos if regret_d[j] > 0.0 else 0.0
        else:
            for j in range(n):
                pd[j] = 1.0 / n
        if (t + 1) % record_every == 0 or t == T - 1:
            if r < rows:
                ra = 0.0
                for i in range(m):
                    if regret_a[i] > ra:
                        ra = regret_a[i]
                rd = 0.0
                for j in range(n):
                    if regret_d[j] > rd:
                        rd = regret_d[j]
                traj[r, 0] = t + 1
                traj[r, 1] = ra / (t + 1)
                traj[r, 2] = rd / (t + 1)
                traj[r, 3] = payoff_sum / (t + 1)
                r += 1
    return mix_sum_a / T, mix_sum_d / T, traj[:r]


def regret_matching(M, T: int, seed: int) -> EquilibriumReport:
    m = _entries(M)
    if T < 1:
        raise SolverError("T must be at least 1")
    rng = np.random.default_rng(seed)
    uniforms = rng.random((T, 2))
    record_every = max(1, T // 1000)
    pa, pd, traj = _rm_kernel(m, uniforms, record_every)
    return _report(
        "regret-matching", m, pa, pd, T,
        trajectory=tuple(tuple(row) for row in traj),
    )


# -- bounded rationality -------------------------------------------------------


def softmax_response(M, opponent_mix, beta: float, side: str) -> MixedStrategy:
    """Logit response; beta=0 is uniform, beta→inf approaches best response."""
    m = _entries(M)
    if beta < 0:
        raise SolverError("beta must be non-negative")
    mix = opponent_mix.probs if isinstance(opponent_mix, MixedStrategy) else np.asarray(opponent_mix)
    if side == "attacker":
        z = -beta * (m @ mix)
    elif side == "defender":
        z = beta * (mix @ m)
    else:
        raise SolverError(f"unknown side {side!r}")
    z = z - z.max()
    w = np.exp(z)
    return MixedStrategy(w / w.sum())


@dataclass(frozen=True)
class QreResult:
    attacker: MixedStrategy
    defender: MixedStrategy
    converged: bool
    iterations: int
    residual: float  # max-norm distance of the last iterate from its response

    def __iter__(self):  # allows  pa, pd = qre_fixed_point(...)
        return iter((self.attacker, self.defender))


def qre_fixed_point(M, beta_a: float, beta_d: float,
                    damping: float = QRE_DEFAULT_DAMPING,
                    max_iters: int = 10_000, tol: float = 1e-12) -> QreResult:
    """Damped simultaneous logit iteration toward the quantal response pair."""
    m = _entries(M)
    if not 0.0 < damping <= 1.0:
        raise SolverError("damping must lie in (0, 1]")
    pa = np.full(m.shape[0], 1.0 / m.shape[0])
    pd = np.full(m.shape[1], 1.0 / m.shape[1])
    iters = 0
    converged = False
    for iters in range(1, max_iters + 1):
        ra = softmax_response(m, pd, beta_a, "attacker").probs
        rd = softmax_response(m, pa, beta_d, "defender").probs
        na = (1.0 - damping) * pa + damping * ra
        nd = (1.0 - damping) * pd + damping * rd
        delta = max(np.max(np.abs(na - pa)), np.max(np.abs(nd - pd)))
        pa, pd = na, nd
        if delta <= tol:
            converged = True
            break
    res_a = np.max(np.abs(pa - softmax_response(m, pd, beta_a, "attacker").probs))
    res_d = np.max(np.abs(pd - softmax_response(m, pa, beta_d, "defender").probs))
    return QreResult(
        attacker=MixedStrategy(pa), defender=MixedStrategy(pd),
        converged=converged, iterations=iters, residual=float(max(res_a, res_d)),
    )
