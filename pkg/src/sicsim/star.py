"""Surface coefficient optimization: phase alignment plus amplitude splitting.

With both aggregate phases aligned, picking the surface coefficients
reduces to a concave program over the transmission magnitudes t:

    maximize   sum_i d_i * sqrt(1 - t_i^2)      (reflected-path amplitude)
    subject to sum_i H_i * t_i = Q,  0 <= t_i < 1

where d_i and H_i are the cascaded channel magnitudes toward the user and
the controller, and Q is the transmitted amplitude that makes the
control-stream SNR exactly meet its threshold. The KKT conditions give
t_i(mu) = mu*H_i / sqrt(d_i^2 + mu^2*H_i^2) for a scalar multiplier mu >= 0,
and sum_i H_i t_i(mu) is strictly increasing in mu, so the unique mu is
found by bisection. A brute-force grid oracle provides an independent
cross-check on small instances.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .phy import PowerSplit, StarConfig, SystemParams

BOUNDARY_GUARD = 1e-12   # returned t_i stay <= 1 - BOUNDARY_GUARD
ZERO_WEIGHT_CAP = 1e-9   # cap 1 - ZERO_WEIGHT_CAP for entries with d_i = 0
_MAX_BRACKET_DOUBLINGS = 200
_MAX_BISECT_ITERS = 200


class InfeasibleAmplitude(Exception):
    """The equality target Q is not reachable with magnitudes below one."""


class AmplitudeSolverError(Exception):
    """Dual search failed to converge; carries the final constraint residual."""

    def __init__(self, message: str, residual: float = float("nan")):
        self.residual = residual
        super().__init__(message)


@dataclass(frozen=True)
class AmplitudeProblem:
    """Weights and target of the amplitude-splitting program.

    q_sic is the smaller transmitted amplitude needed for the controller's
    SIC step; whenever the power split is the closed-form optimum it is
    dominated by q (the control-decoding target), so only q binds.
    """

    d: np.ndarray
    h_cap: np.ndarray
    q: float
    q_sic: float = 0.0

    def __post_init__(self):
        for name in ("d", "h_cap"):
            vec = np.asarray(getattr(self, name), dtype=np.float64)
            vec.setflags(write=False)
            object.__setattr__(self, name, vec)
        if self.d.shape != self.h_cap.shape or self.d.ndim != 1 or self.d.size < 1:
            raise ValueError("d and h_cap must be 1-D vectors of identical length")
        if np.any(self.d < 0) or np.any(self.h_cap < 0):
            raise ValueError("weights must be nonnegative")
        if not self.q >= 0:
            raise ValueError("q must be nonnegative")

    @property
    def n(self) -> int:
        return self.d.size


@dataclass(frozen=True)
class AmplitudeSolution:
    """Optimal transmission magnitudes with the dual certificate."""

    t: np.ndarray
    objective: float
    dual: float
    kkt_residual: float
    constraint_residual: float

    def __post_init__(self):
        vec = np.asarray(self.t, dtype=np.float64)
        vec.setflags(write=False)
        object.__setattr__(self, "t", vec)


def build_amplitude_problem(
    ch: ChannelRealization,
    split: PowerSplit,
    p: SystemParams,
    compat_scaling: bool = False,
) -> AmplitudeProblem:
    """Assemble the splitting program for one realization and power split.

    compat_scaling switches to an alternative convention that doubles both
    weight vectors and floors the target at 2*max(q, q_sic); off by default.
    """
    a2_ps = split.a2 * p.ps_watts
    if a2_ps <= 0.0:
        raise ValueError("degenerate input: a2 * ps_watts must be positive")
    d = np.abs(ch.h1) * np.abs(ch.h2)
    h_cap = np.abs(ch.h1 * ch.g)
    q = np.sqrt(p.gamma_th2 * p.n0_watts / a2_ps)
    sic_gap = split.a1 - split.a2 * p.gamma_th1
    if sic_gap > 0.0:
        q_sic = float(np.sqrt(p.gamma_th1 * p.n0_watts / (p.ps_watts * sic_gap)))
    else:
        q_sic = float("inf")  # SIC impossible at this split regardless of t
    if compat_scaling:
        d = 2.0 * d
        h_cap = 2.0 * h_cap
        q = 2.0 * max(q, q_sic)
    return AmplitudeProblem(d=d, h_cap=h_cap, q=float(q), q_sic=q_sic)


def _constraint_value(mu: float, d: np.ndarray, h: np.ndarray) -> float:
    # sum_i H_i * t_i(mu); strictly increasing in mu, -> sum(H) as mu -> inf
    return float(np.sum(h * h * mu / np.sqrt(d * d + (mu * h) ** 2)))


def solve_amplitudes(prob: AmplitudeProblem, tol: float = 1e-10) -> AmplitudeSolution:
    """Solve the splitting program by bisection on the dual multiplier.

    Entries with d_i = 0 cost nothing in the objective, so they are filled
    greedily toward the target first; the dual search runs on the rest. The
    bracket is tightened until it collapses in floating point, then the
    solution is certified by the constraint residual (<= tol * max(1, q))
    and the KKT stationarity residual.
    """
    d, h, q = prob.d, prob.h_cap, prob.q
    n = prob.n
    t = np.zeros(n)
    if q > 0.0 and not q < float(np.sum(h)):
        raise InfeasibleAmplitude(
            f"target {q:.6e} not below the reachable bound {float(np.sum(h)):.6e}"
        )

    # Greedy fill of zero-weight entries (free w.r.t. the objective).
    remaining = q
    free = np.flatnonzero((d == 0.0) & (h > 0.0))
    for i in free:
        if remaining <= 0.0:
            break
        ti = min(1.0 - ZERO_WEIGHT_CAP, remaining / h[i])
        t[i] = ti
        remaining -= h[i] * ti
    remaining = max(remaining, 0.0)

    mu = 0.0
    active = (d > 0.0) & (h > 0.0)
    if remaining > 0.0:
        da, ha = d[active], h[active]
        if da.size == 0 or not remaining < float(np.sum(ha)):
            raise AmplitudeSolverError(
                "residual target exceeds the positive-weight capacity", residual=remaining
            )
        hi = 1.0
        for _ in range(_MAX_BRACKET_DOUBLINGS):
            if _constraint_value(hi, da, ha) >= remaining:
                break
            hi *= 2.0
        else:
            raise AmplitudeSolverError(
                "dual bracket expansion failed",
                residual=abs(_constraint_value(hi, da, ha) - remaining),
            )
        lo = 0.0
        for _ in range(_MAX_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if _constraint_value(mid, da, ha) < remaining:
                lo = mid
            else:
                hi = mid
        mu = hi
        t[active] = mu * ha / np.sqrt(da * da + (mu * ha) ** 2)

    t = np.minimum(t, 1.0 - BOUNDARY_GUARD)
    constraint_residual = abs(float(np.sum(h * t)) - q)
    if constraint_residual > tol * max(1.0, q):
        raise AmplitudeSolverError(
            f"constraint residual {constraint_residual:.3e} above tolerance",
            residual=constraint_residual,
        )
    objective = float(np.sum(d * np.sqrt(1.0 - t * t)))
    kkt = _stationarity_residual(d, h, t, mu)
    return AmplitudeSolution(
        t=t,
        objective=objective,
        dual=mu,
        kkt_residual=kkt,
        constraint_residual=constraint_residual,
    )


def _stationarity_residual(d: np.ndarray, h: np.ndarray, t: np.ndarray, mu: float) -> float:
    """Scale-free max violation of d_i t_i / sqrt(1 - t_i^2) = mu * H_i.

    Only interior entries with d_i > 0 participate; zero-weight entries sit
    at their box bound where the stationarity equation does not apply.
    """
    active = (d > 0.0) & (h > 0.0)
    if not np.any(active):
        return 0.0
    da, ha, ta = d[active], h[active], t[active]
    grad = da * ta / np.sqrt(1.0 - ta * ta)
    scale = max(float(np.max(da)), mu * float(np.max(ha)), np.finfo(float).tiny)
    return float(np.max(np.abs(grad - mu * ha))) / scale


def oracle_solve(prob: AmplitudeProblem, grid_step: float = 1e-3) -> AmplitudeSolution:
    """Exhaustive grid search over t in [0,1)^n; independent of the dual path.

    Keeps every grid point whose constraint mismatch is within
    max(H) * grid_step and returns the best objective among them. Limited
    to n <= 3. The dual/KKT fields are NaN: a grid search has no
    multiplier.
    """
    if prob.n > 3:
        raise ValueError("oracle_solve handles n <= 3 only")
    if not 0.0 < grid_step <= 0.01:
        raise ValueError("grid_step must lie in (0, 0.01]")
    d, h, q = prob.d, prob.h_cap, prob.q
    if q > 0.0 and not q < float(np.sum(h)):
        raise InfeasibleAmplitude(
            f"target {q:.6e} not below the reachable bound {float(np.sum(h)):.6e}"
        )
    band = float(np.max(h)) * grid_step
    tv = np.arange(0.0, 1.0, grid_step)
    fv = np.sqrt(1.0 - tv * tv)

    if prob.n == 1:
        s = h[0] * tv
        mask = np.abs(s - q) <= band
        if not np.any(mask):
            raise InfeasibleAmplitude("no grid point inside the constraint band")
        obj = d[0] * fv
        idx = int(np.flatnonzero(mask)[np.argmax(obj[mask])])
        best_t = np.array([tv[idx]])
    elif prob.n == 2:
        s = h[0] * tv[:, None] + h[1] * tv[None, :]
        obj = d[0] * fv[:, None] + d[1] * fv[None, :]
        mask = np.abs(s - q) <= band
        if not np.any(mask):
            raise InfeasibleAmplitude("no grid point inside the constraint band")
        masked = np.where(mask, obj, -np.inf)
        i, j = np.unravel_index(int(np.argmax(masked)), masked.shape)
        best_t = np.array([tv[i], tv[j]])
    else:
        best_t = _oracle_3d(d, h, q, band, tv, fv)

    objective = float(np.sum(d * np.sqrt(1.0 - best_t * best_t)))
    return AmplitudeSolution(
        t=best_t,
        objective=objective,
        dual=float("nan"),
        kkt_residual=float("nan"),
        constraint_residual=abs(float(np.sum(h * best_t)) - q),
    )


def _oracle_3d(d, h, q, band, tv, fv):
    # Enumerate the (t2, t3) plane once, sorted by its constraint
    # contribution, with block maxima for O(sqrt) range-max queries; then
    # sweep t1. Equivalent to the full triple loop, just not cubic time.
    s23 = (h[1] * tv[:, None] + h[2] * tv[None, :]).ravel()
    f23 = (d[1] * fv[:, None] + d[2] * fv[None, :]).ravel()
    order = np.argsort(s23, kind="stable")
    s23s, f23s = s23[order], f23[order]
    block = 1024
    starts = np.arange(0, s23s.size, block)
    block_max = np.maximum.reduceat(f23s, starts)

    def window_max(i: int, j: int) -> float:
        # max of f23s[i:j), j > i
        b_lo, b_hi = i // block, (j - 1) // block
        if b_lo == b_hi:
            return float(np.max(f23s[i:j]))
        best = max(
            float(np.max(f23s[i:(b_lo + 1) * block])),
            float(np.max(f23s[b_hi * block:j])),
        )
        if b_hi - b_lo > 1:
            best = max(best, float(np.max(block_max[b_lo + 1:b_hi])))
        return best

    best_val = -np.inf
    best_pick = None
    for i1, t1 in enumerate(tv):
        target = q - h[0] * t1
        i = int(np.searchsorted(s23s, target - band, side="left"))
        j = int(np.searchsorted(s23s, target + band, side="right"))
        if i >= j:
            continue
        val = d[0] * fv[i1] + window_max(i, j)
        if val > best_val:
            best_val = val
            best_pick = (i1, i, j)
    if best_pick is None:
        raise InfeasibleAmplitude("no grid point inside the constraint band")
    i1, i, j = best_pick
    kflat = int(order[i + int(np.argmax(f23s[i:j]))])
    i2, i3 = divmod(kflat, tv.size)
    return np.array([tv[i1], tv[i2], tv[i3]])


def random_amplitude_problem(rng: np.random.Generator, n: int) -> AmplitudeProblem:
    """Well-conditioned random instance for solver/oracle cross-checks.

    Weights stay within a 3:1 ratio and the target uses at most 40% of the
    reachable bound, keeping the dual multiplier small enough that the grid
    oracle's constraint-band slack stays within the comparison tolerance.
    """
    d = rng.uniform(0.5, 1.5, n)
    h = rng.uniform(0.5, 1.5, n)
    q = rng.uniform(0.1, 0.4) * float(np.sum(h))
    return AmplitudeProblem(d=d, h_cap=h, q=q)


def align_phases(ch: ChannelRealization, t: np.ndarray) -> StarConfig:
    """Phase-align both cascades and split magnitudes per energy conservation.

    Reflection phases cancel the BS-element-user cascade and transmission
    phases the BS-element-controller cascade, making both aggregate sums
    real nonnegative; |R_i| = sqrt(1 - t_i^2) follows from |R|^2 + |T|^2 = 1.
    """
    t = np.asarray(t, dtype=np.float64)
    if t.shape != ch.h1.shape:
        raise ValueError("t must match the number of elements")
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise ValueError("transmission magnitudes must lie in [0, 1]")
    two_pi = 2.0 * np.pi
    theta_r = np.mod(-(np.angle(ch.h1) + np.angle(ch.h2)), two_pi)
    theta_t = np.mod(-(np.angle(ch.h1) + np.angle(ch.g)), two_pi)
    r_mag = np.sqrt(1.0 - t * t)
    return StarConfig(refl=r_mag * np.exp(1j * theta_r), trans=t * np.exp(1j * theta_t))
