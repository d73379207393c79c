"""Closed-form NOMA power split for a fixed surface configuration.

For a given transmitted-path gain S2 there is an open interval of data
shares a1 that lets the controller both strip the data stream (SIC) and
decode the control stream. The user SNR increases with a1, so the optimum
sits at the interval's upper endpoint, where the control-stream SNR
constraint is exactly tight.
"""
from __future__ import annotations

from dataclasses import dataclass

from .phy import PowerSplit, SystemParams


@dataclass(frozen=True)
class FeasibilityReport:
    """Admissible-interval check for the data share a1 at a given S2."""

    s2_required: float
    s2_actual: float
    feasible: bool
    a1_lower: float
    a1_upper: float
    degenerate: bool = False  # no transmitted path at all (s2 <= 0)


class InfeasiblePowerSplit(Exception):
    """No admissible power split; carries the failed FeasibilityReport."""

    def __init__(self, report: FeasibilityReport):
        self.report = report
        super().__init__(
            f"transmitted-path gain {report.s2_actual:.6e} below required {report.s2_required:.6e}"
        )


def feasibility_threshold(p: SystemParams) -> float:
    """Smallest transmitted-path gain S2 admitting any valid power split."""
    return (p.gamma_th1 * p.gamma_th2 + p.gamma_th1 + p.gamma_th2) * p.n0_watts / p.ps_watts


def check_feasibility(s2: float, p: SystemParams) -> FeasibilityReport:
    """Compute the admissible a1 interval; feasible iff it is nonempty.

    The interval is open, so the boundary case (endpoints equal, i.e. S2
    exactly at the threshold) is rejected.
    """
    required = feasibility_threshold(p)
    if s2 <= 0.0:
        return FeasibilityReport(
            s2_required=required,
            s2_actual=s2,
            feasible=False,
            a1_lower=float("inf"),
            a1_upper=float("-inf"),
            degenerate=True,
        )
    s2ps = s2 * p.ps_watts
    lower = p.gamma_th1 * (s2ps + p.n0_watts) / (s2ps * (1.0 + p.gamma_th1))
    upper = 1.0 - p.gamma_th2 * p.n0_watts / s2ps
    return FeasibilityReport(
        s2_required=required,
        s2_actual=s2,
        feasible=lower < upper,
        a1_lower=lower,
        a1_upper=upper,
    )


def optimal_power_split(s2: float, p: SystemParams) -> PowerSplit:
    """Rate-optimal split a2 = gamma_th2 * N0 / (S2 * Ps), a1 = 1 - a2.

    Raises InfeasiblePowerSplit when no admissible split exists. At the
    returned split the control-stream SNR equals gamma_th2 exactly and the
    SIC constraint holds with margin.
    """
    report = check_feasibility(s2, p)
    if not report.feasible:
        raise InfeasiblePowerSplit(report)
    a2 = p.gamma_th2 * p.n0_watts / (s2 * p.ps_watts)
    return PowerSplit(a1=1.0 - a2)
