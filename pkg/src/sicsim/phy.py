"""Core data types and closed-form SNR/rate expressions.

During the signaling phase the base station superposes the user's data
stream (power share a1) and the surface-control stream (share a2) on one
NOMA waveform; the surface splits each element's energy between a
reflection coefficient R_i (serving the user) and a transmission
coefficient T_i (serving the controller behind the surface).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization

ENERGY_TOL = 1e-9  # per-element |R|^2 + |T|^2 = 1 tolerance

_LN2 = math.log(2.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class StarConfig:
    """Per-element reflection/transmission coefficients of the surface."""

    refl: np.ndarray
    trans: np.ndarray

    def __post_init__(self):
        for name in ("refl", "trans"):
            vec = np.asarray(getattr(self, name), dtype=np.complex128)
            vec.setflags(write=False)
            object.__setattr__(self, name, vec)
        if self.refl.shape != self.trans.shape or self.refl.ndim != 1 or self.refl.size < 1:
            raise ValueError("refl and trans must be 1-D vectors of identical length")
        r2 = np.abs(self.refl) ** 2
        t2 = np.abs(self.trans) ** 2
        worst = float(np.max(np.abs(r2 + t2 - 1.0)))
        if worst > ENERGY_TOL:
            raise ValueError(f"energy conservation violated by {worst:.3e}")
        if np.any(r2 > 1.0 + ENERGY_TOL) or np.any(t2 > 1.0 + ENERGY_TOL):
            raise ValueError("coefficient magnitude outside [0, 1]")

    @property
    def n_elements(self) -> int:
        return self.refl.size

    def refl_phases(self) -> np.ndarray:
        """Reflection phases normalized into [0, 2*pi)."""
        return np.mod(np.angle(self.refl), 2.0 * np.pi)

    def trans_phases(self) -> np.ndarray:
        """Transmission phases normalized into [0, 2*pi)."""
        return np.mod(np.angle(self.trans), 2.0 * np.pi)


@dataclass(frozen=True)
class PowerSplit:
    """NOMA power allocation; a2 = 1 - a1 is derived, never stored."""

    a1: float

    def __post_init__(self):
        if not 0.0 < self.a1 < 1.0:
            raise ValueError(f"a1 must lie strictly inside (0, 1), got {self.a1}")

    @property
    def a2(self) -> float:
        return 1.0 - self.a1


@dataclass(frozen=True)
class SystemParams:
    """Transmit power, noise, decoding thresholds, and solver knobs.

    Thresholds are linear SNRs; convert from dB at the boundary with
    db_to_linear. max_iters defaults to 2 because the alternating scheme
    reaches its fixed point after one full pass and the second pass only
    certifies it.
    """

    ps_watts: float
    n0_watts: float
    gamma_th1: float
    gamma_th2: float
    n_elements: int
    tol_bisect: float = 1e-10
    tol_fixed_point: float = 1e-10
    max_iters: int = 2

    def __post_init__(self):
        for name in ("ps_watts", "n0_watts", "gamma_th1", "gamma_th2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.n_elements < 1:
            raise ValueError("n_elements must be >= 1")
        for name in ("tol_bisect", "tol_fixed_point"):
            tol = getattr(self, name)
            if not 0.0 < tol <= 1e-2:
                raise ValueError(f"{name} must lie in (0, 1e-2]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class SnrReport:
    """Aggregate gains, SNRs, and spectral efficiencies of one solution."""

    s1: float
    s2: float
    gamma1: float
    gamma21: float
    gamma22: float
    rate_user: float
    rate_mc: float


def aggregate_gain_s1(ch: ChannelRealization, cfg: StarConfig) -> float:
    """Reflected-path gain |sum_i h1_i h2_i R_i|^2."""
    if cfg.n_elements != ch.n_elements:
        raise ValueError(f"config has {cfg.n_elements} elements, channels have {ch.n_elements}")
    return float(np.abs(np.sum(ch.h1 * ch.h2 * cfg.refl)) ** 2)


def aggregate_gain_s2(ch: ChannelRealization, cfg: StarConfig) -> float:
    """Transmitted-path gain |sum_i h1_i g_i T_i|^2."""
    if cfg.n_elements != ch.n_elements:
        raise ValueError(f"config has {cfg.n_elements} elements, channels have {ch.n_elements}")
    return float(np.abs(np.sum(ch.h1 * ch.g * cfg.trans)) ** 2)


def snr_user(s1: float, split: PowerSplit, p: SystemParams) -> float:
    """User SNR: the control stream is residual interference after SIC order."""
    return s1 * split.a1 * p.ps_watts / (s1 * split.a2 * p.ps_watts + p.n0_watts)


def snr_mc_info(s2: float, split: PowerSplit, p: SystemParams) -> float:
    """Controller SNR when decoding the (stronger) data stream for SIC."""
    return s2 * split.a1 * p.ps_watts / (s2 * split.a2 * p.ps_watts + p.n0_watts)


def snr_mc_ctrl(s2: float, split: PowerSplit, p: SystemParams) -> float:
    """Controller SNR on the control stream after the data stream is removed."""
    return s2 * split.a2 * p.ps_watts / p.n0_watts


def rate_user(gamma1: float) -> float:
    """User spectral efficiency log2(1 + gamma1) in bits/s/Hz."""
    return math.log1p(gamma1) / _LN2


def rate_mc(gamma22: float) -> float:
    """Control-link spectral efficiency log2(1 + gamma22) in bits/s/Hz."""
    return math.log1p(gamma22) / _LN2


def data_phase_rate(ch: ChannelRealization, p: SystemParams) -> float:
    """Rate once the commanded full-reflection beam steering is in effect.

    Every element reflects at unit magnitude with phase canceling the
    cascade, so the aggregate gain is (sum_i |h1_i||h2_i|)^2 and the whole
    budget carries data.
    """
    gain = float(np.sum(np.abs(ch.h1) * np.abs(ch.h2))) ** 2
    return rate_user(gain * p.ps_watts / p.n0_watts)


def snr_report(ch: ChannelRealization, cfg: StarConfig, split: PowerSplit, p: SystemParams) -> SnrReport:
    """Evaluate all link metrics for one (channels, config, split) triple."""
    s1 = aggregate_gain_s1(ch, cfg)
    s2 = aggregate_gain_s2(ch, cfg)
    g1 = snr_user(s1, split, p)
    g22 = snr_mc_ctrl(s2, split, p)
    return SnrReport(
        s1=s1,
        s2=s2,
        gamma1=g1,
        gamma21=snr_mc_info(s2, split, p),
        gamma22=g22,
        rate_user=rate_user(g1),
        rate_mc=rate_mc(g22),
    )
