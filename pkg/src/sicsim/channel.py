"""Node geometry, distance-based path loss, and Rician small-scale fading.

Generates the three complex channel vectors of one coherence interval:
BS -> RIS element (h1), RIS element -> user (h2), RIS element -> controller (g).
All gains are linear-scale amplitudes; dB appears only in parameter fields.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


class Link(Enum):
    BS_RIS = "bs_ris"
    RIS_UE = "ris_ue"
    RIS_MC = "ris_mc"


@dataclass(frozen=True)
class NodeGeometry:
    """Planar coordinates (m) plus mounting heights (m) of the four nodes.

    Defaults place the BS at the origin, the RIS/controller pair 75 m out,
    and the user 150 m down-range -- a single-cell urban micro layout.
    """

    bs_xy: tuple[float, float] = (0.0, 0.0)
    ris_xy: tuple[float, float] = (75.0, 75.0)
    mc_xy: tuple[float, float] = (75.0, 76.0)
    ue_xy: tuple[float, float] = (150.0, 0.0)
    bs_h: float = 30.0
    ris_h: float = 10.0
    mc_h: float = 10.0
    ue_h: float = 1.5

    def __post_init__(self):
        for name in ("bs_h", "ris_h", "mc_h", "ue_h"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for link in Link:
            if link_distance(self, link) <= 0:
                raise ValueError(f"degenerate geometry: zero {link.value} distance")


@dataclass(frozen=True)
class FadingParams:
    """Path-loss and small-scale fading parameters.

    Power gain at distance d is 10^(ref_loss_db/10) * d^(-exponent); fading is
    unit-mean-power Rician with the given K-factor (K = -inf dB is Rayleigh,
    K = +inf dB is a pure LoS phasor).
    """

    ref_loss_db: float = -30.0
    exp_bs_ris: float = 2.2
    exp_ris_ue: float = 2.8
    exp_ris_mc: float = 2.2
    rician_k_db: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if not math.isfinite(self.ref_loss_db):
            raise ValueError("ref_loss_db must be finite")
        for name in ("exp_bs_ris", "exp_ris_ue", "exp_ris_mc"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def exponent(self, link: Link) -> float:
        return {
            Link.BS_RIS: self.exp_bs_ris,
            Link.RIS_UE: self.exp_ris_ue,
            Link.RIS_MC: self.exp_ris_mc,
        }[link]


@dataclass(frozen=True)
class ChannelRealization:
    """Per-element complex channels of one coherence interval."""

    h1: np.ndarray  # BS -> element i
    h2: np.ndarray  # element i -> user
    g: np.ndarray   # element i -> controller

    def __post_init__(self):
        for name in ("h1", "h2", "g"):
            vec = np.asarray(getattr(self, name), dtype=np.complex128)
            vec.setflags(write=False)
            object.__setattr__(self, name, vec)
        if not (self.h1.shape == self.h2.shape == self.g.shape) or self.h1.ndim != 1:
            raise ValueError("h1, h2, g must be 1-D vectors of identical length")
        if self.h1.size < 1:
            raise ValueError("need at least one element")
        for name in ("h1", "h2", "g"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite entries")

    @property
    def n_elements(self) -> int:
        return self.h1.size


def substream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for the substream identified by (seed, *key).

    Philox keyed through SeedSequence spawn keys: distinct keys give
    statistically independent streams, and the same (seed, key) always
    reproduces the same stream regardless of how many others were drawn.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def link_distance(geometry: NodeGeometry, link: Link) -> float:
    """3-D Euclidean distance (m) of one hop, including the height offset."""
    ends = {
        Link.BS_RIS: (geometry.bs_xy, geometry.bs_h, geometry.ris_xy, geometry.ris_h),
        Link.RIS_UE: (geometry.ris_xy, geometry.ris_h, geometry.ue_xy, geometry.ue_h),
        Link.RIS_MC: (geometry.ris_xy, geometry.ris_h, geometry.mc_xy, geometry.mc_h),
    }
    (x1, y1), h1, (x2, y2), h2 = ends[link]
    return math.sqrt((x1 - x2) ** 2 + (y1 - y2) ** 2 + (h1 - h2) ** 2)


def path_gain(distance: float, params: FadingParams, exponent: float) -> float:
    """Linear power gain 10^(ref_loss_db/10) * distance^(-exponent)."""
    return 10.0 ** (params.ref_loss_db / 10.0) * distance ** (-exponent)


def _rician_factors(k_db: float) -> tuple[float, float]:
    # (LoS weight, scattered weight); squares sum to 1 so E|fading|^2 = 1.
    if np.isposinf(k_db):
        return 1.0, 0.0
    k = 10.0 ** (k_db / 10.0)  # -inf dB -> k = 0 -> Rayleigh
    return math.sqrt(k / (k + 1.0)), math.sqrt(1.0 / (k + 1.0))


def generate_channels(
    geometry: NodeGeometry,
    params: FadingParams,
    n_elements: int,
    realization: int = 0,
) -> ChannelRealization:
    """Draw one channel realization; pure function of its arguments.

    Each entry is sqrt(path_gain) times a unit-mean-power Rician factor with
    a uniformly random LoS phase. Realization r uses substream
    (params.seed, r), so Monte Carlo runs can be generated out of order or in
    parallel with identical results.
    """
    if n_elements < 1:
        raise ValueError("n_elements must be >= 1")
    rng = substream(params.seed, realization)
    los_w, nlos_w = _rician_factors(params.rician_k_db)

    def draw(link: Link) -> np.ndarray:
        amp = math.sqrt(path_gain(link_distance(geometry, link), params, params.exponent(link)))
        los = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, n_elements))
        scatter = (rng.standard_normal(n_elements) + 1j * rng.standard_normal(n_elements)) / math.sqrt(2.0)
        return amp * (los_w * los + nlos_w * scatter)

    return ChannelRealization(h1=draw(Link.BS_RIS), h2=draw(Link.RIS_UE), g=draw(Link.RIS_MC))
