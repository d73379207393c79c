"""Monte Carlo sweep engine: average rate and power split over parameter grids.

A sweep runs the optimizer over (transmit power x element count x control
threshold) grid points, averaging each point over seeded channel
realizations. Realization r always draws from substream (master_seed, r),
so every grid point with the same element count sees the same channel set
and reruns are bit-identical regardless of worker count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from multiprocessing import get_context

import numpy as np

from .channel import FadingParams, NodeGeometry, generate_channels
from .optimizer import SolveStatus, optimize
from .phy import SystemParams, db_to_linear

CSV_HEADER = (
    "ps_watts,n_elements,gamma_th2_db,mean_rate_user,mean_alpha1,"
    "feasible_fraction,mean_rate_mc,realizations_used"
)

DEFAULT_N0_WATTS = 1e-12
DEFAULT_MASTER_SEED = 1234
DEFAULT_PS_GRID = (20.0, 25.0, 30.0, 35.0, 40.0)


class ConfigError(Exception):
    """Malformed or unknown sweep configuration input."""


@dataclass(frozen=True)
class SweepSpec:
    geometry: NodeGeometry
    fading: FadingParams
    ps_grid: tuple[float, ...]
    n_list: tuple[int, ...]
    gamma_th1_db: float
    gamma_th2_list_db: tuple[float, ...]
    realizations: int
    master_seed: int
    output_path: str
    n0_watts: float = DEFAULT_N0_WATTS
    a1_init: float = 0.5
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "ps_grid", tuple(float(x) for x in self.ps_grid))
        object.__setattr__(self, "n_list", tuple(int(x) for x in self.n_list))
        object.__setattr__(
            self, "gamma_th2_list_db", tuple(float(x) for x in self.gamma_th2_list_db)
        )
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if not (self.ps_grid and self.n_list and self.gamma_th2_list_db):
            raise ConfigError("parameter grids must be nonempty")
        if any(b <= a for a, b in zip(self.ps_grid, self.ps_grid[1:])):
            raise ConfigError("ps_grid must be strictly increasing")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not self.n0_watts > 0:
            raise ConfigError("n0_watts must be positive")


@dataclass(frozen=True)
class SweepRow:
    """Aggregates of one grid point, taken over feasible realizations only."""

    ps_watts: float
    n_elements: int
    gamma_th2_db: float
    mean_rate_user: float
    mean_alpha1: float
    feasible_fraction: float
    mean_rate_mc: float
    realizations_used: int
    solver_failures: int = 0  # diagnostic; not part of the CSV contract


def figure2_spec(
    output_path: str = "figure2.csv",
    realizations: int = 100,
    master_seed: int = DEFAULT_MASTER_SEED,
    workers: int = 1,
) -> SweepSpec:
    """Average rate and a1 vs transmit power for element counts 16/36/64."""
    return SweepSpec(
        geometry=NodeGeometry(),
        fading=FadingParams(),
        ps_grid=DEFAULT_PS_GRID,
        n_list=(16, 36, 64),
        gamma_th1_db=10.0,
        gamma_th2_list_db=(20.0,),
        realizations=realizations,
        master_seed=master_seed,
        output_path=output_path,
        workers=workers,
    )


def figure3_spec(
    output_path: str = "figure3.csv",
    realizations: int = 100,
    master_seed: int = DEFAULT_MASTER_SEED,
    workers: int = 1,
) -> SweepSpec:
    """Average rate and a1 vs transmit power for control thresholds 5/15/25 dB."""
    return SweepSpec(
        geometry=NodeGeometry(),
        fading=FadingParams(),
        ps_grid=DEFAULT_PS_GRID,
        n_list=(64,),
        gamma_th1_db=10.0,
        gamma_th2_list_db=(5.0, 15.0, 25.0),
        realizations=realizations,
        master_seed=master_seed,
        output_path=output_path,
        workers=workers,
    )


def _init_seed(master_seed: int, realization: int) -> int:
    # Surface-initialization stream, disjoint from the channel streams
    # (which use spawn_key=(r,)).
    ss = np.random.SeedSequence(master_seed, spawn_key=(realization, 1))
    return int(ss.generate_state(1, np.uint64)[0])


def _realization_task(args: tuple[SweepSpec, int, int]) -> np.ndarray:
    """All grid points of one (element count, realization) pair.

    Returns an array of shape (len(ps_grid), len(gamma_th2_list), 5) holding
    (feasible, rate_user, alpha1, rate_mc, solver_failure) per point.
    """
    spec, n, r = args
    fading = replace(spec.fading, seed=spec.master_seed)
    ch = generate_channels(spec.geometry, fading, n, realization=r)
    seed = _init_seed(spec.master_seed, r)
    gamma_th1 = db_to_linear(spec.gamma_th1_db)
    out = np.zeros((len(spec.ps_grid), len(spec.gamma_th2_list_db), 5))
    for i, ps in enumerate(spec.ps_grid):
        for j, g2_db in enumerate(spec.gamma_th2_list_db):
            p = SystemParams(
                ps_watts=ps,
                n0_watts=spec.n0_watts,
                gamma_th1=gamma_th1,
                gamma_th2=db_to_linear(g2_db),
                n_elements=n,
            )
            res = optimize(ch, p, a1_init=spec.a1_init, rng_seed=seed)
            if res.status is SolveStatus.OPTIMAL:
                out[i, j] = (1.0, res.report.rate_user, res.split.a1, res.report.rate_mc, 0.0)
            elif res.status is SolveStatus.SOLVER_FAILURE:
                out[i, j, 4] = 1.0
    return out


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """Evaluate every grid point; one row per (ps, n, gamma_th2) triple.

    Infeasible realizations are excluded from the means and show up in
    feasible_fraction; solver failures additionally increment
    solver_failures. Results do not depend on the worker count.
    """
    tasks = [(spec, n, r) for n in spec.n_list for r in range(spec.realizations)]
    if spec.workers > 1:
        with get_context("fork").Pool(spec.workers) as pool:
            results = pool.map(_realization_task, tasks)
    else:
        results = [_realization_task(t) for t in tasks]

    rows = []
    per_n = {
        n: np.stack(results[k * spec.realizations:(k + 1) * spec.realizations])
        for k, n in enumerate(spec.n_list)
    }
    for i, ps in enumerate(spec.ps_grid):
        for n in spec.n_list:
            data = per_n[n]  # (realizations, n_ps, n_g2, 5)
            for j, g2_db in enumerate(spec.gamma_th2_list_db):
                cell = data[:, i, j, :]
                feasible = cell[:, 0] > 0.5
                used = int(np.count_nonzero(feasible))
                if used:
                    mean_rate = float(np.mean(cell[feasible, 1]))
                    mean_a1 = float(np.mean(cell[feasible, 2]))
                    mean_rate_mc = float(np.mean(cell[feasible, 3]))
                else:
                    mean_rate = mean_a1 = mean_rate_mc = math.nan
                rows.append(
                    SweepRow(
                        ps_watts=ps,
                        n_elements=n,
                        gamma_th2_db=g2_db,
                        mean_rate_user=mean_rate,
                        mean_alpha1=mean_a1,
                        feasible_fraction=used / spec.realizations,
                        mean_rate_mc=mean_rate_mc,
                        realizations_used=used,
                        solver_failures=int(np.count_nonzero(cell[:, 4] > 0.5)),
                    )
                )
    return rows


def run_and_write(spec: SweepSpec) -> list[SweepRow]:
    """Run the sweep and persist it to spec.output_path with a metadata line."""
    rows = run_sweep(spec)
    write_csv(rows, spec.output_path, comment=spec_comment(spec))
    return rows


def spec_comment(spec: SweepSpec) -> str:
    """Run parameters that the CSV columns do not carry, for the '#' line."""
    return (
        f"n0_watts={spec.n0_watts!r} gamma_th1_db={spec.gamma_th1_db!r} "
        f"realizations={spec.realizations} master_seed={spec.master_seed} "
        f"rician_k_db={spec.fading.rician_k_db!r} ref_loss_db={spec.fading.ref_loss_db!r}"
    )


def write_csv(rows: list[SweepRow], path: str, comment: str | None = None) -> None:
    """Write rows under the fixed header; floats via repr (round-trip exact)."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        if comment is not None:
            f.write(f"# {comment}\n")
        f.write(CSV_HEADER + "\n")
        for row in rows:
            f.write(
                f"{row.ps_watts!r},{row.n_elements},{row.gamma_th2_db!r},"
                f"{row.mean_rate_user!r},{row.mean_alpha1!r},{row.feasible_fraction!r},"
                f"{row.mean_rate_mc!r},{row.realizations_used}\n"
            )


def read_csv(path: str) -> list[SweepRow]:
    """Parse a sweep CSV back into rows; '#' comment lines are skipped."""
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln.rstrip("\n") for ln in f if not ln.startswith("#")]
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError(f"unexpected CSV header in {path}")
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 8:
            raise ConfigError(f"malformed CSV row: {ln}")
        rows.append(
            SweepRow(
                ps_watts=float(parts[0]),
                n_elements=int(parts[1]),
                gamma_th2_db=float(parts[2]),
                mean_rate_user=float(parts[3]),
                mean_alpha1=float(parts[4]),
                feasible_fraction=float(parts[5]),
                mean_rate_mc=float(parts[6]),
                realizations_used=int(parts[7]),
            )
        )
    return rows


# Flat key=value configuration files ------------------------------------------

_GEOMETRY_KEYS = {
    "bs_x_m", "bs_y_m", "bs_h_m",
    "ris_x_m", "ris_y_m", "ris_h_m",
    "mc_x_m", "mc_y_m", "mc_h_m",
    "ue_x_m", "ue_y_m", "ue_h_m",
}
_FADING_KEYS = {"ref_loss_db", "exp_bs_ris", "exp_ris_ue", "exp_ris_mc", "rician_k_db"}
_LIST_KEYS = {"ps_grid_watts", "n_list", "gamma_th2_list_db"}
_SCALAR_KEYS = {
    "gamma_th1_db", "realizations", "master_seed", "n0_watts",
    "a1_init", "workers", "output_path",
}


def _parse_value(key: str, raw: str):
    if key == "output_path":
        return raw
    parts = [x.strip() for x in raw.split(",") if x.strip()]
    if key in _LIST_KEYS:
        vals = tuple(float(x) for x in parts)
        if not vals:
            raise ConfigError(f"{key}: empty list")
        return vals
    if len(parts) != 1:
        raise ConfigError(f"{key}: expected a single value, got {raw!r}")
    if key in ("realizations", "master_seed", "workers"):
        return int(parts[0])
    return float(parts[0])


def load_sweep_spec(path: str) -> SweepSpec:
    """Read a flat key=value sweep config; unknown keys are rejected.

    Every key is optional and defaults to the standard scenario; see the
    README for the full key list and a worked example.
    """
    values: dict[str, object] = {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw_lines = f.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    known = _GEOMETRY_KEYS | _FADING_KEYS | _LIST_KEYS | _SCALAR_KEYS
    for lineno, line in enumerate(raw_lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, raw = (part.strip() for part in text.split("=", 1))
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _parse_value(key, raw)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc

    geo_defaults = NodeGeometry()
    def geo(prefix: str, attr_xy: tuple[float, float], attr_h: float):
        x = values.get(f"{prefix}_x_m", attr_xy[0])
        y = values.get(f"{prefix}_y_m", attr_xy[1])
        h = values.get(f"{prefix}_h_m", attr_h)
        return (float(x), float(y)), float(h)

    try:
        bs_xy, bs_h = geo("bs", geo_defaults.bs_xy, geo_defaults.bs_h)
        ris_xy, ris_h = geo("ris", geo_defaults.ris_xy, geo_defaults.ris_h)
        mc_xy, mc_h = geo("mc", geo_defaults.mc_xy, geo_defaults.mc_h)
        ue_xy, ue_h = geo("ue", geo_defaults.ue_xy, geo_defaults.ue_h)
        geometry = NodeGeometry(
            bs_xy=bs_xy, ris_xy=ris_xy, mc_xy=mc_xy, ue_xy=ue_xy,
            bs_h=bs_h, ris_h=ris_h, mc_h=mc_h, ue_h=ue_h,
        )
        fading_defaults = FadingParams()
        fading = FadingParams(
            ref_loss_db=float(values.get("ref_loss_db", fading_defaults.ref_loss_db)),
            exp_bs_ris=float(values.get("exp_bs_ris", fading_defaults.exp_bs_ris)),
            exp_ris_ue=float(values.get("exp_ris_ue", fading_defaults.exp_ris_ue)),
            exp_ris_mc=float(values.get("exp_ris_mc", fading_defaults.exp_ris_mc)),
            rician_k_db=float(values.get("rician_k_db", fading_defaults.rician_k_db)),
        )
        return SweepSpec(
            geometry=geometry,
            fading=fading,
            ps_grid=values.get("ps_grid_watts", DEFAULT_PS_GRID),
            n_list=tuple(int(n) for n in values.get("n_list", (16, 36, 64))),
            gamma_th1_db=float(values.get("gamma_th1_db", 10.0)),
            gamma_th2_list_db=values.get("gamma_th2_list_db", (20.0,)),
            realizations=int(values.get("realizations", 100)),
            master_seed=int(values.get("master_seed", DEFAULT_MASTER_SEED)),
            output_path=str(values.get("output_path", "sweep.csv")),
            n0_watts=float(values.get("n0_watts", DEFAULT_N0_WATTS)),
            a1_init=float(values.get("a1_init", 0.5)),
            workers=int(values.get("workers", 1)),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
