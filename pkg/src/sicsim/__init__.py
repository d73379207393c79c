"""STAR-RIS NOMA downlink optimizer for in-band surface control signaling.

The library covers one coherence interval end to end: seeded channel
generation, closed-form SNR/rate expressions, the feasibility test and
closed-form NOMA power split, the concave amplitude-splitting solver with
its brute-force oracle, the alternating optimization loop, and a Monte
Carlo sweep harness with CSV output.
"""

from .channel import (
    ChannelRealization,
    FadingParams,
    Link,
    NodeGeometry,
    generate_channels,
    link_distance,
    path_gain,
    substream,
)
from .optimizer import (
    ResidualEntry,
    SolveOutcome,
    SolveStatus,
    initialize,
    optimize,
    verify_outcome,
)
from .phy import (
    PowerSplit,
    SnrReport,
    StarConfig,
    SystemParams,
    aggregate_gain_s1,
    aggregate_gain_s2,
    data_phase_rate,
    db_to_linear,
    linear_to_db,
    rate_mc,
    rate_user,
    snr_mc_ctrl,
    snr_mc_info,
    snr_report,
    snr_user,
)
from .power import (
    FeasibilityReport,
    InfeasiblePowerSplit,
    check_feasibility,
    feasibility_threshold,
    optimal_power_split,
)
from .star import (
    AmplitudeProblem,
    AmplitudeSolution,
    AmplitudeSolverError,
    InfeasibleAmplitude,
    align_phases,
    build_amplitude_problem,
    oracle_solve,
    random_amplitude_problem,
    solve_amplitudes,
)
from .sweep import (
    ConfigError,
    SweepRow,
    SweepSpec,
    figure2_spec,
    figure3_spec,
    load_sweep_spec,
    read_csv,
    run_and_write,
    run_sweep,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AmplitudeProblem",
    "AmplitudeSolution",
    "AmplitudeSolverError",
    "ChannelRealization",
    "ConfigError",
    "FadingParams",
    "FeasibilityReport",
    "InfeasibleAmplitude",
    "InfeasiblePowerSplit",
    "Link",
    "NodeGeometry",
    "PowerSplit",
    "ResidualEntry",
    "SnrReport",
    "SolveOutcome",
    "SolveStatus",
    "StarConfig",
    "SweepRow",
    "SweepSpec",
    "SystemParams",
    "aggregate_gain_s1",
    "aggregate_gain_s2",
    "align_phases",
    "build_amplitude_problem",
    "check_feasibility",
    "data_phase_rate",
    "db_to_linear",
    "feasibility_threshold",
    "figure2_spec",
    "figure3_spec",
    "generate_channels",
    "initialize",
    "linear_to_db",
    "link_distance",
    "load_sweep_spec",
    "optimal_power_split",
    "optimize",
    "oracle_solve",
    "path_gain",
    "random_amplitude_problem",
    "rate_mc",
    "rate_user",
    "read_csv",
    "run_and_write",
    "run_sweep",
    "snr_mc_ctrl",
    "snr_mc_info",
    "snr_report",
    "snr_user",
    "solve_amplitudes",
    "substream",
    "verify_outcome",
    "write_csv",
]
