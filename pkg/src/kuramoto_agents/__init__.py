"""Amplitude-phase Kuramoto model of heterogeneous agents on networks."""

from .dynamics import (
    GeneralNodeSystem,
    ModelParams,
    StateDerivative,
    SystemState,
    eval_general_rhs,
    eval_kuramoto_rhs,
    kuramoto_system,
    sync_amplitude_fixed_point,
    wrap_phases,
)
from .experiments import (
    ExperimentSpec,
    SweepRecord,
    TopologySpec,
    initial_state,
    read_table,
    run_single,
    run_sweep,
    sample_frequencies,
    write_table,
    write_trajectory,
)
from .integrate import IntegrationConfig, Trajectory, simulate, step_euler, step_rk4
from .observables import (
    OrderSeries,
    mean_order_parameter,
    normalized_order_parameter,
    order_parameter,
    order_series,
)
from .topology import (
    Adjacency,
    all_to_all,
    deterministic_scale_free,
    load_adjacency,
    save_adjacency,
    validate,
)

__version__ = "0.1.0"
