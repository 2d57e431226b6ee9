"""Almost-globally stable equivariant observer for GNSS-aided inertial navigation."""

from ._jit import BACKEND
from .analysis import (
    ErrorMetrics,
    LimitSet,
    SpectralData,
    characteristic_roots,
    classify_limit,
    error_metrics,
    lyapunov_value,
    pe_cascade_state,
    pe_metric,
    spectral_data,
    trace_pairing_check,
)
from .dynamics import (
    Corrections,
    Gains,
    ImuInput,
    ObserverState,
    SystemState,
    correction_terms,
    error_derivative,
    measure,
    observer_derivative,
    system_derivative,
)
from .group_se23 import (
    ExtendedPose,
    Se23Tangent,
    SimGroupElement,
    SimTangent,
    bracket_sim_se23,
    conjugate,
    observer_error,
    se23_compose,
    se23_inverse,
    sim23_compose,
    sim23_inverse,
)
from .lie_core import hat, project_to_so3, rotation_angle, so3_exp, vee
from .output import read_csv, write_csv, write_svg_plots
from .sim import InputProfile, SimConfig, Trajectory, paper_config, paper_input_profile, run, step

__version__ = "0.1.0"
