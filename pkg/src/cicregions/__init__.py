"""Rate regions and coding checks for the two-user cognitive interference channel."""

from .config import InstanceConfig, load_instance, save_instance
from .errors import CicError, ConfigurationError, ConsistencyError, GuardError
from .instances import inst_a, random_instance
from .measures import MiQuery, cond_mutual_info, entropy, parse_mi_label
from .polytope import (
    Polygon2D,
    PolytopeError,
    polygon_contains,
    project_region,
    project_system,
    project_with_trace,
    reconstruct_witness,
)
from .probability import (
    AuxFactorization,
    ChannelSpec,
    JointPmf,
    VariableRoster,
    compose,
    marginalize,
)
from .regions import (
    CHANGED_SUFFIXES,
    ConstraintSystem,
    IdentityReport,
    LinearInequality,
    RateVector,
    added_term_value,
    build_system,
    constraint_gap,
    exponent_identity_check,
    system_from_dict,
    system_to_dict,
)
from .simulate import SimConfig, SimContext, SimReport, SweepReport, run_trials, sweep_rp2c

__version__ = "0.1.0"

__all__ = [
    "AuxFactorization",
    "CHANGED_SUFFIXES",
    "ChannelSpec",
    "CicError",
    "ConfigurationError",
    "ConsistencyError",
    "ConstraintSystem",
    "GuardError",
    "IdentityReport",
    "InstanceConfig",
    "JointPmf",
    "LinearInequality",
    "MiQuery",
    "Polygon2D",
    "PolytopeError",
    "RateVector",
    "SimConfig",
    "SimContext",
    "SimReport",
    "SweepReport",
    "VariableRoster",
    "added_term_value",
    "build_system",
    "compose",
    "cond_mutual_info",
    "constraint_gap",
    "entropy",
    "exponent_identity_check",
    "inst_a",
    "load_instance",
    "marginalize",
    "parse_mi_label",
    "polygon_contains",
    "project_region",
    "project_system",
    "project_with_trace",
    "random_instance",
    "reconstruct_witness",
    "run_trials",
    "save_instance",
    "sweep_rp2c",
    "system_from_dict",
    "system_to_dict",
]
