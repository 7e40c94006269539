"""Entropic characteristics of finite-dimensional quantum channels."""

__version__ = "0.1.0"

from ._config import Tolerances, get_tolerances, tolerances
from .capacity import (
    CapacityResult,
    ConstraintSpec,
    OptimalityCertificate,
    capacity_gap,
    certify_optimality,
    channel_mutual_information,
    chi_capacity,
    chi_function,
    ci_via_chi,
    coherent_information,
    ea_capacity,
)
from .channels import (
    KrausChannel,
    StinespringIsometry,
    cq_channel,
    degrading_for_orthogonal_cq,
    dephasing_channel,
    depolarizing_channel,
    identity_channel,
    is_discrete_cq,
    random_channel,
    truncation_channel,
    unitary_channel,
    verify_degrading,
)
from .ensembles import (
    Ensemble,
    average_state,
    check_disturbance_identity,
    chi_quantity,
    entropic_disturbance,
    image,
    private_information,
)
from .estimators import CapacityGap, ChannelTransformer, ChiCapacity, ChiFunction, EACapacity
from .numerics import (
    gibbs_state,
    mutual_information,
    partial_trace,
    purify,
    relative_entropy,
    von_neumann_entropy,
)
from .validation import InfeasibleConstraintError, NotApplicableError, ValidationError
