"""Entanglement-distillation simulator and capacity toolkit for
generalized dephasing channels, with an exact small-system oracle."""

__version__ = "0.1.0"

from .capacity import CapacityReport, capacity_report, divergence_to_uniform, shannon_entropy
from .channel import (
    ChoiMixture,
    GeneralizedDephasingChannel,
    apply_dense,
    choi_syndrome_sample,
    load_channel_spec,
    sample_x,
    save_channel_spec,
    teleport_simulate,
)
from .dense_oracle import (
    DenseState,
    fidelity,
    max_entangled,
    relative_entropy,
    trace_distance,
    von_neumann_entropy,
)
from .distributions import DistributionSpec, Explicit, PrgInduced, UniformAll, UniformSupport
from .distill import (
    ComplexityAudit,
    DistillConfig,
    DistillReport,
    TrialOutcome,
    choose_m,
    collision_probability,
    end_to_end_transmit,
    run_monte_carlo,
    run_trial,
    run_trial_from_seed,
)
from .gf2 import (
    BitString,
    Gf2Matrix,
    PauliString,
    RngFault,
    mat_vec_mul,
    pauli_multiply,
    sample_invertible,
)
from .locc_net import Message, PartyResult, ProtocolViolation, run_loopback, run_party
from .prg import (
    AdvantageReport,
    OwfSpec,
    PrgConfig,
    build_owf,
    distinguisher_battery,
    gl_extend,
    induced_distribution,
    stretch,
)

__all__ = [
    "__version__",
    "BitString",
    "Gf2Matrix",
    "PauliString",
    "RngFault",
    "mat_vec_mul",
    "pauli_multiply",
    "sample_invertible",
    "DenseState",
    "max_entangled",
    "von_neumann_entropy",
    "relative_entropy",
    "fidelity",
    "trace_distance",
    "DistributionSpec",
    "Explicit",
    "UniformSupport",
    "UniformAll",
    "PrgInduced",
    "GeneralizedDephasingChannel",
    "ChoiMixture",
    "sample_x",
    "choi_syndrome_sample",
    "apply_dense",
    "teleport_simulate",
    "load_channel_spec",
    "save_channel_spec",
    "OwfSpec",
    "PrgConfig",
    "build_owf",
    "gl_extend",
    "stretch",
    "induced_distribution",
    "distinguisher_battery",
    "AdvantageReport",
    "CapacityReport",
    "shannon_entropy",
    "divergence_to_uniform",
    "capacity_report",
    "ComplexityAudit",
    "DistillConfig",
    "TrialOutcome",
    "DistillReport",
    "choose_m",
    "collision_probability",
    "run_trial",
    "run_trial_from_seed",
    "run_monte_carlo",
    "end_to_end_transmit",
    "Message",
    "PartyResult",
    "ProtocolViolation",
    "run_party",
    "run_loopback",
]
