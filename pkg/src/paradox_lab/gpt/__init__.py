"""Box-world states, operations, wirings and the no-signalling polytope."""

from .operations import (
    Branch,
    InvalidOperation,
    NoSignallingResult,
    SignallingWitness,
    Transformation,
    ValidationResult,
    apply,
    apply_deterministic,
    apply_local,
    conditional_box,
    is_no_signalling,
    marginal,
    marginal_at,
    tensor,
    tensor_all,
    validate_operation,
)
from .polytope import (
    CHSH_LOCAL_BOUND,
    chsh_value,
    enumerate_ns_vertices,
    in_convex_hull,
    max_chsh,
    random_polytope_point,
    spanning_set,
    violates_chsh,
)
from .serialize import dump_state, load_state
from .states import (
    BIT,
    GBIT,
    QUBIT_FIDUCIAL,
    DomainError,
    SignallingError,
    StateVector,
    SystemSignature,
    local_deterministic,
    make_gbit,
    make_pr_box,
    pr_box_variant,
    pure_gbit,
    uniform_state,
)
from .wiring import (
    BipartiteMeasurement,
    BipartiteTransformation,
    Mixture,
    Relabeling,
    WiringError,
    compile_wiring,
    gbit_relabelings,
    simulate_wiring,
)
