"""Certified finite permutation quotients of free products of finite groups."""
from .errors import (
    CapExceededError,
    MalformedInputError,
    PotencyError,
    PreconditionError,
    VerificationError,
)
from .groups import (
    FiniteGroup,
    GroupHom,
    ValidationReport,
    direct_product,
    element_order,
    quotient_lcm,
    validate_group,
)
from .words import (
    Amalgam,
    FactorSystem,
    Letter,
    cartesian_power,
    cyclic_reduce,
    direct_image,
    reduce,
    syllable_count,
    word,
)
from .graph import (
    ActionGraph,
    Label,
    base_graph_direct_product,
    cayley_of_factor,
    crossing_counts,
    has_no_l_near_vertices,
    is_proper,
    overlap_condition,
    subgraph_of,
    trace_u_cycle,
    validate_action_graph,
)
from .surgery import (
    SurgerySpec,
    cut_shift,
    glue_cayley_copies,
    layered_surgery,
    make_proper_step,
    predicted_cycle_length,
)

__version__ = "0.1.0"
