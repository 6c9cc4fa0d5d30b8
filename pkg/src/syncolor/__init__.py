"""Balanced colorings, symmetry and synchrony in coupled cell networks."""

from .network import (
    BalanceReport,
    Coloring,
    Network,
    UnbalancedColoring,
    amalgamate,
    coarsest_balanced_refinement,
    input_profile,
    is_balanced,
    lift_coloring,
    quotient,
    to_dot,
)
from .perm import (
    GroupTooLarge,
    PermGroup,
    Permutation,
    automorphism_group,
    group_from_generators,
    is_orbit_coloring,
    orbits,
    partition_stabilizer,
)
from .analysis import (
    EnumerationLimits,
    TheoremReport,
    TruncatedEnumeration,
    enumerate_balanced_colorings,
    is_exotic,
)

__version__ = "0.1.0"
