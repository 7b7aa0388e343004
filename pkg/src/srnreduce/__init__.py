"""Elimination of fast-degraded non-interacting species from stochastic reaction networks."""
from .dsl import dumps_network, load_network, network_from_dict, network_to_dict, parse_network, render_network
from .elimination import (
    EliminationGraph,
    ReducedSRN,
    build_elimination_graph,
    contract_walk,
    enumerate_walks,
    find_noninteracting_sets,
    is_noninteracting,
    is_proper,
    reduce,
    walk_intensity,
    walk_sum_intensities,
)
from .errors import ConfigError, NumericalError, ParseError, SRNError, StructureError
from .network import (
    MassAction,
    Reaction,
    ReactionNetwork,
    Tabulated,
    TimeModulated,
    conservation_class,
    is_weakly_reversible,
    mass_action_intensity,
    validate_compatibility,
)

__version__ = "0.1.0"
