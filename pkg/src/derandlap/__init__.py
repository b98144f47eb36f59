"""derandlap: deterministic approximation of graph-Laplacian pseudoinverses
by iterated derandomized squaring, with Richardson-boosted accuracy and
random-walk statistics (hitting times, commute times, escape probabilities).
"""

from .dsquare import (
    ChainInfeasibleError,
    ChainLevel,
    DerandChain,
    build_chain,
    chain_stats,
    compose_label,
    dense_level_matrix,
    dsquare,
    entry,
    entry_row,
    materialize_level,
    rot_chain,
    split_label,
)
from .expanders import (
    ExpanderInfeasibleError,
    ExpanderSpec,
    bias_of,
    build_expander,
    cayley_transition,
    complete_with_loops,
    duplicate_spec,
    expander_as_graph,
)
from .metrics import Metrics
from .multigraph import (
    GraphError,
    LabeledMultigraph,
    RegularizedGraph,
    connected_components,
    from_edge_list,
    induced_subgraph,
    regularize,
)
from .oracle import (
    SpectralCertificate,
    absorbing_escape_probabilities,
    absorbing_hitting_times,
    check_approx,
    exact_pinv,
    graph_lambda,
    measured_approx_parameter,
    spectral_gap,
)
from .pinv import (
    ExpansionPlan,
    PinvApproximation,
    constant_approx,
    expansion_entry,
    identity_step,
    product_entry,
)
from .richardson import (
    BoostConfig,
    BoostContractError,
    boost_apply,
    boost_matrix,
    certified_parameter,
    make_boost_config,
    richardson_sum,
)
from .solver import (
    ChainOptions,
    ContractError,
    SolveReport,
    WalkQuery,
    apply_normalized_pinv,
    approx_pinv,
    commute_time,
    escape_probabilities,
    hitting_time,
    solve,
)
from .verify import run_harness

__version__ = "0.1.0"
