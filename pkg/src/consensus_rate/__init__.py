"""
Convergence-rate certificates for time-varying consensus systems.

The package works with systems ``x(t+1) = Gamma(t) x(t)`` where every
``Gamma(t)`` is row-stochastic.  It finds spanning-tree schedules in the
communication graphs, turns them into upper bounds on the contraction rate
of the diameter ``max(x) - min(x)``, and measures the true rate by
simulation or, for periodic systems, from eigenvalues.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .matrix_core import (  # noqa: F401
    MatrixSequence,
    diameter,
    dump_sequence,
    load_sequence,
    step,
    transition_product,
    validate_stochastic,
)
from .schedules import (  # noqa: F401
    IntervalPartition,
    MultiTreeSchedule,
    TreeSchedule,
    highest_index_attribution,
    validate_multi_schedule,
    validate_tree_schedule,
)
from .graphs import (  # noqa: F401
    DirectedGraphSnapshot,
    check_T_sequential,
    find_tree_schedule,
    graph_at,
    is_weakly_connected,
    neighbors,
    union_graph,
    weak_to_sequential,
)
from .bounds import (  # noqa: F401
    AlphaMatrixProfile,
    AlphaProfile,
    BoundReport,
    binom_count,
    corollary_rate,
    example6_profile,
    extract_alpha,
    extract_alpha_matrix,
    lemma4_closed_form,
    multi_tree_factor,
    profile_rate,
    propagate_diameter_bound,
    rate_corollary,
    rate_multi,
    rate_single,
    replicate_schedule,
    single_tree_factor,
)
from .simulation import (  # noqa: F401
    DelayTerm,
    EmpiricalRate,
    Trajectory,
    augment_delays,
    empirical_rate,
    simulate,
    spectral_rate_periodic,
)
