"""Popular and stable matchings in three-dimensional instances with cyclic preferences."""
from .model import (
    Instance,
    InstanceError,
    InvalidMatchingError,
    Matching,
    MasterList,
    PreconditionError,
    Triple,
    Verdict,
    delta,
    detect_master_list,
    is_maximal,
    validate_matching,
    vote,
)
from .solve import (
    ab_popular_find,
    construct_obs1,
    enumerate_matchings,
    find_matching,
    strongly_popular_1ml,
    witness_2ml,
    witness_3ml,
)
from .verify import SearchLimitExceeded, blocking_triples, local_improvement, more_popular_search, verify

__version__ = "0.1.0"
