"""Python front end to the rpl C++ core."""

import json as _json

from ._rpl import (  # noqa: F401
    GroundState,
    InternalMode,
    Nonlinearity,
    Operators,
    RadialGrid,
    RefinedProfile,
    ResonanceStructure,
    RplError,
    build_operators,
    classify,
    discrete_spectrum,
    fgr_gram,
    growth_report,
    refined_profile,
    run_pipeline,
    simulate,
    solve_ground_state,
    summarize_report,
)
from ._rpl import cache_key as _cache_key


def cache_key(inputs):
    """Content hash of a JSON-serializable mapping (key order does not matter)."""
    return _cache_key(_json.dumps(inputs))
