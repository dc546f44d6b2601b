"""Python bindings for the ocplens consistency-analysis library.

File-level operations take and return the library's JSON documents as
strings; the numeric helpers exchange NumPy arrays.
"""

import json

from ._core import (
    COMPONENTS,
    UnicycleModel,
    analyze,
    hinge_objective,
    learn,
    ranking_table,
    scenario_hash,
    simulate,
    solve,
    solve_weight_lp,
)

__all__ = [
    "COMPONENTS",
    "UnicycleModel",
    "analyze",
    "hinge_objective",
    "learn",
    "load",
    "ranking_table",
    "scenario_hash",
    "simulate",
    "solve",
    "solve_weight_lp",
]


def load(text):
    """Parse a document returned by one of the file-level calls."""
    return json.loads(text)
