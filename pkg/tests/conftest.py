"""Shared fixtures: per-class pipeline reports, computed once per session.

Heavy artifacts (class representatives, centralizers, normalizers) persist
in a cache directory across sessions: $ORBIFOLD_CACHE if set, otherwise
~/.cache/orblat.  Every cached object is re-verified on load.
"""

import os

import pytest

CACHE_DIR = os.environ.get("ORBIFOLD_CACHE") or os.path.join(
    os.path.expanduser("~"), ".cache", "orblat"
)


@pytest.fixture(scope="session")
def case_report():
    """Memoized access to run_case(label) reports."""
    from orblat.orbifold import run_case

    memo = {}

    def get(label):
        if label not in memo:
            memo[label] = run_case(label, cache_dir=CACHE_DIR)
        return memo[label]

    return get
