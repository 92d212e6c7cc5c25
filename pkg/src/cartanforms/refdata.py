"""Loader for the bundled reference models of the three curves.

Each file data/reference/x{p}.json carries the published model of the level-p
curve: quadric coefficient rows (lexicographic x_i x_j monomial order,
i <= j), known CM points keyed by discriminant, the inert discriminant list,
and for p = 17 also displayed basis coefficients (eta basis), the displayed
product-relation matrix, and seed newform expansions used by tests.
"""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=None)
def load_reference(p: int) -> dict:
    res = resources.files("cartanforms").joinpath(f"data/reference/x{p}.json")
    return json.loads(res.read_text())


def monomial_pairs(dim: int) -> list[tuple[int, int]]:
    """(i, j), 1 <= i <= j <= dim, in the row order the quadric files use."""
    return [(i, j) for i in range(1, dim + 1) for j in range(i, dim + 1)]
