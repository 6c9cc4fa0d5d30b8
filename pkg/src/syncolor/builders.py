"""Constructors for grid networks and the named colorings.

All grids are indexed row-major: node ``(i, j)`` of an ``m x n`` grid is
``i * n + j``, rows ``0..m-1`` and columns ``0..n-1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from .network import Coloring, Network, amalgamate, is_balanced
from .perm import (
    Permutation,
    PermGroup,
    grid_element,
    orbits,
    partition_stabilizer,
    direct_product_grid_group,
)

ROW, COLUMN, DIAGONAL = "row", "column", "diagonal"
INHIBITORY, EXCITATORY = "inhibitory", "excitatory"


def _check_dims(m: int, n: int) -> None:
    if m < 1 or n < 1:
        raise ValueError(f"grid dimensions must be positive, got {m}x{n}")


def group_network(m: int, n: int, diagonal: bool = True) -> Network:
    """The group (opinion) network on an ``m x n`` grid.

    One arrow per ordered pair of distinct nodes, typed by whether the pair
    shares a row, a column, or neither. ``diagonal=False`` drops the last
    kind, which never changes balance.
    """
    _check_dims(m, n)
    arrows = []
    for head in range(m * n):
        hi, hj = divmod(head, n)
        for tail in range(m * n):
            if tail == head:
                continue
            ti, tj = divmod(tail, n)
            if ti == hi:
                arrows.append((tail, head, 0))
            elif tj == hj:
                arrows.append((tail, head, 1))
            elif diagonal:
                arrows.append((tail, head, 2))
    types = (ROW, COLUMN, DIAGONAL) if diagonal else (ROW, COLUMN)
    return Network([0] * (m * n), arrows, types)


def untrained_wilson(m: int, n: int) -> Network:
    """``n`` disjoint columns of ``m`` nodes, all-to-all inhibitory inside each."""
    _check_dims(m, n)
    arrows = []
    for j in range(n):
        for a in range(m):
            for b in range(m):
                if a != b:
                    arrows.append((a * n + j, b * n + j, 0))
    return Network([0] * (m * n), arrows, (INHIBITORY, EXCITATORY))


@dataclass(frozen=True)
class Pattern:
    """A learned pattern: ``rows[j]`` is the chosen row in column ``j``."""

    rows: tuple[int, ...]

    def __init__(self, rows: Sequence[int]) -> None:
        object.__setattr__(self, "rows", tuple(int(r) for r in rows))

    def nodes(self, n: int) -> list[int]:
        return [r * n + j for j, r in enumerate(self.rows)]


@dataclass(frozen=True)
class TrainedWilsonSpec:
    m: int
    n: int
    patterns: tuple[Pattern, ...] = field(default=())

    def __post_init__(self) -> None:
        _check_dims(self.m, self.n)
        pats = tuple(p if isinstance(p, Pattern) else Pattern(p) for p in self.patterns)
        object.__setattr__(self, "patterns", pats)
        for p in pats:
            if len(p.rows) != self.n:
                raise ValueError(f"pattern {p.rows} has {len(p.rows)} entries, expected {self.n}")
            if any(not 0 <= r < self.m for r in p.rows):
                raise ValueError(f"pattern {p.rows} leaves the {self.m}x{self.n} grid")


def train(spec: TrainedWilsonSpec) -> Network:
    """Untrained Wilson network plus one excitatory clique per pattern.

    Nodes shared by several patterns get one arrow per pattern, so parallel
    excitatory arrows appear where patterns overlap.
    """
    base = untrained_wilson(spec.m, spec.n)
    arrows = list(base.arrows)
    for p in spec.patterns:
        nodes = p.nodes(spec.n)
        arrows.extend((a, b, 1) for a in nodes for b in nodes if a != b)
    return Network(base.node_types, arrows, base.arrow_types)


def classify_input_types(spec: TrainedWilsonSpec) -> list[int]:
    """Number of learned patterns containing each node.

    For two distinct patterns the values 0, 1, 2 are the input types A, B, C.
    """
    tags = [0] * (spec.m * spec.n)
    for p in spec.patterns:
        for v in p.nodes(spec.n):
            tags[v] += 1
    return tags


def input_type_letters(tags: Sequence[int]) -> list[str]:
    return ["ABC"[t] if t < 3 else f"T{t}" for t in tags]


def expected_two_pattern_aut_order(m: int, n: int, k: int) -> int:
    """Order of the group generated by the listed two-pattern symmetries.

    ``k`` counts the columns where the two patterns pick different rows.
    ``k == 0`` means the patterns coincide.
    """
    if m < 2 or not 0 <= k <= n:
        raise ValueError(f"need m >= 2 and 0 <= k <= n, got m={m}, n={n}, k={k}")
    f = math.factorial
    if k == 0:
        return f(m - 1) ** n * f(n)
    return 2 * f(m - 2) ** k * f(k) * f(m - 1) ** (n - k) * f(n - k)


def vertex_group_order(m: int, n: int) -> int:
    """``(m-1)! (n-1)! ((m-1)(n-1))!``: input symmetries of a node of the group network."""
    _check_dims(m, n)
    f = math.factorial
    return f(m - 1) * f(n - 1) * f((m - 1) * (n - 1))


# ---- named colorings ---------------------------------------------------------

# Supports of the five colors of the 5x5 Latin-square coloring.
LATIN5_MATRICES = (
    ((1, 0, 0, 0, 0), (0, 1, 0, 0, 0), (0, 0, 1, 0, 0), (0, 0, 0, 1, 0), (0, 0, 0, 0, 1)),
    ((0, 1, 0, 0, 0), (0, 0, 1, 0, 0), (0, 0, 0, 1, 0), (0, 0, 0, 0, 1), (1, 0, 0, 0, 0)),
    ((0, 0, 1, 0, 0), (0, 0, 0, 0, 1), (0, 1, 0, 0, 0), (1, 0, 0, 0, 0), (0, 0, 0, 1, 0)),
    ((0, 0, 0, 1, 0), (1, 0, 0, 0, 0), (0, 0, 0, 0, 1), (0, 0, 1, 0, 0), (0, 1, 0, 0, 0)),
    ((0, 0, 0, 0, 1), (0, 0, 0, 1, 0), (1, 0, 0, 0, 0), (0, 1, 0, 0, 0), (0, 0, 1, 0, 0)),
)

# D5 generators of the isotropy group of the amalgamated 2-coloring, 1-based cycles.
FIG7_G = ("(13245)", "(13245)")
FIG7_H = ("(1)(24)(35)", "(14)(23)(5)")


def fig7_generators() -> tuple[Permutation, Permutation]:
    g = grid_element(5, 5, *(Permutation.from_cycles(c, 5) for c in FIG7_G))
    h = grid_element(5, 5, *(Permutation.from_cycles(c, 5) for c in FIG7_H))
    return g, h


def fig3_coloring() -> tuple[Network, Coloring]:
    """Exotic balanced 5-coloring of the 3 x 6 group network.

    Columns 0-2 carry the cyclic Latin square ``(j - i) mod 3``; columns 3-5
    use one color on the positions ``(i, i + 3)`` and another elsewhere.
    """
    net = group_network(3, 6)
    colors = []
    for i in range(3):
        for j in range(6):
            if j < 3:
                colors.append((j - i) % 3)
            else:
                colors.append(3 if i == j - 3 else 4)
    coloring = Coloring(colors)
    assert is_balanced(net, coloring).balanced
    sigma = partition_stabilizer(direct_product_grid_group(3, 6), coloring)
    assert sigma.order() == 3 and orbits(sigma).num_colors == 6
    return net, coloring


def latin_coloring(square: Sequence[Sequence[int]]) -> Coloring:
    """Coloring of the ``k x k`` group network with ``color(i, j) = square[i][j]``."""
    return Coloring(x for row in square for x in row)


def latin5_coloring() -> tuple[Network, Coloring]:
    """The 5 x 5 Latin-square coloring; color ``k`` is the support of ``LATIN5_MATRICES[k]``."""
    square = [[0] * 5 for _ in range(5)]
    for k, mat in enumerate(LATIN5_MATRICES):
        for i in range(5):
            for j in range(5):
                if mat[i][j]:
                    square[i][j] = k
    return group_network(5, 5), latin_coloring(square)


@lru_cache(maxsize=1)
def fig7_partner() -> int:
    """Which Latin color merges with color 0 to give the D5-isotropy 2-coloring.

    Tries each candidate and keeps the one whose isotropy group has order 10
    and contains the printed generators.
    """
    _, latin = latin5_coloring()
    group = direct_product_grid_group(5, 5)
    g, h = fig7_generators()
    hits = []
    for k in range(1, 5):
        merged = amalgamate(latin, [0 if c in (0, k) else 1 for c in range(5)])
        sigma = partition_stabilizer(group, merged)
        if sigma.order() == 10 and g in sigma and h in sigma:
            hits.append(k)
    if len(hits) != 1:
        raise RuntimeError(f"expected exactly one merge partner, found {hits}")
    return hits[0]


def fig7_coloring() -> tuple[Network, Coloring]:
    """Amalgamated 2-coloring of the Latin 5-coloring with D5 isotropy."""
    net, latin = latin5_coloring()
    k = fig7_partner()
    return net, amalgamate(latin, [0 if c in (0, k) else 1 for c in range(5)])


def three_row_patterns(m: int, n: int, rows: Sequence[int] = (0, 1, 2)) -> TrainedWilsonSpec:
    """Trained Wilson network whose patterns are whole rows."""
    return TrainedWilsonSpec(m, n, tuple(Pattern([r] * n) for r in rows))
