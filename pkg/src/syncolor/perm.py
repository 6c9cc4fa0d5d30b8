"""Permutation groups on ``0..degree-1``.

Groups are held as generators plus a stabilizer chain (base points with
Schreier transversals) built by a deterministic Schreier-Sims pass, which
gives exact order, membership and element listing.

Composition follows function notation: ``(p * q)(x) == p(q(x))``.
Cycle strings are read and written 1-based, as in printed mathematics.
"""

from __future__ import annotations

import itertools
import math
import re
from collections import deque
from typing import Callable, Iterable, Iterator, Sequence

from .network import Coloring, Network

DEFAULT_CAP = 10**7


class GroupTooLarge(RuntimeError):
    pass


def _mul(p: tuple, q: tuple) -> tuple:
    return tuple([p[j] for j in q])


def _inv(p: tuple) -> tuple:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


class Permutation:
    """A bijection of ``0..degree-1`` stored as its image tuple."""

    __slots__ = ("image",)

    def __init__(self, image: Iterable[int]) -> None:
        image = tuple(int(x) for x in image)
        if sorted(image) != list(range(len(image))):
            raise ValueError(f"not a permutation: {image}")
        self.image = image

    @classmethod
    def _raw(cls, image: tuple) -> "Permutation":
        p = cls.__new__(cls)
        p.image = image
        return p

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls._raw(tuple(range(degree)))

    @classmethod
    def from_cycles(cls, text_or_cycles, degree: int, one_based: bool = True) -> "Permutation":
        """Build from ``"(1 3 2)(4 5)"`` style text or a list of cycles."""
        if isinstance(text_or_cycles, str):
            cycles = []
            for body in re.findall(r"\(([^()]*)\)", text_or_cycles):
                body = body.strip()
                if not body:
                    continue
                if body.isdigit() and len(body) > 1 and degree <= 9:
                    # compact notation: "(13245)"
                    cycles.append([int(ch) for ch in body])
                else:
                    cycles.append([int(x) for x in re.split(r"[\s,]+", body)])
        else:
            cycles = [list(c) for c in text_or_cycles]
        image = list(range(degree))
        shift = 1 if one_based else 0
        for cyc in cycles:
            pts = [x - shift for x in cyc]
            for a, b in zip(pts, pts[1:] + pts[:1]):
                image[a] = b
        return cls(image)

    @property
    def degree(self) -> int:
        return len(self.image)

    def __call__(self, x: int) -> int:
        return self.image[x]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if other.degree != self.degree:
            raise ValueError("degree mismatch")
        return Permutation._raw(_mul(self.image, other.image))

    def __pow__(self, k: int) -> "Permutation":
        result = tuple(range(self.degree))
        base = self.image if k >= 0 else _inv(self.image)
        k = abs(k)
        while k:
            if k & 1:
                result = _mul(result, base)
            base = _mul(base, base)
            k >>= 1
        return Permutation._raw(result)

    def inverse(self) -> "Permutation":
        return Permutation._raw(_inv(self.image))

    def is_identity(self) -> bool:
        return all(i == x for i, x in enumerate(self.image))

    def order(self) -> int:
        return math.lcm(*[len(c) for c in self.cycles()]) if self.cycles() else 1

    def cycles(self) -> list[list[int]]:
        """Non-trivial cycles, 0-based, each starting at its smallest point."""
        seen, out = set(), []
        for i in range(self.degree):
            if i in seen or self.image[i] == i:
                continue
            cyc, j = [i], self.image[i]
            seen.add(i)
            while j != i:
                seen.add(j)
                cyc.append(j)
                j = self.image[j]
            out.append(cyc)
        return out

    def cycle_string(self, one_based: bool = True) -> str:
        shift = 1 if one_based else 0
        cycles = self.cycles()
        if not cycles:
            return "()"
        return "".join("(" + " ".join(str(x + shift) for x in c) + ")" for c in cycles)

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.image == other.image

    def __hash__(self) -> int:
        return hash(self.image)

    def __repr__(self) -> str:
        return f"Permutation({self.cycle_string()}, degree={self.degree})"


class _Level:
    __slots__ = ("base", "gens", "trans")

    def __init__(self, base: int) -> None:
        self.base = base
        self.gens: list[tuple] = []
        # point -> coset representative u with u[base] == point
        self.trans: dict[int, tuple] = {}


class PermGroup:
    """Permutation group with a stabilizer chain.

    Base points are picked as the smallest point moved by the generator
    that opens a new level, so construction is deterministic.
    """

    def __init__(self, degree: int, generators: Iterable[Permutation] = (), cap: int = DEFAULT_CAP):
        self.degree = degree
        self.cap = cap
        self.generators: list[Permutation] = []
        self._levels: list[_Level] = []
        self._id = tuple(range(degree))
        for g in generators:
            self.add_generator(g)

    # -- construction ----------------------------------------------------------
    def add_generator(self, g: Permutation) -> bool:
        """Add ``g``; returns False when it was already a member."""
        if g.degree != self.degree:
            raise ValueError(f"generator of degree {g.degree} in a group of degree {self.degree}")
        if self._sift(g.image, 0) is None:
            return False
        self.generators.append(g)
        self._add(g.image, 0)
        return True

    def _sift(self, g: tuple, start: int) -> tuple | None:
        """Residue of ``g`` after sifting from ``start``; None if it sifts to identity."""
        for lvl in self._levels[start:]:
            u = lvl.trans.get(g[lvl.base])
            if u is None:
                return g
            g = _mul(_inv(u), g)
        return None if g == self._id else g

    def _add(self, g: tuple, depth: int) -> None:
        if self._sift(g, depth) is None:
            return
        if depth == len(self._levels):
            b = next(i for i, x in enumerate(g) if x != i)
            lvl = _Level(b)
            lvl.trans[b] = self._id
            self._levels.append(lvl)
        lvl = self._levels[depth]
        lvl.gens.append(g)
        self._grow(depth, [_mul(g, u) for u in list(lvl.trans.values())])

    def _grow(self, depth: int, pending: list[tuple]) -> None:
        lvl = self._levels[depth]
        queue = deque(pending)
        while queue:
            g = queue.popleft()
            pt = g[lvl.base]
            u = lvl.trans.get(pt)
            if u is None:
                lvl.trans[pt] = g
                queue.extend(_mul(s, g) for s in lvl.gens)
            else:
                h = _mul(_inv(u), g)
                if h != self._id:
                    self._add(h, depth + 1)

    # -- queries ---------------------------------------------------------------
    def order(self) -> int:
        return math.prod(len(lvl.trans) for lvl in self._levels)

    @property
    def base(self) -> list[int]:
        return [lvl.base for lvl in self._levels]

    def transversal_sizes(self) -> list[int]:
        return [len(lvl.trans) for lvl in self._levels]

    def __contains__(self, g: Permutation) -> bool:
        return g.degree == self.degree and self._sift(g.image, 0) is None

    def identity(self) -> Permutation:
        return Permutation._raw(self._id)

    def elements(self) -> Iterator[Permutation]:
        """Every element once, in a fixed order. Refuses groups above ``cap``."""
        if self.order() > self.cap:
            raise GroupTooLarge(f"group order {self.order()} exceeds cap {self.cap}")
        for g in self._iter_raw():
            yield Permutation._raw(g)

    def _iter_raw(self) -> Iterator[tuple]:
        reps = [list(lvl.trans.values()) for lvl in self._levels]

        def rec(depth: int, acc: tuple) -> Iterator[tuple]:
            if depth == len(reps):
                yield acc
                return
            for u in reps[depth]:
                yield from rec(depth + 1, _mul(acc, u))

        yield from rec(0, self._id)

    def search(self, prefix_ok: Callable[[tuple, int], bool], leaf_ok: Callable[[tuple], bool]) -> Iterator[tuple]:
        """Elements ``g`` with ``leaf_ok(g)``, pruning along the chain.

        An element is ``u_0 u_1 ... u_k`` with ``u_i`` a transversal element at
        level ``i``. The images of base points ``0..i`` are already fixed by
        the partial product, so ``prefix_ok(partial, i)`` may reject a whole
        coset at once.
        """
        reps = [list(lvl.trans.values()) for lvl in self._levels]

        def rec(depth: int, acc: tuple) -> Iterator[tuple]:
            if depth == len(reps):
                if leaf_ok(acc):
                    yield acc
                return
            for u in reps[depth]:
                g = _mul(acc, u)
                if prefix_ok(g, depth):
                    yield from rec(depth + 1, g)

        yield from rec(0, self._id)

    def orbits(self) -> Coloring:
        return orbits(self)

    def random_element(self, rng) -> Permutation:
        g = self._id
        for lvl in self._levels:
            reps = list(lvl.trans.values())
            k = int(rng.integers(len(reps))) if hasattr(rng, "integers") else rng.randrange(len(reps))
            g = _mul(g, reps[k])
        return Permutation._raw(g)

    def report(self) -> dict:
        return {
            "order": self.order(),
            "generators": [g.cycle_string() for g in self.generators],
            "orbit_partition": [[v + 1 for v in c] for c in orbits(self).classes()],
        }

    def __repr__(self) -> str:
        return f"PermGroup(degree={self.degree}, order={self.order()}, ngens={len(self.generators)})"


def group_from_generators(gens: Sequence[Permutation], degree: int | None = None,
                          cap: int = DEFAULT_CAP) -> PermGroup:
    degrees = {g.degree for g in gens}
    if len(degrees) > 1:
        raise ValueError(f"generators have mixed degrees {sorted(degrees)}")
    if degree is None:
        if not degrees:
            raise ValueError("degree is required for an empty generating set")
        degree = degrees.pop()
    elif degrees and degrees != {degree}:
        raise ValueError(f"generators have degree {degrees}, expected {degree}")
    return PermGroup(degree, gens, cap=cap)


def symmetric_group(points: Sequence[int], degree: int) -> PermGroup:
    """Full symmetric group on ``points``, fixing everything else."""
    pts = list(points)
    gens = []
    if len(pts) >= 2:
        img = list(range(degree))
        img[pts[0]], img[pts[1]] = pts[1], pts[0]
        gens.append(Permutation(img))
    if len(pts) >= 3:
        img = list(range(degree))
        for a, b in zip(pts, pts[1:] + pts[:1]):
            img[a] = b
        gens.append(Permutation(img))
    return PermGroup(degree, gens)


def orbits(group: PermGroup) -> Coloring:
    """Orbit partition of the group as a normalized coloring."""
    parent = list(range(group.degree))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in group.generators:
        for i, j in enumerate(g.image):
            a, b = find(i), find(j)
            if a != b:
                parent[max(a, b)] = min(a, b)
    return Coloring(find(i) for i in range(group.degree))


# ---- automorphisms -----------------------------------------------------------

def _refine(net: Network, cells: list[list[int]]) -> list[list[int]]:
    """Equitable refinement of an ordered partition.

    Cells split by counts of in- and out-arrows per (arrow type, cell index);
    the new cells keep the position of the old cell and are ordered by key.
    The result depends only on structure, never on node labels.
    """
    while True:
        cell_of = [0] * net.node_count
        for idx, cell in enumerate(cells):
            for v in cell:
                cell_of[v] = idx
        new_cells: list[list[int]] = []
        for cell in cells:
            if len(cell) == 1:
                new_cells.append(cell)
                continue
            keyed: dict[tuple, list[int]] = {}
            for v in cell:
                ins = sorted((t, cell_of[u]) for u, t in net.inputs[v])
                outs = sorted((t, cell_of[u]) for u, t in net.outputs[v])
                keyed.setdefault((tuple(ins), tuple(outs)), []).append(v)
            for key in sorted(keyed):
                new_cells.append(keyed[key])
        if len(new_cells) == len(cells):
            return new_cells
        cells = new_cells


def _individualize(cells: list[list[int]], v: int) -> list[list[int]]:
    out = []
    for cell in cells:
        if v in cell and len(cell) > 1:
            out.append([v])
            out.append([u for u in cell if u != v])
        else:
            out.append(cell)
    return out


def _shape(cells: list[list[int]]) -> tuple[int, ...]:
    return tuple(len(c) for c in cells)


def _is_automorphism(net: Network, img: Sequence[int]) -> bool:
    nt = net.node_types
    if any(nt[img[v]] != nt[v] for v in range(net.node_count)):
        return False
    mult = net.multiplicity
    return all(mult.get((img[a], img[b], t), 0) == k for (a, b, t), k in mult.items())


def automorphism_group(net: Network, cap: int = DEFAULT_CAP) -> PermGroup:
    """Exact automorphism group by individualization and refinement.

    A first path of individualized vertices ``v_0, v_1, ...`` is fixed. Going
    from the deepest level up, for each ``w`` in the cell of ``v_i`` that is
    not yet in the orbit of ``v_i`` under the generators found so far, we
    search for an automorphism fixing ``v_0..v_{i-1}`` and sending ``v_i`` to
    ``w``. Those generators then generate the full group.
    """
    n = net.node_count
    group = PermGroup(n, cap=cap)
    if n <= 1:
        return group
    start = sorted(range(n), key=lambda v: net.node_types[v])
    cells0: list[list[int]] = []
    for _, grp in itertools.groupby(start, key=lambda v: net.node_types[v]):
        cells0.append(list(grp))
    cells0 = _refine(net, cells0)

    # first path
    path_cells = [cells0]
    path_vertices: list[int] = []
    path_target: list[int] = []
    cells = cells0
    while len(cells) < n:
        idx = next(i for i, c in enumerate(cells) if len(c) > 1)
        v = min(cells[idx])
        path_target.append(idx)
        path_vertices.append(v)
        cells = _refine(net, _individualize(cells, v))
        path_cells.append(cells)
    first_leaf = [c[0] for c in cells]

    def search_down(level: int, cells: list[list[int]]) -> tuple | None:
        if len(cells) == n:
            img = [0] * n
            for a, b in zip(first_leaf, (c[0] for c in cells)):
                img[a] = b
            return tuple(img) if _is_automorphism(net, img) else None
        for u in cells[path_target[level]]:
            nxt = _refine(net, _individualize(cells, u))
            if _shape(nxt) != _shape(path_cells[level + 1]):
                continue
            found = search_down(level + 1, nxt)
            if found is not None:
                return found
        return None

    gens: list[Permutation] = []
    for level in range(len(path_vertices) - 1, -1, -1):
        v = path_vertices[level]
        stab = [g for g in gens if all(g.image[p] == p for p in path_vertices[:level])]
        orbit = _orbit_of(v, stab)
        for w in path_cells[level][path_target[level]]:
            if w in orbit:
                continue
            nxt = _refine(net, _individualize(path_cells[level], w))
            if _shape(nxt) != _shape(path_cells[level + 1]):
                continue
            found = search_down(level + 1, nxt)
            if found is not None:
                g = Permutation._raw(found)
                gens.append(g)
                stab.append(g)
                group.add_generator(g)
                orbit = _orbit_of(v, stab)
    return group


def _orbit_of(v: int, gens: Sequence[Permutation]) -> set[int]:
    orbit = {v}
    queue = [v]
    while queue:
        x = queue.pop()
        for g in gens:
            y = g.image[x]
            if y not in orbit:
                orbit.add(y)
                queue.append(y)
    return orbit


def partition_stabilizer(group: PermGroup, coloring: Coloring) -> PermGroup:
    """Elements of ``group`` mapping every color class onto itself.

    Runs a pruned search over the stabilizer chain: a coset is dropped as
    soon as a base point is sent to a point of another color. Found elements
    are added as generators only when not already in the subgroup built so
    far, but every element is visited, so the result is exact.
    """
    if len(coloring) != group.degree:
        raise ValueError("coloring and group have different degrees")
    colors = coloring.colors
    base = group.base
    sub = PermGroup(group.degree, cap=group.cap)

    def prefix_ok(g: tuple, depth: int) -> bool:
        b = base[depth]
        return colors[g[b]] == colors[b]

    def leaf_ok(g: tuple) -> bool:
        return all(colors[x] == colors[i] for i, x in enumerate(g))

    for g in group.search(prefix_ok, leaf_ok):
        sub.add_generator(Permutation._raw(g))
    return sub


def is_orbit_coloring(net: Network, coloring: Coloring, aut: PermGroup | None = None) -> bool:
    """True when the coloring equals the orbit coloring of its isotropy subgroup."""
    if aut is None:
        aut = automorphism_group(net)
    return orbits(partition_stabilizer(aut, coloring)) == coloring


def are_conjugate(group: PermGroup, a: Permutation, b: Permutation) -> bool:
    if a not in group or b not in group:
        raise ValueError("both permutations must belong to the group")
    if a == b:
        return True
    if a.order() != b.order() or sorted(map(len, a.cycles())) != sorted(map(len, b.cycles())):
        return False
    for g in group.elements():
        if g * a * g.inverse() == b:
            return True
    return False


def conjugacy_classes(group: PermGroup, predicate: Callable[[Permutation], bool] = lambda g: True
                      ) -> list[list[Permutation]]:
    """Conjugacy classes (as element lists) of elements satisfying ``predicate``."""
    elems = list(group.elements())
    pending = {g for g in elems if predicate(g)}
    classes = []
    for x in elems:
        if x not in pending:
            continue
        cls = {g * x * g.inverse() for g in elems}
        pending -= cls
        classes.append(sorted(cls, key=lambda p: p.image))
    return classes


def grid_element(m: int, n: int, row_perm: Permutation, col_perm: Permutation) -> Permutation:
    """Flat permutation sending grid node ``(i, j)`` to ``(row_perm(i), col_perm(j))``.

    Nodes are indexed row-major: ``(i, j) -> i*n + j``.
    """
    if row_perm.degree != m or col_perm.degree != n:
        raise ValueError(f"expected degrees ({m}, {n}), got ({row_perm.degree}, {col_perm.degree})")
    r, c = row_perm.image, col_perm.image
    return Permutation._raw(tuple(r[i] * n + c[j] for i in range(m) for j in range(n)))


def grid_factors(m: int, n: int, g: Permutation) -> tuple[Permutation, Permutation] | None:
    """Inverse of ``grid_element``; None if ``g`` is not a row/column product."""
    if g.degree != m * n:
        raise ValueError("degree mismatch")
    rows = [g.image[i * n] // n for i in range(m)]
    cols = [g.image[j] % n for j in range(n)]
    try:
        alpha, beta = Permutation(rows), Permutation(cols)
    except ValueError:
        return None
    return (alpha, beta) if grid_element(m, n, alpha, beta) == g else None


def direct_product_grid_group(m: int, n: int) -> PermGroup:
    """``S_m x S_n`` acting on the ``m x n`` grid."""
    gens = []
    for row in symmetric_group(range(m), m).generators:
        gens.append(grid_element(m, n, row, Permutation.identity(n)))
    for col in symmetric_group(range(n), n).generators:
        gens.append(grid_element(m, n, Permutation.identity(m), col))
    return PermGroup(m * n, gens)


def dihedral_generators(group: PermGroup, k: int) -> tuple[Permutation, Permutation] | None:
    """Find ``r, s`` with ``r^k = s^2 = 1``, ``s r s = r^-1`` generating the group.

    Returns None if the group is not dihedral of order ``2k``.
    """
    if group.order() != 2 * k:
        return None
    elems = list(group.elements())
    rotations = [g for g in elems if g.order() == k]
    flips = [g for g in elems if g.order() == 2]
    for r in rotations:
        for s in flips:
            if s * r * s == r.inverse() and PermGroup(group.degree, [r, s]).order() == 2 * k:
                return r, s
    return None
