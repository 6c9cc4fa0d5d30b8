"""Coupled-cell networks, colorings, balance, refinement and quotients.

Nodes are ``0..node_count-1``. Every node carries a node type (an int) and
every arrow is a ``(tail, head, arrow_type)`` triple. Parallel arrows and
self-loops are allowed and always counted with multiplicity.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence


class UnbalancedColoring(ValueError):
    """Raised when an operation needs a balanced coloring and gets another."""


@dataclass(frozen=True)
class Coloring:
    """A partition of the nodes, stored as a normalized color list.

    Colors are renumbered ``0..k-1`` in order of first appearance, so two
    colorings describing the same partition compare (and hash) equal.
    """

    colors: tuple[int, ...]

    def __init__(self, colors: Iterable) -> None:
        relabel: dict = {}
        out = []
        for c in colors:
            if c not in relabel:
                relabel[c] = len(relabel)
            out.append(relabel[c])
        object.__setattr__(self, "colors", tuple(out))

    @classmethod
    def monochrome(cls, n: int) -> "Coloring":
        return cls([0] * n)

    @classmethod
    def discrete(cls, n: int) -> "Coloring":
        return cls(range(n))

    @classmethod
    def from_classes(cls, classes: Iterable[Iterable[int]], n: int) -> "Coloring":
        colors = [-1] * n
        for k, cls_ in enumerate(classes):
            for v in cls_:
                colors[v] = k
        if -1 in colors:
            raise ValueError("classes do not cover every node")
        return cls(colors)

    def __len__(self) -> int:
        return len(self.colors)

    def __getitem__(self, node: int) -> int:
        return self.colors[node]

    def __iter__(self):
        return iter(self.colors)

    @property
    def num_colors(self) -> int:
        return max(self.colors) + 1 if self.colors else 0

    def classes(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_colors)]
        for v, c in enumerate(self.colors):
            out[c].append(v)
        return out

    def class_sizes(self) -> list[int]:
        return [len(c) for c in self.classes()]

    def refines(self, other: "Coloring") -> bool:
        """True if every class of ``self`` lies inside a class of ``other``."""
        seen: dict[int, int] = {}
        for a, b in zip(self.colors, other.colors):
            if seen.setdefault(a, b) != b:
                return False
        return True

    def meet(self, other: "Coloring") -> "Coloring":
        return Coloring(zip(self.colors, other.colors))

    def to_json(self) -> dict:
        return {"colors": list(self.colors)}

    @classmethod
    def from_json(cls, data: Mapping) -> "Coloring":
        return cls(data["colors"])


@dataclass(frozen=True)
class Network:
    """Typed directed multigraph.

    ``node_types[v]`` is the type of node ``v``; ``arrows`` holds
    ``(tail, head, arrow_type)`` triples with ``arrow_type`` indexing
    ``arrow_types`` (the arrow-type names).
    """

    node_types: tuple[int, ...]
    arrows: tuple[tuple[int, int, int], ...] = ()
    arrow_types: tuple[str, ...] = ()
    node_type_names: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "node_types", tuple(int(t) for t in self.node_types))
        object.__setattr__(
            self, "arrows", tuple((int(a), int(b), int(t)) for a, b, t in self.arrows)
        )
        object.__setattr__(self, "arrow_types", tuple(self.arrow_types))
        object.__setattr__(self, "node_type_names", tuple(self.node_type_names))
        n = len(self.node_types)
        for tail, head, t in self.arrows:
            if not (0 <= tail < n and 0 <= head < n):
                raise ValueError(f"arrow {(tail, head, t)} refers to a node outside 0..{n - 1}")
            if not 0 <= t < len(self.arrow_types):
                raise ValueError(f"arrow {(tail, head, t)} has undeclared arrow type {t}")

    @property
    def node_count(self) -> int:
        return len(self.node_types)

    @property
    def num_arrow_types(self) -> int:
        return len(self.arrow_types)

    @cached_property
    def inputs(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per head node, the ``(tail, arrow_type)`` of each input arrow."""
        ins: list[list[tuple[int, int]]] = [[] for _ in range(self.node_count)]
        for tail, head, t in self.arrows:
            ins[head].append((tail, t))
        return tuple(tuple(x) for x in ins)

    @cached_property
    def outputs(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        outs: list[list[tuple[int, int]]] = [[] for _ in range(self.node_count)]
        for tail, head, t in self.arrows:
            outs[tail].append((head, t))
        return tuple(tuple(x) for x in outs)

    @cached_property
    def multiplicity(self) -> Counter:
        """Counter keyed by ``(tail, head, arrow_type)``."""
        return Counter(self.arrows)

    def in_degree(self, node: int, arrow_type: int | None = None) -> int:
        return sum(1 for _, t in self.inputs[node] if arrow_type is None or t == arrow_type)

    def arrow_type_id(self, name_or_id) -> int:
        if isinstance(name_or_id, str):
            try:
                return self.arrow_types.index(name_or_id)
            except ValueError:
                raise ValueError(f"unknown arrow type {name_or_id!r}") from None
        if not 0 <= name_or_id < self.num_arrow_types:
            raise ValueError(f"unknown arrow type {name_or_id!r}")
        return int(name_or_id)

    def restrict_to_type(self, arrow_type) -> "Network":
        t = self.arrow_type_id(arrow_type)
        return Network(
            self.node_types,
            [a for a in self.arrows if a[2] == t],
            self.arrow_types,
            self.node_type_names,
        )

    def relabel(self, perm: Sequence[int]) -> "Network":
        """Network with node ``v`` renamed ``perm[v]``."""
        types = [0] * self.node_count
        for v, t in enumerate(self.node_types):
            types[perm[v]] = t
        arrows = [(perm[a], perm[b], t) for a, b, t in self.arrows]
        return Network(types, arrows, self.arrow_types, self.node_type_names)

    def to_json(self) -> dict:
        return {
            "node_types": list(self.node_types),
            "arrow_types": list(self.arrow_types),
            "arrows": [list(a) for a in self.arrows],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Network":
        return cls(data["node_types"], [tuple(a) for a in data["arrows"]], data["arrow_types"])


def _check_coloring(net: Network, coloring: Coloring) -> None:
    if len(coloring) != net.node_count:
        raise ValueError(
            f"coloring has {len(coloring)} entries, network has {net.node_count} nodes"
        )


def input_profile(net: Network, node: int, coloring: Coloring) -> dict[tuple[int, int], int]:
    """Counts of input arrows of ``node`` keyed by ``(arrow_type, tail_color)``.

    Keys are inserted in sorted order so printed profiles are stable.
    """
    if not 0 <= node < net.node_count:
        raise IndexError(f"node {node} out of range 0..{net.node_count - 1}")
    _check_coloring(net, coloring)
    counts = Counter((t, coloring[tail]) for tail, t in net.inputs[node])
    return dict(sorted(counts.items()))


@dataclass(frozen=True)
class BalanceWitness:
    nodes: tuple[int, int]
    arrow_type: int | None  # None: the two nodes differ in node type
    profiles: tuple[dict, dict]


@dataclass(frozen=True)
class BalanceReport:
    balanced: bool
    witness: BalanceWitness | None = None

    def __bool__(self) -> bool:
        return self.balanced


def _profile_key(net: Network, node: int, colors: Sequence[int]) -> tuple:
    return tuple(sorted(Counter((t, colors[tail]) for tail, t in net.inputs[node]).items()))


def is_balanced(net: Network, coloring: Coloring) -> BalanceReport:
    """Decide balance and return a witness pair when it fails.

    Arrows of one type are interchangeable, so a color-preserving input
    isomorphism between two nodes exists exactly when their counts per
    ``(arrow_type, tail_color)`` agree. Comparing these counts is therefore
    equivalent to searching for the bijection.
    """
    _check_coloring(net, coloring)
    colors = coloring.colors
    rep: dict[int, int] = {}
    rep_key: dict[int, tuple] = {}
    for v in range(net.node_count):
        c = colors[v]
        key = _profile_key(net, v, colors)
        if c not in rep:
            rep[c], rep_key[c] = v, key
            continue
        u = rep[c]
        if net.node_types[u] != net.node_types[v]:
            return BalanceReport(False, BalanceWitness((u, v), None, ({}, {})))
        if key != rep_key[c]:
            pu = input_profile(net, u, coloring)
            pv = input_profile(net, v, coloring)
            bad = min(t for (t, col) in set(pu) | set(pv) if pu.get((t, col)) != pv.get((t, col)))
            pick = lambda p: {k: n for k, n in p.items() if k[0] == bad}  # noqa: E731
            return BalanceReport(False, BalanceWitness((u, v), bad, (pick(pu), pick(pv))))
    return BalanceReport(True)


def is_balanced_for_type(net: Network, coloring: Coloring, arrow_type) -> bool:
    """Balance of the subnetwork that keeps only arrows of one type."""
    sub = net.restrict_to_type(arrow_type)
    return is_balanced(sub, coloring).balanced


def _refine_step(net: Network, colors: Sequence[int]) -> list[tuple]:
    return [(colors[v], _profile_key(net, v, colors)) for v in range(net.node_count)]


def coarsest_balanced_refinement(net: Network, seed: Coloring | None = None) -> Coloring:
    """Coarsest balanced coloring refining both ``seed`` and the node types.

    Classes are split by input profile until nothing changes. Each split is
    forced for any balanced refinement, so the fixed point is the coarsest one.
    """
    if seed is None:
        seed = Coloring.monochrome(net.node_count)
    _check_coloring(net, seed)
    current = Coloring(zip(seed.colors, net.node_types))
    while True:
        nxt = Coloring(_refine_step(net, current.colors))
        if nxt.num_colors == current.num_colors:
            return current
        current = nxt


def quotient(net: Network, coloring: Coloring) -> tuple[Network, list[int]]:
    """Quotient network: one node per color, inputs copied from a representative.

    Returns the quotient and the map ``color -> quotient node`` (the identity
    on ``0..k-1`` because colors are normalized). Parallel arrows are kept.
    """
    report = is_balanced(net, coloring)
    if not report.balanced:
        raise UnbalancedColoring(f"cannot form a quotient: {report.witness}")
    classes = coloring.classes()
    node_types = [net.node_types[cls[0]] for cls in classes]
    arrows = []
    for k, cls in enumerate(classes):
        copied = sorted((coloring[tail], k, t) for tail, t in net.inputs[cls[0]])
        if __debug__:
            for other in cls[1:]:
                alt = sorted((coloring[tail], k, t) for tail, t in net.inputs[other])
                assert alt == copied, "quotient depends on the representative"
        arrows.extend(copied)
    return (
        Network(node_types, arrows, net.arrow_types, net.node_type_names),
        list(range(len(classes))),
    )


def lift_coloring(original: Network, coloring: Coloring, quotient_coloring: Coloring) -> Coloring:
    """Pull a coloring of the quotient back to the original network."""
    report = is_balanced(original, coloring)
    if not report.balanced:
        raise UnbalancedColoring(f"base coloring is not balanced: {report.witness}")
    if len(quotient_coloring) != coloring.num_colors:
        raise ValueError("quotient coloring must have one entry per color")
    lifted = Coloring(quotient_coloring[c] for c in coloring.colors)
    if __debug__:
        qnet, _ = quotient(original, coloring)
        if is_balanced(qnet, quotient_coloring).balanced:
            assert is_balanced(original, lifted).balanced, "lift of a balanced coloring is unbalanced"
    return lifted


def amalgamate(coloring: Coloring, merge: Mapping[int, int] | Sequence[int]) -> Coloring:
    """Merge colors: node ``v`` gets ``merge[coloring[v]]``, then normalize."""
    for c in range(coloring.num_colors):
        try:
            merge[c]
        except (KeyError, IndexError):
            raise ValueError(f"merge map has no entry for color {c}") from None
    return Coloring(merge[c] for c in coloring.colors)


# ---- serialization -----------------------------------------------------------

_PALETTE = (
    "black", "red", "gold", "green", "blue", "orange", "purple", "cyan",
    "magenta", "gray", "brown", "pink", "olivedrab", "navy", "salmon", "teal",
)
_EDGE_STYLES = (
    ('solid', 'black'), ('dashed', 'black'), ('solid', 'gray'), ('dotted', 'blue'),
    ('bold', 'red'), ('dashed', 'darkgreen'), ('dotted', 'purple'), ('bold', 'orange'),
)


def to_dot(net: Network, coloring: Coloring | None = None, labels: Sequence[str] | None = None,
           merge_parallel: bool = False) -> str:
    """Graphviz text. Arrow types map to edge styles, colors to node fills.

    With ``merge_parallel`` each group of parallel arrows becomes one edge
    labelled with its multiplicity.
    """
    lines = ["digraph network {", '  node [shape=circle, style=filled, fillcolor=white];']
    for v in range(net.node_count):
        attrs = [f'label="{labels[v] if labels else v}"']
        if coloring is not None:
            fill = _PALETTE[coloring[v] % len(_PALETTE)]
            font = "white" if fill in ("black", "blue", "navy", "purple", "brown") else "black"
            attrs.append(f'fillcolor="{fill}", fontcolor="{font}"')
        lines.append(f"  n{v} [{', '.join(attrs)}];")
    edges = sorted(net.multiplicity.items()) if merge_parallel else [(a, 1) for a in net.arrows]
    for (tail, head, t), mult in edges:
        style, color = _EDGE_STYLES[t % len(_EDGE_STYLES)]
        attrs = [f"style={style}", f'color="{color}"', f'tooltip="{net.arrow_types[t]}"']
        if merge_parallel and mult > 1:
            attrs.append(f'label="{mult}"')
        lines.append(f"  n{tail} -> n{head} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj.to_json() if hasattr(obj, "to_json") else obj, indent=None)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def load_network(path) -> Network:
    with open(path) as fh:
        return Network.from_json(json.load(fh))


def load_coloring(path) -> Coloring:
    with open(path) as fh:
        return Coloring.from_json(json.load(fh))
