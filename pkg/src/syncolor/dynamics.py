"""Random admissible ODEs on a network and synchrony-subspace checks.

Node ``c`` evolves by ``x_c' = f_{type(c)}(x_c, s_1, ..., s_T)`` where
``s_t`` sums ``h_t(x_c, x_tail)`` over the type-``t`` input arrows of ``c``.
Summing over same-type arrows makes every such system admissible.

Two node models are provided:

* ``generic`` (any ``dim``): ``f = -decay*x + gain*tanh(A x + sum_t W_t s_t + b)``
  with ``h_t(x, y) = tanh(P_t x + Q_t y + r_t)``;
* ``rivalry`` (``dim == 2``): activity ``a`` and fatigue ``u`` with
  ``a' = -a + S(alpha a - beta u + sum_t w_t s_t + I)``, ``u' = eps (a - u)`` and
  ``h_t(x, y) = S(k_t a_y + c_t a_x + r_t)``, ``S(z) = (1 + tanh z) / 2``.
  This is a representative activity/fatigue form, not a canonical model.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .network import Coloring, Network, UnbalancedColoring, is_balanced, quotient

INVARIANCE_TOL = 1e-8
VIOLATION_TOL = 1e-3
QUOTIENT_TOL = 1e-7


class NonFiniteState(FloatingPointError):
    pass


@dataclass
class AdmissibleSystem:
    """Parameters indexed by node type and arrow type, never by node.

    Arrays carry a leading batch axis so many systems can be integrated
    together; a single system has batch size 1.
    """

    net: Network
    dim: int
    model: str
    node_params: dict  # name -> array (B, node_types, ...)
    arrow_params: dict  # name -> array (B, arrow_types, ...)
    seed: object = None
    _plan: list = field(default=None, init=False, repr=False)

    @property
    def batch(self) -> int:
        return next(iter(self.node_params.values())).shape[0]

    def on_network(self, net: Network) -> "AdmissibleSystem":
        """Same parameters on another network with the same type tables (e.g. a quotient)."""
        return AdmissibleSystem(net, self.dim, self.model, self.node_params, self.arrow_params, self.seed)

    def _inputs_plan(self) -> dict:
        """Index tables and per-node parameters in the internal ``(N, ..., B)`` layout.

        Input slots of all arrow types sit side by side; type ``t`` owns one
        contiguous segment as wide as the largest type-``t`` in-degree, and
        unused slots are masked to zero.
        """
        if self._plan is not None:
            return self._plan
        n = self.net.node_count
        T = max(self.net.num_arrow_types, 1)
        idx_cols, mask_cols, slot_type, starts = [], [], [], []
        width_total = 0
        for t in range(T):
            tails = [[tail for tail, tt in self.net.inputs[v] if tt == t] for v in range(n)]
            width = max(max((len(x) for x in tails), default=0), 1)
            idx = np.zeros((n, width), dtype=np.intp)
            mask = np.zeros((n, width))
            for v, row in enumerate(tails):
                idx[v, : len(row)] = row
                mask[v, : len(row)] = 1.0
            starts.append(width_total)
            width_total += width
            idx_cols.append(idx)
            mask_cols.append(mask)
            slot_type.append(np.full(width, t, dtype=np.intp))
        idx = np.concatenate(idx_cols, axis=1)
        slot_type = np.concatenate(slot_type)
        types = list(self.net.node_types)
        batch_last = lambda a: np.moveaxis(a, 0, -1)  # noqa: E731
        plan = {
            "T": T,
            "S": width_total,
            "slot_type": slot_type,
            "flat_idx": (idx * T + slot_type[None, :]).ravel(),
            "mask": np.concatenate(mask_cols, axis=1)[:, :, None, None],
            "starts": np.array(starts, dtype=np.intp),
            "node": {k: np.ascontiguousarray(batch_last(v[:, types])) for k, v in self.node_params.items()},
            "arrow": {k: np.ascontiguousarray(batch_last(v)) for k, v in self.arrow_params.items()},
        }
        if self.model == "generic":
            plan["r_slots"] = plan["arrow"]["r"][slot_type][None]
        self._plan = plan
        return plan

    def rhs(self, x: np.ndarray) -> np.ndarray:
        """Vector field at ``x`` of shape ``(B, N, dim)``, or ``(N, dim)`` when B = 1."""
        single = x.ndim == 2
        xb = x[None] if single else x
        out = np.moveaxis(self._f(np.moveaxis(xb, 0, -1)), -1, 0)
        return out[0] if single else out

    def _f(self, x: np.ndarray) -> np.ndarray:
        """Vector field in the internal layout ``(N, dim, B)``."""
        return self._f_generic(x) if self.model == "generic" else self._f_rivalry(x)

    def _sum_inputs(self, terms: np.ndarray) -> np.ndarray:
        """Sum input terms ``(N, S, k, B)`` per arrow type into ``(N, T, k, B)``.

        Terms in [-1, 1] are first snapped to a 2**-40 grid. Sums of grid
        values are exact in double precision (in-degree below 2**12), so nodes
        with the same multiset of inputs get bitwise-equal sums whatever the
        arrow order, and the snapped coupling is still a fixed function of
        ``(x_head, x_tail)``.
        """
        plan = self._plan
        snapped = (terms + _SNAP) - _SNAP
        snapped *= plan["mask"]
        return np.add.reduceat(snapped, plan["starts"], axis=1)

    def _f_generic(self, x: np.ndarray) -> np.ndarray:
        plan = self._inputs_plan()
        node, arrow = plan["node"], plan["arrow"]
        n, d, b = x.shape
        px = np.einsum("tijb,njb->ntib", arrow["P"], x)  # (N, T, d, B)
        qx = np.einsum("tijb,njb->ntib", arrow["Q"], x).reshape(n * plan["T"], d, b)
        pre = np.take(qx, plan["flat_idx"], axis=0).reshape(n, plan["S"], d, b)
        pre += np.take(px, plan["slot_type"], axis=1)
        pre += plan["r_slots"]
        s = self._sum_inputs(np.tanh(pre, out=pre))
        inner = np.einsum("nijb,njb->nib", node["A"], x) + node["b"]
        inner += np.einsum("ntijb,ntjb->nib", node["W"], s)
        return node["gain"] * np.tanh(inner) - node["decay"] * x

    def _f_rivalry(self, x: np.ndarray) -> np.ndarray:
        plan = self._inputs_plan()
        node, arrow = plan["node"], plan["arrow"]
        st = plan["slot_type"]
        a, u = x[:, 0, :], x[:, 1, :]  # (N, B)
        n = a.shape[0]
        tail_a = np.take(a, plan["flat_idx"] // plan["T"], axis=0).reshape(n, plan["S"], -1)
        z = arrow["k"][st] * tail_a + arrow["c"][st] * a[:, None, :] + arrow["r"][st]
        s = self._sum_inputs(_gain(z)[:, :, None, :])[:, :, 0, :]  # (N, T, B)
        drive = node["alpha"] * a - node["beta"] * u + node["I"] + np.einsum("tb,ntb->nb", arrow["w"], s)
        da = _gain(drive) - a
        du = node["eps"] * (a - u)
        return np.stack([da, du], axis=1)


# Adding then subtracting 1.5 * 2**12 rounds |z| < 2**11 to a multiple of 2**-40.
_SNAP = 1.5 * 2.0**12


def _gain(z):
    """Sigmoid ``(1 + tanh z) / 2`` with values in (0, 1)."""
    return 0.5 * (1.0 + np.tanh(z))


def _draw(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=shape)


def _draw_coupling(rng: np.random.Generator, shape) -> np.ndarray:
    """Random sign, magnitude in [0.5, 1]: coupling never nearly vanishes."""
    return rng.choice([-1.0, 1.0], size=shape) * rng.uniform(0.5, 1.0, size=shape)


def _sample_params(net: Network, dim: int, model: str, rng: np.random.Generator):
    nt = max(net.node_types, default=0) + 1
    at = max(net.num_arrow_types, 1)
    # Scale each arrow type's weight by its largest in-degree so summed inputs
    # do not saturate the nonlinearity on dense networks. One constant per
    # type keeps the system admissible.
    deg = np.ones(at)
    for t in range(net.num_arrow_types):
        deg[t] = max([net.in_degree(v, t) for v in range(net.node_count)] + [1])
    if model == "generic":
        node = {
            "decay": rng.uniform(0.5, 1.5, size=(nt, dim)),
            "gain": _draw_coupling(rng, (nt, dim)),
            "A": _draw(rng, (nt, dim, dim)),
            "W": _draw_coupling(rng, (nt, at, dim, dim)) / deg[None, :, None, None],
            "b": _draw(rng, (nt, dim)),
        }
        arrow = {"P": _draw(rng, (at, dim, dim)), "Q": _draw_coupling(rng, (at, dim, dim)), "r": _draw(rng, (at, dim))}
    else:
        node = {
            "alpha": _draw(rng, nt),
            "beta": rng.uniform(0.0, 1.0, size=nt),
            "I": _draw(rng, nt),
            "eps": rng.uniform(0.1, 1.0, size=nt),
        }
        arrow = {"w": _draw_coupling(rng, at) / deg, "k": _draw_coupling(rng, at), "c": _draw(rng, at),
                 "r": _draw(rng, at)}
    return node, arrow


def random_admissible_system(net: Network, dim: int = 1, seed=0, model: str | None = None) -> AdmissibleSystem:
    """Deterministic random admissible system for ``(net, dim, seed)``.

    ``dim == 2`` uses the activity/fatigue model unless ``model`` says otherwise.
    """
    return random_admissible_batch(net, dim, [seed], model)


def random_admissible_batch(net: Network, dim: int, seeds: Sequence, model: str | None = None) -> AdmissibleSystem:
    if dim not in (1, 2):
        raise ValueError(f"state dimension must be 1 or 2, got {dim}")
    if model is None:
        model = "rivalry" if dim == 2 else "generic"
    if model == "rivalry" and dim != 2:
        raise ValueError("the rivalry model has two state variables per node")
    nodes, arrows = [], []
    for s in seeds:
        seq = list(s) if isinstance(s, (tuple, list)) else [int(s)]
        node, arrow = _sample_params(net, dim, model, np.random.default_rng(seq))
        nodes.append(node)
        arrows.append(arrow)
    stack = lambda dicts: {k: np.stack([d[k] for d in dicts]) for k in dicts[0]}  # noqa: E731
    return AdmissibleSystem(net, dim, model, stack(nodes), stack(arrows), list(seeds))


@dataclass
class Trajectory:
    times: np.ndarray  # (steps + 1,)
    states: np.ndarray  # (steps + 1, N, dim)
    dt: float
    method_order: int = 4

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "node", "component", "value"])
            for k, t in enumerate(self.times):
                for v in range(self.states.shape[1]):
                    for c in range(self.states.shape[2]):
                        w.writerow([f"{t:.6g}", v, c, repr(float(self.states[k, v, c]))])


def _rk4_step(f, x, dt):
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _num_steps(T: float, dt: float) -> int:
    if dt <= 0 or T < dt:
        raise ValueError(f"need dt > 0 and T >= dt, got T={T}, dt={dt}")
    return int(round(T / dt))


def integrate(sys_or_f, x0, T: float, dt: float) -> Trajectory:
    """Classical fixed-step RK4 from ``x0`` over ``[0, T]``.

    Accepts an ``AdmissibleSystem`` or a plain callable ``f(x)``.
    """
    f = sys_or_f.rhs if isinstance(sys_or_f, AdmissibleSystem) else sys_or_f
    steps = _num_steps(T, dt)
    x = np.array(x0, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    states = np.empty((steps + 1,) + x.shape)
    states[0] = x
    for k in range(steps):
        x = _rk4_step(f, x, dt)
        if not np.all(np.isfinite(x)):
            raise NonFiniteState(f"non-finite state at step {k + 1}")
        states[k + 1] = x
    return Trajectory(np.arange(steps + 1) * dt, states, dt)


def _spread(states: np.ndarray, classes: list[list[int]]) -> np.ndarray:
    """Max within-class spread over the node axis (axis -2)."""
    worst = np.zeros(states.shape[:-2])
    for cls in classes:
        if len(cls) < 2:
            continue
        block = states[..., cls, :]
        worst = np.maximum(worst, (block.max(axis=-2) - block.min(axis=-2)).max(axis=-1))
    return worst


def synchrony_deviation(traj: Trajectory, coloring: Coloring) -> float:
    """Largest spread of states inside a color class, over all times."""
    if len(coloring) != traj.states.shape[1]:
        raise ValueError("coloring does not match the trajectory's nodes")
    return float(_spread(traj.states, coloring.classes()).max(initial=0.0))


def project_to_synchrony(x: np.ndarray, coloring: Coloring) -> np.ndarray:
    """Replace each node's state by the mean of its color class."""
    y = np.array(x, dtype=float)
    for cls in coloring.classes():
        y[..., cls, :] = y[..., cls, :].mean(axis=-2, keepdims=True)
    return y


def _trial_seeds(seed: int, trials: int) -> list[tuple[int, int]]:
    return [(seed, i) for i in range(trials)]


def _initial_states(net: Network, coloring: Coloring, seed: int, trials: int, dim: int) -> np.ndarray:
    """Random points of the synchrony subspace, internal layout ``(N, dim, B)``."""
    x = np.stack([
        project_to_synchrony(np.random.default_rng([seed, i, 1]).uniform(-1, 1, (net.node_count, dim)), coloring)
        for i in range(trials)
    ], axis=-1)
    return x


def _spread_batch(x: np.ndarray, classes: list[np.ndarray]) -> np.ndarray:
    """Per-trial max within-class spread for ``x`` of shape ``(N, dim, B)``."""
    worst = np.zeros(x.shape[-1])
    for cls in classes:
        block = x[cls]
        np.maximum(worst, (block.max(axis=0) - block.min(axis=0)).max(axis=0), out=worst)
    return worst


def invariance_test(net: Network, coloring: Coloring, trials: int = 100, seed: int = 0, dim: int = 1,
                    T: float = 10.0, dt: float = 1e-3, tol: float = INVARIANCE_TOL,
                    violation_tol: float = VIOLATION_TOL, model: str | None = None) -> dict:
    """Integrate random admissible systems from the synchrony subspace.

    All trials run as one batch; trial ``i`` depends only on ``(seed, i)``.
    """
    system = random_admissible_batch(net, dim, _trial_seeds(seed, trials), model)
    x = _initial_states(net, coloring, seed, trials, dim)
    classes = [np.array(c) for c in coloring.classes() if len(c) > 1]
    worst = _spread_batch(x, classes)
    for k in range(_num_steps(T, dt)):
        x = _rk4_step(system._f, x, dt)
        if not np.isfinite(x).all():
            raise NonFiniteState(f"non-finite state at step {k + 1}")
        np.maximum(worst, _spread_batch(x, classes), out=worst)
    exceed = int((worst > violation_tol).sum())
    return {
        "balanced": is_balanced(net, coloring).balanced,
        "trials": trials,
        "seed": seed,
        "dim": dim,
        "T": T,
        "dt": dt,
        "max_deviation": float(worst.max(initial=0.0)),
        "deviations": [float(w) for w in worst],
        "trials_exceeding_violation_tol": exceed,
        "within_tolerance": bool(worst.max(initial=0.0) <= tol),
    }


def quotient_consistency_test(net: Network, coloring: Coloring, seed: int = 0, trials: int = 1, dim: int = 1,
                              T: float = 10.0, dt: float = 1e-3, model: str | None = None) -> dict:
    """Compare the full flow on the synchrony subspace with the quotient flow.

    The quotient reuses the full system's parameters type by type.
    """
    report = is_balanced(net, coloring)
    if not report.balanced:
        raise UnbalancedColoring(f"quotient test needs a balanced coloring: {report.witness}")
    qnet, _ = quotient(net, coloring)
    full = random_admissible_batch(net, dim, _trial_seeds(seed, trials), model)
    reduced = full.on_network(qnet)
    reps = [c[0] for c in coloring.classes()]
    colors = np.array(coloring.colors)
    x = _initial_states(net, coloring, seed, trials, dim)
    y = x[reps].copy()
    worst = 0.0
    for _ in range(_num_steps(T, dt)):
        x = _rk4_step(full._f, x, dt)
        y = _rk4_step(reduced._f, y, dt)
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise NonFiniteState("non-finite state")
        worst = max(worst, float(np.abs(x - y[colors]).max()))
    return {"quotient_nodes": qnet.node_count, "trials": trials, "seed": seed, "dim": dim,
            "max_difference": worst, "within_tolerance": worst <= QUOTIENT_TOL}


def equivariance_error(system: AdmissibleSystem, perm: Sequence[int], samples: int = 100, seed: int = 0) -> float:
    """Max of ``|F(p.x) - p.F(x)|`` over random states for a node permutation ``p``."""
    rng = np.random.default_rng(seed)
    n = system.net.node_count
    inv = np.argsort(np.asarray(perm))
    worst = 0.0
    for _ in range(samples):
        x = rng.uniform(-1, 1, (n, system.dim))
        px = x[inv]  # (p.x)_{p(v)} = x_v
        worst = max(worst, float(np.abs(system.rhs(px) - system.rhs(x)[inv]).max()))
    return worst


def small_orbit_fixtures(count: int = 10, seed: int = 0) -> list[tuple[str, Network, Coloring]]:
    """Random orbit colorings on small grid networks; always balanced."""
    from . import builders
    from .analysis import random_orbit_coloring
    from .perm import automorphism_group

    pool = [
        ("gmn-2x3", builders.group_network(2, 3)),
        ("gmn-3x3", builders.group_network(3, 3)),
        ("wilson-3x3", builders.untrained_wilson(3, 3)),
        ("wilson-2x4", builders.untrained_wilson(2, 4)),
        ("trained-3x3", builders.train(builders.TrainedWilsonSpec(3, 3, ((0, 0, 0), (0, 1, 2))))),
    ]
    auts = [automorphism_group(net) for _, net in pool]
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        k = i % len(pool)
        name, net = pool[k]
        out.append((f"{name}-orbit{i}", net, random_orbit_coloring(net, rng, auts[k])))
    return out


def unbalanced_fixtures() -> list[tuple[str, Network, Coloring]]:
    from . import builders

    return [
        ("wilson-2x2-AB|AA", builders.untrained_wilson(2, 2), Coloring([0, 0, 1, 0])),
        ("gmn-2x2-one-odd", builders.group_network(2, 2), Coloring([0, 0, 0, 1])),
    ]


def run_suite(trials: int = 100, seed: int = 0, dim: int = 1, T: float = 10.0, dt: float = 1e-3,
              tol: float = INVARIANCE_TOL, violation_tol: float = VIOLATION_TOL,
              quotient_tol: float = QUOTIENT_TOL, quotient_trials: int = 5, model: str | None = None,
              orbit_fixtures: int = 10) -> dict:
    """Invariance on balanced fixtures, genericity on unbalanced ones, quotient agreement."""
    from . import builders

    balanced = [("fig3", *builders.fig3_coloring()), ("latin5", *builders.latin5_coloring()),
                ("fig7", *builders.fig7_coloring())]
    balanced += small_orbit_fixtures(orbit_fixtures, seed)
    common = dict(seed=seed, dim=dim, T=T, dt=dt, model=model)
    rows = {"balanced": [], "unbalanced": [], "quotient": []}
    ok = True
    for name, net, k in balanced:
        r = invariance_test(net, k, trials=trials, tol=tol, violation_tol=violation_tol, **common)
        good = r["max_deviation"] <= tol
        ok &= good
        rows["balanced"].append({"fixture": name, "max_deviation": r["max_deviation"], "ok": good})
        q = quotient_consistency_test(net, k, trials=quotient_trials, **common)
        qgood = q["max_difference"] <= quotient_tol
        ok &= qgood
        rows["quotient"].append({"fixture": name, "max_difference": q["max_difference"], "ok": qgood})
    need = math.ceil(0.95 * trials)
    for name, net, k in unbalanced_fixtures():
        r = invariance_test(net, k, trials=trials, tol=tol, violation_tol=violation_tol, **common)
        good = r["trials_exceeding_violation_tol"] >= need
        ok &= good
        rows["unbalanced"].append({"fixture": name, "exceeding": r["trials_exceeding_violation_tol"],
                                   "trials": trials, "ok": good})
    rows["ok"] = bool(ok)
    return rows
