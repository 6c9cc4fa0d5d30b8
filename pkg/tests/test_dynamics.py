import math

import numpy as np
import pytest

from syncolor import builders, dynamics
from syncolor.network import Coloring, Network, UnbalancedColoring
from syncolor.perm import automorphism_group


def test_determinism():
    net = builders.untrained_wilson(2, 3)
    a = dynamics.random_admissible_system(net, 2, seed=4)
    b = dynamics.random_admissible_system(net, 2, seed=4)
    x = np.random.default_rng(0).uniform(-1, 1, (6, 2))
    assert np.array_equal(a.rhs(x), b.rhs(x))


def test_arrowless_network_is_decoupled():
    net = Network([0, 0, 0], [], [])
    system = dynamics.random_admissible_system(net, 1, seed=0)
    x = np.array([[0.3], [0.3], [-0.2]])
    f = system.rhs(x)
    assert f[0, 0] == f[1, 0] != f[2, 0]


@pytest.mark.parametrize("dim", [1, 2])
def test_equivariance_under_automorphisms(dim):
    for net in (builders.group_network(2, 3), builders.train(builders.TrainedWilsonSpec(3, 3, ((0, 0, 0), (0, 1, 2))))):
        aut = automorphism_group(net)
        system = dynamics.random_admissible_system(net, dim, seed=1)
        rng = np.random.default_rng(0)
        for _ in range(3):
            g = aut.random_element(rng)
            assert dynamics.equivariance_error(system, g.image, samples=100) <= 1e-12


def test_zero_field_constant():
    traj = dynamics.integrate(lambda x: np.zeros_like(x), np.ones((3, 1)), 1.0, 0.1)
    assert np.all(traj.states == 1.0)


def test_linear_decay_analytic():
    traj = dynamics.integrate(lambda x: -x, np.ones((1, 1)), 1.0, 1e-3)
    assert abs(traj.states[-1, 0, 0] - math.exp(-1)) <= 1e-8


def test_rk4_convergence_ratio():
    net = builders.untrained_wilson(2, 2)
    system = dynamics.random_admissible_system(net, 2, seed=3, model="generic")
    x0 = np.random.default_rng(1).uniform(-1, 1, (4, 2))
    ends = [dynamics.integrate(system, x0, 2.0, dt).states[-1] for dt in (0.2, 0.1, 0.05)]
    ratio = np.abs(ends[0] - ends[1]).max() / np.abs(ends[1] - ends[2]).max()
    assert 12 < ratio < 20


def test_bad_step_rejected():
    with pytest.raises(ValueError):
        dynamics.integrate(lambda x: x, np.ones((1, 1)), 0.5, 1.0)


def test_non_finite_detected():
    with pytest.raises(dynamics.NonFiniteState):
        with np.errstate(over="ignore", invalid="ignore"):
            dynamics.integrate(lambda x: x ** 2, np.full((1, 1), 10.0), 1.0, 0.1)


def test_synchrony_deviation_basics():
    net = builders.group_network(2, 2)
    system = dynamics.random_admissible_system(net, 1, seed=0)
    x0 = np.random.default_rng(0).uniform(-1, 1, (4, 1))
    traj = dynamics.integrate(system, x0, 1.0, 0.01)
    assert dynamics.synchrony_deviation(traj, Coloring.discrete(4)) == 0
    assert dynamics.synchrony_deviation(traj, Coloring.monochrome(4)) > 0
    inside = dynamics.integrate(system, dynamics.project_to_synchrony(x0, Coloring([0, 0, 1, 1])), 1.0, 0.01)
    assert dynamics.synchrony_deviation(inside, Coloring([0, 0, 1, 1])) == 0


def test_invariance_small_balanced_and_arrowless():
    net = builders.untrained_wilson(3, 2)
    r = dynamics.invariance_test(net, Coloring.monochrome(6),
                                 trials=10, T=2.0)
    assert r["max_deviation"] <= dynamics.INVARIANCE_TOL and r["balanced"]
    lone = Network([0] * 4, [], [])
    assert dynamics.invariance_test(lone, Coloring.monochrome(4), trials=5, T=1.0)["max_deviation"] <= 1e-8


@pytest.mark.parametrize("dim", [1, 2])
def test_unbalanced_wilson_generic(dim):
    r = dynamics.invariance_test(builders.untrained_wilson(2, 2), Coloring([0, 0, 1, 0]), trials=100, dim=dim)
    assert r["trials_exceeding_violation_tol"] >= 95
    assert not r["balanced"]


def test_unbalanced_larger_net_always_leaves_subspace():
    # Amplitude is network dependent, but the violation itself is never zero.
    net = builders.group_network(3, 3)
    r = dynamics.invariance_test(net, Coloring([0, 0, 1, 2, 2, 2, 2, 2, 2]), trials=20, T=5.0)
    assert min(r["deviations"]) > 1e-8


def test_quotient_consistency_small():
    net = builders.untrained_wilson(3, 2)
    for col in (Coloring.discrete(6), Coloring.monochrome(6), Coloring([0, 1, 0, 1, 0, 1]), Coloring([0, 0, 1, 1, 2, 2])):
        r = dynamics.quotient_consistency_test(net, col, trials=3, T=3.0, dim=2)
        assert r["max_difference"] <= dynamics.QUOTIENT_TOL


def test_quotient_rejects_unbalanced():
    with pytest.raises(UnbalancedColoring):
        dynamics.quotient_consistency_test(builders.untrained_wilson(2, 2), Coloring([0, 0, 1, 0]))


def test_trajectory_csv(tmp_path):
    traj = dynamics.integrate(lambda x: -x, np.ones((2, 1)), 0.02, 0.01)
    path = tmp_path / "t.csv"
    traj.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,node,component,value"
    assert len(lines) == 1 + 3 * 2


def test_trials_are_independent_of_batch_size():
    net = builders.group_network(2, 2)
    col = Coloring([0, 0, 0, 1])
    a = dynamics.invariance_test(net, col, trials=4, T=1.0)["deviations"]
    b = dynamics.invariance_test(net, col, trials=2, T=1.0)["deviations"]
    assert a[:2] == b
