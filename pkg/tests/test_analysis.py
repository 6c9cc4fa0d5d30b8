import random

import pytest

import oracles
from syncolor import analysis, builders
from syncolor.network import Coloring, Network, coarsest_balanced_refinement, is_balanced
from syncolor.perm import automorphism_group, orbits, partition_stabilizer


def brute(net):
    return list(Coloring(c) for c in oracles.partitions(net.node_count)
                  if oracles.balanced_by_bijection(net.arrows, net.node_count, c)
                  and all(net.node_types[u] == net.node_types[v]
                          for u in range(net.node_count) for v in range(net.node_count) if c[u] == c[v]))


def key(colorings):
    return sorted(c.colors for c in colorings)


def test_set_partitions_bell_numbers():
    assert [sum(1 for _ in analysis.set_partitions(n)) for n in range(1, 8)] == [1, 2, 5, 15, 52, 203, 877]


def test_one_node_network():
    assert analysis.enumerate_balanced_colorings(Network([0])) == [Coloring([0])]


def test_wilson_3x1_all_partitions():
    assert len(analysis.enumerate_balanced_colorings(builders.untrained_wilson(3, 1))) == 5


def test_wilson_2x2_matches_oracle():
    net = builders.untrained_wilson(2, 2)
    assert key(analysis.enumerate_balanced_colorings(net)) == key(brute(net))


def test_random_networks_match_brute_force():
    rng = random.Random(2024)
    for _ in range(10):
        n = rng.randint(1, 7)
        arrows = [(rng.randrange(n), rng.randrange(n), rng.randrange(2)) for _ in range(rng.randint(0, 2 * n))]
        net = Network([rng.randrange(2) for _ in range(n)], arrows, ["a", "b"])
        assert key(analysis.enumerate_balanced_colorings(net)) == key(analysis.brute_force_balanced(net))
        assert key(analysis.brute_force_balanced(net)) == key(brute(net))


def test_enumeration_order_is_rgs():
    net = builders.group_network(2, 2)
    found = [c.colors for c in analysis.iter_balanced_colorings(net)]
    assert found == sorted(found)
    assert len(found) == len(set(found))


def test_truncation_by_size_and_results():
    with pytest.raises(analysis.TruncatedEnumeration):
        analysis.enumerate_balanced_colorings(builders.group_network(3, 3),
                                              analysis.EnumerationLimits(max_nodes=4))
    with pytest.raises(analysis.TruncatedEnumeration) as exc:
        analysis.enumerate_balanced_colorings(builders.group_network(3, 3),
                                              analysis.EnumerationLimits(max_results=3))
    assert len(exc.value.partial) == 3


def test_truncated_verdict_not_confirmed():
    rep = analysis.verify_untrained_theorem(2, 2, analysis.EnumerationLimits(max_results=2))
    assert rep.verdict == analysis.TRUNCATED and rep.exit_code == 3


def test_symmetry_reduction_covers_all_orbits():
    net = builders.untrained_wilson(2, 3)
    aut = automorphism_group(net)
    full = analysis.enumerate_balanced_colorings(net)
    reps = analysis.enumerate_balanced_colorings(net, analysis.EnumerationLimits(symmetry_reduction=True))
    assert len(reps) < len(full)
    covered = set()
    for c in reps:
        for g in aut.elements():
            covered.add(Coloring(analysis._relabelled(c, g)))
    assert covered == set(full)


def test_closure_and_round_trip_properties():
    for net in (builders.untrained_wilson(2, 3), builders.group_network(2, 3),
                builders.train(builders.TrainedWilsonSpec(2, 3, ((0, 1, 0),)))):
        found = set(analysis.enumerate_balanced_colorings(net))
        assert coarsest_balanced_refinement(net) in found
        assert Coloring.discrete(net.node_count) in found
        aut = automorphism_group(net)
        for c in found:
            if not analysis.is_exotic(net, c, aut):
                assert orbits(partition_stabilizer(aut, c)) == c


def test_exotic_invariant_under_automorphisms():
    net, c = builders.fig3_coloring()
    aut = automorphism_group(net)
    rng = random.Random(1)
    for _ in range(3):
        g = aut.random_element(rng)
        moved = Coloring(analysis._relabelled(c, g))
        assert is_balanced(net, moved)
        assert analysis.is_exotic(net, moved, aut)


def test_exotic_examples():
    net, c = builders.latin5_coloring()
    assert analysis.is_exotic(net, c)
    w = builders.untrained_wilson(3, 2)
    assert not analysis.is_exotic(w, Coloring.monochrome(6))


@pytest.mark.parametrize("m,n", [(2, 2), (3, 2), (3, 3)])
def test_untrained_confirmed(m, n):
    assert analysis.verify_untrained_theorem(m, n).verdict == analysis.CONFIRMED


def test_zero_patterns_agree_with_untrained():
    a = analysis.verify_untrained_theorem(2, 3)
    b = analysis.verify_trained_theorem(2, 3, ())
    assert a.verdict == b.verdict
    assert a.evidence["balanced_colorings"] == b.evidence["balanced_colorings"]


def test_trained_single_and_pair_3x3():
    assert analysis.verify_trained_theorem(3, 3, ((0, 1, 2),)).verdict == analysis.CONFIRMED
    assert analysis.verify_trained_theorem(3, 3, ((0, 1, 2), (0, 0, 0))).verdict == analysis.CONFIRMED


def test_three_pattern_counterexample():
    rep = analysis.three_pattern_counterexample()
    assert rep.verdict == analysis.CONFIRMED
    assert rep.evidence["fig3_exotic"]


def test_boundary_cells():
    b = analysis.equivariance_admissibility_boundary
    assert b(2, 3)["verdict"] == "equal" and b(2, 3)["order_test"]
    r = b(2, 4)
    assert r["order_test"] and r["verdict"] == "not-equal" and r["reason"] == "conjugacy"
    assert r["class_counts"]["3"] == [3, 1]
    r = b(4, 5)
    assert not r["order_test"] and r["vertex_group_order"] == 68_976_230_400
    assert b(1, 5)["verdict"] == "equal"


def test_latin_square_counts():
    assert sum(1 for _ in analysis.latin_squares(3)) == 12
    assert sum(1 for _ in analysis.latin_squares(4)) == 576
    assert sum(1 for _ in analysis.latin_squares(5, reduced=True)) == 56


def test_latin_scan_size3():
    rep = analysis.latin_square_scan(3)
    assert rep.verdict == analysis.CONFIRMED and rep.evidence["exotic_count"] == 0


def test_latin_scan_limit_truncates():
    rep = analysis.latin_square_scan(4, limit=5)
    assert rep.verdict == analysis.TRUNCATED


def test_report_json_shape():
    rep = analysis.analyze_fig3().to_json()
    assert set(rep) == {"theorem", "params", "verdict", "evidence"}


def test_random_orbit_coloring_is_balanced():
    net = builders.group_network(3, 3)
    rng = random.Random(0)
    for _ in range(5):
        c = analysis.random_orbit_coloring(net, rng)
        assert is_balanced(net, c)
        assert not analysis.is_exotic(net, c)
