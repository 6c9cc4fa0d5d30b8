import json
import re

import pytest

import oracles
from syncolor import builders
from syncolor.network import (
    Coloring,
    Network,
    UnbalancedColoring,
    amalgamate,
    coarsest_balanced_refinement,
    input_profile,
    is_balanced,
    is_balanced_for_type,
    lift_coloring,
    quotient,
    to_dot,
)


def ring(n):
    return Network([0] * n, [(i, (i + 1) % n, 0) for i in range(n)], ["a"])


def test_coloring_normalizes():
    assert Coloring([5, 5, 2, 7]) == Coloring([0, 0, 1, 2])
    assert Coloring([5, 5, 2, 7]).colors == (0, 0, 1, 2)
    assert Coloring([1, 0]).num_colors == 2


def test_coloring_refines_and_meet():
    a, b = Coloring([0, 0, 1, 1]), Coloring([0, 1, 1, 1])
    assert Coloring.discrete(4).refines(a)
    assert not a.refines(b)
    assert a.meet(b) == Coloring([0, 1, 2, 2])


def test_from_classes_requires_cover():
    with pytest.raises(ValueError):
        Coloring.from_classes([[0, 1]], 3)


def test_network_rejects_bad_arrows():
    with pytest.raises(ValueError):
        Network([0, 0], [(0, 2, 0)], ["a"])
    with pytest.raises(ValueError):
        Network([0, 0], [(0, 1, 1)], ["a"])


def test_input_profile_counts_parallel_arrows():
    net = Network([0, 0], [(0, 1, 0), (0, 1, 0), (1, 1, 0)], ["a"])
    assert input_profile(net, 1, Coloring([0, 1])) == {(0, 0): 2, (0, 1): 1}


def test_ring_monochrome_balanced():
    assert is_balanced(ring(5), Coloring.monochrome(5))


def test_witness_names_differing_type():
    w = builders.untrained_wilson(2, 2)
    rep = is_balanced(w, Coloring([0, 0, 1, 0]))
    assert not rep.balanced
    u, v = rep.witness.nodes
    assert rep.witness.arrow_type == 0
    assert rep.witness.profiles[0] != rep.witness.profiles[1]


def test_witness_for_node_type_clash():
    net = Network([0, 1], [], [])
    rep = is_balanced(net, Coloring([0, 0]))
    assert not rep.balanced and rep.witness.arrow_type is None


def test_balanced_for_type():
    g = builders.group_network(2, 2)
    # row-only balance holds for any coloring constant along rows
    c = Coloring([0, 0, 1, 1])
    assert is_balanced_for_type(g, c, "row")
    assert is_balanced(g, c)


def test_balance_matches_bijection_oracle_on_small_nets():
    nets = [builders.untrained_wilson(2, 2), builders.group_network(2, 2), ring(4),
            builders.train(builders.TrainedWilsonSpec(2, 2, ((0, 1),)))]
    for net in nets:
        n = net.node_count
        for c in oracles.partitions(n):
            assert bool(is_balanced(net, Coloring(c))) == oracles.balanced_by_bijection(net.arrows, n, c)


def test_coarsest_refinement_frozen_trained_3x3():
    # Frozen from the brute-force oracle: minimum-color balanced partition.
    net = builders.train(builders.TrainedWilsonSpec(3, 3, ((0, 0, 0), (0, 1, 2))))
    assert list(coarsest_balanced_refinement(net)) == [0, 1, 1, 2, 1, 3, 2, 3, 1]


def test_coarsest_refinement_respects_seed_and_types():
    net = Network([0, 1, 0], [(0, 1, 0), (1, 2, 0), (2, 0, 0)], ["a"])
    c = coarsest_balanced_refinement(net)
    assert c[0] != c[1]
    assert is_balanced(net, c)
    seeded = coarsest_balanced_refinement(ring(4), Coloring([0, 1, 0, 1]))
    assert seeded == Coloring([0, 1, 0, 1])


def test_quotient_of_discrete_is_isomorphic():
    net = builders.untrained_wilson(2, 3)
    q, reps = quotient(net, Coloring.discrete(net.node_count))
    assert sorted(q.arrows) == sorted(net.arrows)
    assert reps == list(range(net.node_count))


def test_quotient_wilson_monochrome_self_loops():
    net = builders.untrained_wilson(4, 2)
    q, _ = quotient(net, Coloring.monochrome(8))
    assert q.node_count == 1
    assert q.arrows == ((0, 0, 0),) * 3


def test_quotient_latin5_is_five_nodes():
    net, c = builders.latin5_coloring()
    q, _ = quotient(net, c)
    assert q.node_count == 5
    assert len(q.arrows) == 5 * 24


def test_quotient_rejects_unbalanced():
    with pytest.raises(UnbalancedColoring):
        quotient(builders.untrained_wilson(2, 2), Coloring([0, 0, 1, 0]))


def test_lift_roundtrip():
    net, c = builders.latin5_coloring()
    q, _ = quotient(net, c)
    lifted = lift_coloring(net, c, Coloring([0, 0, 1, 1, 1]))
    assert is_balanced(q, Coloring([0, 0, 1, 1, 1])) == is_balanced(net, lifted)
    assert lift_coloring(net, c, Coloring.discrete(5)) == c


def test_amalgamate():
    c = Coloring([0, 1, 2, 1])
    assert amalgamate(c, [0, 0, 1]) == Coloring([0, 0, 1, 0])
    with pytest.raises(ValueError):
        amalgamate(c, {0: 0, 1: 1})


def test_json_roundtrip():
    net = builders.train(builders.TrainedWilsonSpec(2, 3, ((0, 1, 0), (1, 1, 0))))
    assert Network.from_json(json.loads(json.dumps(net.to_json()))) == net
    c = Coloring([0, 1, 1, 2, 0, 2])
    assert Coloring.from_json(json.loads(json.dumps(c.to_json()))) == c


def test_dot_g22_has_twelve_styled_edges():
    text = to_dot(builders.group_network(2, 2))
    edges = [ln for ln in text.splitlines() if "->" in ln]
    assert len(edges) == 12
    assert len(re.findall(r"^  n\d+ \[", text, re.M)) == 4
    assert len({ln.split("style=")[1].split(",")[0] + ln.split("color=")[1].split(",")[0] for ln in edges}) == 3


def test_dot_quotient_multiplicity_labels():
    net, c = builders.latin5_coloring()
    q, _ = quotient(net, c)
    text = to_dot(q, Coloring.discrete(5), merge_parallel=True)
    assert 'label="' in text
    assert len(re.findall(r"^  n\d+ \[", text, re.M)) == 5
