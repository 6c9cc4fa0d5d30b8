"""End-to-end acceptance checks, one test per criterion.

Each test prints one ``PASS``/``FAIL`` line with its runtime; the lines are
repeated in the terminal summary. Run standalone with
``python tests/test_acceptance.py`` for just the summary.
"""

import math
import random
import time

import pytest

from syncolor import analysis, builders, dynamics
from syncolor.network import Network
from syncolor.perm import (
    PermGroup,
    Permutation,
    automorphism_group,
    conjugacy_classes,
    direct_product_grid_group,
    symmetric_group,
)

RESULTS: list[str] = []


def _record(num, title, ok, elapsed, limit, detail=""):
    ok = ok and elapsed < limit
    line = f"{'PASS' if ok else 'FAIL'}  criterion {num:>2}: {title}  [{elapsed:.1f}s / {limit:.0f}s]"
    if detail:
        line += f"  {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def crit1():
    rep = analysis.analyze_fig3()
    e = rep.evidence
    ok = e["balanced"] and e["isotropy_order"] == 3 and e["orbit_count"] == 6 and e["exotic"]
    return ok, f"isotropy={e['isotropy_order']} orbits={e['orbit_count']} exotic={e['exotic']}"


def crit2():
    rep = analysis.analyze_latin5()
    e = rep.evidence
    group_order = direct_product_grid_group(5, 5).order()
    ok = (e["balanced"] and e["aut_order"] == 14400 and group_order == 14400
          and e["isotropy_order"] == 1 and e["exotic"])
    return ok, f"|aut|={e['aut_order']} isotropy={e['isotropy_order']} exotic={e['exotic']}"


def crit3():
    net, two = builders.fig7_coloring()
    rep = analysis.analyze_fig7()
    e = rep.evidence
    aut = automorphism_group(net)
    from syncolor.perm import dihedral_generators, partition_stabilizer

    sigma = partition_stabilizer(aut, two)
    r, s = dihedral_generators(sigma, 5)
    relations = (r ** 5).is_identity() and (s ** 2).is_identity() and s * r * s == r.inverse()
    ok = (e["isotropy_order"] == 10 and relations and e["contains_g"] and e["contains_h"]
          and e["orbit_sizes"] == [10, 10, 5] and e["two_coloring_exotic"] and e["three_coloring_balanced"])
    return ok, f"isotropy={e['isotropy_order']} orbits={e['orbit_sizes']}"


def crit4():
    bad = []
    for m in range(1, 13):
        for n in range(1, 12 // m + 1):
            got = automorphism_group(builders.untrained_wilson(m, n)).order()
            if got != math.factorial(m) ** n * math.factorial(n):
                bad.append((m, n))
    return not bad, f"mismatches={bad}"


def crit5():
    counts, bad = {}, []
    for m, n in [(2, 2), (2, 3), (3, 2), (3, 3), (2, 4), (4, 2)]:
        rep = analysis.verify_untrained_theorem(m, n)
        counts[f"{m}x{n}"] = rep.evidence["balanced_colorings"]
        if rep.verdict != analysis.CONFIRMED or rep.evidence["exotic"]:
            bad.append((m, n))
    return not bad, f"balanced={counts} failures={bad}"


def crit6():
    seen, bad = {}, []
    for m, n in [(2, 2), (2, 3), (3, 2), (3, 3)]:
        rep = analysis.verify_trained_all(m, n)
        seen[f"{m}x{n}"] = rep.evidence["configurations"]
        pats = m ** n
        if rep.evidence["configurations"] != pats + pats * (pats - 1) // 2 or rep.verdict != analysis.CONFIRMED:
            bad.append((m, n))
    return not bad, f"configurations={seen} failures={bad}"


def crit7():
    rep = analysis.three_pattern_counterexample()
    e = rep.evidence
    return e["fig3_balanced"] and e["fig3_exotic"], f"|aut|={e['aut_order']} exotic={e['fig3_exotic']}"


def crit8():
    wrong = []
    for m in range(1, 7):
        for n in range(1, 7):
            rec = analysis.equivariance_admissibility_boundary(m, n)
            if m == 1 or (m, n) in {(2, 2), (2, 3), (3, 2)}:
                ok = rec["verdict"] == "equal"
            elif (m, n) in {(2, 4), (4, 2)}:
                ok = rec["order_test"] and rec["verdict"] == "not-equal" and rec["conjugacy_obstruction"]
            else:
                ok = not rec["order_test"] and rec["verdict"] == "not-equal"
            if not ok:
                wrong.append((m, n))
    s33 = PermGroup(6, symmetric_group(range(3), 6).generators + symmetric_group(range(3, 6), 6).generators)
    s24 = PermGroup(6, symmetric_group(range(2), 6).generators + symmetric_group(range(2, 6), 6).generators)
    order3 = lambda g: g.order() == 3  # noqa: E731
    a = Permutation.from_cycles("(1 2 3)", 6)
    b = Permutation.from_cycles("(1 2 3)(4 5 6)", 6)
    from syncolor.perm import are_conjugate

    facts = (not are_conjugate(s33, a, b) and len(conjugacy_classes(s33, order3)) > 1
             and len(conjugacy_classes(s24, order3)) == 1)
    return not wrong and facts, f"conjugacy_facts={facts} cells_disagreeing={wrong}"


def crit9():
    small = [analysis.latin_square_scan(k) for k in (3, 4)]
    t5 = time.perf_counter()
    five = analysis.latin_square_scan(5)
    ok = all(r.evidence["exotic_count"] == 0 for r in small) and five.evidence["exotic_count"] >= 1
    return ok, (f"exotic 3x3={small[0].evidence['exotic_count']} 4x4={small[1].evidence['exotic_count']} "
                f"5x5(reduced)={five.evidence['exotic_count']} ({time.perf_counter() - t5:.1f}s)")


def crit10():
    res = dynamics.run_suite(trials=100, seed=0)
    worst = max(r["max_deviation"] for r in res["balanced"])
    qworst = max(r["max_difference"] for r in res["quotient"])
    unb = {r["fixture"]: r["exceeding"] for r in res["unbalanced"]}
    return res["ok"], (f"balanced fixtures={len(res['balanced'])} max_dev={worst:.1e} "
                       f"unbalanced exceeding={unb} quotient max={qworst:.1e}")


def crit11():
    rng = random.Random(20240611)
    mism = 0
    for _ in range(25):
        n = rng.randint(1, 8)
        arrows = [(rng.randrange(n), rng.randrange(n), rng.randrange(2)) for _ in range(rng.randint(0, 2 * n))]
        net = Network([rng.randrange(2) for _ in range(n)], arrows, ["a", "b"])
        fast = sorted(c.colors for c in analysis.enumerate_balanced_colorings(net))
        slow = sorted(c.colors for c in analysis.brute_force_balanced(net))
        mism += fast != slow
    return mism == 0, f"mismatching networks={mism}/25"


CRITERIA = [
    (1, "3x6 exotic coloring: balanced, isotropy 3, six orbits", crit1, 5),
    (2, "5x5 Latin coloring: balanced, trivial isotropy, exotic", crit2, 10),
    (3, "amalgamated 2-coloring: D5 isotropy, orbits 10/10/5", crit3, 10),
    (4, "wreath-product automorphism orders, mn <= 12", crit4, 30),
    (5, "untrained Wilson grids have no exotic colorings", crit5, 120),
    (6, "one or two learned patterns give no exotic colorings", crit6, 600),
    (7, "three disjoint patterns admit the exotic 3x6 coloring", crit7, 60),
    (8, "equivariant vs admissible boundary table, m,n <= 6", crit8, 60),
    (9, "Latin-square scan sizes 3-5", crit9, 60),
    (10, "flow invariance, genericity and quotient agreement", crit10, 300),
    (11, "enumeration equals brute force on 25 random networks", crit11, 120),
]


@pytest.mark.parametrize("num,title,fn,limit", CRITERIA, ids=[f"criterion_{c[0]:02d}" for c in CRITERIA])
def test_criterion(num, title, fn, limit):
    t0 = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - t0
    assert _record(num, title, ok, elapsed, limit, detail), RESULTS[-1]


if __name__ == "__main__":
    for num, title, fn, limit in CRITERIA:
        t0 = time.perf_counter()
        ok, detail = fn()
        _record(num, title, ok, time.perf_counter() - t0, limit, detail)
