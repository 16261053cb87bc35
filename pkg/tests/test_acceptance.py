"""Acceptance gate: one test per criterion, each at its stated tolerance and time limit."""
from __future__ import annotations

import json
import os
import random
import subprocess
import sys
import time
from fractions import Fraction

import pytest

from stabcert import cli
from stabcert.avi import (
    AviProblem,
    _pair_cone,
    check_generalized_critical_face,
    classical_critical_face,
    enumerate_face_pairs,
)
from stabcert.geometry import Cone, PolyhedronH
from stabcert.geometry.linalg import matrix
from stabcert.lcp import (
    IndexCombination,
    all_combinations,
    check_lipschitz_domain,
    classify,
    domain_cone,
    domain_normal_cone,
    in_w,
    in_w_prime,
    is_p_matrix,
    is_q0,
    modulus,
    neighboring_combinations,
    reconstruct_q,
    solve_lcp,
    w_cone_branches,
    w_prime_cone,
)
from stabcert.oracle import SamplingPlan, brute_solutions, lipschitz_evidence, sample_isc, sample_lipschitz_estimate

F = Fraction
M = ((-1, -1), (1, -1))
IDENT2 = ((1, 0), (0, 1))


def product_cone(kinds):
    n = len(kinds)
    e = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    return Cone.from_v([e[i] for i, k in enumerate(kinds) if k == "p"],
                       [e[i] for i, k in enumerate(kinds) if k == "r"], dim=n)


def random_rational_matrix(rng, n):
    return tuple(tuple(F(rng.randint(-3, 3), rng.choice((1, 1, 2, 3))) for _ in range(n)) for _ in range(n))


def random_graph_point(rng, m, labels=None):
    """(q, x) with x in S(q), built from a random index pattern."""
    n = len(m)
    labels = labels or [rng.choice((1, 2, 3)) for _ in range(n)]
    combo = IndexCombination.of(*[[i + 1 for i in range(n) if labels[i] == k] for k in (1, 2, 3)])
    x = [F(rng.randint(1, 4)) if labels[i] == 2 else F(0) for i in range(n)]
    slack = [F(rng.randint(1, 4)) if labels[i] == 1 else F(0) for i in range(n)]
    return reconstruct_q(m, combo, x, slack), tuple(x), combo


def exact_verdict(data: dict) -> bool:
    """Exact verdict of a fixture, by the same rules as the command line."""
    p = cli.ProblemFile.parse(data)
    if p.kind == "lcp" or p.q_set in (None, "domain"):
        return check_lipschitz_domain(p.m, p.q_bar, p.x_bar).verdict
    is_domain = p.q_set.is_homogeneous() and p.q_set.to_cone() == domain_cone(p.m) and is_q0(p.m).accepted
    c = p.c if p.c is not None else PolyhedronH.orthant(p.n)
    return check_generalized_critical_face(AviProblem(p.m, c, p.q_set, q_is_domain=is_domain),
                                           p.q_bar, p.x_bar).lipschitz_like is True


def fixture_region(data: dict):
    p = cli.ProblemFile.parse(data)
    return p, (domain_cone(p.m) if p.q_set in (None, "domain") else p.q_set)


@pytest.mark.criterion(1, "solution table of the 2x2 example, exact, < 1 s")
def test_ac1_solution_table():
    expected = {
        (1, 2): {(0, 0), (1, 0)},
        (2, 1): {(0, 0), (2, 0), (0, 1), (F(1, 2), F(3, 2))},
        (1, F(-1, 2)): {(F(3, 4), F(1, 4)), (1, 0)},
        (-1, 0): set(),
    }
    t0 = time.perf_counter()
    got = {q: solve_lcp(M, q) for q in expected}
    elapsed = time.perf_counter() - t0
    for q, sols in got.items():
        assert all(p.v.is_point() for p in sols.pieces)
        assert set(sols.points()) == expected[q], q
        assert len(sols.pieces) == len(expected[q])
    assert elapsed < 1.0


@pytest.mark.criterion(2, "domain of the 2x2 example is {q1 >= 0, q2 >= -q1}, canonical")
def test_ac2_domain():
    dom = domain_cone(M)
    target = Cone.from_h([(-1, 0), (-1, -1)], dim=2)
    assert dom == target
    assert dom.ineqs == target.ineqs and dom.eqs == () and dom.rays == ((0, 1), (1, -1))


@pytest.mark.criterion(3, "example verdicts: refuted relative to dom S, certified relative to the wedge, each < 1 s")
def test_ac3_verdicts():
    t0 = time.perf_counter()
    cert = check_lipschitz_domain(M, (0, 0), (0, 0))
    t1 = time.perf_counter()
    wedge = PolyhedronH.build(2, [[0, -1], [-1, 1]], [0, 0])
    v = check_generalized_critical_face(AviProblem(M, PolyhedronH.orthant(2), wedge), (0, 0), (0, 0))
    t2 = time.perf_counter()
    assert cert.verdict is False
    assert cert.witness == (0, -1)
    assert in_w(M, cert.combination, cert.witness) and not in_w_prime(M, cert.combination, cert.witness)
    assert v.cq_holds and v.condition_holds
    assert t1 - t0 < 1.0 and t2 - t1 < 1.0


@pytest.mark.criterion(4, "face inventory of R2+: exactly the nine difference cones")
def test_ac4_face_inventory():
    diffs = [p.diff for p in enumerate_face_pairs(Cone.orthant(2))]
    expected = {
        Cone.zero(2),
        Cone.from_v([(1, 0)], dim=2), Cone.from_v([], [(1, 0)], dim=2),
        Cone.from_v([(0, 1)], dim=2), Cone.from_v([], [(0, 1)], dim=2),
        Cone.orthant(2),
        Cone.from_v([(0, 1)], [(1, 0)], dim=2), Cone.from_v([(1, 0)], [(0, 1)], dim=2),
        Cone.whole(2),
    }
    assert len(diffs) == 9 and set(diffs) == expected


@pytest.mark.criterion(5, "neighbor counts 3^|I3| up to n = 6 and 3^n at the origin, < 5 s")
def test_ac5_counts():
    t0 = time.perf_counter()
    rng = random.Random(5)
    for n in range(1, 7):
        for combo in all_combinations(n):
            nbrs = neighboring_combinations(combo)
            assert len(nbrs) == 3 ** len(combo.i3) == len(set(nbrs))
        m = tuple(tuple(rng.randint(-3, 3) for _ in range(n)) for _ in range(n))
        origin = neighboring_combinations(classify(m, (0,) * n, (0,) * n))
        assert len(origin) == 3 ** n and set(origin) == set(all_combinations(n))
    assert time.perf_counter() - t0 < 5.0


@pytest.mark.criterion(6, "equivalence suites on 200 random rational matrices n <= 4, < 60 s")
def test_ac6_equivalences():
    rng = random.Random(6)
    t0 = time.perf_counter()
    q0_instances = 0
    for _ in range(200):
        n = rng.randint(1, 4)
        m = random_rational_matrix(rng, n)
        mm = matrix(m)
        for combo in all_combinations(n):
            # (a) W' equals the domain normal cone
            assert w_prime_cone(m, combo) == domain_normal_cone(m, combo)
            # (b) the branches equal the negated pair cones of K = {0}^I1 x R^I2 x R+^I3
            kinds = ["z" if i in combo.i1 else "r" if i in combo.i2 else "p" for i in range(n)]
            pairs = {_pair_cone(mm, p.diff).negated() for p in enumerate_face_pairs(product_cone(kinds))}
            assert set(w_cone_branches(m, combo)) == pairs
        # (c) the lcp certificate agrees with the avi condition for Q = dom S
        if not is_q0(m, 1000, seed=1).accepted:
            continue
        q0_instances += 1
        q, x, _ = random_graph_point(rng, m)
        cert = check_lipschitz_domain(m, q, x, q0_samples=1000)
        dom = PolyhedronH.from_cone(domain_cone(m))
        v = check_generalized_critical_face(AviProblem(m, PolyhedronH.orthant(n), dom, q_is_domain=True), q, x)
        assert cert.verdict == v.condition_holds
    elapsed = time.perf_counter() - t0
    print(f"Q0 instances compared: {q0_instances}; {elapsed:.1f}s")
    assert q0_instances > 0
    assert elapsed < 60.0


def _random_q0_instance(rng):
    while True:
        n = rng.randint(1, 3)
        m = tuple(tuple(rng.randint(-3, 3) for _ in range(n)) for _ in range(n))
        if not is_q0(m, 1000, seed=1).accepted:
            continue
        q, x, combo = random_graph_point(rng, m, [rng.choice((1, 2, 3, 3)) for _ in range(n)])
        if classify(m, q, x) == combo:
            return m, q, x


@pytest.mark.criterion(7, "oracle concordance: fixtures 100%, random Q0 instances >= 95%, < 120 s")
def test_ac7_oracle_concordance():
    t0 = time.perf_counter()
    for name in cli.fixture_names():
        data = cli.read_fixture(name)
        p, region = fixture_region(data)
        for q in {p.q, p.q_bar} - {None}:
            assert brute_solutions(p.m, q) == solve_lcp(p.m, q), name
        verdict = exact_verdict(data)
        ev = lipschitz_evidence(p.m, region, p.q_bar, p.x_bar, p.plan())
        assert ev.divergent != verdict, (name, ev.profile)
        assert sample_isc(p.m, region, p.q_bar, p.x_bar, p.plan()) == verdict, name
    rng = random.Random(7)
    agree = 0
    for k in range(100):
        m, q, x = _random_q0_instance(rng)
        verdict = check_lipschitz_domain(m, q, x, q0_samples=1000).verdict
        ev = lipschitz_evidence(m, domain_cone(m), q, x, SamplingPlan(seed=k))
        agree += ev.divergent != verdict
    elapsed = time.perf_counter() - t0
    print(f"random instances in agreement: {agree}/100; {elapsed:.1f}s")
    assert agree >= 95
    assert elapsed < 120.0


@pytest.mark.criterion(8, "interior reduction: verdict true and classical at 20 interior points; identity modulus 1 within 5%")
def test_ac8_interior_reduction():
    rng = random.Random(8)
    mats = [IDENT2, tuple(tuple(int(i == j) for j in range(3)) for i in range(3))]
    while len(mats) < 6:
        n = rng.randint(2, 3)
        m = tuple(tuple(rng.randint(1, 4) + 3 * n if i == j else rng.randint(-2, 2) for j in range(n)) for i in range(n))
        if is_p_matrix(m):
            mats.append(m)
    checked = moduli = 0
    for k in range(20):
        m = mats[k % len(mats)]
        n = len(m)
        q = tuple(F(rng.randint(-4, 4), rng.choice((1, 2))) for _ in range(n))
        assert domain_cone(m) == Cone.whole(n)  # every q is interior
        (x,) = solve_lcp(m, q).points()
        cert = check_lipschitz_domain(m, q, x)
        classical, _ = classical_critical_face(m, PolyhedronH.orthant(n), q, x)
        assert cert.verdict is True and classical is True
        checked += 1
        if m == IDENT2 and classify(m, q, x).i2:
            est, _ = modulus(m, q, x, certificate=cert)
            kappa, _ = sample_lipschitz_estimate(m, Cone.whole(n), q, x, SamplingPlan(pair_count=8, seed=k))
            assert est == pytest.approx(1.0, rel=0.05)
            assert kappa == pytest.approx(1.0, rel=0.05)
            moduli += 1
    assert checked == 20 and moduli > 0


@pytest.mark.criterion(9, "determinism: repeated runs give byte-identical certificates")
def test_ac9_determinism(tmp_path):
    for name in cli.fixture_names():
        path = str(tmp_path / name)
        with open(path, "w") as fh:
            json.dump(cli.read_fixture(name), fh)
        outputs = []
        for hash_seed in ("1", "2"):
            env = dict(os.environ, PYTHONHASHSEED=hash_seed)
            proc = subprocess.run([sys.executable, "-m", "stabcert.cli", "check-avi" if "avi" in name or "_Q" in name
                                   else "check-lcp", path, "--no-timing", "--quiet", "--oracle"],
                                  capture_output=True, env=env)
            assert proc.returncode in (0, 3), proc.stderr
            outputs.append(proc.stdout)
        assert outputs[0] == outputs[1], name
