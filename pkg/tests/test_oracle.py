from __future__ import annotations

import random
from fractions import Fraction

import pytest

from stabcert.errors import EmptyRegionError, MembershipError
from stabcert.geometry import Cone, PolyhedronH
from stabcert.lcp import domain_cone, solve_lcp
from stabcert.oracle import (
    SamplingPlan,
    brute_solutions,
    lipschitz_evidence,
    sample_isc,
    sample_lipschitz_estimate,
)

F = Fraction
M = ((-1, -1), (1, -1))
IDENT = ((1, 0), (0, 1))
WEDGE = PolyhedronH.build(2, [[0, -1], [-1, 1]], [0, 0])  # 0 <= q2 <= q1


def test_brute_examples():
    assert set(brute_solutions(M, (2, 1)).points()) == {(0, 0), (2, 0), (0, 1), (F(1, 2), F(3, 2))}
    assert brute_solutions(M, (-1, 0)).is_empty()
    assert brute_solutions(IDENT, (-3, 5)).points() == [(3, 0)]


def test_brute_agrees_with_solver_on_random_instances():
    rng = random.Random(2024)
    for _ in range(500):
        n = rng.randint(1, 4)
        m = tuple(tuple(rng.randint(-3, 3) for _ in range(n)) for _ in range(n))
        q = tuple(rng.randint(-3, 3) for _ in range(n))
        assert brute_solutions(m, q) == solve_lcp(m, q), (m, q)


def test_plan_validation():
    with pytest.raises(ValueError):
        SamplingPlan(radius=F(0))
    with pytest.raises(ValueError):
        SamplingPlan(pair_count=0)


def test_example_domain_ratios_diverge():
    ev = lipschitz_evidence(M, domain_cone(M), (0, 0), (0, 0))
    assert ev.divergent
    assert all(b >= 1.9 * a for a, b in zip(ev.profile, ev.profile[1:]))


def test_example_wedge_ratios_stay_bounded():
    ev = lipschitz_evidence(M, WEDGE, (0, 0), (0, 0))
    assert not ev.divergent and ev.violation is None
    assert max(ev.profile) <= 2 * min(ev.profile) + 1e-12


def test_identity_is_one_lipschitz():
    for q_bar, x_bar in (((-1, -1), (1, 1)), ((0, 0), (0, 0)), ((1, -1), (0, 1))):
        kappa, violation = sample_lipschitz_estimate(IDENT, Cone.whole(2), q_bar, x_bar)
        assert kappa <= 1.05 and violation is None


def test_isc_examples():
    assert sample_isc(M, WEDGE, (0, 0), (0, 0))
    assert not sample_isc(M, domain_cone(M), (0, 0), (0, 0))
    assert sample_isc(IDENT, Cone.whole(2), (0, 0), (0, 0))
    assert sample_isc(IDENT, Cone.whole(2), (-1, 2), (1, 0))


def test_region_and_graph_preconditions():
    with pytest.raises(EmptyRegionError):
        sample_lipschitz_estimate(M, WEDGE, (-1, 0), (0, 0))
    with pytest.raises(EmptyRegionError):
        sample_isc(M, domain_cone(M), (-1, 0), (0, 0))
    with pytest.raises(MembershipError):
        sample_isc(M, WEDGE, (0, 0), (1, 1))


def test_violation_reported_outside_domain():
    # the whole plane as region: q with q1 < 0 has no solution
    ev = lipschitz_evidence(M, Cone.whole(2), (0, 0), (0, 0))
    assert ev.violation is not None
    assert solve_lcp(M, ev.violation[0]).is_empty()


def test_sampling_is_deterministic():
    plan = SamplingPlan(seed=11, pair_count=6)
    a = lipschitz_evidence(M, domain_cone(M), (0, 0), (0, 0), plan)
    b = lipschitz_evidence(M, domain_cone(M), (0, 0), (0, 0), plan)
    assert a == b
