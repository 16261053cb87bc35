"""Brute-force and sampling oracles.

Nothing here calls into the lcp or avi modules except for the shared
``SolutionSet`` container; solving uses a separate Gaussian elimination and
the sampling estimators work directly from the definitions of the
Lipschitz-like property and inner semicontinuity.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import nnls

from .errors import EmptyRegionError, MembershipError
from .geometry import Cone, PolyhedronH, PolyhedronV, tangent_cone_poly, vrep
from .lcp import Piece, SolutionSet
from .parallel import ordered_map


@dataclass(frozen=True)
class SamplingPlan:
    radius: Fraction = Fraction(1, 16)
    pair_count: int = 24  # number of chords; each contributes a ladder of pairs
    window_radius: Fraction = Fraction(1, 2)
    seed: int = 0
    levels: int = 4  # halvings of the pair spacing
    base_intervals: int = 2

    def __post_init__(self):
        if self.radius <= 0 or self.window_radius <= 0 or self.pair_count < 1:
            raise ValueError("radius, window_radius and pair_count must be positive")


# independent exact elimination


def _gauss(a: list[list[Fraction]], b: list[Fraction], k: int):
    """Solve a x = b over Q: (particular, nullspace basis) or None if inconsistent."""
    rows = [list(r) + [bi] for r, bi in zip(a, b)]
    piv_cols = []
    r = 0
    for c in range(k):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    if any(all(x == 0 for x in row[:k]) and row[k] != 0 for row in rows):
        return None
    x = [Fraction(0)] * k
    for row, c in zip(rows, piv_cols):
        x[c] = row[k]
    basis = []
    for f in (c for c in range(k) if c not in piv_cols):
        v = [Fraction(0)] * k
        v[f] = Fraction(1)
        for row, c in zip(rows, piv_cols):
            v[c] = -row[f]
        basis.append(v)
    return x, basis


def _pattern_system(m, q, alpha, comp) -> PolyhedronH:
    n = len(m)
    a_le, b_le, a_eq, b_eq = [], [], [], []
    for i in range(n):
        e = [int(i == j) for j in range(n)]
        if i in alpha:
            a_eq.append(list(m[i]))
            b_eq.append(-q[i])
            a_le.append([-x for x in e])
            b_le.append(0)
        else:
            a_eq.append(e)
            b_eq.append(0)
            a_le.append([-x for x in m[i]])
            b_le.append(q[i])
    return PolyhedronH.build(n, a_le, b_le, a_eq, b_eq)


def _canonical_from_generators(n, points, rays, lines) -> PolyhedronV:
    """Canonical V-rep of conv(points) + pos(rays) + span(lines) via the homogenized cone."""
    cone = Cone.from_v([tuple(p) + (1,) for p in points] + [tuple(r) + (0,) for r in rays],
                       [tuple(l) + (0,) for l in lines], dim=n + 1)
    verts, rs = [], []
    for r in cone.rays:
        if r[n] > 0:
            verts.append(tuple(Fraction(x, r[n]) for x in r[:n]))
        else:
            rs.append(tuple(r[:n]))
    return PolyhedronV(n, tuple(sorted(verts)), tuple(sorted(rs)), tuple(tuple(l[:n]) for l in cone.lines))


def _pattern_piece(m, q, alpha, comp):
    n = len(m)
    k = len(alpha)
    a = [[Fraction(m[i][j]) for j in alpha] for i in alpha]
    b = [Fraction(-q[i]) for i in alpha]
    sol = _gauss(a, b, k)
    if sol is None:
        return None
    part, basis = sol

    def embed(vals):
        x = [Fraction(0)] * n
        for i, v in zip(alpha, vals):
            x[i] = v
        return x

    x0 = embed(part)
    if not basis:
        w = [sum(Fraction(m[i][j]) * x0[j] for j in range(n)) + q[i] for i in range(n)]
        if any(v < 0 for v in x0) or any(w[i] < 0 for i in comp):
            return None
        return PolyhedronV(n, (tuple(x0),), (), ())
    # x = x0 + N t; constraints x >= 0 on alpha, Mx + q >= 0 on comp
    dirs = [embed(v) for v in basis]
    t_dim = len(dirs)
    a_le, b_le = [], []
    for i in alpha:
        a_le.append([-d[i] for d in dirs])
        b_le.append(x0[i])
    for i in comp:
        row = [-sum(Fraction(m[i][j]) * d[j] for j in range(n)) for d in dirs]
        a_le.append(row)
        b_le.append(sum(Fraction(m[i][j]) * x0[j] for j in range(n)) + q[i])
    tv = vrep(PolyhedronH.build(t_dim, a_le, b_le))
    if tv.is_empty():
        return None

    def lift(t, with_offset):
        x = list(x0) if with_offset else [Fraction(0)] * n
        for ti, d in zip(t, dirs):
            x = [xi + ti * di for xi, di in zip(x, d)]
        return x

    return _canonical_from_generators(n, [lift(v, True) for v in tv.vertices],
                                      [lift(r, False) for r in tv.rays],
                                      [lift(l, False) for l in tv.lines])


def _within(h: PolyhedronH, v: PolyhedronV) -> bool:
    if not all(h.contains(x) for x in v.vertices):
        return False
    dirs = list(v.rays) + list(v.lines) + [tuple(-x for x in l) for l in v.lines]
    for d in dirs:
        for a in h.a_le:
            if sum(ai * di for ai, di in zip(a, d)) > 0:
                return False
        for a in h.a_eq:
            if sum(ai * di for ai, di in zip(a, d)) != 0:
                return False
    return True


def brute_solutions(m: Sequence[Sequence], q: Sequence) -> SolutionSet:
    """Exhaustive search over the 2^n complementarity sign patterns."""
    m = [[Fraction(x) for x in row] for row in m]
    q = [Fraction(x) for x in q]
    n = len(m)
    found = {}
    for pattern in itertools.product((False, True), repeat=n):
        alpha = tuple(i for i in range(n) if pattern[i])
        comp = tuple(i for i in range(n) if not pattern[i])
        v = _pattern_piece(m, q, alpha, comp)
        if v is not None and v not in found:
            found[v] = _pattern_system(m, q, alpha, comp)
    keep = [v for v in found if not any(o != v and _within(found[o], v) for o in found)]
    keep.sort(key=lambda v: (v.vertices, v.rays, v.lines))
    return SolutionSet(tuple(Piece(found[v], v) for v in keep))


# fast repeated solving for sampling


class _Solver:
    """Caches per-pattern inverses so that many right-hand sides are cheap."""

    def __init__(self, m):
        self.m = [[Fraction(x) for x in row] for row in m]
        self.n = len(m)
        self.patterns = []
        for pattern in itertools.product((False, True), repeat=self.n):
            alpha = tuple(i for i in range(self.n) if pattern[i])
            comp = tuple(i for i in range(self.n) if not pattern[i])
            k = len(alpha)
            a = [[self.m[i][j] for j in alpha] for i in alpha]
            cols = []
            regular = True
            for c in range(k):
                sol = _gauss(a, [Fraction(int(r == c)) for r in range(k)], k)
                if sol is None or sol[1]:
                    regular = False
                    break
                cols.append(sol[0])
            inv = [[cols[c][r] for c in range(k)] for r in range(k)] if regular else None
            left = None
            if not regular:
                at = [[a[i][j] for i in range(k)] for j in range(k)]
                left = _gauss(at, [Fraction(0)] * k, k)[1]
            self.patterns.append((alpha, comp, inv, left))
        self.cache: dict = {}

    def solve(self, q) -> list[PolyhedronV]:
        q = tuple(q)
        if q in self.cache:
            return self.cache[q]
        out = []
        n, m = self.n, self.m
        for alpha, comp, inv, left in self.patterns:
            if inv is not None:
                xa = [-sum(inv[r][c] * q[alpha[c]] for c in range(len(alpha))) for r in range(len(alpha))]
                if any(v < 0 for v in xa):
                    continue
                x = [Fraction(0)] * n
                for i, v in zip(alpha, xa):
                    x[i] = v
                if any(sum(m[i][j] * x[j] for j in alpha) + q[i] < 0 for i in comp):
                    continue
                out.append(PolyhedronV(n, (tuple(x),), (), ()))
            else:
                if any(sum(y[c] * q[alpha[c]] for c in range(len(alpha))) != 0 for y in left):
                    continue
                v = _pattern_piece(m, q, alpha, comp)
                if v is not None:
                    out.append(v)
        out = list(dict.fromkeys(out))
        self.cache[q] = out
        return out


def _norm(v) -> float:
    return math.sqrt(float(sum(Fraction(x) ** 2 for x in v)))


def _dist(x, pieces: list[PolyhedronV]) -> float:
    best = math.inf
    for p in pieces:
        if p.is_point():
            d = _norm([a - b for a, b in zip(x, p.vertices[0])])
        else:
            d = _dist_to_polyhedron(x, p)
        best = min(best, d)
    return best


def _generator_matrix(p: PolyhedronV):
    cols = [[float(c) for c in v] for v in p.vertices]
    cols += [[float(c) for c in r] for r in p.rays]
    cols += [[float(c) for c in l] for l in p.lines] + [[-float(c) for c in l] for l in p.lines]
    return np.array(cols).T


def _nnls_weights(x, p: PolyhedronV):
    # min |V l + R r + L s - x| with l >= 0, sum l = 1, r >= 0; a heavy row enforces the sum
    a = _generator_matrix(p)
    k = len(p.vertices)
    weight = 1e4
    a = np.vstack([a, np.r_[np.full(k, weight), np.zeros(a.shape[1] - k)]])
    b = np.r_[np.array([float(c) for c in x]), weight]
    coef, _ = nnls(a, b, maxiter=2000)
    return a[:-1], coef, b[:-1]


def _dist_to_polyhedron(x, p: PolyhedronV) -> float:
    a, coef, b = _nnls_weights(x, p)
    return float(np.linalg.norm(a @ coef - b))


def _nearest_point(x, p: PolyhedronV) -> tuple:
    """An exact point of p close to x (rationalized nnls weights, renormalized)."""
    _, coef, _ = _nnls_weights(x, p)
    k = len(p.vertices)
    lam = [max(Fraction(c).limit_denominator(1000), Fraction(0)) for c in coef[:k]]
    total = sum(lam)
    lam = [Fraction(1, k)] * k if total == 0 else [c / total for c in lam]
    mu = [max(Fraction(c).limit_denominator(1000), Fraction(0)) for c in coef[k:]]
    dirs = list(p.rays) + list(p.lines) + [tuple(-c for c in l) for l in p.lines]
    point = [Fraction(0)] * p.dim
    for c, v in zip(lam, p.vertices):
        point = [a + c * b for a, b in zip(point, v)]
    for c, d in zip(mu, dirs):
        point = [a + c * b for a, b in zip(point, d)]
    return tuple(point)


def _step(length_sq: Fraction, reach: Fraction) -> Fraction:
    return Fraction(math.sqrt(float(reach ** 2 / length_sq))).limit_denominator(1000)


def _piece_points(p: PolyhedronV, x_bar, reach: Fraction) -> list:
    """Vertices, plus points around the piece point nearest x_bar, moving toward every generator."""
    if p.is_point():
        return [p.vertices[0]]
    out = list(p.vertices)
    anchor = _nearest_point(x_bar, p)
    out.append(anchor)
    for v in p.vertices:
        d = [a - b for a, b in zip(v, anchor)]
        sq = sum(c * c for c in d)
        if sq == 0:
            continue
        full = min(_step(sq, reach), Fraction(1))
        for f in (full / 4, full / 2, full):
            out.append(tuple(a + f * c for a, c in zip(anchor, d)))
    dirs = list(p.rays) + list(p.lines) + [tuple(-c for c in l) for l in p.lines]
    for d in dirs:
        full = _step(sum(Fraction(c) ** 2 for c in d), reach)
        for f in (full / 4, full / 2, full):
            out.append(tuple(a + f * c for a, c in zip(anchor, d)))
    return list(dict.fromkeys(out))


def _representatives(pieces: list[PolyhedronV], x_bar, reach: Fraction) -> list:
    out = []
    for p in pieces:
        out.extend(_piece_points(p, x_bar, reach))
    return out


# regions


class _Region:
    def __init__(self, region, q_bar):
        self.q_bar = tuple(Fraction(x) for x in q_bar)
        if isinstance(region, Cone):
            self.contains = region.contains_point
            if not region.contains_point(self.q_bar):
                raise EmptyRegionError("q_bar is not in the region")
            act = [a for a in region.ineqs if sum(x * y for x, y in zip(a, self.q_bar)) == 0]
            self.tangent = Cone.from_h(act, region.eqs, dim=region.dim)
            self.active_normals = act
        elif isinstance(region, PolyhedronH):
            self.contains = region.contains
            if not region.contains(self.q_bar):
                raise EmptyRegionError("q_bar is not in the region")
            self.tangent = tangent_cone_poly(region, self.q_bar)
            self.active_normals = [region.a_le[i] for i in region.active(self.q_bar)]
        else:
            raise TypeError("region must be a Cone or a PolyhedronH")
        self.dim = len(self.q_bar)

    def random_point(self, rng: random.Random, radius: Fraction, tries: int = 200):
        gens = self.tangent.generators()
        if not gens:
            return self.q_bar
        for _ in range(tries):
            d = [0] * self.dim
            for g in gens:
                if rng.random() < 0.35:
                    continue
                w = rng.randint(1, 6)
                d = [a + w * b for a, b in zip(d, g)]
            if not any(d):
                continue
            length = _norm(d)
            s = Fraction(rng.uniform(0.05, 1.0) * float(radius) / length).limit_denominator(4096)
            if s == 0:
                continue
            p = tuple(a + s * b for a, b in zip(self.q_bar, d))
            if self.contains(p) and sum((a - b) ** 2 for a, b in zip(p, self.q_bar)) <= radius ** 2:
                return p
        return None


def _boundary_normals(m, q_bar, region: _Region) -> list:
    """Normals of hyperplanes through q_bar spanned by n-1 columns of (E, -M), plus active region facets."""
    n = len(m)
    cols = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    cols += [tuple(-Fraction(m[r][i]) for r in range(n)) for i in range(n)]
    normals = set()
    for subset in itertools.combinations(cols, n - 1):
        sol = _gauss([list(map(Fraction, c)) for c in subset], [Fraction(0)] * (n - 1), n)
        if sol is None or len(sol[1]) != 1:
            continue
        nu = sol[1][0]
        if sum(a * b for a, b in zip(nu, q_bar)) != 0:
            continue
        normals.add(_primitive_sign(nu))
    for a in region.active_normals:
        normals.add(_primitive_sign(a))
    return sorted(normals)


def _primitive_sign(v) -> tuple:
    v = [Fraction(x) for x in v]
    den = math.lcm(*(x.denominator for x in v))
    ints = [int(x * den) for x in v]
    g = math.gcd(*ints)
    ints = [x // g for x in ints]
    first = next(x for x in ints if x)
    return tuple(ints) if first > 0 else tuple(-x for x in ints)


def _project_to_subspace(p, q_bar, normals):
    """Project p onto {y : nu . y = nu . q_bar for nu in normals}, exactly."""
    k = len(normals)
    gram = [[Fraction(sum(a * b for a, b in zip(normals[i], normals[j]))) for j in range(k)] for i in range(k)]
    rhs = [Fraction(sum(a * (x - y) for a, x, y in zip(normals[i], p, q_bar))) for i in range(k)]
    sol = _gauss(gram, rhs, k)
    if sol is None:
        return None
    lam = sol[0]
    return tuple(x - sum(lam[i] * normals[i][j] for i in range(k)) for j, x in enumerate(p))


def _start_points(m, region: _Region, plan: SamplingPlan, rng: random.Random):
    """q_bar, points on slice boundaries through q_bar, and generic points, in rotation."""
    normals = _boundary_normals(m, region.q_bar, region)
    out = []
    for k in range(plan.pair_count):
        kind = k % 3
        if kind == 0:
            out.append(region.q_bar)
            continue
        p = region.random_point(rng, plan.radius)
        if p is None:
            out.append(region.q_bar)
            continue
        if kind == 1 and normals:
            chosen = rng.sample(normals, min(len(normals), rng.choice((1, 1, 2))))
            proj = _project_to_subspace(p, region.q_bar, chosen)
            if proj is not None and region.contains(proj):
                p = proj
        out.append(p)
    return out


def _in_graph(m, q, x) -> bool:
    w = [sum(a * b for a, b in zip(row, x)) + qi for row, qi in zip(m, q)]
    return all(v >= 0 for v in x) and all(v >= 0 for v in w) and sum(a * b for a, b in zip(x, w)) == 0


def _window_filter(points, x_bar, window) -> list:
    w2 = window ** 2
    return [x for x in points if sum((Fraction(a) - b) ** 2 for a, b in zip(x, x_bar)) <= w2]


@dataclass
class LipschitzEvidence:
    kappa_hat: float
    profile: list  # kappa estimate per refinement level, coarsest first
    divergent: bool
    violation: tuple | None


def _chord_profile(task):
    m, s, e, x_bar, plan = task
    solver = _Solver(m)
    fine = plan.base_intervals * 2 ** plan.levels
    grid = [tuple(a + Fraction(j, fine) * (b - a) for a, b in zip(s, e)) for j in range(fine + 1)]
    sols = [solver.solve(g) for g in grid]
    reach = plan.window_radius / 2
    reps = [_window_filter(_representatives(p, x_bar, reach), x_bar, plan.window_radius) for p in sols]
    violation = next(((grid[j], None, None) for j, p in enumerate(sols) if not p), None)
    dist_cache: dict = {}
    profile = []
    for level in range(plan.levels + 1):
        step = 2 ** (plan.levels - level)
        best = 0.0
        for j in range(0, fine, step):
            a, b = j, j + step
            gap = _norm([x - y for x, y in zip(grid[b], grid[a])])
            for src, dst in ((a, b), (b, a)):
                for xp in reps[dst]:
                    if not sols[src]:
                        best = math.inf
                        if violation is None or violation[1] is None:
                            violation = (grid[src], grid[dst], xp)
                        continue
                    key = (xp, src)
                    if key not in dist_cache:
                        dist_cache[key] = _dist(xp, sols[src])
                    best = max(best, dist_cache[key] / gap)
        profile.append(best)
    return profile, violation


def lipschitz_evidence(m: Sequence[Sequence], region, q_bar: Sequence, x_bar: Sequence,
                       plan: SamplingPlan = SamplingPlan()) -> LipschitzEvidence:
    """Sampled Lipschitz ratios along chords of the region, at shrinking pair spacing.

    Each chord from a start point s to an end point e (both in the region
    near q_bar) is cut into base_intervals * 2^levels pieces.  At level k the
    consecutive pairs are 2^(levels-k) grid steps apart; the kappa estimate
    at that level is the largest ratio dist(x', S(q)) / |q' - q| over pairs
    and solutions x' of S(q') in the window around x_bar, in both orders.
    Divergence means the finest estimate is at least twice the coarsest.
    """
    region = _Region(region, q_bar)
    x_bar = tuple(Fraction(x) for x in x_bar)
    m = tuple(tuple(Fraction(x) for x in row) for row in m)
    rng = random.Random(plan.seed)
    tasks = []
    for s in _start_points(m, region, plan, rng):
        e = region.random_point(rng, plan.radius)
        if e is not None and e != s:
            tasks.append((m, s, e, x_bar, plan))
    profile = [0.0] * (plan.levels + 1)
    violation = None
    for prof, viol in ordered_map(_chord_profile, tasks):
        profile = [max(a, b) for a, b in zip(profile, prof)]
        if violation is None:
            violation = viol
    kappa = profile[-1]
    # still growing at the last halving: saturating estimates are not divergence
    divergent = kappa > 1e-7 and kappa >= 2 * profile[0] and kappa >= 1.5 * profile[-2]
    return LipschitzEvidence(kappa, profile, divergent, violation)


def sample_lipschitz_estimate(m: Sequence[Sequence], region, q_bar: Sequence, x_bar: Sequence,
                              plan: SamplingPlan = SamplingPlan()):
    """(kappa_hat, violation) at the finest pair spacing."""
    ev = lipschitz_evidence(m, region, q_bar, x_bar, plan)
    return ev.kappa_hat, ev.violation


def sample_isc(m: Sequence[Sequence], region, q_bar: Sequence, x_bar: Sequence,
               plan: SamplingPlan = SamplingPlan(), depth: int = 10) -> bool:
    """Empirical inner semicontinuity relative to the region near (q_bar, x_bar).

    For sampled graph points (q, x) and region points q_k = q + 2^-k (e - q),
    dist(x, S(q_k)) must shrink; a distance that stays put over the last two
    halvings means the ball around x is never entered.
    """
    region = _Region(region, q_bar)
    x_bar = tuple(Fraction(x) for x in x_bar)
    solver = _Solver(m)
    if not _in_graph(solver.m, region.q_bar, x_bar):
        raise MembershipError("x_bar is not a solution at q_bar")
    rng = random.Random(plan.seed)
    reach = plan.window_radius / 2
    for s in _start_points(m, region, plan, rng):
        e = region.random_point(rng, plan.radius)
        if e is None or e == s:
            continue
        xs = _window_filter(_representatives(solver.solve(s), x_bar, reach), x_bar, plan.window_radius)
        for x in xs:
            dists = []
            for k in (depth - 4, depth - 2, depth):
                qk = tuple(a + (b - a) / 2 ** k for a, b in zip(s, e))
                pieces = solver.solve(qk)
                dists.append(_dist(x, pieces) if pieces else math.inf)
            if dists[-1] > 1e-9 and dists[-1] > dists[-2] / 2:
                return False
    return True
