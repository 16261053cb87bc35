"""Polyhedral convex cones with exact, synchronized H- and V-representations.

A cone is stored as

* H-rep: rows ``a`` of ``ineqs`` meaning ``a . x <= 0`` and rows of ``eqs``
  meaning ``a . x = 0``;
* V-rep: ``rays`` (nonnegative combinations) and ``lines`` (linear span).

Whichever representation is supplied is kept raw; the other one is computed
on first access by the double description method.  Canonical forms:

* lines: reduced row echelon basis of the lineality space, each row scaled
  to a primitive integer vector (first nonzero entry positive);
* rays: extreme rays of the pointed part ``cone ∩ lineality^⊥``, primitive
  integer vectors, sorted.

The canonical H-rep is the canonical V-rep of the polar cone, read as
constraints.  Two cones are equal iff their canonical V-reps are equal.
"""
from __future__ import annotations

from typing import Iterable, Sequence

from .linalg import (
    IVector,
    int_rank,
    integer_row,
    nullspace,
    primitive,
    row_space_basis,
    solve_affine,
)

Rep = tuple[tuple[IVector, ...], tuple[IVector, ...]]


def _idot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


def _orthogonal_part(r: IVector, lines: list[IVector], gram_solve) -> IVector:
    rhs = [_idot(l, r) for l in lines]
    if not any(rhs):
        return r
    coeffs = gram_solve(rhs)
    return integer_row([x - sum(c * l[j] for c, l in zip(coeffs, lines)) for j, x in enumerate(r)])


def _canonical(rays: Iterable[IVector], lines: Iterable[IVector], n: int) -> Rep:
    lines = row_space_basis(list(lines), n)
    out = set()
    if lines:
        gram = [[_idot(a, b) for b in lines] for a in lines]
        k = len(lines)

        def gram_solve(rhs):
            return solve_affine(gram, rhs, k)[0]
    for r in rays:
        if lines:
            r = _orthogonal_part(tuple(r), lines, gram_solve)
        if any(r):
            out.add(tuple(r))
    return tuple(sorted(out)), tuple(lines)


def double_description(ineqs: Sequence[Sequence[int]], eqs: Sequence[Sequence[int]], n: int) -> Rep:
    """Generators of {x : ineqs @ x <= 0, eqs @ x = 0}, canonical.

    Incremental: the equalities fix the starting lineality space, then each
    inequality either turns a line into a ray or cuts the current rays,
    combining adjacent pairs across the hyperplane.  Adjacency is decided by
    the rank of the constraints active at both rays.
    """
    eq_rows = [tuple(r) for r in eqs if any(r)]
    if eq_rows:
        lines = nullspace(eq_rows, n)
    else:
        lines = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    rank_eq = int_rank(eq_rows)
    rays: list[tuple[IVector, int]] = []
    done: list[IVector] = []
    seen = set()
    for a in ineqs:
        a = tuple(a)
        if not any(a) or a in seen:
            continue
        seen.add(a)
        bit = 1 << len(done)
        vals = [_idot(a, l) for l in lines]
        j = next((i for i, t in enumerate(vals) if t), None)
        if j is not None:
            l0, s = lines[j], vals[j]
            if s > 0:
                l0, s = tuple(-x for x in l0), -s
            new_lines = []
            for i, l in enumerate(lines):
                if i == j:
                    continue
                t = vals[i]
                if t:
                    l = primitive([s * x - t * y for x, y in zip(l, l0)])
                new_lines.append(l)
            new_rays = []
            for r, mask in rays:
                t = _idot(a, r)
                if t:
                    r = primitive([-s * x + t * y for x, y in zip(r, l0)])
                new_rays.append((r, mask | bit))
            new_rays.append((l0, bit - 1))
            lines, rays = new_lines, new_rays
        else:
            plus, minus, kept = [], [], []
            for r, mask in rays:
                t = _idot(a, r)
                if t > 0:
                    plus.append((r, mask, t))
                elif t < 0:
                    minus.append((r, mask, t))
                    kept.append((r, mask))
                else:
                    kept.append((r, mask | bit))
            target = n - len(lines) - 2
            for p, mp, tp in plus:
                for m, mm, tm in minus:
                    common = mp & mm
                    if bin(common).count("1") < target - rank_eq:
                        continue
                    rows = eq_rows + [done[i] for i in range(len(done)) if common >> i & 1]
                    if int_rank(rows) != target:
                        continue
                    v = primitive([tp * x - tm * y for x, y in zip(m, p)])
                    kept.append((v, common | bit))
            rays = kept
        done.append(a)
    return _canonical((r for r, _ in rays), lines, n)


def _int_rows(rows: Iterable[Sequence], n: int) -> tuple[IVector, ...]:
    out = []
    for r in rows:
        r = tuple(r)
        if len(r) != n:
            raise ValueError(f"row {r} has length {len(r)}, expected {n}")
        if any(x != 0 for x in r):
            out.append(integer_row(r))
    return tuple(out)


class Cone:
    """Immutable polyhedral cone in R^dim."""

    def __init__(self, dim: int, *, h: Rep | None = None, v: Rep | None = None,
                 canonical_h: bool = False, canonical_v: bool = False):
        if h is None and v is None:
            raise ValueError("need an H- or a V-representation")
        self.dim = dim
        self._h_raw = h
        self._v_raw = v
        self._hc = h if canonical_h else None
        self._vc = v if canonical_v else None

    # construction

    @classmethod
    def from_h(cls, ineqs: Iterable[Sequence] = (), eqs: Iterable[Sequence] = (), dim: int | None = None) -> Cone:
        ineqs, eqs = list(ineqs), list(eqs)
        n = _infer_dim(dim, ineqs, eqs)
        return cls(n, h=(_int_rows(ineqs, n), _int_rows(eqs, n)))

    @classmethod
    def from_v(cls, rays: Iterable[Sequence] = (), lines: Iterable[Sequence] = (), dim: int | None = None) -> Cone:
        rays, lines = list(rays), list(lines)
        n = _infer_dim(dim, rays, lines)
        return cls(n, v=(_int_rows(rays, n), _int_rows(lines, n)))

    @classmethod
    def zero(cls, n: int) -> Cone:
        return cls(n, v=((), ()), canonical_v=True)

    @classmethod
    def whole(cls, n: int) -> Cone:
        return cls(n, h=((), ()), canonical_h=True)

    @classmethod
    def orthant(cls, n: int, sign: int = 1) -> Cone:
        rays = tuple(sorted(tuple(sign * int(i == j) for j in range(n)) for i in range(n)))
        return cls(n, v=(rays, ()), canonical_v=True)

    # representations

    def _v(self) -> Rep:
        if self._vc is None:
            if self._h_raw is not None:
                self._vc = double_description(*self._h_raw, self.dim)
            else:
                self._vc = double_description(*self._h(), self.dim)
        return self._vc

    def _h(self) -> Rep:
        if self._hc is None:
            if self._v_raw is not None:
                self._hc = double_description(*self._v_raw, self.dim)
            else:
                self._hc = double_description(*self._v(), self.dim)
        return self._hc

    @property
    def rays(self) -> tuple[IVector, ...]:
        return self._v()[0]

    @property
    def lines(self) -> tuple[IVector, ...]:
        return self._v()[1]

    @property
    def ineqs(self) -> tuple[IVector, ...]:
        """Facet normals a with a . x <= 0 on the cone."""
        return self._h()[0]

    @property
    def eqs(self) -> tuple[IVector, ...]:
        return self._h()[1]

    def generators(self) -> list[IVector]:
        """Rays, then each line in both orientations."""
        out = list(self.rays)
        for l in self.lines:
            out.append(l)
            out.append(tuple(-x for x in l))
        return out

    # queries

    def contains_point(self, x: Sequence) -> bool:
        return (all(_dot(a, x) <= 0 for a in self.ineqs)
                and all(_dot(a, x) == 0 for a in self.eqs))

    def is_trivial(self) -> bool:
        return not self.rays and not self.lines

    def is_subspace(self) -> bool:
        return not self.rays

    def lineality_dim(self) -> int:
        return len(self.lines)

    def cone_dim(self) -> int:
        """Dimension of the linear hull."""
        return self.dim - len(self.eqs)

    def negated(self) -> Cone:
        rays = tuple(sorted(tuple(-x for x in r) for r in self.rays))
        ineqs = tuple(sorted(tuple(-x for x in a) for a in self.ineqs))
        return Cone(self.dim, h=(ineqs, self.eqs), v=(rays, self.lines),
                    canonical_h=True, canonical_v=True)

    def key(self) -> tuple:
        return (self.dim,) + self._v()

    def __eq__(self, other) -> bool:
        return isinstance(other, Cone) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"Cone(dim={self.dim}, rays={list(self.rays)}, lines={list(self.lines)})"


def _dot(a, x):
    return sum(ai * xi for ai, xi in zip(a, x))


def _infer_dim(dim, *groups) -> int:
    if dim is not None:
        return dim
    for g in groups:
        if g:
            return len(g[0])
    raise ValueError("cannot infer the dimension of an empty representation")
