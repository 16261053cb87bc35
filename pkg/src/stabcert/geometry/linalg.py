"""Exact linear algebra over the rationals.

Vectors and matrices are plain tuples of ``Fraction``.  Integer-valued
helpers (``integer_row``, ``int_rank``) are used by the cone kernel, which
works with primitive integer vectors wherever positive scaling is harmless.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

RVector = tuple[Fraction, ...]
RMatrix = tuple[RVector, ...]
IVector = tuple[int, ...]


def frac(value) -> Fraction:
    """Parse an int, Fraction or "p/q" string into a Fraction.

    Floats are rejected: they would silently import binary rounding.
    """
    t = type(value)
    if t is Fraction:
        return value
    if t is int:
        return Fraction(value)
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, float):
        raise TypeError(f"refusing float {value!r}; pass an int, Fraction or 'p/q' string")
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def vector(values: Iterable) -> RVector:
    return tuple(frac(v) for v in values)


def matrix(rows: Iterable[Iterable]) -> RMatrix:
    out = tuple(vector(r) for r in rows)
    if out and len({len(r) for r in out}) != 1:
        raise ValueError("ragged matrix")
    return out


def identity(n: int) -> RMatrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def zeros(n: int) -> RVector:
    return (Fraction(0),) * n


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), 0)


def mat_vec(m: Sequence[Sequence], v: Sequence) -> RVector:
    return tuple(Fraction(dot(row, v)) for row in m)


def vec_mat(v: Sequence, m: Sequence[Sequence], cols: int) -> RVector:
    """Row vector times matrix, ``v^T m``."""
    out = [Fraction(0)] * cols
    for vi, row in zip(v, m):
        if vi:
            for j, mij in enumerate(row):
                out[j] += vi * mij
    return tuple(out)


def transpose(m: Sequence[Sequence], cols: int | None = None) -> RMatrix:
    if not m:
        return tuple(() for _ in range(cols or 0))
    return tuple(tuple(Fraction(m[i][j]) for i in range(len(m))) for j in range(len(m[0])))


def column(m: Sequence[Sequence], j: int) -> RVector:
    return tuple(Fraction(row[j]) for row in m)


def add(a: Sequence, b: Sequence) -> RVector:
    return tuple(Fraction(x + y) for x, y in zip(a, b))


def sub(a: Sequence, b: Sequence) -> RVector:
    return tuple(Fraction(x - y) for x, y in zip(a, b))


def scale(t, a: Sequence) -> RVector:
    return tuple(Fraction(t * x) for x in a)


def neg(a: Sequence) -> RVector:
    return tuple(Fraction(-x) for x in a)


def sq_norm(a: Sequence) -> Fraction:
    return Fraction(dot(a, a))


def is_zero(a: Sequence) -> bool:
    return all(x == 0 for x in a)


def integer_row(v: Sequence) -> IVector:
    """Positive rescaling of ``v`` to a primitive integer vector."""
    if all(type(x) is int for x in v):
        return primitive(v)
    fr = [Fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g > 1:
        ints = [x // g for x in ints]
    return tuple(ints)


def primitive(v: Sequence[int]) -> IVector:
    g = 0
    for x in v:
        g = gcd(g, x)
    if g <= 1:
        return tuple(v)
    return tuple(x // g for x in v)


def sign_normalized(v: IVector) -> IVector:
    """Flip so that the first nonzero entry is positive."""
    for x in v:
        if x:
            return v if x > 0 else tuple(-y for y in v)
    return v


def int_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank of an integer matrix by fraction-free elimination."""
    work = [list(r) for r in rows if any(r)]
    if not work:
        return 0
    ncols = len(work[0])
    rank = 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(work)) if work[i][c]), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        p = work[rank]
        pc = p[c]
        for i in range(rank + 1, len(work)):
            r = work[i]
            rc = r[c]
            if rc:
                new = [pc * a - rc * b for a, b in zip(r, p)]
                g = 0
                for x in new:
                    g = gcd(g, x)
                work[i] = [x // g for x in new] if g > 1 else new
        rank += 1
        if rank == len(work):
            break
    return rank


def rref(rows: Sequence[Sequence], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; zero rows dropped."""
    work = [[Fraction(x) for x in r] for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(work)) if work[i][c] != 0), None)
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        pv = work[r][c]
        work[r] = [x / pv for x in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c] != 0:
                f = work[i][c]
                work[i] = [a - f * b for a, b in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    return work[:r], pivots


def rank(rows: Sequence[Sequence], ncols: int) -> int:
    return len(rref(rows, ncols)[1])


def _int_rref(rows: Sequence[Sequence[int]], ncols: int) -> tuple[list[list[int]], list[int]]:
    """Fraction-free Gauss-Jordan: rows are primitive, pivots positive, pivot columns cleared."""
    work = [list(r) for r in rows if any(r)]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(work)) if work[i][c]), None)
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        p = work[r]
        if p[c] < 0:
            p = [-x for x in p]
        p = list(primitive(p))
        work[r] = p
        pc = p[c]
        for i in range(len(work)):
            if i != r and work[i][c]:
                f = work[i][c]
                work[i] = list(primitive([pc * a - f * b for a, b in zip(work[i], p)]))
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    return work[:r], pivots


def _all_int(rows) -> bool:
    return all(type(x) is int for r in rows for x in r)


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[IVector]:
    """Integer basis of {x : rows @ x = 0}."""
    if _all_int(rows):
        red, pivots = _int_rref(rows, ncols)
        lcm = 1
        for row, pc in zip(red, pivots):
            lcm = lcm * row[pc] // gcd(lcm, row[pc])
        basis = []
        for f in (c for c in range(ncols) if c not in pivots):
            v = [0] * ncols
            v[f] = lcm
            for row, pc in zip(red, pivots):
                v[pc] = -row[f] * (lcm // row[pc])
            basis.append(primitive(v))
        return basis
    red, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[f]
        basis.append(integer_row(v))
    return basis


def row_space_basis(rows: Sequence[Sequence], ncols: int) -> list[IVector]:
    """Canonical basis of the row space: RREF rows scaled to primitive integers."""
    if _all_int(rows):
        return [tuple(r) for r in _int_rref(rows, ncols)[0]]
    red, _ = rref(rows, ncols)
    return [integer_row(r) for r in red]


def solve_affine(a: Sequence[Sequence], b: Sequence, ncols: int):
    """All solutions of a @ x = b as (particular, nullspace basis), or None."""
    aug = [list(r) + [bi] for r, bi in zip(a, b)]
    red, pivots = rref(aug, ncols + 1)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for row, pc in zip(red, pivots):
        x[pc] = row[ncols]
    return tuple(x), nullspace(a, ncols) if a else [
        tuple(int(i == j) for j in range(ncols)) for i in range(ncols)]


def independent_subset(vectors: Sequence[Sequence], ncols: int) -> list[int]:
    """Indices of a maximal linearly independent subset, greedy in order."""
    chosen: list[int] = []
    basis: list[list[Fraction]] = []
    pivots: list[int] = []
    for idx, v in enumerate(vectors):
        w = [Fraction(x) for x in v]
        for row, pc in zip(basis, pivots):
            if w[pc] != 0:
                f = w[pc]
                w = [a - f * b for a, b in zip(w, row)]
        pc = next((c for c in range(ncols) if w[c] != 0), None)
        if pc is None:
            continue
        pv = w[pc]
        w = [x / pv for x in w]
        for k, row in enumerate(basis):
            if row[pc] != 0:
                f = row[pc]
                basis[k] = [a - f * b for a, b in zip(row, w)]
        basis.append(w)
        pivots.append(pc)
        chosen.append(idx)
    return chosen


def project_onto_span(vectors: Sequence[Sequence], p: Sequence, ncols: int) -> RVector:
    """Orthogonal projection of p onto span(vectors), exactly."""
    idx = independent_subset(vectors, ncols)
    if not idx:
        return zeros(ncols)
    basis = [[Fraction(x) for x in vectors[i]] for i in idx]
    k = len(basis)
    gram = [[dot(basis[i], basis[j]) for j in range(k)] for i in range(k)]
    rhs = [dot(basis[i], p) for i in range(k)]
    sol = solve_affine(gram, rhs, k)
    assert sol is not None
    coeffs = sol[0]
    out = [Fraction(0)] * ncols
    for c, bvec in zip(coeffs, basis):
        for j in range(ncols):
            out[j] += c * bvec[j]
    return tuple(out)


def det(m: Sequence[Sequence]) -> Fraction:
    n = len(m)
    work = [[Fraction(x) for x in r] for r in m]
    result = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if work[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            work[c], work[piv] = work[piv], work[c]
            result = -result
        pv = work[c][c]
        result *= pv
        for i in range(c + 1, n):
            if work[i][c] != 0:
                f = work[i][c] / pv
                work[i] = [a - f * b for a, b in zip(work[i], work[c])]
    return result


def fmt(x: Fraction) -> str:
    """Serialize a rational as "p" or "p/q"."""
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def fmt_vec(v: Sequence) -> list[str]:
    return [fmt(x) for x in v]


def fmt_mat(m: Sequence[Sequence]) -> list[list[str]]:
    return [fmt_vec(r) for r in m]
