"""Affine equalities over the rationals (Karr's domain).

A space is either empty or a base point plus a basis of directions. The
basis is kept in reduced row echelon form, which makes the generator view
canonical. Constraint rows are the null space of the basis, again reduced,
then scaled to coprime integers with a positive leading entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

Row = list


def rref(rows: Iterable[Sequence], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the first ``ncols`` columns.

    Rows may be longer than ``ncols`` (an augmented constant column rides
    along but is never chosen as a pivot). Zero rows are dropped.
    """
    m = [[Fraction(x) for x in r] for r in rows]
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        sel = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if sel is None:
            continue
        m[r], m[sel] = m[sel], m[r]
        inv = 1 / m[r][col]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    rest = m[r:]
    m = m[:r]
    # a leftover row with a nonzero augmented entry means 0 = c
    for row in rest:
        if any(x != 0 for x in row):
            m.append(row)
    return m, pivots


def integerize(row: Sequence[Fraction]) -> tuple[int, ...]:
    den = 1
    for x in row:
        den = lcm(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in row]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g > 1:
        ints = [x // g for x in ints]
    lead = next((x for x in ints if x != 0), 0)
    if lead < 0:
        ints = [-x for x in ints]
    return tuple(ints)


@dataclass(frozen=True)
class AffineEquation:
    """``sum(coeffs[i] * x_i) == const`` with coprime integer entries."""

    coeffs: tuple[int, ...]
    const: int

    def holds(self, v: Sequence) -> bool:
        return sum(Fraction(a) * x for a, x in zip(self.coeffs, v)) == self.const

    def __str__(self) -> str:
        return f"{list(self.coeffs)} = {self.const}"


class AffineSpace:
    __slots__ = ("dim", "point", "basis")

    def __init__(self, dim: int, point=None, basis=()) -> None:
        self.dim = dim
        self.point: tuple[Fraction, ...] | None = None if point is None else tuple(Fraction(x) for x in point)
        if self.point is not None and len(self.point) != dim:
            raise ValueError("point has wrong dimension")
        rows, _ = rref(basis, dim)
        self.basis: tuple[tuple[Fraction, ...], ...] = tuple(tuple(r) for r in rows)

    @classmethod
    def empty(cls, dim: int) -> "AffineSpace":
        return cls(dim)

    @classmethod
    def from_point(cls, v: Sequence) -> "AffineSpace":
        return cls(len(v), v)

    @property
    def is_empty(self) -> bool:
        return self.point is None

    @property
    def rank(self) -> int:
        return -1 if self.point is None else len(self.basis)

    def join(self, other: "AffineSpace") -> "AffineSpace":
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch {self.dim} vs {other.dim}")
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        diff = [b - a for a, b in zip(self.point, other.point)]
        return AffineSpace(self.dim, self.point, list(self.basis) + list(other.basis) + [diff])

    __or__ = join

    def add_point(self, v: Sequence) -> "AffineSpace":
        return self.join(AffineSpace.from_point(v))

    def constraints(self) -> list[AffineEquation]:
        if self.is_empty:
            raise ValueError("the empty space has no constraint view")
        n = self.dim
        pivots = []
        for r in self.basis:
            pivots.append(next(i for i, x in enumerate(r) if x != 0))
        free = [c for c in range(n) if c not in pivots]
        null = []
        for f in free:
            vec = [Fraction(0)] * n
            vec[f] = Fraction(1)
            for r, p in zip(self.basis, pivots):
                vec[p] = -r[f]
            null.append(vec)
        aug = [v + [sum(a * x for a, x in zip(v, self.point))] for v in null]
        rows, _ = rref(aug, n)
        out = []
        for r in rows:
            ints = integerize(r)
            out.append(AffineEquation(ints[:n], ints[n]))
        return out

    def contains(self, v: Sequence) -> bool:
        if self.is_empty:
            return False
        return all(eq.holds(v) for eq in self.constraints())

    def __eq__(self, other) -> bool:
        if not isinstance(other, AffineSpace) or other.dim != self.dim:
            return NotImplemented
        if self.is_empty or other.is_empty:
            return self.is_empty and other.is_empty
        return self.basis == other.basis and self.contains(other.point)

    def __hash__(self) -> int:
        return hash((self.dim, self.basis))

    def __repr__(self) -> str:
        if self.is_empty:
            return f"AffineSpace(dim={self.dim}, EMPTY)"
        return f"AffineSpace(dim={self.dim}, rank={self.rank})"


def from_constraints(dim: int, eqs: Sequence[AffineEquation]) -> AffineSpace:
    """Space of solutions of a system (empty if inconsistent)."""
    aug = [list(e.coeffs) + [e.const] for e in eqs]
    rows, pivots = rref(aug, dim)
    if len(rows) > len(pivots):
        return AffineSpace.empty(dim)
    point = [Fraction(0)] * dim
    for r, p in zip(rows, pivots):
        point[p] = r[dim]
    free = [c for c in range(dim) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * dim
        vec[f] = Fraction(1)
        for r, p in zip(rows, pivots):
            vec[p] = -r[f]
        basis.append(vec)
    return AffineSpace(dim, point, basis)


@dataclass(frozen=True)
class OutputEquation:
    """``lam * x[target] = sum(coeffs[k] * x[k]) + const`` with ``lam > 0``."""

    target: int
    lam: int
    coeffs: tuple[tuple[int, int], ...]
    const: int


def solve_for_outputs(eqs: Sequence[AffineEquation], n_out: int):
    """Rewrite equations so each has a single output variable on the left.

    Variables ``0 .. n_out-1`` are outputs. Returns ``(solved, unliftable)``
    where ``unliftable`` lists equations that tie outputs to other outputs
    only through non-pivot columns. Rows with no output at all (relations
    among inputs) are neither solved nor reported.
    """
    if not eqs:
        return [], []
    dim = len(eqs[0].coeffs)
    aug = [list(e.coeffs) + [e.const] for e in eqs]
    rows, pivots = rref(aug, dim)
    solved, bad = [], []
    for r, p in zip(rows, pivots):
        if p >= n_out:
            continue
        ints = integerize(r)
        if any(ints[j] for j in range(n_out) if j != p):
            bad.append(AffineEquation(ints[:dim], ints[dim]))
            continue
        lam = ints[p]
        coeffs = tuple((k, -ints[k]) for k in range(n_out, dim) if ints[k])
        solved.append(OutputEquation(p, lam, coeffs, ints[dim]))
    return solved, bad
