"""Integer octagons as difference-bound matrices.

Variable ``x_i`` owns two nodes: ``2i`` stands for ``+x_i`` and ``2i+1``
for ``-x_i``. Entry ``m[a][b]`` bounds ``V_b - V_a``. Unbounded entries
hold ``INF`` (a float), every finite entry is a Python int.
"""

from __future__ import annotations

from typing import Iterable, Sequence

INF = float("inf")
NEG_INF = float("-inf")

Pattern = tuple  # coefficient tuple over the octagon's variables


def octagon_patterns(n: int) -> list[Pattern]:
    """Default template order: all ``+x``, all ``-x``, then per pair
    ``x+y``, ``-x-y``, ``-x+y``, ``x-y``."""
    out: list[Pattern] = []
    for sign in (1, -1):
        for i in range(n):
            p = [0] * n
            p[i] = sign
            out.append(tuple(p))
    for i in range(n):
        for j in range(i + 1, n):
            for si, sj in ((1, 1), (-1, -1), (-1, 1), (1, -1)):
                p = [0] * n
                p[i], p[j] = si, sj
                out.append(tuple(p))
    return out


def interval_patterns(n: int) -> list[Pattern]:
    return octagon_patterns(n)[: 2 * n]


def is_octagonal(p: Pattern) -> bool:
    nz = [c for c in p if c]
    return 1 <= len(nz) <= 2 and all(abs(c) == 1 for c in nz)


def _node(i: int, sign: int) -> int:
    return 2 * i if sign > 0 else 2 * i + 1


def _cell(p: Pattern) -> tuple[int, int, int]:
    """DBM cell holding the bound of ``p`` and the factor applied to it."""
    nz = [(i, c) for i, c in enumerate(p) if c]
    if len(nz) == 1:
        i, c = nz[0]
        return _node(i, -c), _node(i, c), 2
    (i, ci), (j, cj) = nz
    return _node(j, -cj), _node(i, ci), 1


def _half_floor(v):
    return v if v == INF else v // 2


class Octagon:
    """Closed (or bottom) integer octagon over ``n`` variables."""

    __slots__ = ("n", "m", "bottom")

    def __init__(self, n: int, m=None, bottom: bool = False, closed: bool = False) -> None:
        self.n = n
        self.bottom = bottom
        if bottom:
            self.m = None
            return
        size = 2 * n
        if m is None:
            m = [[0 if a == b else INF for b in range(size)] for a in range(size)]
        else:
            m = [list(r) for r in m]
        self.m = m
        if not closed:
            self._close()

    # -- construction ----------------------------------------------------
    @classmethod
    def top(cls, n: int) -> "Octagon":
        return cls(n, closed=True)

    @classmethod
    def bottom_of(cls, n: int) -> "Octagon":
        return cls(n, bottom=True)

    @classmethod
    def from_constraints(cls, n: int, cons: Iterable[tuple[Pattern, object]]) -> "Octagon":
        return cls.top(n).meet(cons)

    @classmethod
    def from_box(cls, box: Sequence[tuple[int, int]]) -> "Octagon":
        n = len(box)
        cons = []
        for i, (lo, hi) in enumerate(box):
            p = [0] * n
            p[i] = 1
            cons.append((tuple(p), hi))
            p[i] = -1
            cons.append((tuple(p), -lo))
        return cls.from_constraints(n, cons)

    @classmethod
    def from_points(cls, n: int, pts: Iterable[Sequence[int]]) -> "Octagon":
        """Smallest octagon containing the given integer points."""
        best = {p: NEG_INF for p in octagon_patterns(n)}
        any_pt = False
        for x in pts:
            any_pt = True
            for p in best:
                v = sum(c * xi for c, xi in zip(p, x))
                if v > best[p]:
                    best[p] = v
        if not any_pt:
            return cls.bottom_of(n)
        return cls.from_constraints(n, best.items())

    # -- closure ---------------------------------------------------------
    def _close(self) -> None:
        m = self.m
        size = 2 * self.n
        for k in range(size):
            mk = m[k]
            for i in range(size):
                mik = m[i][k]
                if mik == INF:
                    continue
                mi = m[i]
                for j in range(size):
                    v = mik + mk[j]
                    if v < mi[j]:
                        mi[j] = v
        for i in range(size):
            if m[i][i] < 0:
                self._set_bottom()
                return
        for i in range(size):
            v = m[i][i ^ 1]
            if v != INF:
                m[i][i ^ 1] = 2 * (v // 2)
        for i in range(0, size, 2):
            if m[i][i + 1] + m[i + 1][i] < 0:
                self._set_bottom()
                return
        for i in range(size):
            a = m[i][i ^ 1]
            if a == INF:
                continue
            for j in range(size):
                b = m[j ^ 1][j]
                if b == INF:
                    continue
                v = (a + b) // 2
                if v < m[i][j]:
                    m[i][j] = v
        for i in range(size):
            m[i][i] = 0

    def _set_bottom(self) -> None:
        self.bottom = True
        self.m = None

    # -- lattice ---------------------------------------------------------
    def meet(self, cons: Iterable[tuple[Pattern, object]]) -> "Octagon":
        if self.bottom:
            return self
        m = [list(r) for r in self.m]
        changed = False
        for p, bound in cons:
            if bound == INF:
                continue
            if bound == NEG_INF:
                return Octagon.bottom_of(self.n)
            if not is_octagonal(p):
                raise ValueError(f"pattern {p} is not octagonal")
            a, b, f = _cell(p)
            v = f * int(bound)
            if v < m[a][b]:
                m[a][b] = v
                m[b ^ 1][a ^ 1] = v
                changed = True
        if not changed:
            return self
        return Octagon(self.n, m)

    def join(self, other: "Octagon") -> "Octagon":
        if self.bottom:
            return other
        if other.bottom:
            return self
        m = [[max(x, y) for x, y in zip(r1, r2)] for r1, r2 in zip(self.m, other.m)]
        return Octagon(self.n, m, closed=True)

    __or__ = join

    def leq(self, other: "Octagon") -> bool:
        if self.bottom:
            return True
        if other.bottom:
            return False
        return all(x <= y for r1, r2 in zip(self.m, other.m) for x, y in zip(r1, r2))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Octagon):
            return NotImplemented
        if self.bottom or other.bottom:
            return self.bottom == other.bottom
        return self.n == other.n and self.m == other.m

    def __hash__(self) -> int:
        return hash((self.n, None if self.bottom else tuple(map(tuple, self.m))))

    # -- queries ---------------------------------------------------------
    def bound_of(self, p: Pattern):
        """Tightest ``d`` with ``p . x <= d``; ``+inf`` if unbounded, ``-inf`` on bottom."""
        if self.bottom:
            return NEG_INF
        a, b, f = _cell(p)
        v = self.m[a][b]
        return _half_floor(v) if f == 2 else v

    def bounds(self, patterns: Sequence[Pattern]) -> list:
        return [self.bound_of(p) for p in patterns]

    def interval(self, i: int) -> tuple:
        p = [0] * self.n
        p[i] = 1
        hi = self.bound_of(tuple(p))
        p[i] = -1
        lo = self.bound_of(tuple(p))
        return (-lo if lo != INF else NEG_INF, hi)

    def contains(self, x: Sequence[int]) -> bool:
        if self.bottom:
            return False
        for p in octagon_patterns(self.n):
            if sum(c * xi for c, xi in zip(p, x)) > self.bound_of(p):
                return False
        return True

    def constraints(self) -> list[tuple[Pattern, object]]:
        if self.bottom:
            return []
        return [(p, self.bound_of(p)) for p in octagon_patterns(self.n)]

    def __repr__(self) -> str:
        if self.bottom:
            return "Octagon(BOTTOM)"
        rows = [f"{p}<={b}" for p, b in self.constraints() if b != INF]
        return "Octagon(" + ", ".join(rows) + ")"


def drop_redundant(n: int, cons: Sequence[tuple[Pattern, object]]) -> list[tuple[Pattern, object]]:
    """Remove octagonal rows entailed by the others (keeps the first of equals)."""
    rows = [(p, b) for p, b in cons if b != INF]
    # dedupe by keeping the tightest bound per pattern
    best: dict[Pattern, object] = {}
    order: list[Pattern] = []
    for p, b in rows:
        if p not in best:
            order.append(p)
            best[p] = b
        elif b < best[p]:
            best[p] = b
    kept = [(p, best[p]) for p in order]
    full = Octagon.from_constraints(n, kept)
    if full.bottom:
        return kept
    i = 0
    while i < len(kept):
        rest = kept[:i] + kept[i + 1:]
        o = Octagon.from_constraints(n, rest)
        if o == full:
            kept = rest
        else:
            i += 1
    return kept
