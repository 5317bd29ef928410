"""Brute-force ground truth at small widths.

Every input valuation is enumerated at once with numpy, so the semantics
here are written independently of the bit-level encoder and of
``isa.step``: modes are classified from ideal integer results.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .affine import AffineSpace
from .isa import Block
from .octdom import INF, NEG_INF, Octagon, octagon_patterns

MAX_POINTS = 1 << 22


class EnumerationTooLarge(RuntimeError):
    pass


# -- semantics -----------------------------------------------------------------

_SIGNED_ALPHA = {"ADD": "OUPN", "SBC": "OUPN", "NEG": "OUPN", "MUL": "OUPN", "INC": "OPN"}
_UNSIGNED_ALPHA = {"ADD": "OE", "INC": "OE", "LSL": "OE", "MUL": "OE", "SBC": "UE", "NEG": "UE"}


def alphabet(op: str, signed: bool, lsl_signed: bool) -> str:
    if op in ("MOV", "EOR", "AND"):
        return "E"
    if op == "LSL":
        return "OUPN" if signed and lsl_signed else "OE"
    return (_SIGNED_ALPHA if signed else _UNSIGNED_ALPHA)[op]


@dataclass
class Enumeration:
    """All inputs of a block with their outputs and mode vectors."""

    block: Block
    inputs: np.ndarray   # (N, n_in) in the block's interpretation
    outputs: np.ndarray  # (N, n_out)
    modes: np.ndarray    # (N,) of str
    carry: np.ndarray | None = None


def _interp(u: np.ndarray, w: int, signed: bool) -> np.ndarray:
    if signed:
        return np.where(u >= (1 << (w - 1)), u - (1 << w), u)
    return u


def enumerate_block(block: Block) -> Enumeration:
    w = block.width
    signed = block.signed
    n_in = len(block.state)
    total = (1 << (w * n_in)) * (2 if block.carry_in else 1)
    if total > MAX_POINTS:
        raise EnumerationTooLarge(f"{total} input valuations")
    mask = (1 << w) - 1
    axes = [np.arange(1 << w, dtype=np.int64) for _ in range(n_in)]
    if block.carry_in:
        axes = axes + [np.arange(2, dtype=np.int64)]
    if axes:
        grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    else:
        grid = np.zeros((1, 0), dtype=np.int64)
    N = grid.shape[0]
    regs = {r: np.zeros(N, dtype=np.int64) for r in range(8)}
    for i, r in enumerate(block.state):
        regs[r] = grid[:, i].copy()
    carry = grid[:, n_in].copy() if block.carry_in else np.zeros(N, dtype=np.int64)
    carry0 = carry.copy() if block.carry_in else None
    letters = []
    val = lambda u: _interp(u, w, signed)
    lo = -(1 << (w - 1)) if signed else 0
    hi = (1 << (w - 1)) - 1 if signed else mask
    for ins in block.instrs:
        d = regs[ins.dst]
        s = regs[ins.src] if ins.src is not None else (np.full(N, ins.imm & mask, dtype=np.int64) if ins.imm is not None else None)
        op = ins.op
        ideal = None
        if op == "ADD":
            raw = d + s
            res, carry, ideal = raw & mask, raw >> w, val(d) + val(s)
        elif op == "SBC":
            raw = d - s - carry
            res, ideal = raw & mask, val(d) - val(s) - carry
            carry = (raw < 0).astype(np.int64)
        elif op == "MOV":
            res = s.copy()
        elif op == "EOR":
            res = d ^ s
        elif op == "AND":
            res = d & s
        elif op == "LSL":
            res, carry = (d << 1) & mask, d >> (w - 1)
            ideal = 2 * val(d) if (signed and block.lsl_signed) else d << 1
        elif op == "NEG":
            res, carry, ideal = (-d) & mask, (d != 0).astype(np.int64), -val(d)
        elif op == "INC":
            res, ideal = (d + 1) & mask, val(d) + 1
        elif op == "MUL":
            res = (d * s) & mask
            ideal = np.array([int(a) * int(b) for a, b in zip(val(d), val(s))], dtype=object) if w > 31 else val(d) * val(s)
        else:  # pragma: no cover
            raise ValueError(op)
        alpha = alphabet(op, signed, block.lsl_signed)
        if len(alpha) > 1:
            if op == "LSL" and alpha == "OE":
                m = np.where(d >> (w - 1) == 1, "O", "E")
            else:
                exact = "E" if "E" in alpha else None
                inside = np.where(ideal >= 0, "P", "N") if exact is None else np.full(N, "E")
                m = np.where(ideal > hi, "O", np.where(ideal < lo, "U", inside))
            letters.append(m.astype(object))
        regs[ins.dst] = res
    if letters:
        modes = letters[0]
        for col in letters[1:]:
            modes = modes + col
    else:
        modes = np.full(N, "", dtype=object)
    inputs = np.stack([val(grid[:, i]) for i in range(n_in)], axis=1) if n_in else np.zeros((N, 0), dtype=np.int64)
    outputs = np.stack([val(regs[r]) for r in block.outs], axis=1) if block.outs else np.zeros((N, 0), dtype=np.int64)
    return Enumeration(block, inputs, outputs, np.asarray(modes, dtype=object), carry0)


# -- brute force queries ---------------------------------------------------------


def brute_modes(block: Block, enum: Enumeration | None = None) -> set[str]:
    enum = enum or enumerate_block(block)
    return set(np.unique(enum.modes).tolist())


def brute_guard_bounds(block: Block, mode: str, patterns, enum: Enumeration | None = None) -> list:
    enum = enum or enumerate_block(block)
    sel = enum.inputs[enum.modes == mode]
    if sel.shape[0] == 0:
        return [NEG_INF] * len(patterns)
    P = np.array(patterns, dtype=np.int64).reshape(len(patterns), -1)
    return [int(v) for v in (sel @ P.T).max(axis=0)]


def _points(enum: Enumeration, mode: str, monomials) -> np.ndarray:
    m = enum.modes == mode
    cols = [enum.outputs[m], enum.inputs[m]]
    live = list(enum.block.state)
    for mono in monomials:
        v = np.ones(int(m.sum()), dtype=np.int64)
        for r in mono:
            v = v * enum.inputs[m][:, live.index(r)]
        cols.append(v[:, None])
    pts = np.concatenate(cols, axis=1)
    return np.unique(pts, axis=0)


def _span_modp(diffs: np.ndarray, p: int = 2147483629) -> list[int]:
    """Indices of rows forming a basis of the row space (rank mod ``p``)."""
    A = diffs % p
    chosen = []
    basis = []  # (pivot col, normalized row)
    for _ in range(diffs.shape[1]):
        nz = np.nonzero(A.any(axis=1))[0]
        if nz.size == 0:
            break
        i = int(nz[0])
        row = A[i].copy()
        c = int(np.nonzero(row)[0][0])
        inv = pow(int(row[c]), p - 2, p)
        row = (row * inv) % p
        f = A[:, c].copy()
        A = (A - (f[:, None] * row[None, :]) % p) % p
        chosen.append(i)
        basis.append((c, row))
    return chosen


def _exact_nullspace(basis: list[list[int]], dim: int) -> list[list[Fraction]]:
    """Row echelon elimination over the rationals, then the null space."""
    m = [[Fraction(x) for x in r] for r in basis]
    piv = []
    r = 0
    for c in range(dim):
        k = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if k is None:
            continue
        m[r], m[k] = m[k], m[r]
        lead = m[r][c]
        m[r] = [x / lead for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        piv.append(c)
        r += 1
    null = []
    for f in (c for c in range(dim) if c not in piv):
        v = [Fraction(0)] * dim
        v[f] = Fraction(1)
        for row, pc in zip(m, piv):
            v[pc] = -row[f]
        null.append(v)
    return null


def brute_hull(block: Block, mode: str, monomials=(), enum: Enumeration | None = None) -> AffineSpace:
    """Affine hull of every (outputs, inputs, monomials) point of a mode."""
    enum = enum or enumerate_block(block)
    pts = _points(enum, mode, monomials)
    dim = pts.shape[1]
    if pts.shape[0] == 0:
        return AffineSpace.empty(dim)
    p0 = pts[0]
    diffs = pts - p0
    rows = [list(map(int, diffs[i])) for i in _span_modp(diffs)]
    # certify that the chosen directions span every point exactly
    for v in _exact_nullspace(rows, dim):
        den = 1
        for x in v:
            den = den * x.denominator // np.gcd(den, x.denominator)
        coeffs = np.array([int(x * den) for x in v], dtype=object)
        if np.any(diffs.astype(object) @ coeffs != 0):
            rows = [list(map(int, r)) for r in diffs]  # pragma: no cover - modular rank deficit
            break
    return AffineSpace(dim, list(map(int, p0)), rows)


# -- random octagons ----------------------------------------------------------------


def random_octagon(n: int, width: int, signed: bool, rng: random.Random, p_inf: float = 0.25) -> Octagon:
    """Closed octagon around a random representable point."""
    lo = -(1 << (width - 1)) if signed else 0
    hi = (1 << (width - 1)) - 1 if signed else (1 << width) - 1
    span = hi - lo
    c = [rng.randint(lo, hi) for _ in range(n)]
    cons = []
    for p in octagon_patterns(n):
        if rng.random() < p_inf:
            continue
        slack = rng.choice([0, rng.randint(0, 3), rng.randint(0, span // 4 + 1), rng.randint(0, span)])
        cons.append((p, sum(a * x for a, x in zip(p, c)) + slack))
    return Octagon.from_constraints(n, cons)


def _inside(oct_: Octagon, pts: np.ndarray) -> np.ndarray:
    ok = np.ones(pts.shape[0], dtype=bool)
    if oct_.bottom:
        return ~ok
    for p, b in oct_.constraints():
        if b == INF:
            continue
        ok &= pts @ np.array(p, dtype=np.int64) <= b
    return ok


# -- end-to-end check ---------------------------------------------------------------


@dataclass
class Report:
    block: str
    width: int
    samples: int
    seed: int
    violations: list = field(default_factory=list)
    guard_mismatches: list = field(default_factory=list)
    mode_mismatch: dict | None = None
    gap_total: int = 0
    gap_count: int = 0
    exact_bounds: int = 0

    @property
    def clean(self) -> bool:
        return not (self.violations or self.guard_mismatches or self.mode_mismatch)

    def as_dict(self) -> dict:
        return {
            "block": self.block,
            "width": self.width,
            "samples": self.samples,
            "seed": self.seed,
            "clean": self.clean,
            "violations": self.violations[:20],
            "violation_count": len(self.violations),
            "guard_mismatches": self.guard_mismatches[:20],
            "mode_mismatch": self.mode_mismatch,
            "bounds_checked": self.gap_count,
            "bounds_exact": self.exact_bounds,
            "mean_gap": (self.gap_total / self.gap_count) if self.gap_count else 0.0,
        }


def check_tf(tf, block: Block, samples: int = 1000, seed: int = 0, enum: Enumeration | None = None) -> Report:
    """Soundness of ``apply_tf`` on random input octagons, plus guard optimality."""
    from .eval import apply_tf

    enum = enum or enumerate_block(block)
    rep = Report(block.name, block.width, samples, seed)
    modes = brute_modes(block, enum)
    got = {p.modes for p in tf.pairs}
    if got != modes:
        rep.mode_mismatch = {"missing": sorted(modes - got), "extra": sorted(got - modes)}
    for pair in tf.pairs:
        if pair.modes not in modes:
            continue
        want = brute_guard_bounds(block, pair.modes, pair.guard.patterns, enum)
        for p, b, t in zip(pair.guard.patterns, pair.guard.bounds, want):
            if b != t:
                rep.guard_mismatches.append({"modes": pair.modes, "pattern": list(p), "got": str(b), "want": str(t)})
    n_in, n_out = len(block.state), len(block.outs)
    out_pats = octagon_patterns(n_out)
    P = np.array(out_pats, dtype=np.int64).reshape(len(out_pats), n_out)
    rng = random.Random(seed)
    for s in range(samples):
        inp = random_octagon(n_in, block.width, block.signed, rng)
        sel = _inside(inp, enum.inputs)
        res, _ = apply_tf(tf, inp)
        image = enum.outputs[sel]
        if image.shape[0] == 0:
            continue
        if res.bottom:
            rep.violations.append({"sample": s, "input": repr(inp), "output": "BOTTOM"})
            continue
        best = (image @ P.T).max(axis=0) if n_out else []
        for p, t in zip(out_pats, best):
            b = res.bound_of(p)
            if t > b:
                rep.violations.append({"sample": s, "input": repr(inp), "pattern": list(p), "bound": str(b), "image_max": int(t)})
            elif b != INF:
                rep.gap_total += int(b - t)
                rep.gap_count += 1
                rep.exact_bounds += int(b == t)
    return rep
