"""Optimal template guards by bitwise range refinement.

For each pattern the solver is asked to push the pattern value up one bit
at a time, most significant first; every answer fixes one bit of the
optimum. The number of queries is therefore the bit-width of the value
being maximised, whatever the bound turns out to be.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .encoder import encode_linear, read_vec
from .octdom import NEG_INF, drop_redundant, interval_patterns, octagon_patterns
from .sat import Session
from .synth_modes import Context


class GuardError(RuntimeError):
    """A pattern had no model although its mode was reported feasible."""


@dataclass
class TemplateSet:
    """Coefficient patterns over an ordered list of registers."""

    regs: tuple[int, ...]
    patterns: list[tuple[int, ...]]
    kind: str = "octagon"

    @classmethod
    def octagon(cls, regs) -> "TemplateSet":
        regs = tuple(regs)
        return cls(regs, octagon_patterns(len(regs)), "octagon")

    @classmethod
    def interval(cls, regs) -> "TemplateSet":
        regs = tuple(regs)
        return cls(regs, interval_patterns(len(regs)), "interval")

    @classmethod
    def custom(cls, regs, patterns) -> "TemplateSet":
        pats = []
        for p in patterns:
            p = tuple(int(c) for c in p)
            if len(p) != len(regs) or not any(p):
                raise ValueError(f"bad pattern {p}")
            if p not in pats:
                pats.append(p)
        return cls(tuple(regs), pats, "custom")

    @classmethod
    def make(cls, kind: str, regs) -> "TemplateSet":
        if kind == "octagon":
            return cls.octagon(regs)
        if kind == "interval":
            return cls.interval(regs)
        raise ValueError(f"unknown template family {kind!r}")

    def coeffs(self, p) -> dict[int, int]:
        return {r: c for r, c in zip(self.regs, p) if c}


def max_linear(sess: Session, d: list[int], base: list[int]):
    """Largest signed value of vector ``d`` over models of ``base``.

    Issues exactly ``len(d)`` queries: a sign probe, then one per remaining
    bit from the top. Returns ``(value, model)``, with ``value = -inf`` and
    ``model = None`` when ``base`` is unsatisfiable.
    """
    k = len(d)
    fixed: list[int] = []
    witness = None
    if sess.solve(base + [-d[k - 1]]):
        value = 0
        fixed.append(-d[k - 1])
        witness = sess.model()
    else:
        value = -(1 << (k - 1))
        fixed.append(d[k - 1])
    for i in range(k - 2, -1, -1):
        if sess.solve(base + fixed + [d[i]]):
            value += 1 << i
            fixed.append(d[i])
            witness = sess.model()
        else:
            fixed.append(-d[i])
    if witness is None:
        return NEG_INF, None
    return value, witness


def max_unsigned(sess: Session, v: list[int], base: list[int], minimize: bool = False):
    """Largest (or smallest) unsigned value of ``v``; one query per bit.

    Assumes ``base`` is satisfiable. Returns ``(value, model-or-None)``.
    """
    fixed: list[int] = []
    value = 0
    witness = None
    for i in range(len(v) - 1, -1, -1):
        probe = -v[i] if minimize else v[i]
        if sess.solve(base + fixed + [probe]):
            fixed.append(probe)
            witness = sess.model()
            if not minimize:
                value |= 1 << i
        else:
            fixed.append(-probe)
            if minimize:
                value |= 1 << i
    return value, witness


@dataclass
class Guard:
    patterns: list[tuple[int, ...]]
    bounds: list
    witnesses: list = field(default_factory=list, compare=False)

    def rows(self):
        return list(zip(self.patterns, self.bounds))

    def reduced(self):
        return drop_redundant(len(self.patterns[0]) if self.patterns else 0, self.rows())


def pattern_vector(ctx: Context, tmpl: TemplateSet, p, primed: bool = False) -> tuple[list[int], bool]:
    """Circuit for pattern ``p`` over the block's registers.

    Returns ``(vector, signed)``. A lone unsigned register is returned as
    is, so that unsigned range refinement can probe its ``w`` bits.
    """
    enc = ctx.enc
    signed = ctx.block.signed
    src = enc.outputs if primed else enc.inputs
    used = [(r, c) for r, c in zip(tmpl.regs, p) if c]
    if not signed and len(used) == 1 and abs(used[0][1]) == 1:
        return src[used[0][0]], False
    return encode_linear(ctx.cnf, [(c, src[r], signed) for r, c in used]), True


def bound_pattern(ctx: Context, sess: Session, tmpl: TemplateSet, p, base: list[int], primed: bool = False):
    """Least upper bound of pattern ``p`` under ``base`` plus a witness model."""
    vec, signed = pattern_vector(ctx, tmpl, p, primed)
    if signed:
        return max_linear(sess, vec, base)
    coef = next(c for c in p if c)
    if coef > 0:
        return max_unsigned(sess, vec, base)
    val, wit = max_unsigned(sess, vec, base, minimize=True)
    return -val, wit


def synth_guard(ctx: Context, modes: str, tmpl: TemplateSet) -> Guard:
    sess = ctx.session("guards")
    base = ctx.mode_lits(modes)
    bounds, wits = [], []
    for p in tmpl.patterns:
        b, model = bound_pattern(ctx, sess, tmpl, p, base)
        if b == NEG_INF:
            raise GuardError(f"mode {modes!r} has no model for pattern {p}")
        bounds.append(b)
        wits.append(_inputs_of(ctx, model) if model is not None else None)
    return Guard(list(tmpl.patterns), bounds, wits)


def _inputs_of(ctx: Context, model) -> dict[int, int]:
    val = model.value
    out = {r: read_vec(val, ctx.enc.inputs[r], ctx.block.signed) for r in ctx.block.state}
    if ctx.enc.carry_in is not None:
        out["C"] = int(val(ctx.enc.carry_in))
    return out
