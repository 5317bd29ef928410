"""Applying a synthesized transfer function to an input octagon."""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from math import floor

from .octdom import INF, Octagon, is_octagonal
from .synth_updates import Expr, Pair, TransferFunction, UpdateRow


class Inapplicable(Exception):
    """The input does not meet the guard of a pair."""


def value_range(width: int, signed: bool) -> tuple[int, int]:
    if signed:
        return -(1 << (width - 1)), (1 << (width - 1)) - 1
    return 0, (1 << width) - 1


def _corners(mono, box):
    """Values of a product at every corner of the box, or ``None`` if unbounded."""
    ivs = [box[r] for r in mono]
    if any(lo == -INF or hi == INF for lo, hi in ivs):
        return None
    vals = []
    for pick in product(*ivs):
        v = 1
        for x in pick:
            v *= x
        vals.append(v)
    return vals


def eval_expr(e: Expr, d: list, box: dict) -> Fraction | float:
    """Value of ``e`` under constants ``d``; ``INF`` if any used input is unbounded."""
    acc = Fraction(e.const)
    for k, c in e.coeffs:
        if d[k] == INF:
            return INF
        acc += c * d[k]
    for c, op, mono in e.aggs:
        vals = _corners(mono, box)
        if vals is None:
            return INF
        acc += c * (max(vals) if op == "max" else min(vals))
    return acc


def eval_row(row: UpdateRow, d: list, box: dict):
    best = INF
    for div, e in row.cands:
        v = eval_expr(e, d, box)
        if v == INF:
            continue
        v = floor(Fraction(v) / div)
        if v < best:
            best = v
    return best


def apply_pair(tf: TransferFunction, pair: Pair, inp: Octagon) -> Octagon:
    """Output octagon of one guarded update; raises ``Inapplicable``."""
    n_in = len(tf.inputs)
    if inp.n != n_in:
        raise ValueError(f"input octagon has {inp.n} variables, block state has {n_in} registers")
    cur = inp.meet([(p, b) for p, b in zip(pair.guard.patterns, pair.guard.bounds)
                    if is_octagonal(p)])
    if cur.bottom:
        raise Inapplicable(pair.modes)
    d = cur.bounds(tf.in_templates.patterns)
    box = {r: cur.interval(i) for i, r in enumerate(tf.inputs)}
    n_out = len(tf.outs)
    cons = []
    for row in pair.rows:
        p = tf.out_templates.patterns[row.target]
        if not is_octagonal(p):
            continue
        cons.append((p, eval_row(row, d, box)))
    lo, hi = value_range(tf.width, tf.signed)
    for i in range(n_out):
        e = [0] * n_out
        e[i] = 1
        cons.append((tuple(e), hi))
        e[i] = -1
        cons.append((tuple(e), -lo))
    return Octagon.from_constraints(n_out, cons)


def apply_tf(tf: TransferFunction, inp: Octagon) -> tuple[Octagon, list[str]]:
    """Join of every applicable pair's output, with the modes that applied."""
    out = Octagon.bottom_of(len(tf.outs))
    used = []
    for pair in tf.pairs:
        try:
            o = apply_pair(tf, pair, inp)
        except Inapplicable:
            continue
        used.append(pair.modes)
        out = out.join(o)
    return out, used
