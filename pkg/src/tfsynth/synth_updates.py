"""Update synthesis: how output template constants follow input constants.

Input constants ``d_k`` are the bounds of the input templates (over the
block's live-in registers); output constants ``d'_j`` are the bounds of the
output templates (over the output registers). Each update row gives one
``d'_j`` as an expression over the ``d_k``.

Strategies, from most to least precise:

* ``exact_symbolic_update``: affine hull of maximal models over the
  constant vectors; exact whenever an affine relation exists.
* ``relational_ineq_update``: ``d'_j <= d_k + c_k`` for every input
  pattern, evaluated as a minimum.
* ``bound_update``: a constant bound on ``d'_j``.
* lifting of the input/output affine relation (interval and "medium"
  octagon updates), optionally with product monomials.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from . import encoder as E
from .affine import AffineSpace, OutputEquation, solve_for_outputs
from .encoder import encode_linear, encode_monomial, fix_literals, read_vec
from .octdom import NEG_INF, _cell
from .synth_guards import Guard, TemplateSet, max_linear, synth_guard
from .synth_modes import Context, feasible_modes


class UpdateError(RuntimeError):
    pass


# -- rows ------------------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    """``const + sum coeffs[k] * d_k + sum coef * max|min(corners(mono))``."""

    const: Fraction = Fraction(0)
    coeffs: tuple[tuple[int, Fraction], ...] = ()
    aggs: tuple[tuple[Fraction, str, tuple[int, ...]], ...] = ()

    def __add__(self, other: "Expr") -> "Expr":
        c = dict(self.coeffs)
        for k, v in other.coeffs:
            c[k] = c.get(k, 0) + v
        aggs = list(self.aggs) + list(other.aggs)
        return Expr(self.const + other.const, _norm(c), tuple(aggs))

    def scale(self, f: Fraction) -> "Expr":
        return Expr(
            self.const * f,
            tuple((k, v * f) for k, v in self.coeffs),
            tuple((a * f, op, m) for a, op, m in self.aggs),
        )


def _norm(c: dict) -> tuple[tuple[int, Fraction], ...]:
    return tuple(sorted((k, Fraction(v)) for k, v in c.items() if v))


AFFINE, CONST, MINEXPR, NONLINEAR = "AFFINE", "CONST", "MINEXPR", "NONLINEAR"


@dataclass(frozen=True)
class UpdateRow:
    """Update of output constant ``target``.

    ``cands`` holds ``(divisor, Expr)`` pairs; the value is the minimum of
    ``floor(expr / divisor)`` over the candidates.
    """

    target: int
    kind: str
    cands: tuple[tuple[int, Expr], ...]

    @classmethod
    def affine(cls, target: int, expr: Expr) -> "UpdateRow":
        return cls(target, AFFINE, ((1, expr),))

    @classmethod
    def const(cls, target: int, value: int) -> "UpdateRow":
        return cls(target, CONST, ((1, Expr(Fraction(value))),))

    @classmethod
    def nonlinear(cls, target: int, expr: Expr) -> "UpdateRow":
        return cls(target, NONLINEAR, ((1, expr),))


# -- affine relations between registers --------------------------------------


def hull_columns(ctx: Context, monomials: Sequence[tuple[int, ...]] = ()):
    """Vectors (and signedness) in hull column order: outputs, inputs, monomials."""
    enc, b = ctx.enc, ctx.block
    cols = [(enc.outputs[r], b.signed) for r in b.outs]
    cols += [(enc.inputs[r], b.signed) for r in b.state]
    for mono in monomials:
        cols.append((encode_monomial(ctx.cnf, [enc.inputs[r] for r in mono], b.signed), True))
    return cols


def _violation(ctx: Context, space: AffineSpace, cols) -> int:
    rows = []
    for eq in space.constraints():
        terms = [(a, cols[i][0], cols[i][1]) for i, a in enumerate(eq.coeffs) if a]
        rows.append((terms, -eq.const))
    return E.encode_row_violation(ctx.cnf, rows)


def affine_io(ctx: Context, modes: str, monomials: Sequence[tuple[int, ...]] = ()) -> AffineSpace:
    """Affine hull of all (outputs, inputs, monomial values) models of a mode."""
    cols = hull_columns(ctx, monomials)
    sess = ctx.session("affine")
    sess.watch(l for v, _ in cols for l in v)
    base = ctx.mode_lits(modes)
    space = AffineSpace.empty(len(cols))
    while True:
        extra = [] if space.is_empty else [_violation(ctx, space, cols)]
        if extra == [E.FALSE]:
            break
        if not sess.solve(base + extra):
            break
        pt = [read_vec(sess.value, v, s) for v, s in cols]
        space = space.add_point(pt)
    return space


def nonlinear_affine_io(ctx: Context, modes: str, monomials: Sequence[tuple[int, ...]]) -> AffineSpace:
    return affine_io(ctx, modes, monomials)


def solved_equations(ctx: Context, space: AffineSpace):
    if space.is_empty:
        return [], []
    return solve_for_outputs(space.constraints(), len(ctx.block.outs))


# -- lifting -----------------------------------------------------------------


def _unary_index(tmpl: TemplateSet, reg: int, sign: int) -> int:
    p = tuple(sign if r == reg else 0 for r in tmpl.regs)
    return tmpl.patterns.index(p)


def lift_equation(ctx: Context, eq: OutputEquation, tin: TemplateSet,
                  monomials: Sequence[tuple[int, ...]] = ()) -> tuple[Expr, Expr]:
    """Upper and lower bound expressions for one solved output equation.

    Returns ``(up, down)`` with ``v' <= up`` and ``-v' <= down``, both
    written over input constants: ``v_u = d(+v)`` and ``v_l = -d(-v)``.
    """
    n_out = len(ctx.block.outs)
    n_in = len(ctx.block.state)
    lam = Fraction(eq.lam)
    up: dict[int, Fraction] = {}
    down: dict[int, Fraction] = {}
    up_aggs, down_aggs = [], []
    for col, c in eq.coeffs:
        if col < n_out + n_in:
            reg = ctx.block.state[col - n_out]
            kp, km = _unary_index(tin, reg, 1), _unary_index(tin, reg, -1)
            if c > 0:
                up[kp] = up.get(kp, 0) + c
                down[km] = down.get(km, 0) + c
            else:
                up[km] = up.get(km, 0) - c
                down[kp] = down.get(kp, 0) - c
        else:
            mono = tuple(monomials[col - n_out - n_in])
            if c > 0:
                up_aggs.append((Fraction(c), "max", mono))
                down_aggs.append((Fraction(-c), "min", mono))
            else:
                up_aggs.append((Fraction(c), "min", mono))
                down_aggs.append((Fraction(-c), "max", mono))
    e_up = Expr(Fraction(eq.const), _norm(up), tuple(up_aggs)).scale(1 / lam)
    e_down = Expr(Fraction(-eq.const), _norm(down), tuple(down_aggs)).scale(1 / lam)
    return e_up, e_down


def lift_unary_rows(ctx: Context, eqs, tin: TemplateSet, monomials=()) -> dict[tuple[int, int], Expr]:
    """Map ``(output register, sign)`` to its lifted bound expression."""
    out = {}
    for eq in eqs:
        reg = ctx.block.outs[eq.target]
        up, down = lift_equation(ctx, eq, tin, monomials)
        out[(reg, 1)] = up
        out[(reg, -1)] = down
    return out


def lift_interval(ctx: Context, eqs, tin: TemplateSet, tout: TemplateSet, monomials=()) -> list[UpdateRow]:
    unary = lift_unary_rows(ctx, eqs, tin, monomials)
    rows = []
    for j, p in enumerate(tout.patterns):
        nz = [(r, c) for r, c in zip(tout.regs, p) if c]
        if len(nz) == 1 and (nz[0][0], nz[0][1]) in unary:
            e = unary[(nz[0][0], nz[0][1])]
            rows.append(UpdateRow(j, NONLINEAR if e.aggs else AFFINE, ((1, e),)))
    return rows


def lift_octagon_medium(ctx: Context, eqs, tin: TemplateSet, tout: TemplateSet, monomials=()) -> list[UpdateRow]:
    """Unary rows lifted from the affine relation, binary rows as their sums."""
    unary = lift_unary_rows(ctx, eqs, tin, monomials)
    rows = []
    for j, p in enumerate(tout.patterns):
        nz = [(r, c) for r, c in zip(tout.regs, p) if c]
        if any(abs(c) != 1 for _, c in nz) or not all((r, c) in unary for r, c in nz):
            continue
        e = Expr()
        for r, c in nz:
            e = e + unary[(r, c)]
        rows.append(UpdateRow(j, NONLINEAR if e.aggs else AFFINE, ((1, e),)))
    return rows


# -- symbolic constants --------------------------------------------------------


class ConstantFrame:
    """Symbolic constant vectors ``D_k`` constrained like a closed input octagon.

    ``base`` is a list of assumption literals stating that every input
    pattern is bounded by its constant, that the constants form a tightly
    closed octagon no larger than the guard, and that the mode holds.
    """

    def __init__(self, ctx: Context, modes: str, tin: TemplateSet, guard: Guard | None) -> None:
        self.ctx = ctx
        self.tin = tin
        # the constant vectors and closure circuit do not depend on the mode
        shared = getattr(ctx, "_frames", None)
        if shared is None:
            shared = ctx._frames = {}
        key = (tin.regs, tuple(tin.patterns))
        if key not in shared:
            shared[key] = self._build()
        self.D, core = shared[key]
        lits = list(ctx.mode_lits(modes)) + core
        if guard is not None:
            gb = dict(zip(guard.patterns, guard.bounds))
            for k, p in enumerate(tin.patterns):
                b = gb.get(p)
                if b is not None and b != float("inf"):
                    d = self.D[k]
                    diff = encode_linear(ctx.cnf, [(1, d, True)], -int(b))
                    lits.append(ctx.cnf.or2(diff[-1], ctx.cnf.is_zero(diff)))
        self.base = lits

    def _build(self):
        cnf = self.ctx.cnf
        enc = self.ctx.enc
        signed = self.ctx.block.signed
        self.D = []
        core = []
        for p in self.tin.patterns:
            terms = [(c, enc.inputs[r], signed) for r, c in zip(self.tin.regs, p) if c]
            width = E.linear_width([(c, len(v), s) for c, v, s in terms])
            d = cnf.new_vec(width)
            self.D.append(d)
            core.append(E.le_literal(cnf, terms, [(1, d, True)]))
        if self.tin.kind in ("octagon", "interval"):
            core += self._closure_lits()
        return self.D, core

    def _closure_lits(self) -> list[int]:
        """Tight-closure conditions on the DBM spelled out by the ``D_k``."""
        n = len(self.tin.regs)
        size = 2 * n
        cell: dict[tuple[int, int], tuple[int, int]] = {}
        for k, p in enumerate(self.tin.patterns):
            a, b, f = _cell(p)
            cell[(a, b)] = (k, f)
            cell[(b ^ 1, a ^ 1)] = (k, f)

        def term(a, b, scale=1):
            k, f = cell[(a, b)]
            return (f * scale, self.D[k], True)

        cnf = self.ctx.cnf
        lits = []
        have = lambda a, b: (a, b) in cell
        nodes = range(size)
        for i in nodes:
            for j in nodes:
                if i == j or not have(i, j):
                    continue
                for k in nodes:
                    if k in (i, j) or not (have(i, k) and have(k, j)):
                        continue
                    lits.append(E.le_literal(cnf, [term(i, j)], [term(i, k), term(k, j)]))
                if i != j ^ 1 and have(i, i ^ 1) and have(j ^ 1, j):
                    lits.append(E.le_literal(cnf, [term(i, j, 2)], [term(i, i ^ 1), term(j ^ 1, j)]))
                if i < j and have(j, i):
                    lits.append(E.le_literal(cnf, [], [term(i, j), term(j, i)]))
        return lits


def _read_D(sess, frame: ConstantFrame) -> list[int]:
    return [read_vec(sess.value, d, True) for d in frame.D]


def exact_symbolic_update(ctx: Context, frame: ConstantFrame, tout: TemplateSet, j: int,
                          sess=None) -> UpdateRow | None:
    """Affine row ``d'_j = f(d_1..d_m)`` if one exists, else ``None``.

    Maximal models (inputs bounded by pinned constants, output pattern
    pushed to its maximum) are joined in the space over ``(d'_j, D)``. A
    new model is sought that either leaves the current constant-only
    relations, or beats the current candidate row strictly. When none
    exists, the candidate row is an exact update by construction.
    """
    cnf = ctx.cnf
    enc = ctx.enc
    signed = ctx.block.signed
    sess = sess or ctx.session("exact")
    p = tout.patterns[j]
    y = encode_linear(cnf, [(c, enc.outputs[r], signed) for r, c in zip(tout.regs, p) if c])
    m = len(frame.D)
    space = AffineSpace.empty(m + 1)
    cols = [(y, True)] + [(d, True) for d in frame.D]
    while True:
        row = None
        if space.is_empty:
            query = []
        else:
            eqs = space.constraints()
            d_only = [e for e in eqs if e.coeffs[0] == 0]
            lead = [e for e in eqs if e.coeffs[0] != 0]
            if not lead and not d_only:
                return None
            parts = []
            if d_only:
                parts.append(E.encode_row_violation(cnf, [
                    ([(a, cols[i][0], True) for i, a in enumerate(e.coeffs) if a], -e.const) for e in d_only
                ]))
            if lead:
                row = lead[0]
                terms = [(a, cols[i][0], True) for i, a in enumerate(row.coeffs) if a]
                parts.append(E.row_literal(cnf, terms, -row.const, strict=True))
            query = [cnf.or_n(parts)]
        if query == [E.FALSE] or not sess.solve(frame.base + query):
            break
        dvals = _read_D(sess, frame)
        pins = [l for d, v in zip(frame.D, dvals) for l in fix_literals(d, v)]
        best, _ = max_linear(sess, y, frame.base + pins)
        if best == NEG_INF:  # pragma: no cover - the pinned model exists
            raise UpdateError("pinned constants lost their model")
        space = space.add_point([best] + dvals)
    if space.is_empty:
        return None
    lead = [e for e in space.constraints() if e.coeffs[0] != 0]
    if not lead:
        return None
    e = lead[0]
    a0 = Fraction(e.coeffs[0])
    coeffs = {k - 1: Fraction(-a, 1) / a0 for k, a in enumerate(e.coeffs) if k and a}
    expr = Expr(Fraction(e.const) / a0, _norm(coeffs))
    if not expr.coeffs:
        return UpdateRow(j, CONST, ((1, expr),))
    return UpdateRow.affine(j, expr)


def bound_update(ctx: Context, modes: str, tout: TemplateSet, j: int, sess=None) -> UpdateRow | None:
    enc = ctx.enc
    signed = ctx.block.signed
    sess = sess or ctx.session("bound")
    p = tout.patterns[j]
    y = encode_linear(ctx.cnf, [(c, enc.outputs[r], signed) for r, c in zip(tout.regs, p) if c])
    best, _ = max_linear(sess, y, ctx.mode_lits(modes))
    if best == NEG_INF:
        raise UpdateError(f"mode {modes!r} is infeasible")
    return UpdateRow.const(j, best)


def relational_ineq_update(ctx: Context, modes: str, tin: TemplateSet, tout: TemplateSet, j: int,
                           guard: Guard | None = None, const: int | None = None, sess=None) -> UpdateRow:
    """``d'_j <= min(d_k + c_k, const)`` over all input patterns ``k``.

    ``c_k`` is the maximum of ``out_j - in_k``. A candidate is dropped when
    even the smallest possible ``d_k`` (read off the guard) cannot beat the
    constant bound.
    """
    enc = ctx.enc
    signed = ctx.block.signed
    sess = sess or ctx.session("relational")
    base = ctx.mode_lits(modes)
    pj = tout.patterns[j]
    out_terms = [(c, enc.outputs[r], signed) for r, c in zip(tout.regs, pj) if c]
    if const is None:
        row = bound_update(ctx, modes, tout, j, sess)
        const = int(row.cands[0][1].const)
    gb = dict(zip(guard.patterns, guard.bounds)) if guard is not None else {}
    cands = []
    for k, pk in enumerate(tin.patterns):
        in_terms = [(-c, enc.inputs[r], signed) for r, c in zip(tin.regs, pk) if c]
        y = encode_linear(ctx.cnf, out_terms + in_terms)
        ck, _ = max_linear(sess, y, base)
        if ck == NEG_INF:
            raise UpdateError(f"mode {modes!r} is infeasible")
        neg = tuple(-c for c in pk)
        if neg in gb and ck - gb[neg] >= const:
            continue
        cands.append((1, Expr(Fraction(ck), ((k, Fraction(1)),))))
    cands.append((1, Expr(Fraction(const))))
    return UpdateRow(j, MINEXPR, tuple(cands))


# -- nonlinear octagon rows ---------------------------------------------------


def nonlinear_octagon_rows(ctx: Context, eqs, tin: TemplateSet, tout: TemplateSet, monomials) -> dict[int, UpdateRow]:
    """Rows for output patterns touching a register whose relation has monomials.

    Unary rows are the interval liftings with corner aggregates over the
    input constants; binary rows add two unary rows.
    """
    unary = lift_unary_rows(ctx, eqs, tin, monomials)
    nl_regs = {r for (r, _), e in unary.items() if e.aggs}
    rows = {}
    for j, p in enumerate(tout.patterns):
        nz = [(r, c) for r, c in zip(tout.regs, p) if c]
        if not any(r in nl_regs for r, _ in nz):
            continue
        if not all((r, c) in unary for r, c in nz):
            continue
        e = Expr()
        for r, c in nz:
            e = e + unary[(r, c)]
        rows[j] = UpdateRow.nonlinear(j, e)
    return rows


# -- assembly --------------------------------------------------------------------


@dataclass
class Config:
    domain: str = "octagon"
    guards: str | None = None
    strategy: str = "ladder"
    monomials: tuple[tuple[int, ...], ...] = ()

    def guard_kind(self) -> str:
        return self.guards or self.domain


STRATEGIES = ("ladder", "exact", "relational", "const", "medium", "lift")


@dataclass
class Pair:
    modes: str
    guard: Guard
    rows: list[UpdateRow]


@dataclass
class TransferFunction:
    block_source: str
    name: str
    width: int
    signed: bool
    inputs: tuple[int, ...]
    outs: tuple[int, ...]
    guard_templates: TemplateSet
    in_templates: TemplateSet
    out_templates: TemplateSet
    monomials: tuple[tuple[int, ...], ...]
    domain: str
    pairs: list[Pair]
    stats: dict = field(default_factory=dict, compare=False)


def default_monomials(live_in) -> tuple[tuple[int, ...], ...]:
    return tuple(combinations(live_in, 2))


def update_rows(ctx: Context, modes: str, guard: Guard, cfg: Config,
                tin: TemplateSet, tout: TemplateSet) -> list[UpdateRow]:
    strategy = cfg.strategy
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    rows: dict[int, UpdateRow] = {}
    if cfg.domain == "interval" or strategy in ("medium", "lift") or cfg.monomials:
        space = affine_io(ctx, modes, cfg.monomials)
        eqs, _ = solved_equations(ctx, space)
        if cfg.domain == "interval":
            lifted = lift_interval(ctx, eqs, tin, tout, cfg.monomials)
            rows.update((r.target, r) for r in lifted)
        elif cfg.monomials:
            rows.update(nonlinear_octagon_rows(ctx, eqs, tin, tout, cfg.monomials))
        else:
            rows.update((r.target, r) for r in lift_octagon_medium(ctx, eqs, tin, tout))
        if cfg.domain == "interval" or strategy in ("medium", "lift"):
            for j in range(len(tout.patterns)):
                if j not in rows:
                    r = bound_update(ctx, modes, tout, j)
                    if r is not None:
                        rows[j] = r
            return [rows[j] for j in sorted(rows)]
    pending = [j for j in range(len(tout.patterns)) if j not in rows]
    exact: dict[int, UpdateRow] = {}
    if strategy in ("ladder", "exact") and pending:
        frame = ConstantFrame(ctx, modes, tin, guard)
        sess = ctx.fresh_session("exact")
        for j in pending:
            r = exact_symbolic_update(ctx, frame, tout, j, sess)
            if r is not None:
                exact[j] = r
    if strategy == "exact":
        rows.update(exact)
    elif strategy in ("ladder", "relational"):
        # an affine row is only guaranteed optimal when an exact affine update
        # exists, so it competes with the relational candidates
        sess = ctx.fresh_session("relational")
        for j in pending:
            e = exact.get(j)
            if e is not None and e.kind == CONST:
                rel = relational_ineq_update(ctx, modes, tin, tout, j, guard,
                                             const=int(e.cands[0][1].const), sess=sess)
            else:
                rel = relational_ineq_update(ctx, modes, tin, tout, j, guard, sess=sess)
            cands = list(rel.cands)
            if e is not None and e.kind != CONST and e.cands[0] not in cands:
                cands.insert(0, e.cands[0])
            rows[j] = UpdateRow(j, CONST, tuple(cands)) if len(cands) == 1 else UpdateRow(j, MINEXPR, tuple(cands))
    pending = [j for j in range(len(tout.patterns)) if j not in rows]
    if strategy in ("const", "exact") and pending:
        sess = ctx.session("bound")
        for j in pending:
            rows[j] = bound_update(ctx, modes, tout, j, sess)
    return [rows[j] for j in sorted(rows)]


def synthesize(block, cfg: Config | None = None, ctx: Context | None = None) -> TransferFunction:
    cfg = cfg or Config()
    ctx = ctx or Context(block)
    b = ctx.block
    tg = TemplateSet.make(cfg.guard_kind(), b.state)
    tin = TemplateSet.make(cfg.domain, b.state)
    tout = TemplateSet.make(cfg.domain, b.outs)
    pairs = []
    for modes in feasible_modes(ctx):
        guard = synth_guard(ctx, modes, tg)
        # the constant frame needs bounds for every input pattern
        gfull = guard if tg.patterns == tin.patterns else synth_guard(ctx, modes, tin)
        rows = update_rows(ctx, modes, gfull, cfg, tin, tout)
        pairs.append(Pair(modes, guard, rows))
    return TransferFunction(
        block_source=b.source(), name=b.name, width=b.width, signed=b.signed,
        inputs=b.state, outs=b.outs, guard_templates=tg, in_templates=tin,
        out_templates=tout, monomials=tuple(cfg.monomials), domain=cfg.domain,
        pairs=pairs, stats=ctx.counter.as_dict(),
    )
