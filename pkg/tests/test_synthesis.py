import glob
import os
import random
from fractions import Fraction

import numpy as np
import pytest

from tfsynth import sat
from tfsynth.affine import AffineEquation
from tfsynth.eval import Inapplicable, apply_pair, apply_tf, eval_row
from tfsynth.isa import parse_block
from tfsynth.octdom import INF, Octagon, octagon_patterns
from tfsynth.oracle import (
    brute_guard_bounds, brute_hull, brute_modes, check_tf, enumerate_block, random_octagon,
)
from tfsynth.synth_guards import TemplateSet, max_linear, synth_guard
from tfsynth.synth_modes import Context, feasible_modes, flat_modes
from tfsynth.synth_updates import (
    CONST, MINEXPR, Config, Expr, UpdateRow, affine_io, synthesize,
)

CORPUS = sorted(glob.glob(os.path.join(os.path.dirname(__file__), "..", "src", "tfsynth", "corpus", "*.asm")))
FIG1 = ".out R0 R1\nADD R0 R1\nMOV R2 R0\nEOR R2 R1\nLSL R2\nSBC R2 R2\nADD R0 R2\nEOR R0 R2\n"


def corpus_block(path, width):
    with open(path) as fh:
        return parse_block(fh.read(), width=width, name=os.path.basename(path))


@pytest.mark.parametrize("path", CORPUS, ids=os.path.basename)
def test_tree_search_matches_flat_and_brute_force(path):
    b = corpus_block(path, 4)
    ctx = Context(b)
    tree = feasible_modes(ctx)
    assert sorted(tree) == sorted(flat_modes(ctx))
    assert set(tree) == brute_modes(b)


def test_empty_block_has_one_mode():
    b = parse_block("")
    assert feasible_modes(Context(b)) == [""]
    assert brute_modes(b) == {""}


def test_max_linear_query_count():
    b = parse_block(FIG1, width=8)
    ctx = Context(b)
    tmpl = TemplateSet.octagon(b.state)
    before = ctx.counter.total()
    g = synth_guard(ctx, "PEPP", tmpl)
    # 2 unary patterns over 8-bit signed values cost w+2 queries, binary ones w+1 ... per width of the sum
    assert ctx.counter.total() - before == 4 * 10 + 4 * 9
    en = enumerate_block(b)
    assert g.bounds == brute_guard_bounds(b, "PEPP", tmpl.patterns, en)


def test_max_linear_unsat_base():
    b = parse_block("ADD R0 R1", width=4)
    ctx = Context(b)
    sess = ctx.session("t")
    lits = ctx.mode_lits("O")
    value, model = max_linear(sess, ctx.enc.inputs[0], lits + [-l for l in lits])
    assert value == float("-inf") and model is None


@pytest.mark.parametrize("signed", [True, False])
def test_guards_optimal_small_width(signed):
    b = parse_block("INC R0\nADD R0 R1", width=5, signed=signed)
    ctx = Context(b)
    en = enumerate_block(b)
    tmpl = TemplateSet.octagon(b.state)
    for m in feasible_modes(ctx):
        assert synth_guard(ctx, m, tmpl).bounds == brute_guard_bounds(b, m, tmpl.patterns, en)


def test_swap_hull():
    for w in (4, 12):
        b = parse_block("MOV R2 R0\nMOV R0 R1\nMOV R1 R2\n.out R0 R1", width=w)
        sp = affine_io(Context(b), "")
        eqs = set(sp.constraints())
        # columns: R0', R1', R0, R1
        assert eqs == {AffineEquation((1, 0, 0, -1), 0), AffineEquation((0, 1, -1, 0), 0)}


def test_muladd_hull_with_monomial():
    b = parse_block("MUL R0 R2\nADD R0 R1\n.out R0", width=5)
    ctx = Context(b)
    en = enumerate_block(b)
    for m in ("PP", "NN", "PN"):
        got = affine_io(ctx, m, ((0, 2),))
        assert got == brute_hull(b, m, ((0, 2),), en)
        # columns: R0', R0, R1, R2, R0*R2
        assert AffineEquation((1, 0, -1, 0, -1), 0) in got.constraints()


# -- update rows -------------------------------------------------------------------


def _true_max(en, mode, oct_in, pattern):
    from tfsynth.oracle import _inside

    sel = _inside(oct_in, en.inputs) & (en.modes == mode)
    if not sel.any():
        return None
    return int((en.outputs[sel] @ np.array(pattern)).max())


def test_exact_rows_are_exact_when_an_affine_update_exists():
    b = parse_block(".lsl signed\nADD R0 R1\nLSL R0", width=6)
    tf = synthesize(b, Config(strategy="exact"))
    en = enumerate_block(b)
    pair = next(p for p in tf.pairs if p.modes == "PP")
    assert all(r.kind != CONST for r in pair.rows)
    rng = random.Random(5)
    checked = 0
    while checked < 200:
        inp = random_octagon(2, 6, True, rng, p_inf=0.0)
        cur = inp.meet(pair.guard.rows())
        if cur.bottom:
            continue
        d = cur.bounds(tf.in_templates.patterns)
        for row in pair.rows:
            want = _true_max(en, "PP", cur, tf.out_templates.patterns[row.target])
            if want is None:
                break
            assert eval_row(row, d, {}) == want
        else:
            checked += 1


def test_minexpr_candidates_are_each_sound():
    b = parse_block("MOV R1 R0\nNEG R1\nAND R1 15\nADD R0 R1", width=6)
    tf = synthesize(b)
    en = enumerate_block(b)
    rng = random.Random(11)
    kinds = set()
    for _ in range(150):
        inp = random_octagon(2, 6, True, rng)
        for pair in tf.pairs:
            cur = inp.meet(pair.guard.rows())
            if cur.bottom:
                continue
            d = cur.bounds(tf.in_templates.patterns)
            for row in pair.rows:
                kinds.add(row.kind)
                want = _true_max(en, pair.modes, cur, tf.out_templates.patterns[row.target])
                if want is None:
                    continue
                for cand in row.cands:
                    v = eval_row(UpdateRow(row.target, CONST, (cand,)), d, {})
                    assert v >= want
                assert eval_row(row, d, {}) == min(eval_row(UpdateRow(0, CONST, (c,)), d, {}) for c in row.cands)
    assert MINEXPR in kinds


def test_medium_never_tighter_than_ladder():
    b = parse_block(".lsl signed\nADD R0 R1\nLSL R0", width=5)
    ladder = synthesize(b)
    medium = synthesize(b, Config(strategy="medium"))
    rng = random.Random(2)
    for _ in range(200):
        inp = random_octagon(2, 5, True, rng)
        a, _ = apply_tf(ladder, inp)
        m, _ = apply_tf(medium, inp)
        assert a.leq(m)


def test_interval_inc_is_exact_on_points():
    b = parse_block(".unsigned\nINC R0", width=4)
    tf = synthesize(b, Config(domain="interval"))
    for x in range(16):
        out, used = apply_tf(tf, Octagon.from_box([(x, x)]))
        assert out.interval(0) == ((x + 1) % 16, (x + 1) % 16)
        assert len(used) == 1


# -- evaluation --------------------------------------------------------------------


@pytest.fixture(scope="module")
def fig1_w6():
    b = parse_block(FIG1, width=6)
    return b, synthesize(b)


def test_eval_issues_no_solver_calls(fig1_w6, monkeypatch):
    _, tf = fig1_w6

    def boom(*a, **k):
        raise AssertionError("solver called during evaluation")

    monkeypatch.setattr(sat.Session, "solve", boom)
    apply_tf(tf, Octagon.from_box([(-5, 5), (0, 3)]))


def test_eval_bottom_and_inapplicable(fig1_w6):
    _, tf = fig1_w6
    out, used = apply_tf(tf, Octagon.bottom_of(2))
    assert out.bottom and used == []
    pair = next(p for p in tf.pairs if p.modes == "PEPP")
    with pytest.raises(Inapplicable):
        apply_pair(tf, pair, Octagon.from_box([(-32, -30), (-32, -30)]))
    with pytest.raises(ValueError):
        apply_pair(tf, pair, Octagon.top(3))


def test_eval_monotone(fig1_w6):
    _, tf = fig1_w6
    rng = random.Random(9)
    for _ in range(150):
        a = random_octagon(2, 6, True, rng)
        extra = [(p, rng.randint(-40, 40)) for p in rng.sample(octagon_patterns(2), 2)]
        small = a.meet(extra)
        assert apply_tf(tf, small)[0].leq(apply_tf(tf, a)[0])


def test_eval_infinity_and_floor():
    row = UpdateRow(0, MINEXPR, ((2, Expr(Fraction(1), ((0, Fraction(1)),))), (1, Expr(Fraction(9)))))
    assert eval_row(row, [4], {}) == 2          # floor(5/2) beats 9
    assert eval_row(row, [-4], {}) == -2        # floor(-3/2) rounds down
    assert eval_row(row, [INF], {}) == 9
    only = UpdateRow(0, "AFFINE", ((1, Expr(Fraction(0), ((0, Fraction(-1)),))),))
    assert eval_row(only, [INF], {}) == INF
    agg = UpdateRow(0, "NONLINEAR", ((1, Expr(Fraction(0), (), ((Fraction(1), "max", (0, 1)),))),))
    assert eval_row(agg, [], {0: (-2, 3), 1: (-2, 3)}) == 9
    assert eval_row(agg, [], {0: (-2, INF), 1: (-2, 3)}) == INF


# -- oracle ------------------------------------------------------------------------


def test_check_tf_clean_and_fault_injection(fig1_w6):
    b, tf = fig1_w6
    rep = check_tf(tf, b, samples=200, seed=3)
    assert rep.clean and rep.as_dict()["violation_count"] == 0
    pair = next(p for p in tf.pairs if p.modes == "PEPP")
    broken = [UpdateRow(r.target, CONST, ((1, Expr(Fraction(-40))),)) if r.target == 0 else r for r in pair.rows]
    saved = pair.rows
    pair.rows = broken
    try:
        bad = check_tf(tf, b, samples=200, seed=3)
    finally:
        pair.rows = saved
    assert not bad.clean and bad.violations
    v = bad.violations[0]
    assert "input" in v and int(v["image_max"]) > int(v["bound"])


def test_oracle_matches_concrete_semantics():
    from tfsynth.isa import execute_concrete, to_signed

    b = parse_block(FIG1, width=5)
    en = enumerate_block(b)
    rng = np.random.default_rng(0)
    for i in rng.choice(en.inputs.shape[0], 300, replace=False):
        regs = {r: int(v) for r, v in zip(b.state, en.inputs[i])}
        out, modes, _ = execute_concrete(b, regs)
        assert modes == en.modes[i]
        assert [to_signed(out[r], 5) for r in b.outs] == list(en.outputs[i])
