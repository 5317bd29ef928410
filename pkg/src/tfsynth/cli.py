"""Command-line front end.

    tfsynth modes  BLOCK.asm [--width W] [--signed|--unsigned]
    tfsynth synth  BLOCK.asm [--domain D] [--strategy S] [--monomials M] [--format F] [--stats]
    tfsynth apply  TF.json STATE
    tfsynth verify BLOCK.asm TF.json [--samples N]

Exit codes: 0 success, 1 verification found a problem, 2 usage or input
error, 3 solver resource limit.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction

from . import __version__
from .eval import apply_tf
from .isa import ParseError, parse_block
from .octdom import INF, Octagon, is_octagonal
from .oracle import check_tf
from .sat import ResourceLimit
from .synth_guards import Guard, TemplateSet
from .synth_modes import Context, ModeCapExceeded, feasible_modes, project
from .synth_updates import (
    STRATEGIES, Config, Expr, Pair, TransferFunction, UpdateRow, default_monomials, synthesize,
)

EXIT_OK, EXIT_UNSOUND, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3
FORMAT_VERSION = 1


class FormatError(ValueError):
    pass


# -- small printers --------------------------------------------------------------


def _reg(r: int) -> str:
    return f"R{r}"


def _parse_reg(tok: str) -> int:
    m = re.fullmatch(r"[Rr](\d+)", tok.strip())
    if not m:
        raise FormatError(f"expected a register, got {tok!r}")
    return int(m.group(1))


def _frac(s) -> Fraction:
    try:
        return Fraction(str(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"bad number {s!r}") from exc


def pattern_text(regs, p) -> str:
    """``R0 - R1`` style rendering of a coefficient pattern."""
    out = []
    for r, c in zip(regs, p):
        if not c:
            continue
        mag = "" if abs(c) == 1 else f"{abs(c)}*"
        if not out:
            out.append(("-" if c < 0 else "") + mag + _reg(r))
        else:
            out.append(("- " if c < 0 else "+ ") + mag + _reg(r))
    return " ".join(out)


def expr_text(e: Expr) -> str:
    parts: list[tuple[Fraction, str]] = []
    for k, c in e.coeffs:
        parts.append((c, f"d{k + 1}"))
    for c, op, mono in e.aggs:
        parts.append((c, f"{op}({'*'.join(_reg(r) for r in mono)})"))
    if e.const or not parts:
        parts.append((e.const, ""))
    out = []
    for c, name in parts:
        mag = abs(c)
        if name:
            body = name if mag == 1 else f"{mag}*{name}"
        else:
            body = str(mag)
        if not out:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append(("- " if c < 0 else "+ ") + body)
    return " ".join(out)


_TERM = re.compile(r"^(?:(\d+(?:/\d+)?)\*)?(d(\d+)|(max|min)\(([^)]*)\))$|^(\d+(?:/\d+)?)$")


def parse_expr(text: str) -> Expr:
    toks = text.replace("+", " + ").replace(" - ", " -- ").split()
    sign = 1
    const = Fraction(0)
    coeffs: dict[int, Fraction] = {}
    aggs = []
    expect_term = True
    for tok in toks:
        if tok in ("+", "--") and not expect_term:
            sign = 1 if tok == "+" else -1
            expect_term = True
            continue
        if not expect_term:
            raise FormatError(f"unexpected {tok!r} in {text!r}")
        if tok.startswith("-"):
            sign, tok = -sign, tok[1:]
        m = _TERM.match(tok)
        if not m:
            raise FormatError(f"bad term {tok!r} in {text!r}")
        if m.group(6) is not None:
            const += sign * _frac(m.group(6))
        else:
            c = sign * (_frac(m.group(1)) if m.group(1) else Fraction(1))
            if m.group(3) is not None:
                k = int(m.group(3)) - 1
                if k < 0:
                    raise FormatError(f"constant index must start at 1: {tok!r}")
                coeffs[k] = coeffs.get(k, 0) + c
            else:
                mono = tuple(_parse_reg(t) for t in m.group(5).split("*"))
                aggs.append((c, m.group(4), mono))
        sign = 1
        expect_term = False
    if expect_term:
        raise FormatError(f"incomplete expression {text!r}")
    return Expr(const, tuple(sorted((k, v) for k, v in coeffs.items() if v)), tuple(aggs))


def cand_text(div: int, e: Expr) -> str:
    return expr_text(e) if div == 1 else f"({expr_text(e)}) / {div}"


def parse_cand(text: str) -> tuple[int, Expr]:
    text = text.strip()
    m = re.fullmatch(r"\((.*)\)\s*/\s*(\d+)", text)
    if m:
        return int(m.group(2)), parse_expr(m.group(1))
    return 1, parse_expr(text)


# -- JSON ----------------------------------------------------------------------------


def _tmpl_json(t: TemplateSet) -> dict:
    return {"kind": t.kind, "regs": [_reg(r) for r in t.regs], "patterns": [list(p) for p in t.patterns]}


def _tmpl_from(obj) -> TemplateSet:
    regs = tuple(_parse_reg(r) for r in obj["regs"])
    pats = [tuple(int(c) for c in p) for p in obj["patterns"]]
    return TemplateSet(regs, pats, obj.get("kind", "custom"))


def _coeffs_json(regs, p) -> dict:
    return {_reg(r): c for r, c in zip(regs, p) if c}


def _pattern_from(regs, coeffs: dict) -> tuple[int, ...]:
    by = {_parse_reg(k): int(v) for k, v in coeffs.items()}
    extra = set(by) - set(regs)
    if extra:
        raise FormatError(f"register R{min(extra)} is not part of the template")
    return tuple(by.get(r, 0) for r in regs)


def _expr_json(e: Expr) -> dict:
    return {
        "const": str(e.const),
        "terms": [{"d": k + 1, "coef": str(c)} for k, c in e.coeffs],
        "aggregates": [{"coef": str(c), "op": op, "product": [_reg(r) for r in mono]} for c, op, mono in e.aggs],
    }


def _expr_from(obj) -> Expr:
    coeffs = tuple(sorted((int(t["d"]) - 1, _frac(t["coef"])) for t in obj.get("terms", [])))
    aggs = tuple((_frac(a["coef"]), a["op"], tuple(_parse_reg(r) for r in a["product"]))
                 for a in obj.get("aggregates", []))
    for _, op, _ in aggs:
        if op not in ("max", "min"):
            raise FormatError(f"unknown aggregate {op!r}")
    return Expr(_frac(obj.get("const", "0")), coeffs, aggs)


def tf_to_json(tf: TransferFunction, stats: bool = False) -> dict:
    gt, ot = tf.guard_templates, tf.out_templates
    doc = {
        "format": FORMAT_VERSION,
        "block": tf.block_source,
        "name": tf.name,
        "width": tf.width,
        "interpretation": "signed" if tf.signed else "unsigned",
        "domain": tf.domain,
        "inputs": [_reg(r) for r in tf.inputs],
        "outputs": [_reg(r) for r in tf.outs],
        "monomials": [[_reg(r) for r in m] for m in tf.monomials],
        "templates": {"guard": _tmpl_json(gt), "input": _tmpl_json(tf.in_templates), "output": _tmpl_json(ot)},
        "pairs": [
            {
                "modes": pair.modes,
                "guard": [{"coeffs": _coeffs_json(gt.regs, p), "bound": str(b)} for p, b in pair.guard.rows()],
                "update": [
                    {
                        "target": row.target + 1,
                        "pattern": _coeffs_json(ot.regs, ot.patterns[row.target]),
                        "kind": row.kind,
                        "text": " | ".join(cand_text(dv, e) for dv, e in row.cands),
                        "body": [{"divisor": dv, **_expr_json(e)} for dv, e in row.cands],
                    }
                    for row in pair.rows
                ],
            }
            for pair in tf.pairs
        ],
    }
    if stats:
        doc["stats"] = dict(sorted(tf.stats.items()))
    return doc


def tf_from_json(doc) -> TransferFunction:
    try:
        gt = _tmpl_from(doc["templates"]["guard"])
        it = _tmpl_from(doc["templates"]["input"])
        ot = _tmpl_from(doc["templates"]["output"])
        pairs = []
        for p in doc["pairs"]:
            gpats, gbounds = [], []
            for g in p["guard"]:
                gpats.append(_pattern_from(gt.regs, g["coeffs"]))
                gbounds.append(int(g["bound"]))
            rows = []
            for u in p["update"]:
                cands = tuple((int(c.get("divisor", 1)), _expr_from(c)) for c in u["body"])
                rows.append(UpdateRow(int(u["target"]) - 1, u["kind"], cands))
            pairs.append(Pair(p["modes"], Guard(gpats, gbounds), rows))
        interp = doc["interpretation"]
        if interp not in ("signed", "unsigned"):
            raise FormatError(f"bad interpretation {interp!r}")
        return TransferFunction(
            block_source=doc["block"], name=doc.get("name", "block"), width=int(doc["width"]),
            signed=interp == "signed",
            inputs=tuple(_parse_reg(r) for r in doc["inputs"]),
            outs=tuple(_parse_reg(r) for r in doc["outputs"]),
            guard_templates=gt, in_templates=it, out_templates=ot,
            monomials=tuple(tuple(_parse_reg(r) for r in m) for m in doc.get("monomials", [])),
            domain=doc.get("domain", it.kind), pairs=pairs, stats=dict(doc.get("stats", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed transfer function: {exc}") from exc


def dumps_json(tf: TransferFunction, stats: bool = False) -> str:
    return json.dumps(tf_to_json(tf, stats), indent=2) + "\n"


# -- text ----------------------------------------------------------------------------


def _pats_line(t: TemplateSet) -> str:
    return "; ".join(pattern_text(t.regs, p) for p in t.patterns)


def dumps_text(tf: TransferFunction, stats: bool = False) -> str:
    gt, it, ot = tf.guard_templates, tf.in_templates, tf.out_templates
    src = "; ".join(line for line in tf.block_source.splitlines() if line.strip())
    lines = [
        f"transfer {tf.name}",
        f"block {src}",
        f"width {tf.width} {'signed' if tf.signed else 'unsigned'}",
        f"domain {tf.domain}",
        "inputs " + " ".join(_reg(r) for r in tf.inputs),
        "outputs " + " ".join(_reg(r) for r in tf.outs),
        "monomials " + " ".join("*".join(_reg(r) for r in m) for m in tf.monomials),
        f"guard-templates {gt.kind} {' '.join(_reg(r) for r in gt.regs)}: {_pats_line(gt)}",
        f"input-templates {it.kind} {' '.join(_reg(r) for r in it.regs)}: {_pats_line(it)}",
        f"output-templates {ot.kind} {' '.join(_reg(r) for r in ot.regs)}: {_pats_line(ot)}",
    ]
    for k, p in enumerate(it.patterns):
        lines.append(f"# d{k + 1} bounds {pattern_text(it.regs, p)}")
    for k, p in enumerate(ot.patterns):
        lines.append(f"# d'{k + 1} bounds {pattern_text(ot.regs, p)}")
    for pair in tf.pairs:
        lines.append(f"pair {pair.modes or '-'}")
        for p, b in pair.guard.rows():
            lines.append(f"  guard {pattern_text(gt.regs, p)} <= {b}")
        for row in pair.rows:
            body = " | ".join(cand_text(dv, e) for dv, e in row.cands)
            lines.append(f"  d'{row.target + 1} {row.kind} = {body}")
    if stats:
        for k, v in sorted(tf.stats.items()):
            lines.append(f"# stats {k} {v}")
    return "\n".join(lines) + "\n"


def _parse_pattern(text: str, regs) -> tuple[int, ...]:
    coeffs: dict[int, int] = {}
    toks = text.replace("+", " + ").replace("-", " - ").split()
    sign = 1
    for tok in toks:
        if tok in "+-":
            sign = -sign if tok == "-" else sign
            continue
        mag = 1
        if "*" in tok:
            m, tok = tok.split("*", 1)
            mag = int(m)
        r = _parse_reg(tok)
        coeffs[r] = coeffs.get(r, 0) + sign * mag
        sign = 1
    if not coeffs:
        raise FormatError(f"empty pattern {text!r}")
    extra = set(coeffs) - set(regs)
    if extra:
        raise FormatError(f"register R{min(extra)} is not part of the state")
    return tuple(coeffs.get(r, 0) for r in regs)


def _tmpl_line(rest: str) -> TemplateSet:
    head, _, pats = rest.partition(":")
    words = head.split()
    kind, regs = words[0], tuple(_parse_reg(w) for w in words[1:])
    patterns = [_parse_pattern(p, regs) for p in pats.split(";") if p.strip()]
    return TemplateSet(regs, patterns, kind)


def loads_text(text: str) -> TransferFunction:
    fields: dict[str, str] = {}
    pairs: list[Pair] = []
    cur = None
    stats = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("# stats "):
            _, _, k, v = line.split()
            stats[k] = int(v)
            continue
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        try:
            if key == "pair":
                cur = Pair("" if rest == "-" else rest, Guard([], []), [])
                pairs.append(cur)
            elif key == "guard":
                lhs, _, b = rest.rpartition("<=")
                g = _tmpl_line(fields["guard-templates"])
                cur.guard.patterns.append(_parse_pattern(lhs, g.regs))
                cur.guard.bounds.append(int(b))
            elif key.startswith("d'"):
                kind, _, body = rest.partition("=")
                cands = tuple(parse_cand(c) for c in body.split("|"))
                cur.rows.append(UpdateRow(int(key[2:]) - 1, kind.strip(), cands))
            else:
                fields[key] = rest
        except (AttributeError, KeyError, ValueError) as exc:
            raise FormatError(f"line {n}: {exc}") from exc
    try:
        width, interp = fields["width"].split()
        return TransferFunction(
            block_source="\n".join(s.strip() for s in fields["block"].split(";")) + "\n",
            name=fields.get("transfer", "block"), width=int(width), signed=interp == "signed",
            inputs=tuple(_parse_reg(r) for r in fields["inputs"].split()),
            outs=tuple(_parse_reg(r) for r in fields["outputs"].split()),
            guard_templates=_tmpl_line(fields["guard-templates"]),
            in_templates=_tmpl_line(fields["input-templates"]),
            out_templates=_tmpl_line(fields["output-templates"]),
            monomials=tuple(tuple(_parse_reg(r) for r in m.split("*")) for m in fields.get("monomials", "").split()),
            domain=fields.get("domain", "octagon"), pairs=pairs, stats=stats,
        )
    except (KeyError, ValueError) as exc:
        raise FormatError(f"malformed transfer function: {exc}") from exc


def load_tf(text: str) -> TransferFunction:
    """Read either serialization."""
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from exc
        return tf_from_json(doc)
    return loads_text(text)


# -- abstract states -----------------------------------------------------------------


def parse_state(text: str, regs) -> Octagon:
    """Octagon from ``lo <= R0 <= hi, R0 + R1 <= c, ...``.

    Also accepts ``>=`` and ``==``, and ``BOTTOM`` or ``TOP`` alone.
    Registers that are not mentioned are unconstrained.
    """
    regs = tuple(regs)
    n = len(regs)
    s = text.strip()
    if s.upper() in ("BOTTOM", "FALSE"):
        return Octagon.bottom_of(n)
    if s.upper() in ("", "TOP", "TRUE"):
        return Octagon.top(n)
    cons = []
    for part in s.split(","):
        toks = re.split(r"(<=|>=|==)", part)
        if len(toks) < 3 or len(toks) % 2 == 0:
            raise FormatError(f"bad constraint {part.strip()!r}")
        for i in range(0, len(toks) - 2, 2):
            a, op, b = toks[i].strip(), toks[i + 1], toks[i + 2].strip()
            if op == ">=":
                a, b = b, a
            for lhs, rhs in ((a, b), (b, a)) if op == "==" else ((a, b),):
                lnum = re.fullmatch(r"[+-]?\d+", lhs)
                rnum = re.fullmatch(r"[+-]?\d+", rhs)
                if lnum and rnum:
                    raise FormatError(f"constraint {part.strip()!r} has no register")
                if rnum:
                    cons.append((_parse_pattern(lhs, regs), int(rhs)))
                elif lnum:
                    p = _parse_pattern(rhs, regs)
                    cons.append((tuple(-c for c in p), -int(lhs)))
                else:
                    raise FormatError(f"constraint {part.strip()!r} must compare with a number")
    for p, _ in cons:
        if not is_octagonal(p):
            raise FormatError(f"{pattern_text(regs, p)} is not an octagonal expression")
    return Octagon.from_constraints(n, cons)


def state_text(o: Octagon, regs) -> str:
    if o.bottom:
        return "BOTTOM"
    lines = []
    for i, r in enumerate(regs):
        lo, hi = o.interval(i)
        lo_s = "-inf" if lo == -INF else str(lo)
        hi_s = "+inf" if hi == INF else str(hi)
        lines.append(f"{lo_s} <= {_reg(r)} <= {hi_s}")
    for p, b in o.constraints():
        if sum(1 for c in p if c) == 2:
            lines.append(f"{pattern_text(regs, p)} <= {b}")
    return "\n".join(lines)


def state_json(o: Octagon, regs) -> dict:
    if o.bottom:
        return {"bottom": True}

    def num(v):
        return None if v in (INF, -INF) else str(v)

    return {
        "bottom": False,
        "intervals": {_reg(r): [num(o.interval(i)[0]), num(o.interval(i)[1])] for i, r in enumerate(regs)},
        "constraints": [{"coeffs": _coeffs_json(regs, p), "bound": num(b)} for p, b in o.constraints()],
    }


# -- commands ------------------------------------------------------------------------


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_block(args):
    text = _read(args.block)
    signed = None if args.signed is None else args.signed
    name = "stdin" if args.block == "-" else re.sub(r"\.[^./]*$", "", args.block.rsplit("/", 1)[-1])
    return parse_block(text, width=args.width, signed=signed, name=name)


def _stats_text(stats: dict) -> str:
    total = sum(stats.values())
    return "\n".join([f"{k} {v}" for k, v in sorted(stats.items())] + [f"total {total}"])


def _sites(spec: str, block) -> list[int]:
    keep = []
    for tok in spec.split(","):
        i = int(tok) - 1
        if i not in block.multimodal:
            raise FormatError(f"instruction {tok} is not multi-modal")
        keep.append(i)
    return keep


def cmd_modes(args) -> int:
    block = _load_block(args)
    ctx = Context(block)
    modes = feasible_modes(ctx)
    if args.project:
        keep = _sites(args.project, block)
        modes = list(dict.fromkeys(project(m, block, keep) for m in modes))
    if args.format == "json":
        doc = {"block": block.name, "width": block.width, "modes": modes, "count": len(modes)}
        if args.stats:
            doc["stats"] = ctx.counter.as_dict()
        print(json.dumps(doc, indent=2))
        return EXIT_OK
    for m in modes:
        print(m or "(empty)")
    print(f"{len(modes)} feasible")
    if args.stats:
        print(_stats_text(ctx.counter.as_dict()), file=sys.stderr)
    return EXIT_OK


def _monomials(spec: str | None, block) -> tuple[tuple[int, ...], ...]:
    if not spec or spec == "none":
        return ()
    if spec == "default":
        return default_monomials(block.live_in)
    out = []
    for item in spec.split(","):
        mono = tuple(_parse_reg(t) for t in item.split("*"))
        missing = [r for r in mono if r not in block.state]
        if missing:
            raise FormatError(f"monomial register R{missing[0]} is not an input of the block")
        out.append(mono)
    return tuple(out)


def cmd_synth(args) -> int:
    block = _load_block(args)
    cfg = Config(domain=args.domain, guards=args.guards, strategy=args.strategy,
                 monomials=_monomials(args.monomials, block))
    tf = synthesize(block, cfg)
    out = dumps_json(tf, args.stats) if args.format == "json" else dumps_text(tf, args.stats)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    if args.stats and args.format != "json":
        print(_stats_text(tf.stats), file=sys.stderr)
    return EXIT_OK


def cmd_apply(args) -> int:
    tf = load_tf(_read(args.tf))
    inp = parse_state(args.state, tf.inputs)
    out, used = apply_tf(tf, inp)
    if args.format == "json":
        doc = {"pairs": used, "output": state_json(out, tf.outs)}
        print(json.dumps(doc, indent=2))
    else:
        print("pairs " + (" ".join(m or "-" for m in used) if used else "none"))
        print(state_text(out, tf.outs))
    return EXIT_OK


def cmd_verify(args) -> int:
    tf = load_tf(_read(args.tf))
    if args.block:
        args.width = args.width or tf.width
        block = _load_block(args)
    else:
        block = parse_block(tf.block_source, width=args.width or tf.width, signed=tf.signed, name=tf.name)
    if block.width != tf.width:
        raise FormatError(f"transfer function is for width {tf.width}, block has width {block.width}")
    if block.signed != tf.signed:
        raise FormatError("block and transfer function disagree on signedness")
    if block.instrs != parse_block(tf.block_source, width=tf.width).instrs:
        raise FormatError("transfer function was synthesized for a different block")
    report = check_tf(tf, block, samples=args.samples, seed=args.seed)
    doc = report.as_dict()
    if args.format == "json":
        print(json.dumps(doc, indent=2))
    else:
        print(f"block {doc['block']} width {doc['width']} samples {doc['samples']} seed {doc['seed']}")
        print(f"mode set {'ok' if doc['mode_mismatch'] is None else 'MISMATCH ' + str(doc['mode_mismatch'])}")
        print(f"guard mismatches {len(doc['guard_mismatches'])}")
        for g in doc["guard_mismatches"][:10]:
            print(f"  {g}")
        print(f"soundness violations {doc['violation_count']}")
        for v in doc["violations"][:10]:
            print(f"  {v}")
        print(f"bounds exact {doc['bounds_exact']}/{doc['bounds_checked']} mean gap {doc['mean_gap']}")
        print("clean" if doc["clean"] else "NOT CLEAN")
    return EXIT_OK if report.clean else EXIT_UNSOUND


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tfsynth", description="Synthesize abstract transfer functions for basic blocks.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def block_opts(p, width_default=32):
        p.add_argument("block", help="assembly file, or - for stdin")
        p.add_argument("--width", type=int, default=width_default)
        g = p.add_mutually_exclusive_group()
        g.add_argument("--signed", dest="signed", action="store_true", default=None)
        g.add_argument("--unsigned", dest="signed", action="store_false")

    p = sub.add_parser("modes", help="list feasible mode vectors")
    block_opts(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--stats", action="store_true")
    p.add_argument("--project", default=None, metavar="I,J,...",
                   help="show only the modes of these instructions (1-based)")
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("synth", help="synthesize a transfer function")
    block_opts(p)
    p.add_argument("--domain", choices=("interval", "octagon"), default="octagon")
    p.add_argument("--guards", choices=("interval", "octagon"), default=None,
                   help="guard templates (default: same as --domain)")
    p.add_argument("--strategy", choices=STRATEGIES, default="ladder")
    p.add_argument("--monomials", default=None,
                   help="comma-separated products such as R0*R2, 'default' or 'none'")
    p.add_argument("--format", choices=("text", "json"), default="json")
    p.add_argument("--stats", action="store_true", help="report SAT calls per phase")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("apply", help="apply a transfer function to an abstract state")
    p.add_argument("tf")
    p.add_argument("state", help="e.g. '-10 <= R0 <= 5, R0 + R1 <= 3'")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("verify", help="check a transfer function against brute force")
    p.add_argument("block", nargs="?", default=None,
                   help="assembly file (default: the block stored in the transfer function)")
    p.add_argument("tf")
    p.add_argument("--width", type=int, default=None)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--signed", dest="signed", action="store_true", default=None)
    g.add_argument("--unsigned", dest="signed", action="store_false")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except ResourceLimit as exc:
        print(f"tfsynth: resource limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except ModeCapExceeded as exc:
        print(f"tfsynth: resource limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (ParseError, FormatError, ValueError, OSError) as exc:
        print(f"tfsynth: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
