"""Compare the compiled and pure-Python SAT kernels.

    python3 benchmarks/bench_sat.py [--repeat N] [--seed S] [--json]

Workloads: random 3-SAT near the phase transition, a small pigeonhole
instance, and a real synthesis run (octagonal guards of the sum/isign block
at 16 bits).  Every workload is solved by both kernels and the verdicts are
compared before timings are reported.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import statistics
import sys
import time

from tfsynth import sat
from tfsynth.isa import parse_block
from tfsynth.synth_guards import TemplateSet, synth_guard
from tfsynth.synth_modes import Context, feasible_modes

CORPUS = os.path.join(os.path.dirname(__file__), "..", "src", "tfsynth", "corpus")


def random_3sat(rng, n, ratio=4.26):
    return [[v if rng.random() < 0.5 else -v for v in rng.sample(range(1, n + 1), 3)]
            for _ in range(int(n * ratio))]


def pigeonhole(p, h):
    var = lambda i, j: i * h + j + 1
    cnf = [[var(i, j) for j in range(h)] for i in range(p)]
    for j in range(h):
        for a in range(p):
            for b in range(a + 1, p):
                cnf.append([-var(a, j), -var(b, j)])
    return p * h, cnf


def solve_cnfs(backend, problems):
    verdicts = []
    for n, cnf in problems:
        core = sat.make_core(backend)
        for _ in range(n):
            core.new_var()
        for c in cnf:
            core.add_clause(c)
        verdicts.append(core.solve())
    return verdicts


def guard_run(backend):
    with open(os.path.join(CORPUS, "sum_isign.asm")) as fh:
        block = parse_block(fh.read(), width=16)
    ctx = Context(block, backend=backend)
    tmpl = TemplateSet.octagon(block.state)
    return [synth_guard(ctx, m, tmpl).bounds for m in feasible_modes(ctx)]


def timed(fn, repeat):
    times, result = [], None
    for _ in range(repeat):
        t = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t)
    return statistics.median(times), result


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)

    if sat.BACKEND != "compiled":
        print("compiled kernel not available; build it with `pip install -e . --no-build-isolation`",
              file=sys.stderr)
        return 1
    rng = random.Random(args.seed)
    workloads = {
        "random-3sat-120v x40": [(120, random_3sat(rng, 120)) for _ in range(40)],
        "pigeonhole-8/7": [pigeonhole(8, 7)],
    }
    rows = []
    for name, problems in workloads.items():
        tp, vp = timed(lambda: solve_cnfs("python", problems), args.repeat)
        tc, vc = timed(lambda: solve_cnfs("compiled", problems), args.repeat)
        rows.append({"workload": name, "python_s": tp, "compiled_s": tc, "agree": vp == vc})
    tp, gp = timed(lambda: guard_run("python"), 1)
    tc, gc = timed(lambda: guard_run("compiled"), args.repeat)
    rows.append({"workload": "isign guards w=16", "python_s": tp, "compiled_s": tc, "agree": gp == gc})

    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        print(f"{'workload':<24}{'python s':>10}{'compiled s':>12}{'speedup':>9}  agree")
        for r in rows:
            print(f"{r['workload']:<24}{r['python_s']:>10.3f}{r['compiled_s']:>12.3f}"
                  f"{r['python_s'] / r['compiled_s']:>8.1f}x  {r['agree']}")
    return 0 if all(r["agree"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
