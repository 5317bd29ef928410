"""Incremental SAT sessions on top of the CDCL kernel.

The kernel is picked once at import: the compiled ``_csat`` module when it
was built, otherwise the pure-Python ``_pysat`` module. Set
``TFSYNTH_BACKEND=python`` to force the fallback.

A :class:`Session` is bound to a growing clause store (any object exposing
``nvars`` and a ``clauses`` list, normally an encoder ``CnfBuilder``). Each
``solve`` loads whatever clauses were appended since the previous call, so
circuits can be added between queries while learnt clauses are kept.
"""

from __future__ import annotations

import io
import os
import shutil
import subprocess
import tempfile
from collections import Counter
from typing import Iterable, Sequence

from . import _pysat

BACKEND = "python"
_Core = _pysat.CoreSolver
if os.environ.get("TFSYNTH_BACKEND", "").lower() != "python":
    try:
        from . import _csat

        _Core = _csat.CoreSolver
        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        pass

SAT = 1
UNSAT = 0

DEFAULT_CONFLICT_BUDGET = int(os.environ.get("TFSYNTH_CONFLICT_BUDGET", "-1"))


class ResourceLimit(RuntimeError):
    """The conflict budget ran out before the solver reached a verdict."""


class CallCounter:
    """Per-phase tally of solver calls, shared by all sessions of a run."""

    def __init__(self) -> None:
        self.counts: Counter[str] = Counter()

    def bump(self, tag: str) -> None:
        self.counts[tag] += 1

    def total(self) -> int:
        return sum(self.counts.values())

    def as_dict(self) -> dict[str, int]:
        return dict(sorted(self.counts.items()))


def make_core(backend: str | None = None):
    if backend is None:
        return _Core()
    if backend == "python":
        return _pysat.CoreSolver()
    if backend == "compiled":
        from . import _csat

        return _csat.CoreSolver()
    raise ValueError(f"unknown backend {backend!r}")


class Model:
    """Snapshot of a satisfying assignment, read through store literals."""

    __slots__ = ("_bits", "_map")

    def __init__(self, bits: bytes, mapping: dict[int, int]) -> None:
        self._bits = bits
        self._map = mapping

    def value(self, lit: int) -> bool:
        try:
            b = self._bits[self._map[abs(lit)] - 1]
        except KeyError:
            raise KeyError(f"literal {lit} was not part of the solved cone; watch() it first") from None
        return bool(b) if lit > 0 else not b


class Session:
    """Incremental solving over a clause store that only grows.

    Only the cone of influence of each query is handed to the kernel: the
    variables of the assumptions and of watched vectors, plus every gate
    they depend on. A store that records gate definitions (``spans``, as
    :class:`encoder.CnfBuilder` does) thus never pays for circuits built for
    other queries. Stores without ``spans`` are loaded in full.
    """

    def __init__(
        self,
        store,
        counter: CallCounter | None = None,
        tag: str = "misc",
        budget: int | None = None,
        backend: str | None = None,
    ) -> None:
        self.store = store
        self.counter = counter if counter is not None else CallCounter()
        self.tag = tag
        self.budget = DEFAULT_CONFLICT_BUDGET if budget is None else budget
        self.core = make_core(backend)
        self._map: dict[int, int] = {}
        self._free_pos = 0
        self._roots: list[int] = []
        self._model: Model | None = None
        self.calls = 0

    def watch(self, lits: Iterable[int]) -> None:
        """Keep these literals' circuits loaded so models can be read from them."""
        self._roots.extend(abs(l) for l in lits)

    def _load(self, roots: Iterable[int]) -> None:
        store = self.store
        spans = getattr(store, "spans", None)
        clauses = store.clauses
        core = self.core
        m = self._map
        fresh: list[int] = []
        stack = [v for v in roots if v not in m]
        while stack:
            v = stack.pop()
            if v in m:
                continue
            m[v] = core.new_var()
            fresh.append(v)
            span = spans.get(v) if spans is not None else None
            if span is not None:
                for i in range(*span):
                    for l in clauses[i]:
                        if abs(l) not in m:
                            stack.append(abs(l))
        if spans is not None:
            for v in fresh:
                span = spans.get(v)
                if span is not None:
                    for i in range(*span):
                        core.add_clause([m[l] if l > 0 else -m[-l] for l in clauses[i]])

    def _sync(self) -> None:
        store = self.store
        free = getattr(store, "free", None)
        clauses = store.clauses
        idx = free if free is not None else range(len(clauses))
        end = len(idx)
        if self._free_pos < end:
            new = [clauses[idx[k]] for k in range(self._free_pos, end)]
            self._load(abs(l) for c in new for l in c)
            for c in new:
                self.core.add_clause([self._map[l] if l > 0 else -self._map[-l] for l in c])
            self._free_pos = end
        if self._roots:
            self._load(self._roots)
            self._roots = []

    def solve(self, assumptions: Sequence[int] = (), tag: str | None = None) -> bool:
        self._sync()
        m = self._map
        for l in assumptions:
            if (l if l > 0 else -l) not in m:
                self._load([abs(x) for x in assumptions])
                break
        self.calls += 1
        self.counter.bump(tag or self.tag)
        status = self.core.solve([m[l] if l > 0 else -m[-l] for l in assumptions], self.budget)
        if status == SAT:
            self._model = Model(self.core.get_model(), m)
            return True
        if status == UNSAT:
            return False
        raise ResourceLimit(f"conflict budget {self.budget} exhausted")

    def value(self, lit: int) -> bool:
        """Truth value of a literal in the last model."""
        return self._model.value(lit)

    def model(self) -> Model:
        return self._model


def export_dimacs(store) -> bytes:
    """Serialize a clause store in DIMACS CNF with stable ordering."""
    buf = io.StringIO()
    buf.write(f"p cnf {store.nvars} {len(store.clauses)}\n")
    for clause in store.clauses:
        buf.write(" ".join(str(l) for l in clause))
        buf.write(" 0\n" if clause else "0\n")
    return buf.getvalue().encode("ascii")


def parse_dimacs(data: bytes | str) -> tuple[int, list[list[int]]]:
    if isinstance(data, bytes):
        data = data.decode("ascii")
    nvars = 0
    clauses: list[list[int]] = []
    cur: list[int] = []
    for line in data.splitlines():
        line = line.strip()
        if not line or line[0] in "c%":
            continue
        if line.startswith("p"):
            nvars = int(line.split()[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(cur)
                cur = []
            else:
                cur.append(lit)
    if cur:
        clauses.append(cur)
    return nvars, clauses


class _Store:
    def __init__(self, nvars: int, clauses: list[list[int]]) -> None:
        self.nvars = nvars
        self.clauses = clauses


def solve_external(
    store, assumptions: Iterable[int] = (), solver: str | None = None, timeout: float | None = None
) -> tuple[bool, dict[int, bool]]:
    """Run an external DIMACS solver (path from ``TFSYNTH_EXTERNAL_SOLVER``).

    Assumptions are appended as unit clauses. The solver must print an
    ``s SATISFIABLE`` / ``s UNSATISFIABLE`` line (or a bare SAT/UNSAT) and
    ``v`` lines with the model.
    """
    solver = solver or os.environ.get("TFSYNTH_EXTERNAL_SOLVER")
    if not solver:
        raise RuntimeError("no external solver configured (TFSYNTH_EXTERNAL_SOLVER)")
    exe = shutil.which(solver) or solver
    extra = [[a] for a in assumptions]
    merged = _Store(store.nvars, list(store.clauses) + extra)
    with tempfile.NamedTemporaryFile("wb", suffix=".cnf", delete=False) as fh:
        fh.write(export_dimacs(merged))
        path = fh.name
    try:
        proc = subprocess.run([exe, path], capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired as exc:
        raise ResourceLimit(f"external solver timed out after {timeout}s") from exc
    finally:
        os.unlink(path)
    verdict = None
    model: dict[int, bool] = {}
    for line in proc.stdout.splitlines():
        tok = line.split()
        if not tok:
            continue
        if tok[0] == "s" and len(tok) > 1:
            verdict = tok[1]
        elif tok[0] in ("SAT", "SATISFIABLE", "UNSAT", "UNSATISFIABLE"):
            verdict = tok[0]
        elif tok[0] == "v":
            for t in tok[1:]:
                v = int(t)
                if v:
                    model[abs(v)] = v > 0
    if verdict in ("SATISFIABLE", "SAT"):
        return True, model
    if verdict in ("UNSATISFIABLE", "UNSAT"):
        return False, {}
    raise ResourceLimit(f"external solver gave no verdict (exit {proc.returncode})")
