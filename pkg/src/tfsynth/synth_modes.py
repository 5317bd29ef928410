"""Feasible mode combinations by incremental tree search."""

from __future__ import annotations

from itertools import product

from .encoder import BlockEncoding, CnfBuilder
from .isa import MODE_ORDER, Block
from .sat import CallCounter, Session

DEFAULT_LEAF_CAP = 4096


class ModeCapExceeded(RuntimeError):
    pass


class Context:
    """A block, its circuit and the solver bookkeeping shared by all phases."""

    def __init__(self, block: Block, counter: CallCounter | None = None,
                 budget: int | None = None, backend: str | None = None) -> None:
        self.block = block
        self.cnf = CnfBuilder()
        self.enc = BlockEncoding(block, self.cnf)
        self.counter = counter or CallCounter()
        self.budget = budget
        self.backend = backend
        self._sessions: dict[str, Session] = {}

    def session(self, tag: str) -> Session:
        """Solver session for one phase, reused across calls.

        Everything mode- or query-specific is passed as assumptions, so
        learnt clauses stay valid between modes.
        """
        sess = self._sessions.get(tag)
        if sess is None:
            sess = self._sessions[tag] = self.fresh_session(tag)
        return sess

    def fresh_session(self, tag: str) -> Session:
        """A new session, for query families whose circuits are not shared."""
        sess = Session(self.cnf, self.counter, tag, self.budget, self.backend)
        enc = self.enc
        sess.watch(l for v in list(enc.inputs.values()) + list(enc.outputs.values()) for l in v)
        if enc.carry_in is not None:
            sess.watch([enc.carry_in])
        return sess

    def mode_lits(self, modes: str) -> list[int]:
        return self.enc.mode_assumptions(modes)


def _children(alpha: str) -> str:
    return "".join(m for m in MODE_ORDER if m in alpha)


def feasible_modes(ctx: Context, cap: int = DEFAULT_LEAF_CAP) -> list[str]:
    """Mode vectors whose conjunction with the block is satisfiable.

    Walks the sites in instruction order and extends a prefix only while it
    stays satisfiable. All queries share one session, so clauses learnt
    under one prefix help the others.
    """
    sites = ctx.enc.sites
    if not sites:
        return [""]
    sess = ctx.session("modes")
    found: list[str] = []
    stack: list[tuple[str, list[int]]] = [("", [])]
    # depth-first, children visited in fixed mode order
    while stack:
        prefix, lits = stack.pop()
        depth = len(prefix)
        nxt = []
        for m in _children(sites[depth].alphabet):
            lit = sites[depth].lits[m]
            if sess.solve(lits + [lit]):
                if depth + 1 == len(sites):
                    found.append(prefix + m)
                    if len(found) > cap:
                        raise ModeCapExceeded(f"more than {cap} feasible mode vectors")
                else:
                    nxt.append((prefix + m, lits + [lit]))
        stack.extend(reversed(nxt))
    return found


def flat_modes(ctx: Context) -> list[str]:
    """Test every full combination independently (reference strategy)."""
    sites = ctx.enc.sites
    if not sites:
        return [""]
    sess = ctx.session("modes-flat")
    out = []
    for combo in product(*(_children(s.alphabet) for s in sites)):
        if sess.solve(ctx.mode_lits("".join(combo))):
            out.append("".join(combo))
    return out


def project(modes: str, block: Block, keep: list[int]) -> str:
    """Letters of ``modes`` for the instructions at indices ``keep``."""
    idx = block.multimodal
    return "".join(modes[idx.index(i)] for i in keep)
