"""Pure-Python CDCL core.

This is the reference implementation of the solver kernel. The compiled
module ``_csat`` is a line-by-line port of this file, so both back ends make
the same decisions, learn the same clauses and return the same models.

Literals are encoded internally as ``2*v + sign`` with ``v`` zero based.
The public methods take and return DIMACS style signed integers.
"""

from __future__ import annotations

UNDEF = -1
SAT = 1
UNSAT = 0
UNKNOWN = -1

VAR_DECAY = 0.95
CLA_DECAY = 0.999
RESTART_FIRST = 100


def luby(y: float, x: int) -> float:
    size = 1
    seq = 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    return y ** seq


class CoreSolver:
    """Incremental CDCL solver with assumptions."""

    def __init__(self) -> None:
        self.nvars = 0
        self.ok = True
        # per variable
        self.assigns: list[int] = []
        self.level: list[int] = []
        self.reason: list[int] = []
        self.activity: list[float] = []
        self.phase: list[int] = []
        self.seen: list[int] = []
        # per literal
        self.watches: list[list[int]] = []
        # clause store
        self.cl_lits: list[list[int]] = []
        self.cl_learnt: list[int] = []
        self.cl_act: list[float] = []
        self.cl_deleted: list[int] = []
        self.learnts: list[int] = []
        self.n_original = 0
        # trail
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        # heap of variables ordered by activity
        self.heap: list[int] = []
        self.heap_idx: list[int] = []
        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.max_learnts = 0.0
        self.model: bytearray = bytearray()
        # statistics
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0

    # ------------------------------------------------------------------ heap
    def _lt(self, a: int, b: int) -> bool:
        act = self.activity
        if act[a] != act[b]:
            return act[a] > act[b]
        return a < b

    def _heap_up(self, pos: int) -> None:
        heap = self.heap
        idx = self.heap_idx
        v = heap[pos]
        while pos > 0:
            parent = (pos - 1) >> 1
            if not self._lt(v, heap[parent]):
                break
            heap[pos] = heap[parent]
            idx[heap[pos]] = pos
            pos = parent
        heap[pos] = v
        idx[v] = pos

    def _heap_down(self, pos: int) -> None:
        heap = self.heap
        idx = self.heap_idx
        n = len(heap)
        v = heap[pos]
        while True:
            child = 2 * pos + 1
            if child >= n:
                break
            if child + 1 < n and self._lt(heap[child + 1], heap[child]):
                child += 1
            if not self._lt(heap[child], v):
                break
            heap[pos] = heap[child]
            idx[heap[pos]] = pos
            pos = child
        heap[pos] = v
        idx[v] = pos

    def _heap_insert(self, v: int) -> None:
        if self.heap_idx[v] >= 0:
            return
        self.heap.append(v)
        self.heap_idx[v] = len(self.heap) - 1
        self._heap_up(len(self.heap) - 1)

    def _heap_pop(self) -> int:
        heap = self.heap
        top = heap[0]
        last = heap.pop()
        self.heap_idx[top] = -1
        if heap:
            heap[0] = last
            self.heap_idx[last] = 0
            self._heap_down(0)
        return top

    # ------------------------------------------------------------ variables
    def new_var(self) -> int:
        v = self.nvars
        self.nvars += 1
        self.assigns.append(UNDEF)
        self.level.append(0)
        self.reason.append(-1)
        self.activity.append(0.0)
        self.phase.append(1)
        self.seen.append(0)
        self.watches.append([])
        self.watches.append([])
        self.heap_idx.append(-1)
        self._heap_insert(v)
        return v + 1

    def _value(self, lit: int) -> int:
        a = self.assigns[lit >> 1]
        if a == UNDEF:
            return UNDEF
        return a ^ (lit & 1)

    def _enqueue(self, lit: int, reason: int) -> None:
        v = lit >> 1
        self.assigns[v] = 1 - (lit & 1)
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    # --------------------------------------------------------------- clauses
    def add_clause(self, clause) -> bool:
        if not self.ok:
            return False
        lits = []
        for x in clause:
            v = abs(x) - 1
            while v >= self.nvars:
                self.new_var()
            lits.append(2 * v + (1 if x < 0 else 0))
        lits.sort()
        out = []
        prev = -1
        for p in lits:
            val = self._value(p)
            if val == 1 or p == (prev ^ 1):
                return True
            if val != 0 and p != prev:
                out.append(p)
                prev = p
        if not out:
            self.ok = False
            return False
        if len(out) == 1:
            self._enqueue(out[0], -1)
            if self._propagate() != -1:
                self.ok = False
                return False
            return True
        self._attach(out, 0)
        self.n_original += 1
        return True

    def _attach(self, lits: list[int], learnt: int) -> int:
        cid = len(self.cl_lits)
        self.cl_lits.append(lits)
        self.cl_learnt.append(learnt)
        self.cl_act.append(0.0)
        self.cl_deleted.append(0)
        self.watches[lits[0]].append(cid)
        self.watches[lits[1]].append(cid)
        return cid

    # ----------------------------------------------------------- propagation
    def _propagate(self) -> int:
        confl = -1
        trail = self.trail
        assigns = self.assigns
        watches = self.watches
        cl_lits = self.cl_lits
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            self.propagations += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            i = 0
            j = 0
            n = len(ws)
            while i < n:
                cid = ws[i]
                i += 1
                c = cl_lits[cid]
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                a = assigns[first >> 1]
                if a != UNDEF and (a ^ (first & 1)) == 1:
                    ws[j] = cid
                    j += 1
                    continue
                found = False
                for k in range(2, len(c)):
                    q = c[k]
                    a = assigns[q >> 1]
                    if a == UNDEF or (a ^ (q & 1)) == 1:
                        c[1] = q
                        c[k] = false_lit
                        watches[q].append(cid)
                        found = True
                        break
                if found:
                    continue
                ws[j] = cid
                j += 1
                a = assigns[first >> 1]
                if a != UNDEF:
                    confl = cid
                    self.qhead = len(trail)
                    while i < n:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                else:
                    self._enqueue(first, cid)
            del ws[j:]
            if confl != -1:
                break
        return confl

    # -------------------------------------------------------------- analysis
    def _bump_var(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(self.nvars):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
        if self.heap_idx[v] >= 0:
            self._heap_up(self.heap_idx[v])

    def _bump_clause(self, cid: int) -> None:
        self.cl_act[cid] += self.cla_inc
        if self.cl_act[cid] > 1e20:
            for c in self.learnts:
                self.cl_act[c] *= 1e-20
            self.cla_inc *= 1e-20

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        seen = self.seen
        level = self.level
        trail = self.trail
        learnt = [0]
        path_c = 0
        p = -1
        index = len(trail) - 1
        dl = len(self.trail_lim)
        while True:
            if self.cl_learnt[confl]:
                self._bump_clause(confl)
            c = self.cl_lits[confl]
            start = 0 if p == -1 else 1
            for k in range(start, len(c)):
                q = c[k]
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    self._bump_var(v)
                    seen[v] = 1
                    if level[v] >= dl:
                        path_c += 1
                    else:
                        learnt.append(q)
            while not seen[trail[index] >> 1]:
                index -= 1
            p = trail[index]
            index -= 1
            confl = self.reason[p >> 1]
            seen[p >> 1] = 0
            path_c -= 1
            if path_c == 0:
                break
        learnt[0] = p ^ 1
        # local minimisation
        keep = [learnt[0]]
        for k in range(1, len(learnt)):
            q = learnt[k]
            r = self.reason[q >> 1]
            if r == -1:
                keep.append(q)
                continue
            rc = self.cl_lits[r]
            redundant = True
            for t in range(1, len(rc)):
                u = rc[t] >> 1
                if not seen[u] and level[u] > 0:
                    redundant = False
                    break
            if not redundant:
                keep.append(q)
        for k in range(1, len(learnt)):
            seen[learnt[k] >> 1] = 0
        bt = 0
        if len(keep) > 1:
            mx = 1
            for k in range(2, len(keep)):
                if level[keep[k] >> 1] > level[keep[mx] >> 1]:
                    mx = k
            tmp = keep[1]
            keep[1] = keep[mx]
            keep[mx] = tmp
            bt = level[keep[1] >> 1]
        return keep, bt

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        lim = self.trail_lim[lvl]
        for c in range(len(self.trail) - 1, lim - 1, -1):
            v = self.trail[c] >> 1
            self.phase[v] = self.trail[c] & 1
            self.assigns[v] = UNDEF
            self.reason[v] = -1
            self._heap_insert(v)
        del self.trail[lim:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _locked(self, cid: int) -> bool:
        first = self.cl_lits[cid][0]
        return self.reason[first >> 1] == cid and self._value(first) == 1

    def _reduce_db(self) -> None:
        order = sorted(self.learnts, key=lambda c: (self.cl_act[c], c))
        half = len(order) // 2
        removed = 0
        for c in order:
            if removed >= half:
                break
            if len(self.cl_lits[c]) > 2 and not self._locked(c):
                self.cl_deleted[c] = 1
                removed += 1
        if removed:
            self.learnts = [c for c in self.learnts if not self.cl_deleted[c]]
            deleted = self.cl_deleted
            for lit in range(2 * self.nvars):
                ws = self.watches[lit]
                if ws:
                    self.watches[lit] = [c for c in ws if not deleted[c]]

    # ----------------------------------------------------------------- search
    def _pick_branch(self) -> int:
        while self.heap:
            v = self._heap_pop()
            if self.assigns[v] == UNDEF:
                return 2 * v + self.phase[v]
        return -1

    def _search(self, nof_conflicts: int, assumptions: list[int], budget: int) -> int:
        conflict_c = 0
        while True:
            confl = self._propagate()
            if confl != -1:
                self.conflicts += 1
                conflict_c += 1
                if len(self.trail_lim) == 0:
                    self.ok = False
                    return UNSAT
                learnt, bt = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], -1)
                else:
                    cid = self._attach(learnt, 1)
                    self.learnts.append(cid)
                    self._bump_clause(cid)
                    self._enqueue(learnt[0], cid)
                self.var_inc /= VAR_DECAY
                self.cla_inc /= CLA_DECAY
            else:
                if budget >= 0 and self.conflicts >= budget:
                    self._cancel_until(0)
                    return UNKNOWN
                if nof_conflicts >= 0 and conflict_c >= nof_conflicts:
                    self._cancel_until(0)
                    return -2
                if len(self.learnts) - len(self.trail) >= self.max_learnts:
                    self._reduce_db()
                    self.max_learnts *= 1.1
                nxt = -1
                while len(self.trail_lim) < len(assumptions):
                    p = assumptions[len(self.trail_lim)]
                    val = self._value(p)
                    if val == 1:
                        self.trail_lim.append(len(self.trail))
                    elif val == 0:
                        return UNSAT
                    else:
                        nxt = p
                        break
                if nxt == -1:
                    self.decisions += 1
                    nxt = self._pick_branch()
                    if nxt == -1:
                        return SAT
                self.trail_lim.append(len(self.trail))
                self._enqueue(nxt, -1)

    def solve(self, assumptions=(), conflict_limit: int = -1) -> int:
        if not self.ok:
            return UNSAT
        assum = []
        for x in assumptions:
            v = abs(x) - 1
            while v >= self.nvars:
                self.new_var()
            assum.append(2 * v + (1 if x < 0 else 0))
        self.max_learnts = max(2000.0, self.n_original / 3.0)
        budget = -1 if conflict_limit < 0 else self.conflicts + conflict_limit
        status = -2
        curr_restarts = 0
        while status == -2:
            nof = int(luby(2.0, curr_restarts) * RESTART_FIRST)
            status = self._search(nof, assum, budget)
            curr_restarts += 1
        if status == SAT:
            model = bytearray(self.nvars)
            for v in range(self.nvars):
                model[v] = 1 if self.assigns[v] == 1 else 0
            self.model = model
        self._cancel_until(0)
        return status

    def get_model(self) -> bytes:
        return bytes(self.model)

    def num_vars(self) -> int:
        return self.nvars

    def num_clauses(self) -> int:
        return self.n_original

    def stats(self) -> dict:
        return {
            "conflicts": self.conflicts,
            "decisions": self.decisions,
            "propagations": self.propagations,
            "learnts": len(self.learnts),
        }
