# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled CDCL core.

A direct port of ``_pysat.CoreSolver``. Every branch, tie-break and
floating-point update mirrors the Python reference so that the two back
ends produce identical search traces and models.
"""

from libcpp.vector cimport vector
from libcpp.algorithm cimport sort as cpp_sort
from libcpp.pair cimport pair

cdef int UNDEF = -1
cdef int SAT = 1
cdef int UNSAT = 0
cdef int UNKNOWN = -1

cdef double VAR_DECAY = 0.95
cdef double CLA_DECAY = 0.999
cdef int RESTART_FIRST = 100


cdef double luby(double y, long x):
    cdef long size = 1
    cdef long seq = 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    cdef double r = 1.0
    cdef long i
    for i in range(seq):
        r *= y
    return r


cdef class CoreSolver:
    cdef int nvars
    cdef public bint ok
    cdef vector[int] assigns
    cdef vector[int] level
    cdef vector[int] reason
    cdef vector[double] activity
    cdef vector[int] phase
    cdef vector[char] seen
    cdef vector[vector[int]] watches
    cdef vector[vector[int]] cl_lits
    cdef vector[char] cl_learnt
    cdef vector[double] cl_act
    cdef vector[char] cl_deleted
    cdef vector[int] learnts
    cdef long n_original
    cdef vector[int] trail
    cdef vector[int] trail_lim
    cdef int qhead
    cdef vector[int] heap
    cdef vector[int] heap_idx
    cdef double var_inc
    cdef double cla_inc
    cdef double max_learnts
    cdef bytearray model
    cdef public long conflicts
    cdef public long decisions
    cdef public long propagations

    def __cinit__(self):
        self.nvars = 0
        self.ok = True
        self.n_original = 0
        self.qhead = 0
        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.max_learnts = 0.0
        self.model = bytearray()
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0

    # ---------------------------------------------------------------- heap
    cdef inline bint _lt(self, int a, int b):
        if self.activity[a] != self.activity[b]:
            return self.activity[a] > self.activity[b]
        return a < b

    cdef void _heap_up(self, int pos):
        cdef int v = self.heap[pos]
        cdef int parent
        while pos > 0:
            parent = (pos - 1) >> 1
            if not self._lt(v, self.heap[parent]):
                break
            self.heap[pos] = self.heap[parent]
            self.heap_idx[self.heap[pos]] = pos
            pos = parent
        self.heap[pos] = v
        self.heap_idx[v] = pos

    cdef void _heap_down(self, int pos):
        cdef int n = <int>self.heap.size()
        cdef int v = self.heap[pos]
        cdef int child
        while True:
            child = 2 * pos + 1
            if child >= n:
                break
            if child + 1 < n and self._lt(self.heap[child + 1], self.heap[child]):
                child += 1
            if not self._lt(self.heap[child], v):
                break
            self.heap[pos] = self.heap[child]
            self.heap_idx[self.heap[pos]] = pos
            pos = child
        self.heap[pos] = v
        self.heap_idx[v] = pos

    cdef void _heap_insert(self, int v):
        if self.heap_idx[v] >= 0:
            return
        self.heap.push_back(v)
        self.heap_idx[v] = <int>self.heap.size() - 1
        self._heap_up(<int>self.heap.size() - 1)

    cdef int _heap_pop(self):
        cdef int top = self.heap[0]
        cdef int last = self.heap.back()
        self.heap.pop_back()
        self.heap_idx[top] = -1
        if self.heap.size() > 0:
            self.heap[0] = last
            self.heap_idx[last] = 0
            self._heap_down(0)
        return top

    # ----------------------------------------------------------- variables
    cdef int _new_var(self):
        cdef int v = self.nvars
        self.nvars += 1
        self.assigns.push_back(UNDEF)
        self.level.push_back(0)
        self.reason.push_back(-1)
        self.activity.push_back(0.0)
        self.phase.push_back(1)
        self.seen.push_back(0)
        self.watches.push_back(vector[int]())
        self.watches.push_back(vector[int]())
        self.heap_idx.push_back(-1)
        self._heap_insert(v)
        return v + 1

    def new_var(self):
        return self._new_var()

    cdef inline int _value(self, int lit):
        cdef int a = self.assigns[lit >> 1]
        if a == UNDEF:
            return UNDEF
        return a ^ (lit & 1)

    cdef inline void _enqueue(self, int lit, int reason):
        cdef int v = lit >> 1
        self.assigns[v] = 1 - (lit & 1)
        self.level[v] = <int>self.trail_lim.size()
        self.reason[v] = reason
        self.trail.push_back(lit)

    # ------------------------------------------------------------- clauses
    def add_clause(self, clause):
        if not self.ok:
            return False
        cdef vector[int] lits
        cdef vector[int] out
        cdef int v, p, val, prev
        cdef size_t k
        for x in clause:
            v = abs(x) - 1
            while v >= self.nvars:
                self._new_var()
            lits.push_back(2 * v + (1 if x < 0 else 0))
        cpp_sort(lits.begin(), lits.end())
        prev = -1
        for k in range(lits.size()):
            p = lits[k]
            val = self._value(p)
            if val == 1 or p == (prev ^ 1):
                return True
            if val != 0 and p != prev:
                out.push_back(p)
                prev = p
        if out.size() == 0:
            self.ok = False
            return False
        if out.size() == 1:
            self._enqueue(out[0], -1)
            if self._propagate() != -1:
                self.ok = False
                return False
            return True
        self._attach(out, 0)
        self.n_original += 1
        return True

    cdef int _attach(self, vector[int]& lits, char learnt):
        cdef int cid = <int>self.cl_lits.size()
        self.cl_lits.push_back(lits)
        self.cl_learnt.push_back(learnt)
        self.cl_act.push_back(0.0)
        self.cl_deleted.push_back(0)
        self.watches[lits[0]].push_back(cid)
        self.watches[lits[1]].push_back(cid)
        return cid

    # --------------------------------------------------------- propagation
    cdef int _propagate(self):
        cdef int confl = -1
        cdef int p, false_lit, cid, first, a, q
        cdef size_t i, j, n, k, csz
        cdef vector[int]* ws
        cdef vector[int]* c
        cdef bint found
        while self.qhead < <int>self.trail.size():
            p = self.trail[self.qhead]
            self.qhead += 1
            self.propagations += 1
            false_lit = p ^ 1
            ws = &self.watches[false_lit]
            i = 0
            j = 0
            n = ws.size()
            while i < n:
                cid = ws[0][i]
                i += 1
                c = &self.cl_lits[cid]
                if c[0][0] == false_lit:
                    c[0][0] = c[0][1]
                    c[0][1] = false_lit
                first = c[0][0]
                a = self.assigns[first >> 1]
                if a != UNDEF and (a ^ (first & 1)) == 1:
                    ws[0][j] = cid
                    j += 1
                    continue
                found = False
                csz = c.size()
                for k in range(2, csz):
                    q = c[0][k]
                    a = self.assigns[q >> 1]
                    if a == UNDEF or (a ^ (q & 1)) == 1:
                        c[0][1] = q
                        c[0][k] = false_lit
                        self.watches[q].push_back(cid)
                        found = True
                        break
                if found:
                    continue
                ws[0][j] = cid
                j += 1
                a = self.assigns[first >> 1]
                if a != UNDEF:
                    confl = cid
                    self.qhead = <int>self.trail.size()
                    while i < n:
                        ws[0][j] = ws[0][i]
                        j += 1
                        i += 1
                else:
                    self._enqueue(first, cid)
            ws.resize(j)
            if confl != -1:
                break
        return confl

    # ------------------------------------------------------------ analysis
    cdef void _bump_var(self, int v):
        cdef int u
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(self.nvars):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
        if self.heap_idx[v] >= 0:
            self._heap_up(self.heap_idx[v])

    cdef void _bump_clause(self, int cid):
        cdef size_t k
        self.cl_act[cid] += self.cla_inc
        if self.cl_act[cid] > 1e20:
            for k in range(self.learnts.size()):
                self.cl_act[self.learnts[k]] *= 1e-20
            self.cla_inc *= 1e-20

    cdef int _analyze(self, int confl, vector[int]& keep):
        cdef vector[int] learnt
        cdef int path_c = 0
        cdef int p = -1
        cdef int index = <int>self.trail.size() - 1
        cdef int dl = <int>self.trail_lim.size()
        cdef int start, q, v, r, u, mx, tmp, bt
        cdef size_t k, t
        cdef vector[int]* c
        cdef vector[int]* rc
        cdef bint redundant
        learnt.push_back(0)
        while True:
            if self.cl_learnt[confl]:
                self._bump_clause(confl)
            c = &self.cl_lits[confl]
            start = 0 if p == -1 else 1
            for k in range(start, c.size()):
                q = c[0][k]
                v = q >> 1
                if not self.seen[v] and self.level[v] > 0:
                    self._bump_var(v)
                    self.seen[v] = 1
                    if self.level[v] >= dl:
                        path_c += 1
                    else:
                        learnt.push_back(q)
            while not self.seen[self.trail[index] >> 1]:
                index -= 1
            p = self.trail[index]
            index -= 1
            confl = self.reason[p >> 1]
            self.seen[p >> 1] = 0
            path_c -= 1
            if path_c == 0:
                break
        learnt[0] = p ^ 1
        keep.clear()
        keep.push_back(learnt[0])
        for k in range(1, learnt.size()):
            q = learnt[k]
            r = self.reason[q >> 1]
            if r == -1:
                keep.push_back(q)
                continue
            rc = &self.cl_lits[r]
            redundant = True
            for t in range(1, rc.size()):
                u = rc[0][t] >> 1
                if not self.seen[u] and self.level[u] > 0:
                    redundant = False
                    break
            if not redundant:
                keep.push_back(q)
        for k in range(1, learnt.size()):
            self.seen[learnt[k] >> 1] = 0
        bt = 0
        if keep.size() > 1:
            mx = 1
            for k in range(2, keep.size()):
                if self.level[keep[k] >> 1] > self.level[keep[mx] >> 1]:
                    mx = <int>k
            tmp = keep[1]
            keep[1] = keep[mx]
            keep[mx] = tmp
            bt = self.level[keep[1] >> 1]
        return bt

    cdef void _cancel_until(self, int lvl):
        cdef int lim, c, v
        if <int>self.trail_lim.size() <= lvl:
            return
        lim = self.trail_lim[lvl]
        c = <int>self.trail.size() - 1
        while c >= lim:
            v = self.trail[c] >> 1
            self.phase[v] = self.trail[c] & 1
            self.assigns[v] = UNDEF
            self.reason[v] = -1
            self._heap_insert(v)
            c -= 1
        self.trail.resize(lim)
        self.trail_lim.resize(lvl)
        self.qhead = <int>self.trail.size()

    cdef bint _locked(self, int cid):
        cdef int first = self.cl_lits[cid][0]
        return self.reason[first >> 1] == cid and self._value(first) == 1

    cdef void _reduce_db(self):
        cdef vector[pair[double, int]] order
        cdef size_t k, half, removed
        cdef int c, lit
        cdef vector[int] kept
        cdef vector[int]* ws
        cdef size_t i, j
        for k in range(self.learnts.size()):
            c = self.learnts[k]
            order.push_back(pair[double, int](self.cl_act[c], c))
        cpp_sort(order.begin(), order.end())
        half = order.size() // 2
        removed = 0
        for k in range(order.size()):
            if removed >= half:
                break
            c = order[k].second
            if self.cl_lits[c].size() > 2 and not self._locked(c):
                self.cl_deleted[c] = 1
                removed += 1
        if removed:
            for k in range(self.learnts.size()):
                c = self.learnts[k]
                if not self.cl_deleted[c]:
                    kept.push_back(c)
            self.learnts = kept
            for lit in range(2 * self.nvars):
                ws = &self.watches[lit]
                j = 0
                for i in range(ws.size()):
                    if not self.cl_deleted[ws[0][i]]:
                        ws[0][j] = ws[0][i]
                        j += 1
                ws.resize(j)

    # -------------------------------------------------------------- search
    cdef int _pick_branch(self):
        cdef int v
        while self.heap.size() > 0:
            v = self._heap_pop()
            if self.assigns[v] == UNDEF:
                return 2 * v + self.phase[v]
        return -1

    cdef int _search(self, long nof_conflicts, vector[int]& assumptions, long budget):
        cdef long conflict_c = 0
        cdef int confl, bt, cid, nxt, p, val
        cdef vector[int] learnt
        while True:
            confl = self._propagate()
            if confl != -1:
                self.conflicts += 1
                conflict_c += 1
                if self.trail_lim.size() == 0:
                    self.ok = False
                    return UNSAT
                bt = self._analyze(confl, learnt)
                self._cancel_until(bt)
                if learnt.size() == 1:
                    self._enqueue(learnt[0], -1)
                else:
                    cid = self._attach(learnt, 1)
                    self.learnts.push_back(cid)
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
                if <double>(<long>self.learnts.size() - <long>self.trail.size()) >= self.max_learnts:
                    self._reduce_db()
                    self.max_learnts *= 1.1
                nxt = -1
                while self.trail_lim.size() < assumptions.size():
                    p = assumptions[self.trail_lim.size()]
                    val = self._value(p)
                    if val == 1:
                        self.trail_lim.push_back(<int>self.trail.size())
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
                self.trail_lim.push_back(<int>self.trail.size())
                self._enqueue(nxt, -1)

    def solve(self, assumptions=(), long conflict_limit=-1):
        if not self.ok:
            return UNSAT
        cdef vector[int] assum
        cdef int v
        cdef long budget
        cdef int status
        cdef long curr_restarts = 0
        cdef long nof
        for x in assumptions:
            v = abs(x) - 1
            while v >= self.nvars:
                self._new_var()
            assum.push_back(2 * v + (1 if x < 0 else 0))
        self.max_learnts = max(2000.0, self.n_original / 3.0)
        budget = -1 if conflict_limit < 0 else self.conflicts + conflict_limit
        status = -2
        while status == -2:
            nof = <long>(luby(2.0, curr_restarts) * RESTART_FIRST)
            status = self._search(nof, assum, budget)
            curr_restarts += 1
        cdef bytearray model
        cdef unsigned char* buf
        if status == SAT:
            model = bytearray(self.nvars)
            buf = model
            for v in range(self.nvars):
                buf[v] = 1 if self.assigns[v] == 1 else 0
            self.model = model
        self._cancel_until(0)
        return status

    def get_model(self):
        return bytes(self.model)

    def num_vars(self):
        return self.nvars

    def num_clauses(self):
        return self.n_original

    def stats(self):
        return {
            "conflicts": self.conflicts,
            "decisions": self.decisions,
            "propagations": self.propagations,
            "learnts": self.learnts.size(),
        }
