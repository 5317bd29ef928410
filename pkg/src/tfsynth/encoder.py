"""Bit-blasting of blocks, modes and linear expressions into CNF.

Every gate gets a fresh variable and a full Tseitin definition, so circuits
are functional: the inputs of a block are free variables and everything
else is determined by them. Constraints (modes, bounds, blocking rows) are
never added as clauses. They are single literals handed to the solver as
assumptions, which keeps one clause store usable for any query.

Bit-vectors are lists of DIMACS literals, least significant bit first. The
literal ``TRUE`` (variable 1, fixed by a unit clause) and its negation
``FALSE`` stand for constant bits, and gate construction folds them away.
"""

from __future__ import annotations

from .isa import Block, Instruction, modality

TRUE = 1
FALSE = -1

Vec = list


class CnfBuilder:
    """Growing clause store with structural hashing of gates."""

    def __init__(self) -> None:
        self.nvars = 1
        self.clauses: list[list[int]] = [[TRUE]]
        self._cache: dict[tuple, int] = {}
        # gate output -> slice of ``clauses`` defining it; other clauses are ``free``
        self.spans: dict[int, tuple[int, int]] = {}
        self.free: list[int] = [0]

    # -- variables -------------------------------------------------------
    def new_var(self) -> int:
        self.nvars += 1
        return self.nvars

    def new_vec(self, width: int) -> Vec:
        return [self.new_var() for _ in range(width)]

    def add(self, clause) -> None:
        """Add a constraint clause (always loaded by every session)."""
        self.free.append(len(self.clauses))
        self.clauses.append(list(clause))

    def _define(self, out: int, clauses) -> None:
        start = len(self.clauses)
        self.clauses += clauses
        self.spans[out] = (start, len(self.clauses))

    # -- gates -----------------------------------------------------------
    def and2(self, a: int, b: int) -> int:
        if a == FALSE or b == FALSE or a == -b:
            return FALSE
        if a == TRUE or a == b:
            return b
        if b == TRUE:
            return a
        if a > b:
            a, b = b, a
        key = ("and", a, b)
        out = self._cache.get(key)
        if out is None:
            out = self.new_var()
            self._define(out, [[-out, a], [-out, b], [out, -a, -b]])
            self._cache[key] = out
        return out

    def or2(self, a: int, b: int) -> int:
        return -self.and2(-a, -b)

    def and_n(self, lits) -> int:
        seen: set[int] = set()
        for l in lits:
            if l == FALSE or -l in seen:
                return FALSE
            if l != TRUE:
                seen.add(l)
        if not seen:
            return TRUE
        if len(seen) == 1:
            return next(iter(seen))
        if len(seen) == 2:
            a, b = sorted(seen)
            return self.and2(a, b)
        key = ("andn",) + tuple(sorted(seen))
        out = self._cache.get(key)
        if out is None:
            out = self.new_var()
            self._define(out, [[-out, l] for l in key[1:]] + [[out] + [-l for l in key[1:]]])
            self._cache[key] = out
        return out

    def or_n(self, lits) -> int:
        return -self.and_n([-l for l in lits])

    def xor2(self, a: int, b: int) -> int:
        neg = False
        if abs(a) == 1:
            return -b if a == TRUE else b
        if abs(b) == 1:
            return -a if b == TRUE else a
        if a == b:
            return FALSE
        if a == -b:
            return TRUE
        if a < 0:
            a, neg = -a, not neg
        if b < 0:
            b, neg = -b, not neg
        if a > b:
            a, b = b, a
        key = ("xor", a, b)
        out = self._cache.get(key)
        if out is None:
            out = self.new_var()
            self._define(out, [[-out, a, b], [-out, -a, -b], [out, -a, b], [out, a, -b]])
            self._cache[key] = out
        return -out if neg else out

    def maj(self, a: int, b: int, c: int) -> int:
        for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
            if z == TRUE:
                return self.or2(x, y)
            if z == FALSE:
                return self.and2(x, y)
            if x == y:
                return x
            if x == -y:
                return z
        # majority is self-dual: maj(-a,-b,-c) = -maj(a,b,c)
        neg = sum(1 for l in (a, b, c) if l < 0) >= 2
        if neg:
            a, b, c = -a, -b, -c
        a, b, c = sorted((a, b, c))
        key = ("maj", a, b, c)
        out = self._cache.get(key)
        if out is None:
            out = self.new_var()
            self._define(out, [
                [-out, a, b], [-out, a, c], [-out, b, c],
                [out, -a, -b], [out, -a, -c], [out, -b, -c],
            ])
            self._cache[key] = out
        return -out if neg else out

    def ite(self, c: int, t: int, e: int) -> int:
        if c == TRUE or t == e:
            return t
        if c == FALSE:
            return e
        if t == TRUE or t == c:
            return self.or2(c, e)
        if t == FALSE or t == -c:
            return self.and2(-c, e)
        if e == TRUE or e == -c:
            return self.or2(-c, t)
        if e == FALSE or e == c:
            return self.and2(c, t)
        if c < 0:
            c, t, e = -c, e, t
        key = ("ite", c, t, e)
        out = self._cache.get(key)
        if out is None:
            out = self.new_var()
            self._define(out, [[-c, -t, out], [-c, t, -out], [c, -e, out], [c, e, -out]])
            self._cache[key] = out
        return out

    # -- vectors ---------------------------------------------------------
    @staticmethod
    def const(value: int, width: int) -> Vec:
        return [TRUE if (value >> i) & 1 else FALSE for i in range(width)]

    @staticmethod
    def ext(v: Vec, width: int, signed: bool) -> Vec:
        if width <= len(v):
            return list(v[:width])
        fill = v[-1] if signed else FALSE
        return list(v) + [fill] * (width - len(v))

    def adder(self, a: Vec, b: Vec, cin: int = FALSE) -> tuple[Vec, int]:
        out = []
        c = cin
        for x, y in zip(a, b):
            out.append(self.xor2(self.xor2(x, y), c))
            c = self.maj(x, y, c)
        return out, c

    def neg(self, a: Vec) -> Vec:
        return self.adder([-x for x in a], [FALSE] * len(a), TRUE)[0]

    def shl(self, a: Vec, k: int, width: int) -> Vec:
        return ([FALSE] * k + list(a))[:width]

    def mul_const(self, a: Vec, c: int, width: int) -> Vec:
        """``c * a`` for ``c >= 0`` by shift-and-add, modulo ``2**width``."""
        acc = [FALSE] * width
        k = 0
        while c:
            if c & 1:
                acc = self.adder(acc, self.shl(a, k, width))[0]
            c >>= 1
            k += 1
        return acc

    def mul_full(self, a: Vec, b: Vec, signed: bool) -> Vec:
        """Exact product of two ``w``-bit vectors as a ``2w``-bit vector."""
        w = len(a)
        n = 2 * w
        ax = self.ext(a, n, signed)
        acc = [FALSE] * n
        for i in range(w):
            row = [self.and2(b[i], x) for x in self.shl(ax, i, n)]
            if signed and i == w - 1:
                acc = self.adder(acc, [-x for x in row], TRUE)[0]
            else:
                acc = self.adder(acc, row)[0]
        return acc

    def eq_vec(self, a: Vec, b: Vec) -> int:
        return self.and_n([-self.xor2(x, y) for x, y in zip(a, b)])

    def is_zero(self, a: Vec) -> int:
        return self.and_n([-x for x in a])


# -- linear expressions ----------------------------------------------------


def linear_width(terms, const: int = 0) -> int:
    """Bits needed for a signed, wrap-free ``sum c_i * v_i + const``.

    ``terms`` holds ``(coef, width, signed)`` triples.
    """
    m = abs(const)
    for c, w, signed in terms:
        m += abs(c) * ((1 << (w - 1)) if signed else (1 << w) - 1)
    return 1 + m.bit_length()


def encode_linear(cnf: CnfBuilder, terms, const: int = 0, width: int | None = None) -> Vec:
    """Vector ``d`` with ``<d> = sum c_i * <v_i> + const`` and no wrap.

    ``terms`` is a list of ``(coef, vec, signed)``; the result is signed.
    """
    k = width or linear_width([(c, len(v), s) for c, v, s in terms], const)
    acc = cnf.const(const % (1 << k), k)
    for c, v, signed in terms:
        if c == 0:
            continue
        t = cnf.ext(v, k, signed)
        if abs(c) != 1:
            t = cnf.mul_const(t, abs(c), k)
        if c > 0:
            acc = cnf.adder(acc, t)[0]
        else:
            acc = cnf.adder(acc, [-x for x in t], TRUE)[0]
    return acc


def encode_monomial(cnf: CnfBuilder, vecs, signed: bool = True) -> Vec:
    """Exact product of several vectors, sign-extended to ``k*w + 1`` bits."""
    if len(vecs) < 2:
        raise ValueError("a monomial needs at least two factors")
    total = sum(len(v) for v in vecs) + 1
    if total > 129:
        raise ValueError(f"monomial needs {total} bits, limit is 129")
    prod = list(vecs[0])
    for v in vecs[1:]:
        w = max(len(prod), len(v))
        prod = cnf.mul_full(cnf.ext(prod, w, signed), cnf.ext(v, w, signed), signed)
    return cnf.ext(prod, total, signed)


def row_literal(cnf: CnfBuilder, terms, const: int, strict: bool = False) -> int:
    """Literal for ``sum c_i * v_i + const != 0`` (or ``> 0`` when strict)."""
    if not any(c for c, _, _ in terms):
        if strict:
            return TRUE if const > 0 else FALSE
        return TRUE if const != 0 else FALSE
    d = encode_linear(cnf, terms, const)
    nonzero = -cnf.is_zero(d)
    if strict:
        return cnf.and2(nonzero, -d[-1])
    return nonzero


def encode_row_violation(cnf: CnfBuilder, rows) -> int:
    """Literal true exactly when at least one row ``sum + const = 0`` fails.

    ``rows`` is a list of ``(terms, const)``; no rows gives ``FALSE``.
    """
    return cnf.or_n([row_literal(cnf, terms, const) for terms, const in rows])


def fix_literals(vec: Vec, value: int) -> list[int]:
    """Assumption literals pinning ``vec`` to ``value`` (two's complement)."""
    width = len(vec)
    lo = -(1 << (width - 1))
    if not lo <= value < (1 << width):
        raise ValueError(f"value {value} does not fit in {width} bits")
    value %= 1 << width
    return [v if (value >> i) & 1 else -v for i, v in enumerate(vec)]


def le_literal(cnf: CnfBuilder, a_terms, b_terms) -> int:
    """Literal for ``sum a_terms <= sum b_terms``."""
    terms = list(b_terms) + [(-c, v, s) for c, v, s in a_terms]
    d = encode_linear(cnf, terms)
    return -d[-1]


# -- blocks ----------------------------------------------------------------


class ModeSite:
    """Bits needed to express the modes of one multi-modal instruction."""

    def __init__(self, index: int, ins: Instruction, alphabet: str, lits: dict[str, int]) -> None:
        self.index = index
        self.ins = ins
        self.alphabet = alphabet
        self.lits = lits


class BlockEncoding:
    """SSA circuit of a block over a shared :class:`CnfBuilder`."""

    def __init__(self, block: Block, cnf: CnfBuilder | None = None) -> None:
        self.block = block
        self.cnf = cnf or CnfBuilder()
        w = block.width
        c = self.cnf
        self.varmap: dict[str, Vec] = {}
        self.inputs: dict[int, Vec] = {}
        cur: dict[int, Vec] = {}
        for r in block.regs:
            v = c.new_vec(w)
            self.inputs[r] = v
            cur[r] = v
            self.varmap[f"R{r}"] = v
        carry = c.new_var() if block.carry_in else None
        self.carry_in = carry
        if carry is not None:
            self.varmap["C"] = [carry]
        self.sites: list[ModeSite] = []
        for idx, ins in enumerate(block.instrs):
            carry = self._step(idx, ins, cur, carry)
            self.varmap[f"R{ins.dst}#{idx + 1}"] = cur[ins.dst]
            if carry is not None:
                self.varmap[f"C#{idx + 1}"] = [carry]
        self.outputs = {r: cur[r] for r in block.regs}
        for r in block.regs:
            self.varmap[f"R{r}'"] = cur[r]
        self.carry_out = carry

    def _step(self, idx: int, ins: Instruction, cur: dict[int, Vec], carry):
        b = self.block
        c = self.cnf
        w = b.width
        d = cur[ins.dst]
        if ins.src is not None:
            s = cur[ins.src]
        elif ins.imm is not None:
            s = c.const(ins.imm, w)
        else:
            s = None
        alpha = modality(ins, b.signed, b.lsl_signed)
        lits: dict[str, int] = {}
        op = ins.op
        if op in ("ADD", "SBC", "INC", "NEG"):
            if op == "ADD":
                x, y, cin = d, s, FALSE
            elif op == "SBC":
                x, y, cin = d, [-t for t in s], -carry
            elif op == "INC":
                x, y, cin = d, [FALSE] * w, TRUE
            else:
                x, y, cin = [-t for t in d], [FALSE] * w, TRUE
            res, cout = c.adder(x, y, cin)
            if b.signed:
                lits = self._signed_adder_modes(x[-1], y[-1], res[-1])
            elif op == "SBC":
                lits = {"U": -cout, "E": cout}
            elif op == "NEG":
                nz = -c.is_zero(d)
                lits = {"U": nz, "E": -nz}
            else:
                lits = {"O": cout, "E": -cout}
            if op == "ADD":
                carry = cout
            elif op == "SBC":
                carry = -cout
            elif op == "NEG":
                carry = -c.is_zero(d)
        elif op == "MOV":
            res = list(s)
        elif op == "EOR":
            res = [c.xor2(x, y) for x, y in zip(d, s)]
        elif op == "AND":
            res = [c.and2(x, y) for x, y in zip(d, s)]
        elif op == "LSL":
            res = [FALSE] + list(d[:-1])
            hi, nxt = d[-1], d[-2]
            if alpha == "OE":
                lits = {"O": hi, "E": -hi}
            else:
                lits = {
                    "O": c.and2(-hi, nxt),
                    "U": c.and2(hi, -nxt),
                    "P": c.and2(-hi, -nxt),
                    "N": c.and2(hi, nxt),
                }
            carry = hi
        elif op == "MUL":
            p = c.mul_full(d, s, b.signed)
            res = p[:w]
            if b.signed:
                top = p[w - 1:]
                exact = c.or2(c.and_n(top), c.and_n([-t for t in top]))
                lits = {
                    "O": c.and2(-exact, -p[-1]),
                    "U": c.and2(-exact, p[-1]),
                    "P": c.and2(exact, -p[w - 1]),
                    "N": c.and2(exact, p[w - 1]),
                }
            else:
                ov = c.or_n(p[w:])
                lits = {"O": ov, "E": -ov}
        else:  # pragma: no cover
            raise ValueError(op)
        cur[ins.dst] = res
        if len(alpha) > 1:
            self.sites.append(ModeSite(idx, ins, alpha, {m: lits[m] for m in alpha}))
        return carry

    def _signed_adder_modes(self, a: int, b: int, r: int) -> dict[str, int]:
        c = self.cnf
        return {
            "O": c.and_n([-a, -b, r]),
            "U": c.and_n([a, b, -r]),
            "P": c.and2(c.or2(-a, -b), -r),
            "N": c.and2(c.or2(a, b), r),
        }

    # -- queries ---------------------------------------------------------
    def mode_literal(self, site: int, mode: str) -> int:
        """Literal for mode ``mode`` of the ``site``-th multi-modal instruction."""
        s = self.sites[site]
        if mode not in s.alphabet:
            raise ValueError(f"mode {mode!r} not in alphabet {s.alphabet!r} of {s.ins}")
        return s.lits[mode]

    def mode_assumptions(self, modes: str) -> list[int]:
        if len(modes) > len(self.sites):
            raise ValueError("mode vector longer than the number of multi-modal instructions")
        return [self.mode_literal(i, m) for i, m in enumerate(modes)]

    def reg_terms(self, coeffs: dict[int, int], primed: bool = False):
        src = self.outputs if primed else self.inputs
        return [(k, src[r], self.block.signed) for r, k in coeffs.items() if k]


def encode_block(block: Block, cnf: CnfBuilder | None = None) -> BlockEncoding:
    return BlockEncoding(block, cnf)


def encode_mode(enc: BlockEncoding, site: int, mode: str) -> int:
    return enc.mode_literal(site, mode)


def read_vec(model_value, vec: Vec, signed: bool) -> int:
    """Integer value of ``vec`` under ``model_value(lit) -> bool``."""
    u = 0
    for i, l in enumerate(vec):
        if l == TRUE or (l != FALSE and model_value(l)):
            u |= 1 << i
    if signed and vec and u >> (len(vec) - 1):
        u -= 1 << len(vec)
    return u
