"""Mini instruction set: parsing, concrete semantics and modality.

Registers hold ``w``-bit words. Values are stored as unsigned integers in
``[0, 2**w)`` and read as signed or unsigned depending on the block's
interpretation. The carry flag ``C`` is the only flag that survives from one
instruction to the next.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

OPCODES = ("ADD", "SBC", "MOV", "EOR", "AND", "LSL", "NEG", "INC", "MUL")
ALIASES = {"XOR": "EOR"}

# opcodes taking a source operand, and those accepting an immediate there
BINARY = {"ADD", "SBC", "MOV", "EOR", "AND", "MUL"}
IMMEDIATE_OK = {"ADD", "SBC", "MOV", "EOR", "AND", "MUL"}
WRITES_CARRY = {"ADD", "SBC", "LSL", "NEG"}
READS_CARRY = {"SBC"}

MODE_ORDER = "OUPNE"
NUM_REGS = 8
MIN_WIDTH, MAX_WIDTH = 4, 64


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int) -> None:
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Instruction:
    op: str
    dst: int
    src: int | None = None
    imm: int | None = None
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def reads(self) -> tuple[int, ...]:
        if self.op == "MOV":
            return () if self.src is None else (self.src,)
        if self.src is not None:
            return (self.dst, self.src)
        return (self.dst,)

    def __str__(self) -> str:
        if self.src is not None:
            return f"{self.op} R{self.dst} R{self.src}"
        if self.imm is not None:
            return f"{self.op} R{self.dst} {self.imm}"
        return f"{self.op} R{self.dst}"


@dataclass(frozen=True)
class Block:
    instrs: tuple[Instruction, ...]
    width: int = 32
    signed: bool = True
    lsl_signed: bool = False
    outputs: tuple[int, ...] | None = None
    name: str = "block"
    regs: tuple[int, ...] = field(init=False)
    live_in: tuple[int, ...] = field(init=False)
    carry_in: bool = field(init=False)

    def __post_init__(self) -> None:
        if not MIN_WIDTH <= self.width <= MAX_WIDTH:
            raise ValueError(f"width {self.width} outside [{MIN_WIDTH}, {MAX_WIDTH}]")
        used: set[int] = set()
        written: set[int] = set()
        live: list[int] = []
        carry_set = False
        carry_in = False
        for ins in self.instrs:
            for r in ins.reads():
                if r not in written and r not in live:
                    live.append(r)
            used.update(ins.reads())
            used.add(ins.dst)
            written.add(ins.dst)
            if ins.op in READS_CARRY and not carry_set:
                carry_in = True
            if ins.op in WRITES_CARRY:
                carry_set = True
        if self.outputs is not None:
            missing = [r for r in self.outputs if r not in used]
            if missing:
                raise ValueError(f"output register R{missing[0]} is not used by the block")
        object.__setattr__(self, "regs", tuple(sorted(used)))
        object.__setattr__(self, "live_in", tuple(sorted(live)))
        object.__setattr__(self, "carry_in", carry_in)

    @property
    def outs(self) -> tuple[int, ...]:
        return self.regs if self.outputs is None else tuple(sorted(self.outputs))

    @property
    def state(self) -> tuple[int, ...]:
        """Registers described by input and output abstract states."""
        return tuple(sorted(set(self.live_in) | set(self.outs)))

    @property
    def multimodal(self) -> tuple[int, ...]:
        """Indices of instructions with more than one mode."""
        return tuple(i for i, ins in enumerate(self.instrs) if len(self.alphabet(i)) > 1)

    def alphabet(self, index: int) -> str:
        return modality(self.instrs[index], self.signed, self.lsl_signed)

    def with_width(self, width: int) -> "Block":
        return Block(self.instrs, width, self.signed, self.lsl_signed, self.outputs, self.name)

    def source(self) -> str:
        lines = [".signed" if self.signed else ".unsigned"]
        if self.lsl_signed:
            lines.append(".lsl signed")
        if self.outputs is not None:
            lines.append(".out " + " ".join(f"R{r}" for r in self.outputs))
        lines.extend(str(i) for i in self.instrs)
        return "\n".join(lines) + "\n"


def modality(ins: Instruction, signed: bool = True, lsl_signed: bool = False) -> str:
    """Mode alphabet of an instruction as a string over ``OUPNE``."""
    op = ins.op
    if op in ("MOV", "EOR", "AND"):
        return "E"
    if op == "LSL":
        return "OUPN" if (signed and lsl_signed) else "OE"
    if signed:
        return "OPN" if op == "INC" else "OUPN"
    if op in ("SBC", "NEG"):
        return "UE"
    return "OE"


_TOKEN = re.compile(r"\S+")
_REG = re.compile(r"[Rr]([0-9]+)$")
_LIT = re.compile(r"[+-]?(0[xX][0-9a-fA-F]+|[0-9]+)$")


def _parse_reg(tok: str, line: int, col: int) -> int:
    m = _REG.match(tok)
    if not m:
        raise ParseError(f"expected register, got {tok!r}", line, col)
    r = int(m.group(1))
    if r >= NUM_REGS:
        raise ParseError(f"register R{r} out of range R0..R{NUM_REGS - 1}", line, col)
    return r


def parse_block(
    text: str,
    width: int = 32,
    signed: bool | None = None,
    name: str = "block",
) -> Block:
    """Parse assembly text.

    Directives: ``.signed``, ``.unsigned``, ``.out R0 R1``, ``.lsl signed``
    and ``.lsl carry``. Explicit ``signed`` overrides the directive.
    """
    instrs: list[Instruction] = []
    interp = True
    lsl_signed = False
    outputs: tuple[int, ...] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        offset = 0
        for stmt in body.split(";"):
            toks = [(m.group(0).rstrip(","), m.start() + offset + 1) for m in _TOKEN.finditer(stmt)]
            offset += len(stmt) + 1
            toks = [(t, c) for t, c in toks if t]
            if not toks:
                continue
            head, col = toks[0]
            if head.startswith("."):
                key = head.lower()
                args = [t for t, _ in toks[1:]]
                if key == ".signed" and not args:
                    interp = True
                elif key == ".unsigned" and not args:
                    interp = False
                elif key == ".out":
                    outputs = tuple(_parse_reg(t, lineno, c) for t, c in toks[1:])
                elif key == ".lsl" and len(args) == 1 and args[0].lower() in ("signed", "carry"):
                    lsl_signed = args[0].lower() == "signed"
                else:
                    raise ParseError(f"bad directive {' '.join([head] + args)!r}", lineno, col)
                continue
            op = head.upper()
            op = ALIASES.get(op, op)
            if op not in OPCODES:
                raise ParseError(f"unknown opcode {head!r}", lineno, col)
            if len(toks) < 2:
                raise ParseError(f"{op} needs a destination register", lineno, col)
            dst = _parse_reg(toks[1][0], lineno, toks[1][1])
            src = imm = None
            if op in BINARY:
                if len(toks) != 3:
                    raise ParseError(f"{op} takes two operands", lineno, col)
                tok, tcol = toks[2]
                if _REG.match(tok):
                    src = _parse_reg(tok, lineno, tcol)
                elif _LIT.match(tok):
                    if op not in IMMEDIATE_OK:
                        raise ParseError(f"{op} does not take an immediate", lineno, tcol)
                    imm = int(tok, 0) % (1 << width)
                else:
                    raise ParseError(f"bad operand {tok!r}", lineno, tcol)
            elif len(toks) != 2:
                raise ParseError(f"{op} takes one operand", lineno, col)
            instrs.append(Instruction(op, dst, src, imm, lineno, col))
    if signed is not None:
        interp = signed
    try:
        return Block(tuple(instrs), width, interp, lsl_signed, outputs, name)
    except ValueError as exc:
        raise ParseError(str(exc), 0, 0) from exc


def to_signed(u: int, w: int) -> int:
    u &= (1 << w) - 1
    return u - (1 << w) if u >> (w - 1) else u


def to_unsigned(v: int, w: int) -> int:
    return v & ((1 << w) - 1)


def classify(ideal: int, w: int, signed: bool, alphabet: str) -> str:
    """Mode of an instruction from its ideal (unbounded) integer result."""
    if signed:
        lo, hi = -(1 << (w - 1)), (1 << (w - 1)) - 1
    else:
        lo, hi = 0, (1 << w) - 1
    if ideal > hi:
        return "O"
    if ideal < lo:
        return "U"
    if "E" in alphabet:
        return "E"
    return "P" if ideal >= 0 else "N"


def step(ins: Instruction, regs: dict[int, int], carry: int | None, w: int, signed: bool, lsl_signed: bool):
    """Execute one instruction. Returns (new carry, mode)."""
    mask = (1 << w) - 1
    rd = regs[ins.dst]
    rs = regs[ins.src] if ins.src is not None else ins.imm
    read = (lambda x: to_signed(x, w)) if signed else (lambda x: x)
    alpha = modality(ins, signed, lsl_signed)
    op = ins.op
    if op == "ADD":
        total = rd + rs
        res, carry, ideal = total & mask, total >> w, read(rd) + read(rs)
    elif op == "SBC":
        if carry is None:
            raise ValueError("SBC reads an undefined carry flag")
        diff = rd - rs - carry
        res, ideal = diff & mask, read(rd) - read(rs) - carry
        carry = 1 if diff < 0 else 0
    elif op == "MOV":
        res, ideal = rs, None
    elif op == "EOR":
        res, ideal = rd ^ rs, None
    elif op == "AND":
        res, ideal = rd & rs, None
    elif op == "LSL":
        res, carry = (rd << 1) & mask, rd >> (w - 1)
        if signed and lsl_signed:
            ideal = 2 * read(rd)
        else:
            ideal = rd << 1
    elif op == "NEG":
        res, carry, ideal = (-rd) & mask, 1 if rd else 0, -read(rd)
    elif op == "INC":
        res, ideal = (rd + 1) & mask, read(rd) + 1
    elif op == "MUL":
        res, ideal = (rd * rs) & mask, read(rd) * read(rs)
    else:  # pragma: no cover
        raise ValueError(op)
    regs[ins.dst] = res
    if alpha == "E":
        return carry, "E"
    if op == "LSL" and alpha == "OE":
        return carry, "O" if rd >> (w - 1) else "E"
    return carry, classify(ideal, w, signed, alpha)


def execute_concrete(block: Block, inputs: dict[int, int], carry: int | None = None):
    """Run a block on concrete inputs.

    ``inputs`` maps register numbers to integers (any representative modulo
    ``2**w``). Returns ``(outputs, modes, carry_out)`` where ``outputs`` maps
    every used register to its final unsigned value and ``modes`` is a string
    with one letter per multi-modal instruction.
    """
    w = block.width
    regs = {r: to_unsigned(inputs.get(r, 0), w) for r in block.regs}
    for r in block.live_in:
        if r not in inputs:
            raise ValueError(f"missing live-in R{r}")
    if block.carry_in and carry is None:
        raise ValueError("block reads the incoming carry flag; supply carry=0 or 1")
    modes = []
    for ins in block.instrs:
        carry, mode = step(ins, regs, carry, w, block.signed, block.lsl_signed)
        if len(modality(ins, block.signed, block.lsl_signed)) > 1:
            modes.append(mode)
    return regs, "".join(modes), carry
