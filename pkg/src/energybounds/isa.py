"""Toy XS1-flavoured instruction set: operands, instructions and the parser.

Source format::

    <fact>:
      01: entsp 0x2
      02: stw   r0, sp[0x1]
      ...
      12: bl    <fact>

Operands are registers ``rN`` (0..11), stack slots ``sp[0xK]``, data-segment
cells indexed by a register ``dp[rN]``, immediates ``0xK`` and targets
``<label>``.  Numeric addresses are labels only; fallthrough follows textual
order.  ``#`` starts a comment.

Opcode semantics (``d`` destination, ``a``/``b`` sources, ``b`` may be an
immediate for the binary ops)::

    entsp k          open a k-word frame          ref {}     def {}
    retsp k          close frame and return       ref {}     def {}
    stw   v, m       m <- v                       ref {v,*}  def {m}
    ldw   d, m       d <- m                       ref {m,*}  def {d}
    ldc   d, k       d <- k                       ref {}     def {d}
    add..shr d,a,b   d <- a op b                  ref {a,b}  def {d}
    not/neg  d, a    d <- op a                    ref {a}    def {d}
    mkmsk d, k       d <- low k bits set          ref {}     def {d}
    bf/bt c, <t>     branch if c ==0 / !=0        ref {c}    def {}
    bu    <t>        jump                         ref {}     def {}
    bl    <f>        call                         ref {}     def {}

``*`` is the index register of a ``dp[rN]`` operand, read to form the address.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

NUM_REGISTERS = 12
FRAME_LIMIT = 256


class IsaError(Exception):
    """Raised for malformed assembly.  ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True, order=True)
class Register:
    index: int

    def __str__(self) -> str:
        return f"r{self.index}"


@dataclass(frozen=True, order=True)
class StackSlot:
    offset: int

    def __str__(self) -> str:
        return f"sp[{self.offset:#x}]"


@dataclass(frozen=True, order=True)
class DataSlot:
    """Data-segment word addressed by the value of ``index``."""

    index: Register

    def __str__(self) -> str:
        return f"dp[{self.index}]"


@dataclass(frozen=True, order=True)
class HarnessSlot:
    """Fixed cell of a harness frame; replaces a ``dp`` operand in isolation.

    ``addr`` is the original index register: it is still read because the
    address computation is part of the instruction's energy.
    """

    slot: int
    addr: Register
    origin: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"hs[{self.slot:#x}]"


@dataclass(frozen=True)
class Immediate:
    value: int

    def __str__(self) -> str:
        return f"{self.value:#x}"


@dataclass(frozen=True)
class Target:
    label: str

    def __str__(self) -> str:
        return f"<{_render_label(self.label)}>"


Operand = Union[Register, StackSlot, DataSlot, HarnessSlot, Immediate, Target]
Location = Union[Register, StackSlot, DataSlot, HarnessSlot]
MEMORY_OPERANDS = (StackSlot, DataSlot, HarnessSlot)

BINARY_OPS = ("add", "sub", "mul", "lss", "leq", "eq", "and", "or", "xor", "shl", "shr")
UNARY_OPS = ("not", "neg")
COST_TAG_OPS = ("entsp", "retsp", "bl")
OPCODES = (
    "entsp", "retsp", "stw", "ldw", "ldc", *BINARY_OPS, *UNARY_OPS,
    "mkmsk", "bf", "bt", "bu", "bl",
)

# operand kinds per position: R register, M memory, I immediate, T target, X reg|imm
_SIGNATURES: dict[str, str] = {
    "entsp": "I", "retsp": "I", "stw": "RM", "ldw": "RM", "ldc": "RI",
    **{op: "RRX" for op in BINARY_OPS}, **{op: "RR" for op in UNARY_OPS},
    "mkmsk": "RI", "bf": "RT", "bt": "RT", "bu": "T", "bl": "T",
}


@dataclass(frozen=True)
class Instruction:
    address: str
    opcode: str
    operands: tuple[Operand, ...]

    def __str__(self) -> str:
        ops = ", ".join(str(o) for o in self.operands)
        return f"{_render_label(self.address)}: {self.opcode} {ops}".rstrip()

    @property
    def is_branch(self) -> bool:
        return self.opcode in ("bf", "bt", "bu")

    @property
    def is_conditional(self) -> bool:
        return self.opcode in ("bf", "bt")

    @property
    def is_call(self) -> bool:
        return self.opcode == "bl"

    @property
    def is_return(self) -> bool:
        return self.opcode == "retsp"

    @property
    def target(self) -> str | None:
        for op in self.operands:
            if isinstance(op, Target):
                return op.label
        return None


@dataclass(frozen=True)
class Function:
    name: str
    instructions: tuple[Instruction, ...]

    def index_of(self, label: str) -> int:
        for i, ins in enumerate(self.instructions):
            if ins.address == label:
                return i
        raise KeyError(label)


@dataclass(frozen=True)
class Program:
    functions: tuple[Function, ...]
    entry: str

    def function(self, name: str) -> Function:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.functions)


def normalize_label(label: str) -> str:
    """Numeric addresses compare by value: ``08``, ``008`` and ``8`` coincide."""
    label = label.strip()
    return str(int(label, 10)) if label.isdigit() else label


def _render_label(label: str) -> str:
    return label.zfill(2) if label.isdigit() else label


_INT_RE = re.compile(r"^(0x[0-9a-fA-F]+|\d+)$")
_REG_RE = re.compile(r"^r(\d+)$")
_SP_RE = re.compile(r"^sp\[\s*(0x[0-9a-fA-F]+|\d+)\s*\]$")
_DP_RE = re.compile(r"^dp\[\s*r(\d+)\s*\]$")
_TARGET_RE = re.compile(r"^<([^<>\s]+)>$")
_FUNC_RE = re.compile(r"^<([A-Za-z_][\w]*)>\s*:$")
_INSTR_RE = re.compile(r"^([\w.]+)\s*:\s*([a-z]+)\b\s*(.*)$")


def _parse_int(text: str) -> int:
    return int(text, 16) if text.lower().startswith("0x") else int(text, 10)


def _parse_operand(text: str, lineno: int) -> Operand:
    text = text.strip()
    if m := _REG_RE.match(text):
        idx = int(m.group(1))
        if idx >= NUM_REGISTERS:
            raise IsaError(f"register index out of range: {text}", lineno)
        return Register(idx)
    if m := _SP_RE.match(text):
        off = _parse_int(m.group(1))
        if off >= FRAME_LIMIT:
            raise IsaError(f"stack offset beyond frame limit: {text}", lineno)
        return StackSlot(off)
    if m := _DP_RE.match(text):
        idx = int(m.group(1))
        if idx >= NUM_REGISTERS:
            raise IsaError(f"register index out of range: {text}", lineno)
        return DataSlot(Register(idx))
    if m := _TARGET_RE.match(text):
        return Target(normalize_label(m.group(1)))
    if _INT_RE.match(text):
        value = _parse_int(text)
        if value >= 1 << 32:
            raise IsaError(f"immediate wider than 32 bits: {text}", lineno)
        return Immediate(value)
    raise IsaError(f"bad operand {text!r}", lineno)


def _kind_ok(kind: str, op: Operand) -> bool:
    if kind == "R":
        return isinstance(op, Register)
    if kind == "M":
        return isinstance(op, (StackSlot, DataSlot))
    if kind == "I":
        return isinstance(op, Immediate)
    if kind == "T":
        return isinstance(op, Target)
    return isinstance(op, (Register, Immediate))


def parse_instruction(line: str, lineno: int = 1) -> Instruction:
    m = _INSTR_RE.match(line.strip())
    if not m:
        raise IsaError(f"syntax error: {line.strip()!r}", lineno)
    address, opcode, rest = m.groups()
    if opcode not in _SIGNATURES:
        raise IsaError(f"unknown opcode {opcode!r}", lineno)
    operands = tuple(_parse_operand(t, lineno) for t in rest.split(",")) if rest.strip() else ()
    sig = _SIGNATURES[opcode]
    if len(operands) != len(sig):
        raise IsaError(f"{opcode} expects {len(sig)} operands, got {len(operands)}", lineno)
    for kind, op in zip(sig, operands):
        if not _kind_ok(kind, op):
            raise IsaError(f"operand {op} not allowed for {opcode}", lineno)
    return Instruction(normalize_label(address), opcode, operands)


def parse_program(text: str) -> Program:
    functions: list[tuple[str, list[tuple[Instruction, int]], int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _FUNC_RE.match(line):
            functions.append((m.group(1), [], lineno))
            continue
        ins = parse_instruction(line, lineno)
        if not functions:
            raise IsaError("instruction outside of a function", lineno)
        functions[-1][1].append((ins, lineno))
    if not functions:
        raise IsaError("no entry function")

    names = [name for name, _, _ in functions]
    if len(set(names)) != len(names):
        raise IsaError("duplicate function name")
    for name, body, lineno in functions:
        labels = [ins.address for ins, _ in body]
        if len(set(labels)) != len(labels):
            raise IsaError(f"duplicate address in <{name}>", lineno)
        for ins, ins_line in body:
            t = ins.target
            if t is None:
                continue
            if not (t in names if ins.is_call else t in labels):
                raise IsaError(f"unresolved target <{t}>", ins_line)
    return Program(
        tuple(Function(n, tuple(i for i, _ in b)) for n, b, _ in functions), names[0]
    )


def format_program(p: Program) -> str:
    out = []
    for f in p.functions:
        out.append(f"<{f.name}>:")
        out.extend(f"  {ins}" for ins in f.instructions)
    return "\n".join(out) + "\n"


def ref_def(ins: Instruction) -> tuple[tuple[Location, ...], tuple[Location, ...]]:
    """Locations read (in operand order) and written by ``ins``.

    Returned as ordered tuples so callers can derive first-read orderings.
    """
    op, ops = ins.opcode, ins.operands
    refs: list[Location] = []
    defs: list[Location] = []

    def read(o: Operand) -> None:
        if isinstance(o, DataSlot):
            read(o.index)
            refs.append(o)
        elif isinstance(o, HarnessSlot):
            read(o.addr)
            refs.append(o)
        elif isinstance(o, (Register, StackSlot)):
            if o not in refs:
                refs.append(o)

    if op == "stw":
        read(ops[0])
        mem = ops[1]
        if isinstance(mem, DataSlot):
            read(mem.index)
        elif isinstance(mem, HarnessSlot):
            read(mem.addr)
        defs.append(mem)
    elif op == "ldw":
        read(ops[1])
        defs.append(ops[0])
    elif op in BINARY_OPS:
        read(ops[1])
        read(ops[2])
        defs.append(ops[0])
    elif op in UNARY_OPS:
        read(ops[1])
        defs.append(ops[0])
    elif op in ("ldc", "mkmsk"):
        defs.append(ops[0])
    elif op in ("bf", "bt"):
        read(ops[0])
    deduped: list[Location] = []
    for r in refs:
        if r not in deduped:
            deduped.append(r)
    return tuple(deduped), tuple(defs)
