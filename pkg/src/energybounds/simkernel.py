"""Deterministic virtual chip with an instruction-level energy model.

Per executed instruction::

    base(op)
      + switch_weight   * hamming(prev_bus, bus)
      + mul_data_weight * (popcount(a) + popcount(b))        mul only
      + mem_addr_weight * popcount(addr ^ prev_addr)         ldw/stw only

``bus`` is the two source-operand values (ref'd locations, in operand order)
concatenated, each half ``word_bits`` wide.  ``prev_bus`` and ``prev_addr``
restart at zero on every block entry.  Cost-tag instructions (entsp, retsp,
bl) charge ``base`` only and also restart the switching state, which makes a
block visit's energy a pure function of its gen-set values.

All energies are exact :class:`fractions.Fraction` picojoules.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .cfg import Cfg, HarnessBlock, extract_blocks
from .isa import (
    BINARY_OPS,
    COST_TAG_OPS,
    FRAME_LIMIT,
    NUM_REGISTERS,
    DataSlot,
    HarnessSlot,
    Immediate,
    Instruction,
    Program,
    Register,
    StackSlot,
    ref_def,
)

DATA_WORDS = 256
STACK_WORDS = 8192
STEP_LIMIT = 10**7
MAX_EXHAUSTIVE_BITS = 24


class SimulationError(Exception):
    pass


class UninitializedRead(SimulationError):
    pass


class StepLimitExceeded(SimulationError):
    pass


class DomainTooLarge(ValueError):
    pass


def _frac(x) -> Fraction:
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)


@dataclass(frozen=True)
class EnergyModelParams:
    base_pJ: Mapping[str, Fraction]
    switch_weight_pJ_per_bit: Fraction = Fraction(0)
    mul_data_weight_pJ_per_bit: Fraction = Fraction(0)
    mem_addr_weight_pJ_per_bit: Fraction = Fraction(0)

    def __post_init__(self):
        weights = [
            *self.base_pJ.values(),
            self.switch_weight_pJ_per_bit,
            self.mul_data_weight_pJ_per_bit,
            self.mem_addr_weight_pJ_per_bit,
        ]
        if any(w < 0 for w in weights):
            raise ValueError("energy model weights must be non-negative")

    def base(self, opcode: str) -> Fraction:
        return self.base_pJ.get(opcode, Fraction(0))

    @classmethod
    def from_dict(cls, d: Mapping) -> "EnergyModelParams":
        return cls(
            {k: _frac(v) for k, v in d.get("base_pJ", {}).items()},
            _frac(d.get("switch_weight_pJ_per_bit", 0)),
            _frac(d.get("mul_data_weight_pJ_per_bit", 0)),
            _frac(d.get("mem_addr_weight_pJ_per_bit", 0)),
        )

    def to_dict(self) -> dict:
        return {
            "base_pJ": {k: str(v) for k, v in sorted(self.base_pJ.items())},
            "switch_weight_pJ_per_bit": str(self.switch_weight_pJ_per_bit),
            "mul_data_weight_pJ_per_bit": str(self.mul_data_weight_pJ_per_bit),
            "mem_addr_weight_pJ_per_bit": str(self.mem_addr_weight_pJ_per_bit),
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def scaled(self, factor) -> "EnergyModelParams":
        f = _frac(factor)
        return EnergyModelParams(
            {k: v * f for k, v in self.base_pJ.items()},
            self.switch_weight_pJ_per_bit * f,
            self.mul_data_weight_pJ_per_bit * f,
            self.mem_addr_weight_pJ_per_bit * f,
        )

    # integer view used by the vectorised executor: energy = units * unit
    @property
    def unit(self) -> Fraction:
        dens = [w.denominator for w in self.base_pJ.values()]
        dens += [
            self.switch_weight_pJ_per_bit.denominator,
            self.mul_data_weight_pJ_per_bit.denominator,
            self.mem_addr_weight_pJ_per_bit.denominator,
        ]
        return Fraction(1, math.lcm(*dens))

    def units(self, value: Fraction) -> int:
        q = value / self.unit
        assert q.denominator == 1
        return q.numerator


def load_model(path: str | Path | None = None) -> EnergyModelParams:
    """Load a model JSON file; ``None`` or ``"default"`` gives the shipped model."""
    if path is None or str(path) == "default":
        text = resources.files("energybounds").joinpath("models/default.json").read_text()
    else:
        text = Path(path).read_text()
    return EnergyModelParams.from_dict(json.loads(text))


def zero_model() -> EnergyModelParams:
    return EnergyModelParams({})


# ---------------------------------------------------------------- semantics


def _signed(x: int, w: int) -> int:
    return x - (1 << w) if x >> (w - 1) else x


def alu(op: str, a: int, b: int, w: int) -> int:
    mask = (1 << w) - 1
    if op == "add":
        return (a + b) & mask
    if op == "sub":
        return (a - b) & mask
    if op == "mul":
        return (a * b) & mask
    if op == "and":
        return a & b
    if op == "or":
        return a | b
    if op == "xor":
        return a ^ b
    if op == "shl":
        return (a << b) & mask if b < w else 0
    if op == "shr":
        return a >> b if b < w else 0
    if op == "lss":
        return int(_signed(a, w) < _signed(b, w))
    if op == "leq":
        return int(_signed(a, w) <= _signed(b, w))
    if op == "eq":
        return int(a == b)
    if op == "not":
        return ~a & mask
    if op == "neg":
        return -a & mask
    raise ValueError(op)


def _mkmsk(k: int, w: int) -> int:
    return (1 << min(k, w)) - 1


@dataclass
class MachineState:
    word_bits: int = 32
    registers: list[int] = field(default_factory=lambda: [0] * NUM_REGISTERS)
    stack: list[int] = field(default_factory=lambda: [0] * STACK_WORDS)
    data: list[int] = field(default_factory=lambda: [0] * DATA_WORDS)
    sp: int = STACK_WORDS
    pc: tuple[str, int] = ("", 0)
    prev_bus: int = 0
    prev_addr: int = 0
    call_stack: list[tuple[str, int]] = field(default_factory=list)

    def reset_switching(self) -> None:
        self.prev_bus = 0
        self.prev_addr = 0


def _charge(
    ins: Instruction,
    sources: Sequence[int],
    addr: int | None,
    s: MachineState,
    m: EnergyModelParams,
) -> Fraction:
    """Energy of ``ins`` given its source values; updates the switching state."""
    if ins.opcode in COST_TAG_OPS:
        s.reset_switching()
        return m.base(ins.opcode)
    w = s.word_bits
    a = sources[0] if len(sources) > 0 else 0
    b = sources[1] if len(sources) > 1 else 0
    bus = (a << w) | b
    e = m.base(ins.opcode) + m.switch_weight_pJ_per_bit * (bus ^ s.prev_bus).bit_count()
    if ins.opcode == "mul":
        e += m.mul_data_weight_pJ_per_bit * (a.bit_count() + b.bit_count())
    if addr is not None:
        e += m.mem_addr_weight_pJ_per_bit * (addr ^ s.prev_addr).bit_count()
        s.prev_addr = addr
    s.prev_bus = bus
    return e


def instruction_energy(ins: Instruction, s: MachineState, m: EnergyModelParams) -> Fraction:
    """Energy of executing ``ins`` in state ``s`` (registers, stack frame at sp, data).

    Does not execute the instruction; the switching state of ``s`` is updated
    as if it had been issued.
    """
    ctx = _ProgramContext(s)
    sources = [ctx.read(loc) for loc in ref_def(ins)[0]]
    return _charge(ins, sources, ctx.address(ins), s, m)


class _ProgramContext:
    """Location access for whole-program execution."""

    def __init__(self, s: MachineState):
        self.s = s

    def read(self, loc) -> int:
        s = self.s
        if isinstance(loc, Register):
            return s.registers[loc.index]
        if isinstance(loc, StackSlot):
            return s.stack[self._slot(loc.offset)]
        if isinstance(loc, DataSlot):
            return s.data[self._cell(s.registers[loc.index.index])]
        raise SimulationError(f"cannot read {loc}")

    def write(self, loc, value: int) -> None:
        s = self.s
        value &= (1 << s.word_bits) - 1
        if isinstance(loc, Register):
            s.registers[loc.index] = value
        elif isinstance(loc, StackSlot):
            s.stack[self._slot(loc.offset)] = value
        elif isinstance(loc, DataSlot):
            s.data[self._cell(s.registers[loc.index.index])] = value
        else:
            raise SimulationError(f"cannot write {loc}")

    def address(self, ins: Instruction) -> int | None:
        if ins.opcode not in ("ldw", "stw"):
            return None
        mem = ins.operands[1]
        if isinstance(mem, StackSlot):
            return mem.offset
        return self.s.registers[mem.index.index]

    def _slot(self, offset: int) -> int:
        i = self.s.sp + offset
        if not 0 <= i < STACK_WORDS:
            raise SimulationError("out-of-bounds stack access")
        return i

    def _cell(self, addr: int) -> int:
        if not 0 <= addr < DATA_WORDS:
            raise SimulationError(f"out-of-bounds data access at {addr:#x}")
        return addr


def _execute(ins: Instruction, ctx, w: int) -> None:
    """Apply the data effect of a non-control instruction."""
    op, ops = ins.opcode, ins.operands

    def val(o) -> int:
        return o.value & ((1 << w) - 1) if isinstance(o, Immediate) else ctx.read(o)

    if op == "stw":
        ctx.write(ops[1], val(ops[0]))
    elif op == "ldw":
        ctx.write(ops[0], val(ops[1]))
    elif op == "ldc":
        ctx.write(ops[0], val(ops[1]))
    elif op == "mkmsk":
        ctx.write(ops[0], _mkmsk(ops[1].value, w))
    elif op in BINARY_OPS:
        ctx.write(ops[0], alu(op, val(ops[1]), val(ops[2]), w))
    elif op in ("not", "neg"):
        ctx.write(ops[0], alu(op, val(ops[1]), 0, w))


# ------------------------------------------------------------ harness runs


class _HarnessContext:
    def __init__(self, w: int):
        self.w = w
        self.values: dict = {}

    def read(self, loc) -> int:
        try:
            return self.values[loc]
        except KeyError:
            raise UninitializedRead(f"read of uninitialised {loc}") from None

    def write(self, loc, value: int) -> None:
        if isinstance(loc, StackSlot) and loc.offset >= FRAME_LIMIT:
            raise SimulationError("out-of-bounds stack access")
        self.values[loc] = value & ((1 << self.w) - 1)

    def address(self, ins: Instruction) -> int | None:
        if ins.opcode not in ("ldw", "stw"):
            return None
        mem = ins.operands[1]
        if isinstance(mem, StackSlot):
            return mem.offset
        if isinstance(mem, HarnessSlot):
            return self.read(mem.addr)
        raise SimulationError(f"unpinned memory operand {mem} in harness block")


def run_block(
    b: HarnessBlock,
    inputs: Sequence[int],
    m: EnergyModelParams,
    word_bits: int = 32,
) -> Fraction:
    """Energy of one isolated execution of ``b`` with gen locations set to ``inputs``."""
    if len(inputs) != len(b.inputs):
        raise ValueError(f"{b.id} takes {len(b.inputs)} inputs, got {len(inputs)}")
    ctx = _HarnessContext(word_bits)
    for loc, v in zip(b.inputs, inputs):
        ctx.write(loc, v)
    s = MachineState(word_bits=word_bits, registers=[], stack=[], data=[])
    total = Fraction(0)
    for ins in b.instructions:
        sources = [ctx.read(loc) for loc in ref_def(ins)[0]]
        total += _charge(ins, sources, ctx.address(ins), s, m)
        _execute(ins, ctx, word_bits)
    return total


def _popcount(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(x).astype(np.int64)


def run_block_batch(
    b: HarnessBlock,
    inputs: np.ndarray,
    m: EnergyModelParams,
    word_bits: int = 32,
) -> np.ndarray:
    """Vectorised :func:`run_block`: ``inputs`` is (N, k); returns energies in ``m.unit``."""
    inputs = np.asarray(inputs, dtype=np.uint64)
    n = inputs.shape[0]
    if inputs.ndim != 2 or inputs.shape[1] != len(b.inputs):
        raise ValueError(f"{b.id} takes {len(b.inputs)} inputs")
    w = word_bits
    mask = np.uint64((1 << w) - 1)
    sw = m.units(m.switch_weight_pJ_per_bit)
    mw = m.units(m.mul_data_weight_pJ_per_bit)
    aw = m.units(m.mem_addr_weight_pJ_per_bit)
    vals: dict = {loc: inputs[:, j] & mask for j, loc in enumerate(b.inputs)}
    zero = np.zeros(n, dtype=np.uint64)
    prev_bus = zero
    prev_addr = zero
    total = np.zeros(n, dtype=np.int64)
    shift = np.uint64(w)

    def read(loc):
        if loc not in vals:
            raise UninitializedRead(f"read of uninitialised {loc}")
        return vals[loc]

    def operand(o):
        if isinstance(o, Immediate):
            return np.full(n, o.value & ((1 << w) - 1), dtype=np.uint64)
        return read(o)

    for ins in b.instructions:
        op = ins.opcode
        total += m.units(m.base(op))
        if op in COST_TAG_OPS:
            prev_bus = prev_addr = zero
            continue
        srcs = [read(loc) for loc in ref_def(ins)[0]]
        a = srcs[0] if srcs else zero
        bb = srcs[1] if len(srcs) > 1 else zero
        bus = (a << shift) | bb
        total += sw * _popcount(bus ^ prev_bus)
        prev_bus = bus
        if op == "mul":
            total += mw * (_popcount(a) + _popcount(bb))
        if op in ("ldw", "stw"):
            mem = ins.operands[1]
            if isinstance(mem, StackSlot):
                addr = np.full(n, mem.offset, dtype=np.uint64)
            elif isinstance(mem, HarnessSlot):
                addr = read(mem.addr)
            else:
                raise SimulationError(f"unpinned memory operand {mem} in harness block")
            total += aw * _popcount(addr ^ prev_addr)
            prev_addr = addr
        ops = ins.operands
        if op == "stw":
            vals[ops[1]] = operand(ops[0])
        elif op in ("ldw", "ldc"):
            vals[ops[0]] = operand(ops[1])
        elif op == "mkmsk":
            vals[ops[0]] = np.full(n, _mkmsk(ops[1].value, w), dtype=np.uint64)
        elif op in BINARY_OPS or op in ("not", "neg"):
            x = operand(ops[1])
            y = operand(ops[2]) if op in BINARY_OPS else zero
            vals[ops[0]] = _alu_np(op, x, y, w) & mask
    return total


def _alu_np(op: str, a: np.ndarray, b: np.ndarray, w: int) -> np.ndarray:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "and":
        return a & b
    if op == "or":
        return a | b
    if op == "xor":
        return a ^ b
    if op in ("shl", "shr"):
        sh = np.minimum(b, np.uint64(63))
        r = a << sh if op == "shl" else a >> sh
        return np.where(b < np.uint64(w), r, np.uint64(0))
    if op == "not":
        return ~a
    if op == "neg":
        return np.uint64(0) - a
    if op == "eq":
        return (a == b).astype(np.uint64)
    sa = a.astype(np.int64) - ((a >> np.uint64(w - 1)) & np.uint64(1)).astype(np.int64) * (1 << w)
    sb = b.astype(np.int64) - ((b >> np.uint64(w - 1)) & np.uint64(1)).astype(np.int64) * (1 << w)
    if op == "lss":
        return (sa < sb).astype(np.uint64)
    if op == "leq":
        return (sa <= sb).astype(np.uint64)
    raise ValueError(op)


def exhaustive_extrema(
    b: HarnessBlock,
    bit_width: int,
    m: EnergyModelParams,
    word_bits: int = 32,
    chunk: int = 1 << 20,
) -> tuple[Fraction, Fraction, tuple[int, ...], tuple[int, ...]]:
    """True (min, max, argmin, argmax) over gen inputs drawn from low-``bit_width`` words.

    Point ``idx`` assigns gene ``j`` the bits ``idx >> (j * bit_width)``; ties
    resolve to the lowest index, so an all-constant block reports the all-zero
    point for both witnesses.
    """
    if not 1 <= bit_width <= 12:
        raise ValueError("bit_width must be in 1..12")
    k = len(b.inputs)
    bits = k * bit_width
    if bits > MAX_EXHAUSTIVE_BITS:
        raise DomainTooLarge(f"{b.id}: {k} inputs x {bit_width} bits exceeds 2^{MAX_EXHAUSTIVE_BITS}")
    total = 1 << bits
    gmask = np.uint64((1 << bit_width) - 1)
    best_lo = best_hi = None
    arg_lo = arg_hi = 0
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.uint64)
        pts = np.stack(
            [(idx >> np.uint64(j * bit_width)) & gmask for j in range(k)], axis=1
        ) if k else np.zeros((len(idx), 0), dtype=np.uint64)
        e = run_block_batch(b, pts, m, word_bits)
        i_lo, i_hi = int(np.argmin(e)), int(np.argmax(e))
        if best_lo is None or e[i_lo] < best_lo:
            best_lo, arg_lo = int(e[i_lo]), start + i_lo
        if best_hi is None or e[i_hi] > best_hi:
            best_hi, arg_hi = int(e[i_hi]), start + i_hi

    def decode(i: int) -> tuple[int, ...]:
        return tuple((i >> (j * bit_width)) & ((1 << bit_width) - 1) for j in range(k))

    return best_lo * m.unit, best_hi * m.unit, decode(arg_lo), decode(arg_hi)


# ------------------------------------------------------------ whole programs


@dataclass
class EnergyTrace:
    total_pJ: Fraction
    block_counts: dict[str, int]
    block_energy: dict[str, Fraction]
    instruction_count: int
    # (block id, condition nonzero) for every executed bf/bt, in execution order
    decisions: list[tuple[str, bool]]
    result: int
    data: list[int]

    def per_visit(self) -> dict[str, Fraction]:
        """Mean energy per visit of every executed block."""
        return {
            b: self.block_energy[b] / c for b, c in self.block_counts.items() if c
        }


_OPERAND_REG, _OPERAND_STACK, _OPERAND_DATA, _OPERAND_IMM = range(4)


def _encode(o) -> tuple[int, int]:
    if isinstance(o, Register):
        return (_OPERAND_REG, o.index)
    if isinstance(o, StackSlot):
        return (_OPERAND_STACK, o.offset)
    if isinstance(o, DataSlot):
        return (_OPERAND_DATA, o.index.index)
    if isinstance(o, Immediate):
        return (_OPERAND_IMM, o.value)
    raise SimulationError(f"operand {o} is not executable")


def _decode(p: Program, cfg: Cfg, m: EnergyModelParams) -> dict:
    """Per-function tuples of pre-resolved instruction fields for the interpreter."""
    starts = set(cfg.block_start.values())
    out = {}
    for f in p.functions:
        labels = {ins.address: k for k, ins in enumerate(f.instructions)}
        rows = []
        for i, ins in enumerate(f.instructions):
            refs = tuple(_encode(r) for r in ref_def(ins)[0])
            ops = tuple(None if o.__class__.__name__ == "Target" else _encode(o) for o in ins.operands)
            tgt = ins.target
            jump = labels.get(tgt) if tgt is not None and not ins.is_call else None
            rows.append((
                ins.opcode, m.units(m.base(ins.opcode)), refs, ops,
                cfg.block_of[(f.name, i)], (f.name, i) in starts, jump, tgt,
            ))
        out[f.name] = rows
    return out


def run_program_profile(
    p: Program,
    args: Sequence[int],
    memory: Sequence[int] | None,
    m: EnergyModelParams,
    *,
    word_bits: int = 32,
    step_limit: int = STEP_LIMIT,
    cfg: Cfg | None = None,
    function: str | None = None,
) -> EnergyTrace:
    """Interpret ``p`` from its entry function; arguments go to r0, r1, ..."""
    cfg = cfg or extract_blocks(p)
    if len(args) > 4:
        raise ValueError("at most four register arguments")
    cache = cfg.__dict__.setdefault("_decoded", {})
    key = (id(p), m.digest())
    if key not in cache:
        cache[key] = _decode(p, cfg, m)
    code = cache[key]
    w = word_bits
    mask = (1 << w) - 1
    R = [0] * NUM_REGISTERS
    for i, v in enumerate(args):
        R[i] = v & mask
    D = [0] * DATA_WORDS
    for i, v in enumerate(memory or ()):
        if i >= DATA_WORDS:
            raise ValueError("memory image larger than the data segment")
        D[i] = v & mask
    S = [0] * STACK_WORDS
    sp = STACK_WORDS
    sw = m.units(m.switch_weight_pJ_per_bit)
    mw = m.units(m.mul_data_weight_pJ_per_bit)
    aw = m.units(m.mem_addr_weight_pJ_per_bit)
    counts = {bid: 0 for bid in cfg.blocks}
    energy = {bid: 0 for bid in cfg.blocks}
    decisions: list[tuple[str, bool]] = []
    call_stack: list[tuple[str, int]] = []
    fname = function or p.entry
    rows = code[fname]
    i = 0
    steps = 0
    prev_bus = prev_addr = 0

    def read(o) -> int:
        k, v = o
        if k == _OPERAND_REG:
            return R[v]
        if k == _OPERAND_IMM:
            return v & mask
        if k == _OPERAND_STACK:
            j = sp + v
            if not 0 <= j < STACK_WORDS:
                raise SimulationError("out-of-bounds stack access")
            return S[j]
        a = R[v]
        if a >= DATA_WORDS:
            raise SimulationError(f"out-of-bounds data access at {a:#x}")
        return D[a]

    def write(o, value: int) -> None:
        k, v = o
        value &= mask
        if k == _OPERAND_REG:
            R[v] = value
        elif k == _OPERAND_STACK:
            j = sp + v
            if not 0 <= j < STACK_WORDS:
                raise SimulationError("out-of-bounds stack access")
            S[j] = value
        else:
            a = R[v]
            if a >= DATA_WORDS:
                raise SimulationError(f"out-of-bounds data access at {a:#x}")
            D[a] = value

    while True:
        if i >= len(rows):
            raise SimulationError(f"fell off the end of <{fname}>")
        steps += 1
        if steps > step_limit:
            raise StepLimitExceeded(f"step limit {step_limit} exceeded")
        op, base, refs, ops, bid, start, jump, tgt = rows[i]
        if start:
            counts[bid] += 1
            prev_bus = prev_addr = 0
        if op in COST_TAG_OPS:
            e = base
            prev_bus = prev_addr = 0
            srcs = ()
        else:
            srcs = [read(o) for o in refs]
            a = srcs[0] if srcs else 0
            b = srcs[1] if len(srcs) > 1 else 0
            bus = (a << w) | b
            e = base + sw * (bus ^ prev_bus).bit_count()
            prev_bus = bus
            if op == "mul":
                e += mw * (a.bit_count() + b.bit_count())
            if op == "ldw" or op == "stw":
                k, v = ops[1]
                addr = v if k == _OPERAND_STACK else R[v]
                e += aw * (addr ^ prev_addr).bit_count()
                prev_addr = addr
        energy[bid] += e
        if op == "entsp":
            sp -= ops[0][1]
            if sp < 0:
                raise SimulationError("stack overflow")
            i += 1
        elif op == "retsp":
            sp += ops[0][1]
            if not call_stack:
                break
            fname, i = call_stack.pop()
            rows = code[fname]
        elif op == "bl":
            call_stack.append((fname, i + 1))
            fname, i = tgt, 0
            rows = code[fname]
        elif op == "bu":
            i = jump
        elif op == "bf" or op == "bt":
            c = srcs[0] != 0
            decisions.append((bid, c))
            taken = (not c) if op == "bf" else c
            i = jump if taken else i + 1
        else:
            if op == "stw":
                write(ops[1], read(ops[0]))
            elif op == "ldw" or op == "ldc":
                write(ops[0], read(ops[1]))
            elif op == "mkmsk":
                write(ops[0], _mkmsk(ops[1][1], w))
            elif len(ops) == 3:
                write(ops[0], alu(op, read(ops[1]), read(ops[2]), w))
            else:
                write(ops[0], alu(op, read(ops[1]), 0, w))
            i += 1
    unit = m.unit
    block_energy = {b: v * unit for b, v in energy.items()}
    return EnergyTrace(
        sum(energy.values()) * unit, counts, block_energy, steps, decisions, R[0], D
    )
