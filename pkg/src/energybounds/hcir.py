"""Horn-clause IR over the CFG and cost-equation setup.

Every function becomes a predicate.  A block closed by ``bf``/``bt`` calls an
auxiliary predicate with one clause per branch outcome (guard 1 / 0).  Natural
loops become tail-recursive predicates: the back edge is a recursive call and
the exit edge ends the clause, the caller continuing at the loop exit.  Blocks
with several predecessors get their own predicate so each block occurs in
exactly one clause.

Clauses keep location-based instructions; SSA names are assigned when a
clause is rendered (:func:`format_clause`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .cfg import BasicBlock, Cfg, harness_transform
from .isa import (
    NUM_REGISTERS,
    DataSlot,
    HarnessSlot,
    Immediate,
    Instruction,
    Register,
    StackSlot,
    Target,
    ref_def,
)


class HcError(Exception):
    pass


# ------------------------------------------------------------------- IR


@dataclass(frozen=True)
class BlockCost:
    part: str
    instructions: tuple[Instruction, ...]


@dataclass(frozen=True)
class Tag:
    opcode: str
    operand: str = ""


@dataclass(frozen=True)
class Call:
    pred: str


Literal = Union[BlockCost, Tag, Call]


@dataclass
class Clause:
    head: str
    guard: bool | None
    body: list[Literal] = field(default_factory=list)


@dataclass
class Predicate:
    name: str
    kind: str  # function | loop | aux | join
    function: str
    block: str
    clauses: list[Clause] = field(default_factory=list)
    inputs: tuple = ()
    outputs: tuple = ()
    # aux only: the branch condition location
    cond: Register | None = None
    loop: str | None = None

    @property
    def arity(self) -> int:
        return len(self.inputs) + len(self.outputs) + (1 if self.kind == "aux" else 0)


@dataclass
class HcProgram:
    cfg: Cfg
    predicates: dict[str, Predicate]
    entry: dict[str, str]

    def clauses(self) -> list[Clause]:
        return [c for p in self.predicates.values() for c in p.clauses]

    def __iter__(self):
        return iter(self.predicates.values())


@dataclass
class _Loop:
    header: str
    nodes: set[str]
    exit: str | None
    parent: "_Loop | None" = None
    pred: str = ""


# ------------------------------------------------------------ loop structure


def _dominators(blocks: list[str], entry: str, preds: Mapping[str, Iterable[str]]) -> dict[str, set[str]]:
    dom = {b: set(blocks) for b in blocks}
    dom[entry] = {entry}
    changed = True
    while changed:
        changed = False
        for b in blocks:
            if b == entry:
                continue
            ps = [dom[p] for p in preds[b] if p in dom]
            new = {b} | (set.intersection(*ps) if ps else set())
            if new != dom[b]:
                dom[b], changed = new, True
    return dom


def _find_loops(cfg: Cfg, fn: str) -> list[_Loop]:
    blocks = [b.id for b in cfg.function_blocks(fn) if b.reachable]
    preds = {b: [p for p in cfg.blocks[b].preds if cfg.blocks[p].reachable] for b in blocks}
    dom = _dominators(blocks, cfg.entry[fn], preds)
    loops: dict[str, _Loop] = {}
    for u in blocks:
        for h in cfg.blocks[u].succs:
            if h not in dom[u]:
                continue
            body = {h, u}
            stack = [u]
            while stack:
                x = stack.pop()
                if x == h:
                    continue
                for p in preds[x]:
                    if p not in body:
                        body.add(p)
                        stack.append(p)
            if h in loops:
                loops[h].nodes |= body
            else:
                loops[h] = _Loop(h, body, None)
    for lp in loops.values():
        exits = {s for x in lp.nodes for s in cfg.blocks[x].succs if s not in lp.nodes}
        if len(exits) > 1:
            raise HcError(f"unsupported control shape: loop at {lp.header} has exits {sorted(exits)}")
        lp.exit = next(iter(exits), None)
        for x in lp.nodes:
            if x != lp.header and any(p not in lp.nodes for p in preds[x]):
                raise HcError(f"unsupported control shape: irreducible loop at {lp.header}")
    ordered = sorted(loops.values(), key=lambda lp: len(lp.nodes))
    for i, lp in enumerate(ordered):
        for outer in ordered[i + 1:]:
            if lp.header in outer.nodes:
                lp.parent = outer
                break
    return sorted(ordered, key=lambda lp: _block_num(lp.header))


def _block_num(bid: str) -> int:
    return int(bid[1:].split("_")[0])


# ---------------------------------------------------------------- transform


def block_literals(b: BasicBlock, function_pred: Mapping[str, str]) -> list[Literal]:
    """Cost literals of one block visit: parts, cost tags and calls, in execution order."""
    out: list[Literal] = []
    tag_ops = {ins.opcode: ins for ins in b.instructions if ins.opcode in ("entsp", "retsp")}
    calls = [ins for ins in b.instructions if ins.is_call]
    for part in harness_transform(b):
        if "entsp" in part.omitted:
            out.append(Tag("entsp", str(tag_ops["entsp"].operands[0])))
        out.append(BlockCost(part.id, part.instructions))
        if "retsp" in part.omitted:
            out.append(Tag("retsp", str(tag_ops["retsp"].operands[0])))
        if "bl" in part.omitted:
            callee = calls[part.part - 1].target
            out.append(Tag("bl", callee))
            out.append(Call(function_pred[callee]))
    return out


def to_hcir(cfg: Cfg) -> HcProgram:
    preds: dict[str, Predicate] = {}
    fpred = {f.name: f.name for f in cfg.program.functions if f.name in cfg.entry}
    for fn in cfg.program.names:
        if fn in cfg.entry:
            _Translator(cfg, fn, preds, fpred).run()
    hc = HcProgram(cfg, preds, fpred)
    _assign_interfaces(hc)
    return hc


class _Translator:
    def __init__(self, cfg: Cfg, fn: str, preds: dict, fpred: dict):
        self.cfg, self.fn, self.preds, self.fpred = cfg, fn, preds, fpred
        self.loops = _find_loops(cfg, fn)
        self.loop_of_header = {lp.header: lp for lp in self.loops}
        for k, lp in enumerate(self.loops, start=1):
            lp.pred = f"{fn}_loop" if len(self.loops) == 1 else f"{fn}_loop{k}"
        self.aux_count = 0
        self.join_count = 0
        self.join_pred: dict[str, str] = {}

    def innermost(self, bid: str) -> _Loop | None:
        best = None
        for lp in self.loops:
            if bid in lp.nodes and (best is None or len(lp.nodes) < len(best.nodes)):
                best = lp
        return best

    def is_join(self, bid: str) -> bool:
        b = self.cfg.blocks[bid]
        if bid in self.loop_of_header:
            return False
        edges = 0
        for p in b.preds:
            pb = self.cfg.blocks[p]
            if not pb.reachable:
                continue
            edges += 2 if pb.is_conditional and pb.true_succ == pb.false_succ == bid else 1
        return edges >= 2

    def run(self) -> None:
        name = self.fn
        entry = self.cfg.entry[self.fn]
        self.preds[name] = Predicate(name, "function", self.fn, entry)
        clause = Clause(name, None)
        self.preds[name].clauses.append(clause)
        self.enter(entry, None, clause.body)

    # emission ------------------------------------------------------------
    def enter(self, bid: str, loop: _Loop | None, body: list) -> None:
        nxt = self.goto(bid, loop, body)
        if nxt is not None:
            self.emit(nxt, loop, body)

    def emit(self, bid: str, loop: _Loop | None, body: list) -> None:
        while True:
            b = self.cfg.blocks[bid]
            body.extend(block_literals(b, self.fpred))
            if b.returns:
                if loop is not None:
                    raise HcError(f"unsupported control shape: return inside loop at {bid}")
                return
            if b.is_conditional:
                body.append(Call(self.aux(b, loop)))
                return
            if not b.succs:
                raise HcError(f"control falls off the end of <{self.fn}> at {bid}")
            nxt = self.goto(b.succs[0], loop, body)
            if nxt is None:
                return
            bid = nxt

    def goto(self, succ: str, loop: _Loop | None, body: list) -> str | None:
        """Handle the edge into ``succ``; return the block to inline next, if any."""
        if loop is not None and succ == loop.header:
            body.append(Call(loop.pred))
            return None
        if loop is not None and succ not in loop.nodes:
            return None
        inner = self.loop_of_header.get(succ)
        if inner is not None:
            self.loop_pred(inner)
            body.append(Call(inner.pred))
            if inner.exit is None:
                raise HcError(f"unsupported control shape: loop at {succ} never exits")
            return self.goto(inner.exit, loop, body)
        if self.is_join(succ):
            body.append(Call(self.join(succ)))
            return None
        return succ

    def aux(self, b: BasicBlock, loop: _Loop | None) -> str:
        self.aux_count += 1
        name = f"{self.fn}_aux" if self.aux_count == 1 else f"{self.fn}_aux{self.aux_count}"
        cond = b.last.operands[0]
        p = Predicate(name, "aux", self.fn, b.id, cond=cond, loop=loop.pred if loop else None)
        self.preds[name] = p
        for guard, succ in ((True, b.true_succ), (False, b.false_succ)):
            clause = Clause(name, guard)
            p.clauses.append(clause)
            if succ is None:
                raise HcError(f"conditional branch at {b.id} falls off the function")
            self.enter(succ, loop, clause.body)
        return name

    def join(self, bid: str) -> str:
        if bid in self.join_pred:
            return self.join_pred[bid]
        self.join_count += 1
        name = f"{self.fn}_join" if self.join_count == 1 else f"{self.fn}_join{self.join_count}"
        self.join_pred[bid] = name
        loop = self.innermost(bid)
        p = Predicate(name, "join", self.fn, bid, loop=loop.pred if loop else None)
        self.preds[name] = p
        clause = Clause(name, None)
        p.clauses.append(clause)
        self.emit(bid, loop, clause.body)
        return name

    def loop_pred(self, lp: _Loop) -> None:
        if lp.pred in self.preds:
            return
        p = Predicate(lp.pred, "loop", self.fn, lp.header, loop=lp.pred)
        self.preds[lp.pred] = p
        clause = Clause(lp.pred, None)
        p.clauses.append(clause)
        self.emit(lp.header, lp, clause.body)


# ---------------------------------------------------------- interfaces


def _loc_key(loc) -> tuple:
    if isinstance(loc, Register):
        return (0, loc.index)
    return (1, loc.offset)


def _tracked(loc) -> bool:
    return isinstance(loc, (Register, StackSlot))


ALL_REGISTERS = frozenset(Register(i) for i in range(NUM_REGISTERS))


def _assign_interfaces(hc: HcProgram) -> None:
    preds = hc.predicates
    # locations each predicate may define, transitively
    defined: dict[str, set] = {n: set() for n in preds}
    changed = True
    while changed:
        changed = False
        for p in preds.values():
            acc = set(defined[p.name])
            for c in p.clauses:
                for lit in c.body:
                    if isinstance(lit, BlockCost):
                        for ins in lit.instructions:
                            acc.update(d for d in ref_def(ins)[1] if _tracked(d))
                    elif isinstance(lit, Call):
                        q = preds[lit.pred]
                        if q.kind == "function":
                            acc.add(Register(0))
                        else:
                            acc |= defined[q.name]
            if p.kind == "function":
                acc = {loc for loc in acc if isinstance(loc, Register)}
            if acc != defined[p.name]:
                defined[p.name], changed = acc, True

    def context(p: Predicate) -> set:
        if p.kind == "function":
            return {Register(0)}
        if p.loop is not None:
            return defined[p.loop]
        return {loc for loc in defined[p.name] if isinstance(loc, Register)}

    for p in preds.values():
        p.outputs = tuple(sorted(context(p), key=_loc_key))

    inputs: dict[str, set] = {n: set() for n in preds}
    changed = True
    while changed:
        changed = False
        for p in preds.values():
            acc = set(inputs[p.name])
            for c in p.clauses:
                dfn: set = set()
                for lit in c.body:
                    if isinstance(lit, BlockCost):
                        for ins in lit.instructions:
                            refs, defs = ref_def(ins)
                            acc.update(r for r in refs if _tracked(r) and r not in dfn)
                            dfn.update(d for d in defs if _tracked(d))
                    elif isinstance(lit, Call):
                        q = preds[lit.pred]
                        if q.kind == "aux":
                            if q.cond not in dfn:
                                acc.add(q.cond)
                        acc.update(r for r in inputs[q.name] if r not in dfn)
                        dfn |= ALL_REGISTERS if q.kind == "function" else set(q.outputs)
            if p.kind == "function":
                acc = {loc for loc in acc if isinstance(loc, Register)}
            if acc != inputs[p.name]:
                inputs[p.name], changed = acc, True
    for p in preds.values():
        p.inputs = tuple(sorted(inputs[p.name], key=_loc_key))


# ------------------------------------------------------------------ SSA


def _base_name(loc) -> str:
    if isinstance(loc, Register):
        return f"R{loc.index}"
    if isinstance(loc, StackSlot):
        return f"Sp{loc.offset:#x}"
    raise TypeError(loc)


class _Namer:
    def __init__(self):
        self.version: dict = {}
        self.assigned: list[str] = []

    def use(self, loc) -> str:
        if isinstance(loc, (DataSlot, HarnessSlot)):
            idx = loc.index if isinstance(loc, DataSlot) else loc.addr
            return f"dp({self.use(idx)})"
        if loc not in self.version:
            return "_"
        v = self.version[loc]
        return _base_name(loc) if v == 0 else f"{_base_name(loc)}_{v}"

    def define(self, loc) -> str:
        if isinstance(loc, (DataSlot, HarnessSlot)):
            return self.use(loc)
        self.version[loc] = self.version.get(loc, -1) + 1
        name = self.use(loc)
        self.assigned.append(name)
        return name


def _ssa_instruction(ins: Instruction, nm: _Namer) -> str:
    if ins.opcode == "stw":
        dest = {1}
    elif ref_def(ins)[1]:
        dest = {0}
    else:
        dest = set()
    rendered: dict[int, str] = {}
    # sources first so a destination never shadows its own read
    for k, o in enumerate(ins.operands):
        if isinstance(o, (Immediate, Target)):
            rendered[k] = str(o)
        elif k not in dest:
            rendered[k] = nm.use(o)
    for k in dest:
        rendered[k] = nm.define(ins.operands[k])
    return f"{ins.opcode}({','.join(rendered[k] for k in range(len(ins.operands)))})"


def ssa_clause(hc: HcProgram, clause: Clause) -> tuple[str, list[str]]:
    """Rendered clause and the list of variables it assigns."""
    p = hc.predicates[clause.head]
    nm = _Namer()
    head_in = [nm.define(loc) for loc in p.inputs]
    lits: list[str] = []
    for lit in clause.body:
        if isinstance(lit, Tag):
            lits.append(f"{lit.opcode}({lit.operand})" if lit.opcode != "bl" else "bl")
        elif isinstance(lit, BlockCost):
            lits.extend(_ssa_instruction(ins, nm) for ins in lit.instructions
                        if ins.opcode not in ("bu",))
        else:
            q = hc.predicates[lit.pred]
            args = [nm.use(q.cond)] if q.kind == "aux" else []
            args += [nm.use(loc) for loc in q.inputs]
            args += [nm.define(loc) for loc in q.outputs]
            lits.append(f"{q.name}({','.join(args)})")
    head_out = [nm.use(loc) for loc in p.outputs]
    guard = [] if clause.guard is None else ["1" if clause.guard else "0"]
    head = f"{p.name}({','.join(guard + head_in + head_out)})"
    text = f"{head}:- " + ", ".join(lits) + "." if lits else f"{head}."
    return text, nm.assigned


def format_clause(hc: HcProgram, clause: Clause) -> str:
    return ssa_clause(hc, clause)[0]


def format_hcir(hc: HcProgram) -> str:
    return "\n".join(format_clause(hc, c) for c in hc.clauses()) + "\n"


# ---------------------------------------------------------------- replay


def replay(
    hc: HcProgram,
    entry: str,
    part_costs: Mapping[str, Fraction],
    decisions: Iterable[tuple[str, bool]],
    tag_costs: Mapping[str, Fraction] | None = None,
) -> Fraction:
    """Evaluate the clauses along one concrete execution.

    ``decisions`` are the (block, condition) pairs of the executed branches in
    order; each aux call consumes one.
    """
    it = iter(decisions)
    tag_costs = tag_costs or {}
    total = Fraction(0)
    # explicit stack: (literal list, position)
    stack = [(hc.predicates[entry].clauses[0].body, 0)]
    while stack:
        body, i = stack.pop()
        if i >= len(body):
            continue
        stack.append((body, i + 1))
        lit = body[i]
        if isinstance(lit, BlockCost):
            total += part_costs.get(lit.part, Fraction(0))
        elif isinstance(lit, Tag):
            total += tag_costs.get(lit.opcode, Fraction(0))
        else:
            q = hc.predicates[lit.pred]
            if q.kind == "aux":
                try:
                    bid, cond = next(it)
                except StopIteration:
                    raise HcError("decision trace exhausted") from None
                if bid != q.block:
                    raise HcError(f"decision for {bid} where {q.block} was expected")
                clause = next(c for c in q.clauses if c.guard == cond)
            else:
                clause = q.clauses[0]
            stack.append((clause.body, 0))
    if next(it, None) is not None:
        raise HcError("unconsumed branch decisions")
    return total


def block_level_costs(hc: HcProgram, block_costs: Mapping[str, Fraction]) -> dict[str, Fraction]:
    """Per-part costs that put a whole block's cost on its first part (tags then cost 0)."""
    out = {}
    for b in hc.cfg.blocks.values():
        for part in harness_transform(b):
            out[part.id] = block_costs.get(b.id, Fraction(0)) if part.part == 1 else Fraction(0)
    return out


# ------------------------------------------------------- cost equations


@dataclass(frozen=True)
class Affine:
    coefs: tuple[tuple[tuple, Fraction], ...]
    const: Fraction = Fraction(0)

    @staticmethod
    def sym(loc) -> "Affine":
        return Affine(((_sym_key(loc), Fraction(1)),))

    @staticmethod
    def constant(c) -> "Affine":
        return Affine((), Fraction(c))

    @property
    def lin(self) -> dict:
        return dict(self.coefs)

    def is_const(self) -> bool:
        return not self.coefs

    def _combine(self, other: "Affine", k: Fraction) -> "Affine":
        d = self.lin
        for s, c in other.coefs:
            d[s] = d.get(s, Fraction(0)) + k * c
        return Affine(tuple(sorted((s, c) for s, c in d.items() if c)), self.const + k * other.const)

    def __add__(self, other):
        return self._combine(other, Fraction(1))

    def __sub__(self, other):
        return self._combine(other, Fraction(-1))

    def scale(self, k) -> "Affine":
        k = Fraction(k)
        return Affine(tuple((s, c * k) for s, c in self.coefs if c * k), self.const * k)

    def linear(self) -> "Affine":
        return Affine(self.coefs)

    def subst(self, values: Mapping[tuple, "Affine | None"]) -> "Affine | None":
        out = Affine.constant(self.const)
        for s, c in self.coefs:
            v = values.get(s)
            if v is None:
                return None
            out = out + v.scale(c)
        return out

    def __str__(self) -> str:
        parts = []
        for (_, name), c in self.coefs:
            parts.append(f"{'' if c == 1 else '-' if c == -1 else str(c) + '*'}{name}")
        if self.const or not parts:
            parts.append(str(self.const))
        return " + ".join(parts).replace("+ -", "- ")


def _sym_key(loc) -> tuple:
    return (_loc_key(loc), str(loc))


@dataclass(frozen=True)
class Cmp:
    op: str
    a: Affine
    b: Affine


@dataclass(frozen=True)
class Case:
    """One alternative: applies when ``lo <= n <= hi`` (``None`` = unbounded)."""

    lo: int | None
    hi: int | None
    cost: Fraction
    # (predicate, "rel" | "abs", offset or value)
    calls: tuple[tuple[str, str, int], ...]
    # True when the alternative is selected by data rather than by size
    data: bool = False

    def applies(self, n: int) -> bool:
        return (self.lo is None or n >= self.lo) and (self.hi is None or n <= self.hi)


@dataclass
class Equation:
    pred: str
    size: Affine | None
    cases: list[Case]


@dataclass
class CostEquationSystem:
    entry: str
    equations: dict[str, Equation]
    direction: str
    metrics: dict[str, str]
    # callee-first
    order: list[str]
    warnings: list[str] = field(default_factory=list)

    def __str__(self) -> str:
        lines = []
        for name in self.order:
            eq = self.equations[name]
            for c in eq.cases:
                rhs = [str(c.cost)]
                for q, kind, v in c.calls:
                    arg = "n" if kind == "rel" and v == 0 else (f"n{v:+d}" if kind == "rel" else str(v))
                    rhs.append(f"{q}({arg})")
                cond = []
                if c.lo is not None:
                    cond.append(f"n >= {c.lo}")
                if c.hi is not None:
                    cond.append(f"n <= {c.hi}")
                if c.data:
                    cond.append("data")
                tail = f"   if {' and '.join(cond)}" if cond else ""
                lines.append(f"{name}(n) = {' + '.join(rhs)}{tail}")
        return "\n".join(lines)


METRIC_INT, METRIC_ARRAY = "int-value", "array-length"


def infer_metrics(hc: HcProgram) -> dict[str, str]:
    """Array length when a loop of the function indexes the data segment, else integer value."""
    out = {}
    for fn, pname in hc.entry.items():
        indexed = False
        for p in hc.predicates.values():
            if p.function != fn or p.kind != "loop":
                continue
            indexed |= _reaches_dp(hc, p.name, set())
        out[pname] = METRIC_ARRAY if indexed else METRIC_INT
    return out


def _reaches_dp(hc: HcProgram, name: str, seen: set) -> bool:
    if name in seen:
        return False
    seen.add(name)
    for c in hc.predicates[name].clauses:
        for lit in c.body:
            if isinstance(lit, BlockCost) and any(
                isinstance(o, HarnessSlot) for ins in lit.instructions for o in ins.operands
            ):
                return True
            if isinstance(lit, Call) and hc.predicates[lit.pred].kind in ("aux", "join", "loop"):
                if _reaches_dp(hc, lit.pred, seen):
                    return True
    return False


def _sym_step(ins: Instruction, st: dict) -> None:
    op, ops = ins.opcode, ins.operands

    def val(o):
        if isinstance(o, Immediate):
            return Affine.constant(o.value)
        if isinstance(o, (DataSlot, HarnessSlot)):
            return None
        return st.get(o)

    def put(loc, v):
        if _tracked(loc):
            st[loc] = v

    if op == "stw":
        put(ops[1], val(ops[0]))
    elif op == "ldw":
        put(ops[0], val(ops[1]))
    elif op == "ldc":
        put(ops[0], Affine.constant(ops[1].value))
    elif op == "mkmsk":
        put(ops[0], Affine.constant((1 << ops[1].value) - 1))
    elif op in ("add", "sub", "mul", "lss", "leq", "eq"):
        a, b = val(ops[1]), val(ops[2])
        r = None
        if a is not None and b is not None:
            if op == "add":
                r = a + b
            elif op == "sub":
                r = a - b
            elif op == "mul":
                if a.is_const():
                    r = b.scale(a.const)
                elif b.is_const():
                    r = a.scale(b.const)
            else:
                r = _cmp_value(Cmp(op, a, b))
        put(ops[0], r)
    elif op == "neg":
        a = val(ops[1])
        put(ops[0], a.scale(-1) if isinstance(a, Affine) else None)
    else:
        for d in ref_def(ins)[1]:
            put(d, None)


def _cmp_value(c: Cmp):
    d = c.b - c.a
    if d.is_const():
        if c.op == "lss":
            return Affine.constant(int(d.const > 0))
        if c.op == "leq":
            return Affine.constant(int(d.const >= 0))
        return Affine.constant(int(d.const == 0))
    return c


@dataclass
class _Path:
    cost: Fraction
    # raw guards: (affine d, relation) meaning d >= 0, d <= 0, d == 0, d != 0 via ("ge"|"le"|"eq"|"ne", k)
    guards: list[tuple[Affine, str, Fraction]]
    calls: list[tuple[str, dict]]
    data: bool = False


def _guard_of(v, outcome: bool) -> tuple[Affine, str, Fraction] | str | None:
    """Size constraint for a branch outcome: (d, rel, k) meaning ``d rel k``.

    Returns "data" when the condition is unknown, None when it is always satisfied,
    and "dead" when it is impossible.
    """
    if v is None:
        return "data"
    if isinstance(v, Affine) and v.is_const():
        return None if (v.const != 0) == outcome else "dead"
    if isinstance(v, Cmp):
        d = v.b - v.a
        if v.op == "lss":
            return (d, "ge", Fraction(1)) if outcome else (d, "le", Fraction(0))
        if v.op == "leq":
            return (d, "ge", Fraction(0)) if outcome else (d, "le", Fraction(-1))
        return (d, "eq", Fraction(0)) if outcome else (d, "ne", Fraction(0))
    return (v, "ne", Fraction(0)) if outcome else (v, "eq", Fraction(0))


def _enumerate_paths(
    hc: HcProgram,
    p: Predicate,
    part_cost: Mapping[str, Fraction],
    tag_cost: Mapping[str, Fraction],
) -> list[_Path]:
    init = {loc: Affine.sym(loc) for loc in p.inputs}
    out: list[_Path] = []

    def walk(body: list, i: int, st: dict, path: _Path) -> None:
        while i < len(body):
            lit = body[i]
            i += 1
            if isinstance(lit, BlockCost):
                path.cost += part_cost[lit.part]
                for ins in lit.instructions:
                    _sym_step(ins, st)
                continue
            if isinstance(lit, Tag):
                path.cost += tag_cost.get(lit.opcode, Fraction(0))
                continue
            q = hc.predicates[lit.pred]
            if q.kind in ("function", "loop"):
                args = {_sym_key(loc): st.get(loc) for loc in q.inputs}
                path.calls.append((q.name, args))
                kill = ALL_REGISTERS if q.kind == "function" else set(q.outputs)
                for loc in kill:
                    st[loc] = None
                continue
            if q.kind == "join":
                walk(q.clauses[0].body, 0, st, path)
                return
            v = st.get(q.cond)
            for clause in q.clauses:
                g = _guard_of(v, clause.guard)
                if g == "dead":
                    continue
                branch = _Path(path.cost, list(path.guards), list(path.calls), path.data)
                if g == "data":
                    branch.data = True
                elif g is not None:
                    branch.guards.append(g)
                walk(clause.body, 0, dict(st), branch)
            return
        out.append(path)

    walk(p.clauses[0].body, 0, init, _Path(Fraction(0), [], []))
    return out


def _ceil(x: Fraction) -> int:
    return math.ceil(x)


def _floor(x: Fraction) -> int:
    return math.floor(x)


def _interval(d: Affine, rel: str, k: Fraction, size: Affine) -> list[tuple[int | None, int | None]] | None:
    """Solve ``d rel k`` for integer n where ``d = c*size + e``; None if d is unrelated to size."""
    lin, s_lin = d.lin, size.lin
    c = None
    for s, v in lin.items():
        if s not in s_lin:
            return None
        r = v / s_lin[s]
        if c is None:
            c = r
        elif r != c:
            return None
    if c is None or set(s_lin) != set(lin):
        return None
    # d = c*(size - size.const) + d.const  ->  c*n + e with n = size value
    e = d.const - c * size.const
    t = (k - e) / c
    if rel == "eq":
        return [(int(t), int(t))] if t.denominator == 1 else []
    if rel == "ne":
        if t.denominator != 1:
            return [(None, None)]
        return [(None, int(t) - 1), (int(t) + 1, None)]
    ge = (rel == "ge") == (c > 0)
    return [(_ceil(t), None)] if ge else [(None, _floor(t))]


def _normalize_size(lin: Affine) -> Affine:
    first = lin.coefs[0][1]
    return lin.scale(1 / abs(first)) if first > 0 else lin.scale(-1 / abs(first))


def setup_cost_equations(
    hc: HcProgram,
    bounds: Mapping[str, "Fraction | object"],
    direction: str,
    metrics: Mapping[str, str] | None = None,
    tag_costs: Mapping[str, Fraction] | None = None,
    entry: str | None = None,
) -> CostEquationSystem:
    """Cost equations for the function and loop predicates of ``hc``.

    ``bounds`` maps harness part ids to a cost (a Fraction or anything with
    ``value_pJ``); ``tag_costs`` maps entsp/retsp/bl to their constant cost.
    Aux and join predicates are inlined into their callers.
    """
    part_cost: dict[str, Fraction] = {}
    needed = {lit.part for c in hc.clauses() for lit in c.body if isinstance(lit, BlockCost)}
    for part in needed:
        if part not in bounds:
            raise HcError(f"missing {direction} bound for block {part}")
        v = bounds[part]
        part_cost[part] = Fraction(v.value_pJ if hasattr(v, "value_pJ") else v)
    tag_costs = dict(tag_costs or {})
    heads = [p for p in hc.predicates.values() if p.kind in ("function", "loop")]
    paths = {p.name: _enumerate_paths(hc, p, part_cost, tag_costs) for p in heads}
    callees = {n: {q for path in ps for q, _ in path.calls} for n, ps in paths.items()}
    order = _callee_first(callees)

    sizes: dict[str, Affine | None] = {}
    warnings: list[str] = []
    equations: dict[str, Equation] = {}
    for name in order:
        ps = paths[name]
        size = None
        for path in ps:
            for d, _, _ in path.guards:
                if not d.is_const():
                    size = _normalize_size(d.linear())
                    break
            if size is not None:
                break
        if size is None:
            for path in ps:
                for q, args in path.calls:
                    sq = sizes.get(q)
                    if sq is not None and q != name:
                        v = sq.subst(args)
                        if v is not None and not v.is_const():
                            size = v.linear()
                            break
                if size is not None:
                    break
        # orient the size so a self call decreases it
        if size is not None:
            for path in ps:
                for q, args in path.calls:
                    if q == name:
                        v = size.subst(args)
                        if v is not None and (v - size).is_const() and (v - size).const > 0:
                            size = size.scale(-1)
                        break
                else:
                    continue
                break
        sizes[name] = size

    for name in order:
        size = sizes[name]
        cases: list[Case] = []
        for path in paths[name]:
            intervals = [(None, None)]
            data = path.data
            for d, rel, k in path.guards:
                sol = _interval(d, rel, k, size) if size is not None else None
                if sol is None:
                    data = True
                    warnings.append(f"{name}: guard on {d} is not a function of the size")
                    continue
                intervals = [
                    iv for a in intervals for b in sol if (iv := _meet(a, b)) is not None
                ]
            calls = []
            for q, args in path.calls:
                sq = sizes.get(q)
                if sq is None:
                    calls.append((q, "abs", 0))
                    continue
                v = sq.subst(args)
                if v is None:
                    raise HcError(f"size argument of call {name} -> {q} is not inferable")
                if v.is_const():
                    if v.const.denominator != 1:
                        raise HcError(f"non-integer size argument in call {name} -> {q}")
                    calls.append((q, "abs", int(v.const)))
                    continue
                delta = v - size if size is not None else None
                if delta is None or not delta.is_const() or delta.const.denominator != 1:
                    raise HcError(f"non-affine size relation in call {name} -> {q}: {v}")
                calls.append((q, "rel", int(delta.const)))
            for lo, hi in intervals:
                cases.append(Case(lo, hi, path.cost, tuple(calls), data))
        equations[name] = Equation(name, size, cases)

    entry = entry or hc.entry[hc.cfg.program.entry]
    return CostEquationSystem(
        entry, equations, direction, dict(metrics or infer_metrics(hc)), order, warnings
    )


def _meet(a, b):
    lo = b[0] if a[0] is None else a[0] if b[0] is None else max(a[0], b[0])
    hi = b[1] if a[1] is None else a[1] if b[1] is None else min(a[1], b[1])
    if lo is not None and hi is not None and lo > hi:
        return None
    return (lo, hi)


def _callee_first(callees: Mapping[str, set]) -> list[str]:
    order: list[str] = []
    state: dict[str, int] = {}

    def visit(n: str) -> None:
        if state.get(n):
            return
        state[n] = 1
        for q in sorted(callees.get(n, ())):
            if q in callees:
                visit(q)
        order.append(n)

    for n in callees:
        visit(n)
    return order
