"""Basic blocks, harness blocks and gen sets.

A basic block is a maximal chain of instructions in which every inner link
is the only out-edge of its source and the only in-edge of its destination
(call/return edges excluded).  Harness blocks are what the block optimizer
runs in isolation: calls split a block into parts, ``entsp``/``retsp``/``bl``
are stripped and charged as constant cost tags, and ``dp`` operands are
pinned to cells of a fixed harness frame.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .isa import (
    COST_TAG_OPS,
    DataSlot,
    HarnessSlot,
    Instruction,
    Location,
    Program,
    Register,
    ref_def,
)


@dataclass(frozen=True)
class BasicBlock:
    id: str
    function: str
    instructions: tuple[Instruction, ...]
    succs: tuple[str, ...]
    preds: tuple[str, ...]
    reachable: bool = True
    # for blocks closed by bf/bt: successor taken when the condition is nonzero / zero
    true_succ: str | None = None
    false_succ: str | None = None

    @property
    def last(self) -> Instruction:
        return self.instructions[-1]

    @property
    def is_conditional(self) -> bool:
        return self.last.is_conditional

    @property
    def returns(self) -> bool:
        return self.last.is_return

    @property
    def callees(self) -> tuple[str, ...]:
        return tuple(i.target for i in self.instructions if i.is_call)


@dataclass(frozen=True)
class HarnessBlock:
    id: str
    origin: str
    part: int
    instructions: tuple[Instruction, ...]
    omitted: tuple[str, ...] = ()
    inputs: tuple[Location, ...] = field(default=())


@dataclass
class Cfg:
    program: Program
    blocks: dict[str, BasicBlock]
    entry: dict[str, str]
    calls: list[tuple[str, str]]
    # (function, instruction index) -> block id, for the profiler
    block_of: dict[tuple[str, int], str]
    block_start: dict[str, tuple[str, int]]

    @property
    def edges(self) -> list[tuple[str, str]]:
        return [(b.id, s) for b in self.blocks.values() for s in b.succs]

    def function_blocks(self, name: str) -> list[BasicBlock]:
        return [b for b in self.blocks.values() if b.function == name]

    @property
    def unreachable(self) -> list[str]:
        return [b.id for b in self.blocks.values() if not b.reachable]


def _instruction_succs(fn, i: int) -> list[int]:
    ins = fn.instructions[i]
    nxt = [i + 1] if i + 1 < len(fn.instructions) else []
    if ins.is_return:
        return []
    if ins.opcode == "bu":
        return [fn.index_of(ins.target)]
    if ins.is_conditional:
        tgt = fn.index_of(ins.target)
        return list(dict.fromkeys(nxt + [tgt]))
    return nxt


def extract_blocks(p: Program) -> Cfg:
    blocks: dict[str, BasicBlock] = {}
    block_of: dict[tuple[str, int], str] = {}
    block_start: dict[str, tuple[str, int]] = {}
    entry: dict[str, str] = {}
    calls: list[tuple[str, str]] = []
    counter = 0
    for fn in p.functions:
        n = len(fn.instructions)
        if n == 0:
            continue
        succs = [_instruction_succs(fn, i) for i in range(n)]
        preds: list[list[int]] = [[] for _ in range(n)]
        for i, ss in enumerate(succs):
            for s in ss:
                preds[s].append(i)
        leaders = {0}
        for i in range(n):
            if len(preds[i]) != 1 or len(succs[preds[i][0]]) != 1:
                leaders.add(i)
            elif fn.instructions[preds[i][0]].is_conditional:
                # bf/bt closes its block even when both edges coincide
                leaders.add(i)
        chains: dict[int, list[int]] = {}
        for lead in sorted(leaders):
            chain = [lead]
            while len(succs[chain[-1]]) == 1:
                nxt = succs[chain[-1]][0]
                if nxt in leaders or nxt in chain:
                    break
                chain.append(nxt)
            chains[lead] = chain
        ids = {}
        for lead in sorted(chains):
            counter += 1
            ids[lead] = f"B{counter}"
        lead_of = {i: lead for lead, ch in chains.items() for i in ch}
        bsucc = {lead: [ids[s] for s in succs[ch[-1]]] for lead, ch in chains.items()}
        lead_by_id = {v: k for k, v in ids.items()}
        bpred: dict[int, list[str]] = {lead: [] for lead in chains}
        for lead, ss in bsucc.items():
            for s in ss:
                bpred[lead_by_id[s]].append(ids[lead])
        # reachability from the entry block
        seen = {ids[0]}
        stack = [0]
        while stack:
            lead = stack.pop()
            for s in succs[chains[lead][-1]]:
                if ids[lead_of[s]] not in seen:
                    seen.add(ids[lead_of[s]])
                    stack.append(lead_of[s])
        for lead, ch in sorted(chains.items()):
            instrs = tuple(fn.instructions[i] for i in ch)
            last = instrs[-1]
            t_succ = f_succ = None
            if last.is_conditional:
                fall = ids[lead_of[ch[-1] + 1]] if ch[-1] + 1 < n else None
                tgt = ids[lead_of[fn.index_of(last.target)]]
                t_succ, f_succ = (fall, tgt) if last.opcode == "bf" else (tgt, fall)
            bid = ids[lead]
            blocks[bid] = BasicBlock(
                bid, fn.name, instrs, tuple(bsucc[lead]), tuple(bpred[lead]),
                bid in seen, t_succ, f_succ,
            )
            block_start[bid] = (fn.name, ch[0])
            for i in ch:
                block_of[(fn.name, i)] = bid
            calls.extend((bid, c) for c in blocks[bid].callees)
        entry[fn.name] = ids[0]
    return Cfg(p, blocks, entry, calls, block_of, block_start)


def harness_transform(b: BasicBlock) -> list[HarnessBlock]:
    """Split ``b`` at calls, strip cost-tag instructions, pin ``dp`` operands."""
    parts: list[tuple[list[Instruction], list[str]]] = [([], [])]
    for ins in b.instructions:
        if ins.opcode in COST_TAG_OPS:
            parts[-1][1].append(ins.opcode)
            if ins.is_call:
                parts.append(([], []))
            continue
        parts[-1][0].append(ins)

    out = []
    single = len(parts) == 1
    for k, (instrs, tags) in enumerate(parts, start=1):
        rewritten = _pin_memory(instrs)
        hid = b.id if single else f"{b.id}_{k}"
        hb = HarnessBlock(hid, b.id, k, tuple(rewritten), tuple(tags))
        out.append(HarnessBlock(hid, b.id, k, hb.instructions, hb.omitted, gen_set(hb)))
    return out


def _pin_memory(instrs: list[Instruction]) -> list[Instruction]:
    # one harness cell per (index register, definition count of that register)
    version: dict[Register, int] = {}
    cells: dict[tuple[Register, int], HarnessSlot] = {}
    out = []
    for ins in instrs:
        ops = []
        for o in ins.operands:
            if isinstance(o, DataSlot):
                key = (o.index, version.get(o.index, 0))
                if key not in cells:
                    cells[key] = HarnessSlot(len(cells), o.index, str(o))
                o = cells[key]
            ops.append(o)
        new = Instruction(ins.address, ins.opcode, tuple(ops))
        for d in ref_def(new)[1]:
            if isinstance(d, Register):
                version[d] = version.get(d, 0) + 1
        out.append(new)
    return out


def gen_set(b: HarnessBlock | BasicBlock) -> tuple[Location, ...]:
    """Locations read before any write in ``b``, in first-read order."""
    defined: set = set()
    gen: list[Location] = []
    for ins in b.instructions:
        refs, defs = ref_def(ins)
        for r in refs:
            if r not in defined and r not in gen:
                gen.append(r)
        defined.update(defs)
    return tuple(gen)


def harness_blocks(cfg: Cfg) -> dict[str, list[HarnessBlock]]:
    return {bid: harness_transform(b) for bid, b in cfg.blocks.items()}


def location_name(loc: Location) -> str:
    if isinstance(loc, HarnessSlot):
        return f"{loc.origin}@{loc}"
    return str(loc)


def cfg_to_json(cfg: Cfg) -> str:
    doc = {
        "entry": cfg.program.entry,
        "functions": cfg.entry,
        "blocks": [
            {
                "id": b.id,
                "function": b.function,
                "reachable": b.reachable,
                "instructions": [str(i) for i in b.instructions],
                "succs": list(b.succs),
                "preds": list(b.preds),
                "parts": [
                    {
                        "id": h.id,
                        "instructions": [str(i) for i in h.instructions],
                        "gen": [location_name(x) for x in h.inputs],
                        "omitted": list(h.omitted),
                    }
                    for h in harness_transform(b)
                ],
            }
            for b in cfg.blocks.values()
        ],
        "edges": [list(e) for e in cfg.edges],
        "calls": [list(c) for c in cfg.calls],
    }
    return json.dumps(doc, indent=2)
