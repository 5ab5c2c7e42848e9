import pytest
from hypothesis import given

from energybounds.corpus import CORPUS
from energybounds.isa import (
    DataSlot,
    Immediate,
    IsaError,
    Register,
    StackSlot,
    Target,
    format_program,
    parse_instruction,
    parse_program,
    ref_def,
)

from .strategies import instructions, programs as random_programs


def test_fact_listing_parses(fact):
    assert len(fact.functions) == 1
    assert fact.entry == "fact"
    assert len(fact.functions[0].instructions) == 15
    first = fact.functions[0].instructions[0]
    assert (first.address, first.opcode, first.operands) == ("1", "entsp", (Immediate(2),))


def test_empty_text_has_no_entry():
    with pytest.raises(IsaError, match="no entry function"):
        parse_program("")


def test_arity_error_reports_line():
    with pytest.raises(IsaError) as e:
        parse_program("01: lss r0, r0")
    assert e.value.line == 1
    assert "expects 3 operands" in str(e.value)


def test_unresolved_target():
    with pytest.raises(IsaError, match="unresolved target"):
        parse_program("<f>:\n01: bu <07>\n02: retsp 0x0\n")
    with pytest.raises(IsaError, match="unresolved target"):
        parse_program("<f>:\n01: bl <g>\n02: retsp 0x0\n")


@pytest.mark.parametrize("line", [
    "01: foo r0", "01: ldc r12, 0x1", "01: stw r0, sp[0x100]", "01: ldc r0, 0x100000000",
    "01: add r0, 0x1, r1", "01 ldc r0, 0x1",
])
def test_malformed_lines(line):
    with pytest.raises(IsaError):
        parse_instruction(line)


def test_numeric_labels_normalise():
    p = parse_program("<f>:\n  07: bu <010>\n  10: retsp 0x0\n")
    assert p.functions[0].instructions[0].target == "10"
    assert str(p.functions[0].instructions[0]) == "07: bu <10>"


def test_comments_and_blank_lines():
    p = parse_program("# header\n\n<f>:  # trailing\n  01: ldc r0, 0x1 # one\n  02: retsp 0x0\n")
    assert [i.opcode for i in p.functions[0].instructions] == ["ldc", "retsp"]


def test_ref_def_examples():
    assert ref_def(parse_instruction("05: lss r0, r0, r1")) == ((Register(0), Register(1)), (Register(0),))
    assert ref_def(parse_instruction("04: ldc r0, 0x0")) == ((), (Register(0),))
    assert ref_def(parse_instruction("02: stw r0, sp[0x1]")) == ((Register(0),), (StackSlot(1),))


def test_ref_def_data_segment():
    refs, defs = ref_def(parse_instruction("01: ldw r2, dp[r1]"))
    assert refs == (Register(1), DataSlot(Register(1)))
    assert defs == (Register(2),)
    refs, defs = ref_def(parse_instruction("01: stw r4, dp[r2]"))
    assert refs == (Register(4), Register(2))
    assert defs == (DataSlot(Register(2)),)


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_corpus_round_trip(name, programs):
    p = programs[name]
    assert parse_program(format_program(p)) == p


# ---------------------------------------------------------------- properties


@given(random_programs())
def test_round_trip_property(p):
    assert parse_program(format_program(p)) == p


@given(instructions())
def test_ref_def_covers_location_operands(ins):
    refs, defs = ref_def(ins)
    locs = {o for o in ins.operands if not isinstance(o, (Immediate, Target))}
    assert locs <= set(refs) | set(defs)
    index_regs = {o.index for o in ins.operands if isinstance(o, DataSlot)}
    assert set(refs) | set(defs) <= locs | index_regs
    assert not any(isinstance(x, (Immediate, Target)) for x in refs + defs)
