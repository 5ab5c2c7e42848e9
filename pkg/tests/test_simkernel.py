from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from energybounds.cfg import BasicBlock, HarnessBlock, extract_blocks, harness_transform
from energybounds.corpus import CORPUS
from energybounds.isa import parse_instruction, parse_program
from energybounds.simkernel import (
    DomainTooLarge,
    EnergyModelParams,
    MachineState,
    SimulationError,
    StepLimitExceeded,
    UninitializedRead,
    exhaustive_extrema,
    instruction_energy,
    load_model,
    run_block,
    run_block_batch,
    run_program_profile,
    zero_model,
)

from .strategies import straight_blocks

ONES = 2**32 - 1


def _parts(p, bid):
    return harness_transform(extract_blocks(p).blocks[bid])


def _block(text: str) -> HarnessBlock:
    ins = tuple(parse_instruction(line, k) for k, line in enumerate(text.strip().splitlines(), 1))
    (h,) = harness_transform(BasicBlock("X", "f", ins, (), ()))
    return h


def test_default_model_constants(model):
    assert model.base("ldc") == 2 and model.base("mul") == 6 and model.base("stw") == 5
    assert model.base("entsp") == model.base("bl") == 4
    assert model.switch_weight_pJ_per_bit == Fraction("0.02")
    assert model.mul_data_weight_pJ_per_bit == Fraction("0.05")


def test_ldc_from_zero_state(model):
    assert instruction_energy(parse_instruction("01: ldc r0, 0x0"), MachineState(), model) == 2


def test_mul_all_ones(model):
    s = MachineState()
    s.registers[1] = s.registers[2] = ONES
    s.prev_bus = 2**64 - 1
    # 6 + 0.05 * (32 + 32); the bus does not change
    assert instruction_energy(parse_instruction("01: mul r0, r1, r2"), s, model) == Fraction("9.2")


def test_zero_model_instruction():
    s = MachineState()
    s.registers[1] = ONES
    assert instruction_energy(parse_instruction("01: mul r0, r1, r1"), s, zero_model()) == 0


def test_negative_weights_rejected():
    with pytest.raises(ValueError):
        EnergyModelParams({"add": Fraction(-1)})


def test_fact_b3(fact, model):
    (b3,) = _parts(fact, "B3")
    assert run_block(b3, [], model) == 2


def test_fact_b2_2_data_dependence(fact, model):
    b22 = _parts(fact, "B2")[1]
    assert run_block(b22, [ONES, ONES], model) > run_block(b22, [1, 1], model)
    assert run_block(b22, [1, 1], zero_model()) == 0


def test_profile_counts(fact, model):
    assert run_program_profile(fact, [3], None, model).block_counts == {"B1": 4, "B2": 3, "B3": 1}
    assert run_program_profile(fact, [0], None, model).block_counts == {"B1": 1, "B2": 0, "B3": 1}


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_zero_model_profile(name, programs):
    assert run_program_profile(programs[name], [4], [3, 1, 2, 5], zero_model()).total_pJ == 0


def test_exhaustive_input_free(model):
    b = _block("01: ldc r0, 0x1")
    lo, hi, wl, wh = exhaustive_extrema(b, 8, model)
    assert lo == hi == run_block(b, [], model) and wl == wh == ()


def test_exhaustive_b2_2_matches_brute_force(fact, model):
    b22 = _parts(fact, "B2")[1]
    lo, hi, wl, wh = exhaustive_extrema(b22, 8, model)
    # independent oracle: the scalar Fraction interpreter over all 2^16 pairs
    vals = {(a, b): run_block(b22, [a, b], model) for a in range(256) for b in range(256)}
    assert hi == max(vals.values()) and lo == min(vals.values())
    assert vals[wh] == hi and vals[wl] == lo


def test_exhaustive_zero_model(fact):
    b22 = _parts(fact, "B2")[1]
    assert exhaustive_extrema(b22, 4, zero_model()) == (0, 0, (0, 0), (0, 0))


def test_exhaustive_domain_too_large(programs, model):
    b = _parts(programs["reverse"], "B3")[0]
    with pytest.raises(DomainTooLarge):
        exhaustive_extrema(b, 9, model)


def test_uninitialised_read_traps(model):
    b = _block("01: add r0, r1, r2")
    with pytest.raises(UninitializedRead):
        run_block(HarnessBlock(b.id, b.origin, 1, b.instructions, (), b.inputs[:1]), [1], model)


def test_step_limit():
    p = parse_program("<f>:\n01: bu <01>\n")
    with pytest.raises(StepLimitExceeded):
        run_program_profile(p, [], None, zero_model(), step_limit=1000)


def test_out_of_bounds_data():
    p = parse_program("<f>:\n01: ldc r1, 0x1000\n02: ldw r0, dp[r1]\n03: retsp 0x0\n")
    with pytest.raises(SimulationError):
        run_program_profile(p, [], None, zero_model())


def test_word_bits_masks_values(fact, model):
    assert run_program_profile(fact, [5], None, model, word_bits=8).result == 120
    assert run_program_profile(fact, [6], None, model, word_bits=8).result == 720 % 256


def test_model_file_round_trip(tmp_path, model):
    import json

    path = tmp_path / "m.json"
    path.write_text(json.dumps(model.to_dict()))
    assert load_model(path) == model and load_model(path).digest() == model.digest()


# ---------------------------------------------------------------- properties


def _harness(instrs):
    return harness_transform(BasicBlock("X", "f", tuple(instrs), (), ()))[0]


@given(straight_blocks(memory=False), st.data())
def test_batch_matches_scalar(instrs, data):
    m = load_model()
    h = _harness(instrs)
    rows = data.draw(st.lists(
        st.lists(st.integers(0, ONES), min_size=len(h.inputs), max_size=len(h.inputs)),
        min_size=1, max_size=5,
    ))
    batch = run_block_batch(h, np.array(rows, dtype=np.uint64).reshape(len(rows), len(h.inputs)), m)
    assert [int(u) * m.unit for u in batch] == [run_block(h, r, m) for r in rows]


@given(straight_blocks(memory=False), st.data())
def test_determinism(instrs, data):
    m = load_model()
    h = _harness(instrs)
    xs = data.draw(st.lists(st.integers(0, ONES), min_size=len(h.inputs), max_size=len(h.inputs)))
    assert run_block(h, xs, m) == run_block(h, xs, m)


@given(
    straight_blocks(memory=False),
    st.data(),
    st.sampled_from(["base", "switch", "mul", "mem"]),
    st.fractions(min_value=0, max_value=5),
)
def test_monotone_model(instrs, data, which, bump):
    m = load_model()
    h = _harness(instrs)
    xs = data.draw(st.lists(st.integers(0, ONES), min_size=len(h.inputs), max_size=len(h.inputs)))
    d = m.to_dict()
    if which == "base":
        op = data.draw(st.sampled_from(sorted(d["base_pJ"])))
        d["base_pJ"][op] = str(Fraction(d["base_pJ"][op]) + bump)
    else:
        key = {"switch": "switch_weight_pJ_per_bit", "mul": "mul_data_weight_pJ_per_bit",
               "mem": "mem_addr_weight_pJ_per_bit"}[which]
        d[key] = str(Fraction(d[key]) + bump)
    assert run_block(h, xs, EnergyModelParams.from_dict(d)) >= run_block(h, xs, m)


@pytest.mark.parametrize("name", ["fact", "reverse", "findMax"])
def test_witness_reproducible(name, programs, model):
    for b in extract_blocks(programs[name]).blocks.values():
        for h in harness_transform(b):
            if len(h.inputs) > 2:
                continue
            lo, hi, wl, wh = exhaustive_extrema(h, 6, model)
            assert run_block(h, wh, model) == hi and run_block(h, wl, model) == lo


@pytest.mark.parametrize("name", sorted(CORPUS))
@given(st.integers(0, 10), st.lists(st.integers(0, ONES), min_size=10, max_size=10))
def test_profile_consistency(name, n, data):
    p = CORPUS[name].program()
    m = load_model()
    trace = run_program_profile(p, [max(n, CORPUS[name].min_n)], data, m)
    assert trace.total_pJ == sum(trace.block_energy.values())
    per = trace.per_visit()
    assert trace.total_pJ == sum(trace.block_counts[b] * e for b, e in per.items())
