import warnings
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from energybounds.cfg import extract_blocks
from energybounds.hcir import Case, CostEquationSystem, Equation, block_level_costs, setup_cost_equations, to_hcir
from energybounds.isa import parse_program
from energybounds.solver import (
    ClosedForm,
    NumericTable,
    SolverError,
    eval_recurrence,
    fib,
    infer_basis,
    lucas,
    solve,
)

MUTUAL = """<ev>:
01: entsp 0x1
02: ldc r1, 0x0
03: lss r1, r1, r0
04: bf r1, <08>
05: sub r0, r0, 0x1
06: bl <od>
07: retsp 0x1
08: ldc r0, 0x1
09: retsp 0x1
<od>:
10: entsp 0x1
11: ldc r1, 0x0
12: lss r1, r1, r0
13: bf r1, <17>
14: sub r0, r0, 0x1
15: bl <ev>
16: retsp 0x1
17: ldc r0, 0x0
18: retsp 0x1
"""


def _unit_system(p):
    hc = to_hcir(extract_blocks(p))
    return setup_cost_equations(hc, block_level_costs(hc, {b: 1 for b in hc.cfg.blocks}), "upper", tag_costs={})


def _sys(cases, direction="upper", name="f"):
    return CostEquationSystem(name, {name: Equation(name, None, cases)}, direction, {name: "int-value"}, [name])


def _linear(a, c):
    return _sys([Case(1, None, Fraction(a), (("f", "rel", -1),)), Case(None, 0, Fraction(c), ())])


def test_fact_unit_solves_to_2n_plus_2(fact):
    sys = _unit_system(fact)
    cf = solve(sys)
    assert isinstance(cf, ClosedForm) and cf.render() == "2*N + 2"
    assert [eval_recurrence(sys, n) for n in range(6)] == [2, 4, 6, 8, 10, 12]
    assert eval_recurrence(sys, 3) == 8
    assert all(cf(n) == eval_recurrence(sys, n) == 2 * n + 2 for n in range(31))


def test_fib_example_closed_form():
    sys = _sys([Case(2, None, Fraction(2), (("f", "rel", -1), ("f", "rel", -2))), Case(None, 1, Fraction(1), ())])
    cf = solve(sys)
    assert cf.render() == "1.5*lucas(N) + 1.5*fib(N) - 2"
    for n in range(26):
        assert cf(n) == Fraction(3, 2) * lucas(n) + Fraction(3, 2) * fib(n) - 2 == eval_recurrence(sys, n)


def test_fib_program_basis(programs):
    cf = solve(_unit_system(programs["fib"]))
    assert cf.kinds == {"fib", "lucas", "poly"}


def test_constant():
    cf = solve(_sys([Case(None, None, Fraction(7), ())]))
    assert cf.render() == "7" and cf.degree == 0


def test_geometric():
    sys = _sys([Case(1, None, Fraction(3), (("f", "rel", -1), ("f", "rel", -1))), Case(None, 0, Fraction(1), ())])
    assert solve(sys).render() == "4*2^N - 3"


def test_selection_sort_quadratic(programs):
    assert solve(_unit_system(programs["selectionSort"])).degree == 2


def test_lower_direction_takes_minimum():
    cases = [Case(1, None, Fraction(2), (("f", "rel", -1),), True),
             Case(1, None, Fraction(5), (("f", "rel", -1),), True),
             Case(None, 0, Fraction(1), ())]
    assert solve(_sys(cases, "upper")).render() == "5*N + 1"
    assert solve(_sys(cases, "lower")).render() == "2*N + 1"


def test_mutual_recursion_falls_back_to_table():
    sys = _unit_system(parse_program(MUTUAL))
    assert infer_basis(sys) is None
    with pytest.warns(UserWarning, match="mutual recursion"):
        r = solve(sys)
    assert isinstance(r, NumericTable) and r(5) == 12 == eval_recurrence(sys, 5)
    with pytest.raises(SolverError):
        r(31)


def test_non_decreasing_recurrence_detected():
    sys = _sys([Case(None, None, Fraction(1), (("f", "rel", 0),))])
    with pytest.raises(SolverError):
        eval_recurrence(sys, 1)


def test_deep_recursion():
    assert eval_recurrence(_linear(1, 0), 5000) == 5000


def test_prefix_before_valid_from():
    # irregular small cases force a later fit start
    sys = _sys([Case(3, None, Fraction(2), (("f", "rel", -1),)), Case(None, 2, Fraction(10), ())])
    cf = solve(sys)
    assert all(cf(n) == eval_recurrence(sys, n) for n in range(31))


@given(st.fractions(min_value=0, max_value=50), st.fractions(min_value=0, max_value=50))
def test_exact_on_horizon_linear(a, c):
    sys = _linear(a, c)
    cf = solve(sys)
    assert all(cf(n) == eval_recurrence(sys, n) for n in range(41))


@given(st.fractions(min_value=0, max_value=50), st.fractions(min_value=0, max_value=50),
       st.sampled_from([(-1,), (-1, -2), (-1, -1)]))
def test_exact_and_monotone(a, c, shape):
    sys = _sys([Case(2, None, a, tuple(("f", "rel", d) for d in shape)), Case(None, 1, c, ())])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cf = solve(sys)
    vals = [eval_recurrence(sys, n) for n in range(31)]
    assert [cf(n) for n in range(31)] == vals
    assert vals == sorted(vals)
