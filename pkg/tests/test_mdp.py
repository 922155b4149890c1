import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmlab.bits import BitString, all_bitstrings, from_int, parity
from cmlab.gadgets import Dnf
from cmlab.mdp import (
    ControlFunction,
    MajorityMdpSpec,
    ParityMdpSpec,
    canonical_majority_spec,
    control_from_json,
    control_from_order,
    control_to_json,
    evaluate_dnf_arrays,
    free_variable_set,
    increment_control,
    majority_reward,
    majority_spec_from_json,
    majority_spec_to_json,
    majority_transition,
    parity_reward,
    parity_transition,
    sample_dnf_arrays,
    sample_dnf_condition,
    validate_control,
)


def bs(text):
    return BitString.from_str(text)


def test_parity_transition_examples():
    spec = ParityMdpSpec(3)
    assert parity_transition(spec, bs("110"), (1, 3)) == bs("011")
    assert parity_transition(spec, bs("110"), (2, 2)) == bs("110")


def test_parity_transition_out_of_range():
    with pytest.raises(IndexError):
        parity_transition(ParityMdpSpec(3), bs("110"), (0, 3))
    with pytest.raises(IndexError):
        parity_transition(ParityMdpSpec(3), bs("110"), (1, 4))


def test_parity_conserved_n5():
    spec = ParityMdpSpec(5)
    for s in all_bitstrings(5):
        for a in spec.actions:
            assert parity(parity_transition(spec, s, a)) == parity(s)


def test_parity_reward_examples():
    spec = ParityMdpSpec(3)
    assert parity_reward(spec, bs("000")) == 1
    assert parity_reward(spec, bs("100")) == 0
    assert sum(parity_reward(ParityMdpSpec(6), s) for s in all_bitstrings(6)) == 1


def test_increment_control_table():
    f = increment_control(2)
    assert [str(f(from_int(v, 2))) for v in range(4)] == ["01", "10", "11", "11"]
    assert f.orbit()[-1] == 3
    assert validate_control(increment_control(4)) == []
    assert validate_control(increment_control(3)) == []


def test_identity_control_fails_traversal():
    problems = validate_control(ControlFunction(2, (0, 1, 2, 3)))
    assert any("traversal" in p for p in problems)


def test_fixed_point_violation():
    problems = validate_control(ControlFunction(2, (1, 2, 3, 0)))
    assert any("fixed point" in p for p in problems)


def test_control_from_order_example():
    f = control_from_order([bs("10"), bs("01"), bs("11")])
    assert f(bs("00")) == bs("10")
    assert f(bs("10")) == bs("01")
    assert f(bs("01")) == bs("11")
    assert f(bs("11")) == bs("11")


def test_control_from_order_must_end_at_ones():
    with pytest.raises(ValueError):
        control_from_order([bs("11"), bs("01"), bs("10")])


def test_all_b2_orderings_valid():
    for order in (["01", "10", "11"], ["10", "01", "11"]):
        assert validate_control(control_from_order([bs(x) for x in order])) == []


@given(st.permutations(list(range(1, 7))))
def test_any_ordering_ending_at_ones_is_valid(perm):
    f = control_from_order([from_int(v, 3) for v in [*perm, 7]])
    assert validate_control(f) == []
    assert control_from_json(control_to_json(f), 3) == f


def test_majority_transition_examples():
    spec = MajorityMdpSpec(3, bs("101"), increment_control(2))
    assert majority_transition(spec, bs("01110"), 1) == bs("01010")
    assert majority_transition(spec, bs("01110"), 0) == bs("10110")
    assert majority_transition(spec, bs("00110"), 1) == bs("00110")


def test_conditioned_false_branch_advances_control():
    never = Dnf(3, ())
    spec = MajorityMdpSpec(3, bs("101"), increment_control(2), never)
    for s in all_bitstrings(5):
        assert majority_transition(spec, s, 1) == spec.control(s[:2]) + s[2:]


def test_majority_reward_examples():
    spec = canonical_majority_spec(7)
    assert majority_reward(spec, bs("111") + spec.s_reward) == 1
    assert majority_reward(spec, bs("000") + spec.s_reward) == 0
    assert sum(majority_reward(spec, s) for s in all_bitstrings(10)) == 1


def test_majority_spec_validation():
    with pytest.raises(ValueError):
        MajorityMdpSpec(4, bs("1010"), increment_control(3))
    with pytest.raises(ValueError):
        MajorityMdpSpec(3, bs("101"), ControlFunction(2, (0, 1, 2, 3)))
    assert canonical_majority_spec(7).horizon == 15


def test_majority_spec_json_round_trip():
    spec = MajorityMdpSpec(
        7, bs("0110100"), control_from_order([from_int(v, 3) for v in (3, 1, 2, 5, 4, 6, 7)]),
        Dnf(7, (((1, True), (2, False)),)), seed=5,
    )
    back = majority_spec_from_json(majority_spec_to_json(spec))
    assert back == spec and back.seed == 5


def test_sampler_forced_structure():
    rng = np.random.default_rng(0)
    f = sample_dnf_condition(7, 3, 3, rng)
    assert len(f.conjuncts) == 1
    assert {v for v, _ in f.conjuncts[0]} == {1, 2, 3}


@given(st.integers(1, 5), st.integers(0, 10_000))
def test_sampler_shape(k, seed):
    m = 3 * k
    f = sample_dnf_condition(7 * k, m, k, np.random.default_rng(seed))
    assert f.widths == [k] * (m // k)
    assert max(f.variables()) <= m


def test_sampler_rejects_bad_params():
    rng = np.random.default_rng(0)
    for n, m, k in [(7, 4, 2), (7, 3, 0), (7, 2, 3)]:
        with pytest.raises(ValueError):
            sample_dnf_condition(n, m, k, rng)


def test_batched_evaluation_matches_dnf():
    rng = np.random.default_rng(3)
    variables, signs = sample_dnf_arrays(15, 6, 2, 50, rng)
    x = bs("101100111000101")
    got = evaluate_dnf_arrays(variables, signs, x)
    for i in range(50):
        f = Dnf(15, tuple(tuple(zip(v.tolist(), (s == 1).tolist())) for v, s in zip(variables[i], signs[i])))
        assert bool(f(x)) == got[i]


def test_free_variable_set():
    assert free_variable_set(None, 7) == [1, 2, 3]
    f = sample_dnf_condition(7, 3, 2, np.random.default_rng(1))
    free = free_variable_set(f, 7, m=3)
    assert len(free) == 3 and set(free) <= {4, 5, 6, 7}
    assert not set(free_variable_set(f, 7)) & f.variables()


def test_condition_invariant_inside_free_set():
    f = sample_dnf_condition(7, 3, 2, np.random.default_rng(2))
    free = free_variable_set(f, 7)
    for x in all_bitstrings(7):
        for i in free:
            assert f(x.flip(i - 1)) == f(x)
