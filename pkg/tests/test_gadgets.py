import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmlab import gadgets
from cmlab.bits import BitString, all_bitstrings, from_int, to_int
from cmlab.circuit import depth, size
from cmlab.gadgets import Dnf, format_dnf, parse_dnf
from cmlab.mdp import (
    MajorityMdpSpec,
    ParityMdpSpec,
    canonical_majority_spec,
    control_from_order,
    increment_control,
    majority_model_oracle,
    parity_model_oracle,
    parity_reward,
    sample_satisfied_condition,
)
from cmlab.verify import check_circuit_equivalence

from oracles import int_bits


def bs(text):
    return BitString.from_str(text)


@pytest.mark.parametrize("x, y", [("00", "0"), ("10", "1"), ("01", "1"), ("11", "0")])
def test_xor_truth_table(x, y):
    assert gadgets.xor2()(bs(x)) == bs(y)


@pytest.mark.parametrize("b, k, x, y", [(2, 2, "10", 1), (2, 2, "01", 0), (3, 0, "000", 1)])
def test_delta_examples(b, k, x, y):
    assert gadgets.delta_k(b, k)(bs(x)) == BitString((y,))


@pytest.mark.parametrize("b", [1, 2, 3, 4])
def test_delta_is_indicator(b):
    for k in range(1 << b):
        c = gadgets.delta_k(b, k)
        assert depth(c) <= 2
        for x in all_bitstrings(b):
            assert c(x)[0] == int(to_int(x) == k)


def test_delta_out_of_range():
    with pytest.raises(ValueError):
        gadgets.delta_k(2, 4)


def test_dnf_examples():
    f = parse_dnf("(x1 & !x2) | (x2)", 2)
    c = gadgets.dnf_circuit(f)
    assert c(bs("10")) == bs("1")
    assert c(bs("00")) == bs("0")
    assert depth(c) <= 3


def test_dnf_format_round_trip():
    f = Dnf(4, (((1, True), (3, False)), ((2, True),)))
    assert format_dnf(f) == "(x1 & !x3) | (x2)"
    assert parse_dnf(format_dnf(f), 4) == f
    assert parse_dnf("0", 3) == Dnf(3, ())


def test_dnf_validation():
    with pytest.raises(ValueError):
        Dnf(2, (((1, True), (1, False)),))
    with pytest.raises(ValueError):
        Dnf(2, (((3, True),),))
    with pytest.raises(ValueError):
        parse_dnf("(x1 & y2)", 2)


@st.composite
def dnfs(draw):
    n = draw(st.integers(1, 10))
    terms = []
    for _ in range(draw(st.integers(0, 4))):
        vs = draw(st.lists(st.integers(1, n), min_size=1, max_size=min(n, 3), unique=True))
        terms.append(tuple((v, draw(st.booleans())) for v in vs))
    return Dnf(n, tuple(terms))


@given(dnfs())
def test_dnf_circuit_matches_direct_evaluation(f):
    # direct truth evaluation written against the raw literal tuples
    c = gadgets.dnf_circuit(f)
    for v in range(1 << f.num_vars):
        bits = int_bits(v, f.num_vars)
        want = int(any(all(bits[i - 1] == int(p) for i, p in term) for term in f.conjuncts))
        assert c(BitString(bits))[0] == want


def test_truth_table_identity_and_increment():
    ident = gadgets.truth_table_circuit(lambda x: x, 2)
    inc = gadgets.truth_table_circuit(lambda x: from_int((to_int(x) + 1) % 4, 2), 2)
    for v in range(4):
        x = from_int(v, 2)
        assert ident(x) == x
        assert to_int(inc(x)) == (v + 1) % 4


@given(st.lists(st.integers(0, 7), min_size=16, max_size=16))
def test_truth_table_random_function(table):
    c = gadgets.truth_table_circuit(lambda x: from_int(table[to_int(x)], 3), 4)
    assert depth(c) <= 3
    for v in range(16):
        assert to_int(c(from_int(v, 4))) == table[v]


def test_truth_table_too_wide():
    with pytest.raises(ValueError):
        gadgets.truth_table_circuit(lambda x: x, 17)


def test_addition_examples():
    c = gadgets.addition_circuit(3)
    assert c(bs("101011")) == bs("1000")
    assert c(bs("000000")) == bs("0000")


@pytest.mark.parametrize("n", range(1, 7))
def test_addition_exhaustive(n):
    c = gadgets.addition_circuit(n)
    xs = np.array([list(x) for x in all_bitstrings(2 * n)], dtype=bool)
    weights = 1 << np.arange(n - 1, -1, -1)
    a, b = xs[:, :n] @ weights, xs[:, n:] @ weights
    from cmlab.circuit import evaluate_batch

    got = evaluate_batch(c, xs).astype(np.int64) @ (1 << np.arange(n, -1, -1))
    assert np.array_equal(got, a + b)


@given(st.integers(0, 4095), st.integers(0, 4095))
def test_addition_12_bit(a, b):
    c = gadgets.addition_circuit(12)
    assert to_int(c(from_int(a, 12) + from_int(b, 12))) == a + b


def test_max_examples():
    c = gadgets.max_circuit(3)
    assert c(bs("101011")) == bs("101")
    for v in range(8):
        x = from_int(v, 3)
        assert c(x + x) == x


@pytest.mark.parametrize("n", range(1, 7))
def test_max_exhaustive(n):
    c = gadgets.max_circuit(n)
    for a in range(1 << n):
        for b in range(1 << n):
            assert to_int(c(from_int(a, n) + from_int(b, n))) == max(a, b)


def test_control_circuit_increment_b2():
    c = gadgets.control_circuit(increment_control(2))
    assert c(bs("00")) == bs("01")
    assert c(bs("11")) == bs("11")


def test_control_circuit_arbitrary_b3():
    f = control_from_order([from_int(v, 3) for v in (5, 2, 6, 1, 3, 4, 7)])
    c = gadgets.control_circuit(f)
    for x in all_bitstrings(3):
        assert c(x) == f(x)


def test_parity_reward_circuit():
    c = gadgets.parity_mdp_reward_circuit(3)
    assert c(bs("000")) == bs("1")
    assert c(bs("010")) == bs("0")
    spec = ParityMdpSpec(8)
    r = check_circuit_equivalence(
        gadgets.parity_mdp_reward_circuit(8), lambda x: BitString((parity_reward(spec, x),)), 8
    )
    assert r.passed and r.inputs_checked == 256


def test_parity_model_circuit():
    c = gadgets.parity_mdp_model_circuit(3)
    w = gadgets.parity_action_width(3)
    assert c(bs("110") + from_int(1, w) + from_int(3, w)) == bs("011")
    assert c(bs("110") + from_int(2, w) + from_int(2, w)) == bs("110")
    spec = ParityMdpSpec(4)
    r = check_circuit_equivalence(gadgets.parity_mdp_model_circuit(4), lambda x: parity_model_oracle(spec, x), 10)
    assert r.passed


def test_majority_reward_circuit():
    spec = canonical_majority_spec(3)
    c = gadgets.majority_mdp_reward_circuit(spec)
    assert c(bs("11") + spec.s_reward) == bs("1")
    assert c(bs("10") + spec.s_reward) == bs("0")
    assert sum(c(x)[0] for x in all_bitstrings(5)) == 1


def test_majority_model_examples():
    spec = MajorityMdpSpec(3, bs("101"), increment_control(2))
    c = gadgets.majority_mdp_model_circuit(spec)
    assert c(bs("01110") + bs("1")) == bs("01010")
    assert c(bs("01110") + bs("0")) == bs("10110")


def test_conditioned_majority_model_exhaustive():
    base = canonical_majority_spec(7)
    cond = sample_satisfied_condition(7, 3, 2, base.s_reward, np.random.default_rng(4))
    spec = MajorityMdpSpec(7, base.s_reward, base.control, cond)
    r = check_circuit_equivalence(
        gadgets.majority_mdp_model_circuit(spec), lambda x: majority_model_oracle(spec, x), 11
    )
    assert r.passed and r.inputs_checked == 2**11


# sizes and depths measured from the builders, frozen as regression values
FROZEN_METRICS = {
    "majority-model": {3: (35, 5), 7: (75, 5), 15: (145, 5), 31: (279, 5)},
    "majority-reward": {3: (7, 2), 7: (14, 2), 15: (27, 2), 31: (52, 2)},
    "parity-model": {3: (47, 8), 7: (103, 8), 15: (211, 8), 31: (423, 8)},
    "addition": {2: (25, 6), 4: (60, 6), 8: (142, 6), 16: (354, 6)},
    "max": {2: (26, 9), 4: (50, 9), 8: (98, 9), 16: (194, 9)},
}


@pytest.mark.parametrize("family", sorted(FROZEN_METRICS))
def test_frozen_metrics(family):
    from cmlab.verify import FAMILIES

    for n, (sz, dp) in FROZEN_METRICS[family].items():
        c = FAMILIES[family](n)
        assert (size(c), depth(c)) == (sz, dp)
