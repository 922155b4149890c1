import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmlab.bits import (
    BitString,
    WidthError,
    all_bitstrings,
    ceil_log2,
    from_int,
    hamming,
    majority,
    parity,
    to_int,
)

bitstrings = st.lists(st.integers(0, 1), min_size=0, max_size=40).map(BitString.of)


def bs(text):
    return BitString.from_str(text)


@pytest.mark.parametrize("text, value", [("101", 5), ("00", 0), ("111", 7)])
def test_to_int_examples(text, value):
    assert to_int(bs(text)) == value


@pytest.mark.parametrize("value, width, text", [(3, 3, "011"), (0, 2, "00"), (6, 3, "110")])
def test_from_int_examples(value, width, text):
    assert from_int(value, width) == bs(text)


def test_from_int_rejects_overflow_and_width():
    with pytest.raises(OverflowError):
        from_int(8, 3)
    with pytest.raises(OverflowError):
        from_int(-1, 3)
    with pytest.raises(WidthError):
        from_int(0, 65)


@given(bitstrings)
def test_round_trip(x):
    assert from_int(to_int(x), x.width) == x


@given(st.integers(0, 2**20 - 1))
def test_to_int_matches_python_format(v):
    assert str(from_int(v, 20)) == format(v, "020b")


@pytest.mark.parametrize("a, b, d", [("101", "110", 2), ("00", "11", 2)])
def test_hamming_examples(a, b, d):
    assert hamming(bs(a), bs(b)) == d


@given(bitstrings)
def test_hamming_identity_and_complement(x):
    assert hamming(x, x) == 0
    assert hamming(x, ~x) == x.width


def test_hamming_width_mismatch():
    with pytest.raises(WidthError):
        hamming(bs("01"), bs("011"))


@pytest.mark.parametrize("text, p", [("1101", 1), ("000", 0), ("11", 0)])
def test_parity_examples(text, p):
    assert parity(bs(text)) == p


@pytest.mark.parametrize("text, m", [("110", 1), ("01", 0), ("10001", 0)])
def test_majority_examples(text, m):
    assert majority(bs(text)) == m


@given(bitstrings)
def test_parity_is_xor_fold(x):
    acc = 0
    for b in x:
        acc ^= b
    assert parity(x) == acc


@given(bitstrings.filter(lambda x: x.width % 2 == 1))
def test_majority_complement_odd_width(x):
    assert majority(~x) == 1 - majority(x)


def test_all_bitstrings_numeric_order():
    assert [to_int(x) for x in all_bitstrings(4)] == list(range(16))


def test_flip_and_slicing():
    x = bs("1010")
    assert x.flip(0) == bs("0010")
    assert x[1:3] == bs("01")
    assert x[:2] + x[2:] == x
    assert x ^ bs("1111") == bs("0101")


def test_invalid_bits_rejected():
    with pytest.raises(ValueError):
        BitString((0, 2))
    with pytest.raises(ValueError):
        BitString.from_str("10a")


@pytest.mark.parametrize("n, b", [(1, 0), (2, 1), (4, 2), (8, 3), (9, 4), (64, 6)])
def test_ceil_log2(n, b):
    assert ceil_log2(n) == b
