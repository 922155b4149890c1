"""Fixed-width bit strings.

Bits are stored most-significant first, so ``BitString.from_str("101")``
is the number 5 and ``x[0]`` is its top bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator

MAX_WIDTH = 64


class WidthError(ValueError):
    pass


@dataclass(frozen=True)
class BitString:
    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        bits = tuple(self.bits)
        for b in bits:
            if b not in (0, 1):
                raise ValueError(f"not a bit: {b!r}")
        object.__setattr__(self, "bits", tuple(int(b) for b in bits))

    @classmethod
    def of(cls, bits: Iterable[int]) -> BitString:
        return cls(tuple(bits))

    @classmethod
    def from_str(cls, text: str) -> BitString:
        if any(ch not in "01" for ch in text):
            raise ValueError(f"bit string must contain only '0'/'1': {text!r}")
        return cls(tuple(int(ch) for ch in text))

    @classmethod
    def zeros(cls, width: int) -> BitString:
        return cls((0,) * width)

    @classmethod
    def ones(cls, width: int) -> BitString:
        return cls((1,) * width)

    @property
    def width(self) -> int:
        return len(self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits)

    def __getitem__(self, key):
        if isinstance(key, slice):
            return BitString(self.bits[key])
        return self.bits[key]

    def __add__(self, other: BitString) -> BitString:
        return BitString(self.bits + other.bits)

    def __xor__(self, other: BitString) -> BitString:
        _same_width(self, other)
        return BitString(tuple(a ^ b for a, b in zip(self.bits, other.bits)))

    def __invert__(self) -> BitString:
        return BitString(tuple(1 - b for b in self.bits))

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    def flip(self, index: int) -> BitString:
        """Return a copy with the bit at 0-based ``index`` negated."""
        bits = list(self.bits)
        bits[index] ^= 1
        return BitString(tuple(bits))

    def count(self) -> int:
        return sum(self.bits)


def _same_width(a: BitString, b: BitString) -> None:
    if a.width != b.width:
        raise WidthError(f"width mismatch: {a.width} vs {b.width}")


def to_int(x: BitString) -> int:
    value = 0
    for b in x.bits:
        value = (value << 1) | b
    return value


def from_int(value: int, width: int) -> BitString:
    if width < 0 or width > MAX_WIDTH:
        raise WidthError(f"unsupported width {width}")
    if value < 0 or value >= 1 << width:
        raise OverflowError(f"{value} does not fit in {width} bits")
    return BitString(tuple((value >> (width - 1 - j)) & 1 for j in range(width)))


def hamming(a: BitString, b: BitString) -> int:
    _same_width(a, b)
    return sum(x != y for x, y in zip(a.bits, b.bits))


def parity(x: BitString) -> int:
    return sum(x.bits) % 2


def majority(x: BitString) -> int:
    # strict: exactly half is not a majority
    return int(2 * sum(x.bits) > x.width)


def all_bitstrings(width: int) -> Iterator[BitString]:
    """Every string of the given width in increasing numeric order."""
    for bits in product((0, 1), repeat=width):
        yield BitString(bits)


def ceil_log2(n: int) -> int:
    """Smallest b with 2**b >= n."""
    if n < 1:
        raise ValueError("n must be positive")
    return (n - 1).bit_length()
