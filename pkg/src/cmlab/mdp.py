"""Interpreter-level Parity and Majority MDPs.

These are the reference semantics every circuit and value table is checked
against. 1-based indices appear only where the MDP itself
speaks of positions: parity actions ``(i, j)`` and DNF variables ``x1..xn``.

A Majority-MDP state is ``s[c] + s[r]``: ``b`` control bits followed by
``n = 2**b - 1`` representation bits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .bits import BitString, WidthError, ceil_log2, from_int, to_int
from .gadgets import Dnf, format_dnf, parse_dnf


# -- control functions -----------------------------------------------------------


@dataclass(frozen=True)
class ControlFunction:
    """A self-map of {0,1}^b stored as ``images[to_int(x)] == to_int(f(x))``."""

    b: int
    images: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.images) != 1 << self.b:
            raise ValueError(f"table for b={self.b} needs {1 << self.b} entries, got {len(self.images)}")
        if any(not 0 <= y < 1 << self.b for y in self.images):
            raise ValueError("table entry out of range")

    def __call__(self, x: BitString) -> BitString:
        if x.width != self.b:
            raise WidthError(f"control function over {self.b} bits got width {x.width}")
        return from_int(self.images[to_int(x)], self.b)

    def orbit(self) -> list[int]:
        """f^(k)(0) for k = 1 .. 2^b - 1, as integers."""
        out, x = [], 0
        for _ in range((1 << self.b) - 1):
            x = self.images[x]
            out.append(x)
        return out


def validate_control(f: ControlFunction) -> list[str]:
    errors = []
    top = (1 << f.b) - 1
    if f.images[top] != top:
        errors.append(f"fixed point: f(1_b) = {from_int(f.images[top], f.b)}, expected {from_int(top, f.b)}")
    if set(f.orbit()) != set(range(1, top + 1)):
        errors.append("traversal: orbit of 0_b does not cover every nonzero string")
    return errors


def increment_control(b: int) -> ControlFunction:
    if b < 1:
        raise ValueError("b must be >= 1")
    top = (1 << b) - 1
    return ControlFunction(b, tuple(min(x + 1, top) for x in range(top + 1)))


def control_from_order(order: Sequence[BitString]) -> ControlFunction:
    """Control function visiting ``order`` after 0_b; ``order`` must end with 1_b."""
    if not order:
        raise ValueError("empty order")
    b = order[0].width
    top = (1 << b) - 1
    values = [to_int(x) for x in order]
    if any(x.width != b for x in order) or sorted(values) != list(range(1, top + 1)):
        raise ValueError("order must be a permutation of the nonzero strings")
    if values[-1] != top:
        raise ValueError("order must end with 1_b")
    images = [0] * (top + 1)
    prev = 0
    for v in values:
        images[prev] = v
        prev = v
    images[top] = top
    return ControlFunction(b, tuple(images))


def control_to_json(f: ControlFunction) -> Any:
    if f == increment_control(f.b):
        return "increment"
    order = [str(from_int(x, f.b)) for x in f.orbit()]
    return {"order": order}


def control_from_json(obj: Any, b: int) -> ControlFunction:
    if obj == "increment":
        return increment_control(b)
    if isinstance(obj, dict) and "order" in obj:
        return control_from_order([BitString.from_str(x) for x in obj["order"]])
    raise ValueError(f"unrecognised control {obj!r}")


# -- MDP interface -----------------------------------------------------------------


class DeterministicMdp:
    """Finite-horizon deterministic MDP over bit-string states."""

    state_width: int
    horizon: int

    @property
    def actions(self) -> list:
        raise NotImplementedError

    def transition(self, s: BitString, a) -> BitString:
        raise NotImplementedError

    def reward(self, s: BitString, a) -> int:
        raise NotImplementedError

    def action_bits(self, a) -> BitString:
        """Binary encoding of an action, as fed to circuits and networks."""
        raise NotImplementedError


# -- Parity MDP ----------------------------------------------------------------------


@dataclass(frozen=True)
class ParityMdpSpec(DeterministicMdp):
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def state_width(self) -> int:
        return self.n

    @property
    def horizon(self) -> int:
        return self.n

    @property
    def index_width(self) -> int:
        return ceil_log2(self.n + 1)

    @property
    def actions(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(1, self.n + 1) for j in range(1, self.n + 1)]

    def transition(self, s: BitString, a: tuple[int, int]) -> BitString:
        return parity_transition(self, s, a)

    def reward(self, s: BitString, a=None) -> int:
        return parity_reward(self, s)

    def action_bits(self, a: tuple[int, int]) -> BitString:
        i, j = a
        return from_int(i, self.index_width) + from_int(j, self.index_width)


def parity_transition(spec: ParityMdpSpec, s: BitString, a: tuple[int, int]) -> BitString:
    if s.width != spec.n:
        raise WidthError(f"state width {s.width} != n={spec.n}")
    i, j = a
    if not (1 <= i <= spec.n and 1 <= j <= spec.n):
        raise IndexError(f"action {a} outside [1, {spec.n}]^2")
    # i == j flips twice, leaving s unchanged
    return s.flip(i - 1).flip(j - 1)


def parity_reward(spec: ParityMdpSpec, s: BitString) -> int:
    if s.width != spec.n:
        raise WidthError(f"state width {s.width} != n={spec.n}")
    return int(s.count() == 0)


def parity_model_oracle(spec: ParityMdpSpec, x: BitString) -> BitString:
    """Transition on the circuit's input layout (state, index i, index j).

    Encoded indices outside 1..n select no bit.
    """
    n, w = spec.n, spec.index_width
    s = x[:n]
    for idx in (to_int(x[n : n + w]), to_int(x[n + w :])):
        if 1 <= idx <= n:
            s = s.flip(idx - 1)
    return s


# -- Majority MDP --------------------------------------------------------------------


@dataclass(frozen=True)
class MajorityMdpSpec(DeterministicMdp):
    n: int
    s_reward: BitString
    control: ControlFunction
    condition: Dnf | None = None
    seed: int | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        b = ceil_log2(self.n + 1)
        if self.n != (1 << b) - 1:
            raise ValueError(f"n must be 2^b - 1, got {self.n}")
        if self.s_reward.width != self.n:
            raise WidthError(f"s_reward has width {self.s_reward.width}, expected {self.n}")
        if self.control.b != b:
            raise ValueError(f"control function is over {self.control.b} bits, expected {b}")
        problems = validate_control(self.control)
        if problems:
            raise ValueError("invalid control function: " + "; ".join(problems))
        if self.condition is not None and self.condition.num_vars != self.n:
            raise ValueError("condition must be over the n representation bits")

    @property
    def b(self) -> int:
        return self.control.b

    @property
    def state_width(self) -> int:
        return self.b + self.n

    @property
    def horizon(self) -> int:
        return (1 << self.b) + self.n

    @property
    def actions(self) -> list[int]:
        return [0, 1]

    def cond(self, rep: BitString) -> int:
        return 1 if self.condition is None else self.condition(rep)

    def split(self, s: BitString) -> tuple[BitString, BitString]:
        if s.width != self.state_width:
            raise WidthError(f"state width {s.width} != b+n={self.state_width}")
        return s[: self.b], s[self.b :]

    def transition(self, s: BitString, a: int) -> BitString:
        return majority_transition(self, s, a)

    def reward(self, s: BitString, a=None) -> int:
        return majority_reward(self, s)

    def action_bits(self, a: int) -> BitString:
        return BitString((a,))


def majority_transition(spec: MajorityMdpSpec, s: BitString, a: int) -> BitString:
    ctrl, rep = spec.split(s)
    if a not in (0, 1):
        raise ValueError(f"action must be 0 or 1, got {a!r}")
    if a == 1 and spec.cond(rep):
        i = to_int(ctrl)
        # index 0 names no representation bit: a no-op flip
        return ctrl + (rep.flip(i - 1) if i >= 1 else rep)
    return spec.control(ctrl) + rep


def majority_reward(spec: MajorityMdpSpec, s: BitString) -> int:
    ctrl, rep = spec.split(s)
    return int(ctrl.count() == spec.b and rep == spec.s_reward)


def majority_model_oracle(spec: MajorityMdpSpec, x: BitString) -> BitString:
    """Transition on the circuit's input layout (state bits, then the action)."""
    return majority_transition(spec, x[:-1], x[-1])


def majority_reward_oracle(spec: MajorityMdpSpec, x: BitString) -> BitString:
    return BitString((majority_reward(spec, x),))


def majority_spec_to_json(spec: MajorityMdpSpec) -> dict:
    return {
        "n": spec.n,
        "s_reward": str(spec.s_reward),
        "control": control_to_json(spec.control),
        "condition": None if spec.condition is None else format_dnf(spec.condition),
        "seed": spec.seed,
    }


def majority_spec_from_json(doc: dict | str) -> MajorityMdpSpec:
    if isinstance(doc, str):
        doc = json.loads(doc)
    n = int(doc["n"])
    b = ceil_log2(n + 1)
    cond = doc.get("condition")
    return MajorityMdpSpec(
        n=n,
        s_reward=BitString.from_str(doc["s_reward"]),
        control=control_from_json(doc.get("control", "increment"), b),
        condition=None if cond is None else parse_dnf(cond, n),
        seed=doc.get("seed"),
    )


# -- conditions ----------------------------------------------------------------------


def _check_dnf_params(n: int, m: int, k: int) -> None:
    if not (k >= 1 and k <= m and 2 * m < n):
        raise ValueError(f"need 1 <= k <= m < n/2, got n={n}, m={m}, k={k}")


def sample_dnf_arrays(n: int, m: int, k: int, count: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """``count`` conditions as arrays of 1-based variables and signs, each of shape (count, m // k, k)."""
    _check_dnf_params(n, m, k)
    terms = m // k
    # a random key per (condition, conjunct, variable); the k smallest pick k distinct variables
    variables = np.argsort(rng.random((count, terms, m)), axis=2)[:, :, :k] + 1
    signs = rng.integers(0, 2, size=(count, terms, k))
    return variables, signs


def sample_dnf_condition(n: int, m: int, k: int, rng: np.random.Generator) -> Dnf:
    """floor(m/k) conjuncts, each k distinct variables from x1..xm with uniform signs."""
    variables, signs = sample_dnf_arrays(n, m, k, 1, rng)
    conjuncts = tuple(
        tuple(zip(row_vars.tolist(), (row_signs == 1).tolist())) for row_vars, row_signs in zip(variables[0], signs[0])
    )
    return Dnf(n, conjuncts)


def evaluate_dnf_arrays(variables: np.ndarray, signs: np.ndarray, x: BitString) -> np.ndarray:
    """Evaluate every sampled condition at ``x``; returns a bool vector."""
    xs = np.array(x.bits, dtype=np.int64)
    return (xs[variables - 1] == signs).all(axis=2).any(axis=1)


def sample_satisfied_condition(
    n: int, m: int, k: int, s_reward: BitString, rng: np.random.Generator, max_tries: int = 10_000
) -> Dnf:
    """Draw conditions until one holds at ``s_reward``."""
    for _ in range(max_tries):
        cond = sample_dnf_condition(n, m, k, rng)
        if cond(s_reward):
            return cond
    raise RuntimeError(f"no satisfied condition in {max_tries} draws")


def free_variable_set(cond: Dnf | None, n: int, m: int | None = None) -> list[int]:
    """First 2^(b-1) - 1 variables (1-based, ascending) the condition ignores.

    With ``m`` (the sampler's literal range) the set is drawn from x_{m+1}..x_n,
    which no sampled condition can touch.
    """
    b = ceil_log2(n + 1)
    want = (1 << (b - 1)) - 1
    used = set() if cond is None else cond.variables()
    lowest = 1 if m is None else m + 1
    free = [v for v in range(lowest, n + 1) if v not in used]
    if len(free) < want:
        raise ValueError(f"only {len(free)} free variables, need {want}")
    return free[:want]


def canonical_majority_spec(n: int, s_reward: BitString | None = None) -> MajorityMdpSpec:
    """Unconditioned spec with the increment control; s_reward defaults to 1010..."""
    b = ceil_log2(n + 1)
    if s_reward is None:
        s_reward = BitString(tuple((i + 1) % 2 for i in range(n)))
    return MajorityMdpSpec(n, s_reward, increment_control(b))

