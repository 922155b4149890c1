"""Circuit builders for the gadgets and MDP circuits.

Every builder returns a validated :class:`~cmlab.circuit.Circuit`. The
``_into`` helpers wire a gadget into an existing builder so that larger
circuits can share NOT gates and clauses instead of going through
:func:`~cmlab.circuit.compose`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Sequence

from .bits import BitString, all_bitstrings, ceil_log2, from_int
from .circuit import Circuit, CircuitBuilder

if TYPE_CHECKING:
    from .mdp import ControlFunction, MajorityMdpSpec

MAX_TABLE_WIDTH = 16

Literal = tuple[int, bool]  # (1-based variable index, positive?)


@dataclass(frozen=True)
class Dnf:
    """Disjunction of conjunctions of literals over ``num_vars`` variables."""

    num_vars: int
    conjuncts: tuple[tuple[Literal, ...], ...]

    def __post_init__(self) -> None:
        conjuncts = tuple(tuple((int(v), bool(p)) for v, p in term) for term in self.conjuncts)
        object.__setattr__(self, "conjuncts", conjuncts)
        for term in conjuncts:
            if not term:
                raise ValueError("empty conjunct")
            seen = [v for v, _ in term]
            if len(set(seen)) != len(seen):
                raise ValueError(f"repeated variable in conjunct {term}")
            for v in seen:
                if not 1 <= v <= self.num_vars:
                    raise ValueError(f"variable x{v} outside 1..{self.num_vars}")

    def __call__(self, x: BitString) -> int:
        if x.width != self.num_vars:
            raise ValueError(f"DNF over {self.num_vars} variables got width {x.width}")
        return int(any(all(x[v - 1] == int(p) for v, p in term) for term in self.conjuncts))

    def variables(self) -> set[int]:
        return {v for term in self.conjuncts for v, _ in term}

    @property
    def widths(self) -> list[int]:
        return [len(term) for term in self.conjuncts]

    def __str__(self) -> str:
        return format_dnf(self)


def format_dnf(f: Dnf) -> str:
    if not f.conjuncts:
        return "0"
    return " | ".join(
        "(" + " & ".join(("" if p else "!") + f"x{v}" for v, p in term) + ")" for term in f.conjuncts
    )


_LITERAL = re.compile(r"^(!?)x(\d+)$")


def parse_dnf(text: str, num_vars: int) -> Dnf:
    """Parse ``(x1 & !x2) | (x3 & x4)``; variables are 1-based."""
    text = text.strip()
    if text == "0":
        return Dnf(num_vars, ())
    conjuncts = []
    for raw_term in text.split("|"):
        term = raw_term.strip()
        if term.startswith("(") and term.endswith(")"):
            term = term[1:-1]
        literals = []
        for raw_lit in term.split("&"):
            m = _LITERAL.match(raw_lit.strip())
            if m is None:
                raise ValueError(f"bad literal {raw_lit.strip()!r} in {text!r}")
            literals.append((int(m.group(2)), m.group(1) == ""))
        conjuncts.append(tuple(literals))
    return Dnf(num_vars, tuple(conjuncts))


# -- wiring helpers ----------------------------------------------------------


def _delta_into(bld: CircuitBuilder, wires: Sequence[int], k: int, *extra: int) -> int:
    """AND of literals matching k's MSB-first expansion, plus any extra conjuncts."""
    lits = [bld.literal(w, bit == 1) for w, bit in zip(wires, from_int(k, len(wires)))]
    return bld.and_(*lits, *extra)


def _dnf_into(bld: CircuitBuilder, f: Dnf, wires: Sequence[int]) -> int:
    if not f.conjuncts:
        return bld.const(0)
    terms = [bld.and_(*(bld.literal(wires[v - 1], p) for v, p in term)) for term in f.conjuncts]
    return bld.or_(*terms)


def _cnf_into(bld: CircuitBuilder, wires: Sequence[int], table: Sequence[BitString]) -> list[int]:
    """Per output bit, AND over the inputs where the bit is 0 of the clause false exactly there."""
    width = len(wires)
    out_width = table[0].width
    clauses: dict[int, int] = {}

    def clause(x: int) -> int:
        if x not in clauses:
            xb = from_int(x, width)
            clauses[x] = bld.or_(*(bld.literal(w, bit == 0) for w, bit in zip(wires, xb)))
        return clauses[x]

    outs = []
    for i in range(out_width):
        zeros = [x for x, y in enumerate(table) if y[i] == 0]
        outs.append(bld.and_(*(clause(x) for x in zeros)) if zeros else bld.const(1))
    return outs


# -- small gadgets -----------------------------------------------------------


def xor2() -> Circuit:
    bld = CircuitBuilder(2)
    return bld.build([bld.xor(0, 1)])


def delta_k(b: int, k: int) -> Circuit:
    """Indicator of ``to_int(x) == k`` over b input bits."""
    if not 0 <= k < 1 << b:
        raise ValueError(f"k={k} out of range for {b} bits")
    bld = CircuitBuilder(b)
    return bld.build([_delta_into(bld, bld.inputs, k)])


def and_circuit(n: int) -> Circuit:
    """A single n-ary AND over the inputs."""
    bld = CircuitBuilder(n)
    return bld.build([bld.and_(*bld.inputs, collapse=False)])


def dnf_circuit(f: Dnf) -> Circuit:
    bld = CircuitBuilder(f.num_vars)
    return bld.build([_dnf_into(bld, f, bld.inputs)])


def truth_table_circuit(f: Callable[[BitString], BitString], b: int) -> Circuit:
    """Lower an arbitrary function on b bits to per-output-bit CNF (depth <= 3)."""
    if b > MAX_TABLE_WIDTH:
        raise ValueError(f"truth table over {b} inputs is too large (max {MAX_TABLE_WIDTH})")
    table = [f(x) for x in all_bitstrings(b)]
    bld = CircuitBuilder(b)
    return bld.build(_cnf_into(bld, bld.inputs, table))


# -- arithmetic ----------------------------------------------------------------


def addition_circuit(n: int) -> Circuit:
    """Carry-lookahead adder: inputs a then b (n bits each, MSB first), n+1 outputs.

    Position j is counted from the most significant end, so less significant
    positions have larger indices.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    bld = CircuitBuilder(2 * n)
    a, b = bld.inputs[:n], bld.inputs[n:]
    gen = [bld.and_(a[j], b[j]) for j in range(n)]
    prop = [bld.or_(a[j], b[j]) for j in range(n)]

    def carry_into(j: int) -> int | None:
        # carry entering position j from everything less significant
        terms = [bld.and_(gen[l], *prop[j + 1 : l]) for l in range(j + 1, n)]
        return bld.or_(*terms) if terms else None

    sums = []
    for j in range(n):
        half = bld.xor(a[j], b[j])
        c = carry_into(j)
        sums.append(half if c is None else bld.xor(half, c))
    carry_out = bld.or_(*(bld.and_(gen[l], *prop[:l]) for l in range(n)))
    return bld.build([carry_out, *sums])


def max_circuit(n: int) -> Circuit:
    """Maximum of two n-bit numbers via a greater-than comparator bit."""
    if n < 1:
        raise ValueError("n must be >= 1")
    bld = CircuitBuilder(2 * n)
    w1, w2 = bld.inputs[:n], bld.inputs[n:]
    same = [bld.not_(bld.xor(w1[j], w2[j])) for j in range(n)]
    greater = bld.or_(*(bld.and_(w1[i], bld.not_(w2[i]), *same[:i]) for i in range(n)))
    not_greater = bld.not_(greater)
    outs = [bld.or_(bld.and_(w1[i], greater), bld.and_(w2[i], not_greater)) for i in range(n)]
    return bld.build(outs)


# -- MDP circuits --------------------------------------------------------------


def control_circuit(f: ControlFunction) -> Circuit:
    return truth_table_circuit(f, f.b)


def parity_mdp_reward_circuit(n: int) -> Circuit:
    """1 iff every state bit is 0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    bld = CircuitBuilder(n)
    return bld.build([bld.and_(*(bld.not_(w) for w in bld.inputs), collapse=False)])


def parity_action_width(n: int) -> int:
    return ceil_log2(n + 1)


def parity_mdp_model_circuit(n: int) -> Circuit:
    """Inputs: n state bits, then index i and index j (b bits each, MSB first).

    Index values outside 1..n select no bit.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    b = parity_action_width(n)
    bld = CircuitBuilder(n + 2 * b)
    s = bld.inputs[:n]
    i_bits, j_bits = bld.inputs[n : n + b], bld.inputs[n + b :]
    outs = []
    for k in range(1, n + 1):
        toggle = bld.xor(_delta_into(bld, i_bits, k), _delta_into(bld, j_bits, k))
        outs.append(bld.xor(s[k - 1], toggle))
    return bld.build(outs)


def majority_mdp_reward_circuit(spec: MajorityMdpSpec) -> Circuit:
    """Inputs: b control bits then n representation bits."""
    b, n = spec.b, spec.n
    bld = CircuitBuilder(b + n)
    c, r = bld.inputs[:b], bld.inputs[b:]
    # not(r_i xor s_reward_i) with a constant s_reward_i is the matching literal
    lits = [bld.literal(r[i], spec.s_reward[i] == 1) for i in range(n)]
    return bld.build([bld.and_(*c, *lits, collapse=False)])


def majority_mdp_model_circuit(spec: MajorityMdpSpec) -> Circuit:
    """Inputs: b control bits, n representation bits, then the action bit.

    The enable bit ``e = a & C(s[r])`` (just ``a`` when unconditioned)
    selects between holding the control bits and flipping bit ``s[c]``,
    or advancing the control function.
    """
    b, n = spec.b, spec.n
    bld = CircuitBuilder(b + n + 1)
    c, r, a = bld.inputs[:b], bld.inputs[b : b + n], bld.inputs[b + n]
    if spec.condition is None:
        enable = a
    else:
        enable = bld.and_(a, _dnf_into(bld, spec.condition, r))
    table = [spec.control(x) for x in all_bitstrings(b)]
    advanced = _cnf_into(bld, c, table)
    hold = bld.not_(enable)
    ctrl = [bld.or_(bld.and_(advanced[i], hold), bld.and_(c[i], enable)) for i in range(b)]
    rep = [bld.xor(r[k - 1], _delta_into(bld, c, k, enable)) for k in range(1, n + 1)]
    return bld.build([*ctrl, *rep])
