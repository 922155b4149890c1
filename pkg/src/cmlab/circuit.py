"""Boolean circuits: an unbounded fan-in AND/OR/NOT gate DAG.

Gates are kept in topological order (every argument id is smaller than the
gate's own id), which makes validation and evaluation single forward passes.
Size counts every vertex, inputs and constants included; depth is the
longest path measured in edges, so a bare input has depth 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .bits import BitString, WidthError


class Kind(str, Enum):
    INPUT = "INPUT"
    CONST = "CONST"
    AND = "AND"
    OR = "OR"
    NOT = "NOT"


class MalformedCircuitError(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


class CircuitFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    id: int
    kind: Kind
    args: tuple[int, ...] = ()
    pos: int | None = None
    bit: int | None = None


@dataclass(frozen=True)
class Circuit:
    input_count: int
    gates: tuple[Gate, ...]
    outputs: tuple[int, ...]

    @property
    def output_count(self) -> int:
        return len(self.outputs)

    @cached_property
    def problems(self) -> tuple[str, ...]:
        return tuple(validate(self))

    def check(self) -> None:
        if self.problems:
            raise MalformedCircuitError(list(self.problems))

    def __call__(self, x: BitString) -> BitString:
        return evaluate(self, x)


def validate(c: Circuit) -> list[str]:
    """Return every structural violation found in ``c`` (empty when well-formed)."""
    problems: list[str] = []
    if c.input_count < 0:
        problems.append(f"negative input count {c.input_count}")
    seen_pos: set[int] = set()
    for index, g in enumerate(c.gates):
        where = f"gate {index}"
        if g.id != index:
            problems.append(f"{where}: id {g.id} is not consecutive")
        try:
            kind = Kind(g.kind)
        except ValueError:
            problems.append(f"{where}: unknown kind {g.kind!r}")
            continue
        if kind in (Kind.INPUT, Kind.CONST):
            if g.args:
                problems.append(f"{where}: {kind.value} gate must have no args")
        elif kind is Kind.NOT:
            if len(g.args) != 1:
                problems.append(f"{where}: arity error, NOT takes exactly 1 arg, got {len(g.args)}")
        elif not g.args:
            problems.append(f"{where}: arity error, {kind.value} needs at least 1 arg")
        for a in g.args:
            if a < 0:
                problems.append(f"{where}: negative arg id {a}")
            elif a >= index:
                problems.append(f"{where}: cycle error, arg {a} is not an earlier gate")
        if kind is Kind.INPUT:
            if g.pos is None or not 0 <= g.pos < c.input_count:
                problems.append(f"{where}: input position {g.pos} out of range [0, {c.input_count})")
            elif g.pos in seen_pos:
                problems.append(f"{where}: input position {g.pos} appears twice")
            else:
                seen_pos.add(g.pos)
        if kind is Kind.CONST and g.bit not in (0, 1):
            problems.append(f"{where}: constant must be 0 or 1, got {g.bit!r}")
    for j, o in enumerate(c.outputs):
        if not 0 <= o < len(c.gates):
            problems.append(f"output {j}: invalid gate id {o}")
    return problems


def evaluate(c: Circuit, x: BitString) -> BitString:
    c.check()
    if x.width != c.input_count:
        raise WidthError(f"circuit takes {c.input_count} inputs, got {x.width}")
    val = [0] * len(c.gates)
    for g in c.gates:
        k = g.kind
        if k is Kind.INPUT:
            v = x.bits[g.pos]
        elif k is Kind.CONST:
            v = g.bit
        elif k is Kind.NOT:
            v = 1 - val[g.args[0]]
        elif k is Kind.AND:
            v = int(all(val[a] for a in g.args))
        else:
            v = int(any(val[a] for a in g.args))
        val[g.id] = v
    return BitString(tuple(val[o] for o in c.outputs))


def evaluate_batch(c: Circuit, xs: np.ndarray) -> np.ndarray:
    """Evaluate on many inputs at once; ``xs`` has shape (N, input_count)."""
    c.check()
    xs = np.asarray(xs, dtype=bool)
    if xs.ndim != 2 or xs.shape[1] != c.input_count:
        raise WidthError(f"expected shape (N, {c.input_count}), got {xs.shape}")
    val: list[np.ndarray] = []
    for g in c.gates:
        k = g.kind
        if k is Kind.INPUT:
            v = xs[:, g.pos]
        elif k is Kind.CONST:
            v = np.full(xs.shape[0], bool(g.bit))
        elif k is Kind.NOT:
            v = ~val[g.args[0]]
        elif k is Kind.AND:
            v = np.logical_and.reduce([val[a] for a in g.args])
        else:
            v = np.logical_or.reduce([val[a] for a in g.args])
        val.append(v)
    if not c.outputs:
        return np.zeros((xs.shape[0], 0), dtype=np.uint8)
    return np.stack([val[o] for o in c.outputs], axis=1).astype(np.uint8)


def size(c: Circuit) -> int:
    return len(c.gates)


def gate_depths(c: Circuit) -> list[int]:
    depth: list[int] = []
    for g in c.gates:
        depth.append(1 + max(depth[a] for a in g.args) if g.args else 0)
    return depth


def depth(c: Circuit) -> int:
    c.check()
    return max(gate_depths(c), default=0)


class CircuitBuilder:
    """Append-only constructor that keeps gates topologically ordered.

    Input gates occupy ids ``0..n-1`` in position order. NOT and constant
    gates are shared: asking twice for ``not_(a)`` returns the same id.
    """

    def __init__(self, input_count: int):
        self.input_count = input_count
        self._gates: list[Gate] = [Gate(p, Kind.INPUT, pos=p) for p in range(input_count)]
        self._nots: dict[int, int] = {}
        self._consts: dict[int, int] = {}

    @property
    def inputs(self) -> list[int]:
        return list(range(self.input_count))

    def _add(self, kind: Kind, args: Sequence[int] = (), **kw) -> int:
        gid = len(self._gates)
        for a in args:
            if not 0 <= a < gid:
                raise ValueError(f"arg {a} does not refer to an existing gate")
        self._gates.append(Gate(gid, kind, tuple(args), **kw))
        return gid

    def const(self, bit: int) -> int:
        if bit not in self._consts:
            self._consts[bit] = self._add(Kind.CONST, bit=int(bit))
        return self._consts[bit]

    def not_(self, a: int) -> int:
        if a not in self._nots:
            self._nots[a] = self._add(Kind.NOT, (a,))
        return self._nots[a]

    def and_(self, *args: int, collapse: bool = True) -> int:
        """AND gate; a single argument is passed through unless ``collapse`` is off."""
        if collapse and len(args) == 1:
            return args[0]
        return self._add(Kind.AND, args)

    def or_(self, *args: int, collapse: bool = True) -> int:
        if collapse and len(args) == 1:
            return args[0]
        return self._add(Kind.OR, args)

    def literal(self, a: int, positive: bool) -> int:
        return a if positive else self.not_(a)

    def xor(self, a: int, b: int) -> int:
        # (a | b) & (!a | !b)
        return self._add(Kind.AND, (self.or_(a, b), self.or_(self.not_(a), self.not_(b))))

    def embed(self, c: Circuit, inputs: Sequence[int]) -> list[int]:
        """Copy ``c`` into this builder with its inputs wired to ``inputs``.

        The embedded circuit's INPUT vertices are not copied; returns the
        ids of its outputs inside this builder.
        """
        c.check()
        if len(inputs) != c.input_count:
            raise WidthError(f"embedding needs {c.input_count} wires, got {len(inputs)}")
        remap: dict[int, int] = {}
        for g in c.gates:
            if g.kind is Kind.INPUT:
                remap[g.id] = inputs[g.pos]
            elif g.kind is Kind.CONST:
                remap[g.id] = self._add(Kind.CONST, bit=g.bit)
            else:
                remap[g.id] = self._add(g.kind, tuple(remap[a] for a in g.args))
        return [remap[o] for o in c.outputs]

    def build(self, outputs: Iterable[int]) -> Circuit:
        c = Circuit(self.input_count, tuple(self._gates), tuple(outputs))
        c.check()
        return c


def compose(outer: Circuit, inners: Sequence[Circuit]) -> Circuit:
    """Feed the concatenated outputs of ``inners`` into ``outer``.

    The composed circuit's inputs are the inners' inputs laid side by side.
    """
    wires = sum(i.output_count for i in inners)
    if wires != outer.input_count:
        raise WidthError(f"inner circuits provide {wires} wires, outer takes {outer.input_count}")
    builder = CircuitBuilder(sum(i.input_count for i in inners))
    offset = 0
    mids: list[int] = []
    for inner in inners:
        mids.extend(builder.embed(inner, range(offset, offset + inner.input_count)))
        offset += inner.input_count
    return builder.build(builder.embed(outer, mids))


def encode(c: Circuit, header: dict | None = None) -> str:
    gates = []
    for g in c.gates:
        entry: dict = {"id": g.id, "kind": Kind(g.kind).value}
        if g.kind is Kind.INPUT:
            entry["pos"] = g.pos
        if g.kind is Kind.CONST:
            entry["bit"] = g.bit
        entry["args"] = list(g.args)
        gates.append(entry)
    doc: dict = {}
    if header is not None:
        doc["header"] = header
    doc.update({"inputs": c.input_count, "gates": gates, "outputs": list(c.outputs)})
    return json.dumps(doc, indent=None, separators=(",", ":"))


def _field(obj: dict, key: str, where: str, types: tuple[type, ...], required: bool = True):
    if key not in obj:
        if required:
            raise CircuitFormatError(f"{where}: missing field '{key}'")
        return None
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, types):
        raise CircuitFormatError(f"{where}.{key}: expected {types[0].__name__}, got {value!r}")
    return value


def decode(text: str) -> Circuit:
    """Parse the JSON circuit format; raises CircuitFormatError with the offending field."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise CircuitFormatError("top level must be an object")
    n = _field(doc, "inputs", "circuit", (int,))
    raw_gates = _field(doc, "gates", "circuit", (list,))
    raw_outputs = _field(doc, "outputs", "circuit", (list,))
    gates = []
    for index, raw in enumerate(raw_gates):
        where = f"gates[{index}]"
        if not isinstance(raw, dict):
            raise CircuitFormatError(f"{where}: expected object")
        gid = _field(raw, "id", where, (int,))
        kind_name = _field(raw, "kind", where, (str,))
        try:
            kind = Kind(kind_name)
        except ValueError:
            raise CircuitFormatError(f"{where}.kind: unknown gate kind {kind_name!r}") from None
        args = _field(raw, "args", where, (list,), required=False) or []
        for a in args:
            if isinstance(a, bool) or not isinstance(a, int):
                raise CircuitFormatError(f"{where}.args: non-integer id {a!r}")
        pos = _field(raw, "pos", where, (int,), required=kind is Kind.INPUT)
        bit = _field(raw, "bit", where, (int,), required=kind is Kind.CONST)
        gates.append(Gate(gid, kind, tuple(args), pos=pos, bit=bit))
    for o in raw_outputs:
        if isinstance(o, bool) or not isinstance(o, int):
            raise CircuitFormatError(f"outputs: non-integer id {o!r}")
    return Circuit(n, tuple(gates), tuple(raw_outputs))
