"""Checks that tie circuits and value tables back to the interpreters.

Equivalence is decided by enumeration (or seeded random sampling); there is
no SAT backend. Every check returns a :class:`VerifyReport` whose verdict is
reproducible from its inputs and seed alone.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import gadgets
from .bits import BitString, all_bitstrings, from_int, majority, parity, to_int
from .circuit import Circuit, Gate, Kind, evaluate_batch, gate_depths, size
from .mdp import (
    MajorityMdpSpec,
    ParityMdpSpec,
    canonical_majority_spec,
    free_variable_set,
    evaluate_dnf_arrays,
    sample_dnf_arrays,
)
from .solver import (
    ValueTable,
    backward_induction,
    in_conditioned_slice,
    uncorrected_value,
    value_closed_form_conditioned,
    value_closed_form_unconditioned,
)

MAX_EXHAUSTIVE_WIDTH = 22
MC_CHUNK = 10_000


@dataclass
class VerifyReport:
    subject: str
    mode: str | dict
    inputs_checked: int = 0
    mismatches: list = field(default_factory=list)
    wall_time: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "mode": self.mode,
            "inputs_checked": self.inputs_checked,
            "verdict": "pass" if self.passed else "fail",
            "mismatches": self.mismatches,
            "wall_time": round(self.wall_time, 6),
            "notes": self.notes,
        }


@dataclass(frozen=True)
class ScalingRow:
    family: str
    n: int
    size: int
    depth: int


# -- circuit equivalence -------------------------------------------------------------


def _input_matrix(width: int, mode: str, count: int | None, seed: int | None) -> np.ndarray:
    if mode == "exhaustive":
        if width > MAX_EXHAUSTIVE_WIDTH:
            raise ValueError(f"width {width} too large for exhaustive mode (max {MAX_EXHAUSTIVE_WIDTH})")
        codes = np.arange(1 << width, dtype=np.int64)
    elif mode == "random":
        if count is None or seed is None:
            raise ValueError("random mode needs count and seed")
        rng = np.random.default_rng(seed)
        if width <= 62:
            codes = rng.integers(0, 1 << width, size=count, dtype=np.int64)
        else:
            return rng.integers(0, 2, size=(count, width)).astype(bool)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts) & 1).astype(bool)


def check_circuit_equivalence(
    c: Circuit,
    oracle: Callable[[BitString], BitString],
    width: int,
    mode: str = "exhaustive",
    count: int | None = None,
    seed: int | None = None,
    subject: str = "circuit",
) -> VerifyReport:
    start = time.perf_counter()
    if width != c.input_count:
        raise ValueError(f"circuit has {c.input_count} inputs, checking width {width}")
    xs = _input_matrix(width, mode, count, seed)
    got = evaluate_batch(c, xs)
    report = VerifyReport(subject, mode if mode == "exhaustive" else {"random": count, "seed": seed})
    for row, out in zip(xs, got):
        x = BitString(tuple(int(v) for v in row))
        want = oracle(x)
        out_bits = BitString(tuple(int(v) for v in out))
        if out_bits != want:
            report.mismatches.append({"input": str(x), "expected": str(want), "got": str(out_bits)})
    report.inputs_checked = len(xs)
    report.wall_time = time.perf_counter() - start
    return report


def _bits_oracle(fn: Callable[[int, int], int], n: int, out_width: int) -> Callable[[BitString], BitString]:
    """Adapt an integer function of two n-bit operands to the bit-string oracle shape."""

    def oracle(x: BitString) -> BitString:
        return from_int(fn(to_int(x[:n]), to_int(x[n:])), out_width)

    return oracle


def addition_oracle(n: int) -> Callable[[BitString], BitString]:
    return _bits_oracle(lambda a, b: a + b, n, n + 1)


def max_oracle(n: int) -> Callable[[BitString], BitString]:
    return _bits_oracle(max, n, n)


# -- mutations -----------------------------------------------------------------------


def _reachable(c: Circuit) -> set[int]:
    seen: set[int] = set()
    stack = list(c.outputs)
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        stack.extend(c.gates[g].args)
    return seen


def mutate_gate_kind(c: Circuit, rng: np.random.Generator) -> tuple[Circuit, str]:
    """Change the kind of one live gate so that its local function changes.

    AND<->OR (fan-in >= 2), NOT -> single-argument AND (a buffer), CONST bit flip.
    """
    live = _reachable(c)
    candidates = [
        g.id
        for g in c.gates
        if g.id in live
        and (g.kind in (Kind.NOT, Kind.CONST) or (g.kind in (Kind.AND, Kind.OR) and len(g.args) >= 2))
    ]
    gid = int(rng.choice(candidates))
    g = c.gates[gid]
    if g.kind is Kind.AND:
        new = Gate(gid, Kind.OR, g.args)
    elif g.kind is Kind.OR:
        new = Gate(gid, Kind.AND, g.args)
    elif g.kind is Kind.NOT:
        new = Gate(gid, Kind.AND, g.args)
    else:
        new = Gate(gid, Kind.CONST, bit=1 - g.bit)
    gates = list(c.gates)
    gates[gid] = new
    return Circuit(c.input_count, tuple(gates), c.outputs), f"gate {gid}: {g.kind.value} -> {new.kind.value}"


def mutation_sensitivity(
    c: Circuit, oracle: Callable[[BitString], BitString], count: int, seed: int, subject: str = "circuit"
) -> VerifyReport:
    """Each of ``count`` random single-gate mutations must be caught exhaustively."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    report = VerifyReport(f"mutation-sensitivity:{subject}", {"random": count, "seed": seed})
    caught = []
    for _ in range(count):
        mutant, what = mutate_gate_kind(c, rng)
        sub = check_circuit_equivalence(mutant, oracle, c.input_count)
        caught.append({"mutation": what, "counterexamples": len(sub.mismatches)})
        if sub.passed:
            report.mismatches.append({"mutation": what, "detail": "no counterexample found"})
        report.inputs_checked += sub.inputs_checked
    report.notes["mutations"] = caught
    report.wall_time = time.perf_counter() - start
    return report


# -- value checks ----------------------------------------------------------------------


def check_closed_forms(spec: MajorityMdpSpec, V: ValueTable | None = None) -> VerifyReport:
    """Compare DP V_1 with the closed form on its slice.

    Unconditioned specs use the full ``s[c] = 0_b`` slice; conditioned ones
    the restricted slice around the free set, and are rejected when the
    preconditions (C(s_reward) = 1) do not hold.
    """
    start = time.perf_counter()
    if V is None:
        V, _ = backward_induction(spec)
    b, n = spec.b, spec.n
    zeros = BitString.zeros(b)
    if spec.condition is None:
        report = VerifyReport(f"closed-form:unconditioned:n={n}", "exhaustive")
        for rep in all_bitstrings(n):
            s = zeros + rep
            dp, closed = V.at(1, s), value_closed_form_unconditioned(spec, s)
            if dp != closed:
                report.mismatches.append({"state": str(s), "dp": dp, "closed_form": closed})
            report.inputs_checked += 1
    else:
        report = VerifyReport(f"closed-form:conditioned:n={n}", "exhaustive")
        if not spec.condition(spec.s_reward):
            report.notes["rejected"] = "condition does not hold at s_reward; closed form not applicable"
            report.mismatches.append({"precondition": "C(s_reward) = 1 violated"})
            report.wall_time = time.perf_counter() - start
            return report
        free = free_variable_set(spec.condition, n)
        report.notes["free_set"] = free
        for x in all_bitstrings(len(free)):
            rep = list(spec.s_reward)
            for bit, i in zip(x, free):
                rep[i - 1] = bit
            s = zeros + BitString(tuple(rep))
            assert in_conditioned_slice(spec, free, s)
            dp, closed = V.at(1, s), value_closed_form_conditioned(spec, free, s)
            if dp != closed:
                report.mismatches.append({"state": str(s), "dp": dp, "closed_form": closed})
            report.inputs_checked += 1
    at_reward = zeros + spec.s_reward
    report.notes["at_s_reward"] = {
        "state": str(at_reward),
        "dp_value": V.at(1, at_reward),
        "uncorrected_value": uncorrected_value(spec, at_reward),
    }
    report.wall_time = time.perf_counter() - start
    return report


def extract_majority_bit(
    spec: MajorityMdpSpec, V: ValueTable, x: BitString, free: Sequence[int] | None = None
) -> int:
    """Top bit of n + 1 - V_1 at the state encoding x as mismatches against s_reward.

    Unconditioned: x has width n and the count is read as a b-bit number.
    Conditioned: x has width |A| over the free set A; the count is at most
    2^(b-1) - 1 and is read as a (b-1)-bit number.
    """
    b, n = spec.b, spec.n
    if free is None:
        free = list(range(1, n + 1)) if spec.condition is None else free_variable_set(spec.condition, n)
    if x.width != len(free):
        raise ValueError(f"x has width {x.width}, expected {len(free)}")
    count_width = b if len(free) == n else b - 1
    rep = list(spec.s_reward)
    for bit, i in zip(x, free):
        rep[i - 1] = bit ^ spec.s_reward[i - 1]
    s = BitString.zeros(b) + BitString(tuple(rep))
    return from_int(n + 1 - V.at(1, s), count_width)[0]


def check_majority_extraction(spec: MajorityMdpSpec, V: ValueTable | None = None) -> VerifyReport:
    start = time.perf_counter()
    if V is None:
        V, _ = backward_induction(spec)
    free = list(range(1, spec.n + 1)) if spec.condition is None else free_variable_set(spec.condition, spec.n)
    kind = "unconditioned" if spec.condition is None else "conditioned"
    report = VerifyReport(f"majority-extraction:{kind}:n={spec.n}", "exhaustive")
    report.notes["substitution"] = "s_{b+i} = x_i xor s_reward_i"
    for x in all_bitstrings(len(free)):
        try:
            got = extract_majority_bit(spec, V, x, free)
        except OverflowError as exc:
            report.mismatches.append({"x": str(x), "error": str(exc)})
            continue
        if got != majority(x):
            report.mismatches.append({"x": str(x), "extracted": got, "majority": majority(x)})
        report.inputs_checked += 1
    report.wall_time = time.perf_counter() - start
    return report


def check_parity_indicator(n: int) -> VerifyReport:
    """V_1(s) > 0 exactly on even-parity states."""
    if n > 8:
        raise ValueError("parity indicator check is limited to n <= 8")
    start = time.perf_counter()
    spec = ParityMdpSpec(n)
    V, _ = backward_induction(spec)
    report = VerifyReport(f"parity-indicator:n={n}", "exhaustive")
    for s in all_bitstrings(n):
        if (V.at(1, s) > 0) != (parity(s) == 0):
            report.mismatches.append({"state": str(s), "value": V.at(1, s), "parity": parity(s)})
        report.inputs_checked += 1
    report.wall_time = time.perf_counter() - start
    return report


# -- scaling -----------------------------------------------------------------------------


def _majority(n: int) -> MajorityMdpSpec:
    return canonical_majority_spec(n)


FAMILIES: dict[str, Callable[[int], Circuit]] = {
    "majority-model": lambda n: gadgets.majority_mdp_model_circuit(_majority(n)),
    "majority-reward": lambda n: gadgets.majority_mdp_reward_circuit(_majority(n)),
    "parity-model": gadgets.parity_mdp_model_circuit,
    "parity-reward": gadgets.parity_mdp_reward_circuit,
    "addition": gadgets.addition_circuit,
    "max": gadgets.max_circuit,
}

MDP_NS = (3, 7, 15, 31)
ARITH_NS = (2, 4, 8, 16)


def default_ns(family: str) -> tuple[int, ...]:
    return ARITH_NS if family in ("addition", "max") else MDP_NS


def scaling_experiment(families: Iterable[str], ns: Sequence[int] | None = None) -> list[ScalingRow]:
    rows = []
    for fam in families:
        build = FAMILIES[fam]
        for n in ns if ns is not None else default_ns(fam):
            c = build(n)
            rows.append(ScalingRow(fam, n, size(c), max(gate_depths(c), default=0)))
    return rows


def loglog_slope(ns: Sequence[int], sizes: Sequence[int]) -> float:
    """Least-squares slope of log(size) against log(n)."""
    return float(np.polyfit(np.log(ns), np.log(sizes), 1)[0])


def check_scaling(rows: Sequence[ScalingRow], max_slope: float = 3.0) -> VerifyReport:
    report = VerifyReport("scaling", "exhaustive")
    by_family: dict[str, list[ScalingRow]] = {}
    for r in rows:
        by_family.setdefault(r.family, []).append(r)
    for fam, fam_rows in by_family.items():
        depths = sorted({r.depth for r in fam_rows})
        slope = loglog_slope([r.n for r in fam_rows], [r.size for r in fam_rows])
        report.notes[fam] = {"depths": depths, "slope": round(slope, 4)}
        if len(depths) != 1:
            report.mismatches.append({"family": fam, "problem": "depth varies", "depths": depths})
        if slope > max_slope:
            report.mismatches.append({"family": fam, "problem": "size slope too steep", "slope": slope})
        report.inputs_checked += len(fam_rows)
    return report


# -- condition lemma ---------------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloResult:
    n: int
    m: int
    k: int
    trials: int
    seed: int
    empirical: float
    analytic: float
    sigma: float

    @property
    def within_3sigma(self) -> bool:
        return abs(self.empirical - self.analytic) <= 3 * self.sigma

    @property
    def interval(self) -> tuple[float, float]:
        return (self.empirical - 3 * self.sigma, self.empirical + 3 * self.sigma)


def analytic_satisfaction(m: int, k: int) -> float:
    return 1.0 - (1.0 - 2.0**-k) ** (m // k)


def condition_lemma_montecarlo(
    n: int, m: int, k: int, trials: int, seed: int, s_reward: BitString | None = None
) -> MonteCarloResult:
    """Fraction of sampled conditions that hold at s_reward, with a 3-sigma binomial band."""
    if trials < 1000:
        raise ValueError("need at least 1000 trials")
    rng = np.random.default_rng(seed)
    if s_reward is None:
        s_reward = BitString(tuple(int(v) for v in rng.integers(0, 2, size=n)))
    hits = 0
    for start in range(0, trials, MC_CHUNK):
        variables, signs = sample_dnf_arrays(n, m, k, min(MC_CHUNK, trials - start), rng)
        hits += int(evaluate_dnf_arrays(variables, signs, s_reward).sum())
    p_hat = hits / trials
    p = analytic_satisfaction(m, k)
    sigma = math.sqrt(p * (1 - p) / trials)
    return MonteCarloResult(n, m, k, trials, seed, p_hat, p, sigma)


def check_condition_lemma(n: int, k: int, ms: Sequence[int], trials: int, seed: int) -> VerifyReport:
    """Each m within 3 sigma of the analytic value and the estimates non-decreasing in m (within the bands)."""
    start = time.perf_counter()
    report = VerifyReport(f"condition-lemma:n={n}:k={k}", {"random": trials, "seed": seed})
    results = [condition_lemma_montecarlo(n, m, k, trials, seed + i) for i, m in enumerate(ms)]
    for r in results:
        report.notes[f"m={r.m}"] = {"empirical": r.empirical, "analytic": r.analytic, "sigma": r.sigma}
        if not r.within_3sigma:
            report.mismatches.append({"m": r.m, "empirical": r.empirical, "analytic": r.analytic, "sigma": r.sigma})
        report.inputs_checked += r.trials
    for lo, hi in zip(results, results[1:]):
        if hi.empirical + 3 * hi.sigma < lo.empirical - 3 * lo.sigma:
            report.mismatches.append({"problem": "decreasing in m", "m": [lo.m, hi.m]})
    report.wall_time = time.perf_counter() - start
    return report


# -- Bellman exactness -------------------------------------------------------------------


def check_bellman(mdp) -> VerifyReport:
    """Bellman residual and terminal values must vanish, and rollouts must return V_1."""
    from .solver import bellman_residual, optimal_policy, rollout, tabulate

    start = time.perf_counter()
    tab = tabulate(mdp)
    V, Q = backward_induction(tab)
    name = f"bellman:{type(mdp).__name__}:width={tab.state_width}"
    report = VerifyReport(name, "exhaustive")
    residual = bellman_residual(tab, V, Q)
    report.notes["residual"] = residual
    if residual:
        report.mismatches.append({"problem": "nonzero Bellman residual", "residual": residual})
    if V.v[-1].any():
        report.mismatches.append({"problem": "V_{H+1} is not identically 0"})
    policy = optimal_policy(Q)
    for s0 in all_bitstrings(tab.state_width):
        ret = sum(r for _, _, r in rollout(tab, policy, s0))
        if ret != V.at(1, s0):
            report.mismatches.append({"state": str(s0), "rollout_return": ret, "v1": V.at(1, s0)})
        report.inputs_checked += 1
    report.wall_time = time.perf_counter() - start
    return report


# -- approximation bench -----------------------------------------------------------------


def check_gradients(trials: int = 10, seed: int = 0, tol: float = 1e-4) -> VerifyReport:
    from .approx import gradient_check

    start = time.perf_counter()
    report = VerifyReport("gradient-check", {"random": trials, "seed": seed})
    devs = gradient_check(trials, seed)
    report.inputs_checked = trials
    report.notes["max_relative_deviation"] = max(devs)
    for i, d in enumerate(devs):
        if not d < tol:
            report.mismatches.append({"network": i, "deviation": d})
    report.wall_time = time.perf_counter() - start
    return report


def check_approx_ordering(n: int, depth: int, width: int, repeats: int, seed: int, epochs: int = 100) -> VerifyReport:
    """Mean e_q must exceed both mean e_model and mean e_reward; magnitudes are only reported."""
    from .approx import TrainConfig, run_approx_experiment

    start = time.perf_counter()
    spec = canonical_majority_spec(n)
    report = VerifyReport(f"approx-ordering:majority:n={n}:d={depth}:w={width}", {"random": repeats, "seed": seed})
    reports, agg = run_approx_experiment(spec, depth, width, TrainConfig(epochs=epochs, seed=seed), repeats)
    report.inputs_checked = repeats
    report.notes["aggregate"] = agg
    report.notes["note"] = "errors are those of the trained networks, not minima over the class"
    means = {key: agg[key]["mean"] for key in ("e_model", "e_reward", "e_q")}
    for other in ("e_model", "e_reward"):
        if not means["e_q"] > means[other]:
            report.mismatches.append({"problem": f"mean e_q <= mean {other}", "e_q": means["e_q"], other: means[other]})
    diverged = [r.seed for r in reports if r.diverged]
    if diverged:
        report.mismatches.append({"problem": "training diverged", "seeds": diverged})
    report.wall_time = time.perf_counter() - start
    return report


# -- gadgets -----------------------------------------------------------------------------


def check_gadgets(seed: int, max_exhaustive: int = 6, random_width: int = 12, random_count: int = 10_000) -> list[VerifyReport]:
    reports = []
    for n in range(1, max_exhaustive + 1):
        reports.append(check_circuit_equivalence(gadgets.addition_circuit(n), addition_oracle(n), 2 * n, subject=f"addition:n={n}"))
        reports.append(check_circuit_equivalence(gadgets.max_circuit(n), max_oracle(n), 2 * n, subject=f"max:n={n}"))
    n = random_width
    reports.append(
        check_circuit_equivalence(
            gadgets.addition_circuit(n), addition_oracle(n), 2 * n, "random", random_count, seed, f"addition:n={n}"
        )
    )
    for b in range(1, 5):
        for k in range(1 << b):
            reports.append(
                check_circuit_equivalence(
                    gadgets.delta_k(b, k), lambda x, k=k: BitString((int(to_int(x) == k),)), b, subject=f"delta:b={b}:k={k}"
                )
            )
    reports.append(
        check_circuit_equivalence(gadgets.xor2(), lambda x: BitString((x[0] ^ x[1],)), 2, subject="xor")
    )
    return reports


# -- MDP circuits ------------------------------------------------------------------------


def conditioned_spec(n: int, m: int, k: int, seed: int, base: MajorityMdpSpec | None = None) -> MajorityMdpSpec:
    """A conditioned copy of ``base`` (canonical by default) whose sampled DNF holds at s_reward."""
    from .mdp import sample_satisfied_condition

    base = canonical_majority_spec(n) if base is None else base
    cond = sample_satisfied_condition(n, m, k, base.s_reward, np.random.default_rng(seed))
    return MajorityMdpSpec(n, base.s_reward, base.control, cond, seed=seed)


def default_condition_params(n: int) -> tuple[int, int]:
    """Small (m, k) with m < n/2: (1, 1) at n=3, (3, 2) from n=7 on."""
    return (1, 1) if n < 7 else (3, 2)


def check_majority_circuits(spec: MajorityMdpSpec) -> list[VerifyReport]:
    from .mdp import majority_model_oracle, majority_reward_oracle

    kind = "unconditioned" if spec.condition is None else "conditioned"
    w = spec.state_width
    return [
        check_circuit_equivalence(
            gadgets.majority_mdp_model_circuit(spec),
            lambda x: majority_model_oracle(spec, x),
            w + 1,
            subject=f"majority-model:{kind}:n={spec.n}",
        ),
        check_circuit_equivalence(
            gadgets.majority_mdp_reward_circuit(spec),
            lambda x: majority_reward_oracle(spec, x),
            w,
            subject=f"majority-reward:{kind}:n={spec.n}",
        ),
    ]


def check_parity_circuits(n: int) -> list[VerifyReport]:
    from .mdp import parity_model_oracle, parity_reward

    spec = ParityMdpSpec(n)
    return [
        check_circuit_equivalence(
            gadgets.parity_mdp_model_circuit(n),
            lambda x: parity_model_oracle(spec, x),
            n + 2 * spec.index_width,
            subject=f"parity-model:n={n}",
        ),
        check_circuit_equivalence(
            gadgets.parity_mdp_reward_circuit(n),
            lambda x: BitString((parity_reward(spec, x),)),
            n,
            subject=f"parity-reward:n={n}",
        ),
    ]


def family_oracle(family: str, spec) -> tuple[Callable[[BitString], BitString], int]:
    """Interpreter oracle and input width for a circuit family at ``spec``.

    ``spec`` is a MajorityMdpSpec for majority families and an int n otherwise.
    """
    from .mdp import majority_model_oracle, majority_reward_oracle, parity_model_oracle, parity_reward

    if family == "majority-model":
        return (lambda x: majority_model_oracle(spec, x)), spec.state_width + 1
    if family == "majority-reward":
        return (lambda x: majority_reward_oracle(spec, x)), spec.state_width
    if family == "parity-model":
        p = ParityMdpSpec(spec)
        return (lambda x: parity_model_oracle(p, x)), spec + 2 * p.index_width
    if family == "parity-reward":
        p = ParityMdpSpec(spec)
        return (lambda x: BitString((parity_reward(p, x),))), spec
    if family == "addition":
        return addition_oracle(spec), 2 * spec
    if family == "max":
        return max_oracle(spec), 2 * spec
    raise KeyError(family)


# -- suites ------------------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteOptions:
    seed: int
    n: int | None = None
    m: int | None = None
    k: int | None = None
    trials: int = 100_000
    repeats: int = 5
    depth: int = 1
    width: int = 8
    epochs: int = 100


def _suite_circuits(o: SuiteOptions) -> list[VerifyReport]:
    majority_ns = [o.n] if o.n is not None else [3, 7]
    parity_ns = [o.n] if o.n is not None else [4]
    reports = []
    for n in majority_ns:
        spec = canonical_majority_spec(n)
        m, k = (o.m, o.k) if o.m is not None and o.k is not None else default_condition_params(n)
        reports += check_majority_circuits(spec)
        reports += check_majority_circuits(conditioned_spec(n, m, k, o.seed))
    for n in parity_ns:
        reports += check_parity_circuits(n)
    return reports


def _suite_scaling(o: SuiteOptions) -> list[VerifyReport]:
    rows = scaling_experiment(FAMILIES)
    report = check_scaling(rows)
    report.notes["rows"] = [[r.family, r.n, r.size, r.depth] for r in rows]
    return [report]


def _suite_bellman(o: SuiteOptions) -> list[VerifyReport]:
    ns = [o.n] if o.n is not None else [3, 7]
    reports = []
    for n in ns:
        reports.append(check_bellman(canonical_majority_spec(n)))
        reports.append(check_bellman(conditioned_spec(n, *default_condition_params(n), o.seed)))
    for n in [o.n] if o.n is not None else range(1, 8):
        reports.append(check_bellman(ParityMdpSpec(n)))
    return reports


def _suite_values(o: SuiteOptions) -> list[VerifyReport]:
    reports = [check_closed_forms(canonical_majority_spec(n)) for n in ([o.n] if o.n else [3, 7])]
    n = o.n or 7
    m, k = (o.m, o.k) if o.m is not None and o.k is not None else default_condition_params(n)
    reports.append(check_closed_forms(conditioned_spec(n, m, k, o.seed)))
    return reports


def _suite_extraction(o: SuiteOptions) -> list[VerifyReport]:
    n = o.n or 7
    m, k = (o.m, o.k) if o.m is not None and o.k is not None else default_condition_params(n)
    return [
        check_majority_extraction(canonical_majority_spec(n)),
        check_majority_extraction(conditioned_spec(n, m, k, o.seed)),
    ]


def _suite_parity(o: SuiteOptions) -> list[VerifyReport]:
    return [check_parity_indicator(n) for n in ([o.n] if o.n else [4, 6, 8])]


def _suite_condition(o: SuiteOptions) -> list[VerifyReport]:
    k = o.k or 3
    ms = [o.m] if o.m else [2 * k, 4 * k, 8 * k]
    n = o.n or 63
    return [check_condition_lemma(n, k, ms, o.trials, o.seed)]


def _suite_gradient(o: SuiteOptions) -> list[VerifyReport]:
    return [check_gradients(10, o.seed)]


def _suite_mutation(o: SuiteOptions) -> list[VerifyReport]:
    from .mdp import majority_model_oracle

    spec = canonical_majority_spec(o.n or 7)
    c = gadgets.majority_mdp_model_circuit(spec)
    return [mutation_sensitivity(c, lambda x: majority_model_oracle(spec, x), 20, o.seed, f"majority-model:n={spec.n}")]


def _suite_approx(o: SuiteOptions) -> list[VerifyReport]:
    return [check_approx_ordering(o.n or 7, o.depth, o.width, o.repeats, o.seed, o.epochs)]


def _suite_gadgets(o: SuiteOptions) -> list[VerifyReport]:
    return check_gadgets(o.seed)


SUITES: dict[str, Callable[[SuiteOptions], list[VerifyReport]]] = {
    "circuits": _suite_circuits,
    "gadgets": _suite_gadgets,
    "scaling": _suite_scaling,
    "bellman": _suite_bellman,
    "values": _suite_values,
    "extraction": _suite_extraction,
    "parity": _suite_parity,
    "condition": _suite_condition,
    "gradient": _suite_gradient,
    "approx": _suite_approx,
    "mutation": _suite_mutation,
}


def run_suite(name: str, options: SuiteOptions) -> list[VerifyReport]:
    if name == "all":
        return [r for suite in SUITES.values() for r in suite(options)]
    return SUITES[name](options)
