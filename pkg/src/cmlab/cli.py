"""Command-line front end: ``cmlab <subcommand> [flags]``.

Machine-readable output goes to stdout (or ``--out``), diagnostics to stderr.
Each output starts with a header holding the format version and the resolved
run configuration, so every file can be replayed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import gadgets
from .approx import TARGETS, TrainConfig, run_approx_experiment, smooth
from .bits import BitString
from .circuit import CircuitFormatError, decode, depth, encode, size
from .gadgets import format_dnf
from .mdp import (
    MajorityMdpSpec,
    ParityMdpSpec,
    canonical_majority_spec,
    majority_spec_from_json,
    majority_spec_to_json,
    sample_dnf_condition,
    sample_satisfied_condition,
)
from .solver import backward_induction
from .verify import (
    FAMILIES,
    SUITES,
    SuiteOptions,
    check_circuit_equivalence,
    check_condition_lemma,
    conditioned_spec,
    family_oracle,
    run_suite,
    scaling_experiment,
)

FORMAT_VERSION = 1


class UsageError(Exception):
    """Bad flag combination; reported with exit code 2."""


def header(kind: str, config: dict) -> dict:
    return {"format": f"cmlab-{kind}", "version": FORMAT_VERSION, "config": config}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_text(kind: str, config: dict, fieldnames: Sequence[str], rows: list[Sequence[Any]]) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(header(kind, config), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fieldnames)
    w.writerows(rows)
    return buf.getvalue()


def _strict(obj: Any) -> Any:
    """Non-finite floats become null so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _strict(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_strict(v) for v in obj]
    return obj


def _require(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise UsageError("missing required " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _majority_spec(cfg: dict) -> MajorityMdpSpec:
    """From --spec, or canonical at --n, conditioned when --m and --k are given (needs --seed)."""
    if cfg.get("spec"):
        return majority_spec_from_json(Path(cfg["spec"]).read_text())
    _require(cfg, "n")
    if cfg.get("m") is not None or cfg.get("k") is not None:
        _require(cfg, "m", "k", "seed")
        return conditioned_spec(cfg["n"], cfg["m"], cfg["k"], cfg["seed"])
    return canonical_majority_spec(cfg["n"])


def _mdp(cfg: dict):
    if cfg.get("mdp", "majority") == "parity":
        _require(cfg, "n")
        return ParityMdpSpec(cfg["n"])
    return _majority_spec(cfg)


# -- subcommands -------------------------------------------------------------------


def cmd_build_circuit(cfg: dict) -> int:
    _require(cfg, "family")
    family = cfg["family"]
    if family.startswith("majority"):
        spec = _majority_spec(cfg)
        build = gadgets.majority_mdp_model_circuit if family == "majority-model" else gadgets.majority_mdp_reward_circuit
        c = build(spec)
        n = spec.n
        cfg = {**cfg, "mdp_spec": majority_spec_to_json(spec)}
    else:
        _require(cfg, "n")
        n = cfg["n"]
        c = FAMILIES[family](n)
    text = encode(c, header=header("circuit", cfg)) + "\n"
    metrics = f"{family},{n},{size(c)},{depth(c)}\n"
    if cfg.get("out"):
        _emit(text, cfg["out"])
        sys.stdout.write(metrics)
    else:
        sys.stdout.write(text)
        sys.stderr.write(metrics)
    return 0


def cmd_solve(cfg: dict) -> int:
    mdp = _mdp(cfg)
    V, Q = backward_induction(mdp)
    width = mdp.state_width
    if isinstance(mdp, MajorityMdpSpec):
        cfg = {**cfg, "mdp_spec": majority_spec_to_json(mdp)}
    H = V.horizon
    lines = [json.dumps({"header": header("solve", cfg)}, sort_keys=True)]
    csv_rows = []
    for h in range(1, H + 2):
        for si in range(1 << width):
            state = format(si, f"0{width}b")
            q = Q.q[h - 1, si].tolist() if h <= H else []
            lines.append(json.dumps({"h": h, "state": state, "v": int(V.v[h - 1, si]), "q": q}))
            csv_rows.append([h, state, int(V.v[h - 1, si]), " ".join(map(str, q))])
    summary: dict[str, Any] = {"horizon": H, "terminal_all_zero": not V.v[-1].any()}
    if isinstance(mdp, MajorityMdpSpec):
        zeros = BitString.zeros(mdp.b)
        summary["v1_at_s_reward"] = V.at(1, zeros + mdp.s_reward)
        summary["v1_at_complement"] = V.at(1, zeros + ~mdp.s_reward)
    else:
        summary["v1_at_zero"] = V.at(1, BitString.zeros(width))
    lines.append(json.dumps({"summary": summary}, sort_keys=True))
    if cfg.get("format") == "csv":
        _emit(_csv_text("solve", cfg, ["h", "state", "v", "q"], csv_rows), cfg.get("out"))
    else:
        _emit("\n".join(lines) + "\n", cfg.get("out"))
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    return 0


def cmd_verify(cfg: dict) -> int:
    _require(cfg, "seed")
    if cfg.get("circuit"):
        return _verify_circuit_file(cfg)
    suite = cfg.get("suite") or "all"
    opts = SuiteOptions(
        seed=cfg["seed"],
        n=cfg.get("n"),
        m=cfg.get("m"),
        k=cfg.get("k"),
        trials=cfg.get("trials") or 100_000,
        repeats=cfg.get("repeats") or 5,
        depth=cfg.get("depth") or 1,
        width=cfg.get("width") or 8,
        epochs=cfg.get("epochs") or 100,
    )
    reports = run_suite(suite, opts)
    passed = all(r.passed for r in reports)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.subject}", file=sys.stderr)
    if suite == "scaling":
        rows = [row for r in reports for row in r.notes["rows"]]
        _emit(_csv_text("scaling", cfg, ["family", "n", "size", "depth"], rows), cfg.get("out"))
    else:
        doc = {
            "header": header("verify", cfg),
            "verdict": "pass" if passed else "fail",
            "reports": [r.to_dict() for r in reports],
        }
        _emit(json.dumps(_strict(doc), indent=2, sort_keys=True, allow_nan=False) + "\n", cfg.get("out"))
    return 0 if passed else 1


def _verify_circuit_file(cfg: dict) -> int:
    """Check a circuit file against the oracle of ``--family`` at ``--n`` (or ``--spec``)."""
    _require(cfg, "family")
    family = cfg["family"]
    spec = _majority_spec(cfg) if family.startswith("majority") else cfg.get("n")
    if spec is None:
        raise UsageError("missing required --n")
    oracle, width = family_oracle(family, spec)
    doc: dict[str, Any] = {"header": header("verify", cfg)}
    try:
        c = decode(Path(cfg["circuit"]).read_text())
        c.check()
        if c.input_count != width:
            raise CircuitFormatError(f"circuit has {c.input_count} inputs, expected {width}")
        report = check_circuit_equivalence(c, oracle, width, subject=f"{family}:file")
        doc["reports"] = [report.to_dict()]
        passed = report.passed
    except (CircuitFormatError, ValueError) as exc:
        doc["reports"] = [{"subject": f"{family}:file", "verdict": "fail", "error": str(exc)}]
        print(f"error: {exc}", file=sys.stderr)
        passed = False
    doc["verdict"] = "pass" if passed else "fail"
    print(f"{'PASS' if passed else 'FAIL'} {family}:file", file=sys.stderr)
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", cfg.get("out"))
    return 0 if passed else 1


def cmd_scaling(cfg: dict) -> int:
    families = cfg.get("family") or list(FAMILIES)
    if isinstance(families, str):
        families = [families]
    rows = scaling_experiment(families, cfg.get("ns"))
    text = _csv_text("scaling", cfg, ["family", "n", "size", "depth"], [[r.family, r.n, r.size, r.depth] for r in rows])
    _emit(text, cfg.get("out"))
    return 0


def cmd_lemma_condition(cfg: dict) -> int:
    _require(cfg, "seed")
    n = cfg.get("n") or 63
    k = cfg.get("k") or 3
    ms = cfg.get("m") or [2 * k, 4 * k, 8 * k]
    if isinstance(ms, int):
        ms = [ms]
    report = check_condition_lemma(n, k, ms, cfg.get("trials") or 100_000, cfg["seed"])
    doc = {"header": header("lemma-condition", cfg), **report.to_dict()}
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", cfg.get("out"))
    return 0 if report.passed else 1


def cmd_sample_dnf(cfg: dict) -> int:
    _require(cfg, "n", "m", "k", "seed")
    rng = np.random.default_rng(cfg["seed"])
    n, m, k = cfg["n"], cfg["m"], cfg["k"]
    lines = [json.dumps({"header": header("sample-dnf", cfg)}, sort_keys=True)]
    if cfg.get("s_reward"):
        # one condition satisfied at s_reward, wrapped in a full spec usable with --spec
        s_reward = BitString.from_str(cfg["s_reward"])
        base = canonical_majority_spec(n, s_reward)
        cond = sample_satisfied_condition(n, m, k, s_reward, rng)
        spec = MajorityMdpSpec(n, s_reward, base.control, cond, seed=cfg["seed"])
        lines = [json.dumps({**majority_spec_to_json(spec), "header": header("sample-dnf", cfg)}, sort_keys=True)]
    else:
        for _ in range(cfg.get("count") or 1):
            lines.append(json.dumps({"condition": format_dnf(sample_dnf_condition(n, m, k, rng))}))
    _emit("\n".join(lines) + "\n", cfg.get("out"))
    return 0


def cmd_approx(cfg: dict) -> int:
    _require(cfg, "seed")
    mdp = _mdp(cfg)
    train = TrainConfig(
        lr=cfg.get("lr") or 1e-3,
        batch_size=cfg.get("batch_size") or 32,
        epochs=cfg.get("epochs") or 100,
        seed=cfg["seed"],
    )
    depth_, width_ = cfg.get("depth") or 1, cfg.get("width") or 8
    reports, agg = run_approx_experiment(mdp, depth_, width_, train, cfg.get("repeats") or 5)
    diverged = [r.seed for r in reports if r.diverged]
    doc = {
        "header": header("approx", cfg),
        "network": {"depth": depth_, "width": width_},
        "note": "errors are those of the trained networks, an upper bound on the class minimum",
        "reports": [r.to_dict() for r in reports],
        "aggregate": agg,
        "diverged": diverged,
    }
    _emit(json.dumps(_strict(doc), indent=2, sort_keys=True, allow_nan=False) + "\n", cfg.get("out"))
    if cfg.get("csv"):
        # mean over the repeats that trained for every epoch
        series = []
        for t in TARGETS:
            full = [r.history[t] for r in reports if len(r.history[t]) == train.epochs]
            series.append(np.mean(full, axis=0).tolist() if full else [])
        names = ["epoch", "e_model", "e_reward", "e_q"]
        rate = cfg.get("smooth")
        if rate:
            names += ["e_model_smooth", "e_reward_smooth", "e_q_smooth"]
            series += [smooth(s, rate) for s in series[:3]]
        epochs = max((len(s) for s in series), default=0)
        rows = [[e + 1, *(s[e] if e < len(s) else "" for s in series)] for e in range(epochs)]
        Path(cfg["csv"]).write_text(_csv_text("approx-epochs", cfg, names, rows))
    for key, stats in agg.items():
        print(f"{key}: mean={stats['mean']:.6g} std={stats['std']:.6g}", file=sys.stderr)
    if diverged:
        print(f"training diverged for seeds {diverged}", file=sys.stderr)
        return 1
    return 0


# -- argument parsing --------------------------------------------------------------------


COMMANDS = {
    "build-circuit": cmd_build_circuit,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "scaling": cmd_scaling,
    "lemma-condition": cmd_lemma_condition,
    "sample-dnf": cmd_sample_dnf,
    "approx": cmd_approx,
}


def _common(p: argparse.ArgumentParser, *names: str) -> None:
    # every default is None so that a --config file can fill the gaps
    specs = {
        "n": dict(type=int, help="representation width"),
        "m": dict(type=int, help="DNF literal budget"),
        "k": dict(type=int, help="DNF conjunct width"),
        "seed": dict(type=int, help="RNG seed (required wherever randomness is used)"),
        "spec": dict(help="Majority MDP spec JSON file"),
        "trials": dict(type=int),
        "depth": dict(type=int, help="hidden layers"),
        "width": dict(type=int, help="hidden units per layer"),
        "epochs": dict(type=int),
        "repeats": dict(type=int),
    }
    for name in names:
        p.add_argument("--" + name, default=None, **specs[name])
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--config", default=None, help="JSON config file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmlab", description="Circuit and MDP verification workbench.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-circuit", help="write a circuit JSON file and print family,n,size,depth")
    p.add_argument("--family", choices=sorted(FAMILIES), default=None)
    _common(p, "n", "m", "k", "seed", "spec")

    p = sub.add_parser("solve", help="exact backward induction, JSON-lines of V and Q")
    p.add_argument("--mdp", choices=["majority", "parity"], default=None)
    p.add_argument("--format", choices=["jsonl", "csv"], default=None)
    _common(p, "n", "m", "k", "seed", "spec")

    p = sub.add_parser("verify", help="run verification suites; exit 0 iff all pass")
    p.add_argument("--suite", choices=["all", *SUITES], default=None)
    p.add_argument("--circuit", default=None, help="check this circuit file against --family")
    p.add_argument("--family", choices=sorted(FAMILIES), default=None)
    _common(p, "n", "m", "k", "seed", "spec", "trials", "depth", "width", "epochs", "repeats")

    p = sub.add_parser("scaling", help="CSV of family,n,size,depth")
    p.add_argument("--family", choices=sorted(FAMILIES), action="append", default=None)
    p.add_argument("--ns", type=int, nargs="+", default=None)
    _common(p)

    p = sub.add_parser("lemma-condition", help="Monte Carlo estimate of P(C(s_reward) = 1)")
    p.add_argument("--m", type=int, nargs="+", default=None, help="one or more literal budgets")
    _common(p, "n", "k", "seed", "trials")

    p = sub.add_parser("sample-dnf", help="sample random (k,m)-DNF conditions")
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--s-reward", default=None, help="draw one condition true here and print a full spec")
    _common(p, "n", "m", "k", "seed")

    p = sub.add_parser("approx", help="fit networks to T, r and Q* and report relative errors")
    p.add_argument("--mdp", choices=["majority", "parity"], default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--csv", default=None, help="per-epoch CSV of mean errors")
    p.add_argument("--smooth", type=float, default=None, help="add smoothed columns at this rate to the CSV")
    _common(p, "n", "m", "k", "seed", "spec", "depth", "width", "epochs", "repeats")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Config file values overridden by any flag given on the command line."""
    cfg: dict[str, Any] = {}
    if args.config:
        loaded = json.loads(Path(args.config).read_text())
        if not isinstance(loaded, dict):
            raise UsageError("--config must hold a JSON object")
        cfg.update({k.replace("-", "_"): v for k, v in loaded.items()})
    for key, value in vars(args).items():
        if key == "config":
            continue
        if value is not None or key not in cfg:
            cfg[key] = value
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if cfg.get("family") is not None and args.command in ("build-circuit", "verify"):
            if cfg["family"] not in FAMILIES:
                raise UsageError(f"unknown family {cfg['family']!r}")
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        parser.error(str(exc))
    except (ValueError, OverflowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
