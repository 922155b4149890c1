"""Fit small ReLU networks to T, r and Q* of a synthetic MDP and compare relative errors.

Everything is plain numpy in float64. Datasets are weighted by the
optimal policy's time-uniform occupancy, so no trajectories are sampled.
The reported errors are those of the trained network, an upper bound on the
best error achievable in the network class.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .bits import BitString, all_bitstrings, from_int
from .mdp import DeterministicMdp, MajorityMdpSpec, ParityMdpSpec
from .solver import PolicyTable, QTable, ValueTable, backward_induction, optimal_policy, optimal_state_distribution, tabulate


@dataclass
class MlpParams:
    """Weights ``W[l]`` of shape (fan_in, fan_out) and biases ``b[l]``."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def arrays(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]

    def copy(self) -> MlpParams:
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[1]

    def check(self) -> None:
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("need one bias per weight matrix")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if b.shape != (w.shape[1],):
                raise ValueError(f"layer {l}: bias shape {b.shape} does not match {w.shape}")
            if l and self.weights[l - 1].shape[1] != w.shape[0]:
                raise ValueError(f"layer {l}: input {w.shape[0]} != previous output {self.weights[l - 1].shape[1]}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {l}: non-finite parameters")


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    batch_size: int = 32
    epochs: int = 100
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")


def init_mlp(in_dim: int, out_dim: int, depth: int, width: int, rng: np.random.Generator) -> MlpParams:
    """He-uniform weights, zero biases; ``depth`` hidden layers of ``width`` units."""
    dims = [in_dim, *([width] * depth), out_dim]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = math.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def mlp_forward(p: MlpParams, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    h = x[None, :] if single else x
    if h.shape[1] != p.in_dim:
        raise ValueError(f"input dim {h.shape[1]} != {p.in_dim}")
    last = len(p.weights) - 1
    for l, (w, b) in enumerate(zip(p.weights, p.biases)):
        h = h @ w + b
        if l < last:
            h = np.maximum(h, 0.0)
    return h[0] if single else h


def mlp_loss(p: MlpParams, x: np.ndarray, y: np.ndarray, sample_weight: np.ndarray | None = None) -> float:
    err = mlp_forward(p, x) - np.asarray(y, dtype=np.float64).reshape(len(x), -1)
    per_sample = (err**2).sum(axis=1)
    if sample_weight is not None:
        per_sample = per_sample * sample_weight
    return float(per_sample.mean())


def mlp_gradient(
    p: MlpParams, x: np.ndarray, y: np.ndarray, sample_weight: np.ndarray | None = None
) -> tuple[float, MlpParams]:
    """Loss and gradient of mean_i w_i * ||f(x_i) - y_i||^2 by backpropagation."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or len(x) == 0:
        raise ValueError("need a nonempty 2-D batch")
    if x.shape[1] != p.in_dim:
        raise ValueError(f"input dim {x.shape[1]} != {p.in_dim}")
    y = np.asarray(y, dtype=np.float64).reshape(len(x), -1)
    if y.shape[1] != p.out_dim:
        raise ValueError(f"target dim {y.shape[1]} != {p.out_dim}")
    wts = np.ones(len(x)) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)

    acts = [x]
    pre = []
    last = len(p.weights) - 1
    h = x
    for l, (w, b) in enumerate(zip(p.weights, p.biases)):
        z = h @ w + b
        pre.append(z)
        h = np.maximum(z, 0.0) if l < last else z
        acts.append(h)

    err = h - y
    loss = float(((err**2).sum(axis=1) * wts).mean())
    delta = 2.0 * err * wts[:, None] / len(x)
    gw: list[np.ndarray] = [None] * len(p.weights)  # type: ignore[list-item]
    gb: list[np.ndarray] = [None] * len(p.biases)  # type: ignore[list-item]
    for l in range(last, -1, -1):
        gw[l] = acts[l].T @ delta
        gb[l] = delta.sum(axis=0)
        if l:
            delta = (delta @ p.weights[l].T) * (pre[l - 1] > 0)
    return loss, MlpParams(gw, gb)


def finite_difference_gradient(
    p: MlpParams, x: np.ndarray, y: np.ndarray, step: float = 1e-5
) -> MlpParams:
    """Central differences of :func:`mlp_loss`, one parameter at a time."""
    out = MlpParams([np.zeros_like(w) for w in p.weights], [np.zeros_like(b) for b in p.biases])
    probe = p.copy()
    for arr, grad in zip(probe.arrays(), out.arrays()):
        for idx in np.ndindex(arr.shape):
            saved = arr[idx]
            arr[idx] = saved + step
            up = mlp_loss(probe, x, y)
            arr[idx] = saved - step
            down = mlp_loss(probe, x, y)
            arr[idx] = saved
            grad[idx] = (up - down) / (2 * step)
    return out


def max_relative_deviation(a: MlpParams, b: MlpParams, floor: float = 1e-8) -> float:
    """Largest |a - b| / max(|a|, |b|) over entries, ignoring entries where both are below ``floor``."""
    worst = 0.0
    for x, y in zip(a.arrays(), b.arrays()):
        scale = np.maximum(np.abs(x), np.abs(y))
        mask = scale >= floor
        if mask.any():
            worst = max(worst, float((np.abs(x - y)[mask] / scale[mask]).max()))
    return worst


def random_mlp(in_dim: int, out_dim: int, depth: int, width: int, rng: np.random.Generator) -> MlpParams:
    """Standard-normal weights and biases.

    Nonzero biases keep pre-activations off the ReLU kink, which zero biases
    hit exactly whenever a whole layer is inactive.
    """
    dims = [in_dim, *([width] * depth), out_dim]
    return MlpParams(
        [rng.normal(size=(i, o)) for i, o in zip(dims[:-1], dims[1:])],
        [rng.normal(size=o) for o in dims[1:]],
    )


def gradient_check(trials: int = 10, seed: int = 0, step: float = 1e-5) -> list[float]:
    """Max relative deviation of backprop from central differences on random nets with d <= 2, w <= 8."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(trials):
        depth, width = int(rng.integers(0, 3)), int(rng.integers(1, 9))
        in_dim, out_dim, batch = int(rng.integers(1, 9)), int(rng.integers(1, 4)), int(rng.integers(1, 9))
        p = random_mlp(in_dim, out_dim, depth, width, rng)
        x = rng.random((batch, in_dim))
        y = rng.normal(size=(batch, out_dim))
        _, grads = mlp_gradient(p, x, y)
        out.append(max_relative_deviation(grads, finite_difference_gradient(p, x, y, step)))
    return out


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, p: MlpParams) -> AdamState:
        return cls([np.zeros_like(a) for a in p.arrays()], [np.zeros_like(a) for a in p.arrays()])


def adam_step(p: MlpParams, grads: MlpParams, state: AdamState, cfg: TrainConfig) -> tuple[MlpParams, AdamState]:
    t = state.t + 1
    new_m, new_v, new_arrays = [], [], []
    for a, g, m, v in zip(p.arrays(), grads.arrays(), state.m, state.v):
        if m.shape != a.shape:
            raise ValueError("optimizer state does not match parameters")
        m = cfg.beta1 * m + (1 - cfg.beta1) * g
        v = cfg.beta2 * v + (1 - cfg.beta2) * g * g
        m_hat = m / (1 - cfg.beta1**t)
        v_hat = v / (1 - cfg.beta2**t)
        new_arrays.append(a - cfg.lr * m_hat / (np.sqrt(v_hat) + cfg.eps))
        new_m.append(m)
        new_v.append(v)
    k = len(p.weights)
    return MlpParams(new_arrays[:k], new_arrays[k:]), AdamState(new_m, new_v, t)


# -- datasets --------------------------------------------------------------------------


@dataclass(frozen=True)
class Dataset:
    """Distinct inputs with occupancy weights summing to 1."""

    x: np.ndarray
    y: np.ndarray
    weight: np.ndarray

    def __len__(self) -> int:
        return len(self.x)


def relative_error(preds: np.ndarray, targets: np.ndarray, weights: np.ndarray | None = None) -> float:
    """Weighted E||pred - target||^2 divided by weighted E||target||^2."""
    preds = np.asarray(preds, dtype=np.float64).reshape(len(targets), -1)
    targets = np.asarray(targets, dtype=np.float64).reshape(len(targets), -1)
    w = np.ones(len(targets)) if weights is None else np.asarray(weights, dtype=np.float64)
    denom = float((w * (targets**2).sum(axis=1)).sum())
    if denom <= 0:
        raise ZeroDivisionError("targets have zero second moment")
    return float((w * ((preds - targets) ** 2).sum(axis=1)).sum()) / denom


def default_starts(mdp: DeterministicMdp) -> list[BitString]:
    """Majority MDPs start anywhere on the s[c] = 0_b slice; others anywhere."""
    if isinstance(mdp, MajorityMdpSpec):
        zeros = BitString.zeros(mdp.b)
        return [zeros + rep for rep in all_bitstrings(mdp.n)]
    return list(all_bitstrings(mdp.state_width))


def build_datasets(
    mdp: DeterministicMdp,
    V: ValueTable,
    Q: QTable,
    policy: PolicyTable,
    starts: list[BitString] | None = None,
) -> dict[str, Dataset]:
    """Model, reward and Q datasets on the optimal occupancy from uniform starts.

    Inputs are state bits followed by action bits. The Q target is Q*_1.
    """
    tab = tabulate(mdp)
    starts = default_starts(mdp) if starts is None else starts
    if not starts:
        raise ValueError("empty start set")
    occ = optimal_state_distribution(tab, policy, {s: 1.0 / len(starts) for s in starts})
    keys = sorted(occ)
    width = tab.state_width
    xs, model_y, reward_y, q_y, w = [], [], [], [], []
    for si, ai in keys:
        a = tab.actions[ai]
        xs.append([*from_int(si, width), *mdp.action_bits(a)])
        model_y.append(list(from_int(int(tab.next[si, ai]), width)))
        reward_y.append([tab.reward[si, ai]])
        q_y.append([Q.q[0, si, ai]])
        w.append(occ[(si, ai)])
    x = np.array(xs, dtype=np.float64)
    weight = np.array(w)
    weight = weight / weight.sum()
    return {
        "model": Dataset(x, np.array(model_y, dtype=np.float64), weight),
        "reward": Dataset(x, np.array(reward_y, dtype=np.float64), weight),
        "q": Dataset(x, np.array(q_y, dtype=np.float64), weight),
    }


# -- training ----------------------------------------------------------------------------


@dataclass
class FitResult:
    params: MlpParams
    initial_loss: float
    final_loss: float
    errors: list[float]
    diverged: bool = False


def fit(data: Dataset, depth: int, width: int, cfg: TrainConfig, seed: int | np.random.SeedSequence) -> FitResult:
    """Minibatch Adam on the occupancy-weighted squared error.

    Sample weights are rescaled to mean 1 so a minibatch loss is an unbiased
    estimate of the weighted objective. One epoch visits every distinct input
    once in a shuffled order. ``errors`` holds the relative error after each epoch.
    """
    rng = np.random.default_rng(seed)
    p = init_mlp(data.x.shape[1], data.y.shape[1], depth, width, rng)
    state = AdamState.zeros_like(p)
    scaled = data.weight * len(data)
    full_loss = lambda q: mlp_loss(q, data.x, data.y, scaled)  # noqa: E731
    initial = full_loss(p)
    errors = []
    # overflow is reported through ``diverged``, not as warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(cfg.epochs):
            order = rng.permutation(len(data))
            for start in range(0, len(order), cfg.batch_size):
                idx = order[start : start + cfg.batch_size]
                loss, grads = mlp_gradient(p, data.x[idx], data.y[idx], scaled[idx])
                if not math.isfinite(loss):
                    return FitResult(p, initial, float("nan"), errors, diverged=True)
                p, state = adam_step(p, grads, state, cfg)
            errors.append(relative_error(mlp_forward(p, data.x), data.y, data.weight))
        final = full_loss(p)
    return FitResult(p, initial, final, errors, diverged=not math.isfinite(final))


TARGETS = ("model", "reward", "q")


@dataclass
class ApproxReport:
    seed: int
    e_model: float
    e_reward: float
    e_q: float
    dataset_sizes: dict
    initial_losses: dict
    final_losses: dict
    diverged: list = field(default_factory=list)
    history: dict = field(default_factory=dict)

    def errors(self) -> dict[str, float]:
        return {"e_model": self.e_model, "e_reward": self.e_reward, "e_q": self.e_q}

    def to_dict(self, with_history: bool = False) -> dict:
        d = asdict(self)
        if not with_history:
            d.pop("history")
        return d


def _one_repeat(datasets: dict[str, Dataset], depth: int, width: int, cfg: TrainConfig, repeat: int) -> ApproxReport:
    seed = cfg.seed + repeat
    fits = {}
    for t_index, name in enumerate(TARGETS):
        fits[name] = fit(datasets[name], depth, width, cfg, np.random.SeedSequence([seed, t_index]))
    err = {name: (f.errors[-1] if f.errors and not f.diverged else float("nan")) for name, f in fits.items()}
    return ApproxReport(
        seed=seed,
        e_model=err["model"],
        e_reward=err["reward"],
        e_q=err["q"],
        dataset_sizes={name: len(d) for name, d in datasets.items()},
        initial_losses={name: f.initial_loss for name, f in fits.items()},
        final_losses={name: f.final_loss for name, f in fits.items()},
        diverged=[name for name, f in fits.items() if f.diverged],
        history={name: f.errors for name, f in fits.items()},
    )


def worker_count() -> int:
    """Parallelism cap from CMLAB_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("CMLAB_THREADS", "1")))
    except ValueError:
        return 1


def run_approx_experiment(
    spec: DeterministicMdp, depth: int, width: int, cfg: TrainConfig, repeats: int
) -> tuple[list[ApproxReport], dict]:
    """Train one network per target per repeat; repeat r uses seed ``cfg.seed + r``."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    V, Q = backward_induction(spec)
    datasets = build_datasets(spec, V, Q, optimal_policy(Q))
    workers = min(worker_count(), repeats)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            reports = list(pool.map(lambda r: _one_repeat(datasets, depth, width, cfg, r), range(repeats)))
    else:
        reports = [_one_repeat(datasets, depth, width, cfg, r) for r in range(repeats)]
    return reports, aggregate(reports)


def aggregate(reports: list[ApproxReport]) -> dict:
    out = {}
    for key in ("e_model", "e_reward", "e_q"):
        vals = np.array([getattr(r, key) for r in reports], dtype=np.float64)
        out[key] = {"mean": float(np.mean(vals)), "std": float(np.std(vals))}
    return out


def smooth(values: list[float], rate: float = 0.2) -> list[float]:
    """Exponential moving average for display: s_t = rate * x_t + (1 - rate) * s_{t-1}."""
    out: list[float] = []
    for v in values:
        out.append(v if not out else rate * v + (1 - rate) * out[-1])
    return out


def parity_or_majority(name: str, n: int) -> DeterministicMdp:
    from .mdp import canonical_majority_spec

    return ParityMdpSpec(n) if name == "parity" else canonical_majority_spec(n)
