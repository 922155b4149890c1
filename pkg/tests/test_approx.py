import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmlab.approx import (
    AdamState,
    MlpParams,
    TrainConfig,
    build_datasets,
    gradient_check,
    init_mlp,
    max_relative_deviation,
    mlp_forward,
    mlp_gradient,
    random_mlp,
    relative_error,
    run_approx_experiment,
    adam_step,
    smooth,
)
from cmlab.mdp import ParityMdpSpec, canonical_majority_spec
from cmlab.solver import backward_induction, optimal_policy


def zeros_like(p):
    return MlpParams([np.zeros_like(w) for w in p.weights], [np.zeros_like(b) for b in p.biases])


def test_forward_zero_params():
    p = zeros_like(init_mlp(4, 3, 2, 5, np.random.default_rng(0)))
    assert np.array_equal(mlp_forward(p, np.ones(4)), np.zeros(3))


def test_forward_identity_layer():
    p = MlpParams([np.array([[0.0], [1.0], [0.0]])], [np.zeros(1)])
    assert mlp_forward(p, np.array([0.3, 0.7, 0.1])) == pytest.approx([0.7])


def test_forward_shape_error():
    p = init_mlp(4, 1, 1, 3, np.random.default_rng(0))
    with pytest.raises(ValueError):
        mlp_forward(p, np.ones(5))


@given(st.integers(0, 10_000), st.integers(0, 2), st.integers(1, 8))
def test_forward_finite(seed, depth, width):
    rng = np.random.default_rng(seed)
    p = random_mlp(6, 2, depth, width, rng)
    assert np.all(np.isfinite(mlp_forward(p, rng.random((5, 6)))))


def test_gradient_zero_at_global_fit():
    rng = np.random.default_rng(1)
    p = random_mlp(3, 2, 1, 4, rng)
    x = rng.random((6, 3))
    loss, g = mlp_gradient(p, x, mlp_forward(p, x))
    assert loss == 0
    assert all(not a.any() for a in g.arrays())


def test_gradient_linear_neuron():
    w, b = np.array([[0.5], [-1.0]]), np.array([0.25])
    p = MlpParams([w], [b])
    x, y = np.array([[2.0, 1.0]]), np.array([[3.0]])
    y_hat = 2.0 * 0.5 - 1.0 + 0.25
    _, g = mlp_gradient(p, x, y)
    assert g.weights[0][:, 0] == pytest.approx(2 * (y_hat - 3.0) * x[0])
    assert g.biases[0] == pytest.approx([2 * (y_hat - 3.0)])


def test_gradient_matches_finite_differences():
    devs = gradient_check(10, seed=0)
    assert max(devs) < 1e-4


def test_gradient_weighted():
    rng = np.random.default_rng(2)
    p = random_mlp(3, 1, 1, 4, rng)
    x, y = rng.random((4, 3)), rng.random((4, 1))
    w = np.array([1.0, 0.0, 2.0, 1.0])
    _, g = mlp_gradient(p, x, y, w)
    # duplicating a sample is the same as weighting it by 2, dropping it the same as weight 0
    xd, yd = x[[0, 2, 2, 3]], y[[0, 2, 2, 3]]
    _, gd = mlp_gradient(p, xd, yd)
    assert max_relative_deviation(g, gd) < 1e-12


def test_gradient_errors():
    p = init_mlp(3, 1, 1, 2, np.random.default_rng(0))
    with pytest.raises(ValueError):
        mlp_gradient(p, np.zeros((0, 3)), np.zeros((0, 1)))
    with pytest.raises(ValueError):
        mlp_gradient(p, np.zeros((2, 3)), np.zeros((2, 2)))


def test_adam_zero_gradient():
    p = random_mlp(3, 2, 1, 4, np.random.default_rng(0))
    q, state = adam_step(p, zeros_like(p), AdamState.zeros_like(p), TrainConfig())
    assert all(np.array_equal(a, b) for a, b in zip(p.arrays(), q.arrays()))
    assert state.t == 1


def test_adam_first_step_is_lr_sign():
    p = random_mlp(2, 1, 0, 1, np.random.default_rng(0))
    g = MlpParams([np.array([[3.0], [-0.2]])], [np.array([1e-3])])
    cfg = TrainConfig(lr=1e-3)
    q, _ = adam_step(p, g, AdamState.zeros_like(p), cfg)
    for a, b, ga in zip(p.arrays(), q.arrays(), g.arrays()):
        assert b - a == pytest.approx(-cfg.lr * np.sign(ga), rel=1e-4)


def test_adam_decreases_quadratic():
    # loss ||W - target||^2 for a single bias-free weight matrix
    target = np.array([[1.0, -2.0], [0.5, 3.0]])
    p = MlpParams([np.zeros((2, 2))], [np.zeros(2)])
    state = AdamState.zeros_like(p)
    cfg = TrainConfig(lr=0.05)
    losses = []
    for _ in range(100):
        diff = p.weights[0] - target
        losses.append(float((diff**2).sum()))
        g = MlpParams([2 * diff], [np.zeros(2)])
        p, state = adam_step(p, g, state, cfg)
    assert losses[-1] < 0.05 * losses[0]
    assert all(b <= a + 1e-9 for a, b in zip(losses[::10], losses[10::10]))


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(lr=0)
    with pytest.raises(ValueError):
        TrainConfig(batch_size=0)


def test_relative_error_examples():
    t = np.array([[1.0, 2.0], [0.0, 3.0]])
    w = np.array([0.25, 0.75])
    assert relative_error(t, t, w) == 0
    assert relative_error(np.zeros_like(t), t, w) == pytest.approx(1.0)
    p = t + 0.3
    assert relative_error(5 * p, 5 * t, w) == pytest.approx(relative_error(p, t, w))
    with pytest.raises(ZeroDivisionError):
        relative_error(t, np.zeros_like(t), w)


@given(st.integers(0, 1000), st.floats(0.1, 100))
def test_relative_error_scale_invariant(seed, c):
    rng = np.random.default_rng(seed)
    t, p, w = rng.normal(size=(5, 2)), rng.normal(size=(5, 2)), rng.random(5) + 0.1
    assert relative_error(c * p, c * t, w) == pytest.approx(relative_error(p, t, w))


@pytest.fixture(scope="module")
def datasets7():
    spec = canonical_majority_spec(7)
    V, Q = backward_induction(spec)
    return spec, build_datasets(spec, V, Q, optimal_policy(Q))


def test_datasets(datasets7):
    spec, ds = datasets7
    for d in ds.values():
        assert d.weight.sum() == pytest.approx(1.0)
        assert d.x.shape[1] == spec.state_width + 1
    reward_rows = ds["reward"].y[:, 0] != 0
    for row in ds["reward"].x[reward_rows]:
        assert tuple(row[:3]) == (1, 1, 1) and tuple(row[3:10]) == spec.s_reward.bits
    assert set(np.unique(ds["model"].y)) <= {0.0, 1.0}
    q = ds["q"].y
    assert q.min() >= 0 and q.max() <= spec.horizon


def test_datasets_parity():
    spec = ParityMdpSpec(4)
    V, Q = backward_induction(spec)
    ds = build_datasets(spec, V, Q, optimal_policy(Q))
    assert ds["model"].x.shape[1] == 4 + 2 * spec.index_width


def test_seeded_runs_identical():
    spec = canonical_majority_spec(3)
    cfg = TrainConfig(epochs=5, seed=9)
    a, agg_a = run_approx_experiment(spec, 1, 4, cfg, 2)
    b, agg_b = run_approx_experiment(spec, 1, 4, cfg, 2)
    assert [r.errors() for r in a] == [r.errors() for r in b]
    assert agg_a == agg_b
    assert a[0].seed == 9 and a[1].seed == 10
    assert a[0].errors() != a[1].errors()


def test_threads_do_not_change_results(monkeypatch):
    spec = canonical_majority_spec(3)
    cfg = TrainConfig(epochs=3, seed=1)
    serial, _ = run_approx_experiment(spec, 1, 4, cfg, 3)
    monkeypatch.setenv("CMLAB_THREADS", "3")
    threaded, _ = run_approx_experiment(spec, 1, 4, cfg, 3)
    assert [r.errors() for r in serial] == [r.errors() for r in threaded]


def test_divergence_flagged():
    reports, agg = run_approx_experiment(canonical_majority_spec(3), 1, 4, TrainConfig(lr=1e300, epochs=3), 1)
    assert reports[0].diverged
    assert np.isnan(agg["e_q"]["mean"])


def test_training_reduces_loss():
    reports, _ = run_approx_experiment(canonical_majority_spec(3), 1, 16, TrainConfig(epochs=30, seed=2), 1)
    r = reports[0]
    for name in ("model", "reward", "q"):
        assert r.final_losses[name] <= r.initial_losses[name]


def test_overparameterized_fit():
    _, agg = run_approx_experiment(canonical_majority_spec(3), 1, 256, TrainConfig(seed=0), 1)
    assert all(agg[k]["mean"] < 0.05 for k in ("e_model", "e_reward", "e_q"))


def test_smooth():
    assert smooth([1.0, 0.0, 0.0]) == pytest.approx([1.0, 0.8, 0.64])
