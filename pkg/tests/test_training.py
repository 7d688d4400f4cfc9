import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qspkan.errors import InvalidInput
from qspkan.layer import LayerParams
from qspkan.stack import StackLayerSpec, StackSpec
from qspkan.training import (
    Dataset,
    OptimizerConfig,
    gradient,
    model_outputs,
    mse_loss,
    train,
)

CD = OptimizerConfig()
TS = OptimizerConfig(gradient_method="trig_shift")


def teacher_dataset(model, rng, n=40, target_dim=None):
    X = rng.uniform(-1, 1, (n, model.num_features if isinstance(model, LayerParams) else model.input_dim))
    Y = model_outputs(model, X)
    return Dataset(X, Y[:, : target_dim or Y.shape[1]])


def random_model(rng, kind, width, d):
    if kind == "layer":
        return LayerParams(rng.uniform(-np.pi, np.pi, (width, d + 1)))
    spec = StackSpec.zeros(width, 2, d, readout_policy=rng.choice(["real_part", "magnitude"]))
    return spec.with_params(rng.uniform(-np.pi, np.pi, spec.num_params))


class TestDataset:
    def test_validation(self):
        with pytest.raises(InvalidInput):
            Dataset(np.zeros((0, 2)), np.zeros((0, 1)))
        with pytest.raises(Exception):
            Dataset([[1.5]], [[0.0]])
        with pytest.raises(InvalidInput):
            Dataset([[0.5]], [[np.inf]])
        with pytest.raises(InvalidInput):
            Dataset([[0.5], [0.1]], [[0.0]])

    def test_vector_targets_promoted(self):
        assert Dataset([[0.1], [0.2]], [0.0, 1.0]).target_dim == 1


class TestLoss:
    def test_zero_at_targets(self, rng):
        model = LayerParams(rng.normal(size=(2, 3)))
        assert mse_loss(model, teacher_dataset(model, rng)) == 0

    def test_single_sample(self):
        # d=1 zero phases: P(x) = x
        assert mse_loss(LayerParams.zeros(1, 1), Dataset([[0.5]], [[0.0]])) == pytest.approx(0.25)

    def test_two_samples(self):
        data = Dataset([[0.2], [0.4]], [[0.1], [0.1]])
        assert mse_loss(LayerParams.zeros(1, 1), data) == pytest.approx(0.05)

    def test_compares_leading_outputs(self):
        model = LayerParams.zeros(2, 1)  # outputs ((x0+x1)/2, (x0-x1)/2)
        data = Dataset([[0.5, -0.5]], [[0.0]])
        assert mse_loss(model, data) == pytest.approx(0.0)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInput):
            mse_loss(LayerParams.zeros(2, 1), Dataset([[0.1]], [[0.0]]))
        with pytest.raises(InvalidInput):
            mse_loss(LayerParams.zeros(1, 1), Dataset([[0.1]], [[0.0, 0.0]]))


class TestGradient:
    @pytest.mark.parametrize("cfg", [CD, TS], ids=["central", "trig"])
    def test_zero_at_minimum(self, rng, cfg):
        model = random_model(rng, "layer", 2, 3)
        g = gradient(model, teacher_dataset(model, rng), cfg)
        assert np.linalg.norm(g) <= 1e-8

    @pytest.mark.parametrize("cfg", [CD, TS], ids=["central", "trig"])
    def test_single_parameter_closed_form(self, cfg):
        # one d=1 unit: output = (x cos phi + s sin phi) / sqrt 2
        x, t, phi = 0.35, -0.2, 0.7
        s = np.sqrt(1 - x * x)
        model = StackSpec((StackLayerSpec([[phi]]),), 1)
        out = (x * np.cos(phi) + s * np.sin(phi)) / np.sqrt(2)
        assert model_outputs(model, [[x]])[0, 0] == pytest.approx(out, abs=1e-15)
        exact = 2 * (out - t) * (-x * np.sin(phi) + s * np.cos(phi)) / np.sqrt(2)
        g = gradient(model, Dataset([[x]], [[t]]), cfg)
        assert abs(g[0] - exact) <= 1e-6

    @settings(max_examples=30)
    @given(st.integers(0, 2**31 - 1), st.sampled_from(["layer", "stack"]), st.integers(1, 4), st.integers(1, 4))
    def test_trig_shift_matches_central_difference(self, seed, kind, width, d):
        rng = np.random.default_rng(seed)
        model = random_model(rng, kind, width, d)
        X = rng.uniform(-1, 1, (12, width))
        data = Dataset(X, rng.uniform(-1, 1, (12, min(2, model.output_width))))
        diff = np.abs(gradient(model, data, CD) - gradient(model, data, TS))
        assert np.max(diff) <= 1e-6

    def test_empty_stack(self):
        assert gradient(StackSpec((), 1), Dataset([[0.1]], [[0.0]]), TS).size == 0


class TestTrain:
    def test_already_optimal(self, rng):
        model = random_model(rng, "layer", 2, 3)
        data = teacher_dataset(model, rng)
        trained, records = train(model, data, CD)
        assert all(r.loss <= 1e-12 for r in records)
        assert np.max(np.abs(trained.flatten() - model.flatten())) <= 1e-6

    def test_realizable_single_feature(self, rng):
        d = 3
        teacher = LayerParams(rng.uniform(-np.pi, np.pi, (1, d + 1)))
        data = teacher_dataset(teacher, rng, n=32)
        init = teacher.with_params(teacher.flatten() + rng.normal(0, 0.3, d + 1))
        trained, records = train(init, data, OptimizerConfig(max_iters=2000))
        assert len(records) <= 2001
        assert mse_loss(trained, data) <= 1e-4

    def test_best_so_far_non_increasing_and_final_not_worse(self, rng):
        model = random_model(rng, "stack", 2, 2)
        data = Dataset(rng.uniform(-1, 1, (20, 2)), rng.uniform(-0.5, 0.5, (20, 1)))
        trained, records = train(model, data, OptimizerConfig(max_iters=200, learning_rate=0.1))
        best = np.minimum.accumulate([r.loss for r in records])
        assert np.all(np.diff(best) <= 0)
        assert mse_loss(trained, data) <= records[0].loss
        assert mse_loss(trained, data) == best[-1]
        assert [r.iteration for r in records] == list(range(len(records)))

    def test_deterministic(self, rng):
        model = random_model(rng, "layer", 2, 2)
        data = Dataset(rng.uniform(-1, 1, (16, 2)), rng.uniform(-0.5, 0.5, (16, 2)))
        cfg = OptimizerConfig(max_iters=50, seed=4)
        m1, r1 = train(model, data, cfg)
        m2, r2 = train(model, data, cfg)
        assert r1 == r2
        assert m1.flatten().tobytes() == m2.flatten().tobytes()

    def test_zero_iterations(self, rng):
        model = random_model(rng, "layer", 1, 2)
        data = Dataset([[0.3]], [[0.1]])
        trained, records = train(model, data, OptimizerConfig(max_iters=0))
        assert len(records) == 1 and records[0].iteration == 0
        np.testing.assert_array_equal(trained.flatten(), model.flatten())

    def test_plain_gradient_descent(self, rng):
        model = LayerParams(rng.normal(0, 0.3, (1, 3)))
        data = Dataset(rng.uniform(-1, 1, (16, 1)), rng.uniform(-0.5, 0.5, (16, 1)))
        _, records = train(model, data, OptimizerConfig(optimizer="gd", learning_rate=0.1, max_iters=100))
        assert records[-1].loss < records[0].loss

    def test_no_clock(self, rng):
        model = random_model(rng, "layer", 1, 1)
        _, records = train(model, Dataset([[0.3]], [[0.1]]), OptimizerConfig(max_iters=3), clock=None)
        assert all(r.elapsed == 0 for r in records)

    @pytest.mark.parametrize("kwargs", [
        {"learning_rate": 0}, {"adam_beta1": 1.0}, {"fd_step": 0}, {"gradient_method": "adjoint"},
        {"optimizer": "lbfgs"}, {"max_iters": -1},
    ])
    def test_config_validation(self, kwargs):
        with pytest.raises(InvalidInput):
            OptimizerConfig(**kwargs)
