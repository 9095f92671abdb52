import math

import numpy as np
import pytest

from meqc.errors import ContractViolationError, TrainingError
from meqc.marl.mlp import Mlp, forward, gradients


def _loss(net, x, upstream):
    return float(np.sum(upstream * net.forward(x)))


def test_zero_weights_output_biases():
    net = Mlp((3, 4, 2), "tanh")
    net.layers[-1][1][...] = [0.5, -1.5]
    assert forward(net, np.ones(3)) == pytest.approx([0.5, -1.5])


def test_hand_computed_tiny_net():
    net = Mlp((2, 2, 1), "tanh")
    w1, b1 = net.layers[0]
    w2, b2 = net.layers[1]
    w1[...] = [[1.0, -1.0], [0.5, 2.0]]
    b1[...] = [0.1, -0.2]
    w2[...] = [[2.0, -3.0]]
    b2[...] = [0.25]
    x = np.array([0.3, 0.7])
    h1 = math.tanh(0.3 - 0.7 + 0.1)
    h2 = math.tanh(0.15 + 1.4 - 0.2)
    assert forward(net, x)[0] == pytest.approx(2.0 * h1 - 3.0 * h2 + 0.25, rel=1e-12)


def test_forward_is_deterministic_and_batched(rng):
    net = Mlp((5, 8, 3), "relu", rng)
    x = rng.normal(size=(4, 5))
    assert np.array_equal(net.forward(x), net.forward(x))
    # batched and single-row products may round differently
    np.testing.assert_allclose(net.forward(x)[2], net.forward(x[2]), rtol=1e-12, atol=1e-12)


def test_shape_mismatch_is_a_contract_error(rng):
    net = Mlp((3, 4, 1), "tanh", rng)
    with pytest.raises(ContractViolationError):
        net.forward(np.ones(4))
    with pytest.raises(ContractViolationError):
        net.set_params(np.zeros(3))


@pytest.mark.parametrize("activation", ["tanh", "linear"])
def test_gradients_match_central_differences(activation):
    rng = np.random.default_rng(42)
    checks = 0
    while checks < 1000:
        sizes = (int(rng.integers(1, 5)), int(rng.integers(1, 6)), int(rng.integers(1, 6)), int(rng.integers(1, 4)))
        net = Mlp(sizes, activation, rng)
        net.set_params(rng.normal(0.0, 0.8, size=net.n_params))
        x = rng.normal(size=(3, sizes[0]))
        upstream = rng.normal(size=(3, sizes[-1]))
        analytic = gradients(net, x, upstream)
        for i in rng.choice(net.n_params, size=min(net.n_params, 25), replace=False):
            original = net.params[i]
            step = 1e-6
            net.params[i] = original + step
            plus = _loss(net, x, upstream)
            net.params[i] = original - step
            minus = _loss(net, x, upstream)
            net.params[i] = original
            numeric = (plus - minus) / (2 * step)
            assert analytic[i] == pytest.approx(numeric, rel=1e-4, abs=1e-7)
            checks += 1


def test_zero_upstream_gives_zero_gradient(rng):
    net = Mlp((4, 6, 2), "tanh", rng)
    grad = gradients(net, rng.normal(size=(5, 4)), np.zeros((5, 2)))
    assert not grad.any()


def test_linear_net_gradient_is_least_squares_gradient(rng):
    net = Mlp((3, 1), "linear", rng)
    x = rng.normal(size=(20, 3))
    y = rng.normal(size=20)
    pred = net.forward(x)[:, 0]
    residual = pred - y
    # d/dtheta of 0.5 * mean(residual^2)
    grad = gradients(net, x, (residual / len(y))[:, None])
    weight, bias = net.layers[0]
    assert grad[: weight.size] == pytest.approx(x.T @ residual / len(y), rel=1e-10)
    assert grad[weight.size :] == pytest.approx([residual.mean()], rel=1e-10)


def test_non_finite_gradient_is_a_training_error(rng):
    net = Mlp((2, 3, 1), "tanh", rng)
    with pytest.raises(TrainingError) as excinfo:
        gradients(net, np.ones(2), np.array([np.inf]))
    assert "max_abs_param" in excinfo.value.diagnostics


def test_params_are_views_of_the_flat_vector(rng):
    net = Mlp((2, 3, 1), "tanh", rng)
    before = net.forward(np.ones(2)).copy()
    net.params += 0.1
    assert not np.array_equal(before, net.forward(np.ones(2)))
    clone = net.copy()
    assert np.array_equal(clone.params, net.params)
    clone.params[0] += 1.0
    assert clone.params[0] != net.params[0]
