# tests/tests_problems/test_mlp.py

import numpy as np
import pytest

from src.diagnostics import central_difference, relative_error
from src.problems import Mlp, mlp_backward, mlp_forward
from src.rng import stream
from src.utils.exceptions import DimensionMismatchError, InvalidArgumentError

def test_parameter_count():
    """sum over layers of n_in * n_out + n_out."""
    assert Mlp((1, 50, 50, 1)).n_params == 2701
    assert Mlp((1, 16, 16, 1)).n_params == 321
    assert Mlp((1, 1)).n_params == 2

def test_zero_weights_give_zero_output(small_net):
    """All-zero parameters produce output 0 for any input."""
    x = np.zeros(small_net.n_params)
    assert mlp_forward(small_net, x, 1.7) == 0.0
    np.testing.assert_array_equal(small_net.forward(x, [-2.0, 0.0, 3.0]), np.zeros(3))

def test_single_layer_is_affine():
    """Without hidden layers the network is w * input + b."""
    net = Mlp((1, 1))
    assert mlp_forward(net, np.array([2.0, -0.5]), 3.0) == pytest.approx(5.5)
    np.testing.assert_array_equal(mlp_backward(net, np.array([2.0, -0.5]), 3.0), [3.0, 1.0])

def test_backward_matches_finite_differences(small_net):
    """mlp_backward agrees with central differences (rel. err < 1e-5) on 100 random (x, input) pairs away from kinks."""
    rng = stream(17, 0)
    checked = 0
    while checked < 100:
        x = small_net.init_params(rng)
        x[small_net.n_params - 1] = rng.normal(0.0, 1.0)
        value = float(rng.uniform(-3.0, 3.0))
        if small_net.min_abs_preactivation(x, [value]) < 1e-3:
            continue
        numeric = central_difference(lambda p: mlp_forward(small_net, p, value), x, 1e-6)[0]
        assert np.max(relative_error(mlp_backward(small_net, x, value), numeric)) < 1e-5
        checked += 1

def test_zero_weights_gradient_is_output_bias_only(small_net):
    """With zero weights every rectifier is at its kink (subgradient 0), leaving only the output bias."""
    grad = mlp_backward(small_net, np.zeros(small_net.n_params), 2.0)
    expected = np.zeros(small_net.n_params)
    expected[-1] = 1.0
    np.testing.assert_array_equal(grad, expected)

def test_zero_input_kills_first_layer_weight_gradient(small_net):
    """The first-layer weight gradient is proportional to the input."""
    x = small_net.init_params(stream(3, 3))
    grad = mlp_backward(small_net, x, 0.0)
    np.testing.assert_array_equal(grad[:small_net.layer_sizes[1]], np.zeros(small_net.layer_sizes[1]))

def test_batched_backward_matches_single(small_net):
    """Batched forward/backward rows equal the single-input results."""
    x = small_net.init_params(stream(5, 5))
    inputs = np.array([-1.0, 0.3, 2.5])
    values = small_net.forward(x, inputs)
    grads = small_net.backward(x, inputs)
    for i, value in enumerate(inputs):
        assert values[i] == pytest.approx(mlp_forward(small_net, x, value))
        np.testing.assert_allclose(grads[i], mlp_backward(small_net, x, value))

def test_init_params_layout(small_net):
    """Initialization gives zero biases and finite fan-in scaled weights."""
    x = small_net.init_params(stream(1, 2))
    assert x.shape == (small_net.n_params,)
    for W, b in small_net.unflatten(x):
        np.testing.assert_array_equal(b, np.zeros_like(b))
        assert np.all(np.isfinite(W))

def test_size_mismatch(small_net):
    """A parameter vector of the wrong length is rejected."""
    with pytest.raises(DimensionMismatchError):
        mlp_forward(small_net, np.zeros(small_net.n_params + 1), 0.5)
    with pytest.raises(DimensionMismatchError):
        mlp_backward(small_net, np.zeros(3), 0.5)

@pytest.mark.parametrize("sizes", [(1,), (2, 4, 1), (1, 4, 2), (1, 0, 1)])
def test_invalid_layer_sizes(sizes):
    """Networks map a scalar to a scalar through positive widths."""
    with pytest.raises(InvalidArgumentError):
        Mlp(sizes)
