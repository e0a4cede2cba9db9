# src/problems/mlp.py

from dataclasses import dataclass

import numpy as np

from ..rng.streams import RngStream
from ..utils.exceptions import DimensionMismatchError, InvalidArgumentError

def relu(z):
    return np.maximum(z, 0.0)

def relu_grad(z):
    # subgradient at 0 is 0
    return np.where(z > 0, 1.0, 0.0)

@dataclass(frozen=True)
class Mlp:
    """
    Scalar-in, scalar-out feed-forward network with rectifier hidden layers and a linear output.

    The weights are not stored on the network: they are the flattened decision
    variable x, laid out layer by layer as W (n_out x n_in, row-major) then b.

    Attributes:
        layer_sizes (tuple[int, ...]): Widths from input to output, e.g. (1, 50, 50, 1).
    """
    layer_sizes: tuple[int, ...] = (1, 50, 50, 1)

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.layer_sizes)
        if len(sizes) < 2 or sizes[0] != 1 or sizes[-1] != 1 or min(sizes) < 1:
            raise InvalidArgumentError(f"layer_sizes must start and end with 1 and be positive, got {sizes}")
        object.__setattr__(self, 'layer_sizes', sizes)

    @property
    def n_params(self) -> int:
        return sum(n_in * n_out + n_out for n_in, n_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]))

    def unflatten(self, x) -> list[tuple[np.ndarray, np.ndarray]]:
        """Split the flat parameter vector into (W, b) per layer (views, no copies)."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n_params,):
            raise DimensionMismatchError(f"Expected {self.n_params} parameters, got shape {x.shape}")
        layers, offset = [], 0
        for n_in, n_out in zip(self.layer_sizes[:-1], self.layer_sizes[1:]):
            W = x[offset: offset + n_in * n_out].reshape(n_out, n_in)
            offset += n_in * n_out
            b = x[offset: offset + n_out]
            offset += n_out
            layers.append((W, b))
        return layers

    def init_params(self, rng: RngStream) -> np.ndarray:
        """Fan-in scaled Gaussian weights (gain sqrt(2) into rectifier layers, 1 into the output) and zero biases."""
        chunks = []
        n_layers = len(self.layer_sizes) - 1
        for i, (n_in, n_out) in enumerate(zip(self.layer_sizes[:-1], self.layer_sizes[1:])):
            gain = 1.0 if i == n_layers - 1 else np.sqrt(2.0)
            chunks.append(rng.normal(0.0, gain / np.sqrt(n_in), size=n_in * n_out))
            chunks.append(np.zeros(n_out))
        return np.concatenate(chunks)

    def _forward_cache(self, x, inputs: np.ndarray):
        activations = [inputs.reshape(-1, 1)]
        pre_activations = []
        layers = self.unflatten(x)
        for i, (W, b) in enumerate(layers):
            z = activations[-1] @ W.T + b
            pre_activations.append(z)
            activations.append(z if i == len(layers) - 1 else relu(z))
        return layers, pre_activations, activations

    def forward(self, x, inputs) -> np.ndarray:
        """Network outputs for a vector of scalar inputs, shape (m,)."""
        inputs = np.atleast_1d(np.asarray(inputs, dtype=np.float64))
        _, _, activations = self._forward_cache(x, inputs)
        return activations[-1][:, 0]

    def backward(self, x, inputs) -> np.ndarray:
        """Gradients of each output with respect to the flat parameters, shape (m, n_params)."""
        inputs = np.atleast_1d(np.asarray(inputs, dtype=np.float64))
        layers, pre_activations, activations = self._forward_cache(x, inputs)
        m = inputs.shape[0]
        grads = []
        delta = np.ones((m, 1))
        for i in range(len(layers) - 1, -1, -1):
            W, _ = layers[i]
            dW = delta[:, :, None] * activations[i][:, None, :]
            grads.append(delta)
            grads.append(dW.reshape(m, -1))
            if i > 0:
                delta = (delta @ W) * relu_grad(pre_activations[i - 1])
        return np.concatenate(grads[::-1], axis=1)

    def min_abs_preactivation(self, x, inputs) -> float:
        """Smallest |z| over all hidden units, used to keep finite differences off the rectifier kinks."""
        inputs = np.atleast_1d(np.asarray(inputs, dtype=np.float64))
        _, pre_activations, _ = self._forward_cache(x, inputs)
        hidden = pre_activations[:-1]
        if not hidden:
            return np.inf
        return float(min(np.min(np.abs(z)) for z in hidden))

def mlp_forward(net: Mlp, x, input_value: float) -> float:
    """g_x(input) for one scalar input."""
    return float(net.forward(x, [input_value])[0])

def mlp_backward(net: Mlp, x, input_value: float) -> np.ndarray:
    """Gradient of g_x(input) with respect to x for one scalar input."""
    return net.backward(x, [input_value])[0]
