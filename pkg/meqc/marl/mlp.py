# meqc/marl/mlp.py - Fully connected network with hand-written reverse-mode gradients

import logging
from typing import Sequence

import numpy as np

from meqc.errors import ContractViolationError, TrainingError

logger = logging.getLogger(__name__)


def _tanh_grad(z: np.ndarray, a: np.ndarray) -> np.ndarray:
    return 1.0 - a**2


def _relu_grad(z: np.ndarray, a: np.ndarray) -> np.ndarray:
    return np.where(z > 0, 1.0, 0.0)


def _linear_grad(z: np.ndarray, a: np.ndarray) -> np.ndarray:
    return np.ones_like(z)


ACTIVATIONS = {
    "tanh": (np.tanh, _tanh_grad),
    "relu": (lambda z: np.maximum(z, 0.0), _relu_grad),
    "linear": (lambda z: z, _linear_grad),
}


class Mlp:
    """Dense network whose weights live in one flat vector.

    Layer l owns a (out, in) weight block followed by an (out,) bias block inside
    ``params``; the per-layer arrays are views, so in-place updates of ``params``
    are seen by forward passes.
    """

    def __init__(
        self,
        sizes: Sequence[int],
        activation: str = "tanh",
        rng: np.random.Generator | None = None,
        output_scale: float = 1.0,
    ):
        if len(sizes) < 2:
            raise ContractViolationError("an Mlp needs at least an input and an output size")
        if activation not in ACTIVATIONS:
            raise ContractViolationError(f"unknown activation {activation!r}")
        self.sizes = tuple(int(s) for s in sizes)
        self.activation = activation
        self._act, self._act_grad = ACTIVATIONS[activation]

        n_params = sum(n_out * n_in + n_out for n_in, n_out in zip(self.sizes[:-1], self.sizes[1:]))
        self.params = np.zeros(n_params)
        self.layers: list[tuple[np.ndarray, np.ndarray]] = []
        offset = 0
        for n_in, n_out in zip(self.sizes[:-1], self.sizes[1:]):
            weight = self.params[offset : offset + n_out * n_in].reshape(n_out, n_in)
            offset += n_out * n_in
            bias = self.params[offset : offset + n_out]
            offset += n_out
            self.layers.append((weight, bias))

        if rng is not None:
            for i, (weight, _) in enumerate(self.layers):
                scale = 1.0 / np.sqrt(weight.shape[1])
                if i == len(self.layers) - 1:
                    scale *= output_scale
                weight[...] = rng.normal(0.0, scale, size=weight.shape)

    @property
    def n_params(self) -> int:
        return self.params.size

    def _as_batch(self, x: np.ndarray) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        batch = x[None, :] if single else x
        if batch.ndim != 2 or batch.shape[1] != self.sizes[0]:
            raise ContractViolationError(f"expected input width {self.sizes[0]}, got shape {x.shape}")
        return batch, single

    def forward_cache(self, x: np.ndarray) -> tuple[np.ndarray, list]:
        a, single = self._as_batch(x)
        cache = []
        last = len(self.layers) - 1
        for i, (weight, bias) in enumerate(self.layers):
            z = a @ weight.T + bias
            out = z if i == last else self._act(z)
            cache.append((a, z, out))
            a = out
        return (a[0] if single else a), cache

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.forward_cache(x)[0]

    def backward(self, cache: list, upstream: np.ndarray) -> np.ndarray:
        """Gradient of sum(upstream * output) with respect to the flat parameters."""
        delta = np.asarray(upstream, dtype=np.float64)
        if delta.ndim == 1:
            delta = delta[None, :]
        grad = np.zeros_like(self.params)
        offset = self.n_params
        for i in range(len(self.layers) - 1, -1, -1):
            weight, _ = self.layers[i]
            a_prev, _, _ = cache[i]
            n_out, n_in = weight.shape
            offset -= n_out
            grad[offset : offset + n_out] = delta.sum(axis=0)
            offset -= n_out * n_in
            grad[offset : offset + n_out * n_in] = (delta.T @ a_prev).ravel()
            if i > 0:
                _, z_prev, out_prev = cache[i - 1]
                delta = (delta @ weight) * self._act_grad(z_prev, out_prev)
        return grad

    def gradients(self, x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
        _, cache = self.forward_cache(x)
        return self.backward(cache, upstream)

    def set_params(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != self.params.shape:
            raise ContractViolationError(f"expected {self.n_params} parameters, got {flat.shape}")
        self.params[...] = flat

    def copy(self) -> "Mlp":
        clone = Mlp(self.sizes, self.activation)
        clone.set_params(self.params)
        return clone


def forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    return net.forward(x)


def gradients(net: Mlp, x: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    grad = net.gradients(x, upstream)
    if not np.all(np.isfinite(grad)):
        raise TrainingError(
            "non-finite gradient", {"max_abs_param": float(np.max(np.abs(net.params)))}
        )
    return grad
