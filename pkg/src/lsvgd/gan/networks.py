"""Small fully-connected networks with hand-written reverse-mode gradients."""

import numpy as np


class Mlp:
    """Dense layers with tanh hidden activations.

    ``out_activation`` is ``"identity"`` or ``"tanh"``. Parameters live in
    ``self.params`` as ``[W0, b0, W1, b1, ...]`` with ``W`` of shape
    ``(fan_in, fan_out)``; gradients come back in the same order.
    """

    def __init__(self, widths, rng: np.random.Generator, out_activation="identity"):
        if len(widths) < 2:
            raise ValueError("an Mlp needs at least input and output widths")
        if out_activation not in ("identity", "tanh"):
            raise ValueError(f"unknown activation {out_activation!r}")
        self.widths = tuple(int(w) for w in widths)
        self.out_activation = out_activation
        self.params = []
        for fan_in, fan_out in zip(self.widths[:-1], self.widths[1:]):
            self.params.append(rng.standard_normal((fan_in, fan_out)) / np.sqrt(fan_in))
            self.params.append(np.zeros(fan_out))

    @property
    def n_layers(self):
        return len(self.widths) - 1

    def _activates(self, layer):
        return layer < self.n_layers - 1 or self.out_activation == "tanh"

    def forward(self, x):
        """Returns ``(output, cache)``; the cache feeds :meth:`backward`."""
        inputs, outs = [], []
        h = x
        for layer in range(self.n_layers):
            w, b = self.params[2 * layer], self.params[2 * layer + 1]
            inputs.append(h)
            h = h @ w + b
            if self._activates(layer):
                h = np.tanh(h)
            outs.append(h)
        return h, (inputs, outs)

    def __call__(self, x):
        return self.forward(x)[0]

    def backward(self, cache, grad_out):
        """Pull ``grad_out`` (d loss / d output) back; returns ``(param_grads, grad_input)``."""
        inputs, outs = cache
        grads = [None] * len(self.params)
        g = grad_out
        for layer in reversed(range(self.n_layers)):
            if self._activates(layer):
                g = g * (1.0 - outs[layer] ** 2)
            grads[2 * layer] = inputs[layer].T @ g
            grads[2 * layer + 1] = g.sum(axis=0)
            g = g @ self.params[2 * layer].T
        return grads, g

    def step(self, grads, lr):
        for p, g in zip(self.params, grads):
            p -= lr * g

    def copy(self):
        other = object.__new__(Mlp)
        other.widths = self.widths
        other.out_activation = self.out_activation
        other.params = [p.copy() for p in self.params]
        return other

    def all_finite(self):
        return all(np.all(np.isfinite(p)) for p in self.params)
