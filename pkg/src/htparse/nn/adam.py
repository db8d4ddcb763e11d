from __future__ import annotations

from typing import Iterable

import numpy as np

from .autodiff import Parameter


class Adam:
    """Bias-corrected ADAM (Kingma & Ba) with its published defaults."""

    def __init__(self, params: Iterable[Parameter], lr: float = 0.001, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = [p for p in params if p.trainable]
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {id(p): np.zeros_like(p.value) for p in self.params}
        self.v = {id(p): np.zeros_like(p.value) for p in self.params}

    def step(self, grads: dict[Parameter, np.ndarray]) -> None:
        # every parameter moves through the update; a missing gradient
        # counts as zero so its moments keep decaying
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for p in self.params:
            g = grads.get(p)
            m, v = self.m[id(p)], self.v[id(p)]
            m *= b1
            v *= b2
            if g is not None:
                m += (1.0 - b1) * g
                v += (1.0 - b2) * g * g
            p.value -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
