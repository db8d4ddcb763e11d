"""LSTM and MLP building blocks over the autodiff core."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import DimensionError, Expr
from .params import ParamStore

FORGET_BIAS = 1.0


class LSTM:
    """A stacked LSTM; layer k reads the hidden output of layer k-1."""

    def __init__(self, store: ParamStore, name: str, input_dim: int, hidden_dim: int,
                 layers: int = 1):
        if layers < 1:
            raise ValueError("an LSTM needs at least one layer")
        self.name = name
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.layers = layers
        self.weights = []
        for k in range(layers):
            in_dim = input_dim if k == 0 else hidden_dim
            W = store.add_matrix(f"{name}.l{k}.W", 4 * hidden_dim, in_dim + hidden_dim)
            bias = np.zeros(4 * hidden_dim)
            bias[hidden_dim:2 * hidden_dim] = FORGET_BIAS
            b = store.add_value(f"{name}.l{k}.b", bias)
            self.weights.append((W, b))

    def initial(self) -> "LstmState":
        zero = ad.constant(np.zeros(2 * self.hidden_dim))
        return LstmState(self, (zero,) * self.layers, 0)

    def transduce(self, xs: Sequence[Expr]) -> list[Expr]:
        """Outputs after each prefix of ``xs``."""
        s = self.initial()
        outs = []
        for x in xs:
            s = s.advance(x)
            outs.append(s.output())
        return outs


class LstmState:
    """Immutable LSTM state; ``advance`` returns a new state."""

    __slots__ = ("spec", "hc", "steps", "_out")

    def __init__(self, spec: LSTM, hc: tuple[Expr, ...], steps: int):
        self.spec = spec
        self.hc = hc
        self.steps = steps
        self._out = None

    def advance(self, x: Expr) -> "LstmState":
        spec = self.spec
        if x.value.shape != (spec.input_dim,):
            raise DimensionError(f"{spec.name}.advance", x.value.shape, (spec.input_dim,))
        H = spec.hidden_dim
        new = []
        inp = x
        for (W, b), prev in zip(spec.weights, self.hc):
            hc = ad.lstm_cell(W, b, inp, prev)
            new.append(hc)
            inp = ad.slice_(hc, 0, H)
        state = LstmState(spec, tuple(new), self.steps + 1)
        state._out = inp
        return state

    def output(self) -> Expr:
        if self._out is None:
            self._out = ad.slice_(self.hc[-1], 0, self.spec.hidden_dim)
        return self._out


class MLP:
    """One hidden layer: W2 g(W1 x + b1) + b2, no output nonlinearity."""

    def __init__(self, store: ParamStore, name: str, input_dim: int, hidden_dim: int,
                 output_dim: int, activation: Callable[[Expr], Expr] = ad.tanh):
        self.name = name
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.output_dim = output_dim
        self.activation = activation
        self.W1 = store.add_matrix(f"{name}.W1", hidden_dim, input_dim)
        self.b1 = store.add_bias(f"{name}.b1", hidden_dim)
        self.W2 = store.add_matrix(f"{name}.W2", output_dim, hidden_dim)
        self.b2 = store.add_bias(f"{name}.b2", output_dim)

    def __call__(self, x: Expr) -> Expr:
        if x.value.shape != (self.input_dim,):
            raise DimensionError(f"{self.name}.apply", x.value.shape, (self.input_dim,))
        hidden = self.activation(ad.affine(self.W1, x, self.b1))
        return ad.affine(self.W2, hidden, self.b2)
