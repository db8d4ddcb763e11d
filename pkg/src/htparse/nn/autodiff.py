"""Reverse-mode automatic differentiation over float64 numpy vectors.

Every op evaluates eagerly and records its inputs together with a closure
that maps the output gradient to input gradients.  A graph lives exactly as
long as the expressions referencing it; nothing is stored globally, so a new
sentence always starts from a fresh graph.
"""

from __future__ import annotations

import contextlib
import itertools
from typing import Callable, Iterable, Sequence

import numpy as np

_ids = itertools.count()
_tracking = True


class DimensionError(ValueError):
    """Raised when an op receives operands of incompatible shapes."""

    def __init__(self, op: str, *shapes):
        self.op = op
        self.shapes = shapes
        desc = ", ".join(str(tuple(s)) for s in shapes)
        super().__init__(f"{op}: incompatible shapes {desc}")


class ContractError(ValueError):
    pass


@contextlib.contextmanager
def no_grad():
    """Evaluate ops without recording the graph (inference)."""
    global _tracking
    prev = _tracking
    _tracking = False
    try:
        yield
    finally:
        _tracking = prev


class Expr:
    __slots__ = ("value", "parents", "backward_fn", "op", "nid", "__weakref__")

    def __init__(self, value, parents=(), backward_fn=None, op="const"):
        self.value = value
        self.nid = next(_ids)
        self.op = op
        if _tracking:
            self.parents = tuple(parents)
            self.backward_fn = backward_fn
        else:
            self.parents = ()
            self.backward_fn = None

    @property
    def shape(self):
        return self.value.shape

    def __len__(self):
        return self.value.shape[0]

    def __repr__(self):
        return f"Expr({self.op}, shape={self.value.shape})"

    def __add__(self, other):
        if isinstance(other, Expr):
            return add(self, other)
        return add_const(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Expr):
            return sub(self, other)
        return add_const(self, -other)

    def __rsub__(self, other):
        return add_const(neg(self), other)

    def __neg__(self):
        return neg(self)

    def __mul__(self, other):
        if isinstance(other, Expr):
            return mul(self, other)
        return scale(self, other)

    __rmul__ = __mul__


class Parameter(Expr):
    """A named leaf whose value is owned and updated by an optimizer."""

    __slots__ = ("name", "trainable")

    def __init__(self, name: str, value: np.ndarray, trainable: bool = True):
        super().__init__(np.asarray(value, dtype=np.float64), op="param")
        self.parents = ()
        self.backward_fn = None
        self.name = name
        self.trainable = trainable

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.value.shape})"


class _RowGrad:
    __slots__ = ("index", "value")

    def __init__(self, index, value):
        self.index = index
        self.value = value


def constant(value) -> Expr:
    return Expr(np.asarray(value, dtype=np.float64))


def _check(cond, op, *shapes):
    if not cond:
        raise DimensionError(op, *shapes)


def affine(W: Expr, x: Expr, b: Expr | None = None) -> Expr:
    """W @ x + b."""
    Wv, xv = W.value, x.value
    _check(Wv.ndim == 2 and xv.ndim == 1 and Wv.shape[1] == xv.shape[0],
           "affine", Wv.shape, xv.shape)
    out = Wv @ xv
    if b is not None:
        _check(b.value.shape == out.shape, "affine", Wv.shape, xv.shape, b.value.shape)
        out = out + b.value

    def backward(g):
        gW = np.outer(g, xv)
        gx = Wv.T @ g
        return (gW, gx, g) if b is not None else (gW, gx)

    parents = (W, x, b) if b is not None else (W, x)
    return Expr(out, parents, backward, "affine")


def tanh(x: Expr) -> Expr:
    y = np.tanh(x.value)
    return Expr(y, (x,), lambda g: (g * (1.0 - y * y),), "tanh")


def sigmoid(x: Expr) -> Expr:
    y = 1.0 / (1.0 + np.exp(-x.value))
    return Expr(y, (x,), lambda g: (g * y * (1.0 - y),), "sigmoid")


def concat(xs: Sequence[Expr]) -> Expr:
    for x in xs:
        _check(x.value.ndim == 1, "concat", *(y.value.shape for y in xs))
    sizes = [x.value.shape[0] for x in xs]
    bounds = np.cumsum([0] + sizes)

    def backward(g):
        return tuple(g[bounds[k]:bounds[k + 1]] for k in range(len(sizes)))

    return Expr(np.concatenate([x.value for x in xs]), xs, backward, "concat")


def pick(x: Expr, index: int) -> Expr:
    """Element ``index`` of a vector, as a 0-d scalar expression."""
    v = x.value
    _check(v.ndim == 1 and 0 <= index < v.shape[0], "pick", v.shape, (index,))

    def backward(g):
        out = np.zeros_like(v)
        out[index] = g
        return (out,)

    return Expr(v[index].copy(), (x,), backward, "pick")


def slice_(x: Expr, start: int, stop: int) -> Expr:
    v = x.value
    _check(v.ndim == 1 and 0 <= start <= stop <= v.shape[0], "slice", v.shape, (start, stop))

    def backward(g):
        out = np.zeros_like(v)
        out[start:stop] = g
        return (out,)

    return Expr(v[start:stop], (x,), backward, "slice")


def add(a: Expr, b: Expr) -> Expr:
    _check(a.value.shape == b.value.shape, "add", a.value.shape, b.value.shape)
    return Expr(a.value + b.value, (a, b), lambda g: (g, g), "add")


def sub(a: Expr, b: Expr) -> Expr:
    _check(a.value.shape == b.value.shape, "sub", a.value.shape, b.value.shape)
    return Expr(a.value - b.value, (a, b), lambda g: (g, -g), "sub")


def mul(a: Expr, b: Expr) -> Expr:
    _check(a.value.shape == b.value.shape, "mul", a.value.shape, b.value.shape)
    av, bv = a.value, b.value
    return Expr(av * bv, (a, b), lambda g: (g * bv, g * av), "mul")


def neg(a: Expr) -> Expr:
    return Expr(-a.value, (a,), lambda g: (-g,), "neg")


def scale(a: Expr, c: float) -> Expr:
    return Expr(a.value * c, (a,), lambda g: (g * c,), "scale")


def add_const(a: Expr, c: float) -> Expr:
    return Expr(a.value + c, (a,), lambda g: (g,), "add_const")


def sum_(xs: Sequence[Expr]) -> Expr:
    xs = list(xs)
    if not xs:
        raise ContractError("sum of an empty list")
    shape = xs[0].value.shape
    for x in xs:
        _check(x.value.shape == shape, "sum", shape, x.value.shape)
    total = np.sum([x.value for x in xs], axis=0)
    return Expr(np.asarray(total, dtype=np.float64), xs, lambda g: (g,) * len(xs), "sum")


def max_(xs: Sequence[Expr]) -> Expr:
    """Maximum of scalar expressions; the gradient goes to the first argmax."""
    xs = list(xs)
    if not xs:
        raise ContractError("max of an empty list")
    for x in xs:
        _check(x.value.ndim == 0, "max", *(y.value.shape for y in xs))
    vals = [float(x.value) for x in xs]
    best = int(np.argmax(vals))

    def backward(g):
        return tuple(g if k == best else None for k in range(len(xs)))

    return Expr(np.asarray(vals[best]), xs, backward, "max")


def lookup(table: Expr, index: int) -> Expr:
    """Row ``index`` of an embedding table."""
    t = table.value
    _check(t.ndim == 2 and 0 <= index < t.shape[0], "lookup", t.shape, (index,))
    return Expr(t[index].copy(), (table,), lambda g: (_RowGrad(index, g),), "lookup")


def lstm_cell(W: Expr, b: Expr, x: Expr, hc: Expr) -> Expr:
    """One LSTM step.  ``hc`` holds the previous hidden and cell vectors
    concatenated; the result has the same layout.

    Gate rows of ``W``/``b`` are ordered input, forget, output, candidate.
    """
    Wv, xv, hcv = W.value, x.value, hc.value
    H = hcv.shape[0] // 2
    n = xv.shape[0]
    _check(Wv.shape == (4 * H, n + H) and b.value.shape == (4 * H,),
           "lstm_cell", Wv.shape, b.value.shape, xv.shape, hcv.shape)
    h_prev, c_prev = hcv[:H], hcv[H:]
    xh = np.concatenate([xv, h_prev])
    z = Wv @ xh + b.value
    sig = 1.0 / (1.0 + np.exp(-z[:3 * H]))
    i, f, o = sig[:H], sig[H:2 * H], sig[2 * H:]
    cand = np.tanh(z[3 * H:])
    c = f * c_prev + i * cand
    tc = np.tanh(c)
    h = o * tc

    def backward(g):
        gh, gc = g[:H], g[H:]
        dc = gc + gh * o * (1.0 - tc * tc)
        dz = np.concatenate([
            dc * cand * i * (1.0 - i),
            dc * c_prev * f * (1.0 - f),
            gh * tc * o * (1.0 - o),
            dc * i * (1.0 - cand * cand),
        ])
        dxh = Wv.T @ dz
        return (np.outer(dz, xh), dz, dxh[:n], np.concatenate([dxh[n:], dc * f]))

    return Expr(np.concatenate([h, c]), (W, b, x, hc), backward, "lstm_cell")


def _topological(root: Expr) -> list[Expr]:
    seen = {id(root): root}
    stack = [root]
    while stack:
        node = stack.pop()
        for p in node.parents:
            if id(p) not in seen:
                seen[id(p)] = p
                stack.append(p)
    return sorted(seen.values(), key=lambda e: e.nid, reverse=True)


def backward(loss: Expr, params: Iterable[Parameter] | None = None) -> dict[Parameter, np.ndarray]:
    """Gradients of a scalar ``loss`` with respect to trainable parameters.

    With ``params`` given, every listed parameter appears in the result and
    those the loss does not reach get an all-zero gradient.
    """
    if loss.value.ndim != 0:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.value.shape}")
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.value)}
    owned: set[int] = set()
    result: dict[Parameter, np.ndarray] = {}
    for node in _topological(loss):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if isinstance(node, Parameter):
            if node.trainable:
                result[node] = g
            continue
        if node.backward_fn is None:
            continue
        for parent, pg in zip(node.parents, node.backward_fn(g)):
            if pg is None:
                continue
            key = id(parent)
            acc = grads.get(key)
            if isinstance(pg, _RowGrad):
                if acc is None:
                    acc = np.zeros_like(parent.value)
                elif key not in owned:
                    acc = acc.copy()
                owned.add(key)
                acc[pg.index] += pg.value
                grads[key] = acc
            elif acc is None:
                grads[key] = pg
            elif key in owned:
                acc += pg
            else:
                grads[key] = acc + pg
                owned.add(key)
    if params is not None:
        for p in params:
            if p.trainable and p not in result:
                result[p] = np.zeros_like(p.value)
    return result


def numeric_gradient(f: Callable[[], float], param: Parameter, step: float = 1e-5,
                     indices: Iterable[tuple] | None = None) -> np.ndarray:
    """Central finite differences of ``f`` with respect to ``param``.

    ``f`` must rebuild its graph on every call.  Only ``indices`` are
    perturbed when given; other entries of the result stay zero.
    """
    out = np.zeros_like(param.value)
    it = indices if indices is not None else np.ndindex(*param.value.shape)
    for idx in it:
        old = param.value[idx]
        param.value[idx] = old + step
        up = f()
        param.value[idx] = old - step
        down = f()
        param.value[idx] = old
        out[idx] = (up - down) / (2 * step)
    return out
