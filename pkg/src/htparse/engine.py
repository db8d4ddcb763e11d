"""Greedy easy-first parsing over a pending list of subtrees.

Pair indices are 0-based here: pair ``i`` is ``(pend[i], pend[i+1])``.
Direction ``LEFT`` makes ``pend[i]`` a left modifier of ``pend[i+1]``;
``RIGHT`` makes ``pend[i+1]`` a right modifier of ``pend[i]``.

The engine is written against a small protocol so the same loop drives the
neural model and test scorers:

* ``leaves(sentence)`` -> list of nodes (each with an ``id``)
* ``score(window)`` -> ``(u, l)`` with ``len(u) == 2``, ``len(l) == 2 * L``
* ``combine(head, mod, direction, label)`` -> updated head node
* ``num_labels`` and ``root_label`` attributes
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .config import ModelConfig
from .encoder import LEFT, RIGHT
from .nn import MLP, ParamStore
from .nn import autodiff as ad
from .nn.autodiff import Expr


class Scorer:
    """Score_U + Score_L over the concatenated c vectors of a window."""

    def __init__(self, config: ModelConfig, num_labels: int, store: ParamStore):
        self.k = config.window
        self.num_labels = num_labels
        dim = config.node_dim
        width = (2 * self.k + 2) * dim
        self.pad_left = store.add_vector("pad.left", dim)
        self.pad_right = store.add_vector("pad.right", dim)
        self.mlp_u = MLP(store, "mlp.u", width, config.hidden_u, 2)
        self.mlp_l = MLP(store, "mlp.l", width, config.hidden_l, 2 * num_labels)

    def features(self, window: Sequence[Any]) -> Expr:
        parts = []
        for j, node in enumerate(window):
            if node is None:
                parts.append(self.pad_left if j <= self.k else self.pad_right)
            else:
                parts.append(node.c)
        return ad.concat(parts)

    def __call__(self, window: Sequence[Any]) -> tuple[Expr, Expr]:
        x = self.features(window)
        return self.mlp_u(x), self.mlp_l(x)


def window(pend: Sequence[Any], i: int, k: int = 2) -> list[Any]:
    """``pend[i-k .. i+1+k]`` with ``None`` outside the list."""
    if not 0 <= i < len(pend) - 1:
        raise IndexError(f"pair index {i} out of range for {len(pend)} pending items")
    return [pend[j] if 0 <= j < len(pend) else None for j in range(i - k, i + k + 2)]


def window_features(scorer: Scorer, pend: Sequence[Any], i: int) -> Expr:
    return scorer.features(window(pend, i, scorer.k))


def score_actions(model, pend: Sequence[Any], i: int):
    return model.score(window(pend, i, getattr(model, "window", 2)))


def _values(x) -> np.ndarray:
    return x.value if isinstance(x, Expr) else np.asarray(x, dtype=np.float64)


def action_index(direction: int, label: int, num_labels: int) -> int:
    return direction * num_labels + label


def best_action(u, l, num_labels: int) -> tuple[float, int, int]:
    """Highest-scoring ``(score, direction, label)`` for one pair.

    Ties go to LEFT, then to the lower label id.
    """
    u, l = _values(u), _values(l)
    best = None
    for d in (LEFT, RIGHT):
        block = l[d * num_labels:(d + 1) * num_labels]
        lab = int(np.argmax(block))
        s = float(u[d] + block[lab])
        if best is None or s > best[0]:
            best = (s, d, lab)
    return best


def all_action_scores(u, l, num_labels: int) -> np.ndarray:
    """Score[d, label] = u[d] + l[d * L + label]."""
    u, l = _values(u), _values(l)
    return u[:, None] + l.reshape(2, num_labels)


@dataclass(frozen=True)
class Action:
    i: int
    direction: int
    label: int
    score: float = 0.0


class ActionQueue:
    """Max-priority queue of per-pair best actions with lazy invalidation.

    Entries are keyed by the id of the pair's left node; pending order is a
    subsequence of word order, so comparing ids compares positions.
    """

    def __init__(self):
        self._heap: list[tuple] = []
        self._version: dict[int, int] = {}

    def push(self, left_id: int, score: float, direction: int, label: int) -> None:
        v = self._version.get(left_id, 0) + 1
        self._version[left_id] = v
        heapq.heappush(self._heap, (-score, left_id, direction, label, v))

    def discard(self, left_id: int) -> None:
        self._version[left_id] = self._version.get(left_id, 0) + 1

    def best(self) -> tuple[int, float, int, int]:
        heap = self._heap
        while heap:
            neg, left, d, lab, v = heap[0]
            if self._version.get(left) == v:
                return left, -neg, d, lab
            heapq.heappop(heap)
        raise LookupError("no actions available")

    def __len__(self):
        return len(self._heap)


def apply(model, pend: list, action: Action) -> tuple[int, int, int]:
    """Perform ``action`` on the list in place; returns the arc (head, mod, label)."""
    i, d = action.i, action.direction
    if d == LEFT:
        mod, head = pend[i], pend[i + 1]
        pend[i + 1] = model.combine(head, mod, LEFT, action.label)
        del pend[i]
    elif d == RIGHT:
        head, mod = pend[i], pend[i + 1]
        pend[i] = model.combine(head, mod, RIGHT, action.label)
        del pend[i + 1]
    else:
        raise ValueError(f"bad direction {d!r}")
    return head.id, mod.id, action.label


def parse(model, sentence, selector: str = "lazy") -> list[tuple[int, int, int]]:
    """Parse ``sentence``; returns ``(head, modifier, label)`` triples, the
    last one attaching the surviving subtree to ROOT (head 0)."""
    nodes = model.leaves(sentence)
    if not nodes:
        return []
    if selector == "lazy":
        arcs = _parse_lazy(model, nodes)
    elif selector == "rescan":
        arcs = _parse_rescan(model, nodes)
    else:
        raise ValueError(f"unknown selector {selector!r}")
    return arcs


def _parse_rescan(model, pend: list) -> list:
    """Reference loop: rescore every pair at every step."""
    pend = list(pend)
    L = model.num_labels
    k = getattr(model, "window", 2)
    arcs = []
    while len(pend) > 1:
        best = None
        for i in range(len(pend) - 1):
            s, d, lab = best_action(*model.score(window(pend, i, k)), L)
            if best is None or s > best.score:
                best = Action(i, d, lab, s)
        arcs.append(apply(model, pend, best))
    arcs.append((0, pend[0].id, model.root_label))
    return arcs


def _parse_lazy(model, nodes: list) -> list:
    L = model.num_labels
    k = getattr(model, "window", 2)
    node = {x.id: x for x in nodes}
    ids = [x.id for x in nodes]
    prev = {a: b for a, b in zip(ids[1:], ids[:-1])}
    nxt = {a: b for a, b in zip(ids[:-1], ids[1:])}
    queue = ActionQueue()

    def win(left):
        back = []
        cur = left
        for _ in range(k):
            cur = prev.get(cur) if cur is not None else None
            back.append(cur)
        fwd = [left]
        cur = left
        for _ in range(k + 1):
            cur = nxt.get(cur) if cur is not None else None
            fwd.append(cur)
        return [node[x] if x is not None else None for x in back[::-1] + fwd]

    def rescore(left):
        if nxt.get(left) is None:
            queue.discard(left)
            return
        s, d, lab = best_action(*model.score(win(left)), L)
        queue.push(left, s, d, lab)

    for left in ids[:-1]:
        rescore(left)

    arcs = []
    remaining = len(ids)
    while remaining > 1:
        left, _, d, lab = queue.best()
        right = nxt[left]
        if d == LEFT:
            head, mod = right, left
        else:
            head, mod = left, right
        node[head] = model.combine(node[head], node[mod], d, lab)
        arcs.append((head, mod, lab))
        # unlink mod
        p, q = prev.pop(mod, None), nxt.pop(mod, None)
        if p is not None:
            nxt[p] = q
        if q is not None:
            prev[q] = p
        if q is None and p is not None:
            nxt.pop(p, None)
        queue.discard(mod)
        del node[mod]
        remaining -= 1
        # pairs whose window touched the change: k+2 back, k+1 forward of head
        start = head
        for _ in range(k + 2):
            if prev.get(start) is None:
                break
            start = prev[start]
        cur = start
        for _ in range(2 * k + 4):
            if cur is None:
                break
            rescore(cur)
            cur = nxt.get(cur)
    survivor = next(iter(node))
    arcs.append((0, survivor, model.root_label))
    return arcs
