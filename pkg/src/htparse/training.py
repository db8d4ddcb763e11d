"""Dynamic-oracle training with error exploration.

The oracle keeps, for every word, the number of its gold modifiers that are
still pending.  An attachment adds no error beyond those already forced by
earlier mistakes iff the modifier is complete (counter zero) and either its
gold head has already left the pending list, or the head and label are the
gold ones.  With ``dynamic=False`` only exact gold arcs with a complete
modifier count as correct, which is the static oracle of gold-only training.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import engine
from .config import ModelConfig, TrainConfig
from .corpus import DropoutPolicy, Sentence, build_vocab, is_projective
from .encoder import LEFT, RIGHT
from .nn import Adam
from .nn import autodiff as ad
from .nn.autodiff import Expr

log = logging.getLogger(__name__)


class OracleState:
    def __init__(self, heads: Sequence[int], labels: Sequence[int], dynamic: bool = True):
        # heads/labels indexed by word, position 0 unused
        self.heads = list(heads)
        self.labels = list(labels)
        self.dynamic = dynamic
        n = len(self.heads) - 1
        self.unassigned = [0] * (n + 1)
        for m in range(1, n + 1):
            if self.heads[m] > 0:
                self.unassigned[self.heads[m]] += 1
        self.pending = set(range(1, n + 1))

    @classmethod
    def for_sentence(cls, sentence: Sentence, label_id: Callable[[str], int], dynamic: bool = True):
        labels = [0] + [label_id(l) for l in sentence.labels[1:]]
        return cls(sentence.heads, labels, dynamic)

    def complete(self, word: int) -> bool:
        return self.unassigned[word] == 0

    def gold_labels(self, head: int, mod: int, num_labels: int) -> np.ndarray:
        """Boolean mask over labels: which (head, mod, label) add no error."""
        mask = np.zeros(num_labels, dtype=bool)
        if self.unassigned[mod] != 0:
            return mask
        g = self.heads[mod]
        if g == head:
            mask[self.labels[mod]] = True
        elif self.dynamic and g != 0 and g not in self.pending:
            mask[:] = True
        return mask

    def pair_mask(self, left: int, right: int, num_labels: int) -> np.ndarray:
        """(2, L) mask for pair (left, right): row LEFT attaches left under right."""
        return np.stack([self.gold_labels(right, left, num_labels),
                         self.gold_labels(left, right, num_labels)])

    def attach(self, head: int, mod: int) -> None:
        # the gold parent's counter drops even when mod went to a wrong head
        g = self.heads[mod]
        if g > 0:
            self.unassigned[g] -= 1
        self.pending.discard(mod)


def gold_actions(pend_ids: Sequence[int], oracle: OracleState, num_labels: int):
    """Partition all (i, direction, label) actions into correct and wrong."""
    G, W = [], []
    for i in range(len(pend_ids) - 1):
        mask = oracle.pair_mask(pend_ids[i], pend_ids[i + 1], num_labels)
        for d in (LEFT, RIGHT):
            for lab in range(num_labels):
                (G if mask[d, lab] else W).append((i, d, lab))
    return G, W


def oracle_cost(pend_ids: Sequence[int], heads: Sequence[int], labels: Sequence[int],
                root_label: int, limit: int = 12) -> int:
    """Fewest labeled-arc errors any completion of ``pend_ids`` can add,
    including the final ROOT attachment.  Exhaustive search; small inputs only."""
    if len(pend_ids) > limit:
        raise ValueError(f"state space too large: {len(pend_ids)} pending items (limit {limit})")
    heads, labels = tuple(heads), tuple(labels)

    @lru_cache(maxsize=None)
    def cost(state):
        if len(state) == 1:
            m = state[0]
            return int(not (heads[m] == 0 and labels[m] == root_label))
        best = len(state)
        for i in range(len(state) - 1):
            a, b = state[i], state[i + 1]
            best = min(best,
                       int(heads[a] != b) + cost(state[:i] + state[i + 1:]),
                       int(heads[b] != a) + cost(state[:i + 1] + state[i + 2:]))
        return best

    return cost(tuple(pend_ids))


def action_cost(pend_ids: Sequence[int], action: tuple[int, int, int], heads, labels,
                root_label: int) -> int:
    """Errors of ``action`` itself plus the best completion afterwards."""
    i, d, lab = action
    pend = list(pend_ids)
    if d == LEFT:
        mod, head = pend[i], pend[i + 1]
    else:
        head, mod = pend[i], pend[i + 1]
    pend.remove(mod)
    err = int(not (heads[mod] == head and labels[mod] == lab))
    return err + oracle_cost(pend, heads, labels, root_label)


def step_loss(score_gold, score_wrong, margin: float = 1.0):
    """Hinge max(0, margin - gold + wrong); ``None`` when the margin holds."""
    if isinstance(score_gold, Expr):
        loss = ad.add_const(ad.sub(score_wrong, score_gold), margin)
        return loss if float(loss.value) > 0 else None
    value = margin - float(score_gold) + float(score_wrong)
    return value if value > 0 else None


@dataclass
class ExplorationPolicy:
    p_aug: float = 0.1
    margin: float = 1.0
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))
    enabled: bool = True
    follow_gold_with_p_aug: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p_aug <= 1.0:
            raise ValueError(f"p_aug must lie in [0, 1], got {self.p_aug}")


def choose_followed(score_gold: float, score_wrong: float, policy: ExplorationPolicy) -> str:
    """``"gold"`` or ``"wrong"``: which best action training should apply.

    Below zero difference the wrong action is followed; inside the margin it
    is followed with probability ``p_aug`` (or ``1 - p_aug`` with the flipped
    branch); beyond the margin the gold action is followed.
    """
    if not policy.enabled:
        return "gold"
    diff = score_gold - score_wrong
    if diff < 0:
        return "wrong"
    if diff < policy.margin:
        hit = policy.rng.random() < policy.p_aug
        if policy.follow_gold_with_p_aug:
            return "gold" if hit else "wrong"
        return "wrong" if hit else "gold"
    return "gold"


@dataclass
class SentenceStats:
    steps: int = 0
    errors: int = 0
    loss: float = 0.0
    followed_wrong: int = 0


def train_sentence(model, sentence: Sentence, losses: list, policy: ExplorationPolicy,
                   dropout: DropoutPolicy | None = None, dynamic: bool = True,
                   trace: list | None = None) -> SentenceStats:
    """Run the training parse over one gold sentence, appending positive
    step losses to ``losses``.  ``trace``, when given, receives
    ``(head, mod, label, followed)`` per step."""
    stats = SentenceStats()
    L = model.num_labels
    k = model.window
    oracle = OracleState.for_sentence(sentence, model.vocab.label, dynamic)
    pend = list(model.leaves(sentence, dropout))
    cache: dict[int, tuple] = {}
    while len(pend) > 1:
        P = len(pend) - 1
        scores = np.empty((P, 2, L))
        masks = np.empty((P, 2, L), dtype=bool)
        for i in range(P):
            key = pend[i].id
            entry = cache.get(key)
            if entry is None:
                u, l = model.score(engine.window(pend, i, k))
                entry = (u, l, engine.all_action_scores(u, l, L))
                cache[key] = entry
            scores[i] = entry[2]
            masks[i] = oracle.pair_mask(pend[i].id, pend[i + 1].id, L)
        flat = scores.reshape(-1)
        gmask = masks.reshape(-1)
        has_g, has_w = gmask.any(), (~gmask).any()
        g_idx = int(np.argmax(np.where(gmask, flat, -np.inf))) if has_g else None
        w_idx = int(np.argmax(np.where(gmask, -np.inf, flat))) if has_w else None
        if has_g and has_w:
            sg, sw = float(flat[g_idx]), float(flat[w_idx])
            loss = step_loss(_score_expr(cache, pend, g_idx, L), _score_expr(cache, pend, w_idx, L),
                             policy.margin)
            if loss is not None:
                losses.append(loss)
                stats.errors += 1
                stats.loss += float(loss.value)
            choice = choose_followed(sg, sw, policy)
            idx = g_idx if choice == "gold" else w_idx
        else:
            # no trade-off to learn: follow whichever set is non-empty
            idx = g_idx if has_g else w_idx
        wrong = not gmask[idx]
        stats.followed_wrong += int(wrong)
        i, rem = divmod(idx, 2 * L)
        d, lab = divmod(rem, L)
        head, mod, _ = engine.apply(model, pend, engine.Action(i, d, lab))
        oracle.attach(head, mod)
        if trace is not None:
            trace.append((head, mod, lab, "wrong" if wrong else "gold"))
        cache.pop(mod, None)
        for j in range(max(0, i - k - 2), min(len(pend), i + k + 2)):
            cache.pop(pend[j].id, None)
        stats.steps += 1
    return stats


def _score_expr(cache, pend, flat_idx: int, L: int) -> Expr:
    i, rem = divmod(flat_idx, 2 * L)
    d, lab = divmod(rem, L)
    u, l, _ = cache[pend[i].id]
    return ad.add(ad.pick(u, d), ad.pick(l, engine.action_index(d, lab, L)))


@dataclass
class EpochLog:
    epoch: int
    mean_loss: float
    errors: int
    updates: int
    seconds: float
    dev_uas: float | None = None
    dev_las: float | None = None
    train_sentences: int = 0

    def line(self) -> str:
        parts = [f"epoch={self.epoch}", f"mean_loss={self.mean_loss:.6f}", f"errors={self.errors}",
                 f"updates={self.updates}"]
        if self.dev_uas is not None:
            parts += [f"dev_uas={self.dev_uas:.4f}", f"dev_las={self.dev_las:.4f}"]
        parts.append(f"seconds={self.seconds:.2f}")
        return " ".join(parts)


class Trainer:
    """Mini-batched optimisation: losses from consecutive sentences are
    summed and applied once at least ``batch_errors`` have accumulated."""

    def __init__(self, model, config: TrainConfig):
        self.model = model
        self.config = config
        shuffle, drop, explore = np.random.SeedSequence(config.seed).spawn(3)
        self.shuffle_rng = np.random.default_rng(shuffle)
        self.dropout = (DropoutPolicy(config.word_dropout, np.random.default_rng(drop))
                        if config.word_dropout > 0 else None)
        self.policy = ExplorationPolicy(config.p_aug, config.margin, np.random.default_rng(explore),
                                        enabled=config.explore,
                                        follow_gold_with_p_aug=config.follow_gold_with_p_aug)
        self.optimizer = Adam(model.store, lr=config.learning_rate)
        self.losses: list[Expr] = []
        self.updates = 0

    def flush(self) -> bool:
        if not self.losses:
            return False
        total = ad.sum_(self.losses)
        grads = ad.backward(total, self.model.store)
        self.optimizer.step(grads)
        self.losses = []
        self.updates += 1
        return True

    def sentence(self, sent: Sentence) -> SentenceStats:
        stats = train_sentence(self.model, sent, self.losses, self.policy, self.dropout,
                               self.config.dynamic_oracle)
        if len(self.losses) >= self.config.batch_errors:
            self.flush()
        return stats

    def epoch(self, sentences: Sequence[Sentence]) -> tuple[int, float]:
        errors, total = 0, 0.0
        for idx in self.shuffle_rng.permutation(len(sentences)):
            stats = self.sentence(sentences[idx])
            errors += stats.errors
            total += stats.loss
        self.flush()
        return errors, total


def train(sentences: Sequence[Sentence], model_config: ModelConfig | None = None,
          train_config: TrainConfig | None = None, dev: Sequence[Sentence] | None = None,
          on_epoch: Callable[[EpochLog], None] | None = None, model=None):
    """Train a parser; returns ``(model, logs)``.

    Non-projective sentences are skipped.  With ``dev`` given the parameters
    of the epoch with the best dev UAS are kept.
    """
    from .evaluation import evaluate
    from .model import ParserModel

    model_config = model_config or ModelConfig()
    train_config = train_config or TrainConfig()
    usable = [s for s in sentences if s.arcs is not None and is_projective(s)]
    if not usable:
        raise ValueError("no projective training sentences")
    if model is None:
        unlabeled = None if model_config.labeled else "dep"
        model = ParserModel(model_config, build_vocab(usable, unlabeled=unlabeled), seed=train_config.seed)
    if not model_config.labeled:
        usable = [_relabel(s, model.vocab.labels[0]) for s in usable]
    trainer = Trainer(model, train_config)
    logs = []
    best = None
    for epoch in range(1, train_config.epochs + 1):
        start = time.perf_counter()
        before = trainer.updates
        errors, total = trainer.epoch(usable)
        entry = EpochLog(epoch, total / len(usable), errors, trainer.updates - before, 0.0,
                         train_sentences=len(usable))
        if dev:
            report = evaluate(dev, model.parse_all(dev))
            entry.dev_uas, entry.dev_las = report.uas, report.las
            if best is None or report.uas > best[0]:
                best = (report.uas, model.store.snapshot())
        entry.seconds = time.perf_counter() - start
        logs.append(entry)
        log.info(entry.line())
        if on_epoch:
            on_epoch(entry)
    if best is not None:
        model.store.restore(best[1])
    return model, logs


def _relabel(sent: Sentence, label: str) -> Sentence:
    from .corpus import Arc
    return Sentence(sent.tokens, [Arc(a.head, a.modifier, label) for a in sent.arcs])


class _Leaf:
    __slots__ = ("id",)

    def __init__(self, id):
        self.id = id


class OracleScorer:
    """Model-protocol scorer that knows the gold tree: +1 for actions the
    oracle accepts, -1 otherwise."""

    window = 2

    def __init__(self, heads: Sequence[int], labels: Sequence[int], num_labels: int, root_label: int):
        self.heads = list(heads)
        self.labels = list(labels)
        self.num_labels = num_labels
        self.root_label = root_label
        self.oracle = None

    def leaves(self, sentence):
        n = len(self.heads) - 1
        self.oracle = OracleState(self.heads, self.labels)
        return [_Leaf(i) for i in range(1, n + 1)]

    def score(self, window):
        left, right = window[self.window], window[self.window + 1]
        mask = self.oracle.pair_mask(left.id, right.id, self.num_labels)
        return np.zeros(2), np.where(mask, 1.0, -1.0).reshape(-1)

    def combine(self, head, mod, direction, label):
        self.oracle.attach(head.id, mod.id)
        return head
