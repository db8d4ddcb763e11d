import hashlib

import numpy as np
import pytest

from htparse import engine
from htparse.config import ModelConfig
from htparse.corpus import Arc, is_projective, validate_tree
from htparse.encoder import LEFT, RIGHT
from htparse.nn import ParamStore, constant
from htparse.training import OracleScorer

from support import random_params, random_words, tiny_model
from treegen import projective_trees


class TestWindow:
    def test_two_items_four_pads(self):
        w = engine.window(["a", "b"], 0, 2)
        assert w == [None, None, "a", "b", None, None]

    def test_interior(self):
        pend = list("abcdefg")
        assert engine.window(pend, 3, 2) == list("bcdefg")

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            engine.window(["a", "b"], 1, 2)

    def test_default_width(self):
        store = ParamStore(0)
        scorer = engine.Scorer(ModelConfig(), 3, store)
        assert store["mlp.u.W1"].value.shape == (100, 2400)
        assert store["mlp.l.W2"].value.shape == (6, 100)
        pend = [type("N", (), {"c": constant(np.ones(400))})() for _ in range(2)]
        assert engine.window_features(scorer, pend, 0).value.shape == (2400,)

    def test_zero_padding_contributes_zeros(self):
        m = tiny_model(seed=1)
        m.store["pad.left"].value[...] = 0
        m.store["pad.right"].value[...] = 0
        pend = m.leaves(random_words(2, np.random.default_rng(0)))
        x = engine.window_features(m.scorer, pend, 0).value.reshape(6, -1)
        assert not x[[0, 1, 4, 5]].any()
        assert x[2].any() and x[3].any()

    def test_left_and_right_pads_used_on_their_sides(self):
        m = tiny_model(seed=1)
        pend = m.leaves(random_words(2, np.random.default_rng(0)))
        x = engine.window_features(m.scorer, pend, 0).value.reshape(6, -1)
        np.testing.assert_array_equal(x[0], m.store["pad.left"].value)
        np.testing.assert_array_equal(x[5], m.store["pad.right"].value)


class TestScores:
    def test_counts(self):
        m = tiny_model(seed=2)
        pend = m.leaves(random_words(4, np.random.default_rng(0)))
        u, l = engine.score_actions(m, pend, 1)
        assert u.value.shape == (2,) and l.value.shape == (2 * m.num_labels,)
        assert engine.all_action_scores(u, l, m.num_labels).shape == (2, m.num_labels)

    def test_index_mapping(self):
        assert engine.action_index(LEFT, 0, 5) == 0
        assert engine.action_index(RIGHT, 0, 5) == 5
        assert engine.action_index(RIGHT, 4, 5) == 9

    def test_table_is_sum(self):
        u, l = np.array([0.5, -1.0]), np.array([1.0, 2.0, 3.0, 4.0])
        np.testing.assert_array_equal(engine.all_action_scores(u, l, 2), [[1.5, 2.5], [2.0, 3.0]])

    def test_constant_shift_keeps_label_argmax(self):
        rng = np.random.default_rng(3)
        u, l = rng.normal(size=2), rng.normal(size=6)
        a = engine.all_action_scores(u, l, 3)
        b = engine.all_action_scores(u + 7.0, l, 3)
        np.testing.assert_allclose(b - a, 7.0)
        assert (a.argmax(axis=1) == b.argmax(axis=1)).all()

    def test_best_action_factorization(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            u, l = rng.normal(size=2), rng.normal(size=8)
            table = engine.all_action_scores(u, l, 4)
            s, d, lab = engine.best_action(u, l, 4)
            assert s == table.max() and table[d, lab] == s

    def test_tie_break(self):
        assert engine.best_action(np.zeros(2), np.zeros(6), 3) == (0.0, LEFT, 0)
        assert engine.best_action(np.zeros(2), np.array([0, 1.0, 1, 0, 0, 1]), 3) == (1.0, LEFT, 1)

    def test_zero_model_chains_left(self):
        m = tiny_model()
        for p in m.store:
            p.value[...] = 0
        triples = engine.parse(m, random_words(5, np.random.default_rng(0)))
        assert triples[:-1] == [(m_ + 1, m_, 0) for m_ in range(1, 5)]
        assert triples[-1] == (0, 5, m.root_label)


class TestActionQueue:
    def test_best_and_discard(self):
        q = engine.ActionQueue()
        q.push(1, 0.5, LEFT, 0)
        q.push(2, 0.9, RIGHT, 1)
        assert q.best() == (2, 0.9, RIGHT, 1)
        q.discard(2)
        assert q.best() == (1, 0.5, LEFT, 0)

    def test_repush_supersedes(self):
        q = engine.ActionQueue()
        q.push(1, 5.0, LEFT, 0)
        q.push(1, -1.0, RIGHT, 2)
        q.push(3, 0.0, LEFT, 0)
        assert q.best() == (3, 0.0, LEFT, 0)

    def test_tie_goes_to_lower_position(self):
        q = engine.ActionQueue()
        q.push(7, 1.0, LEFT, 0)
        q.push(4, 1.0, RIGHT, 0)
        assert q.best()[0] == 4

    def test_empty(self):
        with pytest.raises(LookupError):
            engine.ActionQueue().best()


class _Node:
    __slots__ = ("id", "sig")

    def __init__(self, id, sig):
        self.id = id
        self.sig = sig


class HashScorer:
    """Scores are a pseudo-random function of the window contents (ids and
    attachment histories), quantized to a few values so ties are common."""

    window = 2

    def __init__(self, n, num_labels, seed, levels):
        self.n, self.num_labels, self.seed, self.levels = n, num_labels, seed, levels
        self.root_label = 0

    def leaves(self, sentence):
        return [_Node(i, (i,)) for i in range(1, self.n + 1)]

    def score(self, window):
        key = repr((self.seed, [None if x is None else x.sig for x in window])).encode()
        rng = np.random.default_rng(int.from_bytes(hashlib.sha256(key).digest()[:8], "little"))
        u = rng.integers(self.levels, size=2).astype(float)
        l = rng.integers(self.levels, size=2 * self.num_labels).astype(float)
        return u, l

    def combine(self, head, mod, direction, label):
        return _Node(head.id, (head.sig, direction, label, mod.sig))


def test_lazy_matches_rescan_on_random_traces():
    rng = np.random.default_rng(0)
    for trial in range(1000):
        n = int(rng.integers(1, 16))
        scorer = HashScorer(n, int(rng.integers(1, 4)), trial, levels=int(rng.choice([2, 4, 1000])))
        assert engine.parse(scorer, None, "lazy") == engine.parse(scorer, None, "rescan")


def test_unknown_selector():
    with pytest.raises(ValueError):
        engine.parse(tiny_model(), random_words(2, np.random.default_rng(0)), "magic")


class TestApply:
    def test_left_action(self):
        m = tiny_model(seed=3)
        pend = m.leaves(random_words(3, np.random.default_rng(0)))
        head_before = pend[1]
        arc = engine.apply(m, pend, engine.Action(0, LEFT, 1))
        assert arc == (2, 1, 1)
        assert [p.id for p in pend] == [2, 3]
        assert pend[0].left.steps == 2 and pend[0].right is head_before.right

    def test_right_action(self):
        m = tiny_model(seed=3)
        pend = m.leaves(random_words(3, np.random.default_rng(0)))
        before = pend[1]
        arc = engine.apply(m, pend, engine.Action(1, RIGHT, 2))
        assert arc == (2, 3, 2)
        assert [p.id for p in pend] == [1, 2]
        assert pend[1].left is before.left
        assert pend[1].right.steps == 2

    def test_runs_to_single_item(self):
        m = tiny_model(seed=3)
        pend = m.leaves(random_words(6, np.random.default_rng(0)))
        for _ in range(5):
            engine.apply(m, pend, engine.Action(0, RIGHT, 0))
        assert len(pend) == 1 and pend[0].id == 1


def test_single_word_parse():
    m = tiny_model(seed=0)
    assert engine.parse(m, random_words(1, np.random.default_rng(0))) == [(0, 1, m.root_label)]


def test_soundness_random_models():
    rng = np.random.default_rng(11)
    for trial in range(200):
        m = tiny_model(seed=trial, use_bilstm=bool(trial % 2))
        random_params(m, rng)
        n = int(rng.integers(1, 11))
        triples = engine.parse(m, random_words(n, rng))
        arcs = [Arc(h, mod, str(l)) for h, mod, l in triples]
        validate_tree(n, arcs)
        heads = [-1] * (n + 1)
        for a in arcs:
            heads[a.modifier] = a.head
        assert is_projective(heads)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_completeness_with_gold_scorer(n):
    rng = np.random.default_rng(n)
    L, root = 3, 0
    for heads in projective_trees(n):
        labels = [0] + [root if heads[m] == 0 else int(rng.integers(1, L)) for m in range(1, n + 1)]
        scorer = OracleScorer(heads, labels, L, root)
        got = sorted(engine.parse(scorer, None))
        assert got == sorted((heads[m], m, labels[m]) for m in range(1, n + 1))


def test_window_locality():
    m = tiny_model(seed=8)
    rng = np.random.default_rng(8)
    random_params(m, rng)
    pend = m.leaves(random_words(9, rng))
    i = 4
    u, l = engine.score_actions(m, pend, i)
    for far in (0, 1, 8):
        changed = list(pend)
        changed[far] = m.encoder.attach(pend[far], constant(rng.normal(size=4)), RIGHT)
        u2, l2 = engine.score_actions(m, changed, i)
        assert u2.value.tobytes() == u.value.tobytes() and l2.value.tobytes() == l.value.tobytes()
    changed = list(pend)
    changed[2] = m.encoder.attach(pend[2], constant(rng.normal(size=4)), RIGHT)
    assert not np.array_equal(engine.score_actions(m, changed, i)[0].value, u.value)


def test_model_parse_returns_sentence():
    m = tiny_model(seed=1)
    s = random_words(4, np.random.default_rng(1))
    out = m.parse(s)
    assert [t.form for t in out.tokens] == [t.form for t in s.tokens]
    assert len(out.arcs) == 4
    assert all(a.label in m.vocab.labels for a in out.arcs)
    root = [a for a in out.arcs if a.head == 0]
    assert len(root) == 1 and root[0].label == m.vocab.root_label


def test_parse_is_deterministic():
    m = tiny_model(seed=2)
    random_params(m, np.random.default_rng(2))
    s = random_words(8, np.random.default_rng(3))
    assert engine.parse(m, s) == engine.parse(m, s)
