import numpy as np
import pytest

from htparse.encoder import LEFT, RIGHT
from htparse.nn import autodiff as ad
from htparse.nn import backward, constant

from support import random_params, random_words, sentence, tiny_config, tiny_model
from treegen import projective_trees, random_tree


def _vectors(model, n, rng):
    d = model.config.word_vec_dim
    return [constant(rng.normal(size=d)) for _ in range(n)]


class TestEmbedToken:
    def test_zero_projection(self):
        m = tiny_model()
        m.store["proj.W"].value[...] = 0
        np.testing.assert_array_equal(m.encoder.embed_token(3, 1).value, np.zeros(4))

    def test_dimension(self):
        assert tiny_model().encoder.embed_token(2, 2).value.shape == (4,)

    def test_ids_distinguish(self):
        enc = tiny_model(seed=3).encoder
        assert not np.allclose(enc.embed_token(2, 2).value, enc.embed_token(3, 2).value)

    def test_without_pos(self):
        m = tiny_model(use_pos=False)
        assert m.store["proj.W"].value.shape == (4, 4)
        assert "emb.pos" not in m.store.names()

    def test_bad_id(self):
        with pytest.raises(Exception):
            tiny_model().encoder.embed_token(10_000, 0)


class TestContextualize:
    def test_single_word(self):
        m = tiny_model()
        [v] = m.encoder.contextualize([constant(np.ones(4))])
        f = m.encoder.fwd.initial().advance(constant(np.ones(4))).output().value
        b = m.encoder.bwd.initial().advance(constant(np.ones(4))).output().value
        np.testing.assert_array_equal(v.value, np.concatenate([f, b]))

    def test_default_width(self):
        from htparse.config import ModelConfig
        assert ModelConfig().word_vec_dim == 200

    def test_reversal_symmetry(self):
        m = tiny_model(seed=2)
        rng = np.random.default_rng(0)
        xs = [constant(rng.normal(size=4)) for _ in range(5)]
        orig = [v.value for v in m.encoder.contextualize(xs)]
        enc = m.encoder
        enc.fwd, enc.bwd = enc.bwd, enc.fwd
        swapped = [v.value for v in enc.contextualize(xs[::-1])]
        half = 2
        for j, v in enumerate(swapped):
            o = orig[len(xs) - 1 - j]
            np.testing.assert_allclose(v, np.concatenate([o[half:], o[:half]]), atol=1e-15)

    def test_off_is_identity(self):
        m = tiny_model(use_bilstm=False)
        xs = [constant(np.arange(4.0))]
        assert m.encoder.contextualize(xs)[0] is xs[0]


class TestLeafAndFinalize:
    def test_leaf_c_dimension(self):
        from htparse.config import ModelConfig
        assert ModelConfig().node_dim == 400

    def test_identical_inputs_identical_leaves(self):
        m = tiny_model(seed=1)
        v = constant(np.arange(4.0))
        a, b = m.encoder.leaf(1, v), m.encoder.leaf(2, v)
        assert a.c.value.tobytes() == b.c.value.tobytes()

    def test_left_and_right_differ(self):
        m = tiny_model(seed=1)
        leaf = m.encoder.leaf(1, constant(np.arange(4.0)))
        assert not np.allclose(leaf.left.output().value, leaf.right.output().value)

    def test_zero_parameters_zero_enc(self):
        m = tiny_model()
        for p in m.store:
            p.value[...] = 0
        leaf = m.encoder.leaf(1, constant(np.ones(4)))
        np.testing.assert_array_equal(m.encoder.finalize(leaf, 1).value, np.zeros(4))

    def test_enc_width_feeds_parent(self):
        m = tiny_model(seed=1)
        leaf = m.encoder.leaf(1, constant(np.ones(4)))
        enc = m.encoder.finalize(leaf, 1)
        assert enc.value.shape == (m.config.word_vec_dim,)
        m.encoder.attach(m.encoder.leaf(2, constant(np.ones(4))), enc, LEFT)

    def test_labels_distinguish(self):
        m = tiny_model(seed=1)
        leaf = m.encoder.leaf(1, constant(np.ones(4)))
        assert not np.allclose(m.encoder.finalize(leaf, 1).value, m.encoder.finalize(leaf, 2).value)

    def test_bad_label(self):
        m = tiny_model()
        leaf = m.encoder.leaf(1, constant(np.ones(4)))
        with pytest.raises(ad.DimensionError):
            m.encoder.finalize(leaf, 99)

    def test_unlabeled_omits_relation_block(self):
        m = tiny_model(labeled=False)
        assert "emb.rel" not in m.store.names()
        assert m.store["compose.W"].value.shape == (4, 6)


class TestAttach:
    def test_advance_counts(self):
        m = tiny_model(seed=4)
        enc = m.encoder
        rng = np.random.default_rng(0)
        node = enc.leaf(5, constant(rng.normal(size=4)))
        for k in range(3):
            node = enc.attach(node, constant(rng.normal(size=4)), LEFT)
        assert node.left.steps == 4 and node.right.steps == 1

    def test_order_sensitive(self):
        m = tiny_model(seed=4)
        enc = m.encoder
        a, b = constant(np.array([1.0, 0, 0, 0])), constant(np.array([0, 2.0, 0, -1]))
        head = enc.leaf(1, constant(np.ones(4)))
        ab = enc.attach(enc.attach(head, a, RIGHT), b, RIGHT).c.value
        ba = enc.attach(enc.attach(head, b, RIGHT), a, RIGHT).c.value
        assert not np.allclose(ab, ba)

    def test_right_leaves_left_unchanged(self):
        m = tiny_model(seed=4)
        head = m.encoder.leaf(1, constant(np.ones(4)))
        after = m.encoder.attach(head, constant(np.ones(4)), RIGHT)
        assert after.left is head.left
        assert after.left.output().value.tobytes() == head.left.output().value.tobytes()
        assert not np.array_equal(after.c.value, head.c.value)

    def test_bad_direction(self):
        m = tiny_model()
        head = m.encoder.leaf(1, constant(np.ones(4)))
        with pytest.raises(ValueError):
            m.encoder.attach(head, constant(np.ones(4)), 7)


class TestEncodeTree:
    def test_single_word(self):
        m = tiny_model(seed=6)
        v = constant(np.arange(4.0))
        got = m.encoder.encode_tree([v], [-1, 0], [None, 0])
        want = m.encoder.finalize(m.encoder.leaf(1, v), 0)
        assert got.value.tobytes() == want.value.tobytes()

    def test_chain_sensitive_to_first_word(self):
        m = tiny_model(seed=6)
        rng = np.random.default_rng(1)
        vs = _vectors(m, 3, rng)
        heads, labels = [-1, 2, 3, 0], [None, 1, 1, 0]
        base = m.encoder.encode_tree(vs, heads, labels).value
        vs[0] = constant(vs[0].value + 0.5)
        assert not np.allclose(base, m.encoder.encode_tree(vs, heads, labels).value)

    def test_cycle_rejected(self):
        m = tiny_model()
        vs = _vectors(m, 3, np.random.default_rng(0))
        with pytest.raises(ValueError):
            m.encoder.encode_tree(vs, [-1, 0, 3, 2], [None, 0, 1, 1])

    def test_non_projective_accepted(self):
        m = tiny_model(seed=2)
        vs = _vectors(m, 4, np.random.default_rng(0))
        out = m.encoder.encode_tree(vs, [-1, 3, 3, 0, 1], [None, 1, 1, 0, 2])
        assert np.all(np.isfinite(out.value))

    def test_head_outward_order(self):
        m = tiny_model(seed=3)
        enc = m.encoder
        made, seen = {}, []
        finalize, attach = enc.finalize, enc.attach

        def spy_finalize(node, label):
            out = finalize(node, label)
            made[id(out)] = node.id
            return out

        def spy_attach(head, e, direction):
            seen.append((head.id, made[id(e)], direction))
            return attach(head, e, direction)

        enc.finalize, enc.attach = spy_finalize, spy_attach
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(1, 9))
            heads = random_tree(n, rng)
            seen.clear()
            enc.encode_tree(_vectors(m, n, rng), heads, [None] + [1] * n)
            for h in range(1, n + 1):
                lefts = [mod for hd, mod, d in seen if hd == h and d == LEFT]
                rights = [mod for hd, mod, d in seen if hd == h and d == RIGHT]
                assert lefts == sorted((x for x in range(1, h) if heads[x] == h), reverse=True)
                assert rights == sorted(x for x in range(h + 1, n + 1) if heads[x] == h)


def _oracle_orders(model, heads, labels, pend, remaining, out):
    """Every zero-error action order for the gold tree, depth-first;
    appends the final root encoding of each order to ``out``."""
    if len(pend) == 1:
        out.append(model.encoder.finalize(pend[0], labels[pend[0].id]).value)
        return
    for i in range(len(pend) - 1):
        a, b = pend[i], pend[i + 1]
        for head, mod, d in ((b, a, LEFT), (a, b, RIGHT)):
            if heads[mod.id] == head.id and remaining[mod.id] == 0:
                new = model.combine(head, mod, d, labels[mod.id])
                rest = pend[:i] + [new] + pend[i + 2:]
                remaining[head.id] -= 1
                _oracle_orders(model, heads, labels, rest, remaining, out)
                remaining[head.id] += 1


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_incremental_matches_batch_all_orders(n):
    model = tiny_model(seed=n)
    rng = np.random.default_rng(n)
    random_params(model, rng, 0.5)
    orders = 0
    for heads in projective_trees(n):
        labels = [None] + [int(rng.integers(3)) for _ in range(n)]
        vs = _vectors(model, n, rng)
        want = model.encoder.encode_tree(vs, heads, labels).value
        remaining = [0] * (n + 1)
        for m in range(1, n + 1):
            if heads[m]:
                remaining[heads[m]] += 1
        leaves = [model.encoder.leaf(i, v) for i, v in enumerate(vs, 1)]
        got = []
        _oracle_orders(model, heads, labels, leaves, remaining, got)
        assert got
        for g in got:
            assert g.tobytes() == want.tobytes()
        orders += len(got)
    assert orders >= len(projective_trees(n))


def test_parser_attachments_are_head_outward():
    model = tiny_model(seed=9)
    rng = np.random.default_rng(9)
    random_params(model, rng)
    log = []
    combine = model.combine

    def spy(head, mod, direction, label):
        log.append((head.id, mod.id, direction))
        return combine(head, mod, direction, label)

    model.combine = spy
    for _ in range(100):
        n = int(rng.integers(1, 11))
        log.clear()
        model.parse(random_words(n, rng))
        for h in range(1, n + 1):
            lefts = [m for hd, m, d in log if hd == h and d == LEFT]
            rights = [m for hd, m, d in log if hd == h and d == RIGHT]
            assert lefts == sorted(lefts, reverse=True) and all(m < h for m in lefts)
            assert rights == sorted(rights) and all(m > h for m in rights)


def test_gradients_reach_every_participating_embedding():
    model = tiny_model(seed=5)
    random_params(model, np.random.default_rng(5), 0.5)
    s = sentence([-1, 2, 0, 2, 3], labels=[None, "x", "root", "y", "x"],
                 forms=["w1", "w2", "w3", "w4"], tags=["A", "B", "C", "A"])
    vs = model.encoder.word_vectors(s)
    vocab = model.vocab
    labels = [None] + [vocab.label(l) for l in s.labels[1:]]
    root = model.encoder.encode_tree(vs, s.heads, labels)
    loss = ad.sum_([ad.pick(root, i) for i in range(root.value.size)])
    g = backward(loss, list(model.store))
    grads = {p.name: g[p] for p in model.store}
    for t in s.tokens:
        assert np.any(grads["emb.word"][vocab.word(t.form)] != 0)
        assert np.any(grads["emb.pos"][vocab.tag(t.pos)] != 0)
    for lab in set(labels[1:]):
        assert np.any(grads["emb.rel"][lab] != 0)
    assert not np.any(grads["emb.word"][vocab.word("w9")])


def test_default_dimension_chain():
    from htparse.config import ModelConfig
    for cfg in (ModelConfig(), ModelConfig(use_bilstm=False), tiny_config()):
        assert cfg.enc_dim == cfg.word_vec_dim
