"""Word vectors and the hierarchical tree-LSTM encoding of subtrees.

A subtree is summarised by two LSTM states: ``left`` has read the head
vector followed by the encodings of the left modifiers from the head
outward, ``right`` likewise for right modifiers.  Attaching a new outermost
modifier is a single ``advance`` on the proper side, which is what makes the
encoding cheap to maintain during bottom-up parsing.
"""

from __future__ import annotations

from typing import Sequence

from .config import ModelConfig
from .corpus import DropoutPolicy, Sentence, Vocab, dropout_replace
from .nn import LSTM, LstmState, ParamStore
from .nn import autodiff as ad
from .nn.autodiff import DimensionError, Expr

LEFT, RIGHT = 0, 1


class NodeState:
    """A pending subtree.  Immutable: attaching returns a new state."""

    __slots__ = ("id", "left", "right", "vector", "_c")

    def __init__(self, id: int, left: LstmState | None, right: LstmState | None,
                 vector: Expr | None = None):
        self.id = id
        self.left = left
        self.right = right
        self.vector = vector
        self._c = None

    @property
    def c(self) -> Expr:
        if self._c is None:
            if self.left is None:
                self._c = self.vector
            else:
                self._c = ad.concat([self.left.output(), self.right.output()])
        return self._c

    def __repr__(self):
        return f"NodeState(id={self.id})"


class TreeEncoder:
    def __init__(self, config: ModelConfig, vocab: Vocab, store: ParamStore):
        self.config = config
        self.vocab = vocab
        cfg = config
        self.word_emb = store.add_embedding("emb.word", len(vocab.words), cfg.word_dim)
        in_dim = cfg.word_dim
        if cfg.use_pos:
            self.pos_emb = store.add_embedding("emb.pos", len(vocab.tags), cfg.pos_dim)
            in_dim += cfg.pos_dim
        self.proj_W = store.add_matrix("proj.W", cfg.proj_dim, in_dim)
        self.proj_b = store.add_bias("proj.b", cfg.proj_dim)
        if cfg.use_bilstm:
            self.fwd = LSTM(store, "bilstm.fwd", cfg.proj_dim, cfg.bilstm_dim, cfg.bilstm_layers)
            self.bwd = LSTM(store, "bilstm.bwd", cfg.proj_dim, cfg.bilstm_dim, cfg.bilstm_layers)
        if cfg.use_tree:
            d_v = cfg.word_vec_dim
            self.rnn_left = LSTM(store, "tree.left", d_v, cfg.tree_dim, cfg.tree_layers)
            self.rnn_right = LSTM(store, "tree.right", d_v, cfg.tree_dim, cfg.tree_layers)
            comp_in = 2 * cfg.tree_dim
            if cfg.labeled:
                self.rel_emb = store.add_embedding("emb.rel", len(vocab.labels), cfg.rel_dim)
                comp_in += cfg.rel_dim
            self.comp_W = store.add_matrix("compose.W", cfg.enc_dim, comp_in)
            self.comp_b = store.add_bias("compose.b", cfg.enc_dim)

    def embed_token(self, word_id: int, tag_id: int) -> Expr:
        parts = [ad.lookup(self.word_emb, word_id)]
        if self.config.use_pos:
            parts.append(ad.lookup(self.pos_emb, tag_id))
        x = parts[0] if len(parts) == 1 else ad.concat(parts)
        return ad.tanh(ad.affine(self.proj_W, x, self.proj_b))

    def contextualize(self, vs: Sequence[Expr]) -> list[Expr]:
        if not self.config.use_bilstm:
            return list(vs)
        f = self.fwd.transduce(vs)
        b = self.bwd.transduce(vs[::-1])[::-1]
        return [ad.concat([fi, bi]) for fi, bi in zip(f, b)]

    def word_vectors(self, sentence: Sentence, dropout: DropoutPolicy | None = None) -> list[Expr]:
        vocab = self.vocab
        raw = []
        for tok in sentence.tokens:
            wid = dropout_replace(vocab.word(tok.form), dropout, vocab)
            raw.append(self.embed_token(wid, vocab.tag(tok.pos)))
        return self.contextualize(raw)

    def leaf(self, index: int, v: Expr) -> NodeState:
        if not self.config.use_tree:
            return NodeState(index, None, None, v)
        return NodeState(index, self.rnn_left.initial().advance(v), self.rnn_right.initial().advance(v))

    def finalize(self, node: NodeState, label: int | None) -> Expr | None:
        """enc of ``node`` as a modifier carrying relation ``label``."""
        if not self.config.use_tree:
            return None
        parts = [node.c]
        if self.config.labeled:
            if label is None or not 0 <= label < len(self.vocab.labels):
                raise DimensionError("finalize", (label,), (len(self.vocab.labels),))
            parts.append(ad.lookup(self.rel_emb, label))
        return ad.tanh(ad.affine(self.comp_W, ad.concat(parts), self.comp_b))

    def attach(self, head: NodeState, enc: Expr | None, direction: int) -> NodeState:
        if not self.config.use_tree:
            return head
        if direction == LEFT:
            return NodeState(head.id, head.left.advance(enc), head.right)
        if direction == RIGHT:
            return NodeState(head.id, head.left, head.right.advance(enc))
        raise ValueError(f"direction must be LEFT or RIGHT, got {direction!r}")

    def encode_tree(self, vs: Sequence[Expr], heads: Sequence[int], labels: Sequence[int | None]) -> Expr:
        """Batch encoding of a complete tree; returns enc of the root word.

        ``heads`` and ``labels`` are indexed by word (position 0 unused).
        Modifiers are folded from the head outward.
        """
        n = len(vs)
        children: dict[int, list[int]] = {i: [] for i in range(n + 1)}
        for m in range(1, n + 1):
            children[heads[m]].append(m)
        roots = children[0]
        if len(roots) != 1:
            raise ValueError(f"expected one root, got {roots}")

        state = {}
        on_stack = set()

        def build(i):
            if i in on_stack:
                raise ValueError(f"cycle through word {i}")
            on_stack.add(i)
            node = self.leaf(i, vs[i - 1])
            lefts = sorted((m for m in children[i] if m < i), reverse=True)
            rights = sorted(m for m in children[i] if m > i)
            for m in lefts:
                node = self.attach(node, self.finalize(build(m), labels[m]), LEFT)
            for m in rights:
                node = self.attach(node, self.finalize(build(m), labels[m]), RIGHT)
            on_stack.discard(i)
            state[i] = node
            return node

        # reachability check catches cycles that never touch the root
        root = build(roots[0])
        if len(state) != n:
            raise ValueError("heads do not form a tree (cycle detached from root)")
        return self.finalize(root, labels[roots[0]])
