from __future__ import annotations

from typing import Sequence

from . import engine
from .config import ConfigError, ModelConfig
from .corpus import Arc, DropoutPolicy, Sentence, Vocab, load_pretrained_embeddings
from .encoder import NodeState, TreeEncoder
from .engine import Scorer
from .nn import ParamStore, load_params, no_grad, save_params
from .nn.serialize import ShapeMismatchError


class ParserModel:
    """Encoder + scorer over one parameter store; implements the engine's
    model protocol."""

    def __init__(self, config: ModelConfig, vocab: Vocab, seed: int = 0):
        self.config = config
        self.vocab = vocab
        self.seed = seed
        self.store = ParamStore(seed)
        self.encoder = TreeEncoder(config, vocab, self.store)
        self.scorer = Scorer(config, len(vocab.labels), self.store)
        self.window = config.window

    @property
    def num_labels(self) -> int:
        return len(self.vocab.labels)

    @property
    def root_label(self) -> int:
        return self.vocab.root_label_id

    def leaves(self, sentence: Sentence, dropout: DropoutPolicy | None = None) -> list[NodeState]:
        vs = self.encoder.word_vectors(sentence, dropout)
        return [self.encoder.leaf(i, v) for i, v in enumerate(vs, 1)]

    def score(self, window):
        return self.scorer(window)

    def combine(self, head: NodeState, mod: NodeState, direction: int, label: int) -> NodeState:
        return self.encoder.attach(head, self.encoder.finalize(mod, label), direction)

    def parse(self, sentence: Sentence, selector: str = "lazy") -> Sentence:
        with no_grad():
            triples = engine.parse(self, sentence, selector)
        labels = self.vocab.labels
        return sentence.with_arcs(Arc(h, m, labels[l]) for h, m, l in triples)

    def parse_all(self, sentences: Sequence[Sentence]) -> list[Sentence]:
        return [self.parse(s) for s in sentences]

    def load_embeddings(self, path) -> int:
        return load_pretrained_embeddings(path, self.vocab, self.encoder.word_emb.value)

    def save(self, path, extra: dict | None = None) -> None:
        meta = {"model_config": self.config.to_dict(), "vocab": self.vocab.to_dict(),
                "seed": self.seed, "num_labels": self.num_labels,
                "vocab_sizes": [len(self.vocab.words), len(self.vocab.tags), self.num_labels]}
        if extra:
            meta.update(extra)
        save_params(self.store, path, meta)

    @classmethod
    def load(cls, path) -> tuple["ParserModel", dict]:
        """Rebuild a model from a file; raises ``ShapeMismatchError`` when the
        stored tensors disagree with the embedded configuration."""
        from .nn.serialize import _peek_meta
        meta = _peek_meta(path)
        try:
            config = ModelConfig.from_dict(meta["model_config"])
            vocab = Vocab.from_dict(meta["vocab"])
        except (KeyError, TypeError, ConfigError) as exc:
            raise ShapeMismatchError(f"{path}: incomplete model metadata ({exc})") from exc
        model = cls(config, vocab, seed=meta.get("seed", 0))
        load_params(path, template=model.store)
        return model, meta
