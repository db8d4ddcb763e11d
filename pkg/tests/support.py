"""Small models and random sentences shared by the tests."""

from htparse.config import ModelConfig
from htparse.corpus import Arc, Sentence, Token, build_vocab
from htparse.model import ParserModel

FORMS = ["w%d" % i for i in range(12)]
TAGS = ["A", "B", "C"]
LABELS = ["root", "x", "y"]


def tiny_config(**kw) -> ModelConfig:
    base = dict(word_dim=4, pos_dim=3, rel_dim=2, tree_dim=3, tree_layers=2, bilstm_dim=2,
                bilstm_layers=1, proj_dim=4, hidden_u=5, hidden_l=5)
    base.update(kw)
    return ModelConfig(**base)


def sentence(heads, labels=None, forms=None, tags=None) -> Sentence:
    """Build a sentence from a 1-based head array (heads[0] ignored)."""
    n = len(heads) - 1
    forms = forms or [FORMS[i % len(FORMS)] for i in range(n)]
    tags = tags or [TAGS[i % len(TAGS)] for i in range(n)]
    if labels is None:
        labels = [None] + ["root" if heads[m] == 0 else "x" for m in range(1, n + 1)]
    toks = [Token(i + 1, forms[i], tags[i]) for i in range(n)]
    return Sentence(toks, [Arc(heads[m], m, labels[m]) for m in range(1, n + 1)])


def random_words(n, rng) -> Sentence:
    forms = [FORMS[int(rng.integers(len(FORMS)))] for _ in range(n)]
    tags = [TAGS[int(rng.integers(len(TAGS)))] for _ in range(n)]
    return Sentence([Token(i + 1, forms[i], tags[i]) for i in range(n)], None)


def vocab():
    """Vocabulary covering FORMS, TAGS and LABELS, root label ``root``."""
    toks = [Token(i + 1, f, TAGS[i % 3]) for i, f in enumerate(FORMS)]
    arcs = [Arc(0, 1, "root")] + [Arc(1, m, LABELS[1 + m % 2]) for m in range(2, len(FORMS) + 1)]
    return build_vocab([Sentence(toks, arcs)])


def tiny_model(seed=0, **kw) -> ParserModel:
    return ParserModel(tiny_config(**kw), vocab(), seed=seed)


def random_params(model, rng, scale=1.0):
    """Overwrite every parameter with N(0, scale^2) noise (generic values)."""
    for p in model.store:
        p.value[...] = rng.normal(scale=scale, size=p.value.shape)
