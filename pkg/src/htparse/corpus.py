"""CoNLL treebank I/O, vocabularies, projectivity and word dropout."""

from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

PAD = "<pad>"
UNK = "<unk>"
DEFAULT_PUNCT_TAGS = frozenset({"``", "''", ":", ",", "."})


class ConllError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Token:
    index: int
    form: str
    pos: str
    lemma: str = "_"
    cpos: str = "_"
    fpos: str = "_"
    feats: str = "_"

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"token index must be >= 1, got {self.index}")
        if not self.form:
            raise ValueError("token form must be non-empty")


@dataclass(frozen=True, order=True)
class Arc:
    head: int
    modifier: int
    label: str


@dataclass
class Sentence:
    tokens: list[Token]
    arcs: list[Arc] | None = None

    def __len__(self):
        return len(self.tokens)

    @property
    def heads(self) -> list[int]:
        """Head of each word, position 0 unused (ROOT)."""
        heads = [-1] * (len(self.tokens) + 1)
        for a in self.arcs or ():
            heads[a.modifier] = a.head
        return heads

    @property
    def labels(self) -> list[str | None]:
        labels: list[str | None] = [None] * (len(self.tokens) + 1)
        for a in self.arcs or ():
            labels[a.modifier] = a.label
        return labels

    def with_arcs(self, arcs: Iterable[Arc]) -> "Sentence":
        return Sentence(self.tokens, sorted(arcs, key=lambda a: a.modifier))


def validate_tree(n: int, arcs: Iterable[Arc]) -> None:
    """Raise ``ValueError`` unless ``arcs`` form a single-rooted tree over 1..n."""
    arcs = list(arcs)
    if len(arcs) != n:
        raise ValueError(f"expected {n} arcs, got {len(arcs)}")
    heads = {}
    for a in arcs:
        if not 1 <= a.modifier <= n or not 0 <= a.head <= n or a.head == a.modifier:
            raise ValueError(f"invalid arc {a}")
        if a.modifier in heads:
            raise ValueError(f"word {a.modifier} has two heads")
        heads[a.modifier] = a.head
    roots = [m for m, h in heads.items() if h == 0]
    if len(roots) != 1:
        raise ValueError(f"expected exactly one root, got {len(roots)}")
    for m in range(1, n + 1):
        seen = set()
        while m != 0:
            if m in seen:
                raise ValueError(f"cycle through word {m}")
            seen.add(m)
            m = heads[m]


def is_projective(heads: list[int] | Sentence) -> bool:
    """True iff no arc crosses another.

    ``heads[m]`` is the head of word m (1-based, index 0 ignored).  Every word
    strictly inside an arc's span must have its head inside the closed span.
    """
    if isinstance(heads, Sentence):
        heads = heads.heads
    n = len(heads) - 1
    for m in range(1, n + 1):
        h = heads[m]
        lo, hi = min(h, m), max(h, m)
        for k in range(lo + 1, hi):
            if not lo <= heads[k] <= hi:
                return False
    return True


def _parse_id(raw: str, line: int) -> int | None:
    if "-" in raw or "." in raw:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConllError(f"invalid ID {raw!r}", line) from None


def _finish(rows: list, start_line: int, pos_column: int) -> Sentence:
    tokens = []
    heads, labels = [], []
    seen = set()
    for line, idx, cols in rows:
        if idx in seen:
            raise ConllError(f"duplicate ID {idx}", line)
        if idx != len(tokens) + 1:
            raise ConllError(f"expected ID {len(tokens) + 1}, got {idx}", line)
        seen.add(idx)
        cols = cols + ["_"] * (8 - len(cols))
        tokens.append(Token(idx, cols[1], cols[pos_column], lemma=cols[2], cpos=cols[3],
                            fpos=cols[4], feats=cols[5]))
        heads.append((line, cols[6]))
        labels.append(cols[7])
    n = len(tokens)
    if any(h == "_" for _, h in heads):
        return Sentence(tokens, None)
    arcs = []
    for tok, (line, raw), label in zip(tokens, heads, labels):
        try:
            head = int(raw)
        except ValueError:
            raise ConllError(f"non-integer HEAD {raw!r}", line) from None
        if not 0 <= head <= n or head == tok.index:
            raise ConllError(f"HEAD {head} out of range for a {n}-token sentence", line)
        arcs.append(Arc(head, tok.index, label))
    return Sentence(tokens, arcs)


def read_conll(source, pos_column: str = "cpos") -> list[Sentence]:
    """Read CoNLL-X style sentences from a path or text stream.

    ``pos_column`` selects column 4 (``"cpos"``) or column 5 (``"pos"``) as the
    POS input.  Multiword ranges and empty nodes are skipped.
    """
    col = {"cpos": 3, "pos": 4}[pos_column]
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as f:
            return _read_stream(f, col)
    return _read_stream(source, col)


def _read_stream(stream: TextIO, col: int) -> list[Sentence]:
    sentences = []
    rows: list = []
    start = 1
    for lineno, raw in enumerate(stream, 1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            if rows:
                sentences.append(_finish(rows, start, col))
                rows = []
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t") if "\t" in line else line.split()
        if len(cols) < 8:
            raise ConllError(f"expected at least 8 columns, got {len(cols)}", lineno)
        idx = _parse_id(cols[0], lineno)
        if idx is None:
            continue
        if not rows:
            start = lineno
        rows.append((lineno, idx, cols))
    if rows:
        sentences.append(_finish(rows, start, col))
    return sentences


def write_conll(sentences: Iterable[Sentence], dest, placeholder_label: str | None = None) -> None:
    """Write sentences in the column layout :func:`read_conll` reads.

    ``placeholder_label`` replaces every relation (unlabeled output).
    """
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8") as f:
            _write_stream(sentences, f, placeholder_label)
    else:
        _write_stream(sentences, dest, placeholder_label)


def _write_stream(sentences, f, placeholder_label):
    for sent in sentences:
        heads, labels = sent.heads, sent.labels
        for tok in sent.tokens:
            if sent.arcs is None:
                head, label = "_", "_"
            else:
                head = str(heads[tok.index])
                label = placeholder_label or labels[tok.index]
            cpos = tok.cpos if tok.cpos != "_" else tok.pos
            fpos = tok.fpos if tok.fpos != "_" else tok.pos
            f.write("\t".join([str(tok.index), tok.form, tok.lemma, cpos, fpos, tok.feats,
                               head, label, "_", "_"]) + "\n")
        f.write("\n")


def format_conll(sentences: Iterable[Sentence], **kw) -> str:
    buf = io.StringIO()
    _write_stream(sentences, buf, kw.get("placeholder_label"))
    return buf.getvalue()


@dataclass
class Vocab:
    words: list[str]
    word_counts: dict[str, int]
    tags: list[str]
    labels: list[str]
    root_label: str
    word_ids: dict[str, int] = field(init=False, repr=False)
    tag_ids: dict[str, int] = field(init=False, repr=False)
    label_ids: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.word_ids = {w: i for i, w in enumerate(self.words)}
        self.tag_ids = {t: i for i, t in enumerate(self.tags)}
        self.label_ids = {l: i for i, l in enumerate(self.labels)}

    pad_id = 0
    unk_id = 1

    def word(self, form: str) -> int:
        return self.word_ids.get(form.lower(), self.unk_id)

    def tag(self, pos: str) -> int:
        return self.tag_ids.get(pos, self.unk_id)

    def label(self, name: str) -> int:
        return self.label_ids[name]

    def count(self, word_id: int) -> int:
        return self.word_counts.get(self.words[word_id], 0)

    @property
    def root_label_id(self) -> int:
        return self.label_ids[self.root_label]

    def to_dict(self) -> dict:
        return {"words": self.words, "word_counts": self.word_counts, "tags": self.tags,
                "labels": self.labels, "root_label": self.root_label}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocab":
        return cls(list(d["words"]), {k: int(v) for k, v in d["word_counts"].items()},
                   list(d["tags"]), list(d["labels"]), d["root_label"])


def build_vocab(sentences: Iterable[Sentence], unlabeled: str | None = None) -> Vocab:
    """Register every observed form, tag and label; no frequency cutoff.

    With ``unlabeled`` set, all relations collapse to that single label.
    """
    words: Counter = Counter()
    tags: Counter = Counter()
    labels: Counter = Counter()
    roots: Counter = Counter()
    n = 0
    for sent in sentences:
        if sent.arcs is None:
            raise ValueError("build_vocab needs sentences with gold arcs")
        n += 1
        for tok in sent.tokens:
            words[tok.form.lower()] += 1
            tags[tok.pos] += 1
        for a in sent.arcs:
            label = unlabeled or a.label
            labels[label] += 1
            if a.head == 0:
                roots[label] += 1
    if n == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    word_list = [PAD, UNK] + sorted(w for w in words if w not in (PAD, UNK))
    tag_list = [PAD, UNK] + sorted(t for t in tags if t not in (PAD, UNK))
    label_list = sorted(labels)
    root = max(sorted(roots), key=lambda l: roots[l])
    return Vocab(word_list, dict(words), tag_list, label_list, root)


@dataclass
class DropoutPolicy:
    """Replace a word seen #(w) times by UNK with probability alpha/(#(w)+alpha)."""

    alpha: float = 0.25
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))
    enabled: bool = True

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    def probability(self, count: int) -> float:
        return self.alpha / (count + self.alpha)


def dropout_replace(word_id: int, policy: DropoutPolicy | None, vocab: Vocab) -> int:
    if policy is None or not policy.enabled or word_id == vocab.unk_id:
        return word_id
    if policy.rng.random() < policy.probability(vocab.count(word_id)):
        return vocab.unk_id
    return word_id


def load_pretrained_embeddings(path, vocab: Vocab, table: np.ndarray) -> int:
    """Overwrite rows of ``table`` for vocabulary words present in ``path``.

    Returns the number of rows replaced.  Words missing from the file keep
    their current (seeded) vectors.
    """
    dim = table.shape[1]
    width = None
    hits = 0
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts:
                continue
            values = parts[1:]
            if width is None:
                width = len(values)
                if width != dim:
                    raise ValueError(f"{path}: vectors have dimension {width}, configuration expects {dim}")
            elif len(values) != width:
                raise ConllError(f"row has {len(values)} values, earlier rows have {width}", lineno)
            idx = vocab.word_ids.get(parts[0].lower())
            if idx is not None and idx > vocab.unk_id:
                table[idx] = np.array(values, dtype=np.float64)
                hits += 1
    return hits


def strip_arcs(sent: Sentence) -> Sentence:
    return replace(sent, arcs=None)
