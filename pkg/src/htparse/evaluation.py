from __future__ import annotations

from dataclasses import dataclass, field
from typing import Collection, Sequence

from .corpus import DEFAULT_PUNCT_TAGS, Sentence


class AlignmentError(ValueError):
    def __init__(self, message: str, sentence: int | None = None):
        self.sentence = sentence
        super().__init__(message)


@dataclass
class EvalReport:
    uas: float
    las: float
    counted: int
    excluded: int
    correct_heads: int
    correct_labeled: int
    per_sentence: list[tuple[int, int, int]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.counted + self.excluded

    def text(self) -> str:
        return (f"Unlabeled attachment score: {self.correct_heads} / {self.counted} * 100 = {100 * self.uas:.2f} %\n"
                f"Labeled   attachment score: {self.correct_labeled} / {self.counted} * 100 = {100 * self.las:.2f} %\n"
                f"Excluded tokens: {self.excluded}")

    def keyvalues(self) -> str:
        return (f"uas={self.uas:.6f} las={self.las:.6f} counted={self.counted} "
                f"excluded={self.excluded}")


def evaluate(gold: Sequence[Sentence], predicted: Sequence[Sentence],
             punct_tags: Collection[str] | None = DEFAULT_PUNCT_TAGS) -> EvalReport:
    """Attachment scores, skipping tokens whose gold POS is in ``punct_tags``.

    Pass ``punct_tags=None`` (or an empty set) to score every token.
    """
    if len(gold) != len(predicted):
        raise AlignmentError(f"gold has {len(gold)} sentences, prediction has {len(predicted)}")
    punct = frozenset(punct_tags or ())
    counted = excluded = heads_ok = labeled_ok = 0
    per_sentence = []
    for k, (g, p) in enumerate(zip(gold, predicted)):
        if len(g) != len(p):
            raise AlignmentError(f"sentence {k}: gold has {len(g)} tokens, prediction has {len(p)}", k)
        if g.arcs is None or p.arcs is None:
            raise AlignmentError(f"sentence {k}: missing arcs", k)
        gh, gl, ph, pl = g.heads, g.labels, p.heads, p.labels
        s_count = s_heads = s_labeled = 0
        for tok in g.tokens:
            i = tok.index
            if tok.pos in punct:
                excluded += 1
                continue
            s_count += 1
            if gh[i] == ph[i]:
                s_heads += 1
                if gl[i] == pl[i]:
                    s_labeled += 1
        counted += s_count
        heads_ok += s_heads
        labeled_ok += s_labeled
        per_sentence.append((s_count, s_heads, s_labeled))
    uas = heads_ok / counted if counted else 0.0
    las = labeled_ok / counted if counted else 0.0
    return EvalReport(uas, las, counted, excluded, heads_ok, labeled_ok, per_sentence)
