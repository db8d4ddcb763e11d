"""Synthetic projective treebank for desk-scale experiments.

A small template grammar produces English-like clauses.  Prepositional
phrases are deliberately ambiguous: the preposition is drawn independently of
where the phrase attaches, and only the class of the object noun inside the
phrase (instrument or location -> verb, attribute -> preceding noun) decides
the head.  A parser that sees only head words cannot recover that choice once
the phrase has been assembled.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .corpus import Arc, Sentence, Token, write_conll

DETERMINERS = "the a every some this that my his her our".split()
ADJECTIVES = ("big small old young red green quiet loud happy sad tall short bright dark "
              "heavy light clever lazy brave shy warm cold fast slow rich poor strange famous "
              "gentle proud").split()
AGENTS = ("man woman dog cat girl boy farmer teacher doctor child king queen soldier pilot "
          "baker singer student driver artist monkey horse bird lawyer nurse sailor thief "
          "painter guard chef writer").split()
ATTRIBUTES = "hat coat tail scarf beard smile voice ribbon badge collar jacket ring".split()
INSTRUMENTS = "telescope hammer knife spoon brush rope stick camera pencil ladder shovel axe".split()
LOCATIONS = "park garden river kitchen market station school castle forest beach bridge barn".split()


def _plural(word):
    if word.endswith(("s", "sh", "ch", "x")):
        return word + "es"
    if word.endswith("fe"):
        return word[:-2] + "ves"
    if word.endswith("y") and word[-2] not in "aeiou":
        return word[:-1] + "ies"
    return word + "s"


IRREGULAR = {"man": "men", "woman": "women", "child": "children"}
PLURALS = {id(c): [IRREGULAR.get(w) or _plural(w) for w in c[:20]]
           for c in (AGENTS, ATTRIBUTES, INSTRUMENTS, LOCATIONS)}
TRANSITIVE = ("saw watched found chased helped painted fed visited followed called met "
              "carried pushed pulled liked loved hated greeted warned admired caught "
              "kicked touched noticed thanked").split()
INTRANSITIVE = "slept laughed smiled waited danced cried arrived left sang ran jumped fell".split()
BASE_VERBS = ("see watch find chase help paint feed visit follow call meet carry push pull "
              "greet warn admire catch touch thank").split()
MODALS = "will can should might must".split()
PREPOSITIONS = "with near by from".split()
ADVERBS = ("quickly slowly quietly happily sadly early late often rarely again soon "
           "carefully loudly gladly badly").split()
CONJUNCTIONS = "and but or".split()
PRONOUNS = "he she they it we".split()

TAGS = ["DT", "JJ", "NN", "NNS", "PRP", "VBD", "MD", "VB", "IN", "RB", "CC", "."]
LABELS = ["root", "nsubj", "dobj", "det", "amod", "prep", "pobj", "advmod", "aux", "cc",
          "conj", "punct"]


class _Node:
    __slots__ = ("form", "pos", "label", "left", "right")

    def __init__(self, form, pos, label=None):
        self.form = form
        self.pos = pos
        self.label = label
        self.left = []   # closest first
        self.right = []  # closest first

    def add_left(self, child, label):
        child.label = label
        self.left.append(child)

    def add_right(self, child, label):
        child.label = label
        self.right.append(child)


class _Grammar:
    # how often an object noun, a verb and a noun inside a phrase take a
    # prepositional phrase
    object_pp = 0.5
    verb_pp = 0.7
    inner_pp = 0.35

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def pick(self, words):
        return words[int(self.rng.integers(len(words)))]

    def chance(self, p):
        return self.rng.random() < p

    def noun_phrase(self, nouns, depth, plural_rate=0.2, pp_rate=0.3):
        if self.chance(plural_rate):
            head = _Node(self.pick(PLURALS[id(nouns)]), "NNS")
        else:
            head = _Node(self.pick(nouns), "NN")
        # left modifiers are stored closest-first: adjectives, then determiner
        while len(head.left) < 2 and self.chance(0.25):
            head.add_left(_Node(self.pick(ADJECTIVES), "JJ"), "amod")
        if head.pos == "NN":
            head.add_left(_Node(self.pick(DETERMINERS), "DT"), "det")
        # attribute nouns take no phrases of their own, which would make the
        # attachment of a following attribute phrase a coin flip
        if depth < 2 and nouns is not ATTRIBUTES:
            while len(head.right) < 2 and self.chance(pp_rate):
                head.add_right(self.prep_phrase(ATTRIBUTES, depth + 1), "prep")
        return head

    def prep_phrase(self, nouns, depth):
        prep = _Node(self.pick(PREPOSITIONS), "IN")
        prep.add_right(self.noun_phrase(nouns, depth, plural_rate=0.5, pp_rate=self.inner_pp), "pobj")
        return prep

    def clause(self):
        if self.chance(0.4):
            subj = _Node(self.pick(PRONOUNS), "PRP")
        else:
            subj = self.noun_phrase(AGENTS, 1, pp_rate=0.15)
        if self.chance(0.25):
            verb = _Node(self.pick(BASE_VERBS), "VB")
            verb.add_left(_Node(self.pick(MODALS), "MD"), "aux")
            transitive = True
        elif self.chance(0.2):
            verb = _Node(self.pick(INTRANSITIVE), "VBD")
            transitive = False
        else:
            verb = _Node(self.pick(TRANSITIVE), "VBD")
            transitive = True
        verb.add_left(subj, "nsubj")
        if transitive:
            # attribute PPs on the object and instrument/location PPs on the
            # verb look identical from the outside
            verb.add_right(self.noun_phrase(AGENTS, 0, pp_rate=self.object_pp), "dobj")
        while len(verb.right) < 4 and self.chance(self.verb_pp):
            nouns = INSTRUMENTS if self.chance(0.5) else LOCATIONS
            verb.add_right(self.prep_phrase(nouns, 1), "prep")
        if self.chance(0.15):
            verb.add_right(_Node(self.pick(ADVERBS), "RB"), "advmod")
        return verb

    def sentence(self):
        root = self.clause()
        if self.chance(0.1):
            root.add_right(_Node(self.pick(CONJUNCTIONS), "CC"), "cc")
            root.add_right(self.clause(), "conj")
        root.add_right(_Node(".", "."), "punct")
        root.label = "root"
        return root


def _linearize(root: _Node) -> Sentence:
    order = []

    def walk(node, parent):
        for child in reversed(node.left):
            walk(child, node)
        order.append((node, parent))
        for child in node.right:
            walk(child, node)

    walk(root, None)
    index = {id(node): i for i, (node, _) in enumerate(order, 1)}
    tokens = [Token(i, node.form, node.pos, cpos=node.pos, fpos=node.pos)
              for i, (node, _) in enumerate(order, 1)]
    arcs = [Arc(index[id(parent)] if parent is not None else 0, i, node.label)
            for i, (node, parent) in enumerate(order, 1)]
    return Sentence(tokens, arcs)


def generate(size: int, seed: int) -> list[Sentence]:
    """``size`` random projective labeled sentences, deterministic per seed."""
    grammar = _Grammar(np.random.default_rng(seed))
    return [_linearize(grammar.sentence()) for _ in range(size)]


def write_sample(directory, size: int, seed: int, dev_size: int | None = None) -> tuple[Path, Path]:
    """Write ``train.conll`` (``size`` sentences) and ``dev.conll``."""
    if dev_size is None:
        dev_size = max(1, size // 5)
    sents = generate(size + dev_size, seed)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    train_path, dev_path = directory / "train.conll", directory / "dev.conll"
    write_conll(sents[:size], train_path)
    write_conll(sents[size:], dev_path)
    return train_path, dev_path


def bundled_sample() -> Path:
    """Path of the packaged 50-sentence sample treebank."""
    return Path(str(resources.files("htparse") / "data" / "sample.conll"))
