"""Train a small parser on the bundled treebank and parse a new sentence.

Run from the repository root:  python demos/quickstart.py
Takes about ten seconds.
"""

from htparse import ModelConfig, TrainConfig, evaluate, read_conll, train
from htparse.corpus import Sentence, Token, format_conll
from htparse.sample import bundled_sample

sentences = read_conll(bundled_sample())
print(f"{len(sentences)} training sentences, first one:")
print(format_conll(sentences[:1]))

# narrow layers keep this quick; the defaults are much wider
small = ModelConfig(word_dim=32, pos_dim=16, rel_dim=16, tree_dim=32, bilstm_dim=32,
                    proj_dim=32, hidden_u=32, hidden_l=32)
model, logs = train(sentences, small, TrainConfig(epochs=10, batch_errors=10),
                    on_epoch=lambda log: print(log.line()))

report = evaluate(sentences, model.parse_all(sentences))
print(report.text())

# a sentence without arcs; POS tags are what the generator uses
words = [("the", "DT"), ("girl", "NN"), ("saw", "VBD"), ("a", "DT"), ("dog", "NN"),
         ("with", "IN"), ("a", "DT"), ("telescope", "NN"), (".", ".")]
fresh = Sentence([Token(i + 1, w, t) for i, (w, t) in enumerate(words)])
print(format_conll([model.parse(fresh)]))
