"""Does encoding whole subtrees help over using the head word alone?

Trains two parsers on the same synthetic treebank, one that composes each
pending subtree with the tree LSTMs and one that represents a subtree by its
head word only, and compares development UAS.  Prepositional phrases in the
generator attach to the verb or to the object noun depending on the noun
inside the phrase, so the decision needs to see into already built subtrees.

python demos/tree_vs_headword.py     (a few minutes)
"""

from htparse import ModelConfig, TrainConfig, train
from htparse.sample import generate

data = generate(600, 7)
train_set, dev = data[:500], data[500:]
dims = dict(word_dim=32, pos_dim=16, rel_dim=16, tree_dim=32, proj_dim=32,
            hidden_u=32, hidden_l=32, use_bilstm=False)

results = {}
for name, use_tree in (("subtree encoding", True), ("head word only", False)):
    _, logs = train(train_set, ModelConfig(use_tree=use_tree, **dims),
                    TrainConfig(epochs=8, batch_errors=10), dev=dev)
    curve = [log.dev_uas for log in logs]
    results[name] = max(curve)
    print(f"{name:>17}: dev UAS by epoch " + " ".join(f"{u:.3f}" for u in curve))

gap = results["subtree encoding"] - results["head word only"]
print(f"best-epoch gap: {100 * gap:.1f} UAS points")
