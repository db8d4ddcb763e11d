"""Step through the training oracle on one sentence.

At each state we list the actions that keep the best reachable tree (the
"gold" set) and show what happens after a deliberately wrong attachment:
the oracle keeps going and accepts any action that loses nothing further.
"""

from htparse.corpus import read_conll
from htparse.encoder import LEFT
from htparse.sample import bundled_sample
from htparse.training import OracleState, gold_actions, oracle_cost

sent = next(s for s in read_conll(bundled_sample()) if 6 <= len(s) <= 9)
forms = ["ROOT"] + [t.form for t in sent.tokens]
labels_seen = sorted(set(sent.labels[1:]))
label_id = {lab: i for i, lab in enumerate(labels_seen)}
L = len(labels_seen)
heads = sent.heads
labels = [0] + [label_id[lab] for lab in sent.labels[1:]]
oracle = OracleState(heads, labels)

pend = list(range(1, len(sent) + 1))
print("sentence:", " ".join(forms[1:]))


def describe(action):
    i, d, lab = action
    head, mod = (pend[i + 1], pend[i]) if d == LEFT else (pend[i], pend[i + 1])
    return f"{forms[mod]} <- {forms[head]} ({labels_seen[lab]})"


step = 0
while len(pend) > 1:
    G, W = gold_actions(pend, oracle, L)
    cost = oracle_cost(pend, heads, labels, root_label=label_id[sent.labels[heads.index(0)]])
    print(f"\nstep {step}: pending {[forms[p] for p in pend]}, best reachable errors {cost}")
    print("  gold:", "; ".join(describe(a) for a in G[:4]), "..." if len(G) > 4 else "")
    # take one wrong action early on to watch the oracle recover
    action = W[0] if step == 1 and W else G[0]
    if action is not G[0]:
        print("  taking a wrong action:", describe(action))
    i, d, _ = action
    head, mod = (pend[i + 1], pend[i]) if d == LEFT else (pend[i], pend[i + 1])
    oracle.attach(head, mod)
    pend.remove(mod)
    step += 1

print(f"\n{forms[pend[0]]} becomes the root")
