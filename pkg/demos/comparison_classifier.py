r"""
Learning which of two settings is better
----------------------------------------
Fifty measured settings give 50 * 49 ordered pairs, each labeled 1 when its
first setting performs strictly better. A classifier trained on those pairs
can then be asked whether an unmeasured setting beats the best one seen.
"""
import numpy as np

from pairtune.benchmarks import get_benchmark
from pairtune.classifier import DECISION_TREE, GBT, LOGISTIC, fit_samples, winner_recall
from pairtune.induction import build_training_set, induce_pair
from pairtune.sampling import lhs

f = get_benchmark("workload-shift", 4)
X = lhs(4, 50, seed=1)
y = f(X)
pairs = build_training_set(X, y)
print(len(pairs), "pairs,", int(pairs.labels.sum()), "labeled 1")

#%%
# The pivot is the best training sample. Known winners are random settings
# that truly beat it.
pivot = X[np.argmax(y)]
rng = np.random.default_rng(2)
cand = rng.random((200_000, 4))
winners = cand[f(cand) > y.max()][:50]
losers = cand[f(cand) <= y.max()][:2000]
print(len(winners), "held-out winners")

#%%
# Recall on winners alone rewards a model that calls everything a winner,
# so the rate at which losers are flagged is printed next to it.
for kind in (GBT, DECISION_TREE, LOGISTIC):
    clf = fit_samples(X, y, kind)
    flagged = clf.predict(induce_pair(losers, pivot)).mean()
    print(f"{kind:<24} train acc {clf.train_accuracy:.3f}  "
          f"winner recall {winner_recall(clf, winners, pivot):.3f}  losers flagged {flagged:.3f}")
