"""
Local surrogate explanations
============================

Perturb a review by dropping words, weight each sample by its closeness to
the original, and fit a ridge model to the class-1 probability.
"""

import numpy as np

from textshift import LimeConfig, Preprocessor, explain, fit_vocabulary, load_dataset, split, train
from textshift.explain import sample_masks
from textshift.fixtures import fixture_path

docs = load_dataset(fixture_path("mr"))
train_docs, _ = split(docs, 0.2, 0)
pre = Preprocessor()
pairs = [(pre(d.text, d.id), d.label) for d in train_docs]
model = train(pairs, fit_vocabulary([p for p, _ in pairs]))

text = "steers turns in a snappy screenplay that curls at the edges ; it's so clever you want to hate it ."

# the first mask keeps every word; the rest drop between 1 and n of them
print(sample_masks(6, 4, seed=0))

expl = explain(model, text, LimeConfig(num_samples=1000, num_features=10, target_class=1))
print("p(class 1) = %.3f, fidelity R2 = %.3f" % (expl.prediction.probs[1], expl.fidelity_r2))
total = np.sum([abs(fw.weight) for fw in expl.token_weights])
for fw in expl.token_weights:
    print("%12s %+.4f  (%+.0f%%)" % (fw.token, fw.weight, 100 * fw.weight / total))

# write the highlighted page
from textshift.report import explanation_page

with open("explanation.html", "w", encoding="utf-8") as fh:
    fh.write(explanation_page(expl, pre(text)))
