"""
Training a TF-IDF logistic classifier
=====================================

Fit a vocabulary and a linear model on the bundled review corpus, then
score held-out reviews.
"""

import numpy as np

from textshift import Preprocessor, TrainConfig, evaluate, fit_vocabulary, load_dataset, split, train
from textshift.fixtures import fixture_path

# 2,000 short reviews, labels 0 (negative) and 1 (positive)
docs = load_dataset(fixture_path("mr"))
train_docs, test_docs = split(docs, test_fraction=0.2, seed=0)
print(len(train_docs), "train /", len(test_docs), "test")

# stop words are flagged, not removed, so positions stay stable
pre = Preprocessor()
pairs = [(pre(d.text, d.id), d.label) for d in train_docs]
vocab = fit_vocabulary([doc for doc, _ in pairs])
print("vocabulary size:", len(vocab))

# mini-batch gradient descent, deterministic under the seed
losses = []
model = train(pairs, vocab, TrainConfig(seed=0), on_epoch=lambda epoch, loss: losses.append(loss))
print("loss: first epoch %.2f, last epoch %.2f" % (losses[0], losses[-1]))

print("test accuracy: %.3f" % evaluate(model, test_docs).accuracy)

# the heaviest weights in each direction
order = np.argsort(model.weights)
print("most negative:", [vocab.terms[i] for i in order[:5]])
print("most positive:", [vocab.terms[i] for i in order[-5:][::-1]])

# every scored text counts as one query
print(model.predict("a clever , gripping film").probs, "queries so far:", model.query_count)
