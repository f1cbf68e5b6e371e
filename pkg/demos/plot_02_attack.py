"""
Greedy word-substitution attack
===============================

Rank words by deletion importance, then swap in embedding neighbours or
typos until the prediction flips.
"""

from textshift import AttackConfig, Preprocessor, greedy_attack, load_embeddings, render_result, summarize
from textshift import fit_vocabulary, load_dataset, split, train
from textshift.fixtures import fixture_path

docs = load_dataset(fixture_path("mr"))
train_docs, test_docs = split(docs, 0.2, 0)
pre = Preprocessor()
pairs = [(pre(d.text, d.id), d.label) for d in train_docs]
model = train(pairs, fit_vocabulary([p for p, _ in pairs]))

# 50-d vectors; synonyms sit near cosine 0.85
store = load_embeddings(fixture_path("glove"))

config = AttackConfig(max_percent_words=0.4, max_queries=500, seed=0)
results = []
for d in test_docs[:20]:
    doc = pre(d.text, d.id)
    result = greedy_attack(model, doc, d.label, config, store)
    results.append(result)
    if result.status.value == "Success" and len(results) <= 8:
        print(render_result(result, doc))
        print("   ", [(s.original, s.replacement, s.kind) for s in result.substitutions], result.queries, "queries\n")

summary = summarize(results)
print("success rate:", summary.success_rate)
print("words changed: %.3f" % summary.avg_percent_words_changed)
print("queries per success: %.1f" % summary.avg_queries)
