"""
How explanations move under attack
==================================

Explain a review before and after a successful attack and measure how much
the top features shift.
"""

from textshift import (
    AttackConfig,
    LimeConfig,
    Preprocessor,
    align,
    apply_substitutions,
    compare,
    explain,
    fit_vocabulary,
    greedy_attack,
    load_dataset,
    load_embeddings,
    split,
    train,
)
from textshift.fixtures import fixture_path

docs = load_dataset(fixture_path("mr"))
train_docs, test_docs = split(docs, 0.2, 0)
pre = Preprocessor()
pairs = [(pre(d.text, d.id), d.label) for d in train_docs]
model = train(pairs, fit_vocabulary([p for p, _ in pairs]))
store = load_embeddings(fixture_path("glove"))

# both explanations target class 1 so the weights line up
lime = LimeConfig(target_class=1)
shown = 0
for d in test_docs:
    doc = pre(d.text, d.id)
    result = greedy_attack(model, doc, d.label, AttackConfig(), store)
    if result.status.value != "Success":
        continue
    after = apply_substitutions(doc, result.substitutions)
    report = compare(
        explain(model, doc, lime),
        explain(model, after, lime),
        result.original_pred,
        result.final_pred,
        align(doc, result.substitutions),
    )
    print(report.transition_text)
    print("  before:", doc.cleaned_text)
    print("  after: ", after.cleaned_text)
    print("  top-K jaccard %.2f, spearman %s, sign flips %d" % (report.topk_jaccard, report.spearman_rho, report.sign_flips))
    for t in report.aligned:
        if t.changed:
            print("  %s -> %s: weight %+.3f -> %+.3f" % (t.token_before, t.token_after, t.weight_before, t.weight_after))
    shown += 1
    if shown == 3:
        break
