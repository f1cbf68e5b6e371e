import math
import threading

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from textshift.corpus import Document, Preprocessor
from textshift.features import fit_vocabulary, to_csr, transform
from textshift.model import (
    FunctionModel,
    LinearTextModel,
    Prediction,
    QueryView,
    TrainConfig,
    TrainingError,
    batch_loss_and_gradient,
    evaluate,
    fit_linear,
    loss_and_gradient,
    train,
)

PRE = Preprocessor()


def toy():
    pairs = [(PRE("good", 0), 1), (PRE("bad", 1), 0)]
    return pairs, fit_vocabulary([d for d, _ in pairs])


def zero_model(bias=0.0):
    _, vocab = toy()
    return LinearTextModel(vocab, np.zeros(len(vocab)), bias)


class TestPrediction:
    def test_tie_goes_to_class_zero(self):
        assert Prediction((0.5, 0.5)).predicted_class == 0

    def test_from_p1_clamps(self):
        assert Prediction.from_p1(1.5).probs == (0.0, 1.0)

    @given(st.floats(-1.0, 2.0))
    def test_simplex(self, p):
        probs = Prediction.from_p1(p).probs
        assert abs(sum(probs) - 1.0) <= 1e-9 and all(0 <= x <= 1 for x in probs)


class TestPredict:
    def test_zero_weights(self):
        assert zero_model().predict("anything at all").probs == (0.5, 0.5)

    def test_bias_only(self):
        m = zero_model(math.log(9))
        assert m.predict("good").probs[1] == pytest.approx(0.9)
        assert m.predict("").probs[1] == pytest.approx(0.9)

    def test_query_count(self):
        m = zero_model()
        m.predict("a")
        m.predict_batch(["a", "b", "c"])
        m.predict_batch([])
        assert m.query_count == 4

    def test_concurrent_counting(self):
        m = FunctionModel(lambda t: 0.3)
        threads = [threading.Thread(target=lambda: [m.predict("x") for _ in range(200)]) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert m.query_count == 1600

    def test_query_view(self):
        inner = FunctionModel(lambda t: 0.7)
        a, b = QueryView(inner), QueryView(inner)
        a.predict_batch(["x", "y"])
        b.predict("z")
        assert (a.query_count, b.query_count, inner.query_count) == (2, 1, 3)
        assert a.predict("x").probs[1] == pytest.approx(0.7)

    @settings(max_examples=30)
    @given(st.lists(st.text(max_size=20), max_size=10))
    def test_accounting_property(self, texts):
        m = zero_model(0.3)
        before = m.query_count
        preds = m.predict_batch(texts)
        assert m.query_count - before == len(texts) == len(preds)


class TestTrain:
    def test_separable(self):
        pairs, vocab = toy()
        model = train(pairs, vocab)
        assert [model.predict(t).predicted_class for t in ("good", "bad")] == [1, 0]

    def test_accepts_documents(self):
        _, vocab = toy()
        model = train([Document(0, "good", 1), Document(1, "bad", 0)], vocab)
        assert model.predict("good").predicted_class == 1

    def test_rejects_zero_epochs(self):
        with pytest.raises(ValueError):
            TrainConfig(epochs=0)

    @pytest.mark.parametrize("kw", [{"learning_rate": 0}, {"l2": -1}, {"head": "tree"}, {"batch_size": -1}])
    def test_config_validation(self, kw):
        with pytest.raises(ValueError):
            TrainConfig(**kw)

    def test_single_class(self):
        pairs, vocab = toy()
        with pytest.raises(TrainingError):
            train([pairs[0]], vocab)

    def test_deterministic(self):
        pairs, vocab = toy()
        a, b = train(pairs, vocab, TrainConfig(seed=3)), train(pairs, vocab, TrainConfig(seed=3))
        assert np.array_equal(a.weights, b.weights) and a.bias == b.bias

    def test_svm_head(self):
        pairs, vocab = toy()
        model = train(pairs, vocab, TrainConfig(head="svm"))
        assert model.head == "svm"
        assert model.predict("good").predicted_class == 1
        big = LinearTextModel(vocab, np.full(len(vocab), 1e3), 0.0, head="svm")
        assert big.predict("good").probs[1] == pytest.approx(1 / (1 + math.exp(-10)))

    def test_save_load_round_trip(self, tmp_path):
        pairs, vocab = toy()
        model = train(pairs, vocab)
        path = tmp_path / "sub" / "model.json"
        model.save(path)
        again = LinearTextModel.load(path)
        assert np.array_equal(again.weights, model.weights) and again.bias == model.bias
        assert again.vocab.terms == model.vocab.terms
        assert again.predict("good").probs == model.predict("good").probs

    def test_fixture_accuracy(self, fixture_model, mr_split):
        _, test = mr_split
        assert evaluate(fixture_model, test).accuracy >= 0.72


small_corpus = st.lists(
    st.tuples(st.lists(st.sampled_from(["good", "bad", "fine", "dull", "film", "plot"]), min_size=1, max_size=5), st.integers(0, 1)),
    min_size=2,
    max_size=12,
).filter(lambda rows: len({y for _, y in rows}) == 2)


@settings(max_examples=40, deadline=None)
@given(small_corpus)
def test_full_batch_loss_descent(rows):
    docs = [PRE(" ".join(words), i) for i, (words, _) in enumerate(rows)]
    vocab = fit_vocabulary(docs)
    X = to_csr([transform(d, vocab) for d in docs], len(vocab))
    y = np.array([lab for _, lab in rows], dtype=float)
    losses = []
    fit_linear(X, y, TrainConfig(learning_rate=0.01, epochs=30, batch_size=0), lambda e, loss: losses.append(loss))
    assert all(b <= a + 1e-8 for a, b in zip(losses, losses[1:]))


class TestLossAndGradient:
    def test_balanced_zero_model(self):
        X = np.eye(2)
        _, _, gb = loss_and_gradient(np.zeros(2), 0.0, X, np.array([1, 0]))
        assert gb == 0.0

    def test_saturated_correct(self):
        loss, gw, gb = loss_and_gradient(np.array([50.0]), 0.0, np.array([[1.0]]), np.array([1]))
        assert np.allclose(gw, 0, atol=1e-20) and abs(gb) < 1e-20 and loss < 1e-20

    def test_sparse_matches_dense(self):
        rng = np.random.default_rng(0)
        X = rng.random((6, 4))
        y = rng.integers(0, 2, 6)
        w = rng.normal(size=4)
        a = loss_and_gradient(w, 0.2, X, y, 0.1)
        b = loss_and_gradient(w, 0.2, sp.csr_matrix(X), y, 0.1)
        assert a[0] == pytest.approx(b[0]) and np.allclose(a[1], b[1]) and a[2] == pytest.approx(b[2])

    def test_batch_wrapper(self):
        pairs, vocab = toy()
        model = train(pairs, vocab)
        loss, gw, gb = batch_loss_and_gradient(model, pairs, l2=1e-4)
        assert loss > 0 and gw.shape == (len(vocab),)
        with pytest.raises(ValueError):
            batch_loss_and_gradient(model, [])

    @pytest.mark.parametrize("head", ["logistic", "svm"])
    def test_finite_differences(self, head):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(8, 5))
        y = rng.integers(0, 2, 8)
        w, b = rng.normal(size=5), 0.3
        if head == "svm":
            # keep away from the hinge kink
            w = w * 0.01
        _, gw, gb = loss_and_gradient(w, b, X, y, 0.05, head)
        h = 1e-5
        for j in range(5):
            e = np.zeros(5)
            e[j] = h
            num = (loss_and_gradient(w + e, b, X, y, 0.05, head)[0] - loss_and_gradient(w - e, b, X, y, 0.05, head)[0]) / (2 * h)
            assert num == pytest.approx(gw[j], rel=1e-4, abs=1e-8)
        num_b = (loss_and_gradient(w, b + h, X, y, 0.05, head)[0] - loss_and_gradient(w, b - h, X, y, 0.05, head)[0]) / (2 * h)
        assert num_b == pytest.approx(gb, rel=1e-4, abs=1e-8)


class TestEvaluate:
    def test_nine_of_ten(self):
        docs = [Document(i, "x", 1 if i < 9 else 0) for i in range(10)]
        result = evaluate(FunctionModel(lambda t: 0.9), docs)
        assert result.accuracy == pytest.approx(0.9)
        assert result.correct.count(False) == 1

    def test_complement(self, fixture_model, mr_split):
        test = mr_split[1][:100]
        flipped = [Document(d.id, d.text, 1 - d.label) for d in test]
        total = evaluate(fixture_model, test).accuracy + evaluate(fixture_model, flipped).accuracy
        assert total == pytest.approx(1.0)

    def test_empty(self):
        with pytest.raises(ValueError):
            evaluate(zero_model(), [])
