"""Probabilities and gradients of the three objective terms.

Gradient assertions compare the analytic values against central finite
differences of the loss, with the closed-form sigmoid switched on (the
lookup table is piecewise constant, so differentiating it is hopeless).
"""

import numpy as np
import pytest

import hdv.model as model
from hdv.corpus import Vocabulary, corpus_from_sequences
from hdv.model import (
    ModelParams,
    TrainConfig,
    TrainingExample,
    context_vector,
    example_loss,
    init_params,
    loss_and_grads,
    sgd_update,
    sigmoid,
    target_distribution,
    target_probability,
)

from helpers import finite_difference_grads, make_random_params, random_example, relative_error

EMPTY = np.empty(0, dtype=np.int32)


def stream_example(target, docs):
    return TrainingExample("stream", target, np.array(docs, dtype=np.int32), EMPTY)


class TestSigmoid:
    def test_table_tracks_exact_within_bucket_width(self):
        xs = np.linspace(-8, 8, 1001)
        model.set_exact_sigmoid(True)
        exact = sigmoid(xs)
        model.set_exact_sigmoid(False)
        table = sigmoid(xs)
        assert np.max(np.abs(exact - table)) < 5e-3

    def test_saturates_outside_range(self):
        lo, hi = sigmoid(-100.0), sigmoid(100.0)
        assert lo == sigmoid(-6.5)
        assert hi == sigmoid(6.5)
        assert 0.0 < lo < 0.01 and 0.99 < hi < 1.0

    def test_exact_mode_closed_form(self, exact_sigmoid):
        assert sigmoid(0.0) == pytest.approx(0.5)
        assert sigmoid(2.0) == pytest.approx(1 / (1 + np.exp(-2.0)), rel=1e-12)
        assert sigmoid(-700.0) >= 0.0  # stable far into the tail


class TestTrainConfig:
    def test_defaults_valid(self):
        cfg = TrainConfig()
        assert cfg.dim == 100
        assert cfg.stream_window == 5
        assert cfg.word_window == 5
        assert cfg.alpha == 1.0
        assert cfg.epochs == 5

    @pytest.mark.parametrize(
        "kw",
        [
            {"dim": 0},
            {"stream_window": 0},
            {"word_window": 0},
            {"alpha": -0.5},
            {"lr0": 0.0},
            {"lr_min": 0.0},
            {"lr_min": 0.5, "lr0": 0.1},
            {"epochs": 0},
            {"softmax_mode": "nah"},
            {"stream_mode": "sideways"},
            {"model_mode": "lda"},
            {"workers": 0},
            {"subsample": 1.0},
        ],
    )
    def test_invalid_rejected(self, kw):
        with pytest.raises(ValueError):
            TrainConfig(**kw)


def tiny_corpus():
    return corpus_from_sequences(
        [["A", "B"], ["B", "A"]],
        {"A": ["x", "y"], "B": ["y", "z", "x"]},
        min_count_word=1,
    )


class TestInitParams:
    def test_shapes_bounds_and_zero_outputs(self):
        corpus = tiny_corpus()
        params = init_params(corpus, TrainConfig(dim=4, softmax_mode="exact", seed=0))
        assert params.doc_in.shape == (2, 4)
        assert params.word_in.shape == (3, 4)
        assert np.all(np.abs(params.doc_in) <= 0.125)
        assert np.all(np.abs(params.word_in) <= 0.125)
        assert not params.doc_out.any() and not params.word_out.any()

    def test_hierarchical_allocates_node_rows(self):
        corpus = tiny_corpus()
        params = init_params(corpus, TrainConfig(dim=4, softmax_mode="hierarchical"))
        assert params.doc_out.shape == (1, 4)
        assert params.word_out.shape == (2, 4)
        assert params.doc_tree is not None and params.word_tree is not None

    def test_same_seed_identical(self):
        corpus = tiny_corpus()
        a = init_params(corpus, TrainConfig(dim=4, seed=11))
        b = init_params(corpus, TrainConfig(dim=4, seed=11))
        assert np.array_equal(a.doc_in, b.doc_in)
        assert np.array_equal(a.word_in, b.word_in)

    def test_empty_modality_rejected(self):
        empty_words = corpus_from_sequences(
            [["A"]], {"A": ["x"]}, min_count_word=99
        )
        with pytest.raises(ValueError):
            init_params(empty_words, TrainConfig(dim=2))


class TestContextVector:
    def test_doc_plus_word_average(self):
        rng = np.random.default_rng(0)
        params = make_random_params(rng, docs=2, words=2, dim=2, softmax_mode="exact")
        params.doc_in[0] = [1.0, 0.0]
        params.word_in[1] = [0.0, 1.0]
        v = context_vector(params, [0], [1])
        assert np.allclose(v, [0.5, 0.5])

    def test_words_only_mean(self):
        rng = np.random.default_rng(0)
        params = make_random_params(rng, docs=1, words=2, dim=2, softmax_mode="exact")
        params.word_in[0] = [2.0, 0.0]
        params.word_in[1] = [0.0, 2.0]
        assert np.allclose(context_vector(params, [], [0, 1]), [1.0, 1.0])

    def test_full_window_denominator(self):
        rng = np.random.default_rng(0)
        params = make_random_params(rng, docs=1, words=30, dim=3, softmax_mode="exact")
        words = list(range(10))
        v = context_vector(params, [0], words)
        manual = (params.doc_in[0] + params.word_in[words].sum(axis=0)) / 11
        assert np.allclose(v, manual)

    def test_duplicates_count_twice(self):
        rng = np.random.default_rng(0)
        params = make_random_params(rng, docs=1, words=2, dim=2, softmax_mode="exact")
        v = context_vector(params, [], [1, 1])
        assert np.allclose(v, params.word_in[1])

    def test_empty_context_rejected(self):
        rng = np.random.default_rng(0)
        params = make_random_params(rng, docs=1, words=1, dim=2, softmax_mode="exact")
        with pytest.raises(ValueError):
            context_vector(params, [], [])


class TestProbabilities:
    def test_zero_outputs_give_uniform_exact(self):
        rng = np.random.default_rng(1)
        params = make_random_params(rng, docs=5, words=3, dim=4, softmax_mode="exact")
        params.doc_out[:] = 0.0
        ex = stream_example(3, [1])
        assert target_probability(params, ex) == pytest.approx(1 / 5, rel=1e-12)

    def test_two_target_closed_form(self):
        rng = np.random.default_rng(1)
        params = make_random_params(rng, docs=2, words=1, dim=1, softmax_mode="exact")
        params.doc_in[0] = [1.0]
        params.doc_out[0] = [np.log(3.0)]
        params.doc_out[1] = [0.0]
        ex = stream_example(0, [0])
        assert target_probability(params, ex) == pytest.approx(0.75, rel=1e-12)
        assert target_probability(params, stream_example(1, [0])) == pytest.approx(0.25, rel=1e-12)

    def test_zero_nodes_give_uniform_hierarchical(self, exact_sigmoid):
        rng = np.random.default_rng(1)
        params = make_random_params(rng, docs=4, words=2, dim=3, softmax_mode="hierarchical")
        params.doc_vocab = Vocabulary([f"d{i}" for i in range(4)], np.ones(4, dtype=np.int64))
        from hdv.huffman import build_tree

        params.doc_tree = build_tree([1, 1, 1, 1])
        params.doc_out = np.zeros((3, 3))
        for target in range(4):
            assert target_probability(params, stream_example(target, [0])) == pytest.approx(0.25)

    @pytest.mark.parametrize("mode", ["exact", "hierarchical"])
    def test_distribution_sums_to_one(self, mode, exact_sigmoid):
        rng = np.random.default_rng(7)
        for _ in range(20):
            docs = int(rng.integers(1, 33))
            words = int(rng.integers(1, 33))
            params = make_random_params(rng, docs=docs, words=words, dim=5, softmax_mode=mode)
            ex = random_example(rng, params)
            dist = target_distribution(params, ex)
            # the oracle: sum individual probabilities one target at a time
            brute = sum(
                target_probability(params, ex._replace(target=j)) for j in range(len(dist))
            )
            assert brute == pytest.approx(1.0, abs=1e-9)
            assert np.all(dist >= 0)
            assert float(dist.sum()) == pytest.approx(1.0, abs=1e-9)
            assert dist[ex.target] == pytest.approx(target_probability(params, ex), rel=1e-9)

    def test_single_leaf_probability_one(self, exact_sigmoid):
        rng = np.random.default_rng(3)
        params = make_random_params(rng, docs=1, words=2, dim=3, softmax_mode="hierarchical")
        assert target_probability(params, stream_example(0, [0])) == 1.0
        assert example_loss(params, stream_example(0, [0])) == 0.0


class TestLossAndGrads:
    def test_loss_is_negative_log_probability(self, exact_sigmoid):
        rng = np.random.default_rng(5)
        for mode in ("exact", "hierarchical"):
            params = make_random_params(rng, docs=6, words=6, dim=4, softmax_mode=mode)
            ex = random_example(rng, params)
            loss, _ = loss_and_grads(params, ex)
            p = target_probability(params, ex)
            weight = 1.0 if ex.kind == "stream" else params.config.alpha
            assert loss == pytest.approx(-weight * np.log(p), rel=1e-10)
            assert example_loss(params, ex) == pytest.approx(loss, rel=1e-10)

    def test_symmetric_point_gradients(self):
        # all-zero parameters: loss ln M, output grads (p - onehot) * input = 0
        corpus = tiny_corpus()
        params = init_params(corpus, TrainConfig(dim=4, softmax_mode="exact", seed=0))
        params.doc_in[:] = 0.0
        ex = stream_example(1, [0])
        loss, grads = loss_and_grads(params, ex)
        assert loss == pytest.approx(np.log(2))
        for g in grads["doc_out"].values():
            assert np.allclose(g, 0.0)

    def test_alpha_zero_kills_word_and_content(self, exact_sigmoid):
        rng = np.random.default_rng(6)
        params = make_random_params(rng, docs=4, words=4, dim=3, softmax_mode="exact", alpha=0.0)
        for kind, target, docs, words in (
            ("word", 1, [0], [2, 3]),
            ("content", 2, [], [0, 1, 2]),
        ):
            ex = TrainingExample(
                kind, target, np.array(docs, dtype=np.int32), np.array(words, dtype=np.int32)
            )
            loss, grads = loss_and_grads(params, ex)
            assert loss == 0.0
            for table in grads.values():
                for g in table.values():
                    assert np.allclose(g, 0.0)

    @pytest.mark.parametrize("mode", ["exact", "hierarchical"])
    @pytest.mark.parametrize("kind", ["stream", "word", "content"])
    def test_gradients_match_finite_differences(self, mode, kind, exact_sigmoid):
        rng = np.random.default_rng(hash((mode, kind)) % 2**32)
        for trial in range(6):
            alpha = float(rng.uniform(0.3, 2.0))
            params = make_random_params(
                rng,
                docs=int(rng.integers(2, 10)),
                words=int(rng.integers(2, 10)),
                dim=int(rng.integers(2, 9)),
                softmax_mode=mode,
                alpha=alpha,
            )
            while True:
                ex = random_example(rng, params)
                if ex.kind == kind:
                    break
            loss, grads = loss_and_grads(params, ex)
            numeric = finite_difference_grads(params, ex)
            for table_name, rows in numeric.items():
                for r, num in rows.items():
                    ana = grads.get(table_name, {}).get(r, np.zeros_like(num))
                    assert relative_error(ana, num) <= 1e-4, (
                        f"{mode}/{kind} table {table_name} row {r}"
                    )

    def test_input_gradient_shared_across_duplicates(self, exact_sigmoid):
        rng = np.random.default_rng(9)
        params = make_random_params(rng, docs=3, words=4, dim=3, softmax_mode="exact")
        ex = TrainingExample(
            "word", 2, np.array([1], dtype=np.int32), np.array([0, 0, 3], dtype=np.int32)
        )
        loss, grads = loss_and_grads(params, ex)
        numeric = finite_difference_grads(params, ex)
        assert relative_error(grads["word_in"][0], numeric["word_in"][0]) <= 1e-4
        assert relative_error(grads["word_in"][3], numeric["word_in"][3]) <= 1e-4
        # every contributor gets grad/denominator per occurrence, so the
        # word appearing twice carries exactly double the share
        assert np.allclose(grads["word_in"][0], 2 * grads["word_in"][3], atol=1e-12)


class TestSgdUpdate:
    @pytest.mark.parametrize("mode", ["exact", "hierarchical"])
    @pytest.mark.parametrize("use_exact_sigmoid", [True, False])
    def test_matches_reference_application(self, mode, use_exact_sigmoid):
        model.set_exact_sigmoid(use_exact_sigmoid)
        try:
            rng = np.random.default_rng(11)
            for _ in range(10):
                params = make_random_params(
                    rng, docs=5, words=5, dim=4, softmax_mode=mode,
                    alpha=float(rng.uniform(0.0, 2.0)),
                )
                twin = ModelParams(
                    config=params.config,
                    word_vocab=params.word_vocab,
                    doc_vocab=params.doc_vocab,
                    doc_in=params.doc_in.copy(),
                    word_in=params.word_in.copy(),
                    doc_out=params.doc_out.copy(),
                    word_out=params.word_out.copy(),
                    doc_tree=params.doc_tree,
                    word_tree=params.word_tree,
                )
                ex = random_example(rng, params)
                lr = 0.07
                loss_ref, grads = loss_and_grads(twin, ex)
                for table_name, rows in grads.items():
                    table = getattr(twin, table_name)
                    for r, g in rows.items():
                        table[r] -= lr * g
                loss_fused = sgd_update(params, ex, lr)
                assert loss_fused == pytest.approx(loss_ref, rel=1e-12, abs=1e-12)
                for name in ("doc_in", "word_in", "doc_out", "word_out"):
                    assert np.allclose(
                        getattr(params, name), getattr(twin, name), rtol=1e-12, atol=1e-14
                    ), name
        finally:
            model.set_exact_sigmoid(False)

    def test_small_step_strictly_decreases_loss(self, exact_sigmoid):
        rng = np.random.default_rng(12)
        for mode in ("exact", "hierarchical"):
            params = make_random_params(rng, docs=6, words=6, dim=4, softmax_mode=mode)
            ex = random_example(rng, params)
            before = example_loss(params, ex)
            sgd_update(params, ex, 0.01)
            after = example_loss(params, ex)
            assert after < before

    def test_finite_check_flag_runs(self):
        rng = np.random.default_rng(13)
        params = make_random_params(rng, docs=4, words=4, dim=3, softmax_mode="hierarchical")
        model.CHECK_FINITE = True
        try:
            sgd_update(params, random_example(rng, params), 0.05)
        finally:
            model.CHECK_FINITE = False
