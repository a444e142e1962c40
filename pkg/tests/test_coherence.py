import math
from itertools import combinations

import numpy as np
import pytest

from conftest import make_corpus, random_token_corpus
from topicbench.coherence import (
    c_v,
    count_contexts,
    evaluate,
    npmi,
    save_report,
    u_mass,
)
from topicbench.errors import ModelError
from topicbench.topics import TopicModel

# ---------------------------------------------------------------------------
# brute-force oracles: direct transcriptions of the definitions, sharing no
# code with the module (dict counting, explicit window enumeration)
# ---------------------------------------------------------------------------


def brute_contexts(token_lists, mode, window_size=None):
    contexts = []
    for tokens in token_lists:
        if mode == "document" or len(tokens) <= window_size:
            contexts.append(set(tokens))
        else:
            for start in range(len(tokens) - window_size + 1):
                contexts.append(set(tokens[start : start + window_size]))
    return contexts


def brute_single(contexts, w):
    return sum(1 for c in contexts if w in c)


def brute_pair(contexts, w1, w2):
    return sum(1 for c in contexts if w1 in c and w2 in c)


def brute_u_mass(token_lists, topic_words):
    contexts = brute_contexts(token_lists, "document")
    scores = []
    for better, worse in combinations(topic_words, 2):
        denom = brute_single(contexts, worse)
        if denom == 0:
            continue
        scores.append(math.log((brute_pair(contexts, better, worse) + 1) / denom))
    return sum(scores) / len(scores) if scores else 0.0


def brute_npmi(contexts, w1, w2, eps):
    n = len(contexts)
    p1 = brute_single(contexts, w1) / n
    p2 = brute_single(contexts, w2) / n
    if p1 == 0 or p2 == 0:
        return 0.0
    p12 = brute_pair(contexts, w1, w2) / n
    val = math.log((p12 + eps) / (p1 * p2)) / (-math.log(p12 + eps))
    return max(-1.0, min(1.0, val))


def brute_c_v(token_lists, topic_words, window_size, eps):
    contexts = brute_contexts(token_lists, "window", window_size)
    words = list(dict.fromkeys(topic_words))
    vectors = {
        w: [brute_npmi(contexts, w, other, eps) for other in words] for w in words
    }
    summed = [sum(vectors[w][i] for w in words) for i in range(len(words))]
    sims = []
    for w in words:
        v = vectors[w]
        nv = math.sqrt(sum(x * x for x in v))
        ns = math.sqrt(sum(x * x for x in summed))
        if nv == 0 or ns == 0:
            sims.append(0.0)
            continue
        dot = sum(a * b for a, b in zip(v, summed))
        sims.append(dot / (nv * ns))
    return sum(sims) / len(sims)


# ---------------------------------------------------------------------------


class TestCountContexts:
    def test_window_two_hand_case(self):
        corpus = make_corpus([["a", "b", "c"]])
        counts = count_contexts(corpus, {"a", "b", "c"}, "window", 2)
        assert counts.n_contexts == 2
        assert counts.single_of("a") == 1
        assert counts.single_of("b") == 2
        assert counts.single_of("c") == 1
        assert counts.pair_of("a", "b") == 1
        assert counts.pair_of("a", "c") == 0

    def test_window_larger_than_doc_single_context(self):
        corpus = make_corpus([["a", "b"], ["c"]])
        counts = count_contexts(corpus, {"a", "b", "c"}, "window", 10)
        assert counts.n_contexts == 2
        assert counts.pair_of("a", "b") == 1

    def test_pair_symmetric(self):
        rng = np.random.default_rng(0)
        corpus = random_token_corpus(rng, 12, ["w%d" % i for i in range(6)])
        counts = count_contexts(corpus, ["w0", "w1", "w2", "w3"], "window", 3)
        assert np.array_equal(counts.pair, counts.pair.T)

    def test_bounds(self):
        rng = np.random.default_rng(1)
        corpus = random_token_corpus(rng, 10, ["a", "b", "c", "d"])
        counts = count_contexts(corpus, ["a", "b", "c"], "document")
        assert counts.n_contexts == 10
        for i in range(3):
            assert counts.single[i] <= counts.n_contexts
            for j in range(3):
                assert counts.pair[i, j] <= min(counts.single[i], counts.single[j])

    def test_matches_brute_force_both_modes(self):
        rng = np.random.default_rng(2)
        vocab = ["w%d" % i for i in range(7)]
        corpus = random_token_corpus(rng, 15, vocab, min_len=1, max_len=9)
        token_lists = [list(d.tokens) for d in corpus.documents]
        for mode, size in (("document", None), ("window", 3), ("window", 5)):
            counts = count_contexts(corpus, vocab, mode, size)
            contexts = brute_contexts(token_lists, mode, size)
            assert counts.n_contexts == len(contexts)
            for w in vocab:
                assert counts.single_of(w) == brute_single(contexts, w)
            for w1 in vocab:
                for w2 in vocab:
                    assert counts.pair_of(w1, w2) == brute_pair(contexts, w1, w2)

    def test_empty_word_set_rejected(self):
        corpus = make_corpus([["a"]])
        with pytest.raises(ModelError):
            count_contexts(corpus, [], "document")


class TestUMass:
    def test_spec_hand_case(self):
        corpus = make_corpus([["a", "b"], ["a", "c"], ["a", "b", "c"]])
        counts = count_contexts(corpus, {"a", "b"}, "document")
        score, used, skipped = u_mass(["a", "b"], counts)
        assert used == 1 and skipped == 0
        assert score == pytest.approx(math.log(1.5), abs=1e-12)

    def test_never_cooccurring_negative(self):
        corpus = make_corpus([["a"], ["b"], ["b"], ["b"]])
        counts = count_contexts(corpus, {"a", "b"}, "document")
        score, _, _ = u_mass(["a", "b"], counts)
        assert score == pytest.approx(math.log(1 / 3), abs=1e-12)
        assert score < 0

    def test_single_word_topic_zero(self):
        corpus = make_corpus([["a", "b"]])
        counts = count_contexts(corpus, {"a"}, "document")
        score, used, _ = u_mass(["a"], counts)
        assert score == 0.0 and used == 0

    def test_order_sensitive(self):
        corpus = make_corpus([["a", "b"], ["a"], ["a"], ["b", "a"]])
        counts = count_contexts(corpus, {"a", "b"}, "document")
        forward, _, _ = u_mass(["a", "b"], counts)
        backward, _, _ = u_mass(["b", "a"], counts)
        assert forward != backward

    def test_requires_document_mode(self):
        corpus = make_corpus([["a", "b"]])
        counts = count_contexts(corpus, {"a", "b"}, "window", 2)
        with pytest.raises(ModelError):
            u_mass(["a", "b"], counts)


class TestNpmi:
    def test_perfect_cooccurrence(self):
        corpus = make_corpus([["a", "b"], ["a", "b"], ["c"], ["c"]])
        counts = count_contexts(corpus, {"a", "b"}, "document")
        assert npmi("a", "b", counts) == pytest.approx(1.0, abs=1e-9)

    def test_independence_zero(self):
        # P(a)=1/2, P(b)=1/2, P(ab)=1/4 exactly
        corpus = make_corpus([["a", "b"], ["a"], ["b"], ["x"]])
        counts = count_contexts(corpus, {"a", "b"}, "document")
        assert npmi("a", "b", counts) == pytest.approx(0.0, abs=1e-9)

    def test_never_cooccur_tends_to_minus_one(self):
        corpus = make_corpus([["a"], ["b"]])
        counts = count_contexts(corpus, {"a", "b"}, "document")
        values = [npmi("a", "b", counts, epsilon=eps) for eps in (1e-6, 1e-12, 1e-100)]
        assert all(v >= -1.0 for v in values)
        assert values == sorted(values, reverse=True)  # decreasing toward -1
        assert values[-1] == pytest.approx(-1.0, abs=1e-2)

    def test_zero_marginal_defined_zero(self):
        corpus = make_corpus([["a"], ["a"]])
        counts = count_contexts(corpus, {"a", "zz"}, "document")
        assert npmi("a", "zz", counts) == 0.0

    def test_bounds_random(self):
        rng = np.random.default_rng(3)
        corpus = random_token_corpus(rng, 20, ["a", "b", "c", "d", "e"])
        counts = count_contexts(corpus, ["a", "b", "c", "d", "e"], "window", 2)
        for w1 in counts.words:
            for w2 in counts.words:
                val = npmi(w1, w2, counts)
                assert -1.0 <= val <= 1.0


class TestCv:
    def test_identical_words_degenerate_topic(self):
        corpus = make_corpus([["a", "b", "a"], ["a", "c"]])
        counts = count_contexts(corpus, {"a"}, "window", 2)
        score, zeros = c_v(["a", "a"], counts)
        assert score == pytest.approx(1.0, abs=1e-12)
        assert zeros == 0

    def test_bounds_random_topics(self):
        rng = np.random.default_rng(4)
        vocab = ["w%d" % i for i in range(8)]
        corpus = random_token_corpus(rng, 15, vocab)
        counts = count_contexts(corpus, vocab, "window", 4)
        for _ in range(10):
            topic = [vocab[i] for i in rng.choice(8, 3, replace=False)]
            score, _ = c_v(topic, counts)
            assert -1.0 <= score <= 1.0

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(5)
        vocab = ["w%d" % i for i in range(8)]
        corpus = random_token_corpus(rng, 6, vocab, min_len=2, max_len=10)
        token_lists = [list(d.tokens) for d in corpus.documents]
        counts = count_contexts(corpus, vocab, "window", 3)
        topic = ["w0", "w3", "w5"]
        ours, _ = c_v(topic, counts, epsilon=1e-12)
        oracle = brute_c_v(token_lists, topic, 3, 1e-12)
        assert ours == pytest.approx(oracle, abs=1e-9)

    def test_ranking_order_invariant(self):
        rng = np.random.default_rng(6)
        vocab = ["w%d" % i for i in range(6)]
        corpus = random_token_corpus(rng, 12, vocab)
        counts = count_contexts(corpus, vocab, "window", 3)
        a, _ = c_v(["w0", "w1", "w2"], counts)
        b, _ = c_v(["w2", "w0", "w1"], counts)
        assert a == pytest.approx(b, abs=1e-12)

    def test_requires_window_mode(self):
        corpus = make_corpus([["a", "b"]])
        counts = count_contexts(corpus, {"a", "b"}, "document")
        with pytest.raises(ModelError):
            c_v(["a", "b"], counts)


class TestCorpusDuplicationInvariance:
    def test_npmi_and_cv_exactly_invariant(self):
        rng = np.random.default_rng(7)
        vocab = ["w%d" % i for i in range(6)]
        corpus = random_token_corpus(rng, 8, vocab)
        doubled = make_corpus(
            [list(d.tokens) for d in corpus.documents] * 2
        )
        c1 = count_contexts(corpus, vocab, "window", 3)
        c2 = count_contexts(doubled, vocab, "window", 3)
        topic = vocab[:3]
        assert npmi("w0", "w1", c1) == pytest.approx(npmi("w0", "w1", c2), abs=1e-12)
        assert c_v(topic, c1)[0] == pytest.approx(c_v(topic, c2)[0], abs=1e-12)

    def test_u_mass_shift_matches_oracle(self):
        # the +1 smoothing makes u_mass shift under duplication by
        # ln((2p+1)/(p+1)) per pair minus the ln 2 denominator shift;
        # assert equality against the brute-force oracle on the doubled corpus
        rng = np.random.default_rng(8)
        vocab = ["w%d" % i for i in range(5)]
        corpus = random_token_corpus(rng, 10, vocab)
        token_lists = [list(d.tokens) for d in corpus.documents]
        doubled_lists = token_lists * 2
        doubled = make_corpus(doubled_lists)
        counts = count_contexts(doubled, vocab, "document")
        topic = vocab[:3]
        ours, _, _ = u_mass(topic, counts)
        assert ours == pytest.approx(brute_u_mass(doubled_lists, topic), abs=1e-12)


class TestEvaluate:
    def model_from(self, topic_word_lists):
        topics = tuple(
            (tid, tuple((w, float(len(words) - i)) for i, w in enumerate(words)))
            for tid, words in enumerate(topic_word_lists)
        )
        n_docs = 4
        return TopicModel(
            topics=topics,
            assignments=np.zeros(n_docs, dtype=np.int64),
            method="lda",
        )

    def test_absent_words_skipped_and_reported(self):
        corpus = make_corpus([["pay", "fee"], ["pay", "loan"], ["fee", "loan"], ["pay"]])
        model = self.model_from([["pay", "fee", "ghost"], ["loan", "phantom"]])
        report = evaluate(model, corpus, top_n=3, window_size=2)
        assert report.per_topic[0].skipped_words == ["ghost"]
        assert report.per_topic[1].skipped_words == ["phantom"]

    def test_all_absent_errors(self):
        corpus = make_corpus([["pay", "fee"]])
        model = self.model_from([["ghost", "phantom"]])
        with pytest.raises(ModelError, match="absent"):
            evaluate(model, corpus)

    def test_single_word_topic_reports_zero_umass(self):
        corpus = make_corpus([["pay", "fee"], ["pay"]])
        model = self.model_from([["pay"]])
        report = evaluate(model, corpus, top_n=5)
        assert report.per_topic[0].u_mass == 0.0

    def test_aggregate_is_mean(self):
        corpus = make_corpus([["pay", "fee", "loan"], ["pay", "fee"], ["loan", "pay"]])
        model = self.model_from([["pay", "fee"], ["loan", "pay"]])
        report = evaluate(model, corpus, top_n=2, window_size=2)
        assert report.aggregate_c_v == pytest.approx(
            np.mean([s.c_v for s in report.per_topic])
        )
        assert report.aggregate_u_mass == pytest.approx(
            np.mean([s.u_mass for s in report.per_topic])
        )

    def test_report_export_schema(self, tmp_path):
        corpus = make_corpus([["pay", "fee"], ["pay", "loan"]])
        model = self.model_from([["pay", "fee"]])
        report = evaluate(model, corpus, top_n=2)
        path = tmp_path / "report.json"
        save_report(report, path)
        import json

        payload = json.loads(path.read_text())
        assert set(payload) == {"aggregate", "per_topic", "params"}
        assert set(payload["aggregate"]) == {"c_v", "u_mass"}
        assert set(payload["per_topic"][0]) == {"topic", "c_v", "u_mass", "skipped_words"}
