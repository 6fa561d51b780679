import math

import numpy as np
import pytest

from bfbeam import (DecoderInput, ModelError, NgramLm, SourceMixtureModel, TableModel,
                    Vocabulary, char_corpus, dump_table_model, lm_step, load_table_model,
                    random_model, read_corpus, step_logprob, synthetic_sentences, train_ngram)
from helpers import toy1

INP = DecoderInput((0,), 5)


def logsumexp(v):
    m = np.max(v)
    return m + math.log(np.exp(v - m).sum())


def test_toy1_rows():
    m = toy1()
    v = m.vocab
    assert v.tokens[:3] == ("a", "b", "<eos>")
    assert len(m.contexts) == 3
    np.testing.assert_allclose(step_logprob(m, INP, (v.bos_id,)),
                               np.log([0.7, 0.2, 0.1]), atol=1e-12)
    np.testing.assert_allclose(step_logprob(m, INP, (v.bos_id, 0)),
                               np.log([0.3, 0.1, 0.6]), atol=1e-12)


def test_step_requires_bos():
    with pytest.raises(ValueError):
        step_logprob(toy1(), INP, (0,))


def test_uniform_model():
    v = Vocabulary.build(["a", "b", "c"])
    m = TableModel(v, 0, {(None, ()): np.full(4, 0.25)})
    np.testing.assert_allclose(m.logprobs(INP, (v.bos_id, 1, 2)), math.log(0.25))


@pytest.mark.parametrize("text", [
    "vocab: a <eos>\norder: 0\nctx | 0.5 0.4\n",          # sums to 0.9
    "vocab:\norder: 0\nctx | 1.0\n",                      # empty vocabulary
    "vocab: a <eos>\norder: 0\nctx | 1.0 0.0\n",          # zero probability
    "vocab: a b\norder: 0\nctx | 0.5 0.5\n",              # no EOS
    "vocab: a <eos>\norder: 1\nctx | 0.5 0.5\n",          # wrong context length
    "vocab: a <eos>\norder: 0\nctx | 0.5 x\n",            # non-numeric
    "vocab: a <eos>\norder: 0\n",                         # no rows
    "vocab: a <eos>\norder: 0\nctx 0.5 0.5\n",            # missing bar
    "vocab: a <eos>\norder: 0\nfoo\n",                    # junk line
    "vocab: a <eos>\norder: 1\nctx z | 0.5 0.5\n",        # unknown context token
])
def test_load_errors(text):
    with pytest.raises(ModelError):
        load_table_model(text)


def test_load_renormalizes_small_drift(caplog):
    m = load_table_model("vocab: a <eos>\norder: 0\nctx | 0.5000004 0.5\n")
    assert math.isclose(np.exp(m.logprobs(None, (2,))).sum(), 1.0, abs_tol=1e-12)
    assert "renormalizing" in caplog.text


def test_missing_context_and_backoff():
    text = "vocab: a <eos>\norder: 1\nctx <bos> | 0.5 0.5\n"
    with pytest.raises(ModelError):
        load_table_model(text).logprobs(None, (2, 0))
    m = load_table_model(text + "backoff: uniform\n")
    np.testing.assert_allclose(m.logprobs(None, (2, 0)), math.log(0.5))


def test_dump_round_trip():
    m = random_model(3, 4, 1)
    m2 = load_table_model(dump_table_model(m))
    for ctx in m.contexts:
        np.testing.assert_allclose(m.logprobs(None, ctx[1]), m2.logprobs(None, ctx[1]), atol=1e-12)


def test_random_model_deterministic():
    a, b = random_model(11, 5, 2), random_model(11, 5, 2)
    for key in a.contexts:
        np.testing.assert_array_equal(a.logprobs(None, key[1]), b.logprobs(None, key[1]))


def test_random_model_coverage():
    m = random_model(0, 3, 1)
    # BOS and the two regular tokens
    assert sorted(c for _, c in m.contexts) == [(0,), (1,), (3,)]


@pytest.mark.parametrize("seed", range(0, 1000, 7))
def test_random_model_rows_valid(seed):
    rng = np.random.default_rng(seed)
    m = random_model(seed, int(rng.integers(2, 9)), int(rng.integers(0, 3)))
    for _, ctx in m.contexts:
        row = m.logprobs(None, ctx)
        assert np.all(np.isfinite(row)) and np.all(row <= 0)
        assert abs(logsumexp(row)) < 1e-9


def test_order_m_uses_last_m_tokens():
    m = random_model(2, 4, 1)
    np.testing.assert_array_equal(m.logprobs(None, (4, 0, 1)), m.logprobs(None, (4, 2, 1)))


def test_ngram_counts():
    lm = train_ngram([["a", "a"]], 2, alpha=0.1)
    v = lm.vocab
    a = v.index("a")
    assert lm.prob((v.bos_id,), a) == pytest.approx((1 + 0.1) / (1 + 0.1 * v.n_outputs))
    # unseen context falls back to uniform
    assert lm.prob((v.eos_id,), a) == pytest.approx(1 / v.n_outputs)


def test_ngram_hand_counts():
    corpus = read_corpus("a b\nb b a\na\n")
    lm = train_ngram(corpus, 2, alpha=0.5)
    v = lm.vocab
    a, b, eos = v.index("a"), v.index("b"), v.eos_id
    # after "b": b->b once, b->a once, b->eos once
    row = np.exp(lm_step(lm, (v.bos_id, b)))
    n = v.n_outputs
    assert row[a] == pytest.approx((1 + 0.5) / (3 + 0.5 * n))
    assert row[eos] == pytest.approx((1 + 0.5) / (3 + 0.5 * n))
    # after BOS: a twice, b once
    row = np.exp(lm_step(lm, (v.bos_id,)))
    assert row[a] == pytest.approx((2 + 0.5) / (3 + 0.5 * n))


def test_unigram_ignores_prefix():
    lm = train_ngram([["a", "b"], ["b"]], 1)
    v = lm.vocab
    np.testing.assert_array_equal(lm_step(lm, (v.bos_id,)), lm_step(lm, (v.bos_id, 0, 1)))


def test_ngram_mass_sums_to_one():
    lines = char_corpus(synthetic_sentences(1, 50))
    lm = train_ngram(lines, 3)
    rng = np.random.default_rng(0)
    for _ in range(100):
        ctx = (lm.vocab.bos_id,) + tuple(int(t) for t in rng.choice(lm.vocab.regular_ids, 3))
        assert abs(logsumexp(lm_step(lm, ctx))) < 1e-9


def test_ngram_unknown_token():
    v = Vocabulary.build(["a"])
    with pytest.raises(ModelError):
        train_ngram([["a", "z"]], 2, vocab=v)


def test_source_mixture_depends_on_source():
    lm = train_ngram(char_corpus(synthetic_sentences(0, 40)), 2)
    m = SourceMixtureModel(lm, 0.3)
    v = lm.vocab
    x1, x2 = v.encode(list("cat")), v.encode(list("dog"))
    r1 = m.logprobs(DecoderInput(x1, 5), (v.bos_id,))
    r2 = m.logprobs(DecoderInput(x2, 5), (v.bos_id,))
    assert abs(logsumexp(r1)) < 1e-9 and not np.allclose(r1, r2)


def test_synthetic_sentences_deterministic():
    assert synthetic_sentences(4, 10) == synthetic_sentences(4, 10)
    assert char_corpus(["ab c"]) == [["a", "b", "_", "c"]]
