import math

import pytest

from bfbeam import (ConfigError, DecoderInput, LengthNormAdapter, LengthNormParams,
                    LogProbAdapter, PmiAdapter, PmiParams, SCORE_FIRST, LENGTH_FIRST,
                    beam_search_reference, decode, decode_es, decode_memory_reduced,
                    decode_shrinking, load_table_model, make_strategy, trace, validate_output)
from bfbeam.oracle import exhaustive_best
from helpers import TOY1_BEST_SCORE, bounded_instance, random_lm, suite_instance, toy1

LP = LogProbAdapter()


@pytest.mark.parametrize("name,k,comp,stop,heur,kk", [
    ("beam", 5, LENGTH_FIRST, "all-complete", False, 5),
    ("bf_beam", 5, SCORE_FIRST, "peek-complete", False, 5),
    ("astar_beam", 5, SCORE_FIRST, "peek-complete", True, 5),
    ("bfs", None, LENGTH_FIRST, "all-complete", False, None),
    ("best_first", None, SCORE_FIRST, "peek-complete", False, None),
    ("astar", None, SCORE_FIRST, "peek-complete", True, None),
    ("greedy", None, LENGTH_FIRST, "all-complete", False, 1),
])
def test_presets(name, k, comp, stop, heur, kk):
    s = make_strategy(name, k)
    assert (s.comparator.kind, s.stop_rule, s.use_heuristic, s.k) == (comp, stop, heur, kk)


@pytest.mark.parametrize("args", [
    ("bfs", 5), ("best_first", 3), ("astar", 1), ("beam", None), ("greedy", 2),
    ("nope", 3), ("bf_beam", 0), ("bf_beam", 3, "sometimes"),
])
def test_preset_errors(args):
    with pytest.raises(ConfigError):
        make_strategy(*args)


@pytest.mark.parametrize("kwargs", [
    dict(name="best_first", memory_gamma=2), dict(name="beam", k=3, memory_gamma=2),
    dict(name="bf_beam", k=3, memory_gamma=0), dict(name="best_first", topk_mode=True),
])
def test_strategy_invariants(kwargs):
    with pytest.raises(ConfigError):
        make_strategy(**kwargs)


def test_stop_alias():
    assert make_strategy("bf_beam", 3, stop_rule="gen").stop_rule == "generalized"


def test_toy1_greedy():
    m = toy1()
    inp = DecoderInput((0,), 5)
    res = decode(inp, m, LP, make_strategy("greedy"))
    assert m.vocab.decode(res.best.tokens) == ["<bos>", "a", "<eos>"]
    assert res.best.score == pytest.approx(TOY1_BEST_SCORE, abs=1e-12)
    assert res.best.tokens == exhaustive_best(inp, m, LP).tokens
    ref = beam_search_reference(inp, m, LP, 1)
    assert ref.best == res.best


def test_reference_returns_k_complete():
    m = toy1()
    res = beam_search_reference(DecoderInput((0,), 5), m, LP, 3)
    assert len(res.top_k) == 3
    assert all(validate_output(h, m.vocab, 5) for h in res.top_k)
    keys = [(-h.score, h.tokens) for h in res.top_k]
    assert keys == sorted(keys)


def test_reference_counts():
    m = toy1()
    res = beam_search_reference(DecoderInput((0,), 3), m, LP, 2)
    # B0={bos}, B1={a,b}, B2={a eos, a a}: expansions 1 + 2 + 1
    assert res.stats.score_calls == 4
    assert res.stats.pops == 1 + 2 + 2 + 2


@pytest.mark.parametrize("seed", range(60))
def test_bf_beam_matches_reference(seed):
    model, inp, k = suite_instance(seed)
    ref = beam_search_reference(inp, model, LP, k)
    bf = decode(inp, model, LP, make_strategy("bf_beam", k))
    assert bf.best == ref.best
    if bf.best is not None:
        assert bf.best.score == ref.best.score
    assert bf.stats.score_calls <= ref.stats.score_calls
    assert bf.stats.pops <= ref.stats.pops
    top = decode(inp, model, LP, make_strategy("bf_beam", k, topk_mode=True))
    assert [h.tokens for h in top.top_k] == [h.tokens for h in ref.top_k]
    assert decode(inp, model, LP, make_strategy("beam", k)).best == ref.best


def test_terminated_early_flag():
    model, inp, k = suite_instance(4)
    res = decode(inp, model, LP, make_strategy("bf_beam", k))
    assert res.stats.terminated_early
    assert res.stats.score_calls < beam_search_reference(inp, model, LP, k).stats.score_calls


@pytest.mark.parametrize("name,k", [("bf_beam", 2), ("beam", 2), ("best_first", None)])
def test_n_max_one_allows_only_empty_output(name, k):
    m = toy1()
    res = decode(DecoderInput((0,), 1), m, LP, make_strategy(name, k))
    assert res.best.tokens == (m.vocab.bos_id, m.vocab.eos_id)
    assert res.best.score == pytest.approx(math.log(0.1))


ES_FIXTURE = """vocab: a b <eos>
order: 1
ctx <bos> | 0.9 0.05 0.05
ctx a     | 0.04 0.04 0.92
ctx b     | 0.4 0.3 0.3
"""


def test_es_stops_when_top_beam_finishes():
    m = load_table_model(ES_FIXTURE)
    inp = DecoderInput((0,), 10)
    es = decode_es(inp, m, LP, 2)
    ref = beam_search_reference(inp, m, LP, 2)
    assert es.best == ref.best and len(es.best) == 2
    assert es.stats.terminated_early
    assert es.stats.score_calls < ref.stats.score_calls


@pytest.mark.parametrize("seed", range(40))
def test_es_and_shrinking(seed):
    model, inp, k = suite_instance(seed)
    ref = beam_search_reference(inp, model, LP, k)
    es = decode(inp, model, LP, make_strategy("bf_beam", k, stop_rule="es-early"))
    assert es.best == ref.best and es.stats.score_calls <= ref.stats.score_calls
    sh = decode_shrinking(inp, model, LP, k)
    assert sh.best is None or validate_output(sh.best, model.vocab, inp.n_max)


@pytest.mark.parametrize("seed", range(20))
def test_shrinking_width_one_is_greedy(seed):
    model, inp, _ = suite_instance(seed)
    greedy = decode(inp, model, LP, make_strategy("greedy"))
    assert decode_shrinking(inp, model, LP, 1).best == greedy.best


@pytest.mark.parametrize("seed", range(30))
@pytest.mark.parametrize("gamma", [1, 2, 5])
def test_memory_reduced_valid(seed, gamma):
    model, inp, k = suite_instance(seed)
    res = decode_memory_reduced(inp, model, LP, make_strategy("bf_beam", k, memory_gamma=gamma))
    assert res.best is None or validate_output(res.best, model.vocab, inp.n_max)
    assert res.stats.peak_active <= k * gamma


@pytest.mark.parametrize("seed", range(30))
def test_memory_reduced_nmax_is_exact(seed):
    model, inp, k = suite_instance(seed)
    plain = decode(inp, model, LP, make_strategy("bf_beam", k))
    capped = decode(inp, model, LP, make_strategy("bf_beam", k, memory_gamma=inp.n_max))
    assert capped.best == plain.best and capped.stats.score_calls == plain.stats.score_calls


def test_memory_reduced_rejects_other_strategies():
    with pytest.raises(ConfigError):
        decode_memory_reduced(DecoderInput((0,), 4), toy1(), LP, make_strategy("bf_beam", 2))


def _bounded_adapters(model, seed, x_len, n_max):
    lm = random_lm(model, seed)
    return {
        "ln-nmax": LengthNormAdapter(LengthNormParams(0.5, "nmax")),
        "ln-ratio": LengthNormAdapter(LengthNormParams(1.0, "ratio", 1.5)),
        "pmi": PmiAdapter(PmiParams(0.05, 1e-4), lm),
    }


@pytest.mark.parametrize("seed", range(40))
def test_generalized_stop_matches_reference(seed):
    model, inp, k = bounded_instance(seed)
    for name, ad in _bounded_adapters(model, seed, len(inp.x), inp.n_max).items():
        ref = beam_search_reference(inp, model, ad, k)
        res = decode(inp, model, ad, make_strategy("bf_beam", k, stop_rule="generalized"))
        assert res.best == ref.best, name
        assert res.stats.guaranteed


def test_unbounded_non_monotonic_flags_no_guarantee():
    model, inp, k = bounded_instance(0)
    ad = LengthNormAdapter(LengthNormParams(0.5))
    assert not decode(inp, model, ad, make_strategy("bf_beam", k)).stats.guaranteed


@pytest.mark.parametrize("seed", range(30))
def test_astar_degenerate_heuristic(seed):
    model, inp, k = bounded_instance(seed)
    bf = decode(inp, model, LP, make_strategy("bf_beam", k))
    for ad in (LengthNormAdapter(LengthNormParams(0.0)),
               PmiAdapter(PmiParams(0.0, 1e-4), random_lm(model, seed))):
        assert decode(inp, model, ad, make_strategy("astar_beam", k)).best == bf.best


@pytest.mark.parametrize("seed", range(30))
def test_pop_trace_properties(seed):
    model, inp, k = suite_instance(seed)
    res, tr = trace(inp, model, LP, make_strategy("bf_beam", k))
    by_len = {}
    for _, score, length in tr:
        by_len.setdefault(length, []).append(score)
    for scores in by_len.values():
        assert scores == sorted(scores, reverse=True)
    ref = beam_search_reference(inp, model, LP, k, record_trace=True)
    popped_by_ref = {(t, s) for t, s, _ in ref.stats.trace}
    assert all((t, s) in popped_by_ref for t, s, _ in tr)
    assert res.stats.score_calls <= res.stats.pops


def test_best_first_is_exact_on_toy():
    m = toy1()
    inp = DecoderInput((0,), 5)
    res = decode(inp, m, LP, make_strategy("best_first"))
    assert res.best.tokens == exhaustive_best(inp, m, LP).tokens
    bfs = decode(inp, m, LP, make_strategy("bfs"))
    assert bfs.best == res.best
    assert math.isclose(res.best.score, TOY1_BEST_SCORE)
