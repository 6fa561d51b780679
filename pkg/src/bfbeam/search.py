"""Agenda-based decoding.

``decode`` runs one generic loop whose behavior is fixed by four choice
points (comparator, stopping rule, beam width, heuristic). Named presets
recover standard beam search, best-first beam search, A* beam search and
their unbounded counterparts. ``beam_search_reference`` is a direct
breadth-first implementation used as the differential oracle.

Finished hypotheses are padded with EOS up to ``n_max`` so that every
decoder compares hypotheses of equal length in the final beam. Results are
reported without the padding.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Tuple

from .agenda import LENGTH_FIRST, SCORE_FIRST, BeamAgenda, Comparator
from .core import (ConfigError, DecoderInput, Hypothesis, SearchResult, result_key)
from .scoring import ScoreAdapter

ALL_COMPLETE = "all-complete"
PEEK_COMPLETE = "peek-complete"
GENERALIZED = "generalized"
ES_EARLY = "es-early"
SHRINKING = "shrinking"
STOP_RULES = (ALL_COMPLETE, PEEK_COMPLETE, GENERALIZED, ES_EARLY, SHRINKING)

STOP_ALIASES = {
    "all": ALL_COMPLETE, "peek": PEEK_COMPLETE, "gen": GENERALIZED,
    "es": ES_EARLY, "early": ES_EARLY, "shrink": SHRINKING,
}

PRESETS = ("beam", "bf_beam", "astar_beam", "bfs", "best_first", "astar", "greedy")

TraceEntry = Tuple[Tuple[int, ...], float, int]


@dataclass(frozen=True)
class SearchStrategy:
    """The four choice points plus operational switches.

    Attributes:
        name: preset name, informational.
        comparator: pop order.
        stop_rule: one of ``STOP_RULES``.
        k: beam width, or None for unbounded.
        use_heuristic: add the adapter's heuristic to priorities.
        memory_gamma: cap the agenda at ``k * memory_gamma`` hypotheses.
        topk_mode: keep going until ``k`` finished hypotheses are found.
        record_trace: keep the list of popped hypotheses in the stats.
    """

    name: str
    comparator: Comparator
    stop_rule: str
    k: Optional[int]
    use_heuristic: bool = False
    memory_gamma: Optional[int] = None
    topk_mode: bool = False
    record_trace: bool = False

    def __post_init__(self):
        if self.stop_rule not in STOP_RULES:
            raise ConfigError(f"unknown stop rule {self.stop_rule!r}")
        if self.k is not None and self.k < 1:
            raise ConfigError("k must be positive")
        if self.memory_gamma is not None:
            if self.k is None:
                raise ConfigError("memory_gamma requires a finite k")
            if self.memory_gamma < 1:
                raise ConfigError("memory_gamma must be >= 1")
            if self.comparator.kind != SCORE_FIRST:
                raise ConfigError("memory-reduced mode needs a score-first strategy")
        if self.topk_mode and self.k is None:
            raise ConfigError("topk_mode requires a finite k")
        if self.stop_rule in (ES_EARLY, SHRINKING) and self.k is None:
            raise ConfigError(f"{self.stop_rule} requires a finite k")


@dataclass
class DecodeStats:
    score_calls: int = 0
    pops: int = 0
    pushes: int = 0
    peak_active: int = 0
    terminated_early: bool = False
    guaranteed: bool = True
    trace: Optional[List[TraceEntry]] = field(default=None, repr=False)


def make_strategy(name: str, k: Optional[int] = None, stop_rule: Optional[str] = None,
                  memory_gamma: Optional[int] = None, topk_mode: bool = False,
                  record_trace: bool = False) -> SearchStrategy:
    """Build one of the named presets, optionally overriding the stop rule."""
    if name not in PRESETS:
        raise ConfigError(f"unknown strategy {name!r}")
    if name in ("bfs", "best_first", "astar"):
        if k is not None:
            raise ConfigError(f"{name} requires unbounded k")
    elif name == "greedy":
        if k not in (None, 1):
            raise ConfigError("greedy has k = 1")
        k = 1
    elif k is None:
        raise ConfigError(f"{name} requires a finite k")
    if name in ("beam", "bfs", "greedy"):
        comp, stop = LENGTH_FIRST, ALL_COMPLETE
    else:
        comp, stop = SCORE_FIRST, PEEK_COMPLETE
    if stop_rule is not None:
        stop = STOP_ALIASES.get(stop_rule, stop_rule)
    return SearchStrategy(name=name, comparator=Comparator(comp), stop_rule=stop, k=k,
                          use_heuristic=name in ("astar_beam", "astar"),
                          memory_gamma=memory_gamma, topk_mode=topk_mode,
                          record_trace=record_trace)


def _finish(results: List[Hypothesis], k: Optional[int], stats: DecodeStats) -> SearchResult:
    top = sorted((h.canonical() for h in results), key=result_key)
    if k is not None:
        top = top[:k]
    return SearchResult(best=top[0] if top else None, top_k=top, stats=stats)


def _heuristic_fn(adapter: ScoreAdapter, inp: DecoderInput,
                  strategy: SearchStrategy) -> Tuple[Optional[Callable[[int, bool], float]], bool]:
    """Returns (h(length, complete) or None for zero, whether h depends on length only)."""
    if strategy.use_heuristic:
        return (lambda n, c: adapter.heuristic_at(inp, n, c)), False
    if strategy.stop_rule == GENERALIZED and not adapter.monotonic:
        # order by score + U(|y|); U is length-only and consistent
        return (lambda n, c: adapter.upper_bound(inp, n)), True
    return None, True


def decode(inp: DecoderInput, model, adapter: ScoreAdapter,
           strategy: SearchStrategy) -> SearchResult:
    """Run the agenda-based decoder under ``strategy``."""
    if strategy.stop_rule == ES_EARLY:
        return decode_es(inp, model, adapter, strategy.k)
    if strategy.stop_rule == SHRINKING:
        return decode_shrinking(inp, model, adapter, strategy.k)

    vocab = model.vocab
    eos = vocab.eos_id
    n_out = vocab.n_outputs
    n_max = inp.n_max
    k = strategy.k
    cap = k * strategy.memory_gamma if strategy.memory_gamma is not None else None
    agenda = BeamAgenda(k, n_max, strategy.comparator, capacity_limit=cap)
    stats = DecodeStats(guaranteed=adapter.monotonic or strategy.stop_rule == GENERALIZED)
    trace: Optional[List[TraceEntry]] = [] if strategy.record_trace else None
    stats.trace = trace
    hfun, length_only = _heuristic_fn(adapter, inp, strategy)
    score_first = strategy.comparator.kind == SCORE_FIRST
    need = k if strategy.topk_mode else 1
    # a search that may continue after accepting must reserve the padded slots
    occupy = strategy.topk_mode or strategy.stop_rule == GENERALIZED
    results: List[Hypothesis] = []

    def record(h: Hypothesis, length: int) -> None:
        agenda.record_pop(length)
        stats.pops += 1
        if trace is not None:
            trace.append((h.tokens, h.score, length))
        if k is not None and agenda.pops[length] == k:
            agenda.prune_stale(length)

    def push(h: Hypothesis) -> None:
        if agenda.push(h) is not h:
            stats.pushes += 1
        stats.peak_active = max(stats.peak_active, agenda.total_size)

    def pad(h: Hypothesis) -> Hypothesis:
        hv = hfun(len(h) + 1, True) if hfun else 0.0
        return h.extend(eos, 0.0, hv)

    def final_live(h: Hypothesis) -> bool:
        # h can be padded to n_max without its priority changing and every
        # beam it would pass through still has a free pop slot
        if not score_first:
            return False
        for t in range(len(h), n_max + 1):
            if not agenda.is_live(t):
                return False
            if hfun is not None and t > len(h) and h.score + hfun(t, True) != h.priority:
                return False
        return True

    def should_stop() -> bool:
        if len(results) >= need:
            return True
        if strategy.topk_mode or strategy.stop_rule != GENERALIZED or not results:
            return False
        best = min(results, key=result_key)
        for t, top in agenda.beam_bests():
            if not agenda.is_live(t):
                continue
            if length_only:
                s = top.score
            else:
                s = max(h.score for h in agenda.beams[t])
            if best.score < s + adapter.upper_bound(inp, t):
                return False
        return True

    root = Hypothesis.root(vocab)
    if hfun is not None:
        root = replace(root, priority=hfun(0, False))
    push(root)
    while True:
        while agenda and not agenda.is_live(len(agenda.peek())):
            agenda.pop()
        if should_stop():
            stats.terminated_early = bool(agenda)
            break
        if not agenda:
            break
        if agenda.n_incomplete == 0 and strategy.stop_rule == ALL_COMPLETE \
                and min(agenda.beams) < n_max:
            stats.terminated_early = True
        top = agenda.peek()
        if top.is_complete and len(top) < n_max and final_live(top):
            agenda.pop()
            h = top
            for t in range(len(top), n_max + 1):
                if t > len(top):
                    h = pad(h)
                if occupy or t == len(top):
                    record(h, t)
            results.append(h)
            continue
        y = agenda.pop()
        n = len(y)
        record(y, n)
        if y.is_complete:
            if n == n_max:
                results.append(y)
            else:
                push(pad(y))
            continue
        step = adapter.step(model, inp, y.tokens)
        stats.score_calls += 1
        h_inc = hfun(n + 1, False) if hfun else 0.0
        h_eos = hfun(n + 1, True) if hfun else 0.0
        # an unfinished prefix of length n_max has no valid completion
        for tok in ((eos,) if n + 1 == n_max else range(n_out)):
            s = y.score + float(step[tok])
            p = s + (h_eos if tok == eos else h_inc)
            if agenda.quick_reject(n + 1, p):
                continue
            push(Hypothesis(y.tokens + (tok,), s, p, eos))
    return _finish(results, k, stats)


def decode_memory_reduced(inp: DecoderInput, model, adapter: ScoreAdapter,
                          strategy: SearchStrategy) -> SearchResult:
    """``decode`` with the agenda capped at ``k * gamma`` hypotheses."""
    if strategy.memory_gamma is None:
        raise ConfigError("strategy has no memory_gamma")
    if strategy.name not in ("bf_beam", "astar_beam"):
        raise ConfigError("memory-reduced mode applies to bf_beam and astar_beam")
    return decode(inp, model, adapter, strategy)


def _expand_beam(beam: List[Hypothesis], model, adapter, inp, k, stats, only_incomplete=False):
    """All valid one-step extensions of ``beam`` (finished members padded), top-k."""
    if not beam:
        return []
    eos = model.vocab.eos_id
    final = len(beam[0]) + 1 == inp.n_max
    toks = (eos,) if final else range(model.vocab.n_outputs)
    cand = []
    for y in beam:
        if y.is_complete:
            if not only_incomplete:
                cand.append(y.extend(eos, 0.0))
            continue
        step = adapter.step(model, inp, y.tokens)
        stats.score_calls += 1
        for tok in toks:
            s = y.score + float(step[tok])
            cand.append(Hypothesis(y.tokens + (tok,), s, s, eos))
    cand.sort(key=result_key)
    return cand[:k] if k is not None else cand


def _trace_beam(stats, beam, t):
    stats.pops += len(beam)
    if stats.trace is not None:
        stats.trace.extend((h.tokens, h.score, t) for h in beam)


def beam_search_reference(inp: DecoderInput, model, adapter: ScoreAdapter,
                          k: Optional[int], record_trace: bool = False) -> SearchResult:
    """Breadth-first beam search: ``B_t = top-k`` of all extensions of ``B_{t-1}``.

    Returns the best finished member of ``B_{n_max}`` and all finished
    members as ``top_k``. ``k=None`` keeps every hypothesis (exhaustive).
    """
    stats = DecodeStats(guaranteed=True, trace=[] if record_trace else None)
    beam = [Hypothesis.root(model.vocab)]
    _trace_beam(stats, beam, 0)
    for t in range(1, inp.n_max + 1):
        beam = _expand_beam(beam, model, adapter, inp, k, stats)
        _trace_beam(stats, beam, t)
        stats.peak_active = max(stats.peak_active, len(beam))
    return _finish([h for h in beam if h.is_complete], k, stats)


def decode_es(inp: DecoderInput, model, adapter: ScoreAdapter, k: int) -> SearchResult:
    """Beam search that stops once the best finished hypothesis in the current
    beam is at least the best unfinished one (plus its upper bound)."""
    stats = DecodeStats(guaranteed=adapter.monotonic)
    beam = [Hypothesis.root(model.vocab)]
    stats.pops += 1
    for t in range(1, inp.n_max + 1):
        beam = _expand_beam(beam, model, adapter, inp, k, stats)
        stats.pops += len(beam)
        stats.peak_active = max(stats.peak_active, len(beam))
        done = [h for h in beam if h.is_complete]
        active = [h for h in beam if not h.is_complete]
        if done and t < inp.n_max:
            bound = max((h.score for h in active), default=None)
            if bound is None or done[0].score >= bound + adapter.upper_bound(inp, t):
                stats.terminated_early = True
                return _finish(done[:1], k, stats)
    return _finish([h for h in beam if h.is_complete], k, stats)


def decode_shrinking(inp: DecoderInput, model, adapter: ScoreAdapter, k: int) -> SearchResult:
    """Beam search whose width drops by one for every finished hypothesis.

    Finished hypotheses are set aside; the search ends when the width reaches
    zero, when no active hypothesis can overtake the best finished one, or at
    ``n_max``.
    """
    stats = DecodeStats(guaranteed=False)
    width = k
    active = [Hypothesis.root(model.vocab)]
    finished: List[Hypothesis] = []
    stats.pops += 1
    for t in range(1, inp.n_max + 1):
        beam = _expand_beam(active, model, adapter, inp, width, stats, only_incomplete=True)
        stats.pops += len(beam)
        stats.peak_active = max(stats.peak_active, len(beam) + len(finished))
        done = [h for h in beam if h.is_complete]
        finished.extend(done)
        width -= len(done)
        active = [h for h in beam if not h.is_complete]
        if width <= 0 or not active:
            break
        if finished and t < inp.n_max:
            best = min(finished, key=result_key)
            if best.score >= active[0].score + adapter.upper_bound(inp, t):
                stats.terminated_early = True
                break
    return _finish(finished, k, stats)


def trace(inp: DecoderInput, model, adapter: ScoreAdapter,
          strategy: SearchStrategy) -> Tuple[SearchResult, List[TraceEntry]]:
    """Decode with tracing on; returns the result and the pop trace."""
    res = decode(inp, model, adapter, replace(strategy, record_trace=True))
    return res, res.stats.trace
