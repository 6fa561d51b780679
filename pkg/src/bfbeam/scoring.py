"""Additively decomposable scoring functions.

An adapter turns a model's next-token log-probabilities into per-step score
contributions and supplies two length-based quantities used by the search:
a heuristic (future reward estimate, zero for finished hypotheses) and an
upper bound on how much a hypothesis' score can still grow.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import ConfigError, DecoderInput, Hypothesis

RATIO = "ratio"
NMAX = "nmax"


class ScoreAdapter:
    """Base adapter: plain log-probability scoring."""

    name = "logprob"
    monotonic = True

    def step(self, model, inp: DecoderInput, tokens: Sequence[int]) -> np.ndarray:
        """Score contribution of each output token appended to ``tokens``."""
        return model.logprobs(inp, tokens)

    def heuristic(self, inp: DecoderInput, h: Hypothesis) -> float:
        return self.heuristic_at(inp, len(h), h.is_complete)

    def heuristic_at(self, inp: DecoderInput, length: int, complete: bool) -> float:
        """Heuristic as a function of length and completion status only."""
        return 0.0

    def upper_bound(self, inp: DecoderInput, length: int) -> float:
        return 0.0

    def _logprob_terms(self, model, inp, tokens):
        return [float(model.logprobs(inp, tokens[:i])[tokens[i]])
                for i in range(1, len(tokens))]

    def sequence_score(self, model, inp: DecoderInput, tokens: Sequence[int]) -> float:
        """Full-sequence score computed from scratch (not incrementally)."""
        return math.fsum(self._logprob_terms(model, inp, tuple(tokens)))


LogProbAdapter = ScoreAdapter


@dataclass(frozen=True)
class LengthNormParams:
    beta: float
    bound_mode: str = NMAX
    r: float = 1.0

    def __post_init__(self):
        if self.beta < 0:
            raise ConfigError("beta must be >= 0")
        if self.bound_mode not in (RATIO, NMAX):
            raise ConfigError(f"unknown bound mode {self.bound_mode!r}")
        if self.r <= 0:
            raise ConfigError("r must be > 0")


def ln_bound(params: LengthNormParams, inp: DecoderInput) -> float:
    if params.bound_mode == NMAX:
        return float(inp.n_max)
    b = params.r * len(inp.x)
    if b >= inp.n_max:
        raise ConfigError(f"r*|x| = {b} must be below n_max = {inp.n_max}")
    return b


def ln_reward(beta: float, b: float, current_length: int) -> float:
    # increment of beta * min(b, length) when length grows by one
    return beta * (min(b, current_length + 1) - min(b, current_length))


def ln_step(base_step: np.ndarray, beta: float, b: float, current_length: int) -> np.ndarray:
    return base_step + ln_reward(beta, b, current_length)


def ln_heuristic(beta: float, b: float, h: Hypothesis) -> float:
    if h.is_complete:
        return 0.0
    return beta * max(b - len(h), 0.0)


def ln_upper_bound(beta: float, b: float, length: int) -> float:
    return beta * max(0.0, b - length)


class LengthNormAdapter(ScoreAdapter):
    """``score + beta * min(b, N_y)`` with ``b`` either ``r|x|`` or ``n_max``."""

    name = "ln"

    def __init__(self, params: LengthNormParams):
        self.params = params
        self.monotonic = params.beta == 0

    def step(self, model, inp, tokens):
        b = ln_bound(self.params, inp)
        return ln_step(model.logprobs(inp, tokens), self.params.beta, b, len(tokens) - 1)

    def heuristic_at(self, inp, length, complete):
        if complete:
            return 0.0
        return ln_upper_bound(self.params.beta, ln_bound(self.params, inp), length)

    def upper_bound(self, inp, length):
        return ln_upper_bound(self.params.beta, ln_bound(self.params, inp), length)

    def sequence_score(self, model, inp, tokens):
        tokens = tuple(tokens)
        b = ln_bound(self.params, inp)
        return math.fsum(self._logprob_terms(model, inp, tokens)) \
            + self.params.beta * min(b, len(tokens) - 1)


@dataclass(frozen=True)
class PmiParams:
    lam: float
    eps: float

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigError("lambda must be >= 0")
        if not 0 < self.eps <= 1:
            raise ConfigError("epsilon must be in (0, 1]")


def pmi_step(cond_step: np.ndarray, lm_step: np.ndarray, params: PmiParams) -> np.ndarray:
    # log max(p, eps) == max(log p, log eps); clamping is per token
    if params.lam == 0:
        return cond_step
    return cond_step - params.lam * np.maximum(lm_step, math.log(params.eps))


def pmi_upper_bound(params: PmiParams, n_max: int, length: int) -> float:
    return -params.lam * math.log(params.eps) * max(n_max - length, 0)


def pmi_heuristic(params: PmiParams, n_max: int, h: Hypothesis) -> float:
    if h.is_complete:
        return 0.0
    return pmi_upper_bound(params, n_max, len(h))


class PmiAdapter(ScoreAdapter):
    """``log p(y|x) - lam * sum_t log max(p_lm(y_t | y_<t), eps)``."""

    name = "pmi"

    def __init__(self, params: PmiParams, lm):
        self.params = params
        self.lm = lm
        self.monotonic = params.lam == 0 or params.eps == 1

    def step(self, model, inp, tokens):
        return pmi_step(model.logprobs(inp, tokens), self.lm.logprobs(None, tokens), self.params)

    def heuristic_at(self, inp, length, complete):
        return 0.0 if complete else pmi_upper_bound(self.params, inp.n_max, length)

    def upper_bound(self, inp, length):
        return pmi_upper_bound(self.params, inp.n_max, length)

    def sequence_score(self, model, inp, tokens):
        tokens = tuple(tokens)
        floor = math.log(self.params.eps)
        lm_terms = [max(float(self.lm.logprobs(None, tokens[:i])[tokens[i]]), floor)
                    for i in range(1, len(tokens))]
        return math.fsum(self._logprob_terms(model, inp, tokens)) \
            - self.params.lam * math.fsum(lm_terms)


def stop_generalized(best_complete: Optional[Hypothesis], agenda_best: Optional[Hypothesis],
                     adapter: ScoreAdapter, inp: DecoderInput) -> bool:
    """Stop once no live hypothesis can still overtake the best finished one."""
    if best_complete is None:
        return False
    if agenda_best is None:
        return True
    return best_complete.score >= agenda_best.score + adapter.upper_bound(inp, len(agenda_best))


def check_monotonic(adapter: ScoreAdapter, model, trials: int, seed: int,
                    inp: Optional[DecoderInput] = None, max_len: int = 6) -> bool:
    """Search random prefixes for a step with positive contribution."""
    rng = np.random.default_rng(seed)
    vocab = model.vocab
    regular = np.array(vocab.regular_ids)
    if inp is None:
        inp = DecoderInput((0,), n_max=max_len + 2)
    for _ in range(trials):
        n = int(rng.integers(0, max_len + 1))
        tokens = (vocab.bos_id,) + tuple(int(t) for t in rng.choice(regular, size=n))
        if np.any(adapter.step(model, inp, tokens) > 0):
            return False
    return True
