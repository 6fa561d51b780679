"""Concrete next-token models.

Every model exposes ``logprobs(inp, prefix) -> np.ndarray`` over the output
ids of its vocabulary (``prefix`` is a token tuple starting with BOS). The
``inp`` argument may be None for models that ignore the source.
"""

import logging
import math
from collections import Counter, defaultdict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .core import BOS, EOS, ConfigError, DecoderInput, ModelError, Vocabulary

log = logging.getLogger(__name__)

PROB_FLOOR = 1e-12
NORM_TOL = 1e-6


def _context(prefix: Sequence[int], m: int, bos_id: int) -> Tuple[int, ...]:
    if m == 0:
        return ()
    ctx = tuple(prefix[-m:])
    if len(ctx) < m:
        ctx = (bos_id,) * (m - len(ctx)) + ctx
    return ctx


class TableModel:
    """Explicit conditional distributions keyed by the last ``order`` tokens.

    With ``input_keyed`` the table is keyed by ``(inp.input_key, context)``,
    otherwise by ``(None, context)``. Missing contexts raise ModelError unless
    ``backoff_uniform`` is set.
    """

    def __init__(self, vocab: Vocabulary, order: int,
                 table: Dict[Tuple[Optional[str], Tuple[int, ...]], np.ndarray],
                 input_keyed: bool = False, backoff_uniform: bool = False):
        if order < 0:
            raise ConfigError("order must be >= 0")
        self.vocab = vocab
        self.order = order
        self.input_keyed = input_keyed
        self.backoff_uniform = backoff_uniform
        self._logp = {}
        for key, probs in table.items():
            probs = np.asarray(probs, dtype=np.float64)
            if probs.shape != (vocab.n_outputs,):
                raise ModelError(f"row {key} has {probs.size} entries, "
                                 f"expected {vocab.n_outputs}")
            if np.any(probs <= 0) or abs(probs.sum() - 1.0) > 1e-9:
                raise ModelError(f"row {key} is not a strictly positive distribution")
            self._logp[key] = np.log(probs)
        self._uniform = np.full(vocab.n_outputs, -math.log(vocab.n_outputs))

    @property
    def contexts(self):
        return list(self._logp)

    def logprobs(self, inp: Optional[DecoderInput], prefix: Sequence[int]) -> np.ndarray:
        ctx = _context(prefix, self.order, self.vocab.bos_id)
        key = (inp.input_key if self.input_keyed and inp is not None else None, ctx)
        row = self._logp.get(key)
        if row is None:
            if self.backoff_uniform:
                return self._uniform
            raise ModelError(f"no distribution for context {key}")
        return row


def step_logprob(model, inp: Optional[DecoderInput], prefix: Sequence[int]) -> np.ndarray:
    if not prefix or prefix[0] != model.vocab.bos_id:
        raise ValueError("prefix must start with BOS")
    return model.logprobs(inp, prefix)


def _normalized_row(values: Sequence[float], where: str) -> np.ndarray:
    p = np.asarray(values, dtype=np.float64)
    if np.any(~np.isfinite(p)) or np.any(p <= 0):
        raise ModelError(f"{where}: probabilities must be finite and > 0")
    total = p.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise ModelError(f"{where}: row sums to {total:.6g}")
    if abs(total - 1.0) > 1e-12:
        log.warning("%s: renormalizing row summing to %.12g", where, total)
    p = np.maximum(p, PROB_FLOOR)
    return p / p.sum()


def load_table_model(text: str) -> TableModel:
    """Parse the line-oriented model format.

    ::

        # comment
        vocab: a b <eos>
        order: 1
        backoff: uniform          (optional)
        ctx <bos> | 0.7 0.2 0.1
        ctx a     | 0.3 0.1 0.6

    Probabilities follow vocabulary order. BOS is implicit and may appear in
    contexts as ``<bos>``.
    """
    vocab = None
    order = None
    backoff = False
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {lineno}"
        if line.startswith("vocab:"):
            toks = line[len("vocab:"):].split()
            if not toks:
                raise ModelError(f"{where}: empty vocabulary")
            if EOS not in toks:
                raise ModelError(f"{where}: vocabulary must contain {EOS}")
            if BOS in toks:
                raise ModelError(f"{where}: {BOS} is implicit")
            regular = [t for t in toks if t != EOS]
            if not regular:
                raise ModelError(f"{where}: need at least one regular token")
            try:
                vocab = Vocabulary(tuple(toks) + (BOS,), bos_id=len(toks),
                                   eos_id=toks.index(EOS))
            except ConfigError as e:
                raise ModelError(f"{where}: {e}") from None
        elif line.startswith("order:"):
            try:
                order = int(line[len("order:"):])
            except ValueError:
                raise ModelError(f"{where}: bad order") from None
            if order < 0:
                raise ModelError(f"{where}: order must be >= 0")
        elif line.startswith("backoff:"):
            backoff = line[len("backoff:"):].strip() == "uniform"
        elif line.startswith("ctx"):
            if "|" not in line:
                raise ModelError(f"{where}: missing '|'")
            left, right = line[3:].split("|", 1)
            try:
                probs = [float(v) for v in right.split()]
            except ValueError:
                raise ModelError(f"{where}: non-numeric probability") from None
            rows.append((where, left.split(), probs))
        else:
            raise ModelError(f"{where}: unrecognized line {raw!r}")
    if vocab is None:
        raise ModelError("missing vocab line")
    if order is None:
        raise ModelError("missing order line")
    if not rows:
        raise ModelError("no ctx rows")
    table = {}
    for where, ctx_toks, probs in rows:
        if len(ctx_toks) != order:
            raise ModelError(f"{where}: context length {len(ctx_toks)} != order {order}")
        ctx = vocab.encode(ctx_toks)
        if len(probs) != vocab.n_outputs:
            raise ModelError(f"{where}: expected {vocab.n_outputs} probabilities")
        if (None, ctx) in table:
            raise ModelError(f"{where}: duplicate context")
        table[(None, ctx)] = _normalized_row(probs, where)
    return TableModel(vocab, order, table, backoff_uniform=backoff)


def dump_table_model(model: TableModel) -> str:
    v = model.vocab
    lines = ["vocab: " + " ".join(v.tokens[:-1]), f"order: {model.order}"]
    if model.backoff_uniform:
        lines.append("backoff: uniform")
    for (key, ctx), row in sorted(model._logp.items(), key=lambda kv: kv[0][1]):
        probs = " ".join(repr(float(p)) for p in np.exp(row))
        lines.append("ctx " + " ".join(v.decode(ctx)) + " | " + probs)
    return "\n".join(lines) + "\n"


def random_vocab(vocab_size: int) -> Vocabulary:
    """``vocab_size`` output tokens (EOS included) plus BOS."""
    if vocab_size < 2:
        raise ConfigError("vocab_size must be >= 2")
    return Vocabulary.build([f"w{i}" for i in range(vocab_size - 1)])


def random_model(seed: int, vocab_size: int, order: int,
                 concentration: float = 1.0,
                 vocab: Optional[Vocabulary] = None) -> TableModel:
    """Table model with every context row drawn from a symmetric Dirichlet.

    ``vocab`` overrides the generated vocabulary (its size must match).
    """
    if vocab is None:
        vocab = random_vocab(vocab_size)
    elif vocab.n_outputs != vocab_size:
        raise ConfigError("vocab size mismatch")
    rng = np.random.default_rng(seed)
    # contexts range over BOS and regular tokens (EOS never precedes a step)
    symbols = (vocab.bos_id,) + vocab.regular_ids
    contexts = [()]
    for _ in range(order):
        contexts = [c + (s,) for c in contexts for s in symbols]
    table = {}
    for ctx in contexts:
        p = rng.dirichlet(np.full(vocab.n_outputs, concentration))
        p = np.maximum(p, PROB_FLOOR)
        table[(None, ctx)] = p / p.sum()
    return TableModel(vocab, order, table)


class NgramLm:
    """Additively smoothed n-gram model over a fixed vocabulary.

    ``p(t | ctx) = (count(ctx, t) + alpha) / (count(ctx) + alpha * |V|)``
    where ``ctx`` is the last ``order - 1`` tokens, BOS-padded.
    """

    def __init__(self, vocab: Vocabulary, order: int, alpha: float,
                 counts: Dict[Tuple[int, ...], Counter]):
        self.vocab = vocab
        self.order = order
        self.alpha = alpha
        self.counts = counts
        self._cache: Dict[Tuple[int, ...], np.ndarray] = {}

    def prob(self, ctx: Tuple[int, ...], token: int) -> float:
        c = self.counts.get(ctx)
        n = self.vocab.n_outputs
        if c is None:
            return 1.0 / n
        return (c[token] + self.alpha) / (sum(c.values()) + self.alpha * n)

    def logprobs(self, inp, prefix: Sequence[int]) -> np.ndarray:
        ctx = _context(prefix, self.order - 1, self.vocab.bos_id)
        row = self._cache.get(ctx)
        if row is None:
            n = self.vocab.n_outputs
            c = self.counts.get(ctx)
            if c is None:
                row = np.full(n, -math.log(n))
            else:
                num = np.full(n, self.alpha)
                for tok, cnt in c.items():
                    num[tok] += cnt
                row = np.log(num / num.sum())
            self._cache[ctx] = row
        return row


def lm_step(lm: NgramLm, prefix: Sequence[int]) -> np.ndarray:
    if not prefix or prefix[0] != lm.vocab.bos_id:
        raise ValueError("prefix must start with BOS")
    return lm.logprobs(None, prefix)


def corpus_vocab(corpus: Iterable[Sequence[str]]) -> Vocabulary:
    seen = sorted({tok for line in corpus for tok in line})
    return Vocabulary.build(seen)


def train_ngram(corpus: Sequence[Sequence[str]], order: int, alpha: float = 0.1,
                vocab: Optional[Vocabulary] = None) -> NgramLm:
    """Count ``order``-grams with BOS padding and a terminal EOS per line.

    Tokens missing from a supplied ``vocab`` raise ModelError.
    """
    if order < 1:
        raise ConfigError("order must be >= 1")
    if alpha <= 0:
        raise ConfigError("alpha must be > 0")
    corpus = [list(line) for line in corpus]
    if not corpus:
        raise ConfigError("corpus must be non-empty")
    if vocab is None:
        vocab = corpus_vocab(corpus)
    counts: Dict[Tuple[int, ...], Counter] = defaultdict(Counter)
    m = order - 1
    for line in corpus:
        ids = [vocab.bos_id] + list(vocab.encode(line)) + [vocab.eos_id]
        for i in range(1, len(ids)):
            counts[_context(ids[:i], m, vocab.bos_id)][ids[i]] += 1
    return NgramLm(vocab, order, alpha, dict(counts))


def read_corpus(text: str) -> List[List[str]]:
    return [line.split() for line in text.splitlines() if line.strip()]


class SourceMixtureModel:
    """Interpolates an LM with a smoothed bag-of-tokens of the source.

    ``p(t | y, x) = (1 - w) p_lm(t | y) + w q_x(t)`` where ``q_x`` is the
    add-one unigram distribution of the source tokens (EOS included in the
    support). Gives every source sentence its own output distribution while
    keeping the LM's local structure, a cheap stand-in for a transducer.
    """

    def __init__(self, lm: NgramLm, weight: float = 0.3):
        if not 0 <= weight < 1:
            raise ConfigError("weight must be in [0, 1)")
        self.lm = lm
        self.vocab = lm.vocab
        self.weight = weight
        self._src_cache: Dict[Tuple[int, ...], np.ndarray] = {}
        self._cache: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], np.ndarray] = {}

    def _source_dist(self, x: Tuple[int, ...]) -> np.ndarray:
        q = self._src_cache.get(x)
        if q is None:
            q = np.ones(self.vocab.n_outputs)
            for t in x:
                if t < self.vocab.n_outputs:
                    q[t] += 1
            q /= q.sum()
            self._src_cache[x] = q
        return q

    def logprobs(self, inp: Optional[DecoderInput], prefix: Sequence[int]) -> np.ndarray:
        if inp is None:
            return self.lm.logprobs(None, prefix)
        ctx = _context(prefix, self.lm.order - 1, self.vocab.bos_id)
        key = (inp.x, ctx)
        row = self._cache.get(key)
        if row is None:
            p = (1 - self.weight) * np.exp(self.lm.logprobs(None, prefix)) \
                + self.weight * self._source_dist(inp.x)
            row = np.log(p / p.sum())
            self._cache[key] = row
        return row


_WORDS = ("the a one some cat dog bird fish man woman child sees likes eats "
          "finds chases red small big old quick slow and with near over").split()


def synthetic_sentences(seed: int, n_lines: int, max_words: int = 6) -> List[str]:
    """Deterministic pseudo-English lines for char-level LM experiments."""
    rng = np.random.default_rng(seed)
    lines = []
    for _ in range(n_lines):
        n = int(rng.integers(2, max_words + 1))
        words = [_WORDS[int(i)] for i in rng.integers(0, len(_WORDS), size=n)]
        lines.append(" ".join(words))
    return lines


def char_corpus(lines: Sequence[str]) -> List[List[str]]:
    """Split lines into characters, spelling spaces as ``_``."""
    return [["_" if c == " " else c for c in line] for line in lines]
