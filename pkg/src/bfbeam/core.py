"""Shared domain types: vocabularies, decoder inputs, hypotheses, results."""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple


class DecodingError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(DecodingError, ValueError):
    """Invalid combination of parameters."""


class ModelError(DecodingError):
    """A model file or model query could not be satisfied."""


class BudgetExceeded(DecodingError):
    """Exhaustive enumeration would exceed its state budget."""


class EmptyError(DecodingError, IndexError):
    """Pop or peek on an empty structure."""


BOS = "<bos>"
EOS = "<eos>"


@dataclass(frozen=True)
class Vocabulary:
    """Output tokens plus the two sentinels.

    Output tokens occupy ids ``0 .. n_outputs - 1`` (EOS among them) and BOS is
    always the last id, so a per-step score vector indexed by output id has
    length ``n_outputs``. Token order fixes lexicographic tie-breaking.
    """

    tokens: Tuple[str, ...]
    bos_id: int
    eos_id: int

    def __post_init__(self):
        n = len(self.tokens)
        if len(set(self.tokens)) != n:
            raise ConfigError("vocabulary tokens must be unique")
        if not (0 <= self.bos_id < n and 0 <= self.eos_id < n):
            raise ConfigError("bos_id/eos_id out of range")
        if self.bos_id == self.eos_id:
            raise ConfigError("bos_id must differ from eos_id")
        if self.bos_id != n - 1:
            raise ConfigError("BOS must be the last vocabulary entry")
        if n < 3:
            raise ConfigError("need at least one regular token besides BOS/EOS")

    @classmethod
    def build(cls, regular: Sequence[str], eos: str = EOS,
              bos: str = BOS) -> "Vocabulary":
        tokens = tuple(regular) + (eos, bos)
        return cls(tokens, bos_id=len(tokens) - 1, eos_id=tokens.index(eos))

    @property
    def n_outputs(self) -> int:
        return len(self.tokens) - 1

    @property
    def regular_ids(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.n_outputs) if i != self.eos_id)

    def index(self, token: str) -> int:
        try:
            return self.tokens.index(token)
        except ValueError:
            raise ModelError(f"unknown token {token!r}") from None

    def encode(self, words: Sequence[str]) -> Tuple[int, ...]:
        return tuple(self.index(w) for w in words)

    def decode(self, ids: Sequence[int]) -> List[str]:
        return [self.tokens[i] for i in ids]


@dataclass(frozen=True)
class DecoderInput:
    x: Tuple[int, ...]
    n_max: int
    key: Optional[str] = None

    def __post_init__(self):
        if self.n_max < 1:
            raise ConfigError("n_max must be >= 1")
        if len(self.x) == 0:
            raise ConfigError("source sequence must be non-empty")
        object.__setattr__(self, "x", tuple(self.x))

    @property
    def input_key(self) -> str:
        return self.key if self.key is not None else " ".join(map(str, self.x))


def default_n_max(x: Sequence[int]) -> int:
    return max(2 * len(x), 10)


@dataclass(frozen=True)
class Hypothesis:
    """An output prefix with its running score.

    ``tokens`` starts with BOS. ``priority`` is the score plus whatever
    heuristic value the search attached when the hypothesis was created.
    Once EOS is produced the hypothesis may only be re-extended with EOS,
    which leaves the score untouched.
    """

    tokens: Tuple[int, ...]
    score: float
    priority: float
    eos_id: int = field(compare=False, repr=False)

    @classmethod
    def root(cls, vocab: Vocabulary) -> "Hypothesis":
        return cls((vocab.bos_id,), 0.0, 0.0, vocab.eos_id)

    def __len__(self) -> int:
        # BOS does not count, EOS does
        return len(self.tokens) - 1

    @property
    def is_complete(self) -> bool:
        return len(self.tokens) > 1 and self.tokens[-1] == self.eos_id

    @property
    def last(self) -> int:
        return self.tokens[-1]

    def extend(self, token: int, step_score: float,
               heuristic_value: float = 0.0) -> "Hypothesis":
        if self.is_complete:
            if token != self.eos_id:
                raise ValueError("complete hypotheses may only be extended with EOS")
            score = self.score
        else:
            score = self.score + step_score
        return Hypothesis(self.tokens + (token,), score, score + heuristic_value,
                          self.eos_id)

    def canonical(self) -> "Hypothesis":
        """Strip EOS padding and drop the heuristic part of the priority."""
        toks = self.tokens
        if self.eos_id in toks:
            toks = toks[:toks.index(self.eos_id) + 1]
        return Hypothesis(toks, self.score, self.score, self.eos_id)


def extend(h: Hypothesis, t: int, step_score: float,
           heuristic_value: float = 0.0) -> Hypothesis:
    return h.extend(t, step_score, heuristic_value)


def is_complete(h: Hypothesis) -> bool:
    return h.is_complete


def validate_output(h: Hypothesis, vocab: Vocabulary, n_max: int) -> bool:
    """True iff ``h`` is BOS, then non-sentinel tokens, then a single EOS,
    with length (EOS counted) at most ``n_max``."""
    toks = h.tokens
    if len(toks) < 2 or toks[0] != vocab.bos_id or toks[-1] != vocab.eos_id:
        return False
    if any(t in (vocab.bos_id, vocab.eos_id) or not 0 <= t < len(vocab.tokens)
           for t in toks[1:-1]):
        return False
    return len(toks) - 1 <= n_max


def result_key(h: Hypothesis):
    """Sort key for finished hypotheses: best score first, then lexicographic."""
    return (-h.score, h.tokens)


@dataclass
class SearchResult:
    best: Optional[Hypothesis]
    top_k: List[Hypothesis]
    stats: "object"

    @property
    def found(self) -> bool:
        return self.best is not None
