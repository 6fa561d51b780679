"""Brute-force enumeration of the output space, used to validate decoders."""

from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

from .core import BudgetExceeded, ConfigError, DecoderInput, Hypothesis, Vocabulary

DEFAULT_BUDGET = 200_000


@dataclass(frozen=True)
class EnumerationBudget:
    max_states: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.max_states < 1:
            raise ConfigError("max_states must be positive")


def space_size(n_regular: int, n_max: int) -> int:
    """Number of outputs ``BOS v EOS`` with ``len(v) + 1 <= n_max``."""
    return sum(n_regular ** ell for ell in range(n_max))


def _check(vocab: Vocabulary, n_max: int, budget: Optional[EnumerationBudget]) -> None:
    budget = budget or EnumerationBudget()
    size = space_size(len(vocab.regular_ids), n_max)
    if size > budget.max_states:
        raise BudgetExceeded(f"output space has {size} sequences, budget {budget.max_states}")


def _iter_tokens(vocab: Vocabulary, n_max: int) -> Iterator[Tuple[int, ...]]:
    # depth-first, yielding in lexicographic order of the token tuples
    regular = vocab.regular_ids
    eos = vocab.eos_id

    def rec(prefix):
        n = len(prefix) - 1
        # EOS may sort before or after regular tokens depending on its id
        for tok in sorted(regular + (eos,)):
            if tok == eos:
                yield prefix + (eos,)
            elif n + 2 <= n_max:
                yield from rec(prefix + (tok,))

    if n_max >= 1:
        yield from rec((vocab.bos_id,))


def enumerate_space(vocab: Vocabulary, n_max: int,
                    budget: Optional[EnumerationBudget] = None) -> List[Hypothesis]:
    """Every valid output of length at most ``n_max``, scores left at zero."""
    _check(vocab, n_max, budget)
    return [Hypothesis(t, 0.0, 0.0, vocab.eos_id) for t in _iter_tokens(vocab, n_max)]


def exhaustive_best(inp: DecoderInput, model, adapter,
                    budget: Optional[EnumerationBudget] = None) -> Hypothesis:
    """Global argmax of ``adapter.sequence_score`` over the output space.

    Scores are recomputed from scratch for every sequence. Ties go to the
    lexicographically smaller token sequence.
    """
    vocab = model.vocab
    _check(vocab, inp.n_max, budget)
    best_key = None
    for toks in _iter_tokens(vocab, inp.n_max):
        s = adapter.sequence_score(model, inp, toks)
        key = (-s, toks)
        if best_key is None or key < best_key:
            best_key = key
    return Hypothesis(best_key[1], -best_key[0], -best_key[0], vocab.eos_id)
