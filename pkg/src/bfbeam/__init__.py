"""Best-first beam search and related agenda-based decoders."""

from .agenda import LENGTH_FIRST, SCORE_FIRST, BeamAgenda, Comparator
from .core import (BOS, EOS, BudgetExceeded, ConfigError, DecoderInput, DecodingError,
                   EmptyError, Hypothesis, ModelError, SearchResult, Vocabulary,
                   default_n_max, extend, is_complete, result_key, validate_output)
from .heap import BoundedMinMaxHeap
from .models import (NgramLm, SourceMixtureModel, TableModel, char_corpus, dump_table_model,
                     lm_step, load_table_model, random_model, read_corpus, step_logprob,
                     synthetic_sentences, train_ngram)
from .scoring import (LengthNormAdapter, LengthNormParams, LogProbAdapter, PmiAdapter,
                      PmiParams, ScoreAdapter, check_monotonic, ln_bound, ln_heuristic,
                      ln_step, ln_upper_bound, pmi_heuristic, pmi_step, pmi_upper_bound,
                      stop_generalized)
from .search import (DecodeStats, SearchStrategy, beam_search_reference, decode, decode_es,
                     decode_memory_reduced, decode_shrinking, make_strategy, trace)

__version__ = "0.1.0"
