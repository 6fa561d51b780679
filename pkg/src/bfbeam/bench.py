"""Benchmark harness: decode a set of instances under several strategies and
report scoring-call counts and search-error rates against beam search.

Example::

    bench --random 0,100,6,1 --strategy beam:5 --strategy bf_beam:5
    bench --model toy.txt --adapter ln:0.5,nmax --strategy astar_beam:3 --format json
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import (BudgetExceeded, ConfigError, DecoderInput, DecodingError, ModelError,
                   default_n_max)
from .models import load_table_model, random_model, read_corpus, train_ngram
from .oracle import EnumerationBudget, DEFAULT_BUDGET, exhaustive_best, space_size
from .scoring import LengthNormAdapter, LengthNormParams, LogProbAdapter, PmiAdapter, PmiParams
from .search import PRESETS, STOP_ALIASES, STOP_RULES, beam_search_reference, decode, make_strategy

HEADER = ("strategy", "k", "gamma", "mean_calls", "call_ratio", "search_err",
          "exact_match", "mean_pops")
EXIT_OK, EXIT_CONFIG, EXIT_BUDGET = 0, 2, 3
NMAX_GAMMA = "nmax"


@dataclass(frozen=True)
class StrategySpec:
    name: str
    k: Optional[int]
    stop: Optional[str] = None
    gamma: Union[int, str, None] = None

    @property
    def label(self) -> str:
        return self.name if self.stop is None else f"{self.name}/{self.stop}"

    @classmethod
    def parse(cls, text: str) -> "StrategySpec":
        """``name:k[:stop][:gamma]``; ``k`` may be ``inf``, ``gamma`` may be ``nmax``."""
        parts = text.strip().split(":")
        if len(parts) < 2 or len(parts) > 4 or parts[0] not in PRESETS:
            raise ConfigError(f"bad strategy spec {text!r}")
        name = parts[0]
        k = None if parts[1] in ("inf", "") else _int(parts[1], "k")
        stop, gamma = None, None
        for extra in parts[2:]:
            if extra in STOP_RULES or extra in STOP_ALIASES:
                stop = STOP_ALIASES.get(extra, extra)
            elif extra == NMAX_GAMMA:
                gamma = NMAX_GAMMA
            else:
                gamma = _int(extra, "gamma")
        spec = cls(name, k, stop, gamma)
        # validate eagerly with a placeholder gamma
        spec.strategy(5)
        return spec

    def strategy(self, n_max: int):
        gamma = n_max if self.gamma == NMAX_GAMMA else self.gamma
        return make_strategy(self.name, self.k, stop_rule=self.stop, memory_gamma=gamma)


def _int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{what} must be an integer, got {text!r}") from None


def _floats(text: str, what: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise ConfigError(f"bad {what} parameters {text!r}") from None


@dataclass
class BenchConfig:
    """Everything needed to reproduce one benchmark run."""

    strategies: List[StrategySpec]
    model_path: Optional[str] = None
    random_spec: Optional[Tuple[int, int, int, int]] = None
    corpus_path: Optional[str] = None
    adapter: str = "logprob"
    n_max: str = "auto"
    fmt: str = "tsv"
    out: Optional[str] = None
    oracle: bool = False
    budget: int = DEFAULT_BUDGET

    def validate(self) -> None:
        if not self.strategies:
            raise ConfigError("at least one strategy is required")
        if (self.model_path is None) == (self.random_spec is None):
            raise ConfigError("exactly one of model path or random spec is required")
        for p in (self.model_path, self.corpus_path):
            if p is not None and not Path(p).is_file():
                raise ConfigError(f"no such file: {p}")
        if self.fmt not in ("tsv", "json"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if self.random_spec is not None:
            seed, count, vocab, order = self.random_spec
            if count < 0 or vocab < 2 or order < 0:
                raise ConfigError("random spec needs count >= 0, vocab >= 2, order >= 0")
        _parse_adapter_spec(self.adapter)
        _n_max_rule(self.n_max, (0,))


@dataclass
class InstanceRow:
    instance: int
    strategy: str
    k: Optional[int]
    gamma: Union[int, str, None]
    output: Optional[str]
    score: Optional[float]
    score_calls: int
    pops: int
    peak_active: int
    terminated_early: bool
    call_ratio: float
    search_error: bool
    oracle_match: Optional[bool]


@dataclass
class AggregateRow:
    strategy: str
    k: Optional[int]
    gamma: Union[int, str, None]
    mean_calls: float
    call_ratio: float
    search_err: float
    exact_match: Optional[float]
    mean_pops: float


@dataclass
class BenchReport:
    rows: List[AggregateRow] = field(default_factory=list)
    instances: List[InstanceRow] = field(default_factory=list)


def _parse_adapter_spec(spec: str):
    kind, _, rest = spec.partition(":")
    if kind == "logprob" and not rest:
        return ("logprob",)
    if kind == "ln":
        parts = rest.split(",") if rest else []
        if not 1 <= len(parts) <= 3:
            raise ConfigError(f"ln adapter needs beta[,mode[,r]]: {spec!r}")
        beta = _floats(parts[0], "ln")[0]
        mode = parts[1] if len(parts) > 1 else "nmax"
        r = _floats(parts[2], "ln")[0] if len(parts) > 2 else 1.0
        return ("ln", LengthNormParams(beta, mode, r))
    if kind == "pmi":
        vals = _floats(rest, "pmi")
        if len(vals) != 2:
            raise ConfigError(f"pmi adapter needs lambda,epsilon: {spec!r}")
        return ("pmi", PmiParams(vals[0], vals[1]))
    raise ConfigError(f"unknown adapter {spec!r}")


def _n_max_rule(rule: str, x: Sequence[int]) -> int:
    if rule == "auto":
        return default_n_max(x)
    if rule.startswith("ratio:"):
        r = _floats(rule[len("ratio:"):], "n-max ratio")
        if len(r) != 1 or r[0] <= 0:
            raise ConfigError(f"bad n-max rule {rule!r}")
        return max(1, math.ceil(r[0] * len(x)))
    n = _int(rule, "n-max")
    if n < 1:
        raise ConfigError("n-max must be >= 1")
    return n


def _instances(config: BenchConfig):
    """Yields (index, model, input, random-LM seed)."""
    if config.model_path is not None:
        try:
            model = load_table_model(Path(config.model_path).read_text())
        except OSError as e:
            raise ConfigError(str(e)) from None
        # file models ignore the source; a one-token placeholder stands in
        x = (0,)
        yield 0, model, DecoderInput(x, _n_max_rule(config.n_max, x)), 0
        return
    seed, count, vocab, order = config.random_spec
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        x = tuple(int(t) for t in rng.integers(0, vocab - 1, size=int(rng.integers(2, 7))))
        model = random_model(seed * 100_003 + i, vocab, order)
        yield i, model, DecoderInput(x, _n_max_rule(config.n_max, x)), seed * 100_003 + i


def _adapter(parsed, model, corpus, lm_seed):
    if parsed[0] == "logprob":
        return LogProbAdapter()
    if parsed[0] == "ln":
        return LengthNormAdapter(parsed[1])
    if corpus is not None:
        lm = train_ngram(corpus, 2, vocab=model.vocab)
    else:
        lm = random_model(lm_seed + 7_919, model.vocab.n_outputs, 1, vocab=model.vocab)
    return PmiAdapter(parsed[1], lm)


def run_bench(config: BenchConfig) -> BenchReport:
    """Decode every instance under every strategy and aggregate."""
    config.validate()
    parsed = _parse_adapter_spec(config.adapter)
    corpus = None
    if config.corpus_path is not None:
        corpus = read_corpus(Path(config.corpus_path).read_text())
    budget = EnumerationBudget(config.budget)
    report = BenchReport()
    per_spec: Dict[StrategySpec, List[InstanceRow]] = {s: [] for s in config.strategies}
    for idx, model, inp, lm_seed in _instances(config):
        adapter = _adapter(parsed, model, corpus, lm_seed)
        refs: Dict[Optional[int], Tuple] = {}
        oracle_best = exhaustive_best(inp, model, adapter, budget) if config.oracle else None
        for spec in config.strategies:
            if spec.k not in refs:
                if spec.k is None:
                    # exhaustive search expands every prefix shorter than n_max once
                    best = oracle_best or exhaustive_best(inp, model, adapter, budget)
                    calls = space_size(len(model.vocab.regular_ids), inp.n_max)
                    refs[spec.k] = (best.tokens, calls)
                else:
                    ref = beam_search_reference(inp, model, adapter, spec.k)
                    refs[spec.k] = (ref.best.tokens if ref.best else None,
                                    ref.stats.score_calls)
            ref_tokens, ref_calls = refs[spec.k]
            res = decode(inp, model, adapter, spec.strategy(inp.n_max))
            toks = res.best.tokens if res.best else None
            st = res.stats
            row = InstanceRow(
                instance=idx, strategy=spec.label, k=spec.k, gamma=spec.gamma,
                output=" ".join(model.vocab.decode(toks[1:-1])) if toks else None,
                score=res.best.score if res.best else None,
                score_calls=st.score_calls, pops=st.pops, peak_active=st.peak_active,
                terminated_early=st.terminated_early,
                call_ratio=st.score_calls / ref_calls,
                search_error=toks != ref_tokens,
                oracle_match=None if oracle_best is None else toks == oracle_best.tokens)
            per_spec[spec].append(row)
            report.instances.append(row)
    for spec in config.strategies:
        rows = per_spec[spec]
        if not rows:
            continue
        n = len(rows)
        report.rows.append(AggregateRow(
            strategy=spec.label, k=spec.k, gamma=spec.gamma,
            mean_calls=sum(r.score_calls for r in rows) / n,
            call_ratio=sum(r.call_ratio for r in rows) / n,
            search_err=sum(r.search_error for r in rows) / n,
            exact_match=None if not config.oracle else sum(r.oracle_match for r in rows) / n,
            mean_pops=sum(r.pops for r in rows) / n))
    return report


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def _k(v):
    return "inf" if v is None else v


def emit_report(report: BenchReport, fmt: str = "tsv") -> str:
    """Render as TSV (aggregate rows) or JSON (aggregates plus per-instance rows)."""
    if fmt == "tsv":
        lines = ["\t".join(HEADER)]
        for r in report.rows:
            lines.append("\t".join(_fmt(v) for v in (
                r.strategy, _k(r.k), r.gamma, r.mean_calls, r.call_ratio, r.search_err,
                r.exact_match, r.mean_pops)))
        return "\n".join(lines) + "\n"
    if fmt != "json":
        raise ConfigError(f"unknown format {fmt!r}")

    def rnd(v):
        return None if v is None else round(v, 4)

    rows = [{
        "strategy": r.strategy, "k": _k(r.k), "gamma": r.gamma,
        "mean_calls": rnd(r.mean_calls), "call_ratio": rnd(r.call_ratio),
        "search_err": rnd(r.search_err), "exact_match": rnd(r.exact_match),
        "mean_pops": rnd(r.mean_pops)} for r in report.rows]
    inst = [{
        "instance": r.instance, "strategy": r.strategy, "k": _k(r.k), "gamma": r.gamma,
        "output": r.output, "score": r.score, "score_calls": r.score_calls, "pops": r.pops,
        "peak_active": r.peak_active, "terminated_early": r.terminated_early,
        "call_ratio": rnd(r.call_ratio), "search_error": r.search_error,
        "oracle_match": r.oracle_match} for r in report.instances]
    return json.dumps({"rows": rows, "instances": inst}, indent=2) + "\n"


# -- command line ------------------------------------------------------------

_CONFIG_KEYS = {"model", "random", "corpus", "adapter", "strategy", "n_max", "n-max",
                "format", "out", "oracle", "budget"}


def read_config_file(text: str) -> Dict[str, List[str]]:
    """Parse ``key = value`` lines; ``strategy`` may repeat."""
    values: Dict[str, List[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        values.setdefault(key.replace("-", "_"), []).append(val)
    return values


def _parse_random(text: str) -> Tuple[int, int, int, int]:
    parts = text.split(",")
    if len(parts) != 4:
        raise ConfigError(f"--random needs seed,count,vocab,order: {text!r}")
    return tuple(_int(p, "random spec") for p in parts)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bench", description="Count scoring calls and search errors of decoders.")
    p.add_argument("--model", help="table model file")
    p.add_argument("--random", help="seed,count,vocab,order for generated models")
    p.add_argument("--corpus", help="corpus for the PMI language model")
    p.add_argument("--adapter", help="logprob | ln:beta,mode,r | pmi:lambda,eps")
    p.add_argument("--strategy", action="append",
                   help="name:k[:stop][:gamma], repeatable")
    p.add_argument("--n-max", dest="n_max", help="N | ratio:R | auto")
    p.add_argument("--format", choices=("tsv", "json"))
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--oracle", action="store_true", default=None,
                   help="also compare against exhaustive search")
    p.add_argument("--budget", type=int, help="oracle enumeration budget")
    p.add_argument("--config", help="file of 'key = value' defaults")
    return p


def config_from_args(args: argparse.Namespace) -> BenchConfig:
    base: Dict[str, List[str]] = {}
    if args.config:
        try:
            base = read_config_file(Path(args.config).read_text())
        except OSError as e:
            raise ConfigError(str(e)) from None

    def pick(name):
        v = getattr(args, name)
        if v is not None:
            return v
        vals = base.get(name)
        return vals[-1] if vals else None

    strategies = args.strategy or base.get("strategy") or []
    random_spec = pick("random")
    oracle = pick("oracle")
    if isinstance(oracle, str):
        oracle = oracle.lower() in ("1", "true", "yes", "on")
    budget = pick("budget")
    cfg = BenchConfig(
        strategies=[StrategySpec.parse(s) for s in strategies],
        model_path=pick("model"),
        random_spec=_parse_random(random_spec) if random_spec else None,
        corpus_path=pick("corpus"),
        adapter=pick("adapter") or "logprob",
        n_max=str(pick("n_max") or "auto"),
        fmt=pick("format") or "tsv",
        out=pick("out"),
        oracle=bool(oracle),
        budget=_int(str(budget), "budget") if budget is not None else DEFAULT_BUDGET)
    cfg.validate()
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        text = emit_report(run_bench(config), config.fmt)
    except BudgetExceeded as e:
        print(f"bench: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, ModelError, DecodingError) as e:
        print(f"bench: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if config.out:
        Path(config.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
