"""Instance generators and small oracles shared by the test modules."""

import bisect
import math
from pathlib import Path

import numpy as np

from bfbeam import (BoundedMinMaxHeap, DecoderInput, load_table_model, random_model,
                    train_ngram)

DATA = Path(__file__).parent / "data"

# filled by the acceptance tests, printed in the terminal summary
ACCEPTANCE_LINES = []


def report(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok
TOY1_PATH = DATA / "toy1.txt"

# log 0.7 + log 0.6, the best output of the toy model
TOY1_BEST_SCORE = math.log(0.7) + math.log(0.6)


def toy1():
    return load_table_model(TOY1_PATH.read_text())


def suite_instance(seed):
    """Random table model, input and beam width for the equivalence suite."""
    rng = np.random.default_rng(seed)
    vocab_size = int(rng.integers(3, 9))
    n_max = int(rng.integers(4, 13))
    k = int(rng.choice([1, 2, 3, 5]))
    order = int(rng.integers(0, 3))
    model = random_model(seed, vocab_size, order)
    return model, DecoderInput((0,), n_max), k


def small_instance(seed):
    """|V| <= 4 (EOS included), n_max <= 8: small enough to enumerate."""
    rng = np.random.default_rng(10_000 + seed)
    vocab_size = int(rng.integers(3, 5))
    n_max = int(rng.integers(1, 9))
    model = random_model(10_000 + seed, vocab_size, int(rng.integers(0, 3)))
    return model, DecoderInput((0,), n_max)


def bounded_instance(seed):
    """Instance with a multi-token source so ratio-mode length bounds vary."""
    rng = np.random.default_rng(20_000 + seed)
    vocab_size = int(rng.integers(3, 9))
    k = int(rng.choice([1, 2, 3, 5]))
    x_len = int(rng.integers(2, 6))
    n_max = int(rng.integers(max(4, 2 * x_len), 13))
    model = random_model(20_000 + seed, vocab_size, int(rng.integers(0, 3)))
    return model, DecoderInput(tuple(range(x_len)), n_max), k


def random_lm(model, seed, order=2, lines=30):
    """Smoothed n-gram LM trained on random strings over the model's vocabulary."""
    rng = np.random.default_rng(seed)
    v = model.vocab
    regular = [v.tokens[i] for i in v.regular_ids]
    corpus = [list(rng.choice(regular, size=int(rng.integers(1, 6)))) for _ in range(lines)]
    return train_ngram(corpus, order, alpha=0.1, vocab=v)


def maxheap(capacity):
    # larger value = better, as for scores
    return BoundedMinMaxHeap(capacity, key=lambda v: -v)


class SortedListHeap:
    """Reference: a capacity-bounded list kept sorted best-first."""

    def __init__(self, capacity):
        self.capacity = capacity
        self.items = []

    def push_bounded(self, v):
        if self.capacity is not None and len(self.items) >= self.capacity:
            if not -v < -self.items[-1]:
                return v
            worst = self.items.pop()
            bisect.insort(self.items, v, key=lambda x: -x)
            return worst
        bisect.insort(self.items, v, key=lambda x: -x)
        return None

    def pop_best(self):
        return self.items.pop(0)

    def pop_worst(self):
        return self.items.pop()

    def peek_pair(self):
        return self.items[0], self.items[-1]


def _beam_key(h):
    return (-h.priority, h.tokens)


class FlatAgenda:
    """Reference agenda: one flat list, linear scans for every operation."""

    def __init__(self, k, n_max, comparator, capacity_limit=None):
        self.k, self.n_max, self.comparator = k, n_max, comparator
        self.capacity_limit = capacity_limit
        self.items = []
        self.pops = {}

    def __len__(self):
        return len(self.items)

    def push(self, h):
        same = [g for g in self.items if len(g) == len(h)]
        out = None
        if self.k is not None and len(same) >= self.k:
            worst = max(same, key=_beam_key)
            if not _beam_key(h) < _beam_key(worst):
                return h
            self.items.remove(worst)
            out = worst
        self.items.append(h)
        if out is None and self.capacity_limit is not None \
                and len(self.items) > self.capacity_limit and len(self.items) >= 2:
            t = min(len(g) for g in self.items)
            out = max((g for g in self.items if len(g) == t), key=_beam_key)
            self.items.remove(out)
        return out

    def pop(self):
        h = min(self.items, key=self.comparator.key)
        self.items.remove(h)
        return h

    def record_pop(self, t):
        if t > self.n_max or (self.k is not None and self.pops.get(t, 0) >= self.k):
            return False
        self.pops[t] = self.pops.get(t, 0) + 1
        return True

    def prune_stale(self, t):
        before = len(self.items)
        self.items = [g for g in self.items if len(g) >= t]
        return before - len(self.items)


def run_agenda_trace(seed, n_ops=30):
    """Drive a BeamAgenda and a FlatAgenda with the same random operations and
    assert identical observable behavior. Returns the number of operations."""
    from bfbeam import BeamAgenda, Comparator, Hypothesis, LENGTH_FIRST, SCORE_FIRST

    rng = np.random.default_rng(seed)
    k = [1, 2, 3, None][int(rng.integers(0, 4))]
    n_max = int(rng.integers(3, 7))
    comp = Comparator([LENGTH_FIRST, SCORE_FIRST][int(rng.integers(0, 2))])
    cap = None if k is None or rng.random() < 0.5 else int(rng.integers(2, 7))
    a = BeamAgenda(k, n_max, comp, capacity_limit=cap)
    ref = FlatAgenda(k, n_max, comp, capacity_limit=cap)
    eos, bos = 2, 3
    used = set()
    for _ in range(n_ops):
        if rng.random() < 0.65 or not ref.items:
            length = int(rng.integers(0, n_max + 1))
            toks = (bos,) + tuple(int(t) for t in rng.integers(0, 3, size=length))
            if eos in toks[1:-1] or toks in used:
                continue
            used.add(toks)
            prio = float(rng.integers(-8, 1)) / 2
            h = Hypothesis(toks, prio, prio, eos)
            assert a.push(h) == ref.push(h)
        else:
            assert a.peek() == min(ref.items, key=comp.key)
            h = a.pop()
            assert h == ref.pop()
            ok = a.record_pop(len(h))
            assert ok == ref.record_pop(len(h))
            if ok and a.saturated(len(h)):
                assert a.prune_stale(len(h)) == ref.prune_stale(len(h))
        assert len(a) == len(ref)
        assert a.n_incomplete == sum(not g.is_complete for g in ref.items)
        assert sorted(a, key=comp.key) == sorted(ref.items, key=comp.key)
        assert all(a.pops.get(t, 0) <= (k or 10**9) for t in a.pops)
    while ref.items:
        assert a.pop() == ref.pop()
    return n_ops
