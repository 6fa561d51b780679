"""The active-hypothesis store used by the meta-decoder.

Hypotheses live in one bounded min-max heap per length ("beam"). A small
indexed binary heap orders the non-empty beams by their best member under the
search comparator, so the globally first hypothesis is found at the best beam.
"""

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

from .core import ConfigError, EmptyError, Hypothesis
from .heap import BoundedMinMaxHeap

LENGTH_FIRST = "length-first"
SCORE_FIRST = "score-first"


def _beam_key(h: Hypothesis):
    return (-h.priority, h.tokens)


@dataclass(frozen=True)
class Comparator:
    """Total order over hypotheses; smaller key = popped first.

    length-first: shorter first, then higher priority.
    score-first: higher priority first, then shorter.
    Remaining ties go to the lexicographically smaller token sequence.
    """

    kind: str

    def __post_init__(self):
        if self.kind not in (LENGTH_FIRST, SCORE_FIRST):
            raise ConfigError(f"unknown comparator {self.kind!r}")

    def key(self, h: Hypothesis):
        if self.kind == LENGTH_FIRST:
            return (len(h), -h.priority, h.tokens)
        return (-h.priority, len(h), h.tokens)

    def precedes(self, a: Hypothesis, b: Hypothesis) -> bool:
        return self.key(a) < self.key(b)


class _BeamOrder:
    """Indexed binary min-heap of beam lengths keyed by their best member."""

    def __init__(self):
        self._heap: List[int] = []
        self._pos: Dict[int, int] = {}
        self._key: Dict[int, tuple] = {}

    def __len__(self):
        return len(self._heap)

    def top(self) -> int:
        return self._heap[0]

    def __contains__(self, t):
        return t in self._pos

    def update(self, t: int, key) -> None:
        if t in self._pos:
            old = self._key[t]
            self._key[t] = key
            i = self._pos[t]
            if key < old:
                self._up(i)
            else:
                self._down(i)
        else:
            self._key[t] = key
            self._heap.append(t)
            self._pos[t] = len(self._heap) - 1
            self._up(len(self._heap) - 1)

    def remove(self, t: int) -> None:
        i = self._pos.pop(t)
        del self._key[t]
        last = self._heap.pop()
        if i < len(self._heap):
            self._heap[i] = last
            self._pos[last] = i
            self._up(i)
            self._down(self._pos[last])

    def _swap(self, i, j):
        h = self._heap
        h[i], h[j] = h[j], h[i]
        self._pos[h[i]] = i
        self._pos[h[j]] = j

    def _up(self, i):
        h, k = self._heap, self._key
        while i > 0:
            p = (i - 1) // 2
            if k[h[i]] < k[h[p]]:
                self._swap(i, p)
                i = p
            else:
                break

    def _down(self, i):
        h, k = self._heap, self._key
        n = len(h)
        while True:
            c = 2 * i + 1
            if c >= n:
                return
            if c + 1 < n and k[h[c + 1]] < k[h[c]]:
                c += 1
            if k[h[c]] < k[h[i]]:
                self._swap(i, c)
                i = c
            else:
                return


class BeamAgenda:
    """Priority structure over per-length beams.

    Args:
        k: beam width (per-length capacity and pop limit); None for unbounded.
        n_max: hypotheses longer than this are never expanded.
        comparator: pop order across beams.
        capacity_limit: optional cap on the total number of stored hypotheses;
            when exceeded the worst member of the shortest stored length is
            evicted.
    """

    def __init__(self, k: Optional[int], n_max: int, comparator: Comparator,
                 capacity_limit: Optional[int] = None):
        if k is not None and k < 1:
            raise ConfigError("k must be positive")
        if capacity_limit is not None and capacity_limit < 1:
            raise ConfigError("capacity_limit must be positive")
        self.k = k
        self.n_max = n_max
        self.comparator = comparator
        self.capacity_limit = capacity_limit
        self.beams: Dict[int, BoundedMinMaxHeap] = {}  # the locator: length -> beam
        self.pops: Dict[int, int] = {}
        self.total_size = 0
        self.n_incomplete = 0
        self.peak_size = 0
        self._order = _BeamOrder()

    def __len__(self) -> int:
        return self.total_size

    def __bool__(self) -> bool:
        return self.total_size > 0

    def __iter__(self) -> Iterator[Hypothesis]:
        for t in sorted(self.beams):
            yield from self.beams[t]

    def _reorder(self, t: int) -> None:
        beam = self.beams.get(t)
        if beam:
            self._order.update(t, self.comparator.key(beam.peek_best()))
        else:
            if t in self._order:
                self._order.remove(t)
            self.beams.pop(t, None)

    def _forget(self, h: Hypothesis) -> None:
        self.total_size -= 1
        if not h.is_complete:
            self.n_incomplete -= 1

    def quick_reject(self, length: int, priority: float) -> bool:
        """True if a hypothesis of this length and priority certainly would
        not enter its beam (cheap check before building it)."""
        beam = self.beams.get(length)
        return beam is not None and beam.full and priority < beam.peek_worst().priority

    def push(self, h: Hypothesis) -> Optional[Hypothesis]:
        """Insert ``h``; return the hypothesis displaced by the insertion
        (``h`` itself if it was rejected), or None."""
        t = len(h)
        beam = self.beams.get(t)
        if beam is None:
            beam = self.beams[t] = BoundedMinMaxHeap(self.k, key=_beam_key)
        out = beam.push_bounded(h)
        if out is h:
            if not beam:
                del self.beams[t]
            return h
        self.total_size += 1
        if not h.is_complete:
            self.n_incomplete += 1
        if out is not None:
            self._forget(out)
        self._reorder(t)
        if out is None and self.capacity_limit is not None \
                and self.total_size > self.capacity_limit:
            out = self.evict_overflow()
        self.peak_size = max(self.peak_size, self.total_size)
        return out

    def peek(self) -> Hypothesis:
        if not self._order:
            raise EmptyError("peek on empty agenda")
        return self.beams[self._order.top()].peek_best()

    def pop(self) -> Hypothesis:
        if not self._order:
            raise EmptyError("pop from empty agenda")
        t = self._order.top()
        h = self.beams[t].pop_best()
        self._forget(h)
        self._reorder(t)
        return h

    def is_live(self, length: int) -> bool:
        """Would a hypothesis of this length pass the pops gate right now?"""
        if length > self.n_max:
            return False
        return self.k is None or self.pops.get(length, 0) < self.k

    def record_pop(self, length: int) -> bool:
        if not self.is_live(length):
            return False
        self.pops[length] = self.pops.get(length, 0) + 1
        return True

    def saturated(self, length: int) -> bool:
        return self.k is not None and self.pops.get(length, 0) >= self.k

    def prune_stale(self, t: int) -> int:
        """Drop every beam shorter than ``t``; requires ``pops[t] == k``."""
        if not self.saturated(t):
            raise ValueError(f"prune_stale({t}) requires pops[{t}] == k")
        dropped = 0
        for s in [s for s in self.beams if s < t]:
            for h in self.beams[s].clear():
                self._forget(h)
                dropped += 1
            self._reorder(s)
        return dropped

    def evict_overflow(self) -> Optional[Hypothesis]:
        """Remove the worst member of the shortest non-empty beam.

        Returns None (nothing evicted) when fewer than two hypotheses are
        stored, so the agenda never loses its last active hypothesis.
        """
        if self.total_size < 2:
            return None
        t = min(self.beams)
        h = self.beams[t].pop_worst()
        self._forget(h)
        self._reorder(t)
        return h

    def beam_bests(self) -> Iterator[Tuple[int, Hypothesis]]:
        for t, beam in self.beams.items():
            yield t, beam.peek_best()
