"""Capacity-bounded min-max heap.

Entries are ordered by a key where *smaller is better*; the heap keeps the
best entry at the root (a min level) and the worst among the root's children
(max level), giving O(1) access to both ends. With hypotheses the key is
``(-priority, tokens)`` so ties in priority fall back to lexicographic order.
"""

from typing import Any, Callable, Iterator, List, Optional, Tuple

from .core import ConfigError, EmptyError


def _on_min_level(i: int) -> bool:
    return ((i + 1).bit_length() - 1) % 2 == 0


def _identity(item):
    return item


class BoundedMinMaxHeap:
    """Double-ended priority queue holding at most ``capacity`` items.

    ``capacity=None`` means unbounded. ``key`` maps an item to its sort key;
    the item with the smallest key is "best". Keys of live items are assumed
    distinct; a running counter keeps comparisons total regardless.
    """

    def __init__(self, capacity: Optional[int], key: Callable[[Any], Any] = _identity):
        if capacity is not None and capacity < 1:
            raise ConfigError("heap capacity must be a positive integer")
        self.capacity = capacity
        self.key = key
        self._a: List[Tuple[Any, int, Any]] = []
        self._seq = 0

    def __len__(self) -> int:
        return len(self._a)

    def __bool__(self) -> bool:
        return bool(self._a)

    def __iter__(self) -> Iterator[Any]:
        return (e[2] for e in self._a)

    @property
    def full(self) -> bool:
        return self.capacity is not None and len(self._a) >= self.capacity

    def _entry(self, item):
        self._seq += 1
        return (self.key(item), self._seq, item)

    # -- queries -----------------------------------------------------------

    def _worst_index(self) -> int:
        a = self._a
        n = len(a)
        if n == 0:
            raise EmptyError("peek on empty heap")
        if n == 1:
            return 0
        if n == 2 or a[1] > a[2]:
            return 1
        return 2

    def peek_best(self):
        if not self._a:
            raise EmptyError("peek on empty heap")
        return self._a[0][2]

    def peek_worst(self):
        return self._a[self._worst_index()][2]

    def peek_pair(self):
        """(best, worst) without removal."""
        return self.peek_best(), self.peek_worst()

    def admits(self, key) -> bool:
        """Would an item with ``key`` be kept by ``push_bounded``?"""
        if not self.full:
            return True
        return key < self._a[self._worst_index()][0]

    # -- mutation ----------------------------------------------------------

    def push(self, item) -> None:
        self._a.append(self._entry(item))
        self._bubble_up(len(self._a) - 1)

    def push_bounded(self, item):
        """Insert ``item`` respecting capacity.

        Returns None if inserted without displacement, the evicted worst item
        if ``item`` beat it, or ``item`` itself if it was rejected.
        """
        if not self.full:
            self.push(item)
            return None
        entry = self._entry(item)
        w = self._worst_index()
        if not entry[0] < self._a[w][0]:
            return item
        evicted = self._a[w][2]
        self._a[w] = entry
        self._fix_after_replace(w)
        return evicted

    def pop_best(self):
        a = self._a
        if not a:
            raise EmptyError("pop from empty heap")
        return self._remove_at(0)

    def pop_worst(self):
        return self._remove_at(self._worst_index())

    def clear(self) -> List[Any]:
        items = [e[2] for e in self._a]
        self._a.clear()
        return items

    def _remove_at(self, i: int):
        a = self._a
        item = a[i][2]
        last = a.pop()
        if i < len(a):
            a[i] = last
            self._fix_after_replace(i)
        return item

    def _fix_after_replace(self, i: int) -> None:
        # the new entry at i may belong above (parent or grandparents) or below
        a = self._a
        on_min = _on_min_level(i)
        if i > 0:
            p = (i - 1) // 2
            if (a[i] > a[p]) if on_min else (a[i] < a[p]):
                a[i], a[p] = a[p], a[i]
                # the parent's old entry now sits at i and must sink
                self._trickle_down(i)
                if on_min:
                    self._bubble_up_max(p)
                else:
                    self._bubble_up_min(p)
                return
        entry = a[i]
        if on_min:
            self._bubble_up_min(i)
        else:
            self._bubble_up_max(i)
        if a[i] is entry:
            self._trickle_down(i)

    def _bubble_up(self, i: int) -> None:
        a = self._a
        if i == 0:
            return
        p = (i - 1) // 2
        if _on_min_level(i):
            if a[i] > a[p]:
                a[i], a[p] = a[p], a[i]
                self._bubble_up_max(p)
            else:
                self._bubble_up_min(i)
        else:
            if a[i] < a[p]:
                a[i], a[p] = a[p], a[i]
                self._bubble_up_min(p)
            else:
                self._bubble_up_max(i)

    def _bubble_up_min(self, i: int) -> None:
        a = self._a
        while i > 2:
            g = ((i - 1) // 2 - 1) // 2
            if a[i] < a[g]:
                a[i], a[g] = a[g], a[i]
                i = g
            else:
                break

    def _bubble_up_max(self, i: int) -> None:
        a = self._a
        while i > 2:
            g = ((i - 1) // 2 - 1) // 2
            if a[i] > a[g]:
                a[i], a[g] = a[g], a[i]
                i = g
            else:
                break

    def _trickle_down(self, i: int) -> None:
        a = self._a
        n = len(a)
        is_min = _on_min_level(i)
        while True:
            c = 2 * i + 1
            if c >= n:
                return
            # pick the extreme among children and grandchildren
            m = c
            for j in (c + 1, 2 * c + 1, 2 * c + 2, 2 * c + 3, 2 * c + 4):
                if j < n and ((a[j] < a[m]) if is_min else (a[j] > a[m])):
                    m = j
            better = (a[m] < a[i]) if is_min else (a[m] > a[i])
            if not better:
                return
            a[m], a[i] = a[i], a[m]
            if m <= c + 1:
                return
            p = (m - 1) // 2
            if (a[m] > a[p]) if is_min else (a[m] < a[p]):
                a[m], a[p] = a[p], a[m]
            i = m

    def check_invariants(self) -> bool:
        """Verify the min-max ordering of every node against its descendants."""
        a = self._a
        n = len(a)
        if self.capacity is not None and n > self.capacity:
            return False
        for i in range(n):
            stack = [2 * i + 1, 2 * i + 2]
            while stack:
                j = stack.pop()
                if j >= n:
                    continue
                if _on_min_level(i) and a[j] < a[i]:
                    return False
                if not _on_min_level(i) and a[j] > a[i]:
                    return False
                stack.extend((2 * j + 1, 2 * j + 2))
        return True
