"""Open/focal list pair for bounded-suboptimal best-first search."""
from __future__ import annotations

import heapq
import itertools
from typing import Optional

from sortedcontainers import SortedList

_INF = float("inf")


class FocalQueue:
    """OPEN ordered by ``f``; FOCAL holds entries whose focal value is at most ``w * min f``.

    The focal value defaults to ``f``.  ``pop`` returns the FOCAL entry with the
    smallest ``focal_key``.  With ``w == 1`` and focal value ``f`` this is a
    best-first queue on ``(f, focal_key)``.
    """

    def __init__(self, w: float):
        if w < 1:
            raise ValueError("suboptimality factor must be at least 1")
        self.w = w
        self._open = SortedList()  # (f, seq)
        self._by_value = SortedList()  # (focal value, seq)
        self._items: dict[int, tuple] = {}  # seq -> (f, value, focal_key, item)
        self._focal: list = []
        self._in_focal: set[int] = set()
        self._bound = -1.0
        self._seq = itertools.count()

    def __len__(self):
        return len(self._items)

    def __bool__(self):
        return bool(self._items)

    @property
    def min_f(self) -> float:
        return self._open[0][0]

    def push(self, item, f: float, focal_key, value: Optional[float] = None) -> None:
        value = f if value is None else value
        seq = next(self._seq)
        self._items[seq] = (f, value, focal_key, item)
        self._open.add((f, seq))
        self._by_value.add((value, seq))
        if value <= self._bound:
            heapq.heappush(self._focal, (focal_key, seq))
            self._in_focal.add(seq)

    def _refresh(self):
        bound = self.w * self._open[0][0]
        if bound < self._bound:
            self._focal = []
            self._in_focal = set()
            self._bound = -1.0
        if bound > self._bound:
            lo = self._by_value.bisect_right((self._bound, _INF))
            hi = self._by_value.bisect_right((bound, _INF))
            for _, seq in self._by_value.islice(lo, hi):
                if seq not in self._in_focal:
                    heapq.heappush(self._focal, (self._items[seq][2], seq))
                    self._in_focal.add(seq)
            self._bound = bound

    def pop(self):
        if not self._items:
            raise IndexError("pop from empty FocalQueue")
        self._refresh()
        seq = None
        while self._focal:
            _, cand = heapq.heappop(self._focal)
            if cand in self._items:
                seq = cand
                break
        if seq is None:
            # focal value of every open entry exceeds the bound
            seq = self._open[0][1]
        self._in_focal.discard(seq)
        f, value, _, item = self._items.pop(seq)
        self._open.remove((f, seq))
        self._by_value.remove((value, seq))
        return item
