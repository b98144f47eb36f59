"""Counters that proxy the working-set behaviour of lazy rotation queries."""

from __future__ import annotations

import threading
from contextlib import contextmanager


class Metrics:
    """Counter sink shared by a chain and the entry oracles built on it.

    Counters are monotone while a query runs; call :meth:`reset` between
    queries when per-query numbers are wanted.  ``peak_recursion_depth``
    counts nested recursive unfoldings (a leaf evaluation opens no frame),
    ``peak_live_words`` the largest number of integer variables retained
    across live frames (``WORDS_PER_FRAME`` per frame).
    """

    WORDS_PER_FRAME = 3

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.reset()

    def reset(self) -> None:
        self.rot_base_evals = 0
        self.rot_expander_evals = 0
        self.peak_recursion_depth = 0
        self.peak_live_words = 0
        self._depth = 0
        self._live = 0

    def count_base(self) -> None:
        with self._lock:
            self.rot_base_evals += 1

    def count_expander(self) -> None:
        with self._lock:
            self.rot_expander_evals += 1

    @contextmanager
    def frame(self, words: int = WORDS_PER_FRAME):
        with self._lock:
            self._depth += 1
            self._live += words
            if self._depth > self.peak_recursion_depth:
                self.peak_recursion_depth = self._depth
            if self._live > self.peak_live_words:
                self.peak_live_words = self._live
        try:
            yield
        finally:
            with self._lock:
                self._depth -= 1
                self._live -= words

    def snapshot(self) -> dict[str, int]:
        with self._lock:
            return {
                "rot_base_evals": self.rot_base_evals,
                "rot_expander_evals": self.rot_expander_evals,
                "peak_recursion_depth": self.peak_recursion_depth,
                "peak_live_words": self.peak_live_words,
            }
