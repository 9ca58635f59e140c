"""Hot numeric kernels with a numba fast path and a numpy fallback.

The active implementation is chosen once at import time: numba is used when
it imports cleanly and ``SIMULKIT_NO_NUMBA`` is unset. Both variants stay
importable so tests and benchmarks can compare them in one process.

All kernels operate on ``int64`` arrays (token ids or codepoints); callers
do the encoding.
"""

from __future__ import annotations

import os

import numpy as np

ENV_FLAG = "SIMULKIT_NO_NUMBA"


def numba_disabled() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


def edit_distance_numpy(a: np.ndarray, b: np.ndarray) -> int:
    """Levenshtein distance between two id arrays, row-vectorized."""
    m, n = a.shape[0], b.shape[0]
    if m == 0:
        return int(n)
    if n == 0:
        return int(m)
    offsets = np.arange(n + 1, dtype=np.int64)
    prev = offsets.copy()
    for i in range(1, m + 1):
        step = np.empty(n + 1, dtype=np.int64)
        step[0] = i
        np.minimum(prev[:-1] + (b != a[i - 1]), prev[1:] + 1, out=step[1:])
        # fold chained insertions: final[j] = min_{k<=j} step[k] + (j - k)
        prev = np.minimum.accumulate(step - offsets) + offsets
    return int(prev[n])


def jaro_winkler_numpy(a: np.ndarray, b: np.ndarray,
                       prefix_scale: float = 0.1, max_prefix: int = 4) -> float:
    """Jaro-Winkler similarity between two codepoint arrays."""
    la, lb = a.shape[0], b.shape[0]
    if la == 0 and lb == 0:
        return 1.0
    if la == 0 or lb == 0:
        return 0.0
    window = max(max(la, lb) // 2 - 1, 0)
    a_flags = np.zeros(la, dtype=np.bool_)
    b_flags = np.zeros(lb, dtype=np.bool_)
    matches = 0
    for i in range(la):
        lo = i - window if i > window else 0
        hi = min(i + window + 1, lb)
        for j in range(lo, hi):
            if not b_flags[j] and a[i] == b[j]:
                a_flags[i] = True
                b_flags[j] = True
                matches += 1
                break
    if matches == 0:
        return 0.0
    transpositions = 0
    k = 0
    for i in range(la):
        if a_flags[i]:
            while not b_flags[k]:
                k += 1
            if a[i] != b[k]:
                transpositions += 1
            k += 1
    t = transpositions // 2
    m = float(matches)
    jaro = (m / la + m / lb + (m - t) / m) / 3.0
    prefix = 0
    for i in range(min(la, lb, max_prefix)):
        if a[i] != b[i]:
            break
        prefix += 1
    return jaro + prefix * prefix_scale * (1.0 - jaro)


NUMBA_AVAILABLE = False
edit_distance_numba = None
jaro_winkler_numba = None

if not numba_disabled():
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a hard dependency
        njit = None
    if njit is not None:
        NUMBA_AVAILABLE = True

        @njit(cache=True)
        def edit_distance_numba(a, b):  # type: ignore[misc]
            m = a.shape[0]
            n = b.shape[0]
            if m == 0:
                return n
            if n == 0:
                return m
            prev = np.empty(n + 1, dtype=np.int64)
            cur = np.empty(n + 1, dtype=np.int64)
            for j in range(n + 1):
                prev[j] = j
            for i in range(1, m + 1):
                cur[0] = i
                ai = a[i - 1]
                for j in range(1, n + 1):
                    best = prev[j - 1] + (0 if ai == b[j - 1] else 1)
                    dele = prev[j] + 1
                    if dele < best:
                        best = dele
                    ins = cur[j - 1] + 1
                    if ins < best:
                        best = ins
                    cur[j] = best
                tmp = prev
                prev = cur
                cur = tmp
            return prev[n]

        @njit(cache=True)
        def jaro_winkler_numba(a, b, prefix_scale=0.1, max_prefix=4):  # type: ignore[misc]
            la = a.shape[0]
            lb = b.shape[0]
            if la == 0 and lb == 0:
                return 1.0
            if la == 0 or lb == 0:
                return 0.0
            window = max(la, lb) // 2 - 1
            if window < 0:
                window = 0
            a_flags = np.zeros(la, dtype=np.bool_)
            b_flags = np.zeros(lb, dtype=np.bool_)
            matches = 0
            for i in range(la):
                lo = i - window if i > window else 0
                hi = i + window + 1
                if hi > lb:
                    hi = lb
                for j in range(lo, hi):
                    if not b_flags[j] and a[i] == b[j]:
                        a_flags[i] = True
                        b_flags[j] = True
                        matches += 1
                        break
            if matches == 0:
                return 0.0
            transpositions = 0
            k = 0
            for i in range(la):
                if a_flags[i]:
                    while not b_flags[k]:
                        k += 1
                    if a[i] != b[k]:
                        transpositions += 1
                    k += 1
            t = transpositions // 2
            m = float(matches)
            jaro = (m / la + m / lb + (m - t) / m) / 3.0
            prefix = 0
            limit = min(la, lb)
            if limit > max_prefix:
                limit = max_prefix
            for i in range(limit):
                if a[i] != b[i]:
                    break
                prefix += 1
            return jaro + prefix * prefix_scale * (1.0 - jaro)


if NUMBA_AVAILABLE:
    BACKEND = "numba"
    edit_distance = edit_distance_numba
    jaro_winkler_ids = jaro_winkler_numba
else:
    BACKEND = "numpy"
    edit_distance = edit_distance_numpy
    jaro_winkler_ids = jaro_winkler_numpy
