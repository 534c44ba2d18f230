"""Run-wide settings shared by the solvers."""
from __future__ import annotations

import os

THREADS_ENV = "LPNEHARI_THREADS"


def thread_count(requested: int | None = None) -> int:
    """Worker threads for restart-level parallelism, capped by LPNEHARI_THREADS."""
    cap = os.environ.get(THREADS_ENV)
    n = requested if requested is not None else (int(cap) if cap else 1)
    if cap:
        n = min(n, int(cap))
    return max(1, n)
