"""Deterministic chunked map over grid nodes.

Chunk boundaries depend only on the node count, never on the worker count,
and results are concatenated in node order, so output is bit-identical for
any number of workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK_SIZE = 4096


def default_workers() -> int:
    env = os.environ.get("OCTOVERIFY_WORKERS")
    if env:
        return max(1, int(env))
    return 1


def map_chunks(fn, u, workers: int = 1, chunk_size: int = CHUNK_SIZE):
    """Apply ``fn`` to consecutive row blocks of ``u`` and concatenate.

    ``fn`` returns an array or a tuple of arrays whose leading axis is the
    node axis of its input block.
    """
    u = np.asarray(u)
    n = u.shape[0]
    starts = list(range(0, n, chunk_size)) or [0]
    blocks = [u[s : s + chunk_size] for s in starts]
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, blocks))
    else:
        parts = [fn(b) for b in blocks]
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate([p[i] for p in parts]) for i in range(len(parts[0])))
    return np.concatenate(parts)
