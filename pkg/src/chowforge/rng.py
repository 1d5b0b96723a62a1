"""Deterministic seed streams and chunked sample-axis computation.

Every randomized stage derives its own Philox stream from (seed, stage tags),
and anything indexed by samples is generated and reduced in fixed chunks of
CHUNK samples, each chunk with its own derived stream. Results are therefore
independent of execution order and of the CHOWFORGE_THREADS setting; the env
var only caps the worker pool mapped over chunks.
"""

import os
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 4096


def _tag_word(tag):
    if isinstance(tag, str):
        return zlib.crc32(tag.encode("utf-8"))
    return int(tag) & 0xFFFFFFFF


def stream(seed, *tags):
    """Generator for the stage identified by `tags`, derived from `seed`."""
    entropy = (int(seed),) + tuple(_tag_word(t) for t in tags)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def chunk_streams(seed, tags, n_chunks):
    """One independent generator per fixed-size chunk."""
    return [stream(seed, *tags, c) for c in range(n_chunks)]


def derive_seed(seed, *tags):
    """Stable integer sub-seed for an isolated pipeline stage."""
    entropy = (int(seed),) + tuple(_tag_word(t) for t in tags)
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def n_chunks(n_items):
    return (n_items + CHUNK - 1) // CHUNK


def thread_count():
    raw = os.environ.get("CHOWFORGE_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_chunks(fn, total):
    """Apply fn(chunk_idx, start, stop) over fixed chunks, in chunk order.

    The chunk grid never depends on the thread count, so any reduction of the
    returned list is bitwise-reproducible.
    """
    spans = [(c, c * CHUNK, min((c + 1) * CHUNK, total)) for c in range(n_chunks(total))]
    workers = thread_count()
    if workers == 1 or len(spans) == 1:
        return [fn(c, a, b) for c, a, b in spans]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(fn, c, a, b) for c, a, b in spans]
        return [f.result() for f in futs]


def sum_chunks(parts):
    """Pairwise sum of per-chunk partials in fixed chunk order."""
    if len(parts) == 1:
        return np.asarray(parts[0], dtype=float)
    return np.sum(np.stack([np.asarray(p, dtype=float) for p in parts]), axis=0)


def gaussian_matrix(n_rows, n_cols, seed, *tags):
    """(n_rows, n_cols) standard-normal draws, chunk-keyed by (seed, tags)."""
    out = np.empty((n_rows, n_cols), dtype=float)

    def fill(c, a, b):
        g = stream(seed, *tags, c)
        out[a:b] = g.standard_normal((b - a, n_cols))
        return None

    map_chunks(fill, n_rows)
    return out
