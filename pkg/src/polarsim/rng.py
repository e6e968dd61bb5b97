"""Deterministic random streams.

All sampling in the package goes through counter-based Philox
generators keyed by ``(seed, stream_id)``. Two consequences matter:

* every experiment is reproducible from its integer seed alone, and
* independent parts of one experiment (outcomes, noise, basis choices)
  draw from disjoint substreams, so adding draws to one part never
  shifts the variates seen by another.

Bulk experiments draw all their variates in one vectorized call from a
single substream, which makes "event k consumes variate k" an explicit
part of the contract: results are independent of batching.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Return the Philox generator for substream ``stream_id`` of ``seed``.

    Args:
        seed: Non-negative experiment seed.
        stream_id: Non-negative substream index; unrelated ids give
            statistically independent streams under the same seed.
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    if stream_id < 0:
        raise ValueError(f"stream_id must be non-negative, got {stream_id}")
    return np.random.Generator(np.random.Philox(key=[seed, stream_id]))
