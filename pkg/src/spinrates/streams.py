"""Stream-keyed random generators.

Each (seed, stream) pair maps to its own counter-based Philox generator, so
results do not depend on the order in which realizations or grid points run.
"""

import numpy as np


def stream_rng(seed: int, *stream: int) -> np.random.Generator:
    if int(seed) != seed or not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))
