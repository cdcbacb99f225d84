"""Seedable, splittable random streams.

A stream is addressed by ``(seed, stream_id)`` and backed by numpy's PCG64
seeded through ``SeedSequence(seed, spawn_key=(stream_id,))``. The spawn-key
mechanism gives statistically independent streams for distinct ids and the
same bit stream for the same address on every platform numpy supports.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_int

_UINT64 = 2**64


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = check_int(getattr(self, name), name, minimum=0)
            if value >= _UINT64:
                raise ValueError(f"{name} must fit in 64 bits, got {value}")

    def with_stream(self, stream_id):
        return RngStream(self.seed, stream_id)

    def generator(self):
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(seq))


def derive_trial_seed(master_seed, trial_index):
    """64-bit seed for one harness trial; a pure function of its two arguments."""
    master_seed = check_int(master_seed, "master_seed", minimum=0)
    trial_index = check_int(trial_index, "trial_index", minimum=0)
    seq = np.random.SeedSequence(master_seed, spawn_key=(trial_index,))
    return int(seq.generate_state(1, dtype=np.uint64)[0])
