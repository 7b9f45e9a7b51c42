from typing import NamedTuple

import numpy as np

from qsdc_sim.quantum.qcore import RandomStream

# order of the substreams spawned for every trial
STREAM_NAMES = ("carrier", "noise", "eve", "decode")


class TrialStreams(NamedTuple):
    """
    The independent random streams of one Monte Carlo trial. Keeping them
    apart means switching Eve on or off does not shift the noise draws, so
    runs with the same seed can be compared pairwise.
    """

    trial_index: int
    carrier: RandomStream
    noise: RandomStream
    eve: RandomStream
    decode: RandomStream


class StreamSampler:
    """
    Derives the random streams for a Monte Carlo campaign from one master
    seed. Trial i always gets the same streams, no matter which thread runs
    it or in which order the trials are scheduled.

    Attributes:
        master_seed: 64-bit seed of the whole campaign
    """

    def __init__(self, master_seed: int) -> None:
        """
        Args:
            master_seed (int): non-negative seed below 2**64

        Raises:
            ValueError: if the seed is negative or too large
        """
        if isinstance(master_seed, bool) or not isinstance(master_seed, (int, np.integer)):
            raise ValueError(f"The master seed must be an integer, got {master_seed!r}.")
        if not 0 <= master_seed < 2**64:
            raise ValueError(f"The master seed must lie in [0, 2**64), got {master_seed}.")
        self.master_seed = int(master_seed)

    def streams(self, trial_index: int) -> TrialStreams:
        """
        The streams of a single trial, derived from (master_seed, trial_index).

        Args:
            trial_index (int): index of the trial, starting at 0

        Returns:
            TrialStreams: fresh generators, positioned at their start
        """
        if trial_index < 0:
            raise ValueError(f"Trial indices start at 0, got {trial_index}.")
        root = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(trial_index,))
        children = root.spawn(len(STREAM_NAMES))
        return TrialStreams(trial_index, *(np.random.default_rng(child) for child in children))
