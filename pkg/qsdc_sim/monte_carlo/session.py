import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.stats import binom
from tqdm import tqdm

from qsdc_sim.monte_carlo.sampler import StreamSampler, TrialStreams
from qsdc_sim.protocol.adversary import (
    CLAIMED_BLOCK_SUCCESS,
    NO_EVE,
    EveObservation,
    EveStrategy,
    claimed_message_success,
    enumerate_transmissions,
    exact_success_for_blocks,
    guess_block,
)
from qsdc_sim.protocol.channel import FlipRecord, NoiseConfig, apply_flips, transmit
from qsdc_sim.protocol.codec import (
    MessageBlock,
    decode,
    decode_distribution,
    encode,
    select_encoding_op,
)
from qsdc_sim.quantum.qcore import (
    BellKind,
    GateLabel,
    RandomStream,
    TwoQubitState,
    basis_state,
    collapse_qubit,
)

THREADS_ENV_VAR = "QSDC_SIM_THREADS"

_CARRIERS = tuple(BellKind)


@dataclass(frozen=True)
class Message:
    """
    The bit string Alice sends, split into 2-bit blocks.

    Attributes:
        bits (tuple[int, ...]): the message bits, even length
    """

    bits: tuple[int, ...] = ()

    def __post_init__(self):
        bits = tuple(self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"A message consists of 0 and 1 only, got {bits}.")
        if len(bits) % 2:
            raise ValueError(
                f"A message needs an even number of bits, got {len(bits)}; pad it explicitly."
            )
        object.__setattr__(self, "bits", tuple(int(b) for b in bits))

    @classmethod
    def from_string(cls, bits: str) -> "Message":
        if any(b not in "01" for b in bits):
            raise ValueError(f"A bit string may only contain 0 and 1, got {bits!r}.")
        return cls(tuple(int(b) for b in bits))

    @classmethod
    def from_hex(cls, digits: str, n_bits: int) -> "Message":
        """
        Reads the lowest n_bits of a hexadecimal number, most significant bit
        first. "a" with n_bits 4 is 1010; "1" with n_bits 2 is 01.
        """
        try:
            value = int(digits, 16)
        except ValueError:
            raise ValueError(f"{digits!r} is not a hexadecimal number.") from None
        if n_bits < 0 or value >= 2**n_bits:
            raise ValueError(f"0x{digits} does not fit into {n_bits} bits.")
        return cls.from_string(format(value, "b").zfill(n_bits) if n_bits else "")

    @property
    def n_bits(self) -> int:
        return len(self.bits)

    def blocks(self) -> list[MessageBlock]:
        return [
            MessageBlock.from_bits(self.bits[i], self.bits[i + 1])
            for i in range(0, self.n_bits, 2)
        ]

    def __str__(self):
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True)
class SessionConfig:
    """
    One Monte Carlo campaign.

    Attributes:
        message (Message): the message sent in every trial
        noise (NoiseConfig): channel noise
        eve (EveStrategy): the eavesdropper
        master_seed (int): seed all trial streams derive from
        trials (int): number of independent sessions
        noise_after_eve (bool): noise sits between Eve and Bob instead of
            between Alice and Eve
        n_threads (int, optional): worker threads; None reads QSDC_SIM_THREADS
    """

    message: Message = field(default_factory=Message)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    eve: EveStrategy = NO_EVE
    master_seed: int = 0
    trials: int = 100_000
    noise_after_eve: bool = False
    n_threads: Optional[int] = None

    def __post_init__(self):
        if isinstance(self.trials, bool) or not isinstance(self.trials, (int, np.integer)):
            raise ValueError(f"trials must be an integer, got {self.trials!r}.")
        if self.trials < 1:
            raise ValueError(f"You cannot have {self.trials} trials - use a positive integer.")


@dataclass(frozen=True)
class BlockTrace:
    """Everything that happened to one block, from Alice's carrier to Bob's readout."""

    carrier: BellKind
    block: MessageBlock
    gate: GateLabel
    flips: FlipRecord
    eve_obs: EveObservation
    decoded: MessageBlock
    delivered: TwoQubitState


class ErrorRates(NamedTuple):
    block_error_rate: float
    bit_error_rate: float


@dataclass(frozen=True)
class RunStats:
    """
    Aggregated results of a campaign next to their exact and claimed references.

    Counts are summed over all trials; rates are counts over trials * blocks
    (or trials * bits for the bit error rate). With an empty message all
    error rates and the Eve block rate are 0 and every trial counts as a
    message success.
    """

    trials: int
    blocks_per_trial: int
    n_bits: int
    block_errors: int
    bit_errors: int
    eve_block_successes: int
    eve_message_successes: int
    block_error_rate: float
    bit_error_rate: float
    eve_block_success_rate: float
    eve_message_success_rate: float
    oracle_block_success: float
    oracle_message_success: float
    oracle_block_error_rate: float
    oracle_bit_error_rate: float
    paper_claim_block_success: float = CLAIMED_BLOCK_SUCCESS
    paper_claim_message_success: float = 1.0


class TrialResult(NamedTuple):
    block_errors: int
    bit_errors: int
    eve_block_successes: int
    eve_message_success: bool


def alice_send_block(block: MessageBlock, rng: RandomStream) -> tuple[BellKind, TwoQubitState]:
    """Draws a uniform carrier Bell state and encodes the block on it."""
    carrier = _CARRIERS[int(rng.integers(len(_CARRIERS)))]
    return carrier, encode(carrier, block)


def run_block(block: MessageBlock, cfg: SessionConfig, streams: TrialStreams) -> BlockTrace:
    """
    One pass of the protocol: Alice encodes on a random carrier, the qubits
    cross the noisy (and possibly tapped) channels, Bob decodes.

    Args:
        block (MessageBlock): the block Alice sends
        cfg (SessionConfig): noise, Eve and noise position
        streams (TrialStreams): the trial's random streams

    Returns:
        BlockTrace: the full record of the block
    """
    carrier, sent = alice_send_block(block, streams.carrier)
    topo = cfg.eve.topology(cfg.noise_after_eve)
    delivered, flips, events = transmit(sent, topo, cfg.noise, streams.noise, tap_rng=streams.eve)
    guess = guess_block(cfg.eve, events, streams.eve)
    decoded = decode(delivered, streams.decode)
    return BlockTrace(
        carrier,
        block,
        select_encoding_op(carrier, block),
        flips,
        EveObservation(events.bit1, events.bit2, guess),
        decoded,
        delivered,
    )


def replay_delivered_state(trace: BlockTrace, noise_after_eve: bool = False) -> TwoQubitState:
    """
    Rebuilds the state handed to Bob's decoder from a trace alone: re-encode,
    replay the recorded flips and project onto what Eve observed.
    """
    obs = trace.eve_obs

    def tapped(s: TwoQubitState) -> TwoQubitState:
        if obs.bits1 is not None and obs.bits2 is not None:
            return basis_state(2 * obs.bits1 + obs.bits2)
        if obs.bits1 is not None:
            return collapse_qubit(s, 1, obs.bits1)
        if obs.bits2 is not None:
            return collapse_qubit(s, 2, obs.bits2)
        return s

    sent = encode(trace.carrier, trace.block)
    if noise_after_eve:
        return apply_flips(tapped(sent), trace.flips)
    return tapped(apply_flips(sent, trace.flips))


def _bit_errors(sent: MessageBlock, decoded: MessageBlock) -> int:
    return bin(sent.value ^ decoded.value).count("1")


def exact_block_error(
    eve: EveStrategy = NO_EVE,
    noise: Optional[NoiseConfig] = None,
    noise_after_eve: bool = False,
    block: Optional[MessageBlock] = None,
) -> ErrorRates:
    """
    Exact block and bit error rate of Bob's readout, enumerating carriers,
    blocks (or only the given block), flips, tap outcomes and decoder outcomes.

    Returns:
        ErrorRates: (block_error_rate, bit_error_rate)
    """
    block_error = 0.0
    bit_error = 0.0
    for branch in enumerate_transmissions(eve, noise, noise_after_eve, block):
        for decoded, q in decode_distribution(branch.delivered).items():
            if decoded != branch.block:
                block_error += branch.probability * q
                bit_error += branch.probability * q * _bit_errors(branch.block, decoded) / 2
    return ErrorRates(block_error, bit_error)


def exact_message_error(
    eve: EveStrategy,
    blocks: Sequence[MessageBlock],
    noise: Optional[NoiseConfig] = None,
    noise_after_eve: bool = False,
) -> ErrorRates:
    """Bob's exact error rates averaged over the blocks of a given message (0 when empty)."""
    if not blocks:
        return ErrorRates(0.0, 0.0)
    rates = np.array([exact_block_error(eve, noise, noise_after_eve, block) for block in blocks])
    return ErrorRates(*(float(r) for r in rates.mean(axis=0)))


def binomial_agreement(rate: float, p: float, n: int, n_sigma: float = 3.0) -> bool:
    """
    True if an empirical rate over n Bernoulli trials lies within n_sigma
    binomial standard deviations of the exact probability p.
    """
    if n < 1:
        raise ValueError(f"Agreement needs at least one trial, got {n}.")
    slack = 1e-9 * n
    return bool(abs(rate * n - p * n) <= n_sigma * binom.std(n, min(max(p, 0.0), 1.0)) + slack)


def resolve_thread_count(n_threads: Optional[int] = None) -> int:
    """
    Number of worker threads: the explicit value, else QSDC_SIM_THREADS, else 1.

    Raises:
        ValueError: if the value is not a positive integer
    """
    if n_threads is None:
        raw = os.environ.get(THREADS_ENV_VAR)
        if raw is None or raw.strip() == "":
            return 1
        try:
            n_threads = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}.") from None
    if n_threads < 1:
        raise ValueError(f"The thread count must be a positive integer, got {n_threads}.")
    return n_threads


class ProtocolMonteCarlo:
    """
    For running a Monte Carlo campaign of the protocol and storing its results.

    Attributes:
        cfg: the SessionConfig of the campaign
        blocks: the message blocks sent in every trial
        sampler: the StreamSampler providing each trial's streams
        iterations: number of trials
        result_sets: one TrialResult per trial, in trial order
        stats: the aggregated RunStats after analyze
    """

    def __init__(self, cfg: SessionConfig) -> None:
        """
        Initializes the campaign without running any trial.

        Args:
            cfg: the campaign configuration
        """
        self.cfg = cfg
        self.blocks = cfg.message.blocks()
        self.sampler = StreamSampler(cfg.master_seed)

    def analyze(self, show_progress_bar: bool = True) -> RunStats:
        """
        Runs all trials (on QSDC_SIM_THREADS worker threads unless the config
        names a count) and aggregates them. Results do not depend on the
        number of threads.

        Args:
            show_progress_bar (bool, optional): whether to show a progress bar. (default True)

        Returns:
            RunStats: the aggregated statistics, also kept in self.stats
        """
        self.iterations = self.cfg.trials
        self._check_iterations()
        n_threads = resolve_thread_count(self.cfg.n_threads)

        # running the trials (this takes time!)
        indices = range(self.iterations)
        if n_threads == 1:
            results = map(self._run_trial, indices)
            self.result_sets = self._collect(results, show_progress_bar)
        else:
            with ThreadPoolExecutor(max_workers=n_threads) as pool:
                results = pool.map(self._run_trial, indices)
                self.result_sets = self._collect(results, show_progress_bar)

        self.stats = self._summarize()
        return self.stats

    def trial_traces(self, trial_index: int) -> list[BlockTrace]:
        """Re-runs one trial and returns the trace of each of its blocks."""
        streams = self.sampler.streams(trial_index)
        return [run_block(block, self.cfg, streams) for block in self.blocks]

    def _run_trial(self, trial_index: int) -> TrialResult:
        block_errors = bit_errors = eve_hits = 0
        for trace in self.trial_traces(trial_index):
            block_errors += trace.decoded != trace.block
            bit_errors += _bit_errors(trace.block, trace.decoded)
            eve_hits += trace.eve_obs.guess == trace.block
        return TrialResult(block_errors, bit_errors, eve_hits, eve_hits == len(self.blocks))

    def _collect(self, results, show_progress_bar: bool) -> list[TrialResult]:
        return list(
            tqdm(
                results,
                desc="Running protocol trials",
                total=self.iterations,
                leave=True,
                disable=not show_progress_bar,
            )
        )

    def _summarize(self) -> RunStats:
        cfg = self.cfg
        n_blocks = len(self.blocks)
        block_errors = sum(r.block_errors for r in self.result_sets)
        bit_errors = sum(r.bit_errors for r in self.result_sets)
        eve_hits = sum(r.eve_block_successes for r in self.result_sets)
        eve_messages = sum(r.eve_message_success for r in self.result_sets)
        n_block_trials = self.iterations * n_blocks
        n_bit_trials = self.iterations * cfg.message.n_bits

        # the oracle is conditioned on the message actually sent
        oracle_block, oracle_message = exact_success_for_blocks(
            cfg.eve, self.blocks, cfg.noise, cfg.noise_after_eve
        )
        oracle_errors = exact_message_error(cfg.eve, self.blocks, cfg.noise, cfg.noise_after_eve)
        return RunStats(
            trials=self.iterations,
            blocks_per_trial=n_blocks,
            n_bits=cfg.message.n_bits,
            block_errors=block_errors,
            bit_errors=bit_errors,
            eve_block_successes=eve_hits,
            eve_message_successes=eve_messages,
            block_error_rate=block_errors / n_block_trials if n_block_trials else 0.0,
            bit_error_rate=bit_errors / n_bit_trials if n_bit_trials else 0.0,
            eve_block_success_rate=eve_hits / n_block_trials if n_block_trials else 0.0,
            eve_message_success_rate=eve_messages / self.iterations,
            oracle_block_success=oracle_block,
            oracle_message_success=oracle_message,
            oracle_block_error_rate=oracle_errors.block_error_rate,
            oracle_bit_error_rate=oracle_errors.bit_error_rate,
            paper_claim_block_success=CLAIMED_BLOCK_SUCCESS,
            paper_claim_message_success=claimed_message_success(cfg.message.n_bits),
        )

    def _check_iterations(self) -> None:
        """
        Warns about a campaign too small to say anything.

        Raises:
            Warning: if there are fewer than 100 trials.
        """
        if self.iterations < 100:
            warnings.warn(f"You use {self.iterations} trials, that's probably not enough.")


def run_monte_carlo(cfg: SessionConfig, show_progress_bar: bool = False) -> RunStats:
    """
    Runs cfg.trials independent sessions of the full message and aggregates them.

    Args:
        cfg (SessionConfig): the campaign
        show_progress_bar (bool, optional): show a tqdm bar. Defaults to False.

    Returns:
        RunStats: rates, counts, oracle and claimed reference values
    """
    return ProtocolMonteCarlo(cfg).analyze(show_progress_bar=show_progress_bar)
