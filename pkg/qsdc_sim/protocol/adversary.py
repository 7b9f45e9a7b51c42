"""
Eavesdropper models on the two channels and exact oracles for her success.

Eve measures in the computational basis only. With a single tap she sees one
bit whose marginal is uniform for every codeword, so she guesses blindly. The
synchronized attack measures both channels of the same transmission; its two
readings differ in how the channel bits become a message guess:

- naive: the measured bit pair is taken verbatim as the block;
- Bell-aware: correlated bits point to {00, 10} (phi codewords), anticorrelated
  bits to {01, 11} (psi codewords), and she guesses uniformly within the pair.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np

from qsdc_sim.protocol.channel import (
    ChannelTopology,
    InterceptEvents,
    NoiseConfig,
    enumerate_noise_outcomes,
    enumerate_tap_outcomes,
    intercept_taps,
)
from qsdc_sim.protocol.codec import MessageBlock, encode
from qsdc_sim.quantum.qcore import (
    BellKind,
    RandomStream,
    TwoQubitState,
    bell_state,
    density,
    partial_trace,
    purity,
    spectrum,
)

# per-block success the published analysis claims for the synchronized attack
CLAIMED_BLOCK_SUCCESS = 1 / 16


class StrategyKind(Enum):
    NO_EVE = "none"
    SINGLE_CHANNEL = "single"
    SYNCHRONIZED_NAIVE = "synchronized-naive"
    SYNCHRONIZED_BELL_AWARE = "synchronized-bell-aware"


@dataclass(frozen=True)
class EveStrategy:
    """
    What Eve does on each transmission.

    Attributes:
        kind (StrategyKind): the attack
        channel (int, optional): 1 or 2 for SINGLE_CHANNEL, otherwise None
    """

    kind: StrategyKind
    channel: Optional[int] = None

    def __post_init__(self):
        if self.kind is StrategyKind.SINGLE_CHANNEL:
            if self.channel not in (1, 2):
                raise ValueError(f"A single-channel attack needs channel 1 or 2, got {self.channel!r}.")
        elif self.channel is not None:
            raise ValueError(f"Only single-channel attacks take a channel, got {self.channel!r}.")

    @classmethod
    def from_name(cls, name: str) -> "EveStrategy":
        """Parses the names used on the command line (see `name`)."""
        for strategy in ALL_STRATEGIES:
            if strategy.name == name:
                return strategy
        names = ", ".join(s.name for s in ALL_STRATEGIES)
        raise ValueError(f"Unknown Eve strategy {name!r}; choose one of {names}.")

    @property
    def name(self) -> str:
        if self.kind is StrategyKind.SINGLE_CHANNEL:
            return f"single-{self.channel}"
        return self.kind.value

    @property
    def synchronized(self) -> bool:
        return self.kind in (StrategyKind.SYNCHRONIZED_NAIVE, StrategyKind.SYNCHRONIZED_BELL_AWARE)

    def topology(self, noise_after_taps: bool = False) -> ChannelTopology:
        """The taps this strategy attaches."""
        return ChannelTopology(
            tap1=self.synchronized or self.channel == 1,
            tap2=self.synchronized or self.channel == 2,
            noise_after_taps=noise_after_taps,
        )

    def __str__(self):
        return self.name


NO_EVE = EveStrategy(StrategyKind.NO_EVE)
SINGLE_CHANNEL_1 = EveStrategy(StrategyKind.SINGLE_CHANNEL, 1)
SINGLE_CHANNEL_2 = EveStrategy(StrategyKind.SINGLE_CHANNEL, 2)
SYNCHRONIZED_NAIVE = EveStrategy(StrategyKind.SYNCHRONIZED_NAIVE)
SYNCHRONIZED_BELL_AWARE = EveStrategy(StrategyKind.SYNCHRONIZED_BELL_AWARE)
ALL_STRATEGIES = (
    NO_EVE,
    SINGLE_CHANNEL_1,
    SINGLE_CHANNEL_2,
    SYNCHRONIZED_NAIVE,
    SYNCHRONIZED_BELL_AWARE,
)


class EveObservation(NamedTuple):
    """Eve's channel readings (None where she has no tap) and her block guess."""

    bits1: Optional[int]
    bits2: Optional[int]
    guess: MessageBlock


def guess_distribution(strat: EveStrategy, events: InterceptEvents) -> dict[MessageBlock, float]:
    """
    Eve's guessing rule as an exact distribution over blocks.

    Args:
        strat (EveStrategy): the attack
        events (InterceptEvents): what her taps observed

    Returns:
        dict[MessageBlock, float]: probability of each guess (only non-zero entries)
    """
    if strat.kind is StrategyKind.SYNCHRONIZED_NAIVE:
        return {MessageBlock.from_bits(events.bit1, events.bit2): 1.0}
    if strat.kind is StrategyKind.SYNCHRONIZED_BELL_AWARE:
        low = events.bit1 ^ events.bit2
        return {MessageBlock.from_bits(0, low): 0.5, MessageBlock.from_bits(1, low): 0.5}
    return {block: 0.25 for block in MessageBlock.all()}


def guess_block(strat: EveStrategy, events: InterceptEvents, rng: RandomStream) -> MessageBlock:
    """Draws Eve's guess from guess_distribution. Always consumes one uniform."""
    u = rng.random()
    candidates = list(guess_distribution(strat, events).items())
    cumulative = 0.0
    for block, probability in candidates:
        cumulative += probability
        if u < cumulative:
            return block
    return candidates[-1][0]


def eve_intercept(
    s: TwoQubitState, strat: EveStrategy, rng: RandomStream
) -> tuple[EveObservation, TwoQubitState]:
    """
    Performs the strategy's measurements on a transmission and forms her guess.

    Args:
        s (TwoQubitState): the state on the channels
        strat (EveStrategy): the attack
        rng (RandomStream): Eve's stream (measurements and guess)

    Returns:
        tuple[EveObservation, TwoQubitState]: her observation and the
            (possibly collapsed) state forwarded to Bob
    """
    events, post = intercept_taps(s, strat.topology(), rng)
    guess = guess_block(strat, events, rng)
    return EveObservation(events.bit1, events.bit2, guess), post


class TransmissionBranch(NamedTuple):
    block: MessageBlock
    events: InterceptEvents
    delivered: TwoQubitState
    probability: float


def enumerate_transmissions(
    strat: EveStrategy,
    noise: Optional[NoiseConfig] = None,
    noise_after_taps: bool = False,
    block: Optional[MessageBlock] = None,
) -> Iterator[TransmissionBranch]:
    """
    Every branch of one protocol block: uniform carrier x block x noise flips
    x tap outcomes, with its probability.

    Args:
        strat (EveStrategy): the attack
        noise (NoiseConfig, optional): channel noise. Defaults to noiseless.
        noise_after_taps (bool, optional): noise behind the taps. Defaults to False.
        block (MessageBlock, optional): the block Alice sends. Defaults to a
            uniformly random block.

    Yields:
        TransmissionBranch: the block, tap readings, state delivered to Bob
            and branch probability
    """
    noise = NoiseConfig() if noise is None else noise
    topo = strat.topology(noise_after_taps)
    blocks = MessageBlock.all() if block is None else [block]
    for carrier in BellKind:
        for sent_block in blocks:
            sent = encode(carrier, sent_block)
            weight = 1 / (len(BellKind) * len(blocks))
            before = [(sent, 1.0)] if noise_after_taps else [
                (o.state, o.probability) for o in enumerate_noise_outcomes(sent, noise)
            ]
            for state, p_before in before:
                for tap in enumerate_tap_outcomes(state, topo):
                    after = [(tap.state, 1.0)] if not noise_after_taps else [
                        (o.state, o.probability) for o in enumerate_noise_outcomes(tap.state, noise)
                    ]
                    for delivered, p_after in after:
                        yield TransmissionBranch(
                            sent_block,
                            tap.events,
                            delivered,
                            weight * p_before * tap.probability * p_after,
                        )


def exact_block_success(
    strat: EveStrategy,
    noise: Optional[NoiseConfig] = None,
    noise_after_taps: bool = False,
    block: Optional[MessageBlock] = None,
) -> float:
    """
    Exact probability that Eve's guess equals the transmitted block.

    Without taps (NO_EVE) or with a single tap she guesses uniformly, which
    gives 1/4. The synchronized attacks depend on the block: the naive guess
    never hits 10 or 11, whose codewords carry a minus sign she cannot see.

    Args:
        strat (EveStrategy): the attack
        noise (NoiseConfig, optional): channel noise. Defaults to noiseless.
        noise_after_taps (bool, optional): noise behind the taps. Defaults to False.
        block (MessageBlock, optional): condition on this block. Defaults to
            a uniformly random block.

    Returns:
        float: per-block success probability
    """
    success = 0.0
    for branch in enumerate_transmissions(strat, noise, noise_after_taps, block):
        success += branch.probability * guess_distribution(strat, branch.events).get(branch.block, 0.0)
    return success


def exact_message_success(
    strat: EveStrategy,
    n_blocks: int,
    noise: Optional[NoiseConfig] = None,
    noise_after_taps: bool = False,
) -> float:
    """
    Probability that Eve guesses all n_blocks blocks of a message of uniformly
    random blocks; blocks are independent because each uses a fresh carrier.

    Raises:
        ValueError: if n_blocks is negative
    """
    if n_blocks < 0:
        raise ValueError(f"A message cannot have {n_blocks} blocks.")
    return exact_block_success(strat, noise, noise_after_taps) ** n_blocks


def exact_success_for_blocks(
    strat: EveStrategy,
    blocks: Sequence[MessageBlock],
    noise: Optional[NoiseConfig] = None,
    noise_after_taps: bool = False,
) -> tuple[float, float]:
    """
    Eve's exact success on a given message.

    Args:
        strat (EveStrategy): the attack
        blocks (Sequence[MessageBlock]): the message blocks, in order
        noise (NoiseConfig, optional): channel noise. Defaults to noiseless.
        noise_after_taps (bool, optional): noise behind the taps. Defaults to False.

    Returns:
        tuple[float, float]: the mean per-block success over the message
            (0 for an empty message) and the probability of guessing every
            block (1 for an empty message)
    """
    cache = {}
    for block in blocks:
        if block not in cache:
            cache[block] = exact_block_success(strat, noise, noise_after_taps, block)
    per_block = [cache[block] for block in blocks]
    if not per_block:
        return 0.0, 1.0
    return float(np.mean(per_block)), float(np.prod(per_block))


def claimed_message_success(n_bits: int) -> float:
    """The published bound (1/16)^(N/2) = (1/4)^N for an N-bit message."""
    return 0.25**n_bits


class SecurityDiagnostic(NamedTuple):
    kind: BellKind
    purity: float
    reduced_purity_1: float
    reduced_purity_2: float
    reduced_eigenvalues: tuple[float, float]


def security_diagnostics() -> list[SecurityDiagnostic]:
    """
    Purity of each Bell state and of its single-channel marginals. Every
    marginal is I/2 (purity 1/2, eigenvalues 1/2, 1/2): a single tap learns
    nothing about the codeword.
    """
    rows = []
    for kind in BellKind:
        rho = density(bell_state(kind))
        reduced_1 = partial_trace(rho, 1)
        eigenvalues, _ = spectrum(reduced_1)
        rows.append(
            SecurityDiagnostic(
                kind,
                purity(rho),
                purity(reduced_1),
                purity(partial_trace(rho, 2)),
                tuple(float(v) for v in np.real(eigenvalues)),
            )
        )
    return rows
