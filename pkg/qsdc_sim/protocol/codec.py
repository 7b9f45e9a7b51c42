"""
Super dense coding for the QSDC protocol: Alice picks the operator U from the
carrier Bell state and the 2-bit block, applies U to qubit 1, and Bob decodes
with B = (H (x) I) CNOT followed by a computational-basis measurement.

Whatever the carrier, the codeword for a block is always the same Bell state:
00 -> phi+, 01 -> psi+, 10 -> phi-, 11 -> psi-.
"""

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Optional

import numpy as np

from qsdc_sim.quantum.qcore import (
    STATE_TOLERANCE,
    BellKind,
    FourByFourOperator,
    GateLabel,
    RandomStream,
    TwoQubitState,
    apply,
    bell_state,
    born_probabilities,
    inner,
    measure_computational,
    tensor,
)


@dataclass(frozen=True, order=True)
class MessageBlock:
    """
    One 2-bit unit of the message. The left bit is the most significant:
    "10" is value 2.

    Attributes:
        value (int): 0, 1, 2 or 3
    """

    value: int

    def __post_init__(self):
        if not isinstance(self.value, (int, np.integer)) or not 0 <= self.value <= 3:
            raise ValueError(f"A message block is an integer in [0, 3], got {self.value!r}.")
        object.__setattr__(self, "value", int(self.value))

    @classmethod
    def from_bits(cls, high: int, low: int) -> "MessageBlock":
        for bit in (high, low):
            if bit not in (0, 1):
                raise ValueError(f"Bits must be 0 or 1, got {bit!r}.")
        return cls(2 * high + low)

    @classmethod
    def from_string(cls, bits: str) -> "MessageBlock":
        if len(bits) != 2 or any(b not in "01" for b in bits):
            raise ValueError(f"A block is written as two binary digits, got {bits!r}.")
        return cls.from_bits(int(bits[0]), int(bits[1]))

    @classmethod
    def all(cls) -> list["MessageBlock"]:
        return [cls(value) for value in range(4)]

    @property
    def high(self) -> int:
        return self.value >> 1

    @property
    def low(self) -> int:
        return self.value & 1

    @property
    def bits(self) -> str:
        return f"{self.high}{self.low}"

    def __str__(self):
        return self.bits


EncodingTable = Mapping[tuple[BellKind, MessageBlock], GateLabel]

_B = MessageBlock.from_string

ENCODING_TABLE: EncodingTable = {
    (BellKind.PHI_PLUS, _B("00")): GateLabel.I,
    (BellKind.PHI_PLUS, _B("01")): GateLabel.X,
    (BellKind.PHI_PLUS, _B("10")): GateLabel.Z,
    (BellKind.PHI_PLUS, _B("11")): GateLabel.IY,
    (BellKind.PHI_MINUS, _B("00")): GateLabel.Z,
    (BellKind.PHI_MINUS, _B("01")): GateLabel.XZ,
    (BellKind.PHI_MINUS, _B("10")): GateLabel.I,
    (BellKind.PHI_MINUS, _B("11")): GateLabel.IYZ,
    (BellKind.PSI_PLUS, _B("00")): GateLabel.X,
    (BellKind.PSI_PLUS, _B("01")): GateLabel.I,
    (BellKind.PSI_PLUS, _B("10")): GateLabel.IY,
    (BellKind.PSI_PLUS, _B("11")): GateLabel.Z,
    (BellKind.PSI_MINUS, _B("00")): GateLabel.XZ,
    (BellKind.PSI_MINUS, _B("01")): GateLabel.Z,
    (BellKind.PSI_MINUS, _B("10")): GateLabel.IYZ,
    (BellKind.PSI_MINUS, _B("11")): GateLabel.I,
}

CODEWORDS: Mapping[MessageBlock, BellKind] = {
    _B("00"): BellKind.PHI_PLUS,
    _B("01"): BellKind.PSI_PLUS,
    _B("10"): BellKind.PHI_MINUS,
    _B("11"): BellKind.PSI_MINUS,
}


class BellMatch(NamedTuple):
    """A state identified as a Bell state times a global phase."""

    kind: BellKind
    phase: complex


def classify_bell(s: TwoQubitState) -> Optional[BellMatch]:
    """
    Identifies s as one of the four Bell states up to global phase.

    Args:
        s (TwoQubitState): normalized state

    Returns:
        BellMatch or None: the Bell kind and the phase <b|s>, or None when s
            is not a Bell state within STATE_TOLERANCE
    """
    for kind in BellKind:
        overlap = inner(bell_state(kind), s)
        if abs(overlap) >= 1 - STATE_TOLERANCE:
            return BellMatch(kind, overlap)
    return None


def check_encoding_table(table: EncodingTable) -> None:
    """
    Validates that an encoding table covers all 16 (carrier, block) pairs and
    that each carrier maps its four blocks onto four distinct Bell states.

    Raises:
        ValueError: if the table is incomplete or not decodable
    """
    missing = [
        (carrier, block)
        for carrier in BellKind
        for block in MessageBlock.all()
        if (carrier, block) not in table
    ]
    if missing:
        raise ValueError(f"Encoding table misses {len(missing)} entries: {missing}.")
    for carrier in BellKind:
        outputs = []
        for block in MessageBlock.all():
            state = apply(tensor(table[(carrier, block)], GateLabel.I), bell_state(carrier))
            match = classify_bell(state)
            if match is None:
                raise ValueError(
                    f"Carrier {carrier} with block {block} does not give a Bell state."
                )
            outputs.append(match.kind)
        if len(set(outputs)) != 4:
            raise ValueError(
                f"Carrier {carrier} maps blocks onto {outputs}, which Bob cannot decode."
            )


check_encoding_table(ENCODING_TABLE)

_ENCODERS = {
    key: tensor(label, GateLabel.I) for key, label in ENCODING_TABLE.items()
}


def select_encoding_op(carrier: BellKind, m: MessageBlock) -> GateLabel:
    """The operator U Alice applies to qubit 1 for this carrier and block."""
    return ENCODING_TABLE[(carrier, m)]


def encode(carrier: BellKind, m: MessageBlock) -> TwoQubitState:
    """
    Alice's encoding circuit: (U (x) I) applied to the carrier Bell state.

    Args:
        carrier (BellKind): the randomly generated carrier
        m (MessageBlock): the block to send

    Returns:
        TwoQubitState: the codeword CODEWORDS[m] up to global phase
    """
    return apply(_ENCODERS[(carrier, m)], bell_state(carrier))


_CNOT = FourByFourOperator(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
)
_DECODER = tensor(GateLabel.H, GateLabel.I) @ _CNOT


def decoder_matrix() -> FourByFourOperator:
    """Bob's decoding circuit B = (H (x) I) CNOT (CNOT acts first)."""
    return _DECODER


def decode_distribution(s: TwoQubitState) -> dict[MessageBlock, float]:
    """
    Exact distribution of the block Bob reads out of s.

    Returns:
        dict[MessageBlock, float]: probability per block (zero entries kept)
    """
    probs = born_probabilities(apply(_DECODER, s))
    return {MessageBlock(k): float(probs[k]) for k in range(4)}


def decode(s: TwoQubitState, rng: RandomStream) -> MessageBlock:
    """
    Applies B and measures both qubits; the outcome bits are the block.
    Deterministic whenever s is a Bell state up to global phase.

    Args:
        s (TwoQubitState): the state delivered to Bob
        rng (RandomStream): Bob's measurement stream

    Returns:
        MessageBlock: the decoded block
    """
    (b1, b2), _ = measure_computational(apply(_DECODER, s), rng)
    return MessageBlock.from_bits(b1, b2)
