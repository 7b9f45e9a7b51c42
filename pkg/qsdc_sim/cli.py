"""
Command line front end.

    qsdc-sim run --message 0110 --trials 100000 --p 0.01 --eve synchronized-naive --seed 7
    qsdc-sim oracle --eve synchronized-bell-aware --message-hex a --message-bits 4
    qsdc-sim tables
    qsdc-sim noise-cases --format json --output cases.json

Exit codes: 0 success, 1 when the run fails or its results cannot be written,
2 usage error (including a bad QSDC_SIM_THREADS).
"""

import argparse
import json
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import sympy as sy

from qsdc_sim import __version__
from qsdc_sim.monte_carlo.session import (
    Message,
    RunStats,
    SessionConfig,
    binomial_agreement,
    exact_block_error,
    resolve_thread_count,
    run_monte_carlo,
)
from qsdc_sim.protocol.adversary import (
    ALL_STRATEGIES,
    CLAIMED_BLOCK_SUCCESS,
    NO_EVE,
    EveStrategy,
    claimed_message_success,
    exact_block_success,
    security_diagnostics,
)
from qsdc_sim.protocol.channel import (
    CLAIMED_ERROR_CASES,
    NoiseConfig,
    audit_noise_cases,
    count_error_cases,
)
from qsdc_sim.protocol.codec import ENCODING_TABLE, classify_bell, encode

FORMATS = ("text", "json")
DEFAULT_TRIALS = 100_000


@dataclass(frozen=True)
class CliConfig:
    """A validated command line."""

    subcommand: str
    message: Message = field(default_factory=Message)
    trials: int = DEFAULT_TRIALS
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    eve: EveStrategy = NO_EVE
    seed: int = 0
    output: Optional[Path] = None
    format: str = "text"
    noise_after_eve: bool = False
    threads: Optional[int] = None

    def session_config(self) -> SessionConfig:
        return SessionConfig(
            message=self.message,
            noise=self.noise,
            eve=self.eve,
            master_seed=self.seed,
            trials=self.trials,
            noise_after_eve=self.noise_after_eve,
            n_threads=self.threads,
        )


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError(f"probability {value} outside [0, 1]")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"{value} is not a positive integer")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed {value} outside [0, 2**64)")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsdc-sim",
        description="Simulate the two-channel super dense coding QSDC protocol.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--output", type=Path, help="write results to this file instead of stdout")
    output.add_argument("--format", choices=FORMATS, default="text")

    protocol = argparse.ArgumentParser(add_help=False)
    message = protocol.add_mutually_exclusive_group()
    message.add_argument("--message", help="message as a bit string, e.g. 0110")
    message.add_argument("--message-hex", help="message as hex digits (needs --message-bits)")
    protocol.add_argument("--message-bits", type=int, help="bit length of --message-hex")
    protocol.add_argument("--p", type=_probability, default=0.0, help="all four flip probabilities")
    for flag, what in (
        ("--px1", "bit flip, channel 1"),
        ("--pz1", "phase flip, channel 1"),
        ("--px2", "bit flip, channel 2"),
        ("--pz2", "phase flip, channel 2"),
    ):
        protocol.add_argument(flag, type=_probability, help=f"{what} (overrides --p)")
    protocol.add_argument(
        "--eve", choices=[s.name for s in ALL_STRATEGIES], default=NO_EVE.name
    )
    protocol.add_argument(
        "--noise-after-eve",
        action="store_true",
        help="put the noise between Eve and Bob instead of between Alice and Eve",
    )

    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    run_parser = subparsers.add_parser(
        "run", parents=[protocol, output], help="Monte Carlo campaign"
    )
    run_parser.add_argument("--trials", type=_positive_int, default=DEFAULT_TRIALS)
    run_parser.add_argument("--seed", type=_seed, default=0)
    run_parser.add_argument(
        "--threads", type=_positive_int, help="worker threads (default: QSDC_SIM_THREADS or 1)"
    )
    subparsers.add_parser(
        "oracle", parents=[protocol, output], help="exact success and error probabilities"
    )
    subparsers.add_parser("tables", parents=[output], help="the encoding tables")
    subparsers.add_parser(
        "noise-cases", parents=[output], help="printed noise cases against the computed ones"
    )
    return parser


def _parse_message(parser: argparse.ArgumentParser, args: argparse.Namespace) -> Message:
    if args.message_hex is not None:
        if args.message_bits is None:
            parser.error("--message-hex needs --message-bits")
        return Message.from_hex(args.message_hex, args.message_bits)
    if args.message_bits is not None:
        parser.error("--message-bits only applies to --message-hex")
    return Message.from_string(args.message or "")


def parse_args(argv: Optional[list[str]] = None) -> CliConfig:
    """
    Parses and validates a command line.

    Args:
        argv (list[str], optional): arguments without the program name.
            Defaults to sys.argv[1:].

    Returns:
        CliConfig: the validated configuration

    Raises:
        SystemExit: with code 2 on any usage error (argparse convention)
    """
    parser = _build_parser()
    args = parser.parse_args(argv)
    common = dict(subcommand=args.subcommand, output=args.output, format=args.format)
    if args.subcommand in ("tables", "noise-cases"):
        return CliConfig(**common)

    try:
        message = _parse_message(parser, args)
        noise = NoiseConfig(
            *(args.p if getattr(args, name) is None else getattr(args, name)
              for name in ("px1", "pz1", "px2", "pz2"))
        )
        eve = EveStrategy.from_name(args.eve)
    except ValueError as error:
        parser.error(str(error))

    if args.subcommand == "oracle":
        return CliConfig(
            message=message, noise=noise, eve=eve, noise_after_eve=args.noise_after_eve, **common
        )
    try:
        threads = resolve_thread_count(args.threads)
    except ValueError as error:
        parser.error(str(error))
    return CliConfig(
        message=message,
        trials=args.trials,
        noise=noise,
        eve=eve,
        seed=args.seed,
        noise_after_eve=args.noise_after_eve,
        threads=threads,
        **common,
    )


def _exact(value: float) -> str:
    """A float, followed by its rational form when it has a small denominator."""
    rational = sy.nsimplify(value, rational=True, tolerance=1e-12)
    if rational.q != 1 and rational.q <= 4096:
        return f"{value:.6g} ({rational})"
    return f"{value:.6g}"


# floats travel through json.dumps as tagged strings, then lose their quotes
_FLOAT_TAG = "\0float:"
_TAGGED_FLOAT = re.compile(r'"\\u0000float:([^"]+)"')


def _float17(value: float) -> str:
    """A float with 17 significant digits, still readable as a JSON float."""
    text = f"{value:.17g}"
    return text if any(c in text for c in ".en") else text + ".0"


def _tag_floats(payload):
    if isinstance(payload, float):
        return _FLOAT_TAG + _float17(payload)
    if isinstance(payload, dict):
        return {key: _tag_floats(value) for key, value in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [_tag_floats(value) for value in payload]
    return payload


def _dumps(payload) -> str:
    """JSON with sorted keys and every float written with 17 significant digits."""
    text = json.dumps(_tag_floats(payload), sort_keys=True, indent=2)
    return _TAGGED_FLOAT.sub(r"\1", text) + "\n"


def _noise_dict(noise: NoiseConfig) -> dict:
    return {"px1": noise.px1, "pz1": noise.pz1, "px2": noise.px2, "pz2": noise.pz2}


def _noise_text(noise: NoiseConfig, noise_after_eve: bool) -> str:
    where = "after Eve" if noise_after_eve else "before Eve"
    return f"px1={noise.px1:g} pz1={noise.pz1:g} px2={noise.px2:g} pz2={noise.pz2:g} ({where})"


def _table_rows() -> list[dict]:
    rows = []
    for (carrier, block), gate in ENCODING_TABLE.items():
        match = classify_bell(encode(carrier, block))
        rows.append(
            {"carrier": str(carrier), "block": str(block), "gate": str(gate), "output": str(match.kind)}
        )
    return rows


def emit_tables(fmt: str = "text") -> str:
    """
    The 16 (carrier, block, gate, output Bell state) rows, computed by the
    codec when called.
    """
    rows = _table_rows()
    if fmt == "json":
        return _dumps(rows)
    lines = ["carrier  block  gate  output"]
    for row in rows:
        lines.append(f"{row['carrier']:<9}{row['block']:<7}{row['gate']:<6}{row['output']}")
    return "\n".join(lines) + "\n"


def _agreement(stats: RunStats) -> dict:
    n_blocks = stats.trials * stats.blocks_per_trial
    if n_blocks == 0:
        return {"block_error": True, "bit_error": True, "eve_block_success": True}
    return {
        "block_error": binomial_agreement(stats.block_error_rate, stats.oracle_block_error_rate, n_blocks),
        "bit_error": binomial_agreement(
            stats.bit_error_rate, stats.oracle_bit_error_rate, stats.trials * stats.n_bits
        ),
        "eve_block_success": binomial_agreement(
            stats.eve_block_success_rate, stats.oracle_block_success, n_blocks
        ),
    }


def emit_results(stats: RunStats, cfg: CliConfig) -> str:
    """
    Renders a finished campaign. The JSON document has a fixed, sorted key set
    and no timestamps, so equal seeds give byte-identical files.
    """
    agreement = _agreement(stats)
    if cfg.format == "json":
        return _dumps(
            {
                "config": {
                    "eve": cfg.eve.name,
                    "message": str(cfg.message),
                    "n_bits": cfg.message.n_bits,
                    "noise": _noise_dict(cfg.noise),
                    "noise_after_eve": cfg.noise_after_eve,
                },
                "seed": cfg.seed,
                "trials": stats.trials,
                "blocks_per_trial": stats.blocks_per_trial,
                "block_error_rate": stats.block_error_rate,
                "bit_error_rate": stats.bit_error_rate,
                "eve_block_success_rate": stats.eve_block_success_rate,
                "eve_message_success_rate": stats.eve_message_success_rate,
                "oracle_block_success": stats.oracle_block_success,
                "oracle_message_success": stats.oracle_message_success,
                "oracle_block_error_rate": stats.oracle_block_error_rate,
                "oracle_bit_error_rate": stats.oracle_bit_error_rate,
                "paper_claim_block_success": stats.paper_claim_block_success,
                "paper_claim_message_success": stats.paper_claim_message_success,
                "agreement_3sigma": agreement,
            }
        )

    def verdict(ok: bool) -> str:
        return "agrees within 3 sigma" if ok else "DISAGREES beyond 3 sigma"

    n_bits = stats.n_bits
    lines = [
        "QSDC Monte Carlo run",
        f"  message               {str(cfg.message) or '(empty)'} ({stats.blocks_per_trial} blocks)",
        f"  eve                   {cfg.eve.name}",
        f"  noise                 {_noise_text(cfg.noise, cfg.noise_after_eve)}",
        f"  trials                {stats.trials} (seed {cfg.seed})",
        "",
        f"  block error rate      {stats.block_error_rate:.6g}   exact {_exact(stats.oracle_block_error_rate)}, "
        f"{verdict(agreement['block_error'])}",
        f"  bit error rate        {stats.bit_error_rate:.6g}   exact {_exact(stats.oracle_bit_error_rate)}, "
        f"{verdict(agreement['bit_error'])}",
        f"  Eve block success     {stats.eve_block_success_rate:.6g}   exact {_exact(stats.oracle_block_success)}, "
        f"{verdict(agreement['eve_block_success'])}",
        f"                        claimed {_exact(stats.paper_claim_block_success)}",
        f"  Eve message success   {stats.eve_message_success_rate:.6g}   exact {_exact(stats.oracle_message_success)}",
        f"                        claimed (1/4)^{n_bits} = {stats.paper_claim_message_success:.6g}",
    ]
    return "\n".join(lines) + "\n"


def emit_oracle(cfg: CliConfig) -> str:
    """Exact Eve success and Bob error probabilities next to the claimed values."""
    n_blocks = cfg.message.n_bits // 2
    block_success = exact_block_success(cfg.eve, cfg.noise, cfg.noise_after_eve)
    errors = exact_block_error(cfg.eve, cfg.noise, cfg.noise_after_eve)
    diagnostics = security_diagnostics()
    if cfg.format == "json":
        return _dumps(
            {
                "eve": cfg.eve.name,
                "n_bits": cfg.message.n_bits,
                "noise": _noise_dict(cfg.noise),
                "noise_after_eve": cfg.noise_after_eve,
                "oracle_block_success": block_success,
                "oracle_message_success": block_success**n_blocks,
                "oracle_block_error_rate": errors.block_error_rate,
                "oracle_bit_error_rate": errors.bit_error_rate,
                "paper_claim_block_success": CLAIMED_BLOCK_SUCCESS,
                "paper_claim_message_success": claimed_message_success(cfg.message.n_bits),
                "security": [
                    {
                        "state": str(row.kind),
                        "purity": row.purity,
                        "reduced_purity_1": row.reduced_purity_1,
                        "reduced_purity_2": row.reduced_purity_2,
                        "reduced_eigenvalues": list(row.reduced_eigenvalues),
                    }
                    for row in diagnostics
                ],
            }
        )
    lines = [
        f"Exact oracle for eve = {cfg.eve.name}",
        f"  noise                 {_noise_text(cfg.noise, cfg.noise_after_eve)}",
        f"  Eve block success     {_exact(block_success)}   claimed {_exact(CLAIMED_BLOCK_SUCCESS)}",
        f"  Eve message success   {_exact(block_success**n_blocks)} for {cfg.message.n_bits} random bits"
        f"   claimed (1/4)^{cfg.message.n_bits} = {claimed_message_success(cfg.message.n_bits):.6g}",
        f"  Bob block error rate  {_exact(errors.block_error_rate)}",
        f"  Bob bit error rate    {_exact(errors.bit_error_rate)}",
        "",
        "Single-channel view (purity of the state and of each channel's reduced state)",
        "  state  purity  channel 1  channel 2  reduced eigenvalues",
    ]
    for row in diagnostics:
        eigenvalues = ", ".join(f"{v:.4g}" for v in row.reduced_eigenvalues)
        lines.append(
            f"  {str(row.kind):<7}{row.purity:<8.4g}{row.reduced_purity_1:<11.4g}"
            f"{row.reduced_purity_2:<11.4g}{eigenvalues}"
        )
    return "\n".join(lines) + "\n"


def emit_noise_cases(fmt: str = "text") -> str:
    """The printed noise cases on |phi+> against the computed outcomes."""
    rows = audit_noise_cases()
    n_errors = count_error_cases(rows)
    if fmt == "json":
        return _dumps(
            {
                "rows": [
                    {
                        "case": row.description,
                        "flips": str(row.record),
                        "claimed": f"{'+' if row.claimed_sign > 0 else '-'}{row.claimed_kind}",
                        "claimed_probability": row.claimed_probability,
                        "computed_kind": str(row.computed_kind),
                        "computed_phase": [row.computed_phase.real, row.computed_phase.imag],
                        "model_probability": row.model_probability,
                        "kind_matches": row.kind_matches,
                        "sign_matches": row.sign_matches,
                        "causes_error": row.causes_error,
                    }
                    for row in rows
                ],
                "error_cases": n_errors,
                "claimed_error_cases": CLAIMED_ERROR_CASES,
            }
        )
    lines = ["flips          claimed  computed  kind  sign  claimed p  model p"]
    for row in rows:
        claimed = f"{'+' if row.claimed_sign > 0 else '-'}{row.claimed_kind}"
        sign = "+" if row.computed_phase.real > 0 else "-"
        lines.append(
            f"{str(row.record):<15}{claimed:<9}{sign + str(row.computed_kind):<10}"
            f"{'ok' if row.kind_matches else 'DIFF':<6}{'ok' if row.sign_matches else 'DIFF':<6}"
            f"{row.claimed_probability:<11}{row.model_probability}"
        )
    lines.append(f"cases causing a decoding error: {n_errors} (claimed {CLAIMED_ERROR_CASES})")
    return "\n".join(lines) + "\n"


def _render(cfg: CliConfig) -> str:
    if cfg.subcommand == "tables":
        return emit_tables(cfg.format)
    if cfg.subcommand == "noise-cases":
        return emit_noise_cases(cfg.format)
    if cfg.subcommand == "oracle":
        return emit_oracle(cfg)
    stats = run_monte_carlo(cfg.session_config(), show_progress_bar=sys.stderr.isatty())
    return emit_results(stats, cfg)


def main(argv: Optional[list[str]] = None) -> int:
    """Entry point of the qsdc-sim console script; returns the exit code."""
    try:
        cfg = parse_args(argv)
    except SystemExit as exit_:
        return exit_.code if isinstance(exit_.code, int) else 2
    try:
        text = _render(cfg)
    except ValueError as error:
        print(f"qsdc-sim: error: {error}", file=sys.stderr)
        return 1
    if cfg.output is None:
        sys.stdout.write(text)
        return 0
    try:
        cfg.output.write_text(text, encoding="utf-8")
    except OSError as error:
        print(f"qsdc-sim: cannot write {cfg.output}: {error}", file=sys.stderr)
        return 1
    return 0
