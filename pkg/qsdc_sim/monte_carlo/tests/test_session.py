import os
import unittest
from unittest import mock

import numpy as np
from scipy.stats import binom

from qsdc_sim.monte_carlo.sampler import StreamSampler
from qsdc_sim.monte_carlo.session import (
    Message,
    ProtocolMonteCarlo,
    SessionConfig,
    alice_send_block,
    binomial_agreement,
    exact_block_error,
    exact_message_error,
    replay_delivered_state,
    resolve_thread_count,
    run_block,
    run_monte_carlo,
)
from qsdc_sim.protocol.adversary import (
    ALL_STRATEGIES,
    NO_EVE,
    SYNCHRONIZED_BELL_AWARE,
    SYNCHRONIZED_NAIVE,
    exact_block_success,
)
from qsdc_sim.protocol.channel import NoiseConfig
from qsdc_sim.protocol.codec import CODEWORDS, MessageBlock, classify_bell, select_encoding_op
from qsdc_sim.quantum.qcore import BellKind

B = MessageBlock.from_string

# every block appears once, so block-averaged rates match the uniform-block oracles
ALL_BLOCKS = Message.from_string("00011011")


class TestMessage(unittest.TestCase):
    def test_blocks(self):
        self.assertEqual(Message.from_string("0110").blocks(), [B("01"), B("10")])
        self.assertEqual(Message().blocks(), [])

    def test_odd_length_rejected(self):
        with self.assertRaises(ValueError):
            Message.from_string("011")
        with self.assertRaises(ValueError):
            Message.from_string("01a1")

    def test_from_hex(self):
        self.assertEqual(str(Message.from_hex("a", 4)), "1010")
        self.assertEqual(str(Message.from_hex("1f", 6)), "011111")
        self.assertEqual(str(Message.from_hex("0", 0)), "")
        with self.assertRaises(ValueError):
            Message.from_hex("ff", 4)
        with self.assertRaises(ValueError):
            Message.from_hex("1", 3)
        with self.assertRaises(ValueError):
            Message.from_hex("xyz", 8)


class TestSessionConfig(unittest.TestCase):
    def test_defaults(self):
        cfg = SessionConfig()
        self.assertEqual(cfg.trials, 100_000)
        self.assertEqual(cfg.eve, NO_EVE)
        self.assertTrue(cfg.noise.is_noiseless)
        self.assertEqual(cfg.master_seed, 0)

    def test_rejects_bad_trials(self):
        for trials in (0, -5, 2.5):
            with self.assertRaises(ValueError):
                SessionConfig(trials=trials)


class TestAlice(unittest.TestCase):
    def test_carrier_frequencies(self):
        rng = np.random.default_rng(12)
        n = 10**5
        counts = {kind: 0 for kind in BellKind}
        for _ in range(n):
            carrier, _ = alice_send_block(B("00"), rng)
            counts[carrier] += 1
        for kind, count in counts.items():
            self.assertLessEqual(abs(count - n / 4), 3 * binom.std(n, 0.25), str(kind))

    def test_codeword_is_carrier_independent(self):
        rng = np.random.default_rng(13)
        for _ in range(40):
            for block, kind in ((B("00"), BellKind.PHI_PLUS), (B("11"), BellKind.PSI_MINUS)):
                _, state = alice_send_block(block, rng)
                self.assertEqual(classify_bell(state).kind, kind)


class TestRunBlock(unittest.TestCase):
    def traces(self, cfg, n_trials=50):
        sampler = StreamSampler(cfg.master_seed)
        for index in range(n_trials):
            streams = sampler.streams(index)
            for block in MessageBlock.all():
                yield run_block(block, cfg, streams)

    def test_noiseless_decoding(self):
        for trace in self.traces(SessionConfig(trials=1)):
            self.assertEqual(trace.decoded, trace.block)
            self.assertEqual(trace.gate, select_encoding_op(trace.carrier, trace.block))
            self.assertIsNone(trace.eve_obs.bits1)

    def test_forced_bit_flip(self):
        cfg = SessionConfig(noise=NoiseConfig(px1=1), trials=1)
        for trace in self.traces(cfg):
            self.assertEqual(trace.decoded, MessageBlock(trace.block.value ^ 1))

    def test_synchronized_eve_leaves_two_outcomes(self):
        cfg = SessionConfig(eve=SYNCHRONIZED_NAIVE, trials=1)
        seen = {block: set() for block in MessageBlock.all()}
        for trace in self.traces(cfg, n_trials=200):
            seen[trace.block].add(trace.decoded)
        for block, decoded in seen.items():
            is_phi = CODEWORDS[block] in (BellKind.PHI_PLUS, BellKind.PHI_MINUS)
            expected = {B("00"), B("10")} if is_phi else {B("01"), B("11")}
            self.assertEqual(decoded, expected, str(block))

    def test_trace_replay(self):
        for eve in ALL_STRATEGIES:
            for noise_after_eve in (False, True):
                cfg = SessionConfig(
                    noise=NoiseConfig.uniform(0.25), eve=eve, noise_after_eve=noise_after_eve, trials=1
                )
                for trace in self.traces(cfg, n_trials=10):
                    np.testing.assert_allclose(
                        replay_delivered_state(trace, noise_after_eve).amp,
                        trace.delivered.amp,
                        atol=1e-12,
                    )


class TestExactBlockError(unittest.TestCase):
    def test_noiseless(self):
        rates = exact_block_error()
        self.assertAlmostEqual(rates.block_error_rate, 0.0, delta=1e-12)
        self.assertAlmostEqual(rates.bit_error_rate, 0.0, delta=1e-12)

    def test_forced_bit_flip(self):
        rates = exact_block_error(noise=NoiseConfig(px1=1))
        self.assertAlmostEqual(rates.block_error_rate, 1.0, delta=1e-12)
        self.assertAlmostEqual(rates.bit_error_rate, 0.5, delta=1e-12)

    def test_synchronized_eve(self):
        for eve in (SYNCHRONIZED_NAIVE, SYNCHRONIZED_BELL_AWARE):
            rates = exact_block_error(eve)
            self.assertAlmostEqual(rates.block_error_rate, 0.5, delta=1e-12)
            self.assertAlmostEqual(rates.bit_error_rate, 0.25, delta=1e-12)

    def test_message_error(self):
        noise = NoiseConfig(0.1, 0.2, 0.0, 0.05)
        self.assertEqual(exact_message_error(SYNCHRONIZED_NAIVE, []), (0.0, 0.0))
        uniform = exact_block_error(SYNCHRONIZED_NAIVE, noise)
        rates = exact_message_error(SYNCHRONIZED_NAIVE, ALL_BLOCKS.blocks(), noise)
        self.assertAlmostEqual(rates.block_error_rate, uniform.block_error_rate, delta=1e-12)
        self.assertAlmostEqual(rates.bit_error_rate, uniform.bit_error_rate, delta=1e-12)
        single = exact_block_error(NO_EVE, noise, block=B("10"))
        rates = exact_message_error(NO_EVE, [B("10"), B("10")], noise)
        self.assertAlmostEqual(rates.block_error_rate, single.block_error_rate, delta=1e-12)


class TestBinomialAgreement(unittest.TestCase):
    def test_agreement(self):
        self.assertTrue(binomial_agreement(0.5, 0.5, 100))
        self.assertTrue(binomial_agreement(0.0, 0.0, 100))
        self.assertFalse(binomial_agreement(0.01, 0.0, 100))
        self.assertFalse(binomial_agreement(0.8, 0.5, 100))
        with self.assertRaises(ValueError):
            binomial_agreement(0.5, 0.5, 0)


class TestThreadCount(unittest.TestCase):
    def test_explicit(self):
        self.assertEqual(resolve_thread_count(3), 3)
        with self.assertRaises(ValueError):
            resolve_thread_count(0)

    def test_environment(self):
        with mock.patch.dict(os.environ, {"QSDC_SIM_THREADS": "4"}):
            self.assertEqual(resolve_thread_count(), 4)
        with mock.patch.dict(os.environ, {"QSDC_SIM_THREADS": "many"}):
            with self.assertRaises(ValueError):
                resolve_thread_count()
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(resolve_thread_count(), 1)


class TestMonteCarlo(unittest.TestCase):
    def test_init(self):
        mc = ProtocolMonteCarlo(SessionConfig(message=ALL_BLOCKS, trials=100))
        self.assertIsInstance(mc, ProtocolMonteCarlo)
        self.assertEqual(len(mc.blocks), 4)

    def test_analyze(self):
        mc = ProtocolMonteCarlo(SessionConfig(message=ALL_BLOCKS, trials=100))
        stats = mc.analyze(show_progress_bar=False)
        self.assertEqual(len(mc.result_sets), 100)
        self.assertIs(mc.stats, stats)
        self.assertEqual(stats.blocks_per_trial, 4)

    def test_few_trials_warn(self):
        with self.assertWarns(UserWarning):
            run_monte_carlo(SessionConfig(message=ALL_BLOCKS, trials=10))

    def test_noiseless_correctness(self):
        stats = run_monte_carlo(SessionConfig(message=Message.from_string("0110110001"), trials=200))
        self.assertEqual(stats.bit_error_rate, 0.0)
        self.assertEqual(stats.block_error_rate, 0.0)
        self.assertAlmostEqual(stats.oracle_bit_error_rate, 0.0, delta=1e-12)

    def test_forced_bit_flip(self):
        stats = run_monte_carlo(SessionConfig(message=ALL_BLOCKS, noise=NoiseConfig(px1=1), trials=200))
        self.assertEqual(stats.block_error_rate, 1.0)
        self.assertEqual(stats.bit_error_rate, 0.5)

    def test_empty_message(self):
        stats = run_monte_carlo(SessionConfig(eve=SYNCHRONIZED_NAIVE, trials=100))
        self.assertEqual(stats.block_error_rate, 0.0)
        self.assertEqual(stats.bit_error_rate, 0.0)
        self.assertEqual(stats.eve_message_success_rate, 1.0)
        self.assertEqual(stats.oracle_message_success, 1.0)
        self.assertEqual(stats.paper_claim_message_success, 1.0)

    def test_claimed_values(self):
        stats = run_monte_carlo(SessionConfig(message=ALL_BLOCKS, trials=100))
        self.assertEqual(stats.paper_claim_block_success, 1 / 16)
        self.assertEqual(stats.paper_claim_message_success, 0.25**8)

    def test_determinism(self):
        cfg = SessionConfig(
            message=ALL_BLOCKS,
            noise=NoiseConfig.uniform(0.1),
            eve=SYNCHRONIZED_NAIVE,
            master_seed=77,
            trials=300,
        )
        first = run_monte_carlo(cfg)
        second = run_monte_carlo(cfg)
        self.assertEqual(first, second)
        mc = ProtocolMonteCarlo(cfg)
        self.assertEqual(mc.trial_traces(17), ProtocolMonteCarlo(cfg).trial_traces(17))

    def test_thread_count_does_not_change_results(self):
        base = dict(
            message=ALL_BLOCKS,
            noise=NoiseConfig.uniform(0.1),
            eve=SYNCHRONIZED_BELL_AWARE,
            master_seed=5,
            trials=300,
        )
        single = ProtocolMonteCarlo(SessionConfig(n_threads=1, **base))
        multi = ProtocolMonteCarlo(SessionConfig(n_threads=4, **base))
        self.assertEqual(single.analyze(False), multi.analyze(False))
        self.assertEqual(single.result_sets, multi.result_sets)

    def test_noise_draws_do_not_depend_on_eve(self):
        traces = {}
        for eve in (NO_EVE, SYNCHRONIZED_NAIVE):
            cfg = SessionConfig(message=ALL_BLOCKS, noise=NoiseConfig.uniform(0.3), eve=eve, trials=1)
            traces[eve] = ProtocolMonteCarlo(cfg).trial_traces(0)
        self.assertEqual(
            [(t.carrier, t.flips) for t in traces[NO_EVE]],
            [(t.carrier, t.flips) for t in traces[SYNCHRONIZED_NAIVE]],
        )


class TestOracleAgreement(unittest.TestCase):
    """
    10**5 blocks per configuration against the enumeration oracles. 4 sigma
    here, since the grid makes dozens of checks at once.
    """

    N_SIGMA = 4

    def test_grid(self):
        trials = 25_000
        n_blocks = trials * 4
        for p in (0.0, 0.01, 0.1, 0.25):
            for eve in (NO_EVE, SYNCHRONIZED_NAIVE, SYNCHRONIZED_BELL_AWARE):
                with self.subTest(p=p, eve=eve.name):
                    noise = NoiseConfig.uniform(p)
                    stats = run_monte_carlo(
                        SessionConfig(message=ALL_BLOCKS, noise=noise, eve=eve, master_seed=11, trials=trials)
                    )
                    self.assertAlmostEqual(stats.oracle_block_success, exact_block_success(eve, noise))
                    self.assertTrue(
                        binomial_agreement(
                            stats.block_error_rate, stats.oracle_block_error_rate, n_blocks, self.N_SIGMA
                        )
                    )
                    self.assertTrue(
                        binomial_agreement(
                            stats.eve_block_success_rate, stats.oracle_block_success, n_blocks, self.N_SIGMA
                        )
                    )
                    self.assertTrue(
                        binomial_agreement(
                            stats.eve_message_success_rate,
                            stats.oracle_message_success,
                            trials,
                            self.N_SIGMA,
                        )
                    )

    def test_fixed_messages(self):
        trials = 20_000
        cases = (
            # message, eve, exact block success, exact message success
            ("1010", SYNCHRONIZED_NAIVE, 0.0, 0.0),
            ("0000", SYNCHRONIZED_NAIVE, 0.5, 0.25),
            ("1111", SYNCHRONIZED_BELL_AWARE, 0.5, 0.25),
            ("00011011", SYNCHRONIZED_NAIVE, 0.25, 0.0),
        )
        for bits, eve, block_success, message_success in cases:
            with self.subTest(message=bits, eve=eve.name):
                message = Message.from_string(bits)
                stats = run_monte_carlo(SessionConfig(message=message, eve=eve, master_seed=3, trials=trials))
                self.assertAlmostEqual(stats.oracle_block_success, block_success, delta=1e-12)
                self.assertAlmostEqual(stats.oracle_message_success, message_success, delta=1e-12)
                n_blocks = trials * len(message.blocks())
                self.assertTrue(
                    binomial_agreement(
                        stats.eve_block_success_rate, stats.oracle_block_success, n_blocks, self.N_SIGMA
                    )
                )
                self.assertTrue(
                    binomial_agreement(
                        stats.eve_message_success_rate, stats.oracle_message_success, trials, self.N_SIGMA
                    )
                )
                self.assertAlmostEqual(stats.oracle_block_error_rate, 0.5, delta=1e-12)
                self.assertAlmostEqual(stats.oracle_bit_error_rate, 0.25, delta=1e-12)

    def test_naive_eve_never_guesses_minus_codewords(self):
        stats = run_monte_carlo(
            SessionConfig(message=Message.from_string("1010"), eve=SYNCHRONIZED_NAIVE, trials=500)
        )
        self.assertEqual(stats.eve_block_successes, 0)
        self.assertEqual(stats.oracle_block_success, 0.0)


if __name__ == "__main__":
    unittest.main()
