import unittest

import numpy as np
from scipy.stats import binom

from qsdc_sim.protocol.adversary import (
    ALL_STRATEGIES,
    CLAIMED_BLOCK_SUCCESS,
    NO_EVE,
    SINGLE_CHANNEL_1,
    SINGLE_CHANNEL_2,
    SYNCHRONIZED_BELL_AWARE,
    SYNCHRONIZED_NAIVE,
    EveStrategy,
    StrategyKind,
    claimed_message_success,
    enumerate_transmissions,
    eve_intercept,
    exact_block_success,
    exact_message_success,
    exact_success_for_blocks,
    guess_block,
    guess_distribution,
    security_diagnostics,
)
from qsdc_sim.protocol.channel import InterceptEvents, NoiseConfig
from qsdc_sim.protocol.codec import CODEWORDS, MessageBlock
from qsdc_sim.quantum.qcore import BellKind, basis_state, bell_state

B = MessageBlock.from_string


class TestEveStrategy(unittest.TestCase):
    def test_names_round_trip(self):
        for strategy in ALL_STRATEGIES:
            self.assertEqual(EveStrategy.from_name(strategy.name), strategy)
        self.assertEqual(SINGLE_CHANNEL_2.name, "single-2")

    def test_unknown_name(self):
        with self.assertRaises(ValueError):
            EveStrategy.from_name("single-3")

    def test_channel_validation(self):
        with self.assertRaises(ValueError):
            EveStrategy(StrategyKind.SINGLE_CHANNEL)
        with self.assertRaises(ValueError):
            EveStrategy(StrategyKind.SYNCHRONIZED_NAIVE, 1)

    def test_topology(self):
        self.assertFalse(NO_EVE.topology().tap1 or NO_EVE.topology().tap2)
        self.assertTrue(SYNCHRONIZED_NAIVE.topology().synchronized)
        topo = SINGLE_CHANNEL_2.topology(noise_after_taps=True)
        self.assertEqual((topo.tap1, topo.tap2, topo.noise_after_taps), (False, True, True))


class TestGuessing(unittest.TestCase):
    def test_naive_takes_bits_verbatim(self):
        self.assertEqual(guess_distribution(SYNCHRONIZED_NAIVE, InterceptEvents(1, 0)), {B("10"): 1.0})

    def test_bell_aware_pairs(self):
        self.assertEqual(
            set(guess_distribution(SYNCHRONIZED_BELL_AWARE, InterceptEvents(1, 1))), {B("00"), B("10")}
        )
        self.assertEqual(
            set(guess_distribution(SYNCHRONIZED_BELL_AWARE, InterceptEvents(0, 1))), {B("01"), B("11")}
        )

    def test_blind_guess_is_uniform(self):
        for strategy in (NO_EVE, SINGLE_CHANNEL_1):
            dist = guess_distribution(strategy, InterceptEvents(bit1=0))
            self.assertEqual(len(dist), 4)
            self.assertAlmostEqual(sum(dist.values()), 1.0)

    def test_guess_block_frequencies(self):
        rng = np.random.default_rng(21)
        n = 10**4
        hits = sum(
            guess_block(SYNCHRONIZED_BELL_AWARE, InterceptEvents(0, 0), rng) == B("00") for _ in range(n)
        )
        self.assertLessEqual(abs(hits - n / 2), 3 * binom.std(n, 0.5))


class TestEveIntercept(unittest.TestCase):
    def test_no_eve_leaves_state(self):
        s = bell_state(BellKind.PHI_MINUS)
        obs, post = eve_intercept(s, NO_EVE, np.random.default_rng(0))
        self.assertIsNone(obs.bits1)
        self.assertIsNone(obs.bits2)
        np.testing.assert_array_equal(post.amp, s.amp)

    def test_single_channel_bit(self):
        rng = np.random.default_rng(1)
        n = 10**4
        ones = 0
        for _ in range(n):
            obs, _ = eve_intercept(bell_state(BellKind.PHI_PLUS), SINGLE_CHANNEL_1, rng)
            self.assertIsNone(obs.bits2)
            ones += obs.bits1
        self.assertLessEqual(abs(ones - n / 2), 3 * binom.std(n, 0.5))

    def test_synchronized_on_psi_plus(self):
        rng = np.random.default_rng(2)
        seen = set()
        for _ in range(200):
            obs, post = eve_intercept(bell_state(BellKind.PSI_PLUS), SYNCHRONIZED_NAIVE, rng)
            self.assertNotEqual(obs.bits1, obs.bits2)
            self.assertEqual(obs.guess, MessageBlock.from_bits(obs.bits1, obs.bits2))
            self.assertEqual(post, basis_state(2 * obs.bits1 + obs.bits2))
            seen.add((obs.bits1, obs.bits2))
        self.assertEqual(seen, {(0, 1), (1, 0)})


class TestExactOracle(unittest.TestCase):
    def test_noiseless_values(self):
        self.assertAlmostEqual(exact_block_success(NO_EVE), 0.25, delta=1e-12)
        self.assertAlmostEqual(exact_block_success(SINGLE_CHANNEL_1), 0.25, delta=1e-12)
        self.assertAlmostEqual(exact_block_success(SINGLE_CHANNEL_2), 0.25, delta=1e-12)
        self.assertAlmostEqual(exact_block_success(SYNCHRONIZED_NAIVE), 0.25, delta=1e-12)
        self.assertAlmostEqual(exact_block_success(SYNCHRONIZED_BELL_AWARE), 0.5, delta=1e-12)

    def test_oracle_exceeds_claimed_value(self):
        self.assertGreater(exact_block_success(SYNCHRONIZED_NAIVE), CLAIMED_BLOCK_SUCCESS)
        self.assertGreaterEqual(
            exact_block_success(SYNCHRONIZED_BELL_AWARE), exact_block_success(SYNCHRONIZED_NAIVE)
        )

    def test_correlation_follows_codeword_class(self):
        for branch in enumerate_transmissions(SYNCHRONIZED_NAIVE):
            correlated = branch.events.bit1 == branch.events.bit2
            is_phi = CODEWORDS[branch.block] in (BellKind.PHI_PLUS, BellKind.PHI_MINUS)
            self.assertEqual(correlated, is_phi, str(branch.block))

    def test_branch_mass(self):
        for strategy in ALL_STRATEGIES:
            total = sum(b.probability for b in enumerate_transmissions(strategy, NoiseConfig.uniform(0.1)))
            self.assertAlmostEqual(total, 1.0, delta=1e-12, msg=strategy.name)

    def test_bell_aware_under_noise(self):
        # only an odd number of bit flips moves a codeword between the phi and psi classes
        for p in (0.01, 0.1, 0.25):
            expected = 0.5 * ((1 - p) ** 2 + p**2)
            self.assertAlmostEqual(
                exact_block_success(SYNCHRONIZED_BELL_AWARE, NoiseConfig.uniform(p)), expected, delta=1e-12
            )

    def test_noise_behind_the_taps(self):
        noise = NoiseConfig.uniform(0.25)
        self.assertAlmostEqual(
            exact_block_success(SYNCHRONIZED_BELL_AWARE, noise, noise_after_taps=True), 0.5, delta=1e-12
        )
        self.assertAlmostEqual(
            exact_block_success(SYNCHRONIZED_NAIVE, noise, noise_after_taps=True), 0.25, delta=1e-12
        )
        self.assertAlmostEqual(exact_block_success(NO_EVE, noise), 0.25, delta=1e-12)

    def test_message_success(self):
        for strategy in (SYNCHRONIZED_NAIVE, SYNCHRONIZED_BELL_AWARE):
            self.assertEqual(exact_message_success(strategy, 0), 1.0)
            self.assertAlmostEqual(
                exact_message_success(strategy, 1), exact_block_success(strategy), delta=1e-15
            )
            self.assertAlmostEqual(
                exact_message_success(strategy, 5),
                exact_message_success(strategy, 2) * exact_message_success(strategy, 3),
                delta=1e-12,
            )
        with self.assertRaises(ValueError):
            exact_message_success(NO_EVE, -1)

    def test_success_depends_on_block(self):
        naive = {block: exact_block_success(SYNCHRONIZED_NAIVE, block=block) for block in MessageBlock.all()}
        self.assertAlmostEqual(naive[B("00")], 0.5, delta=1e-12)
        self.assertAlmostEqual(naive[B("01")], 0.5, delta=1e-12)
        self.assertEqual(naive[B("10")], 0.0)
        self.assertEqual(naive[B("11")], 0.0)
        for block in MessageBlock.all():
            self.assertAlmostEqual(exact_block_success(SYNCHRONIZED_BELL_AWARE, block=block), 0.5, delta=1e-12)
            self.assertAlmostEqual(exact_block_success(SINGLE_CHANNEL_1, block=block), 0.25, delta=1e-12)

    def test_uniform_value_is_block_average(self):
        noise = NoiseConfig(0.1, 0.05, 0.2, 0.0)
        for strategy in ALL_STRATEGIES:
            for after in (False, True):
                per_block = [exact_block_success(strategy, noise, after, block) for block in MessageBlock.all()]
                self.assertAlmostEqual(np.mean(per_block), exact_block_success(strategy, noise, after), delta=1e-12)

    def test_conditioned_branch_mass(self):
        for block in MessageBlock.all():
            branches = enumerate_transmissions(SYNCHRONIZED_NAIVE, NoiseConfig.uniform(0.3), block=block)
            total = sum(branch.probability for branch in branches)
            self.assertAlmostEqual(total, 1.0, delta=1e-12)

    def test_success_for_blocks(self):
        blocks = [B("00"), B("10"), B("01")]
        mean, product = exact_success_for_blocks(SYNCHRONIZED_NAIVE, blocks)
        self.assertAlmostEqual(mean, 1 / 3, delta=1e-12)
        self.assertEqual(product, 0.0)
        mean, product = exact_success_for_blocks(SYNCHRONIZED_NAIVE, [B("00"), B("01")])
        self.assertAlmostEqual(product, 0.25, delta=1e-12)
        self.assertEqual(exact_success_for_blocks(SYNCHRONIZED_BELL_AWARE, []), (0.0, 1.0))

    def test_claimed_message_success(self):
        self.assertEqual(claimed_message_success(4), 0.00390625)
        self.assertEqual(claimed_message_success(0), 1.0)


class TestSecurityDiagnostics(unittest.TestCase):
    def test_marginals_are_maximally_mixed(self):
        rows = security_diagnostics()
        self.assertEqual([r.kind for r in rows], list(BellKind))
        for row in rows:
            self.assertAlmostEqual(row.purity, 1.0, delta=1e-12)
            self.assertAlmostEqual(row.reduced_purity_1, 0.5, delta=1e-12)
            self.assertAlmostEqual(row.reduced_purity_2, 0.5, delta=1e-12)
            np.testing.assert_allclose(row.reduced_eigenvalues, [0.5, 0.5], atol=1e-12)


if __name__ == "__main__":
    unittest.main()
