# %%
from qsdc_sim.monte_carlo.session import Message, ProtocolMonteCarlo, SessionConfig
from qsdc_sim.protocol.adversary import SYNCHRONIZED_BELL_AWARE, SYNCHRONIZED_NAIVE
from qsdc_sim.protocol.channel import NoiseConfig


if __name__ == "__main__":
    message = Message.from_string("0110110001")

    for eve in (SYNCHRONIZED_NAIVE, SYNCHRONIZED_BELL_AWARE):
        cfg = SessionConfig(
            message=message,
            noise=NoiseConfig.uniform(0.01),
            eve=eve,
            master_seed=42,
            trials=10**4,
        )
        monte_carlo = ProtocolMonteCarlo(cfg)
        stats = monte_carlo.analyze(show_progress_bar=True)
        print(f"{eve.name}:")
        print(f"  Bob's block error rate {stats.block_error_rate:.4f} (exact {stats.oracle_block_error_rate:.4f})")
        print(f"  Eve's block success    {stats.eve_block_success_rate:.4f} (exact {stats.oracle_block_success:.4f},"
              f" claimed {stats.paper_claim_block_success})")
        print(f"  Eve's message success  {stats.eve_message_success_rate:.5f}"
              f" (exact {stats.oracle_message_success:.5f}, claimed {stats.paper_claim_message_success:.2e})")

    # one trial in detail
    for trace in monte_carlo.trial_traces(0):
        print(trace.block, trace.carrier, trace.gate, trace.flips, trace.eve_obs, trace.decoded)
# %%
