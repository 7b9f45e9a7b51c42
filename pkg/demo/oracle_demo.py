# %%
from qsdc_sim.protocol.adversary import (
    ALL_STRATEGIES,
    CLAIMED_BLOCK_SUCCESS,
    SYNCHRONIZED_NAIVE,
    exact_block_success,
    security_diagnostics,
)
from qsdc_sim.protocol.channel import NoiseConfig
from qsdc_sim.protocol.codec import MessageBlock


if __name__ == "__main__":
    print(f"claimed per-block success: {CLAIMED_BLOCK_SUCCESS}")
    for p in (0.0, 0.05, 0.25):
        noise = NoiseConfig.uniform(p)
        for strategy in ALL_STRATEGIES:
            print(f"p={p:<5} {strategy.name:<24} {exact_block_success(strategy, noise):.4f}")

    # the naive guess depends on which block is sent
    for block in MessageBlock.all():
        print(f"{SYNCHRONIZED_NAIVE.name} on {block}: {exact_block_success(SYNCHRONIZED_NAIVE, block=block):.4f}")

    for row in security_diagnostics():
        print(row.kind, row.purity, row.reduced_purity_1, row.reduced_purity_2)
# %%
