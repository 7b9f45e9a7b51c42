# %%
from qsdc_sim.cli import emit_noise_cases, emit_tables


if __name__ == "__main__":
    print(emit_tables())
    print(emit_noise_cases())
# %%
