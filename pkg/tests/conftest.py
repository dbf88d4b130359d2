"""Shared fixtures: benchmark coefficient families and curve synthesis."""

import numpy as np

import datascale as ds

# Benchmark coefficient rows (condition, alpha, c, p): four families of
# training setups, each family sharing one exponent.  They span the
# coefficient ranges this tool targets and anchor the round-trip tests.
ARCHITECTURE_BLOCK = [
    ("encoder_decoder", 1.969, 0.057, 0.285),
    ("decoder_only", 1.817, 0.11, 0.285),
    ("hybrid_lstm", 2.011, 0.078, 0.285),
]
NOISE_BLOCK = [
    ("no_noise", 1.969, 0.064, 0.296),
    ("source_noise", 2.222, 0.067, 0.296),
    ("target_noise", 2.772, 0.323, 0.296),
]
FILTERING_BLOCK = [
    ("no_filter", 2.501, 0.034, 0.278),
    ("cds", 2.235, 0.054, 0.278),
    ("bicleaner", 2.130, 0.064, 0.278),
]
BACKTRANSLATION_BLOCK = [
    ("bt_2l6l", 2.343, 0.059, 0.198),
    ("bt_6l6l", 2.288, 0.054, 0.198),
    ("bt_32l6l", 2.251, 0.040, 0.198),
    ("bt_64l6l", 2.224, 0.037, 0.198),
    ("parallel", 1.196, 0.048, 0.271),
]
BENCHMARK_ROWS = ARCHITECTURE_BLOCK + NOISE_BLOCK + FILTERING_BLOCK + BACKTRANSLATION_BLOCK

# Doubling grid of dataset sizes (millions): 1, 2, 4, ..., 512.
DOUBLING_GRID = [2.0**k for k in range(10)]


def curve_observations(law, d_grid, condition="curve", noise_frac=0.0, rng=None):
    """Observations on an exact curve, optionally with multiplicative noise."""
    rows = []
    for d in d_grid:
        loss = ds.eval_law(law, float(d))
        if noise_frac:
            loss *= 1.0 + noise_frac * rng.standard_normal()
        rows.append(ds.Observation(condition=condition, d_millions=float(d), loss=float(loss)))
    return rows
