"""Regenerate src/rsloc/data/ndt_reference.csv.

The trace is synthetic: a smooth deterministic error profile on a 0.5 m grid,
shifted so its mean absolute error is 0.1927 m over [-36, 36] m and 0.1704 m
over [-50, 50] m.  It stands in for an NDT self-localisation curve when
plotting; it is not a measurement.
"""
from pathlib import Path

import numpy as np

INNER_MAE, OUTER_MAE = 0.1927, 0.1704

pos = np.round(np.arange(-50.0, 50.0 + 1e-9, 0.5), 1)
inner = np.abs(pos) <= 36.0
shape = 0.06 * np.sin(2 * np.pi * pos / 23.0) + 0.025 * np.cos(pos / 4.3) + 0.02 * np.sin(pos / 1.7)
err = np.empty_like(pos)
n_in, n_out = inner.sum(), (~inner).sum()
err[inner] = shape[inner] - shape[inner].mean() + INNER_MAE
outer_mean = (OUTER_MAE * len(pos) - INNER_MAE * n_in) / n_out
err[~inner] = 0.5 * (shape[~inner] - shape[~inner].mean()) + outer_mean
err = np.round(err, 6)
# absorb rounding residue so both means are exact to 1e-6
err[np.flatnonzero(inner)[0]] += round(INNER_MAE * n_in - err[inner].sum(), 6)
err[np.flatnonzero(~inner)[0]] += round(OUTER_MAE * len(pos) - err.sum(), 6)
assert np.all(err > 0)

out = Path(__file__).resolve().parents[1] / "src" / "rsloc" / "data" / "ndt_reference.csv"
with open(out, "w") as fh:
    fh.write("position_m,error_m\n")
    for p, e in zip(pos, err):
        fh.write(f"{p:.1f},{e:.6f}\n")
print(out, err[inner].mean(), err.mean())
