"""Write data/hpi_synthetic.csv, a SYNTHETIC stand-in for the monthly HPI/GDP data.

The real series (156 months, 1990-2002) is not redistributable. This file draws
156 points from a two-component semiparametric mixture whose mixing weight and
variances mimic the published Gaussian fit (pi_1 ~ 0.55, variances 0.0066 and
0.046). The curve shapes are invented. Nothing here is real economic data.
"""
import argparse
from pathlib import Path

import numpy as np

from mixreg.core import Dataset
from mixreg.io import atomic_write, xy_to_csv

N_MONTHS = 156
PI1 = 0.5469
VAR = (0.0066, 0.0460)


def curves(x):
    m1 = 0.35 + 0.12 * np.sin(1.5 * x)
    m2 = 0.75 + 0.20 * x - 0.05 * x ** 2
    return np.column_stack([m1, m2])


def make(seed: int = 2002) -> Dataset:
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 2.0, N_MONTHS)
    z = np.where(rng.random(N_MONTHS) < PI1, 0, 1)
    m = curves(x)[np.arange(N_MONTHS), z]
    y = m + rng.normal(0.0, np.sqrt(np.take(VAR, z)))
    return Dataset(np.round(x, 4), np.round(y, 4), true_labels=z + 1)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=2002)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "data" /
                                         "hpi_synthetic.csv"))
    args = ap.parse_args(argv)
    atomic_write(args.out, xy_to_csv(make(args.seed)))
    print(f"wrote {N_MONTHS} synthetic rows -> {args.out}")


if __name__ == "__main__":
    main()
