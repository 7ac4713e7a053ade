"""Fisher information per unit time over (gamma, tau) and its ridge.

Also tabulates the staircase growth F(T) for two intervals and the
sensitivity profile of two nearby Rabi frequencies.
"""

import argparse
import math
from pathlib import Path

import numpy as np

from zenoest.fisher import analytic_fisher, fisher_rate, local_maxima, maximize_rate, sensitivity_profile
from zenoest.io import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gamma-max", type=float, default=1.0)
    ap.add_argument("--gamma-points", type=int, default=101)
    ap.add_argument("--tau-max", type=float, default=12.0)
    ap.add_argument("--tau-points", type=int, default=1200)
    ap.add_argument("--out", default="results/fisher")
    args = ap.parse_args()
    out = Path(args.out)

    rows, ridge = [], []
    for g in np.linspace(0.0, args.gamma_max, args.gamma_points):
        t_opt, v_opt, grid, values = maximize_rate(fisher_rate(1.0, 0.0, g), (0.0, args.tau_max),
                                                   args.tau_points)
        rows.extend((g, t, v) for t, v in zip(grid, values))
        ridge.append((g, t_opt, v_opt))
    write_csv(out / "map.csv", ["gamma", "tau", "F_per_time"], rows)
    write_csv(out / "ridge.csv", ["gamma", "tau_opt", "F_per_time"], ridge)
    for g, t, _ in ridge[:: max(1, len(ridge) // 10)]:
        print(f"gamma={g:.2f}  tau_opt={t:.3f}")

    # ridge maxima at weak dephasing, in units of omega tau / pi
    g = 0.01
    w = math.sqrt(1 - g * g)
    taus = np.linspace(1e-3, 6 * math.pi, 30000)
    rate = np.array([analytic_fisher(1.0, 0.0, g, t) / t for t in taus])
    peaks = w * taus[local_maxima(rate)] / math.pi
    write_csv(out / "weak_dephasing_maxima.csv", ["n", "omega_tau_over_pi"], enumerate(peaks))
    print("gamma=0.01 maxima (omega tau/pi):", np.round(peaks, 3))

    t_grid = np.linspace(0.0, 30.0, 3001)
    rows = []
    for tau in (3.0, 0.3):
        per_n = analytic_fisher(1.0, 0.0, 0.0, tau)
        rows.extend((tau, t, math.floor(t / tau + 1e-12) * per_n) for t in t_grid)
    write_csv(out / "growth.csv", ["tau", "T", "F"], rows)

    t_grid = np.linspace(0.0, 70.0, 7001)
    diff, dif = sensitivity_profile(1.0, 1.1, 0.0, 0.0, t_grid)
    write_csv(out / "sensitivity.csv", ["t", "difference_quotient_sq", "differential_quotient_sq"],
              zip(t_grid, diff, dif))


if __name__ == "__main__":
    main()
