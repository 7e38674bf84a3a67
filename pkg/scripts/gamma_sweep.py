"""Sweep the Riccati gamma grid on a bundled scenario and tabulate designs.

For each gamma: the constructive consensus gain, the closed-loop spectral
abscissa, the trace-minimal ellipsoid and the input-bound verdict. The last
line repeats the design the sweep would select.

Usage: python scripts/gamma_sweep.py [scenario_name] [n_points]
"""

import sys

import numpy as np

from minellip import (
    check_input_bound,
    closed_loop,
    design_gain,
    minimize_trace,
    optimize_gain,
    build_laplacian,
    scenario,
    spectrum,
)


def main():
    name = sys.argv[1] if len(sys.argv) > 1 else "paper_example1"
    n_points = int(sys.argv[2]) if len(sys.argv) > 2 else 16
    cfg = scenario.load_bundled(name)
    lp = build_laplacian(cfg.topology)
    grid = np.geomspace(1e-2, 1e2, n_points)

    print(f"{'gamma':>10} {'abscissa':>10} {'beta*':>9} {'trace':>12} {'input':>6}   K")
    for gamma in grid:
        k = design_gain(cfg.plant, lp, gamma)
        abscissa = spectrum(closed_loop(cfg.plant, lp, k)).spectral_abscissa
        result = minimize_trace(cfg.plant, lp, k)
        ok = check_input_bound(lp, k, result.P_star, cfg.plant.eta)
        row = np.array2string(k.ravel(), precision=4, suppress_small=True)
        print(f"{gamma:10.4f} {abscissa:10.4f} {result.beta_star:9.4f} "
              f"{result.trace_value:12.6e} {'ok' if ok else 'viol'}   {row}")

    best = optimize_gain(cfg.plant, lp, gamma_grid=grid)
    print(f"\nselected: gamma={best.gamma:.4f} trace={best.minimization.trace_value:.6e} "
          f"K={np.array2string(best.K.ravel(), precision=6)}")


if __name__ == "__main__":
    sys.exit(main())
