"""Compare the Gaussian and cube probes as the probe width shrinks.

Prints the overlap ratio against ``f(b) dx`` and the observed order for
both probe shapes.  The Gaussian column tends to 2, the cube column to 1.
"""
import numpy as np

from qclab.born import sharp_state_limit
from qclab.coherent import CoherentParams
from qclab.grid import GridSpec


def main(sigma: float = 1.0, divisors=(2, 4, 8, 16, 32)):
    grid = GridSpec(1, 4096, 40.0)
    params = CoherentParams(0.0, 0.0, sigma)
    widths = [sigma / d for d in divisors]
    gauss = sharp_state_limit(params, 0.0, widths, grid, "gaussian")
    cell = sharp_state_limit(params, 0.0, widths, grid, "cell")
    print(f"{'s/sigma':>9} {'gaussian':>12} {'cell':>12} {'order g':>8} {'order c':>8}")
    for i, w in enumerate(widths):
        og = gauss.orders[i - 1] if i else np.nan
        oc = cell.orders[i - 1] if i else np.nan
        print(f"{w / sigma:9.5f} {gauss.ratios[i]:12.8f} {cell.ratios[i]:12.8f} {og:8.3f} {oc:8.3f}")
    print(f"limits: gaussian {gauss.analytic_limit:g}, cell {cell.analytic_limit:g}")


if __name__ == "__main__":
    main()
