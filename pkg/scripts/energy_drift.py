"""Energy drift of the split-step propagator for a displaced oscillator packet.

Halving ``dt`` should cut the drift by about four.
"""
import numpy as np

from qclab.coherent import CoherentParams
from qclab.evolve import propagate
from qclab.grid import GridSpec, sample_coherent
from qclab.potentials import PotentialSpec


def main():
    grid = GridSpec(1, 2048, 40.0)
    phi0 = sample_coherent(CoherentParams(1.0, 0.5, np.sqrt(0.5)), grid)
    V = PotentialSpec.harmonic(1.0)
    prev = None
    for dt in (4e-3, 2e-3, 1e-3, 5e-4):
        tr = propagate(phi0, V, dt=dt, T=2.0, diagnostics_stride=10)
        drift = float(np.abs(tr.energy - tr.energy[0]).max() / abs(tr.energy[0]))
        ratio = f"{prev / drift:6.2f}" if prev else "     -"
        print(f"dt={dt:.1e}  max relative drift {drift:.3e}  ratio {ratio}")
        prev = drift


if __name__ == "__main__":
    main()
