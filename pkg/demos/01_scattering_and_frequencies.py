"""Single-emitter scattering and the probe frequencies where two emitters look alike.

A photon passing an emitter in its coupling state picks up the transmission
amplitude t(omega). Driving both arms of the interferometer at a frequency
where t1^2 = t2^2 makes the two-photon outputs blind to which emitter did the
scattering, which is what lets detection events herald entanglement.
"""

import numpy as np

from mzi_entangle import Emitter, EmitterPair, candidate_frequencies, transmission_amplitude
from mzi_entangle.physics import expected_one_round_concurrence, select_candidate


def main():
    em = Emitter(energy=0.0, gamma_guided=1.0)
    print("omega      |t|      arg(t)/pi")
    for w in np.linspace(-3, 3, 7):
        t = transmission_amplitude(em, w)
        print(f"{w:+.2f}   {abs(t):.4f}   {np.angle(t) / np.pi:+.4f}")

    lossy = Emitter.from_beta(0.0, 1.0, beta=0.9)
    print(f"\nbeta = 0.9 on resonance: |t| = {abs(transmission_amplitude(lossy, 0.0)):.4f}")

    print("\nDegenerate probe frequencies on the (delta, Gamma2) grid with E1 = 0, Gamma1 = 1:")
    for delta in (3, 5):
        for ratio in (1, 3, 5):
            pair = EmitterPair.from_ratios(delta, ratio)
            best = select_candidate(pair)
            for c in candidate_frequencies(pair):
                score = expected_one_round_concurrence(pair, c.omega)
                mark = "  <- selected" if c is best or c.omega == best.omega else ""
                print(f"  delta={delta} G2={ratio}: omega={c.omega:+.4f} ({c.source}), "
                      f"E[C] after one round = {score:.3f}{mark}")


if __name__ == "__main__":
    main()
