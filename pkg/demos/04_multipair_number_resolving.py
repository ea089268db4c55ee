"""Occasional two-photon-pair probes with number-resolving detectors.

A weak pair source sometimes emits |2,2> instead of |1,1>. With detectors
that count photons, these rounds are just another heralded outcome and do
not stop the emitters from reaching a maximally entangled state.
"""

from mzi_entangle import DetectorModel, EmitterPair, SimulationConfig, detection_kernels, run_ensemble
from mzi_entangle import initial_state, outcome_probabilities, select_probe_frequency


def main():
    pair = EmitterPair.from_ratios(3, 1)
    omega = select_probe_frequency(pair)
    channel = detection_kernels(2, 2, pair, omega, DetectorModel.NUMBER_RESOLVING)
    print("|2,2> probe, first-round outcome probabilities:")
    for label, p in outcome_probabilities(channel, initial_state()).items():
        if p > 1e-12:
            print(f"  {label}: {p:.4f}")

    mix = (((1, 1), 0.85), ((2, 2), 0.15))
    for delta in (3, 5):
        cfg = SimulationConfig.from_ratios(delta, 1, probe_mix=mix, detector=DetectorModel.NUMBER_RESOLVING)
        s = run_ensemble(cfg, base_seed=9, count=1000)
        print(f"delta={delta}: {s.frac_reached:.3f} of 1000 trajectories reach C >= 0.999, "
              f"median {s.median_events_to_threshold:g} events")


if __name__ == "__main__":
    main()
