"""Acceptance criteria, each run at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line through the ``acceptance`` fixture; the
lines are repeated in the terminal summary.
"""

import time
from dataclasses import replace

import numpy as np

from mzi_entangle import cli
from mzi_entangle.channel import apply_outcome, channel_for, initial_state, lossless_closed_form, outcome_probabilities
from mzi_entangle.entanglement import BELL_STATES, concurrence, concurrence_pure, purity
from mzi_entangle.errors import EmptyCandidates
from mzi_entangle.optics import DetectorModel, detection_kernels
from mzi_entangle.physics import (
    Emitter,
    EmitterPair,
    candidate_frequencies,
    loss_amplitude,
    scatter_amplitudes,
    squared_transmission_mismatch,
    transmission_amplitude,
)
from mzi_entangle.trajectory import SimulationConfig, run_ensemble, run_trajectory

from oracles import degenerate_frequency_scan, random_density_matrix, random_pure, symbolic_kernels


def _random_pair(rng, lossless=True):
    b1, b2 = (1.0, 1.0) if lossless else rng.uniform(0.5, 1.0, 2)
    return EmitterPair(
        Emitter.from_beta(rng.uniform(-5, 5), rng.uniform(0.1, 5), b1),
        Emitter.from_beta(rng.uniform(-5, 5), rng.uniform(0.1, 5), b2),
    )


def test_c01_unitarity(acceptance):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    n = 10_000
    e, g, gl, w = rng.uniform(-10, 10, n), rng.uniform(0.01, 10, n), rng.uniform(0, 10, n), rng.uniform(-30, 30, n)
    worst = 0.0
    for i in range(n):
        em = Emitter(e[i], g[i], gl[i])
        t, te = transmission_amplitude(em, w[i]), loss_amplitude(em, w[i])
        worst = max(worst, abs(abs(t) ** 2 + abs(te) ** 2 - 1))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and dt < 1.0
    acceptance("C1 unitarity", ok, f"max | |t|^2+|te|^2-1 | = {worst:.2e} over 1e4 draws, {dt:.2f}s")
    assert ok


def test_c02_degenerate_frequencies(acceptance):
    rng = np.random.default_rng(102)
    t0 = time.perf_counter()
    worst_res = worst_gap = 0.0
    done = 0
    while done < 1000:
        pair = _random_pair(rng)
        try:
            cands = candidate_frequencies(pair)
        except EmptyCandidates:
            continue
        omegas = sorted(c.omega for c in cands)
        worst_res = max(worst_res, max(squared_transmission_mismatch(pair, w) for w in omegas))
        scan = degenerate_frequency_scan(
            pair.emitter1.energy, pair.emitter1.gamma_guided, pair.emitter2.energy, pair.emitter2.gamma_guided
        )
        gap = np.inf if len(scan) != len(omegas) else max(abs(a - b) for a, b in zip(omegas, scan))
        worst_gap = max(worst_gap, gap)
        done += 1
    dt = time.perf_counter() - t0
    ok = worst_res <= 1e-9 and worst_gap <= 1e-6 and dt < 10
    acceptance(
        "C2 degenerate frequencies", ok,
        f"1000 pairs, max |t1^2-t2^2| = {worst_res:.1e}, max gap to scan oracle = {worst_gap:.1e}, {dt:.1f}s",
    )
    assert ok


def test_c03_channel_completeness(acceptance):
    rng = np.random.default_rng(103)
    t0 = time.perf_counter()
    worst_sum = worst_kernel = worst_state = 0.0
    for _ in range(10_000):
        pair = _random_pair(rng, lossless=False)
        ch = channel_for(pair, rng.uniform(-8, 8))
        rho = random_density_matrix(rng)
        probs = outcome_probabilities(ch, rho)
        worst_sum = max(worst_sum, abs(sum(probs.values()) - 1))
        worst_kernel = max(worst_kernel, max(-np.linalg.eigvalsh(k).min() for k in ch.kernels))
        for label, p in probs.items():
            if p <= 1e-15:
                continue
            out = apply_outcome(ch, rho, label)
            err = max(
                np.max(np.abs(out - out.conj().T)),
                abs(np.trace(out) - 1),
                -np.linalg.eigvalsh(out).min(),
            )
            worst_state = max(worst_state, err)
    dt = time.perf_counter() - t0
    ok = worst_sum <= 1e-12 and worst_kernel <= 1e-12 and worst_state <= 1e-12 and dt < 30
    acceptance(
        "C3 channel completeness", ok,
        f"1e4 draws, max |sum P - 1| = {worst_sum:.1e}, most negative kernel eig = {-worst_kernel:.1e}, "
        f"worst post-state defect = {worst_state:.1e}, {dt:.1f}s",
    )
    assert ok


def test_c04_closed_form_equivalence(acceptance):
    rng = np.random.default_rng(104)
    t0 = time.perf_counter()
    worst = 0.0
    checked = 0
    pairs = 0
    while pairs < 20:
        pair = _random_pair(rng)
        try:
            cands = candidate_frequencies(pair)
        except EmptyCandidates:
            continue
        pairs += 1
        w = cands[rng.integers(len(cands))].omega
        ch = channel_for(pair, w)
        stack = [(initial_state(), 0, 0, 0)]
        while stack:
            rho, m, n, depth = stack.pop()
            psi = lossless_closed_form(pair, w, m, n)
            worst = max(worst, np.max(np.abs(rho - np.outer(psi, psi.conj()))))
            checked += 1
            if depth == 6:
                continue
            probs = outcome_probabilities(ch, rho)
            for label in ((1, 1), (1, 0), (0, 1)):
                if probs[label] > 1e-15:
                    coinc = label == (1, 1)
                    stack.append((apply_outcome(ch, rho, label), m + coinc, n + (not coinc), depth + 1))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and dt < 30
    acceptance("C4 closed-form oracle", ok, f"20 pairs, {checked} sequences with m+n<=6, max deviation {worst:.1e}, {dt:.1f}s")
    assert ok


def test_c05_purity(acceptance):
    rng = np.random.default_rng(105)
    worst_lossless = worst_coinc = 0.0
    for _ in range(500):
        pair = _random_pair(rng)
        lossy = EmitterPair(
            Emitter.from_beta(pair.emitter1.energy, pair.emitter1.gamma_guided, rng.uniform(0.5, 0.99)),
            Emitter.from_beta(pair.emitter2.energy, pair.emitter2.gamma_guided, rng.uniform(0.5, 0.99)),
        )
        w = rng.uniform(-6, 6)
        psi = random_pure(rng)
        rho = np.outer(psi, psi.conj())
        ch = channel_for(pair, w)
        for label, p in outcome_probabilities(ch, rho).items():
            if p > 1e-15:
                worst_lossless = max(worst_lossless, abs(purity(apply_outcome(ch, rho, label)) - 1))
        worst_coinc = max(worst_coinc, abs(purity(apply_outcome(channel_for(lossy, w), rho, (1, 1))) - 1))
    ok = worst_lossless <= 1e-10 and worst_coinc <= 1e-10
    acceptance(
        "C5 purity", ok,
        f"beta=1 all outcomes max |Tr rho^2 - 1| = {worst_lossless:.1e}; beta<1 coincidence = {worst_coinc:.1e}",
    )
    assert ok


LOSSLESS_GRID = [(d, g) for d in (3, 5) for g in (1, 3, 5)]


def test_c06_lossless_grid_events_to_threshold(acceptance):
    t0 = time.perf_counter()
    lines, all_reached, medians = [], True, []
    for d, g in LOSSLESS_GRID:
        s = run_ensemble(SimulationConfig.from_ratios(d, g), base_seed=6, count=1000)
        all_reached &= s.frac_reached == 1.0
        medians.append(s.median_events_to_threshold)
        lines.append(f"({d},{g}) median {s.median_events_to_threshold:g} reached {s.frac_reached:.3f}")
    dt = time.perf_counter() - t0
    ok = all_reached and max(medians) <= 30 and dt < 120
    acceptance("C6 lossless grid median events <= 30", ok, "; ".join(lines) + f"; {dt:.1f}s")
    assert all_reached
    assert max(medians) <= 30


LOSSY_CELLS = [(3, g, b) for g in (3, 5) for b in (0.9, 0.95)]


def test_c07_lossy_early_fraction(acceptance):
    t0 = time.perf_counter()
    # the first 10 events do not depend on max_events (the RNG stream is consumed in order)
    full = SimulationConfig.from_ratios(3, 3, beta=0.9)
    for seed in range(5):
        assert run_trajectory(full, seed).events[:10] == run_trajectory(replace(full, max_events=10), seed).events
    fracs = []
    for d, g, b in LOSSY_CELLS:
        s = run_ensemble(SimulationConfig.from_ratios(d, g, beta=b, max_events=10), base_seed=7, count=5000)
        fracs.append(s.frac_above_099_in_10)
    dt = time.perf_counter() - t0
    ok = all(0.05 <= f <= 0.60 for f in fracs) and dt < 300
    detail = "; ".join(f"(G2={g},beta={b}) {f:.4f}" for (_, g, b), f in zip(LOSSY_CELLS, fracs))
    acceptance("C7 lossy P(C>0.99 within 10) in [0.05,0.60]", ok, f"{detail}; {dt:.1f}s")
    assert ok


def test_c08_loss_claim(acceptance):
    cfg = SimulationConfig.from_ratios(3, 3, beta=0.9, max_events=200, stop_threshold=None)
    s = run_ensemble(cfg, base_seed=8, count=5000, keep_records=True)
    n_hit = sum(bool(np.any(r.concurrences > 0.99)) for r in s.records)
    best = max(float(r.concurrences.max()) for r in s.records)
    ok = n_hit >= 1
    acceptance("C8 beta=0.9 reaches C>0.99", ok, f"{n_hit}/5000 trajectories exceed 0.99 within 200 events, best {best:.6f}")
    assert ok


def test_c09_two_pair_number_resolving(acceptance):
    t0 = time.perf_counter()
    worst_kernel, lines, ok_all = 0.0, [], True
    for d in (3, 5):
        cfg = SimulationConfig.from_ratios(
            d, 1, probe_mix=(((1, 1), 0.85), ((2, 2), 0.15)), detector=DetectorModel.NUMBER_RESOLVING
        )
        omega, _ = cfg.resolve_frequency()
        s = run_ensemble(cfg, base_seed=9, count=1000, keep_records=True)
        worst_events = max(len(r.events) for r in s.records)
        ok_all &= s.frac_reached == 1.0
        lines.append(f"delta={d} reached {s.frac_reached:.3f} (max {worst_events} events)")
        for beta in (1.0, 0.9):
            pair = EmitterPair.from_ratios(d, 1, beta=beta)
            t1, te1 = scatter_amplitudes(pair.emitter1, omega)
            t2, te2 = scatter_amplitudes(pair.emitter2, omega)
            ref = symbolic_kernels(2, 2, t1, te1, t2, te2, lambda j, k: (j, k))
            for label, k in detection_kernels(2, 2, pair, omega, DetectorModel.NUMBER_RESOLVING):
                worst_kernel = max(worst_kernel, np.max(np.abs(k - ref.get(label, 0))))
    dt = time.perf_counter() - t0
    ok = ok_all and worst_kernel <= 1e-12
    acceptance("C9 two-pair probe mix", ok, "; ".join(lines) + f"; (2,2) kernel vs symbolic {worst_kernel:.1e}; {dt:.1f}s")
    assert ok


def test_c10_concurrence(acceptance):
    rng = np.random.default_rng(110)
    singlet = np.outer(BELL_STATES["psi-"], BELL_STATES["psi-"].conj())
    werner = max(
        abs(concurrence(p * singlet + (1 - p) * np.eye(4) / 4).value - max(0.0, (3 * p - 1) / 2))
        for p in np.linspace(0, 1, 6)
    )
    pure = 0.0
    for _ in range(1000):
        psi = random_pure(rng)
        pure = max(pure, abs(concurrence(np.outer(psi, psi.conj())).value - concurrence_pure(psi)))
    lu = 0.0
    for _ in range(1000):
        rho = random_density_matrix(rng)
        c = concurrence(rho).value
        a, b = rng.uniform(0, 2 * np.pi, 2)
        u = np.kron(np.diag([1, np.exp(1j * a)]), np.diag([1, np.exp(1j * b)]))
        lu = max(lu, abs(concurrence(u @ rho @ u.conj().T).value - c), abs(concurrence(rho[::-1, ::-1]).value - c))
    ok = max(werner, pure, lu) <= 1e-10
    acceptance("C10 concurrence", ok, f"Werner {werner:.1e}, pure vs mixed {pure:.1e}, local unitary {lu:.1e}")
    assert ok


def test_c11_reproducibility(acceptance, tmp_path):
    args = ["trajectory", "--delta", "3", "--gamma-ratio", "3", "--beta", "0.9", "--seed", "1234"]
    codes = [cli.main(args + ["--out", str(tmp_path / name)]) for name in ("a", "b")]
    a = (tmp_path / "a" / "trajectory.csv").read_bytes()
    b = (tmp_path / "b" / "trajectory.csv").read_bytes()
    ok = codes == [0, 0] and a == b and len(a) > 0
    acceptance("C11 reproducibility", ok, f"two invocations, {len(a)} bytes, identical={a == b}")
    assert ok
