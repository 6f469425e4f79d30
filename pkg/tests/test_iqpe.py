import json
import math

import numpy as np
import pytest

from h4iqpe.errors import InvalidInput, SectorLeak
from h4iqpe.experiments import build_system, default_pes_grid
from h4iqpe.iqpe import (PhaseRecord, PhaseWindow, build_phase_window, derive_seeds, feedback_angle,
                         phase_to_energy, quantization_bound, repeat_experiment, run_iqpe, summarize)
from h4iqpe.simstate import EvolutionCache, Statevector, basis_state

from landing_oracle import landing, synthetic_cache, within_3_sigma

TWO_PI = 2 * math.pi


# --- window -----------------------------------------------------------------------

@pytest.mark.parametrize("beta", default_pes_grid()[::4] + [89.8])
def test_window_keeps_t_one(beta):
    s = build_system(beta)
    span = s.cache.eigenvalues[-1] - s.cache.eigenvalues[0]
    assert span < TWO_PI
    assert s.window.t == 1.0
    ph = [s.window.phase_of(e) for e in s.cache.eigenvalues]
    assert min(ph) >= 0 and max(ph) < 1


def test_centered_placement(sys898):
    w = sys898.window
    ev = sys898.cache.eigenvalues
    assert w.phase_of(0.5 * (ev[0] + ev[-1])) == pytest.approx(0.5, abs=1e-12)


def test_bottom_placement(sys898):
    c = sys898.cache
    w = build_phase_window(sys898.H, c, placement="bottom")
    span = c.eigenvalues[-1] - c.eigenvalues[0]
    margin = max(0.05 * span, 0.1)
    assert w.e_ref == pytest.approx(c.eigenvalues[0] - margin)
    assert w.t == 1.0
    assert w.phase_of(w.e_ref + margin) == pytest.approx(margin / TWO_PI)


def test_wide_spectrum_rescales_t():
    c = synthetic_cache([0.0, 0.1, 0.2, 0.3])
    wide = EvolutionCache(c.n_qubits, c.basis, c.eigenvalues * 40.0, c.eigenvectors, c.hamiltonian_block)
    for placement in ("centered", "bottom"):
        w = build_phase_window(None, wide, placement=placement)
        assert w.t < 1.0
        w.check(wide.eigenvalues)


def test_window_errors():
    c = synthetic_cache([0.25, 0.25, 0.25, 0.25])
    with pytest.raises(InvalidInput):
        build_phase_window(None, c)
    c2 = synthetic_cache([0.1, 0.2, 0.3, 0.4])
    with pytest.raises(InvalidInput):
        build_phase_window(None, c2, placement="sideways")
    bad = PhaseWindow(e_ref=c2.eigenvalues[1], t=1.0)
    with pytest.raises(InvalidInput):
        bad.check(c2.eigenvalues)


def test_phase_to_energy():
    w = PhaseWindow(e_ref=-2.0, t=1.0)
    rec = PhaseRecord([0], 0.0, 0.0, [], [], "deterministic", 0)
    assert phase_to_energy(rec, w) == -2.0
    rec.phase = 0.5
    assert phase_to_energy(rec, w) == pytest.approx(-2.0 + math.pi)
    rec.phase = 1.0
    with pytest.raises(InvalidInput):
        phase_to_energy(rec, w)


def test_feedback_angle():
    assert feedback_angle({}, 3) == 0.0
    assert feedback_angle({2: 1}, 1) == pytest.approx(-TWO_PI / 4)
    assert feedback_angle({3: 1, 2: 1}, 1) == pytest.approx(-TWO_PI * (1 / 4 + 1 / 8))


# --- eigenstate behaviour -----------------------------------------------------------

@pytest.mark.parametrize("m", [1, 3, 6, 10])
def test_dyadic_eigenphase_exact(m):
    rng = np.random.default_rng(m)
    ints = rng.choice(2 ** m, size=4, replace=2 ** m < 4)
    cache = synthetic_cache(ints / 2 ** m, seed=m)
    w = PhaseWindow(e_ref=-1.0, t=1.0)
    for k in range(4):
        rec = run_iqpe(cache.eigenvector_state(k), cache, w, m)
        expect = round((cache.eigenvalues[k] + 1.0) / TWO_PI * 2 ** m)
        assert rec.phase_int == expect
        assert rec.bitstring == "0." + format(expect, f"0{m}b")
        assert all(p in (0.0, 1.0) or abs(p - round(p)) < 1e-12 for p in rec.probabilities)


@pytest.mark.parametrize("beta", [80.0, 89.8])
def test_precision_bound_h4_eigenstates(beta):
    s = build_system(beta)
    for lab in ("GS", "ES1", "ES2", "ES3"):
        state = s.fci.state(lab)
        for m in range(4, 17):
            rec = run_iqpe(state, s.cache, s.window, m)
            assert abs(rec.energy - s.fci.energy(lab)) <= quantization_bound(m, s.window)


def test_round_trip_20_bits(sys80):
    rec = run_iqpe(sys80.fci.state("GS"), sys80.cache, sys80.window, 20)
    assert abs(rec.energy - sys80.e_fci) <= TWO_PI * 2 ** -20
    assert 0.0 <= rec.phase < 1.0
    assert rec.energy == pytest.approx(sys80.window.e_ref + TWO_PI * rec.phase)


def test_deterministic_is_pure(sys898):
    a = run_iqpe(sys898.hf, sys898.cache, sys898.window, 14)
    b = run_iqpe(sys898.hf, sys898.cache, sys898.window, 14)
    assert a.bits == b.bits and a.probabilities == b.probabilities


def test_sampled_reproducible(sys898):
    a = run_iqpe(sys898.hf, sys898.cache, sys898.window, 10, mode="sampled", shots=25, seed=7)
    b = run_iqpe(sys898.hf, sys898.cache, sys898.window, 10, mode="sampled", shots=25, seed=7)
    assert a.bits == b.bits and a.counts == b.counts
    assert all(c0 + c1 == 25 for c0, c1 in a.counts)


def test_tie_break():
    # p1 = 1/2 exactly on the top bit; two shots are often split
    cache = synthetic_cache([0.0, 0.25, 0.5, 0.75])
    st = Statevector((cache.eigenvector_state(0).amplitudes + cache.eigenvector_state(2).amplitudes)
                     / math.sqrt(2))
    w = PhaseWindow(-1.0, 1.0)
    for tie in (0, 1):
        for seed in range(20):
            rec = run_iqpe(st, cache, w, 1, mode="sampled", shots=2, seed=seed, tie_bit=tie)
            if rec.counts[0] == (1, 1):
                assert rec.bits[0] == tie
                break
        else:
            pytest.fail("no tied draw in 20 seeds")


def test_run_iqpe_errors(sys80):
    c, w = sys80.cache, sys80.window
    with pytest.raises(InvalidInput):
        run_iqpe(sys80.hf, c, w, 0)
    with pytest.raises(InvalidInput):
        run_iqpe(sys80.hf, c, w, 4, mode="sampled", shots=0)
    with pytest.raises(InvalidInput):
        run_iqpe(sys80.hf, c, w, 4, mode="magic")
    unnormalised = Statevector(2 * sys80.hf.amplitudes)
    with pytest.raises(InvalidInput):
        run_iqpe(unnormalised, c, w, 4)
    with pytest.raises(SectorLeak):
        run_iqpe(basis_state(8, "00000111"), c, w, 4)


# --- superposition landing law (m = 4) ----------------------------------------------

@pytest.mark.parametrize("phases,seed", [((0.13, 0.31, 0.62, 0.87), 11), ((0.05, 0.40, 0.41, 0.77), 12)])
def test_landing_tree_vs_monte_carlo(phases, seed):
    _, exact, counts = landing(phases, {0: 0.8, 2: 0.6}, seed)
    assert sum(exact.values()) == pytest.approx(1.0, abs=1e-12)
    assert len(exact) == 16
    for leaf, p in exact.items():
        assert within_3_sigma(p, counts.get(leaf, 0), 10_000), (leaf, p, counts.get(leaf, 0))


def test_landing_cluster_masses_follow_weights():
    phases = (3 / 16, 6 / 16, 11 / 16, 14 / 16)
    c = {1: math.sqrt(0.3), 3: math.sqrt(0.7)}
    cache, exact, counts = landing(phases, c, seed=21)
    sorted_ph = sorted(phases)
    for k, amp in c.items():
        leaf = tuple(int(b) for b in format(round(sorted_ph[k] * 16), "04b"))
        assert exact[leaf] == pytest.approx(amp ** 2, abs=1e-12)
        assert within_3_sigma(amp ** 2, counts.get(leaf, 0), 10_000)
    assert sum(exact.values()) == pytest.approx(1.0)


# --- repetition statistics ---------------------------------------------------------

def test_summarize_ties_go_low():
    st = summarize([1.0, 1.0, 0.0, 0.0, 2.0])
    assert st.modal_energy == 0.0 and st.modal_frequency == 2
    assert st.spread == 2.0
    with pytest.raises(InvalidInput):
        summarize([])


def test_seed_derivation():
    a = derive_seeds(5, 40)
    assert a == derive_seeds(5, 40)
    assert len(set(a)) == 40
    assert a != derive_seeds(6, 40)
    assert derive_seeds(2 ** 64 - 1, 2)


def test_repeat_experiment(sys898, tmp_path):
    st = repeat_experiment(sys898.hf, sys898.cache, sys898.window, 8, 25, repetitions=10, master_seed=3)
    assert st.repetitions == 10 and len(st.energies) == 10
    assert 1 <= st.modal_frequency <= 10 and st.spread >= 0
    assert sum(st.histogram.values()) == 10
    doc = json.loads(st.to_json())
    assert doc["config"]["shots"] == 25 and len(doc["seeds"]) == 10
    st.write_histogram_csv(tmp_path / "h.csv")
    assert (tmp_path / "h.csv").read_text().startswith("energy_hartree,count\n")
    again = repeat_experiment(sys898.hf, sys898.cache, sys898.window, 8, 25, repetitions=10, master_seed=3)
    assert again.energies == st.energies
    with pytest.raises(InvalidInput):
        repeat_experiment(sys898.hf, sys898.cache, sys898.window, 8, 25, repetitions=0)


def test_many_shots_equal_deterministic(sys898):
    det = run_iqpe(sys898.hf, sys898.cache, sys898.window, 14)
    st = repeat_experiment(sys898.hf, sys898.cache, sys898.window, 14, 10_000, repetitions=10)
    assert st.spread == 0.0 and st.modal_energy == det.energy
