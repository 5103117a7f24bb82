import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entanglab.correlators import (
    HOLE,
    PARTICLE,
    AlphaResult,
    InsufficientSpectrumError,
    ProbeSignWarning,
    ProbeSpec,
    UndefinedAlphaError,
    cone_states,
    filtered_correlator,
    mode_occupation_correlator,
    pauli_check,
    probe_level_correlator,
    quadratic_probe_level_oracle,
    select_mode,
)
from entanglab.fock import FockBasis, bosonic_sign_ladder
from entanglab.models import bcs_uv_oracle, build_model, single_particle_modes
from entanglab.spectra import SpectrumResult, ground_state, low_spectrum
from entanglab.verify import fermi_sea_state, random_quadratic_model


def _pairing(pairs):
    m = build_model({"preset": "pairing_toy", "params": {"pairs": pairs}})
    return m, ground_state(m.hamiltonian, m.basis()).state


def test_probe_spec_validation():
    with pytest.raises(ValueError):
        ProbeSpec(0.1, "electron")
    with pytest.raises(ValueError):
        ProbeSpec(0.1, width=0.0)
    with pytest.raises(ValueError):
        ProbeSpec(0.1, coupling=-1.0)
    with pytest.raises(ValueError):
        ProbeSpec(0.1, mode=1.5)
    assert ProbeSpec(0.1, mode=2.0).mode == 2


def test_alpha_result_moments():
    r = AlphaResult.from_moments(0.5, 0.4, 0.3, "mode")
    assert r.covariance == pytest.approx(0.1, abs=1e-15)
    assert r.alpha == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(UndefinedAlphaError):
        AlphaResult.from_moments(0.0, 0.4, 0.0, "mode")
    assert AlphaResult.from_moments(0.0, 0.4, 0.0, "mode", strict=False).status == "undefined"
    assert AlphaResult.from_moments(0.5, 0.5, 0.2, "mode").status == "negative_alpha"


def test_select_mode_bonding():
    modes = build_model({"preset": "free_chain", "params": {"M": 2, "t": 1.0}}).modes
    k = select_mode(modes, -1.0, 0.1)
    assert modes.transform[0, k] * modes.transform[1, k] > 0


def test_select_mode_errors():
    modes = build_model({"preset": "free_chain", "params": {"M": 2, "t": 1.0}}).modes
    with pytest.raises(ValueError, match="ambiguous mode selection"):
        select_mode(modes, 0.0, 5.0)
    with pytest.raises(ValueError, match="no mode at energy"):
        select_mode(modes, 0.0, 0.1)
    with pytest.raises(ValueError):
        select_mode(modes, 0.0, 0.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), eps=st.floats(-4, 4))
def test_select_mode_matches_linear_scan(seed, eps):
    modes = single_particle_modes(random_quadratic_model(np.random.default_rng(seed), 8))
    e = modes.relative_energies
    nearest = min(range(8), key=lambda i: abs(e[i] - eps))
    second = sorted(abs(e - eps))[1]
    tol = (abs(e[nearest] - eps) + second) / 2
    if second - abs(e[nearest] - eps) > 1e-9:
        assert select_mode(modes, eps, tol) == nearest


def test_pairing_toy_mode_alpha_is_one():
    m, g = _pairing([(0.0, 1.0)])
    r = mode_occupation_correlator(g, m.modes, ProbeSpec(0, mode=0), ProbeSpec(0, mode=1))
    assert r.mean0 == pytest.approx(0.5, abs=1e-12) and r.mean1 == pytest.approx(0.5, abs=1e-12)
    assert r.cross == pytest.approx(0.5, abs=1e-12)
    assert abs(r.alpha - 1.0) < 1e-12
    assert r.flavor == "mode"


def test_bogoliubov_pairs():
    pairs = [(0.0, 1.0), (0.7, 0.4), (-0.5, 0.8), (1.5, 0.3)]
    m, g = _pairing(pairs)
    for k, (xi, d) in enumerate(pairs):
        p0 = ProbeSpec(0, mode=m.modes.mode_on_site(2 * k))
        p1 = ProbeSpec(0, mode=m.modes.mode_on_site(2 * k + 1))
        r = mode_occupation_correlator(g, m.modes, p0, p1)
        assert r.alpha == pytest.approx(bcs_uv_oracle(xi, d)[2], rel=1e-8)
    pa = ProbeSpec(0, mode=m.modes.mode_on_site(0))
    pb = ProbeSpec(0, mode=m.modes.mode_on_site(5))
    assert abs(mode_occupation_correlator(g, m.modes, pa, pb).covariance) < 1e-12


def test_noninteracting_nullity():
    rng = np.random.default_rng(11)
    for _ in range(5):
        q = random_quadratic_model(rng, 6)
        modes = single_particle_modes(q)
        g = fermi_sea_state(q, modes)
        for k0 in range(6):
            for k1 in range(6):
                if k0 != k1:
                    r = mode_occupation_correlator(g, modes, ProbeSpec(0, HOLE, mode=k0),
                                                   ProbeSpec(0, PARTICLE, mode=k1), strict=False)
                    assert abs(r.covariance) < 1e-12


def test_mode_flavor_errors():
    m, g = _pairing([(0.0, 1.0)])
    with pytest.raises(ValueError, match="same mode"):
        mode_occupation_correlator(g, m.modes, ProbeSpec(0, mode=0), ProbeSpec(0, mode=0))
    m, g = _pairing([(-1.0, 0.0), (1.0, 0.0)])
    with pytest.raises(UndefinedAlphaError):
        mode_occupation_correlator(g, m.modes, ProbeSpec(0, mode=0), ProbeSpec(0, mode=2))


def test_character_swap_symmetry():
    m = build_model({"preset": "interacting_chain", "params": {"M": 6, "t": 1.0, "V": 0.8}})
    g = ground_state(m.hamiltonian, m.basis(3)).state

    def cov(c0, c1):
        return mode_occupation_correlator(g, m.modes, ProbeSpec(0, c0, mode=1), ProbeSpec(0, c1, mode=4)).covariance

    pp = cov(PARTICLE, PARTICLE)
    assert abs(pp) > 1e-6
    assert cov(HOLE, HOLE) == pytest.approx(pp, abs=1e-12)
    assert cov(HOLE, PARTICLE) == pytest.approx(-pp, abs=1e-12)
    assert cov(PARTICLE, HOLE) == pytest.approx(-pp, abs=1e-12)


def test_cone_states_pairing_toy():
    m, g = _pairing([(0.0, 1.0)])
    lam_g, lam0, lam1 = cone_states(g, m.modes, ProbeSpec(0, mode=0), ProbeSpec(0, mode=1))
    assert lam_g[1] == pytest.approx(0.5, abs=1e-12)
    assert lam0[1] == pytest.approx(1.0, abs=1e-12)
    assert abs(lam1[1]) < 1e-14
    assert lam_g[0] == lam0[0] == lam1[0] == 1.0


def test_cone_states_identity_interacting():
    m = build_model({"preset": "interacting_chain", "params": {"M": 6, "t": 1.0, "V": 0.8}})
    g = ground_state(m.hamiltonian, m.basis(3)).state
    p0, p1 = ProbeSpec(0, HOLE, mode=1), ProbeSpec(0, PARTICLE, mode=4)
    lam_g, lam0, _ = cone_states(g, m.modes, p0, p1)
    r = mode_occupation_correlator(g, m.modes, p0, p1)
    assert abs(lam0[1] / lam_g[1] - 1 - r.alpha) < 1e-12


def test_cone_states_undefined():
    m, g = _pairing([(-1.0, 0.0), (1.0, 0.0)])
    with pytest.raises(ValueError, match="state undefined"):
        cone_states(g, m.modes, ProbeSpec(0, mode=0), ProbeSpec(0, mode=2))


def test_pauli_check_vacuum_and_interacting():
    modes = build_model({"preset": "free_chain", "params": {"M": 3}}).modes
    vac = FockBasis(3).basis_vector(0)
    assert pauli_check(vac, modes, ProbeSpec(0, HOLE, mode=0)) < 1e-14
    m = build_model({"preset": "interacting_chain", "params": {"M": 6, "t": 1.0, "V": 1.0}})
    g = ground_state(m.hamiltonian, m.basis(3)).state
    for k in range(6):
        assert pauli_check(g, m.modes, ProbeSpec(0, PARTICLE, mode=k)) < 1e-14


def test_pauli_check_detects_mutation():
    modes = build_model({"preset": "free_chain", "params": {"M": 2}}).modes
    v = FockBasis(2).basis_vector(0)
    assert pauli_check(v, modes, ProbeSpec(0, HOLE, mode=0), ladder=bosonic_sign_ladder) > 0.1


@pytest.mark.parametrize("xi", [0.0, 0.5, -0.7])
def test_filtered_pair_resonance_oracle(xi):
    u2, v2, _ = bcs_uv_oracle(xi, 1.0)
    E = math.hypot(xi, 1.0)
    m = build_model({"preset": "pairing_toy", "params": {"pairs": [(xi, 1.0)]}})
    spec = low_spectrum(m.hamiltonian, m.basis())
    gamma = 0.1
    for e1 in (E, -E, 0.3):
        r = filtered_correlator(spec, ProbeSpec(-E, width=gamma, site=0), ProbeSpec(e1, width=gamma, site=1))
        lor = lambda dE: gamma**2 / ((dE + e1) ** 2 + gamma**2)
        assert r.alpha == pytest.approx(u2 * lor(-E) / (v2 * lor(E)), rel=1e-9)
        assert r.flavor == "filtered"


def test_filtered_wide_filter_recovers_mode_flavor():
    m = build_model({"preset": "pairing_toy", "params": {"pairs": [(0.5, 1.0)]}})
    spec = low_spectrum(m.hamiltonian, m.basis())
    E = math.hypot(0.5, 1.0)
    wide = 1e3 * E
    r = filtered_correlator(spec, ProbeSpec(-E, width=wide, site=0), ProbeSpec(E, width=wide, site=1))
    assert r.alpha == pytest.approx(bcs_uv_oracle(0.5, 1.0)[2], rel=1e-4)


def test_filtered_free_chain_small_and_decreasing():
    m = build_model({"preset": "free_chain", "params": {"M": 6, "t": 1.0}})
    spec = low_spectrum(m.hamiltonian, m.basis())
    e = m.modes.relative_energies
    sep = abs(e[1] - e[4])
    alphas = []
    for f in (0.05, 0.02, 0.01):
        r = filtered_correlator(spec, ProbeSpec(e[1], PARTICLE, width=f * sep, site=0),
                                ProbeSpec(e[4], HOLE, width=f * sep, site=2))
        alphas.append(abs(r.alpha))
    assert alphas[0] < 1e-3
    assert alphas[0] > alphas[1] > alphas[2]


def test_filtered_insufficient_spectrum():
    m = build_model({"preset": "interacting_chain", "params": {"M": 6, "t": 1.0, "V": 0.5}})
    spec = low_spectrum(m.hamiltonian, m.basis(), 3)
    with pytest.raises(InsufficientSpectrumError):
        filtered_correlator(spec, ProbeSpec(-3.0, width=0.1, site=0), ProbeSpec(3.0, width=0.1, site=1))


def test_filtered_invariant_under_rediagonalization():
    m = build_model({"preset": "free_chain", "params": {"M": 6, "t": 1.0}})
    spec = low_spectrum(m.hamiltonian, m.basis())
    E, V = spec.eigenvalues, spec.vectors.astype(complex)
    rng = np.random.default_rng(2)
    W = V.copy()
    start = 0
    rotated_blocks = 0
    while start < E.size:
        stop = start + 1
        while stop < E.size and E[stop] - E[start] < 1e-9:
            stop += 1
        n = stop - start
        if n > 1 and start > 0:
            q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
            W[:, start:stop] = V[:, start:stop] @ q
            rotated_blocks += 1
        start = stop
    assert rotated_blocks > 0
    spec2 = SpectrumResult(E, W, spec.basis, spec.ground_degeneracy)
    e = m.modes.relative_energies
    p0 = ProbeSpec(e[1], PARTICLE, width=0.3, site=0)
    p1 = ProbeSpec(e[4], HOLE, width=0.3, site=2)
    a = filtered_correlator(spec, p0, p1)
    b = filtered_correlator(spec2, p0, p1)
    assert a.diagnostics["window_degeneracy"][0] > 0
    assert np.allclose(a.diagnostics["rates"], b.diagnostics["rates"], rtol=1e-10, atol=1e-14)


def test_filtered_needs_all_sector_spectrum():
    m = build_model({"preset": "free_chain", "params": {"M": 4}})
    spec = low_spectrum(m.hamiltonian, m.basis(2))
    with pytest.raises(ValueError):
        filtered_correlator(spec, ProbeSpec(-1.0, site=0), ProbeSpec(1.0, site=1))


def _probe_cfg(inner, probes):
    return {"preset": "probe_coupled", "params": {"inner": inner, "probes": probes}}


def test_probe_level_pairing_detuned_matches_mode_flavor():
    xi, delta = 0.5, 1.0
    E = math.hypot(xi, delta)
    inner = {"preset": "pairing_toy", "params": {"pairs": [(xi, delta)]}}
    r = probe_level_correlator(_probe_cfg(inner, [(200 * E, 0.02, 0), (200 * E, 0.02, 1)]))
    assert r.alpha > 0
    assert r.alpha == pytest.approx(bcs_uv_oracle(xi, delta)[2], rel=0.05)
    d = r.diagnostics
    assert abs(d["alphas"][-1] / d["alphas"][-2] - 1) < 0.05
    assert d["differences"][1] < d["differences"][0]
    assert r.status == "ok"


def test_probe_level_resonant_pairing_closed_form():
    xi, eps = 0.5, 1.0
    u2, v2, _ = bcs_uv_oracle(xi, 1.0)
    E = math.hypot(xi, 1.0)
    inner = {"preset": "pairing_toy", "params": {"pairs": [(xi, 1.0)]}}
    r = probe_level_correlator(_probe_cfg(inner, [(eps, 0.02, 0), (eps, 0.02, 1)]))
    assert r.alpha == pytest.approx(u2 / v2 * ((eps + E) / eps) ** 2, rel=1e-4)


def test_probe_level_free_chain_mirrored_nullity():
    inner = {"preset": "free_chain", "params": {"M": 4, "t": 1.0}}
    r = probe_level_correlator(_probe_cfg(inner, [(-0.7, 0.02, 0), (0.7, 0.02, 0)]), (HOLE, PARTICLE))
    assert abs(r.alpha) < 1e-8


def test_probe_level_free_chain_projector_oracle():
    inner = {"preset": "free_chain", "params": {"M": 4, "t": 1.0}}
    r = probe_level_correlator(_probe_cfg(inner, [(0.7, 0.02, 0), (1.3, 0.02, 3)]))
    oracle = quadratic_probe_level_oracle(_probe_cfg(inner, [(0.7, 0.005, 0), (1.3, 0.005, 3)]))
    assert r.alpha == pytest.approx(oracle, abs=1e-4)


def test_probe_level_sign_warning():
    inner = {"preset": "pairing_toy", "params": {"pairs": [(0.0, 1.0)]}}
    with pytest.warns(ProbeSignWarning):
        probe_level_correlator(_probe_cfg(inner, [(-1.0, 0.02, 0), (1.0, 0.02, 1)]))
    with warnings.catch_warnings():
        warnings.simplefilter("error", ProbeSignWarning)
        probe_level_correlator(_probe_cfg(inner, [(1.0, 0.02, 0), (1.0, 0.02, 1)]))


def test_probe_level_errors():
    with pytest.raises(ValueError):
        probe_level_correlator({"preset": "free_chain", "params": {"M": 3}})
    inner = {"preset": "free_chain", "params": {"M": 3}}
    with pytest.raises(ValueError):
        probe_level_correlator(_probe_cfg(inner, [(1.0, 0.0, 0), (1.0, 0.02, 1)]))
