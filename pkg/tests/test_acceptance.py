"""Acceptance criteria, one test each; every test records a PASS/FAIL line."""
import math
import time
from itertools import permutations

import numpy as np

from conftest import record
from entanglab.cone import ConeSpec, StateFunctional, decompose_unique, e1_closed_form, entanglement_general
from entanglab.correlators import (
    HOLE,
    PARTICLE,
    KernelParams,
    ProbeSpec,
    alpha_from_spectrum,
    filtered_correlator,
    lorentzian_norm,
    mode_occupation_correlator,
)
from entanglab.fock import c, materialize
from entanglab.models import (
    QdFormulaInputs,
    build_model,
    perturbation_oracle,
    qd_entanglement_formula,
    single_particle_modes,
)
from entanglab.spectra import ground_state, low_spectrum
from entanglab.verify import (
    DEFAULT_TOLERANCES,
    bogoliubov_battery,
    cone_battery,
    fermi_sea_state,
    identity_battery,
    lorentzian_kernel_oracle,
    qd_battery,
    random_quadratic_model,
    run_verify,
)


def test_criterion_01_noninteracting_nullity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst, pairs = 0.0, 0
    for _ in range(50):
        M = int(rng.integers(2, 11))
        q = random_quadratic_model(rng, M)
        modes = single_particle_modes(q)
        g = fermi_sea_state(q, modes)
        cache = {}
        for k0, k1 in permutations(range(M), 2):
            for c0 in (PARTICLE, HOLE):
                for c1 in (PARTICLE, HOLE):
                    r = mode_occupation_correlator(g, modes, ProbeSpec(0, c0, mode=k0), ProbeSpec(0, c1, mode=k1),
                                                   strict=False, cache=cache)
                    worst = max(worst, abs(r.covariance))
                    pairs += 1
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-12 and elapsed < 10
    record(1, "noninteracting nullity", ok, f"{pairs} pairs, max |cov| {worst:.1e}, {elapsed:.1f}s")
    assert ok


def test_criterion_02_pairing_toy():
    m = build_model({"preset": "pairing_toy", "params": {"pairs": [(0.0, 1.0)]}})
    g = ground_state(m.hamiltonian, m.basis()).state
    r = mode_occupation_correlator(g, m.modes, ProbeSpec(0, mode=0), ProbeSpec(0, mode=1))
    e1 = e1_closed_form(r.alpha)
    ok = abs(r.alpha - 1) < 1e-12 and abs(e1 - math.log(2)) < 1e-12
    record(2, "pairing toy alpha = 1, E1 = ln 2", ok, f"alpha - 1 = {r.alpha - 1:.1e}")
    assert ok


def test_criterion_03_bogoliubov():
    checks = bogoliubov_battery(DEFAULT_TOLERANCES)[:2]
    ok = all(c.passed for c in checks)
    record(3, "Bogoliubov battery", ok, "; ".join(f"{c.name} {c.value:.1e}" for c in checks))
    assert ok


def _removal_lines(spec, site, count):
    """Strongest single-particle removal excitations at ``site`` (distinct energies)."""
    T = materialize(c(site), spec.basis, check_hermitian=False)
    w = np.abs(spec.vectors.conj().T @ (T @ spec.vectors[:, 0])) ** 2
    dE = spec.eigenvalues - spec.eigenvalues[0]
    out = []
    for i in np.argsort(-w):
        if all(abs(dE[i] - e) > 0.1 for e in out) and 0.1 < dE[i] < 2.3:
            out.append(float(dE[i]))
        if len(out) == count:
            break
    return out


def test_criterion_04_proximity_peak():
    t0 = time.perf_counter()
    m = build_model({"preset": "proximity_chain",
                     "params": {"M_normal": 5, "M_sc": 5, "t": 1.0, "Delta": 0.5, "T_tunnel": 0.3}})
    spec = low_spectrum(m.hamiltonian, m.basis())
    grid = np.round(np.arange(0.05, 2.4501, 0.05), 10)
    hits = []
    for line in _removal_lines(spec, 0, 3):
        eps0 = -round(line, 3)
        a = [abs(filtered_correlator(spec, ProbeSpec(eps0, width=0.05, site=0),
                                     ProbeSpec(e1, width=0.05, site=0)).alpha) for e1 in grid]
        hits.append((eps0, grid[int(np.argmax(a))], grid[int(np.argmin(abs(grid + eps0)))]))
    elapsed = time.perf_counter() - t0
    ok = len(hits) >= 3 and all(p == n for _, p, n in hits) and elapsed < 120
    detail = ", ".join(f"eps0={e:.3f} peak {p:.2f}" for e, p, _ in hits) + f", {elapsed:.1f}s"
    record(4, "proximity peak at -eps0", ok, detail)
    assert ok


def test_criterion_05_e1_properties():
    rng = np.random.default_rng(5)
    alphas = 10 ** rng.uniform(-3, 3, 100)
    sym = max(abs(e1_closed_form(a) - e1_closed_form(1 / a)) for a in alphas)
    lam1, lam_g = StateFunctional([1.0, 0.0]), StateFunctional([1.0, 1.0])
    cons = 0.0
    for a in alphas[:20]:
        lam0 = StateFunctional([1.0, 1.0 + a])
        rep = entanglement_general(lam_g, ConeSpec((lam0, lam1)))
        cons = max(cons, abs(rep.entanglement - e1_closed_form(decompose_unique(lam_g, lam0, lam1).alpha)))
    ln2 = abs(e1_closed_form(1.0) - math.log(2))
    ok = ln2 < 1e-12 and sym < 1e-12 and cons < 1e-12
    record(5, "E1 closed form", ok, f"ln2 {ln2:.1e}, symmetry {sym:.1e}, general solver {cons:.1e}")
    assert ok


def test_criterion_06_qd_formula():
    r = qd_entanglement_formula(QdFormulaInputs(10, 0.01, 0.01, -0.5, 0.5))
    checks = qd_battery(DEFAULT_TOLERANCES)
    ok = abs(r.entanglement - 7.9078e-3) < 1e-6 and all(c.passed for c in checks)
    record(6, "open-dot formula", ok, f"E1 = {r.entanglement:.6e}; " + "; ".join(
        f"{c.name} {c.value:.1e}" for c in checks))
    assert ok


def test_criterion_07_kernel():
    gamma = 0.5
    k = KernelParams(gamma, 1 / gamma)
    omega = np.linspace(-1000 * gamma, 1000 * gamma, 200001)
    flat = alpha_from_spectrum(omega, np.full_like(omega, 2.0), (1.0, 1.0), k).alpha
    lam, c0 = gamma / 2, 1.3
    r = alpha_from_spectrum(omega, 2 * lam * c0 / (omega**2 + lam**2), (0.7, 0.9), k).alpha
    rel = abs(r / lorentzian_kernel_oracle(gamma, k.tau, lam, c0, (0.7, 0.9)) - 1)
    norm = abs(lorentzian_norm(gamma) / (gamma / 2) - 1)
    ok = abs(flat) < 1e-8 and rel < 1e-6 and norm < 1e-10
    record(7, "kernel quadrature", ok, f"flat {abs(flat):.1e}, Lorentzian {rel:.1e}, norm {norm:.1e}")
    assert ok


def test_criterion_08_perturbation():
    m = build_model({"preset": "interacting_chain", "params": {"M": 6, "t": 1.0, "V": 0.01}})
    g = ground_state(m.hamiltonian, m.basis(3)).state
    ed = mode_occupation_correlator(g, m.modes, ProbeSpec(0, HOLE, mode=1), ProbeSpec(0, PARTICLE, mode=4)).alpha
    pt = perturbation_oracle(m.config, 1, 4).alpha
    rel = abs(ed / pt - 1)
    ok = rel < 0.10
    record(8, "first-order perturbation oracle", ok, f"alpha {ed:.4e} vs {pt:.4e}, rel {rel:.1e}")
    assert ok


def test_criterion_09_table1_identity():
    checks = identity_battery(DEFAULT_TOLERANCES)
    ok = all(c.passed for c in checks)
    record(9, "cone-state identity and Pauli nilpotency", ok, "; ".join(f"{c.name} {c.value:.1e}" for c in checks))
    assert ok


def test_criterion_10_solver_integrity():
    configs = [
        ({"preset": "interacting_chain", "params": {"M": 8, "t": 1.0, "V": 0.5}}, None),
        ({"preset": "interacting_chain", "params": {"M": 12, "t": 1.0, "V": 1.2}}, None),
        ({"preset": "interacting_chain", "params": {"M": 10, "t": 1.0, "V": 1.2}}, 5),
        ({"preset": "pairing_toy", "params": {"pairs": [(0.0, 1.0), (0.7, 0.4), (-0.5, 0.8), (1.5, 0.3)]}}, None),
        ({"preset": "proximity_chain", "params": {"M_normal": 5, "M_sc": 5, "Delta": 0.5, "T_tunnel": 0.3}}, None),
    ]
    worst_e, worst_res = 0.0, 0.0
    for cfg, sector in configs:
        m = build_model(cfg)
        basis = m.basis(sector)
        assert len(basis) <= 4096
        H = materialize(m.hamiltonian, basis)
        for method in ("dense", "lanczos"):
            s = low_spectrum(m.hamiltonian, basis, 3, method=method)
            res = np.linalg.norm(H @ s.vectors - s.vectors * s.eigenvalues, axis=0)
            worst_res = max(worst_res, float(np.max(res / np.maximum(1, np.abs(s.eigenvalues)))))
            if method == "dense":
                e_dense = s.eigenvalues[0]
        worst_e = max(worst_e, abs(e_dense - s.eigenvalues[0]))
    ok = worst_e < 1e-9 and worst_res < 1e-10
    record(10, "Lanczos vs dense", ok, f"energy {worst_e:.1e}, residual {worst_res:.1e}")
    assert ok


def test_criterion_11_cone_oracle():
    checks = cone_battery(DEFAULT_TOLERANCES)[:1]
    ok = all(c.passed for c in checks)
    record(11, "vertex enumeration vs grid search", ok, f"{checks[0].name}, excess {checks[0].value:.1e}")
    assert ok


def test_full_verify_suite_runtime():
    t0 = time.perf_counter()
    results = run_verify()
    elapsed = time.perf_counter() - t0
    failed = [r.line() for r in results if not r.passed]
    assert not failed, failed
    assert elapsed < 300
