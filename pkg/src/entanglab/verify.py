"""
Oracle batteries run by ``entanglab verify``.

Each battery returns :class:`Check` records; a failed comparison is a
``passed = False`` record, never an exception. ``ladder`` lets the algebra
and nilpotency batteries run on a mutated operator algebra.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .cone import (
    ConeSpec,
    StateFunctional,
    decompose_unique,
    e1_closed_form,
    entanglement_general,
    grid_search_minimum,
)
from .correlators import (
    HOLE,
    PARTICLE,
    KernelParams,
    ProbeSpec,
    alpha_from_spectrum,
    cone_states,
    filtered_correlator,
    lorentzian_norm,
    mode_occupation_correlator,
    pauli_check,
    probe_level_correlator,
    quadratic_probe_level_oracle,
)
from .fock import FockBasis, algebra_selftest, ladder_array
from .models import (
    QdFormulaInputs,
    QuadraticModel,
    bcs_uv_oracle,
    build_model,
    perturbation_oracle,
    qd_entanglement_formula,
    single_particle_modes,
)
from .spectra import ground_state, low_spectrum

DEFAULT_TOLERANCES = {
    "algebra": 1e-12,
    "nullity": 1e-12,
    "bogoliubov": 1e-8,
    "identity": 1e-12,
    "pauli": 1e-14,
    "solver": 1e-9,
    "cone": 1e-6,
    "kernel": 1e-6,
    "closed_form": 1e-12,
    "filtered_oracle": 1e-9,
    "flavor_filtered": 0.02,
    "flavor_probe_level": 0.05,
    "perturbation": 0.10,
    "qd": 1e-6,
}


@dataclass
class Check:
    battery: str
    name: str
    passed: bool
    value: float | None = None
    tolerance: float | None = None
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        val = "" if self.value is None else f" value={self.value:.3g}"
        tol = "" if self.tolerance is None else f" tol={self.tolerance:.3g}"
        extra = f" ({self.detail})" if self.detail else ""
        return f"[{mark}] {self.battery}: {self.name}{val}{tol}{extra}"


def _check(battery, name, value, tol, detail=""):
    ok = value is not None and np.isfinite(value) and value <= tol
    return Check(battery, name, bool(ok), None if value is None else float(value), tol, detail)


def random_quadratic_model(rng: np.random.Generator, M: int) -> QuadraticModel:
    """Random complex hopping with ``mu`` in the widest inner gap (unique Fock ground state)."""
    a = rng.normal(size=(M, M)) + 1j * rng.normal(size=(M, M))
    h = (a + a.conj().T) / 2
    e = np.linalg.eigvalsh(h)
    gaps = np.diff(e)
    i = int(np.argmax(gaps))
    return QuadraticModel(h, None, float((e[i] + e[i + 1]) / 2))


def fermi_sea_state(q: QuadraticModel, modes):
    """Ground state by exact diagonalization in its particle-number sector."""
    basis = FockBasis(q.mode_count, modes.fermi_index)
    return ground_state(q.operator().as_hermitian(), basis).state


# ---------------------------------------------------------------- batteries


def algebra_battery(tol, ladder=ladder_array):
    out = []
    for M in (4, 8):
        rep = algebra_selftest(M, ladder=ladder, tol=tol["algebra"])
        out.append(Check("algebra", f"anticommutators M={M}", rep.passed, rep.max_error, tol["algebra"],
                         "; ".join(rep.failures[:2])))
    return out


def nullity_battery(tol, n_models=10, M_max=8, seed=1):
    rng = np.random.default_rng(seed)
    worst = 0.0
    pairs = 0
    for _ in range(n_models):
        M = int(rng.integers(3, M_max + 1))
        q = random_quadratic_model(rng, M)
        modes = single_particle_modes(q)
        g = fermi_sea_state(q, modes)
        cache = {}
        for k0, k1 in permutations(range(M), 2):
            for ch0 in (PARTICLE, HOLE):
                for ch1 in (PARTICLE, HOLE):
                    r = mode_occupation_correlator(g, modes, ProbeSpec(0, ch0, mode=k0), ProbeSpec(0, ch1, mode=k1),
                                                   strict=False, cache=cache)
                    worst = max(worst, abs(r.covariance))
                    pairs += 1
    return [_check("nullity", f"{n_models} random quadratic models, {pairs} probe pairs", worst, tol["nullity"])]


BOGOLIUBOV_PAIRS = [(0.0, 1.0), (0.7, 0.4), (-0.5, 0.8), (1.5, 0.3)]


def bogoliubov_battery(tol, pairs=BOGOLIUBOV_PAIRS):
    model = build_model({"preset": "pairing_toy", "params": {"pairs": pairs}})
    g = ground_state(model.hamiltonian, model.basis()).state
    worst_alpha = 0.0
    worst_cov = 0.0
    for k, (xi, delta) in enumerate(pairs):
        pred = bcs_uv_oracle(xi, delta)[2]
        p0 = ProbeSpec(0, mode=model.modes.mode_on_site(2 * k))
        p1 = ProbeSpec(0, mode=model.modes.mode_on_site(2 * k + 1))
        r = mode_occupation_correlator(g, model.modes, p0, p1)
        worst_alpha = max(worst_alpha, abs(r.alpha - pred) / max(1.0, abs(pred)))
    M = 2 * len(pairs)
    for a in range(M):
        for b in range(M):
            if a // 2 == b // 2:
                continue
            pa = ProbeSpec(0, mode=model.modes.mode_on_site(a))
            pb = ProbeSpec(0, mode=model.modes.mode_on_site(b))
            r = mode_occupation_correlator(g, model.modes, pa, pb)
            worst_cov = max(worst_cov, abs(r.covariance))
    two = build_model({"preset": "pairing_toy", "params": {"pairs": [(0.0, 1.0)]}})
    g2 = ground_state(two.hamiltonian, two.basis()).state
    r2 = mode_occupation_correlator(g2, two.modes, ProbeSpec(0, mode=0), ProbeSpec(0, mode=1))
    return [
        _check("bogoliubov", "paired modes alpha = u^2/v^2", worst_alpha, tol["bogoliubov"]),
        _check("bogoliubov", "cross-pair covariance", worst_cov, tol["nullity"]),
        _check("bogoliubov", "two-mode alpha = 1", abs(r2.alpha - 1.0), tol["closed_form"]),
        _check("bogoliubov", "two-mode E1 = ln 2", abs(e1_closed_form(r2.alpha) - math.log(2)), tol["closed_form"]),
    ]


def _identity_models():
    rng = np.random.default_rng(7)
    cases = []
    for xi, d in [(0.0, 1.0), (0.6, 0.5)]:
        m = build_model({"preset": "pairing_toy", "params": {"pairs": [(xi, d), (-0.4, 0.7)]}})
        cases.append(("pairing_toy", m.modes, ground_state(m.hamiltonian, m.basis()).state))
    m = build_model({"preset": "interacting_chain", "params": {"M": 6, "t": 1.0, "V": 0.8}})
    cases.append(("interacting_chain", m.modes, ground_state(m.hamiltonian, m.basis(3)).state))
    q = random_quadratic_model(rng, 5)
    modes = single_particle_modes(q)
    cases.append(("random quadratic", modes, fermi_sea_state(q, modes)))
    return cases


def identity_battery(tol, ladder=ladder_array):
    worst_id = 0.0
    worst_lam1 = 0.0
    worst_pauli = 0.0
    for _, modes, g in _identity_models():
        M = modes.mode_count
        for k0, k1 in permutations(range(M), 2):
            for ch0 in (PARTICLE, HOLE):
                for ch1 in (PARTICLE, HOLE):
                    p0, p1 = ProbeSpec(0, ch0, mode=k0), ProbeSpec(0, ch1, mode=k1)
                    r = mode_occupation_correlator(g, modes, p0, p1, strict=False)
                    if r.alpha is None or r.mean1 < 1e-10 or r.mean0 < 1e-10:
                        continue
                    lam_g, lam0, lam1 = cone_states(g, modes, p0, p1)
                    a = lam0[1] / lam_g[1] - 1.0
                    worst_id = max(worst_id, abs(a - r.alpha) / max(1.0, abs(r.alpha)))
                    worst_lam1 = max(worst_lam1, abs(lam1[1]))
        for k in range(M):
            for ch in (PARTICLE, HOLE):
                try:
                    worst_pauli = max(worst_pauli, pauli_check(g, modes, ProbeSpec(0, ch, mode=k), ladder=ladder))
                except ValueError:
                    continue
    return [
        _check("table1", "cone_states alpha equals mode alpha", worst_id, tol["identity"]),
        _check("table1", "lambda_1(A_1) = 0", worst_lam1, tol["pauli"]),
        _check("table1", "Pauli nilpotency", worst_pauli, tol["pauli"]),
    ]


def flavor_battery(tol):
    out = []
    worst_oracle = 0.0
    worst_wide = 0.0
    worst_pl = 0.0
    worst_pl_conv = 0.0
    for xi in (0.0, 0.5, -0.7):
        delta = 1.0
        u2, v2, pred = bcs_uv_oracle(xi, delta)
        E = math.hypot(xi, delta)
        m = build_model({"preset": "pairing_toy", "params": {"pairs": [(xi, delta)]}})
        spec = low_spectrum(m.hamiltonian, m.basis())
        g = spec.vector(0)
        mode_alpha = mode_occupation_correlator(g, m.modes, ProbeSpec(0, mode=0), ProbeSpec(0, mode=1)).alpha
        gamma = 0.1
        for e1 in (E, -E, 0.3):
            r = filtered_correlator(spec, ProbeSpec(-E, width=gamma, site=0), ProbeSpec(e1, width=gamma, site=1))
            lor = lambda dE: gamma**2 / ((dE + e1) ** 2 + gamma**2)
            oracle = u2 * lor(-E) / (v2 * lor(E))
            worst_oracle = max(worst_oracle, abs(r.alpha / oracle - 1.0))
        wide = 1e3 * E
        r = filtered_correlator(spec, ProbeSpec(-E, width=wide, site=0), ProbeSpec(E, width=wide, site=1))
        worst_wide = max(worst_wide, abs(r.alpha / mode_alpha - 1.0))
        far = 200.0 * E
        cfg = {"preset": "probe_coupled",
               "params": {"inner": {"preset": "pairing_toy", "params": {"pairs": [(xi, delta)]}},
                          "probes": [(far, 0.02, 0), (far, 0.02, 1)]}}
        r = probe_level_correlator(cfg)
        worst_pl = max(worst_pl, abs(r.alpha / mode_alpha - 1.0))
        worst_pl_conv = max(worst_pl_conv, abs(r.diagnostics["alphas"][-1] / r.diagnostics["alphas"][-2] - 1.0))
    out.append(_check("flavors", "filtered alpha matches pair-resonance oracle", worst_oracle, tol["filtered_oracle"]))
    out.append(_check("flavors", "wide-filter alpha matches mode alpha", worst_wide, tol["flavor_filtered"]))
    out.append(_check("flavors", "detuned probe-level alpha matches mode alpha", worst_pl, tol["flavor_probe_level"]))
    out.append(_check("flavors", "probe-level stable under coupling halving", worst_pl_conv, tol["flavor_probe_level"]))
    mirror = {"preset": "probe_coupled",
              "params": {"inner": {"preset": "free_chain", "params": {"M": 4, "t": 1.0}},
                         "probes": [(-0.7, 0.02, 0), (0.7, 0.02, 0)]}}
    r = probe_level_correlator(mirror, (HOLE, PARTICLE))
    out.append(_check("flavors", "probe-level nullity, mirrored levels on a free chain", abs(r.alpha), 1e-8))
    free = {"preset": "probe_coupled",
            "params": {"inner": {"preset": "free_chain", "params": {"M": 4, "t": 1.0}},
                       "probes": [(0.7, 0.02, 0), (1.3, 0.02, 3)]}}
    r = probe_level_correlator(free)
    oracle = quadratic_probe_level_oracle(
        {"preset": "probe_coupled", "params": dict(free["params"], probes=[(0.7, 0.005, 0), (1.3, 0.005, 3)])})
    out.append(_check("flavors", "probe-level free chain vs single-particle projector", abs(r.alpha - oracle), 1e-4))
    m = build_model({"preset": "interacting_chain", "params": {"M": 6, "t": 1.0, "V": 0.01}})
    g = ground_state(m.hamiltonian, m.basis(3)).state
    ed = mode_occupation_correlator(g, m.modes, ProbeSpec(0, HOLE, mode=1), ProbeSpec(0, PARTICLE, mode=4))
    pt = perturbation_oracle(m.config, 1, 4)
    out.append(_check("flavors", "mode alpha vs first-order perturbation (M=6, V=0.01)",
                      abs(ed.alpha / pt.alpha - 1.0), tol["perturbation"]))
    return out


def qd_battery(tol):
    out = []
    r = qd_entanglement_formula(QdFormulaInputs(10, 0.01, 0.01, -0.5, 0.5))
    out.append(_check("qd", "E1(N=10, Gamma=0.01, d_eps=1) = 7.9078e-3", abs(r.entanglement - 7.9078e-3), tol["qd"]))
    bad = 0
    for N in range(1, 40):
        for de in np.linspace(0.05, 5, 60):
            a = qd_entanglement_formula(QdFormulaInputs(N, 0.0021, 0.0021, 0.0, de))
            b = qd_entanglement_formula(QdFormulaInputs(N + 1, 0.0021, 0.0021, 0.0, de))
            c = qd_entanglement_formula(QdFormulaInputs(N, 0.0021, 0.0021, 0.0, de * 1.05))
            if b.valid and not b.entanglement < a.entanglement:
                bad += 1
            if a.valid and not c.entanglement < a.entanglement:
                bad += 1
            dominant = abs(a.alpha_int / a.alpha_nonint) > 1
            if dominant != a.valid:
                bad += 1
    out.append(_check("qd", "monotonicity and dominance condition", bad, 0))
    return out


def cone_battery(tol, n_sets=20, seed=3):
    rng = np.random.default_rng(seed)
    worst = 0.0
    shapes = [(2, 3), (2, 4), (3, 3), (3, 4), (3, 5)]
    for i in range(n_sets):
        d, m = shapes[i % len(shapes)]
        pure = [StateFunctional(np.r_[1.0, rng.uniform(-1, 1, d - 1)]) for _ in range(m)]
        w = rng.dirichlet(np.ones(m))
        target = StateFunctional(np.column_stack([p.values for p in pure]) @ w)
        cone = ConeSpec(tuple(pure))
        rep = entanglement_general(target, cone)
        grid = grid_search_minimum(target, cone, step=1e-3)
        worst = max(worst, rep.entanglement - grid)
    out = [_check("cone", f"vertex minimum vs step-1e-3 grid on {n_sets} pure sets", max(worst, 0.0), tol["cone"])]
    worst = 0.0
    for a in np.geomspace(1e-3, 1e3, 25):
        lam0 = StateFunctional([1.0, 1.0 + a])
        lam1 = StateFunctional([1.0, 0.0])
        lam_g = StateFunctional([1.0, 1.0])
        rep = entanglement_general(lam_g, ConeSpec((lam0, lam1)))
        dec = decompose_unique(lam_g, lam0, lam1)
        worst = max(worst, abs(rep.entanglement - e1_closed_form(dec.alpha)), abs(e1_closed_form(a) - e1_closed_form(1 / a)))
    out.append(_check("cone", "two-state solver and E1 symmetry", worst, tol["closed_form"]))
    return out


def solver_battery(tol):
    worst_e = 0.0
    configs = [
        ({"preset": "interacting_chain", "params": {"M": 8, "t": 1.0, "V": 0.5}}, None),
        ({"preset": "interacting_chain", "params": {"M": 10, "t": 1.0, "V": 1.2}}, 5),
        ({"preset": "pairing_toy", "params": {"pairs": BOGOLIUBOV_PAIRS}}, None),
        ({"preset": "proximity_chain", "params": {"M_normal": 4, "M_sc": 4, "Delta": 0.5, "T_tunnel": 0.3}}, None),
    ]
    for cfg, sector in configs:
        m = build_model(cfg)
        basis = m.basis(sector)
        dense = low_spectrum(m.hamiltonian, basis, 1, method="dense")
        lanc = low_spectrum(m.hamiltonian, basis, 1, method="lanczos")
        worst_e = max(worst_e, abs(dense.eigenvalues[0] - lanc.eigenvalues[0]))
    return [_check("solver", "Lanczos vs dense ground energies", worst_e, tol["solver"])]


def kernel_battery(tol):
    gamma = 0.5
    k = KernelParams(gamma, 1.0 / gamma)
    omega = np.linspace(-1000 * gamma, 1000 * gamma, 200001)
    flat = alpha_from_spectrum(omega, np.full_like(omega, 2.0), (1.0, 1.0), k)
    lam, c = gamma / 2, 1.3
    S = 2 * lam * c / (omega**2 + lam**2)
    r = alpha_from_spectrum(omega, S, (0.7, 0.9), k)
    oracle = lorentzian_kernel_oracle(gamma, k.tau, lam, c, (0.7, 0.9))
    norm = lorentzian_norm(gamma)
    return [
        _check("kernel", "flat spectrum gives alpha 0", abs(flat.alpha), 1e-8),
        _check("kernel", "Lorentzian spectrum vs 1e6-point trapezoid", abs(r.alpha / oracle - 1.0), tol["kernel"]),
        _check("kernel", "Lorentzian normalization gamma/2", abs(norm / (gamma / 2) - 1.0), 1e-10),
    ]


def lorentzian_kernel_oracle(gamma, tau, lam, c, means, points=10**6, span=2e4):
    """Brute-force trapezoid of the analytic kernel integrand for ``S = 2 lam c/(w^2+lam^2)``."""
    w = np.linspace(-span, span, points + 1)
    egt = math.exp(-gamma * tau)
    f = (np.cos(w * tau) - egt) / (1 - egt) * gamma**2 / (w * w + gamma**2) * 2 * lam * c / (w * w + lam**2)
    return float(np.trapezoid(f, w) / (2 * np.pi * means[0] * means[1]))


BATTERIES = {
    "algebra": algebra_battery,
    "nullity": nullity_battery,
    "bogoliubov": bogoliubov_battery,
    "table1": identity_battery,
    "flavors": flavor_battery,
    "qd": qd_battery,
    "cone": cone_battery,
    "solver": solver_battery,
    "kernel": kernel_battery,
}


def run_verify(tolerances: dict | None = None, *, ladder=ladder_array, only=None, log=None) -> list[Check]:
    """Run every battery; exceptions become failed checks."""
    tol = dict(DEFAULT_TOLERANCES)
    for key, value in (tolerances or {}).items():
        if key not in tol:
            raise KeyError(f"unknown tolerance {key!r}")
        tol[key] = float(value)
    results: list[Check] = []
    for name, battery in BATTERIES.items():
        if only and name not in only:
            continue
        t0 = time.perf_counter()
        try:
            if name in ("algebra", "table1"):
                checks = battery(tol, ladder=ladder)
            else:
                checks = battery(tol)
        except Exception as exc:  # reported, not raised
            checks = [Check(name, "battery raised", False, detail=f"{type(exc).__name__}: {exc}")]
        for ch in checks:
            ch.detail = (ch.detail + "; " if ch.detail else "") + f"{time.perf_counter() - t0:.1f}s"
            if log:
                log(ch.line())
        results.extend(checks)
    return results
