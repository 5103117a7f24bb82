"""
Model builders, the noninteracting mode basis, and closed-form results.

Every preset yields a hermitian :class:`~entanglab.fock.SecondQuantizedOperator`
of the grand-canonical form ``H - mu N`` together with the eigenmodes of its
quadratic, pairing-free part.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .fock import (
    MAX_MODES,
    FockBasis,
    SecondQuantizedOperator,
    apply_operator,
    identity,
    mode_operator,
    number,
    pairing_form,
    quadratic_form,
    total_number,
)


@dataclass(frozen=True)
class QuadraticModel:
    hopping: np.ndarray
    pairing: np.ndarray | None = None
    chemical_potential: float = 0.0

    def __post_init__(self):
        h = np.asarray(self.hopping, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("hopping must be a square matrix")
        if np.abs(h - h.conj().T).max(initial=0.0) > 1e-12:
            raise ValueError("hopping matrix is not hermitian")
        object.__setattr__(self, "hopping", h)
        if self.pairing is not None:
            d = np.asarray(self.pairing, dtype=complex)
            if d.shape != h.shape:
                raise ValueError("pairing matrix shape mismatch")
            if np.abs(d + d.T).max(initial=0.0) > 1e-12:
                raise ValueError("pairing matrix is not antisymmetric")
            object.__setattr__(self, "pairing", d)

    @property
    def mode_count(self) -> int:
        return self.hopping.shape[0]

    @property
    def has_pairing(self) -> bool:
        return self.pairing is not None and np.any(self.pairing != 0)

    def operator(self) -> SecondQuantizedOperator:
        h = self.hopping - self.chemical_potential * np.eye(self.mode_count)
        op = quadratic_form(h)
        if self.has_pairing:
            op = op + pairing_form(self.pairing)
        return op.as_hermitian()


@dataclass(frozen=True)
class InteractionSpec:
    density_density: tuple[tuple[int, int, float], ...] = ()
    charging: tuple[float, float] | None = None  # (E_c, N0)

    def __post_init__(self):
        dd = tuple((int(i), int(j), float(v)) for i, j, v in self.density_density)
        for i, j, _ in dd:
            if i == j:
                raise ValueError("density-density term needs i != j")
        object.__setattr__(self, "density_density", dd)

    @property
    def empty(self) -> bool:
        return not self.density_density and self.charging is None

    def operator(self, mode_count: int) -> SecondQuantizedOperator:
        op = SecondQuantizedOperator(hermitian=True)
        for i, j, v in self.density_density:
            op = op + v * number(i) * number(j)
        if self.charging is not None:
            ec, n0 = self.charging
            shifted = total_number(mode_count) - n0 * identity()
            op = op + ec * shifted * shifted
        return op.as_hermitian()


@dataclass(frozen=True)
class ModeBasis:
    """Eigenmodes of the noninteracting part: ``transform[:, k]`` is mode ``k``.

    ``energies`` are absolute; ``fermi_index`` counts modes below ``mu``.
    """

    transform: np.ndarray
    energies: np.ndarray
    fermi_index: int
    mu: float = 0.0
    degenerate: bool = False

    @property
    def mode_count(self) -> int:
        return self.energies.size

    @property
    def relative_energies(self) -> np.ndarray:
        return self.energies - self.mu

    def creation(self, k: int) -> SecondQuantizedOperator:
        return mode_operator(self.transform[:, k], dagger=True)

    def annihilation(self, k: int) -> SecondQuantizedOperator:
        return mode_operator(self.transform[:, k], dagger=False)

    def mode_on_site(self, site: int) -> int:
        """Eigenmode with the largest weight on ``site`` (exact for diagonal hopping)."""
        return int(np.argmax(np.abs(self.transform[site])))

    def number(self, k: int) -> SecondQuantizedOperator:
        u = self.transform[:, k]
        return quadratic_form(np.outer(u, u.conj())).as_hermitian()


def _canonical_block(vecs: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of span(vecs): project site vectors in
    index order and Gram-Schmidt them (identity for diagonal blocks)."""
    dim, size = vecs.shape
    proj = vecs @ vecs.conj().T
    chosen: list[np.ndarray] = []
    for x in range(dim):
        v = proj[:, x].copy()
        for u in chosen:
            v -= u * np.vdot(u, v)
        n = np.linalg.norm(v)
        if n > 1e-8:
            chosen.append(v / n)
        if len(chosen) == size:
            break
    out = np.column_stack(chosen)
    for i in range(size):
        col = out[:, i]
        j = int(np.argmax(np.abs(col) > 1e-10))
        out[:, i] = col * (abs(col[j]) / col[j])
    return out


def single_particle_modes(q: QuadraticModel, degeneracy_tol: float = 1e-10) -> ModeBasis:
    """Diagonalize the hopping matrix; degenerate levels get a canonical basis."""
    h = q.hopping
    M = q.mode_count
    if np.abs(h - np.diag(np.diag(h))).max(initial=0.0) == 0.0:
        e = np.diag(h).real
        order = np.argsort(e, kind="stable")
        U = np.eye(M, dtype=complex)[:, order]
        e = e[order]
    else:
        e, U = np.linalg.eigh(h)
        U = U.astype(complex)
    degenerate = False
    start = 0
    scale = max(1.0, float(np.abs(e).max(initial=0.0)))
    while start < M:
        stop = start + 1
        while stop < M and e[stop] - e[start] < degeneracy_tol * scale:
            stop += 1
        if stop - start > 1:
            degenerate = True
            U[:, start:stop] = _canonical_block(U[:, start:stop])
            e[start:stop] = np.mean(e[start:stop])
        else:
            col = U[:, start]
            j = int(np.argmax(np.abs(col) > np.abs(col).max() * (1 - 1e-8)))
            U[:, start] = col * (abs(col[j]) / col[j])
        start = stop
    mu = q.chemical_potential
    return ModeBasis(U, np.asarray(e, dtype=float), int(np.sum(e < mu)), mu, degenerate)


# ---------------------------------------------------------------- presets


@dataclass(frozen=True)
class ModelConfig:
    preset: str
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        preset = d.pop("preset")
        params = d.pop("params", d)
        return cls(preset, dict(params))


@dataclass(frozen=True)
class Model:
    """A built Hamiltonian plus the pieces needed to probe it."""

    config: ModelConfig
    quadratic: QuadraticModel
    interaction: InteractionSpec
    hamiltonian: SecondQuantizedOperator
    modes: ModeBasis
    system_modes: int
    probe_modes: tuple[int, ...] = ()
    probe_specs: tuple[tuple[float, float, int], ...] = ()
    default_probe_site: int = 0

    @property
    def mode_count(self) -> int:
        return self.quadratic.mode_count

    @property
    def number_conserving(self) -> bool:
        return self.hamiltonian.conserves_number()

    def basis(self, sector: int | None = None) -> FockBasis:
        if sector is not None and not self.number_conserving:
            raise ValueError("pairing model has no fixed particle-number sector")
        return FockBasis(self.mode_count, sector)


def _chain_hopping(M: int, t: float) -> np.ndarray:
    h = np.zeros((M, M), dtype=complex)
    for i in range(M - 1):
        h[i, i + 1] = h[i + 1, i] = -t
    return h


def _positive(name, value):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")


def free_chain(M: int, t: float = 1.0, mu: float = 0.0):
    _positive("t", t)
    return QuadraticModel(_chain_hopping(int(M), t), None, mu), InteractionSpec(), {}


def interacting_chain(M: int, t: float = 1.0, V: float = 0.0, mu: float = 0.0,
                      E_c: float | None = None, N0: float | None = None):
    _positive("t", t)
    M = int(M)
    dd = tuple((i, i + 1, V) for i in range(M - 1)) if V != 0 else ()
    charging = None
    if E_c is not None:
        charging = (float(E_c), float(M / 2 if N0 is None else N0))
    return QuadraticModel(_chain_hopping(M, t), None, mu), InteractionSpec(dd, charging), {}


def pairing_toy(pairs, mu: float = 0.0):
    """Independent mode pairs ``(2k, 2k+1)`` with energy ``xi_k`` and pair
    amplitude ``Delta_k (c+_2k c+_2k+1 + h.c.)``."""
    pairs = [(float(x), float(d)) for x, d in pairs]
    M = 2 * len(pairs)
    h = np.zeros((M, M), dtype=complex)
    D = np.zeros((M, M), dtype=complex)
    for k, (xi, delta) in enumerate(pairs):
        if delta < 0:
            raise ValueError("pair amplitude must be non-negative")
        h[2 * k, 2 * k] = h[2 * k + 1, 2 * k + 1] = xi + mu
        D[2 * k, 2 * k + 1] = delta
        D[2 * k + 1, 2 * k] = -delta
    return QuadraticModel(h, D, mu), InteractionSpec(), {}


def proximity_chain(M_normal: int, M_sc: int, t: float = 1.0, Delta: float = 0.5,
                    T_tunnel: float = 0.1, mu: float = 0.0):
    """Normal segment (sites ``0..M_normal-1``) tunnel-coupled to a paired
    segment. The interface hopping is ``t*sqrt(T_tunnel)``; spinless pairing
    lives on nearest-neighbour bonds of the paired segment."""
    _positive("t", t)
    _positive("Delta", Delta)
    _positive("T_tunnel", T_tunnel)
    Mn, Ms = int(M_normal), int(M_sc)
    M = Mn + Ms
    h = _chain_hopping(M, t)
    if Mn and Ms:
        h[Mn - 1, Mn] = h[Mn, Mn - 1] = -t * math.sqrt(T_tunnel)
    D = np.zeros((M, M), dtype=complex)
    for i in range(Mn, M - 1):
        D[i, i + 1] = Delta
        D[i + 1, i] = -Delta
    return QuadraticModel(h, D, mu), InteractionSpec(), {"default_probe_site": 0}


PRESETS: dict[str, Callable[..., Any]] = {
    "free_chain": free_chain,
    "interacting_chain": interacting_chain,
    "pairing_toy": pairing_toy,
    "proximity_chain": proximity_chain,
}


def _probe_coupled(inner: dict | ModelConfig, probes):
    inner_cfg = inner if isinstance(inner, ModelConfig) else ModelConfig.from_dict(inner)
    if inner_cfg.preset == "probe_coupled":
        raise ValueError("probe_coupled cannot be nested")
    q, inter, extra = PRESETS[inner_cfg.preset](**inner_cfg.params)
    n_sys = q.mode_count
    probes = [(float(e), float(v), int(x)) for e, v, x in probes]
    M = n_sys + len(probes)
    h = np.zeros((M, M), dtype=complex)
    h[:n_sys, :n_sys] = q.hopping
    D = np.zeros((M, M), dtype=complex)
    if q.pairing is not None:
        D[:n_sys, :n_sys] = q.pairing
    mu = q.chemical_potential
    for j, (eps, vp, site) in enumerate(probes):
        if not 0 <= site < n_sys:
            raise ValueError(f"probe site {site} outside system")
        if vp < 0:
            raise ValueError("probe coupling must be non-negative")
        d = n_sys + j
        h[d, d] = eps + mu
        h[site, d] = h[d, site] = vp
    qm = QuadraticModel(h, D if np.any(D) else None, mu)
    extra = dict(extra, probe_modes=tuple(range(n_sys, M)), probe_specs=tuple(probes), system_modes=n_sys)
    return qm, inter, extra


def build_model(config: ModelConfig | dict) -> Model:
    if isinstance(config, dict):
        config = ModelConfig.from_dict(config)
    if config.preset == "probe_coupled":
        q, inter, extra = _probe_coupled(**config.params)
    elif config.preset in PRESETS:
        q, inter, extra = PRESETS[config.preset](**config.params)
    else:
        raise ValueError(f"unknown preset {config.preset!r}")
    if q.mode_count > MAX_MODES:
        raise ValueError(f"{q.mode_count} modes exceed the basis cap {MAX_MODES}")
    H = (q.operator() + inter.operator(q.mode_count)).as_hermitian()
    noninteracting = QuadraticModel(q.hopping, None, q.chemical_potential)
    return Model(
        config=config,
        quadratic=q,
        interaction=inter,
        hamiltonian=H,
        modes=single_particle_modes(noninteracting),
        system_modes=extra.get("system_modes", q.mode_count),
        probe_modes=extra.get("probe_modes", ()),
        probe_specs=extra.get("probe_specs", ()),
        default_probe_site=extra.get("default_probe_site", 0),
    )


def build_hamiltonian(config: ModelConfig | dict) -> tuple[SecondQuantizedOperator, ModeBasis]:
    m = build_model(config)
    return m.hamiltonian, m.modes


# ---------------------------------------------------------- closed forms


def bcs_uv_oracle(xi: float, delta: float) -> tuple[float, float, float]:
    """Pair-state weights ``(u^2, v^2)`` and the predicted ``alpha = u^2/v^2``."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if xi == 0 and delta == 0:
        raise ValueError("xi and delta both zero")
    E = math.hypot(xi, delta)
    # cancellation-free branches
    if xi > 0:
        v2 = delta**2 / (2 * E * (E + xi))
        u2 = (E + xi) / (2 * E)
    else:
        u2 = delta**2 / (2 * E * (E - xi))
        v2 = (E - xi) / (2 * E)
    if v2 == 0:
        raise ValueError("empty mode, alpha undefined")
    return u2, v2, u2 / v2


@dataclass(frozen=True)
class QdFormulaInputs:
    N: float
    gamma0: float
    gamma1: float
    eps0: float
    eps1: float

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("channel count must be >= 1")
        if self.gamma0 <= 0 or self.gamma1 <= 0:
            raise ValueError("level widths must be positive")
        if not self.eps1 > self.eps0:
            raise ValueError("need eps1 > eps0")


@dataclass(frozen=True)
class QdResult:
    entanglement: float
    alpha_int: float
    alpha_nonint: float
    valid: bool
    gamma_bar: float


def qd_entanglement_formula(inp: QdFormulaInputs) -> QdResult:
    """Leading-order open-dot entanglement with its validity flag."""
    gbar = 2.0 / (1.0 / inp.gamma0 + 1.0 / inp.gamma1)
    de = inp.eps1 - inp.eps0
    a_int = gbar / (inp.N * de)
    a_nonint = -inp.gamma0 * inp.gamma1 / de**2
    e1 = (1.0 / inp.N) * (gbar / de) * (math.log(inp.N * de / gbar) + 1.0)
    valid = (inp.gamma0 + inp.gamma1) / (2.0 * de) < 1.0 / inp.N
    return QdResult(e1, a_int, a_nonint, valid, gbar)


# ------------------------------------------------------ perturbative oracle


@dataclass(frozen=True)
class PerturbativeAlpha:
    alpha: float | None
    mean0: float
    mean1: float
    cross: float
    covariance: float
    amplitudes: dict[int, complex]
    status: str


def _mode_space_interaction(inter: InteractionSpec, U: np.ndarray) -> SecondQuantizedOperator:
    op = SecondQuantizedOperator(hermitian=True)
    M = U.shape[0]

    def n_site(i):
        # n_i = sum_kl conj(U_ik) U_il psi_k^+ psi_l
        return quadratic_form(np.outer(U[i].conj(), U[i]), tol=1e-15)

    for i, j, v in inter.density_density:
        op = op + v * n_site(i) * n_site(j)
    if inter.charging is not None:
        ec, n0 = inter.charging
        shifted = total_number(M) - n0 * identity()
        op = op + ec * shifted * shifted
    return op.as_hermitian()


def perturbation_oracle(config: ModelConfig | dict, hole_mode: int, particle_mode: int,
                        denominator_tol: float = 1e-10) -> PerturbativeAlpha:
    """First-order Rayleigh-Schroedinger estimate of the occupation correlator.

    The unperturbed state is the Fermi sea of the hopping part; the
    interaction is rotated into the eigenmode basis, single and double
    particle-hole admixtures get amplitudes ``<x|H_V|FS>/(E_FS - E_x)``, and
    the ratio for ``m0 = 1 - n_hole``, ``m1 = n_particle`` is evaluated in
    that truncated state.
    """
    if isinstance(config, dict):
        config = ModelConfig.from_dict(config)
    if config.preset != "interacting_chain":
        raise ValueError("perturbation oracle supports interacting_chain only")
    q, inter, _ = interacting_chain(**config.params)
    modes = single_particle_modes(q)
    eps = modes.relative_energies
    if np.any(np.abs(eps) < denominator_tol):
        raise ValueError("mode at the Fermi level: vanishing denominator")
    nf = modes.fermi_index
    if not (hole_mode < nf <= particle_mode):
        raise ValueError("hole mode must lie below and particle mode above the Fermi level")
    M = modes.mode_count
    basis = FockBasis(M, nf)
    fs_word = (1 << nf) - 1
    fs = basis.basis_vector(fs_word)
    HV = _mode_space_interaction(inter, modes.transform)
    hv_fs = apply_operator(HV, fs).amplitudes
    occ = basis.occupations()
    e_x = occ @ eps
    e_fs = float(np.sum(eps[:nf]))
    amp = np.zeros(len(basis), dtype=complex)
    fs_idx = int(basis.index(fs_word)[0])
    amp[fs_idx] = 1.0
    coeffs = {}
    for i in np.nonzero(np.abs(hv_fs) > 1e-15)[0]:
        if i == fs_idx:
            continue
        gap = e_fs - e_x[i]
        if abs(gap) < denominator_tol:
            raise ValueError("degenerate excitation: vanishing denominator")
        amp[i] = hv_fs[i] / gap
        coeffs[int(basis.states[i])] = complex(amp[i])
    p = np.abs(amp) ** 2
    p /= p.sum()
    m0 = 1.0 - occ[:, hole_mode]
    m1 = occ[:, particle_mode]
    mean0, mean1 = float(p @ m0), float(p @ m1)
    cross = float(p @ (m0 * m1))
    cov = cross - mean0 * mean1
    if mean0 < 1e-14 or mean1 < 1e-14:
        return PerturbativeAlpha(None, mean0, mean1, cross, cov, coeffs, "undefined")
    return PerturbativeAlpha(cov / (mean0 * mean1), mean0, mean1, cross, cov, coeffs, "ok")
