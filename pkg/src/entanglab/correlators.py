"""
Normalized irreducible probe correlator ``alpha`` in three realizations.

* mode flavor: static occupations of noninteracting eigenmodes;
* filtered flavor: sequential, energy-resolved transitions built from the
  exact many-body spectrum (probe 0 acts first, probe 1 on the state it
  leaves behind);
* probe-level flavor: explicit resonant levels weakly hybridized with the
  system, extrapolated to vanishing coupling.

A *particle* probe extracts electrons (``f = d``, S-side operator ``psi``,
static observable ``n``); a *hole* probe injects them (``f = d^dagger``,
``psi^dagger``, ``1 - n``). Probe energies are measured from the chemical
potential.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cone import StateFunctional
from .fock import (
    FockBasis,
    FockVector,
    LadderFn,
    apply_operator,
    c,
    cdag,
    ladder_array,
    materialize,
)
from .models import ModeBasis, Model, ModelConfig, build_model
from .spectra import SpectrumResult, ground_state

PARTICLE = "particle"
HOLE = "hole"
MEAN_FLOOR = 1e-14
# |alpha| below this is round-off, not a sign
ALPHA_ZERO_TOL = 1e-12


class ProbeSignWarning(UserWarning):
    pass


class UndefinedAlphaError(ValueError):
    pass


class InsufficientSpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class ProbeSpec:
    """One resonant-level probe.

    ``mode`` pins the eigenmode used by the mode flavor (otherwise it is
    selected by ``energy``); ``site`` is where the filtered and probe-level
    flavors touch the system.
    """

    energy: float
    character: str = PARTICLE
    width: float = 0.05
    site: int = 0
    coupling: float = 0.0
    mode: int | None = None

    def __post_init__(self):
        if self.character not in (PARTICLE, HOLE):
            raise ValueError(f"character must be 'particle' or 'hole', got {self.character!r}")
        if not self.width > 0:
            raise ValueError("probe width must be positive")
        if self.coupling < 0:
            raise ValueError("probe coupling must be non-negative")
        if self.mode is not None:
            if float(self.mode) != int(self.mode):
                raise ValueError(f"mode must be an integer, got {self.mode}")
            object.__setattr__(self, "mode", int(self.mode))

    @property
    def is_particle(self) -> bool:
        return self.character == PARTICLE

    def with_(self, **kw) -> "ProbeSpec":
        d = dict(self.__dict__)
        d.update(kw)
        return ProbeSpec(**d)


@dataclass
class AlphaResult:
    alpha: float | None
    mean0: float
    mean1: float
    cross: float
    covariance: float
    flavor: str
    status: str = "ok"  # ok | negative_alpha | undefined | flagged
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def from_moments(cls, mean0, mean1, cross, flavor, diagnostics=None, strict=True):
        cov = cross - mean0 * mean1
        diagnostics = diagnostics or {}
        if mean0 < MEAN_FLOOR or mean1 < MEAN_FLOOR:
            if strict:
                raise UndefinedAlphaError("probe current vanishes, alpha undefined")
            return cls(None, mean0, mean1, cross, cov, flavor, "undefined", diagnostics)
        alpha = cov / (mean0 * mean1)
        status = "negative_alpha" if alpha < -ALPHA_ZERO_TOL else "ok"
        return cls(alpha, mean0, mean1, cross, cov, flavor, status, diagnostics)


# ------------------------------------------------------------ mode flavor


def select_mode(basis: ModeBasis, energy: float, tol: float) -> int:
    """Index of the unique eigenmode within ``tol`` of ``energy`` (relative to mu)."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    dist = np.abs(basis.relative_energies - energy)
    close = np.nonzero(dist <= tol)[0]
    if close.size > 1:
        raise ValueError(f"ambiguous mode selection: modes {close.tolist()} within {tol} of {energy}")
    if close.size == 0:
        raise ValueError(f"no mode at energy {energy} (nearest is {dist.min():.3g} away)")
    return int(close[0])


def _probe_mode(basis: ModeBasis, probe: ProbeSpec, tol: float | None) -> int:
    if probe.mode is not None:
        if not 0 <= probe.mode < basis.mode_count:
            raise ValueError(f"mode {probe.mode} out of range")
        return probe.mode
    return select_mode(basis, probe.energy, probe.width if tol is None else tol)


def _full_space(g: FockVector) -> FockVector:
    if g.basis.sector is None:
        return g
    full = FockBasis(g.basis.mode_count)
    amp = np.zeros(len(full), dtype=complex)
    amp[g.basis.states] = g.amplitudes
    return FockVector(full, amp)


def _f_op(basis: ModeBasis, k: int, probe: ProbeSpec):
    # f = psi_k for particle, psi_k^dagger for hole; <f^+ f> = <m>
    return basis.annihilation(k) if probe.is_particle else basis.creation(k)


def mode_occupation_correlator(g: FockVector, basis: ModeBasis, probe0: ProbeSpec, probe1: ProbeSpec,
                               *, tol: float | None = None, strict: bool = True,
                               cache: dict | None = None) -> AlphaResult:
    """alpha from occupations of the noninteracting eigenmodes selected by the probes.

    ``m_j = n_k`` for a particle probe and ``1 - n_k`` for a hole probe.
    ``cache`` (an empty dict owned by the caller, reused for one ``g`` and
    ``basis``) keeps ``f_k |g>`` between calls when scanning many pairs.
    """
    if not g.is_normalized():
        raise ValueError("state not normalized")
    k0 = _probe_mode(basis, probe0, tol)
    k1 = _probe_mode(basis, probe1, tol)
    if k0 == k1:
        raise ValueError("probes select the same mode")
    cache = {} if cache is None else cache
    if "g" not in cache:
        cache["g"] = _full_space(g)
    g = cache["g"]

    def op(k, probe):
        key = ("op", k, probe.is_particle)
        if key not in cache:
            cache[key] = _f_op(basis, k, probe)
        return cache[key]

    def fg(k, probe):
        key = ("fg", k, probe.is_particle)
        if key not in cache:
            cache[key] = apply_operator(op(k, probe), g)
        return cache[key]

    f0g = fg(k0, probe0)
    f1g = fg(k1, probe1)
    f1f0g = apply_operator(op(k1, probe1), f0g)
    mean0 = f0g.norm**2
    mean1 = f1g.norm**2
    cross = f1f0g.norm**2
    diag = {"modes": (k0, k1), "mode_energies": tuple(basis.relative_energies[[k0, k1]])}
    return AlphaResult.from_moments(mean0, mean1, cross, "mode", diag, strict)


def cone_states(g: FockVector, basis: ModeBasis, probe0: ProbeSpec, probe1: ProbeSpec,
                *, tol: float | None = None) -> tuple[StateFunctional, StateFunctional, StateFunctional]:
    """Static functionals (lambda_g, lambda_0, lambda_1) on {A_0 = 1, A_1 = m_1}.

    ``lambda_j`` is the expectation in the normalized state ``f_j |g>``.
    """
    if not g.is_normalized():
        raise ValueError("state not normalized")
    g = _full_space(g)
    k0 = _probe_mode(basis, probe0, tol)
    k1 = _probe_mode(basis, probe1, tol)
    if k0 == k1:
        raise ValueError("probes select the same mode")
    f1 = _f_op(basis, k1, probe1)

    def m1_in(v: FockVector) -> float:
        return apply_operator(f1, v).norm ** 2

    states = []
    for k, probe in ((k0, probe0), (k1, probe1)):
        fg = apply_operator(_f_op(basis, k, probe), g)
        if fg.norm < 1e-14:
            raise ValueError("state undefined: f|g> has zero norm")
        states.append(fg.normalized())
    lam_g = StateFunctional([1.0, m1_in(g)], "g")
    lam0 = StateFunctional([1.0, m1_in(states[0])], "0")
    lam1 = StateFunctional([1.0, m1_in(states[1])], "1")
    return lam_g, lam0, lam1


def pauli_check(g: FockVector, basis: ModeBasis, probe: ProbeSpec, *, tol: float | None = None,
                ladder: LadderFn = ladder_array) -> float:
    """Expectation of the probe observable in the normalized state ``f|g>``.

    Vanishes identically for fermions (``f f = 0``); ``ladder`` allows
    checking a mutated algebra.
    """
    g = _full_space(g)
    k = _probe_mode(basis, probe, tol)
    f = _f_op(basis, k, probe)
    fg = apply_operator(f, g, ladder=ladder)
    if fg.norm < 1e-14:
        raise ValueError("state undefined: f|g> has zero norm")
    return apply_operator(f, fg.normalized(), ladder=ladder).norm ** 2


# -------------------------------------------------------- filtered flavor


def _lorentz_amp(delta: np.ndarray, width: float) -> np.ndarray:
    return width / np.sqrt(delta**2 + width**2)


def _site_op(probe: ProbeSpec):
    return c(probe.site) if probe.is_particle else cdag(probe.site)


def _target_shift(probe: ProbeSpec) -> float:
    # extraction of an electron at energy e changes E_S by -e, injection by +e
    return -probe.energy if probe.is_particle else probe.energy


def _eigenbasis_operator(spectrum: SpectrumResult, probe: ProbeSpec) -> np.ndarray:
    """``<m'|psi|m>`` for the probe's site operator, cached on the spectrum."""
    key = ("site_op", probe.site, probe.is_particle)
    if key not in spectrum.cache:
        V = spectrum.vectors
        if not np.any(V.imag):
            V = V.real
        op = materialize(_site_op(probe), spectrum.basis, check_hermitian=False)
        if np.isrealobj(V):
            op = op.real
        spectrum.cache[key] = V.conj().T @ (op @ V)
    return spectrum.cache[key]


def filtered_correlator(spectrum: SpectrumResult, probe0: ProbeSpec, probe1: ProbeSpec,
                        *, prune: float = 1e-28, strict: bool = True) -> AlphaResult:
    """Energy-resolved alpha from the many-body spectrum.

    Probe ``j`` acts through ``A_j = sum_{m,m'} w_j(E_m' - E_m) |m'><m'| psi_j |m><m|``
    with Lorentzian probability weight ``w_j^2 = gamma^2 / ((dE - s_j)^2 + gamma^2)``
    centred at the energy transfer ``s_j`` of the probe. Rates are
    ``R_j = |A_j g|^2`` and the joint rate is ``R_01 = |A_1 A_0 g|^2``;
    alpha = R_01 / (R_0 R_1) - 1.
    """
    if spectrum.ground_degeneracy != 1:
        raise ValueError("degenerate ground state: alpha ill-defined")
    E = spectrum.eigenvalues
    basis = spectrum.basis
    if basis.sector is not None:
        raise ValueError("filtered correlator needs an all-sector spectrum")
    shifts = (_target_shift(probe0), _target_shift(probe1))
    widths = (probe0.width, probe1.width)
    if not spectrum.complete:
        reach = E[-1] - E[0]
        need = max(abs(s) + 3 * w for s, w in zip(shifts, widths))
        if reach < need:
            raise InsufficientSpectrumError(
                f"spectrum reaches {reach:.4g} above E_g, filters need {need:.4g}"
            )
    T0 = _eigenbasis_operator(spectrum, probe0)
    T1 = _eigenbasis_operator(spectrum, probe1)
    dE0 = E - E[0]
    c0 = T0[:, 0] * _lorentz_amp(dE0 - shifts[0], widths[0])
    c1 = T1[:, 0] * _lorentz_amp(dE0 - shifts[1], widths[1])
    R0 = float(np.sum(np.abs(c0) ** 2))
    R1 = float(np.sum(np.abs(c1) ** 2))
    keep = np.nonzero(np.abs(c0) ** 2 > prune * max(R0, 1e-300))[0]
    W1 = _lorentz_amp(E[:, None] - E[None, keep] - shifts[1], widths[1])
    joint = (T1[:, keep] * W1) @ c0[keep]
    R01 = float(np.sum(np.abs(joint) ** 2))

    def window_degeneracy(shift, width):
        win = np.abs(dE0 - shift) < 3 * width
        levels = np.round(E[win] / max(spectrum.degeneracy_tol, 1e-12))
        return int(win.sum() - np.unique(levels).size)

    diag = {
        "shifts": shifts,
        "widths": widths,
        "rates": (R0, R1, R01),
        "intermediate_states": int(keep.size),
        "window_degeneracy": tuple(window_degeneracy(s, w) for s, w in zip(shifts, widths)),
    }
    return AlphaResult.from_moments(R0, R1, R01, "filtered", diag, strict)


# ---------------------------------------------------- probe-level flavor


def _probe_level_once(model: Model, characters) -> tuple[float, float, float]:
    basis = model.basis()
    gs = ground_state(model.hamiltonian, basis)
    p = np.abs(gs.state.amplitudes) ** 2
    occ = []
    for d, ch in zip(model.probe_modes, characters):
        bit = ((basis.states >> d) & 1).astype(bool)
        occ.append(bit if ch == PARTICLE else ~bit)
    m0 = float(p[occ[0]].sum())
    m1 = float(p[occ[1]].sum())
    cross = float(p[occ[0] & occ[1]].sum())
    return m0, m1, cross


def probe_level_correlator(config: ModelConfig | dict, characters=(PARTICLE, PARTICLE),
                           *, halvings: int = 2) -> AlphaResult:
    """alpha from the occupations of two explicit probe levels.

    The ground state of the enlarged model is recomputed with all couplings
    scaled by ``1, 1/2, ..., 2**-halvings``; alpha at the two weakest
    couplings is Richardson-extrapolated in ``v'^2``. A particle probe
    measures ``n_d``, a hole probe ``1 - n_d``. The result is flagged when
    successive differences fail to shrink.
    """
    if isinstance(config, dict):
        config = ModelConfig.from_dict(config)
    if config.preset != "probe_coupled":
        raise ValueError("probe_level_correlator needs a probe_coupled configuration")
    probes = [tuple(p) for p in config.params["probes"]]
    if len(probes) != 2:
        raise ValueError("exactly two probes required")
    for (eps, vp, _), ch in zip(probes, characters):
        if vp <= 0:
            raise ValueError("probe coupling must be positive")
        if (ch == PARTICLE and eps < 0) or (ch == HOLE and eps > 0):
            warnings.warn(
                f"{ch} level at {eps} is not on its nominally {'empty' if ch == PARTICLE else 'filled'} side",
                ProbeSignWarning,
                stacklevel=2,
            )
    scales = [2.0**-i for i in range(halvings + 1)]
    raw = []
    for s in scales:
        params = dict(config.params)
        params["probes"] = [(e, v * s, x) for e, v, x in probes]
        model = build_model(ModelConfig("probe_coupled", params))
        raw.append(_probe_level_once(model, characters))
    alphas = []
    for m0, m1, cr in raw:
        alphas.append((cr - m0 * m1) / (m0 * m1) if min(m0, m1) >= MEAN_FLOOR else np.nan)
    alphas = np.array(alphas)
    if np.any(np.isnan(alphas)):
        m0, m1, cr = raw[-1]
        return AlphaResult(None, m0, m1, cr, cr - m0 * m1, "probe_level", "undefined",
                           {"couplings": [v for _, v, _ in probes], "scales": scales})
    extrapolated = (4.0 * alphas[-1] - alphas[-2]) / 3.0
    diffs = np.abs(np.diff(alphas))
    converging = bool(np.all(diffs[1:] <= diffs[:-1] + 1e-14)) if diffs.size > 1 else True
    m0, m1, cr = raw[-1]
    cov = cr - m0 * m1
    status = "ok" if converging else "flagged"
    if converging and extrapolated < -ALPHA_ZERO_TOL:
        status = "negative_alpha"
    diag = {"scales": scales, "alphas": alphas.tolist(), "differences": diffs.tolist(),
            "converging": converging, "raw_moments": raw}
    return AlphaResult(float(extrapolated), m0, m1, cr, cov, "probe_level", status, diag)


def quadratic_probe_level_oracle(config: ModelConfig | dict, characters=(PARTICLE, PARTICLE)) -> float:
    """Probe-level alpha of a number-conserving quadratic model from its
    single-particle ground projector ``P`` (Wick factorization, no many-body
    state): ``cov(n_a, n_b) = -|P_ab|^2`` and a hole character flips its sign."""
    if isinstance(config, dict):
        config = ModelConfig.from_dict(config)
    model = build_model(config)
    if model.quadratic.has_pairing or not model.interaction.empty:
        raise ValueError("oracle needs a number-conserving quadratic model")
    h = model.quadratic.hopping - model.quadratic.chemical_potential * np.eye(model.mode_count)
    e, U = np.linalg.eigh(h)
    occ = U[:, e < 0]
    P = occ @ occ.conj().T
    a, b = model.probe_modes
    means = []
    for d, ch in zip((a, b), characters):
        means.append(P[d, d].real if ch == PARTICLE else 1.0 - P[d, d].real)
    sign = 1.0 if (characters[0] == PARTICLE) == (characters[1] == PARTICLE) else -1.0
    return float(-sign * abs(P[a, b]) ** 2 / (means[0] * means[1]))


# ----------------------------------------------------- kernel quadrature


@dataclass(frozen=True)
class KernelParams:
    gamma: float
    tau: float | None = None

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        tau = 1.0 / self.gamma if self.tau is None else self.tau
        if not tau > 0:
            raise ValueError("tau must be positive")
        object.__setattr__(self, "tau", float(tau))
        gt = self.gamma * tau
        if not 1e-6 < gt < 1e3:
            raise ValueError(f"gamma*tau = {gt} outside (1e-6, 1e3)")


class GridTooCoarseError(ValueError):
    pass


@dataclass
class KernelResult:
    alpha: float
    imaginary: float
    error_estimate: float
    integral: complex


_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)
_GL_X5, _GL_W5 = np.polynomial.legendre.leggauss(5)


def _composite(f, edges, nodes, weights):
    a, b = edges[:-1], edges[1:]
    half = (b - a) / 2
    mid = (b + a) / 2
    x = mid[:, None] + half[:, None] * nodes[None, :]
    return np.sum(half[:, None] * weights[None, :] * f(x), axis=1)


def adaptive_integral(f, a: float, b: float, *, tol: float = 1e-13, breakpoints=None,
                      max_level: int = 40) -> tuple[float, float]:
    """Adaptive composite Gauss-Legendre of a vectorized ``f`` on ``[a, b]``.

    Panels whose 10- and 5-point rules disagree beyond their share of
    ``tol`` are bisected. Returns ``(value, error_estimate)``.
    """
    edges = np.unique(np.concatenate([[a, b], [] if breakpoints is None else breakpoints]))
    edges = edges[(edges >= a) & (edges <= b)]
    total = 0.0
    err_total = 0.0
    panels = np.stack([edges[:-1], edges[1:]], axis=1)
    for _ in range(max_level):
        if panels.size == 0:
            break
        e = panels.T
        hi = _composite_pairs(f, e, _GL_X, _GL_W)
        lo = _composite_pairs(f, e, _GL_X5, _GL_W5)
        err = np.abs(hi - lo)
        share = tol * (e[1] - e[0]) / (b - a)
        done = err <= np.maximum(share, 1e-300)
        total += hi[done].sum()
        err_total += err[done].sum()
        rest = panels[~done]
        mid = rest.mean(axis=1)
        panels = np.concatenate([np.stack([rest[:, 0], mid], 1), np.stack([mid, rest[:, 1]], 1)])
    else:
        if panels.size:
            e = panels.T
            hi = _composite_pairs(f, e, _GL_X, _GL_W)
            total += hi.sum()
            err_total += np.abs(hi - _composite_pairs(f, e, _GL_X5, _GL_W5)).sum()
    return float(total), float(err_total)


def _composite_pairs(f, e, nodes, weights):
    a, b = e
    half = (b - a) / 2
    mid = (b + a) / 2
    x = mid[:, None] + half[:, None] * nodes[None, :]
    return np.sum(half[:, None] * weights[None, :] * f(x), axis=1)


def _tail_lorentz(gamma: float, W: float) -> float:
    # int_W^inf gamma^2/(w^2+gamma^2) dw
    return gamma * np.arctan2(gamma, W)


def _tail_cos_lorentz(gamma: float, tau: float, W: float) -> float:
    # int_W^inf cos(w tau) gamma^2/(w^2+gamma^2) dw via the Fourier-weighted QUADPACK rule
    from scipy.integrate import quad

    val, _ = quad(lambda w: gamma**2 / (w * w + gamma**2), W, np.inf, weight="cos", wvar=tau, limlst=200)
    return val


def lorentzian_norm(gamma: float, cutoff_factor: float = 50.0, tol: float = 1e-14) -> float:
    """``int dw/2pi gamma^2/(w^2+gamma^2)`` by the same quadrature used for kernels."""
    W = cutoff_factor * gamma
    inner, _ = adaptive_integral(lambda w: gamma**2 / (w * w + gamma**2), 0.0, W, tol=tol * gamma)
    return 2 * (inner + _tail_lorentz(gamma, W)) / (2 * np.pi)


def read_spectrum_table(path) -> tuple[np.ndarray, np.ndarray]:
    """Two-column ``omega  S(omega)`` text file; ``#`` starts a comment."""
    data = np.loadtxt(Path(path), comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"expected two columns, got {data.shape[1]}")
    omega, s = data[:, 0], data[:, 1]
    if np.any(np.diff(omega) <= 0):
        raise ValueError("omega column must be strictly increasing")
    return omega, s


def write_spectrum_table(path, omega, s, header: str = "") -> None:
    lines = [f"# {h}" for h in header.splitlines()] if header else []
    lines += [f"{repr(float(w))} {repr(float(v))}" for w, v in zip(omega, s)]
    Path(path).write_text("\n".join(lines) + "\n")


def alpha_from_spectrum(omega, spectrum, means: tuple[float, float], k: KernelParams,
                        *, tol: float = 1e-8, even_tol: float = 1e-8) -> KernelResult:
    """alpha from a tabulated symmetrized cross-correlation spectrum.

    The table is interpolated with a cubic spline inside its range and held
    at its edge value beyond it (tails integrated analytically / with a
    Fourier rule). The kernel is
    ``(exp(-i w tau) - exp(-gamma tau)) / (1 - exp(-gamma tau)) * gamma^2/(w^2+gamma^2)``.
    """
    from scipy.interpolate import CubicSpline

    omega = np.asarray(omega, dtype=float)
    S = np.asarray(spectrum, dtype=float)
    if omega.shape != S.shape or omega.ndim != 1 or omega.size < 4:
        raise ValueError("need matching 1-d omega and spectrum arrays with >= 4 points")
    if np.any(np.diff(omega) <= 0):
        raise ValueError("omega must be strictly increasing")
    m0, m1 = means
    if m0 == 0 or m1 == 0:
        raise ValueError("means must be nonzero")
    g, tau = k.gamma, k.tau
    W = min(-omega[0], omega[-1])
    if W < 50 * g:
        raise ValueError(f"grid covers |omega| <= {W:.4g}, need at least 50*gamma = {50 * g:.4g}")
    scale = max(np.abs(S).max(), 1e-300)
    spline = CubicSpline(omega, S)
    # every other node (ends kept) for a Richardson estimate of the spline error
    sub = np.unique(np.r_[np.arange(0, omega.size, 2), omega.size - 1])
    coarse = CubicSpline(omega[sub], S[sub])
    probe = omega[(omega >= -W) & (omega <= W)]
    asym = np.abs(spline(probe) - spline(-probe)).max()
    if asym > even_tol * scale:
        raise ValueError(f"spectrum is not even in omega (asymmetry {asym:.3g})")

    egt = np.exp(-g * tau)
    norm = 1.0 - egt
    lor = lambda w: g * g / (w * w + g * g)
    inside = omega[(omega > 0) & (omega < W)]

    def integral(interp):
        re, err = adaptive_integral(
            lambda w: (np.cos(w * tau) - egt) / norm * lor(w) * interp(w), 0.0, W,
            tol=tol * scale * g, breakpoints=inside,
        )
        im, err_im = adaptive_integral(
            lambda w: -np.sin(w * tau) / norm * lor(w) * interp(w), -W, W,
            tol=tol * scale * g, breakpoints=omega[(omega > -W) & (omega < W)],
        )
        return 2 * re, im, err

    re, im, qerr = integral(spline)
    re_coarse, _, _ = integral(coarse)
    edge = 0.5 * (spline(W) + spline(-W))
    tail = edge * (_tail_cos_lorentz(g, tau, W) - egt * _tail_lorentz(g, W)) / norm
    re += 2 * tail
    re_coarse += 2 * tail
    denom = 2 * np.pi * m0 * m1
    alpha = re / denom
    imag = im / denom
    interp_err = abs(re - re_coarse) / 15.0 / abs(denom)
    err = interp_err + 2 * qerr / abs(denom)
    if err > max(tol, tol * abs(alpha)):
        raise GridTooCoarseError(
            f"estimated quadrature error {err:.3g} exceeds tolerance; refine the omega grid "
            f"(spacing <= gamma/20 near |omega| < 10 gamma is a safe start)"
        )
    if abs(imag) >= 1e-8 * abs(alpha) + 1e-12:
        raise ValueError(f"imaginary residue {imag:.3g} too large: spectrum not symmetric")
    return KernelResult(float(alpha), float(imag), float(err), complex(re, im))
