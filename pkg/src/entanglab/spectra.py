"""Ground states and low-lying spectra, dense or by Lanczos iteration."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .fock import FockBasis, FockVector, SecondQuantizedOperator, materialize

DENSE_CAP = 4096
DEGENERACY_TOL = 1e-9


class DegenerateGroundStateError(RuntimeError):
    pass


class NoConvergenceError(RuntimeError):
    def __init__(self, msg, iterations=None, residuals=None):
        super().__init__(msg)
        self.iterations = iterations
        self.residuals = residuals


@dataclass(frozen=True)
class SpectrumResult:
    """Lowest eigenpairs; ``vectors[:, i]`` belongs to ``eigenvalues[i]``."""

    eigenvalues: np.ndarray
    vectors: np.ndarray
    basis: FockBasis
    ground_degeneracy: int
    degeneracy_tol: float = DEGENERACY_TOL
    method: str = "dense"
    cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __len__(self):
        return self.eigenvalues.size

    def vector(self, i: int) -> FockVector:
        return FockVector(self.basis, self.vectors[:, i])

    @property
    def complete(self) -> bool:
        return self.eigenvalues.size == len(self.basis)


@dataclass(frozen=True)
class GroundState:
    energy: float
    state: FockVector
    degeneracy: int
    tie_broken: bool = False


def _hermitian_matrix(H, basis: FockBasis):
    if isinstance(H, SecondQuantizedOperator):
        if not H.hermitian:
            raise ValueError("Hamiltonian is not flagged hermitian")
        return materialize(H, basis)
    mat = sp.csr_matrix(H) if sp.issparse(H) else np.asarray(H)
    diff = mat - mat.conj().T
    err = abs(diff).max() if sp.issparse(diff) else np.abs(diff).max(initial=0.0)
    if err > 1e-12:
        raise ValueError("Hamiltonian matrix is not hermitian")
    return mat


def _fix_phase(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude entry (first on ties) made real positive
    vecs = np.array(vecs, dtype=complex)
    for i in range(vecs.shape[1]):
        col = vecs[:, i]
        mags = np.abs(col)
        j = int(np.argmax(mags > mags.max() * (1 - 1e-8)))
        vecs[:, i] = col * (abs(col[j]) / col[j])
    return vecs


def lanczos(
    matvec,
    dim: int,
    k: int = 1,
    *,
    tol: float = 1e-11,
    max_iter: int = 300,
    locked: np.ndarray | None = None,
    seed: int = 12345,
):
    """Lowest ``k`` eigenpairs of a hermitian operator by Lanczos with full
    reorthogonalization.

    ``locked`` columns are projected out at every step (deflation). The
    start vector comes from a fixed seed so runs are reproducible.
    """
    rng = np.random.default_rng(seed)
    q = rng.normal(size=dim) + 1j * rng.normal(size=dim)

    def project(x):
        if locked is not None and locked.shape[1]:
            for _ in range(2):
                x = x - locked @ (locked.conj().T @ x)
        return x

    q = project(q)
    avail = dim - (0 if locked is None else locked.shape[1])
    m_max = min(max_iter, avail)
    k = min(k, avail)
    Q = np.zeros((dim, m_max), dtype=complex)
    alpha = np.zeros(m_max)
    beta = np.zeros(m_max)
    Q[:, 0] = q / np.linalg.norm(q)
    theta = s = None
    for j in range(m_max):
        w = project(matvec(Q[:, j]))
        alpha[j] = np.vdot(Q[:, j], w).real
        for _ in range(2):
            w = w - Q[:, : j + 1] @ (Q[:, : j + 1].conj().T @ w)
        w = project(w)
        b = np.linalg.norm(w)
        theta, s = la.eigh_tridiagonal(alpha[: j + 1], beta[:j])
        nk = min(k, j + 1)
        resid = np.abs(b * s[-1, :nk])
        invariant = b < 1e-12 * max(1.0, np.abs(theta).max())
        if (j + 1 >= k and np.all(resid < tol * np.maximum(1.0, np.abs(theta[:nk])))) or invariant:
            m = j + 1
            break
        if j + 1 < m_max:
            beta[j] = b
            Q[:, j + 1] = w / b
    else:
        m = m_max
        nk = min(k, m)
        resid = np.abs(b * s[-1, :nk])
        if m < avail and np.any(resid >= tol * np.maximum(1.0, np.abs(theta[:nk]))):
            raise NoConvergenceError(
                f"Lanczos did not converge in {m_max} iterations",
                iterations=m_max,
                residuals=resid,
            )
    nk = min(k, m)
    vecs = Q[:, :m] @ s[:, :nk]
    return theta[:nk], vecs


def _lanczos_spectrum(mat, k: int, degeneracy_tol: float, max_iter: int):
    """Lanczos with locking; repeats deflated runs until no eigenvalue below
    the current k-th one is missing (catches degenerate copies)."""
    dim = mat.shape[0]
    vals: list[float] = []
    vecs = np.zeros((dim, 0), dtype=complex)
    for run in range(dim):
        if len(vals) >= dim:
            break
        need = max(1, min(k, dim - len(vals)))
        theta, v = lanczos(lambda x: mat @ x, dim, need, locked=vecs, max_iter=max_iter, seed=12345 + run)
        # re-orthonormalize against locked space
        v = v - vecs @ (vecs.conj().T @ v)
        v, _ = np.linalg.qr(v)
        new_found = False
        for t, col in zip(theta, v.T):
            if len(vals) >= k and t > sorted(vals)[k - 1] + degeneracy_tol:
                break
            vals.append(float(t))
            vecs = np.column_stack([vecs, col])
            new_found = True
        if len(vals) >= k and not new_found:
            break
    order = np.argsort(vals, kind="stable")[:k]
    vals = np.asarray(vals)[order]
    vecs = vecs[:, order]
    # Rayleigh-Ritz on the collected space tidies near-degenerate mixing
    sub = vecs.conj().T @ (mat @ vecs)
    w, c = np.linalg.eigh((sub + sub.conj().T) / 2)
    return w, vecs @ c


def _check_residuals(mat, vals, vecs, scale=1e-10):
    res = np.linalg.norm(mat @ vecs - vecs * vals[None, :], axis=0)
    bad = res >= scale * np.maximum(1.0, np.abs(vals))
    if np.any(bad):
        raise NoConvergenceError(f"eigen-residuals too large: {res[bad]}", residuals=res)
    return res


def low_spectrum(
    H,
    basis: FockBasis,
    k: int | None = None,
    *,
    method: str = "auto",
    dense_cap: int = DENSE_CAP,
    degeneracy_tol: float = DEGENERACY_TOL,
    max_iter: int = 500,
) -> SpectrumResult:
    """``k`` lowest eigenpairs (all of them when ``k`` is None).

    ``method`` is "dense", "lanczos" or "auto" (dense up to ``dense_cap``).
    Every returned pair satisfies ``|Hv - Ev| < 1e-10 max(1, |E|)``.
    """
    mat = _hermitian_matrix(H, basis)
    dim = mat.shape[0]
    if dim < 1:
        raise ValueError("empty basis")
    k = dim if k is None else k
    if not 1 <= k <= dim:
        raise ValueError(f"k={k} outside 1..{dim}")
    if method == "auto":
        method = "dense" if dim <= dense_cap else "lanczos"
    if method == "dense":
        dense = mat.toarray() if sp.issparse(mat) else mat
        dtype = dense.dtype
        if not np.any(dense.imag):
            dense = dense.real
        # a few extra levels so the ground degeneracy is seen even for small k
        want = min(dim, k + 8)
        all_vals, all_vecs = la.eigh(dense, subset_by_index=[0, want - 1]) if want < dim else la.eigh(dense)
        if want < dim and all_vals[-1] <= all_vals[0] + degeneracy_tol:
            all_vals, all_vecs = la.eigh(dense)
        deg = int(np.sum(all_vals <= all_vals[0] + degeneracy_tol))
        vals, vecs = all_vals[:k], all_vecs[:, :k].astype(dtype)
    elif method == "lanczos":
        vals, vecs = _lanczos_spectrum(mat, k, degeneracy_tol, max_iter)
        deg = None
    else:
        raise ValueError(f"unknown method {method!r}")
    vecs = _fix_phase(vecs)
    _check_residuals(mat, vals, vecs)
    if deg is None:
        deg = int(np.sum(vals <= vals[0] + degeneracy_tol))
    return SpectrumResult(np.asarray(vals, dtype=float), vecs, basis, deg, degeneracy_tol, method)


def ground_state(
    H,
    basis: FockBasis,
    *,
    method: str = "auto",
    degeneracy_tol: float = DEGENERACY_TOL,
    tie_break: bool = False,
    dense_cap: int = DENSE_CAP,
) -> GroundState:
    """Lowest eigenpair.

    A degenerate ground level raises :class:`DegenerateGroundStateError`
    unless ``tie_break`` is set, in which case the ground-space projection
    of the lowest-index basis word it touches is returned and flagged.
    """
    dim = len(basis)
    probe = min(dim, 4)
    spec = low_spectrum(H, basis, probe, method=method, degeneracy_tol=degeneracy_tol, dense_cap=dense_cap)
    while spec.ground_degeneracy == len(spec) and len(spec) < dim:
        probe = min(dim, 2 * probe)
        spec = low_spectrum(H, basis, probe, method=method, degeneracy_tol=degeneracy_tol, dense_cap=dense_cap)
    deg = spec.ground_degeneracy
    if deg == 1:
        return GroundState(float(spec.eigenvalues[0]), spec.vector(0), 1)
    if not tie_break:
        raise DegenerateGroundStateError(
            f"degenerate ground state: {deg} levels within {degeneracy_tol} of {spec.eigenvalues[0]}"
        )
    P = spec.vectors[:, :deg]
    weight = np.sum(np.abs(P) ** 2, axis=1)
    i = int(np.argmax(weight > 1e-8))
    v = P @ P[i].conj()
    v = v / np.linalg.norm(v)
    return GroundState(float(np.mean(spec.eigenvalues[:deg])), FockVector(basis, _fix_phase(v[:, None])[:, 0]), deg, True)
