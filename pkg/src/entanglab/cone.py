"""
Generalized entanglement of a state functional inside a cone of designated
pure functionals: the minimal Shannon entropy over all convex decompositions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

FEASIBILITY_TOL = 1e-9
TIE_TOL = 1e-12


@dataclass(frozen=True)
class StateFunctional:
    """Expectation values ``(lambda(A_0), lambda(A_1), ...)`` with ``lambda(A_0) = 1``."""

    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        if not np.all(np.isfinite(v)):
            raise ValueError(f"non-finite functional values in {self.label!r}")
        if abs(v[0] - 1.0) > 1e-10:
            raise ValueError(f"functional {self.label!r} not normalized: lambda(A_0) = {v[0]}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __getitem__(self, i):
        return self.values[i]

    @property
    def dim(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class ConeSpec:
    pure: tuple[StateFunctional, ...]

    def __post_init__(self):
        pure = tuple(p if isinstance(p, StateFunctional) else StateFunctional(p) for p in self.pure)
        if not pure:
            raise ValueError("cone needs at least one pure functional")
        if len({p.dim for p in pure}) != 1:
            raise ValueError("pure functionals have different dimensions")
        object.__setattr__(self, "pure", pure)

    def matrix(self) -> np.ndarray:
        return np.column_stack([p.values for p in self.pure])

    def deduplicated(self, tol: float = 1e-10) -> tuple["ConeSpec", list[int]]:
        """Drop repeated pure functionals; returns the kept original indices."""
        keep: list[int] = []
        for i, p in enumerate(self.pure):
            if all(np.max(np.abs(p.values - self.pure[j].values)) > tol for j in keep):
                keep.append(i)
        return ConeSpec(tuple(self.pure[i] for i in keep)), keep


@dataclass
class EntanglementReport:
    entanglement: float | None
    weights: np.ndarray | None
    support: tuple[int, ...] = ()
    unique: bool = True
    alpha: float | None = None
    status: str = "ok"  # ok | target_pure | infeasible | negative_alpha
    candidates: list = field(default_factory=list, repr=False)


def shannon_entropy(weights: Sequence[float]) -> float:
    """``-sum p ln p`` in nats with ``0 ln 0 = 0``."""
    p = np.asarray(weights, dtype=float)
    if np.any(p < -1e-12):
        raise ValueError("negative weight")
    if abs(p.sum() - 1.0) > 1e-10:
        raise ValueError(f"weights sum to {p.sum()!r}, not 1")
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def e1_closed_form(alpha: float) -> float:
    """Entropy of the two-state decomposition with weights ``1/(1+a), a/(1+a)``."""
    if alpha < 0:
        raise ValueError("alpha outside closed-form domain (alpha < 0)")
    if alpha == 0:
        return 0.0
    if math.isinf(alpha):
        return 0.0
    p = 1.0 / (1.0 + alpha)
    q = alpha / (1.0 + alpha)
    return -q * math.log(q) - p * math.log(p)


def decompose_unique(lam_g: StateFunctional, lam0: StateFunctional, lam1: StateFunctional,
                     tol: float = 1e-10) -> EntanglementReport:
    """Split ``lam_g = (lam0 + alpha lam1)/(1 + alpha)`` using the ``A_1`` row.

    Requires ``lam1(A_1) = 0``. A negative ``alpha`` is reported with status
    ``negative_alpha`` and no weights.
    """
    g1 = float(lam_g[1])
    if g1 <= 0:
        raise ValueError("unnormalizable decomposition: lambda_g(A_1) <= 0")
    if abs(lam1[1]) > tol:
        raise ValueError(f"contract violation: lambda_1(A_1) = {lam1[1]!r} != 0")
    alpha = float(lam0[1]) / g1 - 1.0
    if alpha < 0:
        return EntanglementReport(None, None, alpha=alpha, status="negative_alpha")
    w = np.array([1.0 / (1.0 + alpha), alpha / (1.0 + alpha)])
    support = tuple(i for i in range(2) if w[i] > 0)
    return EntanglementReport(e1_closed_form(alpha), w, support, True, alpha,
                              "target_pure" if alpha == 0 else "ok")


def _basic_solutions(A: np.ndarray, t: np.ndarray, tol: float):
    """All feasible basic solutions of ``A p = t, p >= 0``."""
    d, m = A.shape
    rank = np.linalg.matrix_rank(A)
    for size in range(1, min(rank, m) + 1):
        for support in combinations(range(m), size):
            sub = A[:, support]
            if np.linalg.matrix_rank(sub) < size:
                continue
            x, *_ = np.linalg.lstsq(sub, t, rcond=None)
            if np.max(np.abs(sub @ x - t)) > tol:
                continue
            if np.any(x < -tol):
                continue
            x = np.clip(x, 0.0, None)
            x = x / x.sum()
            p = np.zeros(m)
            p[list(support)] = x
            yield support, p


def entanglement_general(target: StateFunctional, cone: ConeSpec,
                         tol: float = FEASIBILITY_TOL) -> EntanglementReport:
    """Minimal entropy decomposition of ``target`` over ``cone.pure``.

    Entropy is concave, so the minimum over the decomposition polytope sits
    on a vertex; vertices are the feasible basic solutions, enumerated
    exhaustively.
    """
    if not isinstance(target, StateFunctional):
        target = StateFunctional(target)
    if target.dim != cone.pure[0].dim:
        raise ValueError("target and cone dimensions differ")
    A = cone.matrix()
    t = target.values
    best = None
    candidates = []
    for support, p in _basic_solutions(A, t, tol):
        s = shannon_entropy(p)
        candidates.append((s, support, p))
        if best is None or s < best[0] - TIE_TOL:
            best = (s, support, p)
    if best is None:
        return EntanglementReport(None, None, status="infeasible")
    s, support, p = best
    ties = {tuple(np.round(c[2], 9)) for c in candidates if abs(c[0] - s) <= TIE_TOL}
    # deterministic tie break: lexicographically smallest support
    tied = sorted((c for c in candidates if abs(c[0] - s) <= TIE_TOL), key=lambda c: c[1])
    s, _, p = tied[0]
    support = tuple(int(i) for i in np.nonzero(p > 0)[0])
    status = "target_pure" if len(support) == 1 else "ok"
    return EntanglementReport(s, p, tuple(support), len(ties) == 1, None, status, candidates)


def purity_check(lam: StateFunctional, cone: ConeSpec, tol: float = 1e-10) -> bool:
    """True iff ``lam`` equals a pure element or admits only the trivial
    decomposition over the (deduplicated) pure set."""
    if not isinstance(lam, StateFunctional):
        lam = StateFunctional(lam)
    dedup, _ = cone.deduplicated(tol)
    for p in dedup.pure:
        if np.max(np.abs(p.values - lam.values)) <= tol:
            return True
    sols = list(_basic_solutions(dedup.matrix(), lam.values, max(tol, 1e-12)))
    return len(sols) == 1 and np.count_nonzero(sols[0][1] > tol) == 1


def grid_search_minimum(target: StateFunctional, cone: ConeSpec, step: float = 1e-3,
                        tol: float = 1e-12) -> float | None:
    """Brute-force oracle: scan the decomposition polytope on a grid.

    Pick ``d`` linearly independent columns as dependent variables, grid the
    remaining ``m - d`` weights on ``[0, 1]`` with spacing ``step`` and solve
    for the rest. Intended for ``m - d <= 2``.
    """
    if not isinstance(target, StateFunctional):
        target = StateFunctional(target)
    A = cone.matrix()
    t = target.values
    d, m = A.shape
    basis_cols = None
    for cols in combinations(range(m), d):
        if abs(np.linalg.det(A[:, cols])) > 1e-10:
            basis_cols = list(cols)
            break
    if basis_cols is None:
        raise ValueError("cone matrix is rank deficient")
    free = [j for j in range(m) if j not in basis_cols]
    if len(free) > 2:
        raise ValueError("grid oracle limited to two free weights")
    Binv = np.linalg.inv(A[:, basis_cols])
    n = int(round(1.0 / step)) + 1
    axis = np.linspace(0.0, 1.0, n)
    if free:
        mesh = np.meshgrid(*([axis] * len(free)), indexing="ij")
        pf = np.stack([g.ravel() for g in mesh], axis=1)
    else:
        pf = np.zeros((1, 0))
    pb = (Binv @ (t[:, None] - A[:, free] @ pf.T)).T
    ok = np.all(pb >= -tol, axis=1)
    if not np.any(ok):
        return None
    P = np.concatenate([pb[ok], pf[ok]], axis=1)
    P = np.clip(P, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = -np.sum(np.where(P > 0, P * np.log(P), 0.0), axis=1)
    return float(ent.min())
