"""
Fermionic Fock space on bit-encoded occupation words.

Conventions shared by every module in the package:

* bit ``k`` of a word is set iff mode ``k`` is occupied (mode 0 is the
  rightmost bit);
* a ladder operator on mode ``k`` picks up the sign ``(-1)**n_<k`` where
  ``n_<k`` counts occupied modes with index strictly below ``k``;
* a term ``coef * f_1 f_2 ... f_r`` acts right to left (``f_r`` first).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

MAX_MODES = 20
MAX_DIMENSION = 1 << 20

Factor = tuple[int, bool]
Term = tuple[complex, tuple[Factor, ...]]
# (words, mode, dagger) -> (new_words, signs, alive)
LadderFn = Callable[[np.ndarray, int, bool], tuple[np.ndarray, np.ndarray, np.ndarray]]


class SectorError(ValueError):
    """Raised when an operator does not preserve the particle-number sector."""


def _popcount(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words.astype(np.uint64)).astype(np.int64)


def apply_ladder(word: int, mode: int, dagger: bool) -> tuple[int, int] | None:
    """Apply ``c_mode`` (or ``c_mode^dagger``) to a single occupation word.

    Returns ``None`` when the word is annihilated, otherwise the new word
    and the fermionic sign.

    >>> apply_ladder(0b0011, 1, False)
    (1, -1)
    """
    occupied = (word >> mode) & 1
    if occupied == int(dagger):
        return None
    below = bin(word & ((1 << mode) - 1)).count("1")
    return word ^ (1 << mode), -1 if below % 2 else 1


def ladder_array(words: np.ndarray, mode: int, dagger: bool):
    """Vectorized :func:`apply_ladder` over an array of words."""
    words = np.asarray(words, dtype=np.int64)
    bit = np.int64(1) << np.int64(mode)
    occupied = (words & bit) != 0
    alive = ~occupied if dagger else occupied
    below = _popcount(words & (bit - 1))
    signs = np.where(below % 2 == 1, -1.0, 1.0)
    return words ^ bit, signs, alive


@dataclass(frozen=True)
class FockBasis:
    """Canonically ordered occupation words for ``mode_count`` modes.

    ``sector=None`` means all particle numbers; otherwise only words with
    exactly ``sector`` set bits are kept.
    """

    mode_count: int
    sector: int | None = None
    states: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = self.mode_count
        if m < 0 or m > 62:
            raise ValueError(f"mode_count {m} outside the representable range")
        if self.sector is None:
            if m > MAX_MODES:
                raise ValueError(f"all-sector basis limited to {MAX_MODES} modes, got {m}")
            states = np.arange(1 << m, dtype=np.int64)
        else:
            if not 0 <= self.sector <= m:
                raise ValueError(f"sector {self.sector} impossible for {m} modes")
            states = np.array(
                sorted(sum(1 << k for k in occ) for occ in combinations(range(m), self.sector)),
                dtype=np.int64,
            )
        if states.size > MAX_DIMENSION:
            raise ValueError(f"basis dimension {states.size} exceeds cap {MAX_DIMENSION}")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)

    def __len__(self) -> int:
        return int(self.states.size)

    @property
    def dim(self) -> int:
        return len(self)

    def index(self, words) -> np.ndarray:
        """Positions of ``words`` in the basis, ``-1`` where absent."""
        words = np.atleast_1d(np.asarray(words, dtype=np.int64))
        if self.sector is None:
            idx = words.copy()
            idx[(words < 0) | (words >= len(self))] = -1
            return idx
        pos = np.searchsorted(self.states, words)
        pos = np.minimum(pos, len(self) - 1)
        return np.where(self.states[pos] == words, pos, -1)

    def occupations(self) -> np.ndarray:
        """(dim, M) 0/1 array of mode occupations."""
        k = np.arange(self.mode_count, dtype=np.int64)
        return ((self.states[:, None] >> k[None, :]) & 1).astype(float)

    def basis_vector(self, word: int) -> "FockVector":
        i = int(self.index(word)[0])
        if i < 0:
            raise ValueError(f"word {word:#b} not in basis")
        amp = np.zeros(len(self), dtype=complex)
        amp[i] = 1.0
        return FockVector(self, amp)

    def random_vector(self, rng: np.random.Generator) -> "FockVector":
        amp = rng.normal(size=len(self)) + 1j * rng.normal(size=len(self))
        return FockVector(self, amp / np.linalg.norm(amp))


@dataclass(frozen=True)
class FockVector:
    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (len(self.basis),):
            raise ValueError(f"amplitude shape {amp.shape} does not match basis size {len(self.basis)}")
        if not np.all(np.isfinite(amp)):
            raise ValueError("non-finite amplitudes")
        object.__setattr__(self, "amplitudes", amp)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(self.norm - 1.0) < tol

    def normalized(self) -> "FockVector":
        n = self.norm
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return FockVector(self.basis, self.amplitudes / n)

    def vdot(self, other: "FockVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _canon_terms(terms: Iterable) -> tuple[Term, ...]:
    merged: dict[tuple[Factor, ...], complex] = {}
    for coef, factors in terms:
        key = tuple((int(m), bool(d)) for m, d in factors)
        merged[key] = merged.get(key, 0.0) + complex(coef)
    return tuple((c, f) for f, c in merged.items() if c != 0)


class SecondQuantizedOperator:
    """Linear combination of products of fermionic ladder operators.

    Each term is ``(coefficient, ((mode, dagger), ...))`` with factors in
    written order. Supports ``+``, ``-``, scalar and operator ``*`` and
    :meth:`adjoint`. ``hermitian`` is an assertion checked on
    materialization, not inferred.
    """

    __slots__ = ("terms", "hermitian")

    def __init__(self, terms: Iterable = (), hermitian: bool = False):
        self.terms = _canon_terms(terms)
        self.hermitian = bool(hermitian)

    def __repr__(self):
        return f"SecondQuantizedOperator({len(self.terms)} terms, hermitian={self.hermitian})"

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = identity(other)
        return SecondQuantizedOperator(self.terms + other.terms, self.hermitian and other.hermitian)

    __radd__ = __add__

    def __neg__(self):
        return SecondQuantizedOperator(((-c, f) for c, f in self.terms), self.hermitian)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            herm = self.hermitian and complex(other).imag == 0
            return SecondQuantizedOperator(((c * other, f) for c, f in self.terms), herm)
        if isinstance(other, SecondQuantizedOperator):
            return SecondQuantizedOperator(
                (c1 * c2, f1 + f2) for c1, f1 in self.terms for c2, f2 in other.terms
            )
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def adjoint(self) -> "SecondQuantizedOperator":
        return SecondQuantizedOperator(
            ((np.conj(c), tuple((m, not d) for m, d in reversed(f))) for c, f in self.terms),
            self.hermitian,
        )

    def as_hermitian(self) -> "SecondQuantizedOperator":
        """Same terms, flagged hermitian (checked when materialized)."""
        return SecondQuantizedOperator(self.terms, hermitian=True)

    def max_mode(self) -> int:
        return max((m for _, f in self.terms for m, _ in f), default=-1)

    def conserves_number(self) -> bool:
        return all(sum(1 if d else -1 for _, d in f) == 0 for _, f in self.terms)


def identity(coef: complex = 1.0) -> SecondQuantizedOperator:
    return SecondQuantizedOperator([(coef, ())], hermitian=complex(coef).imag == 0)


def cdag(i: int) -> SecondQuantizedOperator:
    return SecondQuantizedOperator([(1.0, ((i, True),))])


def c(i: int) -> SecondQuantizedOperator:
    return SecondQuantizedOperator([(1.0, ((i, False),))])


def number(i: int) -> SecondQuantizedOperator:
    return SecondQuantizedOperator([(1.0, ((i, True), (i, False)))], hermitian=True)


def total_number(mode_count: int) -> SecondQuantizedOperator:
    return SecondQuantizedOperator(
        ((1.0, ((i, True), (i, False))) for i in range(mode_count)), hermitian=True
    )


def quadratic_form(h: np.ndarray, tol: float = 0.0) -> SecondQuantizedOperator:
    """sum_ij h_ij c_i^dagger c_j."""
    h = np.asarray(h)
    terms = [
        (h[i, j], ((i, True), (j, False)))
        for i in range(h.shape[0])
        for j in range(h.shape[1])
        if abs(h[i, j]) > tol
    ]
    return SecondQuantizedOperator(terms, hermitian=np.allclose(h, h.conj().T, atol=1e-12))


def pairing_form(delta: np.ndarray, tol: float = 0.0) -> SecondQuantizedOperator:
    """sum_{i<j} delta_ij c_i^dagger c_j^dagger + h.c. for antisymmetric ``delta``."""
    delta = np.asarray(delta)
    terms = []
    for i in range(delta.shape[0]):
        for j in range(i + 1, delta.shape[0]):
            d = delta[i, j]
            if abs(d) > tol:
                terms.append((d, ((i, True), (j, True))))
                terms.append((np.conj(d), ((j, False), (i, False))))
    return SecondQuantizedOperator(terms, hermitian=True)


def mode_operator(column: np.ndarray, dagger: bool, tol: float = 0.0) -> SecondQuantizedOperator:
    """Rotated ladder operator: ``psi^dagger = sum_x u_x c_x^dagger``, ``psi`` its adjoint."""
    column = np.asarray(column)
    if dagger:
        terms = ((column[x], ((x, True),)) for x in range(column.size) if abs(column[x]) > tol)
    else:
        terms = ((np.conj(column[x]), ((x, False),)) for x in range(column.size) if abs(column[x]) > tol)
    return SecondQuantizedOperator(terms)


def _term_action(factors: Sequence[Factor], words: np.ndarray, ladder: LadderFn):
    out = words
    sign = np.ones(words.size)
    alive = np.ones(words.size, dtype=bool)
    for mode, dagger in reversed(factors):
        out, s, a = ladder(out, mode, dagger)
        sign = sign * s
        alive &= a
    return out, sign, alive


def _check_compatible(op: SecondQuantizedOperator, basis: FockBasis):
    if op.max_mode() >= basis.mode_count:
        raise ValueError(f"operator acts on mode {op.max_mode()} but basis has {basis.mode_count} modes")
    if basis.sector is not None and not op.conserves_number():
        raise SectorError("operator leaves sector")


def materialize(
    op: SecondQuantizedOperator,
    basis: FockBasis,
    *,
    sparse: bool = True,
    max_dimension: int = MAX_DIMENSION,
    ladder: LadderFn = ladder_array,
    check_hermitian: bool = True,
):
    """Matrix with entries ``<basis_r| op |basis_c>``.

    Returns a CSR matrix (only structural nonzeros stored) or a dense
    ndarray. ``ladder`` can be swapped for testing alternative algebras.
    """
    if len(basis) > max_dimension:
        raise ValueError(f"dimension {len(basis)} exceeds cap {max_dimension}")
    _check_compatible(op, basis)
    words = basis.states
    rows, cols, vals = [], [], []
    src = np.arange(len(basis))
    for coef, factors in op.terms:
        out, sign, alive = _term_action(factors, words, ladder)
        idx = basis.index(out[alive])
        if np.any(idx < 0):
            raise SectorError("operator leaves sector")
        rows.append(idx)
        cols.append(src[alive])
        vals.append(coef * sign[alive])
    n = len(basis)
    if rows:
        mat = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n),
            dtype=complex,
        ).tocsr()
    else:
        mat = sp.csr_matrix((n, n), dtype=complex)
    mat.sum_duplicates()
    mat.eliminate_zeros()
    if check_hermitian and op.hermitian:
        diff = abs(mat - mat.conj().T)
        if diff.nnz and diff.max() > 1e-12:
            raise ValueError("operator flagged hermitian but matrix is not")
    return mat if sparse else mat.toarray()


def apply_operator(op: SecondQuantizedOperator, v: FockVector, *, ladder: LadderFn = ladder_array) -> FockVector:
    """Linear action of ``op`` on ``v`` without forming a matrix."""
    basis = v.basis
    _check_compatible(op, basis)
    result = np.zeros(len(basis), dtype=complex)
    for coef, factors in op.terms:
        out, sign, alive = _term_action(factors, basis.states, ladder)
        idx = basis.index(out[alive])
        if np.any(idx < 0):
            raise SectorError("operator leaves sector")
        np.add.at(result, idx, coef * sign[alive] * v.amplitudes[alive])
    return FockVector(basis, result)


def expectation(op: SecondQuantizedOperator, v: FockVector, tol: float = 1e-12) -> complex:
    """``<v|op|v>`` for a normalized ``v``."""
    if not v.is_normalized(tol):
        raise ValueError(f"state not normalized (norm = {v.norm!r})")
    val = v.vdot(apply_operator(op, v))
    if op.hermitian and abs(val.imag) > tol * max(1.0, abs(val.real)):
        raise ValueError(f"hermitian operator has complex expectation {val}")
    return val


@dataclass
class SelfTestReport:
    mode_count: int
    max_error: float
    failures: list[str]

    @property
    def passed(self) -> bool:
        return not self.failures


def algebra_selftest(
    mode_count: int,
    *,
    rng: np.random.Generator | None = None,
    ladder: LadderFn = ladder_array,
    tol: float = 1e-12,
    n_vectors: int = 2,
) -> SelfTestReport:
    """Check ``{c_i, c_j^dagger} = delta_ij``, ``{c_i, c_j} = 0``, ``c_i^2 = 0``
    on random vectors of the full Fock space."""
    rng = rng or np.random.default_rng(0)
    basis = FockBasis(mode_count)
    ann = [materialize(c(i), basis, ladder=ladder) for i in range(mode_count)]
    cre = [a.conj().T.tocsr() for a in ann]
    worst = 0.0
    failures = []
    for _ in range(n_vectors):
        v = basis.random_vector(rng).amplitudes
        for i in range(mode_count):
            err = np.linalg.norm(ann[i] @ (ann[i] @ v))
            worst = max(worst, err)
            if err > tol:
                failures.append(f"c_{i}^2 != 0 (err {err:.2e})")
            for j in range(mode_count):
                mixed = ann[i] @ (cre[j] @ v) + cre[j] @ (ann[i] @ v)
                if i == j:
                    mixed = mixed - v
                err = np.linalg.norm(mixed)
                worst = max(worst, err)
                if err > tol:
                    failures.append(f"{{c_{i}, c_{j}^+}} wrong (err {err:.2e})")
                if i != j:
                    err = np.linalg.norm(ann[i] @ (ann[j] @ v) + ann[j] @ (ann[i] @ v))
                    worst = max(worst, err)
                    if err > tol:
                        failures.append(f"{{c_{i}, c_{j}}} != 0 (err {err:.2e})")
    return SelfTestReport(mode_count, worst, sorted(set(failures)))


def bosonic_sign_ladder(words: np.ndarray, mode: int, dagger: bool):
    """Hard-core ladder without the fermionic string; for mutation tests only."""
    new, _, alive = ladder_array(words, mode, dagger)
    return new, np.ones(new.size), alive
