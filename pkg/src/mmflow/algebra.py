"""Compact group representations on complex vector spaces.

A :class:`Representation` is either a torus acting diagonally through integer
weights or a matrix Lie algebra spanned by skew-Hermitian matrices.  Elements of
the Lie algebra ("Lie vectors") are plain real numpy arrays holding coordinates
in the chosen basis; the only duality ever used is the inner product stored on
the representation.

Sign convention, fixed once for the whole package: the infinitesimal action is
``sigma_x(xi) = -rho(xi) x``, the velocity of ``exp(-t xi) . x`` at ``t = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import linalg

from .errors import (
    DimensionMismatch,
    EmptyWeights,
    InputError,
    NotClosedUnderBracket,
    NotSkewHermitian,
    NotSubalgebra,
    Overflow,
)

TORUS = "torus"
MATRIX_LIE = "matrix_lie"

MAX_WEIGHT = 10**6
SKEW_TOL = 1e-12
BRACKET_TOL = 1e-10
COMMUTE_TOL = 1e-10
OVERFLOW_LIMIT = 1e100
DEFAULT_STABILIZER_TOL = 1e-8


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    # floats coming from -Tr of rational-scaled matrices; recover the rational
    return Fraction(float(value)).limit_denominator(10**9)


@dataclass(frozen=True, eq=False)
class Representation:
    """A compact group acting linearly and unitarily on ``C^d``.

    Attributes
    ----------
    dim : int
        Ambient complex dimension ``d``.
    kind : str
        ``"torus"`` or ``"matrix_lie"``.
    basis : ndarray, shape (m, d, d)
        Skew-Hermitian matrices ``rho(e_1), ..., rho(e_m)``.  For the torus
        kind, ``rho(e_a) = diag(i W[:, a])``.
    inner_product : tuple of tuple of Fraction
        Exact rational Gram matrix of the inner product on the Lie algebra.
    weights : ndarray of int, shape (d, r), or None
        Torus weights (row ``i`` is the weight of coordinate ``i``).
    """

    dim: int
    kind: str
    basis: np.ndarray
    inner_product: tuple
    weights: np.ndarray | None = None
    gram: np.ndarray = field(init=False, repr=False)
    gram_inv: np.ndarray = field(init=False, repr=False)
    structure_constants: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        gram = np.array([[float(v) for v in row] for row in self.inner_product])
        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "gram_inv", np.linalg.inv(gram))
        m = self.rank
        if self.kind == TORUS:
            c = np.zeros((m, m, m))
        else:
            c = np.zeros((m, m, m))
            for a in range(m):
                for b in range(a + 1, m):
                    br = _commutator(self.basis[a], self.basis[b])
                    coords, _ = self._coords_of_matrix(br)
                    c[a, b] = coords
                    c[b, a] = -coords
        object.__setattr__(self, "structure_constants", c)
        for arr in (self.basis, self.gram, self.gram_inv, c):
            arr.flags.writeable = False
        if self.weights is not None:
            self.weights.flags.writeable = False

    @property
    def rank(self) -> int:
        """Dimension ``m`` of the Lie algebra."""
        return self.basis.shape[0]

    def _coords_of_matrix(self, mat: np.ndarray) -> tuple[np.ndarray, float]:
        flat = _real_flatten(self.basis)
        target = np.concatenate([mat.real.ravel(), mat.imag.ravel()])
        coords, *_ = np.linalg.lstsq(flat, target, rcond=None)
        residual = float(np.linalg.norm(flat @ coords - target))
        return coords, residual

    def rho(self, xi) -> np.ndarray:
        """Matrix ``rho(xi)`` of a Lie vector."""
        xi = self.check_lie_vector(xi)
        return np.tensordot(xi, self.basis, axes=1)

    def pair(self, xi, eta) -> float:
        """Inner product ``<xi, eta>`` on the Lie algebra."""
        return float(np.asarray(xi, float) @ self.gram @ np.asarray(eta, float))

    def norm(self, xi) -> float:
        return float(np.sqrt(max(self.pair(xi, xi), 0.0)))

    def bracket(self, xi, eta) -> np.ndarray:
        """Lie bracket in basis coordinates, ``[xi, eta]``."""
        xi = self.check_lie_vector(xi)
        eta = self.check_lie_vector(eta)
        return np.einsum("a,b,abc->c", xi, eta, self.structure_constants)

    def check_lie_vector(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float).reshape(-1)
        if xi.shape[0] != self.rank:
            raise DimensionMismatch(
                f"Lie vector has {xi.shape[0]} coordinates, algebra has rank {self.rank}"
            )
        return xi

    def check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex).reshape(-1)
        if x.shape[0] != self.dim:
            raise DimensionMismatch(f"point has dimension {x.shape[0]}, expected {self.dim}")
        return x


def _commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def _real_flatten(basis: np.ndarray) -> np.ndarray:
    m = basis.shape[0]
    re = basis.real.reshape(m, -1).T
    im = basis.imag.reshape(m, -1).T
    return np.vstack([re, im])


def _exact_gram(matrix, m: int) -> tuple:
    rows = [tuple(_as_fraction(v) for v in row) for row in matrix]
    if len(rows) != m or any(len(r) != m for r in rows):
        raise InputError(f"inner product must be {m}x{m}")
    for a in range(m):
        for b in range(a):
            if rows[a][b] != rows[b][a]:
                raise InputError("inner product is not symmetric")
    if np.any(np.linalg.eigvalsh(np.array(rows, dtype=float)) <= 0):
        raise InputError("inner product is not positive definite")
    return tuple(rows)


def make_torus_rep(rank: int, weights, inner_product=None) -> Representation:
    """Torus ``T^r`` acting on ``C^d`` with integer weights.

    Parameters
    ----------
    rank : int
        Torus rank ``r``.
    weights : array_like of int, shape (d, r)
        Row ``i`` is the weight of the ``i``-th coordinate.
    inner_product : array_like, optional
        Rational Gram matrix; defaults to the identity.

    Examples
    --------
    >>> rep = make_torus_rep(1, [[1], [-1]])
    >>> rep.rho([1.0]).diagonal()
    array([0.+1.j, 0.-1.j])
    """
    if rank < 1:
        raise EmptyWeights("torus rank must be positive")
    w = np.asarray(weights, dtype=object)
    if w.size == 0:
        raise EmptyWeights("no weights given")
    if w.ndim == 1:
        w = w.reshape(-1, 1) if rank == 1 else w.reshape(1, -1)
    if w.ndim != 2 or w.shape[1] != rank:
        raise DimensionMismatch(f"weights must have shape (d, {rank}), got {w.shape}")
    for v in w.ravel():
        if isinstance(v, (bool, np.bool_)) or int(v) != v:
            raise InputError(f"torus weights must be integers, got {v!r}")
    w = w.astype(np.int64)
    if np.abs(w).max() > MAX_WEIGHT:
        raise InputError(f"weights exceed {MAX_WEIGHT} in absolute value")
    d = w.shape[0]
    basis = np.zeros((rank, d, d), dtype=complex)
    for a in range(rank):
        basis[a] = np.diag(1j * w[:, a])
    if inner_product is None:
        inner_product = np.eye(rank, dtype=int)
    gram = _exact_gram(inner_product, rank)
    return Representation(dim=d, kind=TORUS, basis=basis, inner_product=gram, weights=w)


def make_matrix_rep(basis: Sequence, inner_product=None) -> Representation:
    """Matrix Lie algebra spanned by skew-Hermitian ``d x d`` matrices.

    The default inner product is ``-Tr(xi_a xi_b)``, which is Ad-invariant.  A
    custom inner product must also be Ad-invariant; this is checked.
    """
    if len(basis) == 0:
        raise EmptyWeights("empty basis")
    mats = np.array([np.asarray(b, dtype=complex) for b in basis])
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise DimensionMismatch("basis matrices must all be square of equal size")
    m, d, _ = mats.shape
    for a in range(m):
        size = np.linalg.norm(mats[a])
        if size == 0:
            raise InputError(f"basis element {a} is zero")
        if np.linalg.norm(mats[a] + mats[a].conj().T) > SKEW_TOL * size:
            raise NotSkewHermitian(f"basis element {a} is not skew-Hermitian")
    flat = _real_flatten(mats)
    if np.linalg.matrix_rank(flat, tol=1e-10 * np.linalg.norm(flat)) < m:
        raise InputError("basis matrices are linearly dependent")
    for a in range(m):
        for b in range(a + 1, m):
            br = _commutator(mats[a], mats[b])
            target = np.concatenate([br.real.ravel(), br.imag.ravel()])
            coords, *_ = np.linalg.lstsq(flat, target, rcond=None)
            residual = float(np.linalg.norm(flat @ coords - target))
            scale = max(1.0, np.linalg.norm(mats[a]) * np.linalg.norm(mats[b]))
            if residual > BRACKET_TOL * scale:
                raise NotClosedUnderBracket((a, b), residual)
    if inner_product is None:
        inner_product = [
            [-np.trace(mats[a] @ mats[b]).real for b in range(m)] for a in range(m)
        ]
    gram = _exact_gram(inner_product, m)
    rep = Representation(dim=d, kind=MATRIX_LIE, basis=mats, inner_product=gram)
    _check_ad_invariant(rep)
    return rep


def _check_ad_invariant(rep: Representation) -> None:
    c = rep.structure_constants
    g = rep.gram
    # <[e_c, e_a], e_b> + <e_a, [e_c, e_b]> = 0
    t = np.einsum("cak,kb->cab", c, g)
    defect = t + t.transpose(0, 2, 1)
    if np.abs(defect).max() > 1e-9 * max(1.0, np.abs(g).max()):
        raise InputError("inner product is not Ad-invariant")


def infinitesimal_action(rep: Representation, xi, x) -> np.ndarray:
    """Tangent vector ``sigma_x(xi) = -rho(xi) x``.

    >>> rep = make_torus_rep(1, [[2], [3]])
    >>> infinitesimal_action(rep, [1.0], [1, 1])
    array([0.-2.j, 0.-3.j])
    """
    x = rep.check_point(x)
    if rep.kind == TORUS:
        return -1j * (rep.weights @ rep.check_lie_vector(xi)) * x
    return -(rep.rho(xi) @ x)


def group_action(rep: Representation, xi, t: float, x) -> np.ndarray:
    """Apply ``exp(-t rho(xi))`` to ``x``.  Norm preserving."""
    x = rep.check_point(x)
    xi = rep.check_lie_vector(xi)
    if rep.kind == TORUS:
        return np.exp(-1j * t * (rep.weights @ xi)) * x
    return linalg.expm(-t * rep.rho(xi)) @ x


def complexified_action(rep: Representation, xi, t: float, x) -> np.ndarray:
    """Apply ``exp(-i t rho(xi))`` to ``x``.

    ``-i rho(xi)`` is Hermitian, so the exponential is real-diagonalisable; for
    the torus coordinate ``i`` is scaled by ``exp(t * w_i . xi)``.

    Raises
    ------
    Overflow
        If any coordinate magnitude exceeds ``1e100``.  This signals that
        ``xi`` pushes ``x`` off to infinity rather than to a limit.
    """
    x = rep.check_point(x)
    xi = rep.check_lie_vector(xi)
    if rep.kind == TORUS:
        expo = t * (rep.weights @ xi).astype(float)
        mags = np.abs(x)
        with np.errstate(over="ignore", divide="ignore"):
            logmag = np.where(mags > 0, np.log(np.where(mags > 0, mags, 1.0)) + expo, -np.inf)
        if np.any(logmag > np.log(OVERFLOW_LIMIT)):
            raise Overflow(f"complexified action overflows at t={t}")
        with np.errstate(under="ignore"):
            return np.exp(expo) * x
    herm = -1j * rep.rho(xi)
    herm = 0.5 * (herm + herm.conj().T)
    evals, evecs = np.linalg.eigh(herm)
    coeff = evecs.conj().T @ x
    expo = t * evals
    mags = np.abs(coeff)
    live = mags > 0
    if np.any(np.log(mags[live]) + expo[live] > np.log(OVERFLOW_LIMIT)):
        raise Overflow(f"complexified action overflows at t={t}")
    with np.errstate(under="ignore"):
        out = evecs @ (np.exp(expo) * coeff)
    if np.any(np.abs(out) > OVERFLOW_LIMIT):
        raise Overflow(f"complexified action overflows at t={t}")
    return out


def stabilizer_algebra(rep: Representation, x, tol: float = DEFAULT_STABILIZER_TOL) -> list[np.ndarray]:
    """Orthonormal basis of ``k_x = {xi : rho(xi) x = 0}``.

    Singular values of the stacked map ``xi -> rho(xi) x`` at or below
    ``tol * (sigma_max + |x|)`` count as zero.  Orthonormality is with respect
    to the representation's inner product.
    """
    if tol <= 0:
        raise InputError("tol must be positive")
    x = rep.check_point(x)
    cols = np.einsum("aij,j->ia", rep.basis, x)
    stacked = np.vstack([cols.real, cols.imag])
    # whiten so that Euclidean orthonormality of eta equals G-orthonormality of xi
    chol = np.linalg.cholesky(rep.gram)
    to_xi = np.linalg.inv(chol.T)
    mapped = stacked @ to_xi
    _, s, vt = np.linalg.svd(mapped)
    m = rep.rank
    sv = np.zeros(m)
    sv[: len(s)] = s
    thresh = tol * (sv.max(initial=0.0) + np.linalg.norm(x))
    null = [vt[k] for k in range(m) if sv[k] <= thresh]
    return [to_xi @ eta for eta in null]


def maximal_torus_in(vectors: Sequence, rep: Representation) -> list[np.ndarray]:
    """Greedy maximal commuting subset of ``vectors``, in input order.

    The input must span a subalgebra.  The selection is order dependent and
    that order is part of the contract.
    """
    vecs = [rep.check_lie_vector(v) for v in vectors]
    if not vecs:
        return []
    if rep.kind == TORUS:
        return vecs
    span = np.array(vecs).T
    for a in range(len(vecs)):
        for b in range(a + 1, len(vecs)):
            br = rep.bracket(vecs[a], vecs[b])
            coef, *_ = np.linalg.lstsq(span, br, rcond=None)
            scale = max(1.0, np.linalg.norm(vecs[a]) * np.linalg.norm(vecs[b]))
            if np.linalg.norm(span @ coef - br) > BRACKET_TOL * scale:
                raise NotSubalgebra(f"bracket of vectors {a} and {b} leaves their span")
    chosen: list[np.ndarray] = []
    for v in vecs:
        if all(np.linalg.norm(rep.bracket(v, u)) <= COMMUTE_TOL for u in chosen):
            chosen.append(v)
    return chosen


def orthonormalize(rep: Representation, vectors: Sequence) -> list[np.ndarray]:
    """Gram-Schmidt with respect to the inner product; drops dependent vectors."""
    out: list[np.ndarray] = []
    for v in vectors:
        w = rep.check_lie_vector(v).copy()
        for u in out:
            w = w - rep.pair(u, w) * u
        n = rep.norm(w)
        if n > 1e-12 * max(1.0, rep.norm(v)):
            out.append(w / n)
    return out


def su2_basis() -> list[np.ndarray]:
    """``{i sigma_x, i sigma_y, i sigma_z} / 2``: brackets close with unit constants."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    return [0.5j * s for s in (sx, sy, sz)]
