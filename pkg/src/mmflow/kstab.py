"""Donaldson-Futaki invariants from Hilbert and weight polynomials.

Test-configuration data enters as exact samples ``(j, dim H^0)`` and
``(j, w_j)``; the leading coefficients are recovered by exact interpolation.
For linear ``C^*``-actions on ``P^d`` a brute-force monomial count supplies
the samples.  Fibration degenerations enter as float samples of ``DF`` at
several ``k`` and are fitted to ``W0 + W1 / k + c / k^2``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EnumerationBoundExceeded,
    IllConditioned,
    InputError,
    InsufficientSamples,
    NonpositiveLeadingCoefficient,
    NotPolynomial,
)

ORACLE_MAX_DIM = 4
ORACLE_MAX_DEGREE = 30
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class ExpansionData:
    samples: tuple
    degree: int

    def __post_init__(self):
        pts = tuple((int(j), Fraction(v)) for j, v in self.samples)
        if len({j for j, _ in pts}) != len(pts):
            raise InputError("sample indices must be distinct")
        if any(j < 1 for j, _ in pts):
            raise InputError("sample indices must be positive")
        if self.degree < 1:
            raise InputError("degree must be positive")
        object.__setattr__(self, "samples", tuple(sorted(pts)))


@dataclass(frozen=True)
class DFResult:
    df: Fraction
    coefficients: tuple  # (a0, a1, b0, b1)


@dataclass(frozen=True)
class AdiabaticResult:
    W0: float
    W1: float
    residual: float
    c2: float = 0.0


def _solve_exact(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(b)
    aug = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


def fit_expansion(data: ExpansionData, top_degree: int) -> tuple:
    """Exact interpolating polynomial, leading coefficient first.

    The first ``top_degree + 1`` samples fix the polynomial; every further
    sample is a holdout that must agree exactly.

    >>> fit_expansion(ExpansionData(((1, 2), (2, 3), (3, 4)), 1), 1)
    (Fraction(1, 1), Fraction(1, 1))
    """
    pts = data.samples
    need = top_degree + 1
    if len(pts) < need:
        raise InsufficientSamples(f"need {need} samples for degree {top_degree}, got {len(pts)}")
    fit, holdout = pts[:need], pts[need:]
    vander = [[Fraction(j) ** (top_degree - p) for p in range(need)] for j, _ in fit]
    coeffs = _solve_exact(vander, [v for _, v in fit])
    for j, v in holdout:
        pred = sum(c * Fraction(j) ** (top_degree - p) for p, c in enumerate(coeffs))
        if pred != v:
            raise NotPolynomial(f"holdout sample j={j} disagrees with the degree-{top_degree} fit")
    return tuple(coeffs)


def df_invariant(a0, a1, b0, b1) -> Fraction:
    """``(a1 b0 - a0 b1) / a0^2``."""
    a0, a1, b0, b1 = (Fraction(v) for v in (a0, a1, b0, b1))
    if a0 <= 0:
        raise NonpositiveLeadingCoefficient("a0 must be positive")
    return (a1 * b0 - a0 * b1) / a0**2


def projective_weight_oracle(coordinate_weights: Sequence[int], j: int) -> tuple[int, int]:
    """Dimension and total weight of degree-``j`` polynomials on ``P^d``.

    ``C^*`` acts on homogeneous coordinate ``i`` with weight ``c_i``; a monomial
    carries the weight ``sum_i e_i c_i``.  Enumerated, not computed.
    """
    c = [int(v) for v in coordinate_weights]
    d = len(c) - 1
    if d < 1:
        raise InputError("need at least two homogeneous coordinates")
    if j < 0:
        raise InputError("degree must be nonnegative")
    if d > ORACLE_MAX_DIM or j > ORACLE_MAX_DEGREE:
        raise EnumerationBoundExceeded(f"enumeration limited to d <= {ORACLE_MAX_DIM}, j <= {ORACLE_MAX_DEGREE}")
    dim = 0
    total = 0
    for mono in itertools.combinations_with_replacement(range(d + 1), j):
        dim += 1
        total += sum(c[i] for i in mono)
    return dim, total


def df_from_oracle(coordinate_weights: Sequence[int], n: int, j_range: Iterable[int] | None = None) -> DFResult:
    """Donaldson-Futaki invariant of the product configuration on ``P^n``."""
    if len(coordinate_weights) != n + 1:
        raise InputError(f"P^{n} needs {n + 1} coordinate weights")
    js = list(j_range) if j_range is not None else list(range(1, n + 5))
    dims = []
    weights = []
    for j in js:
        dim, w = projective_weight_oracle(coordinate_weights, j)
        dims.append((j, dim))
        weights.append((j, w))
    a = fit_expansion(ExpansionData(tuple(dims), n), n)
    b = fit_expansion(ExpansionData(tuple(weights), n), n + 1)
    a0, a1, b0, b1 = a[0], a[1], b[0], b[1]
    return DFResult(df=df_invariant(a0, a1, b0, b1), coefficients=(a0, a1, b0, b1))


def adiabatic_expansion(samples: Sequence[tuple[float, float]]) -> AdiabaticResult:
    """Least-squares fit of ``DF(k) ~ W0 + W1 / k + c2 / k^2``.

    The third term soaks up the ``O(k^-2)`` tail so that ``W0`` and ``W1`` are
    not contaminated by it.  ``residual`` is the root-mean-square misfit.
    """
    pts = [(float(k), float(v)) for k, v in samples]
    ks = [k for k, _ in pts]
    if len(pts) < 3:
        raise InsufficientSamples("need at least three samples")
    if len(set(ks)) != len(ks):
        raise InputError("sample k values must be distinct")
    if min(ks) < 10:
        raise InputError("adiabatic samples need k >= 10")
    k = np.array(ks)
    y = np.array([v for _, v in pts])
    design = np.column_stack([np.ones_like(k), 1.0 / k, 1.0 / k**2])
    col_scale = np.linalg.norm(design, axis=0)
    scaled = design / col_scale
    cond = np.linalg.cond(scaled)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise IllConditioned(f"design condition number {cond:.3e}")
    coef, *_ = np.linalg.lstsq(scaled, y, rcond=None)
    coef = coef / col_scale
    resid = y - design @ coef
    return AdiabaticResult(
        W0=float(coef[0]),
        W1=float(coef[1]),
        residual=float(np.sqrt(np.mean(resid**2))),
        c2=float(coef[2]),
    )


def adiabatic_verdict(result: AdiabaticResult, tol: float = 1e-9) -> dict:
    """Sign bookkeeping for ``W0 >= 0, and W1 >= 0 when W0 = 0``.

    A coefficient within ``max(tol, residual)`` of zero counts as zero, so
    the fit residual acts as the uncertainty of the verdict.
    """
    unc = max(tol, result.residual)

    def sign(v):
        return 0 if abs(v) <= unc else (1 if v > 0 else -1)

    s0, s1 = sign(result.W0), sign(result.W1)
    if s0 != 0:
        semistable = s0 > 0
    else:
        semistable = s1 >= 0
    return {"W0_sign": s0, "W1_sign": s1, "uncertainty": unc, "semistable": semistable}
