"""Moment maps for linear unitary actions.

Phase space conventions (frozen, checked by :func:`check_defining_property`):

* Hermitian form ``h(u, v) = sum conj(u_i) v_i``
* symplectic form ``omega(u, v) = Im h(u, v)``, complex structure ``J = i``
* moment map ``<mu(x), xi> = -1/2 Im(x^H rho(xi) x)`` on the affine chart and
  ``-Im(z^H rho(xi) z) / (2 z^H z)`` on the projective chart.

Projective points are nonzero vectors up to scale; they are stored with unit
norm and first nonzero coordinate real positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra import TORUS, Representation, infinitesimal_action
from .errors import InputError, NotTorusKind, ZeroProjectivePoint

AFFINE = "affine"
PROJECTIVE = "projective"
CHARTS = (AFFINE, PROJECTIVE)


def hermitian_form(u, v) -> complex:
    return complex(np.vdot(u, v))


def symplectic_form(u, v) -> float:
    return float(np.vdot(u, v).imag)


def complex_structure(u) -> np.ndarray:
    return 1j * np.asarray(u, dtype=complex)


def projective_normalize(z) -> np.ndarray:
    """Unit-norm representative whose first nonzero coordinate is real positive."""
    z = np.asarray(z, dtype=complex)
    m = np.abs(z).max(initial=0.0)
    if m == 0:
        raise ZeroProjectivePoint("the zero vector is not a projective point")
    # rescale first so tiny vectors do not underflow in the norm
    z = z / m
    z = z / np.linalg.norm(z)
    lead = np.flatnonzero(np.abs(z) > 0)[0]
    out = z * np.exp(-1j * np.angle(z[lead]))
    out[lead] = abs(z[lead])
    return out


def _check_chart(chart: str) -> None:
    if chart not in CHARTS:
        raise InputError(f"unknown chart {chart!r}")


@dataclass(frozen=True)
class MomentValue:
    value: np.ndarray
    base_point: np.ndarray
    chart: str = AFFINE


@dataclass(frozen=True)
class NuValue:
    value: np.ndarray
    direction: np.ndarray


def moment_pairings(rep: Representation, x, chart: str = AFFINE) -> np.ndarray:
    """All pairings ``<mu(x), e_a>`` with the basis vectors, as one array."""
    _check_chart(chart)
    x = rep.check_point(x)
    if rep.kind == TORUS:
        p = -0.5 * (rep.weights.T @ (np.abs(x) ** 2))
    else:
        p = -0.5 * np.einsum("i,aij,j->a", x.conj(), rep.basis, x).imag
    if chart == PROJECTIVE:
        nsq = float(np.vdot(x, x).real)
        if nsq == 0:
            raise ZeroProjectivePoint("projective moment map undefined at zero")
        p = p / nsq
    return p


def moment_pairing(rep: Representation, x, xi, chart: str = AFFINE) -> float:
    """``<mu(x), xi>``, the Hamiltonian function of ``sigma(xi)``."""
    xi = rep.check_lie_vector(xi)
    return float(moment_pairings(rep, x, chart) @ xi)


def moment_map(rep: Representation, x, chart: str = AFFINE) -> MomentValue:
    """Moment map value as a Lie vector, via the inner product.

    Solves ``G m = p`` where ``p`` holds the basis pairings.

    >>> from mmflow.algebra import make_torus_rep
    >>> moment_map(make_torus_rep(1, [[1], [-1]]), [1, 0]).value
    array([-0.5])
    """
    x = rep.check_point(x)
    p = moment_pairings(rep, x, chart)
    base = projective_normalize(x) if chart == PROJECTIVE else x
    return MomentValue(value=rep.gram_inv @ p, base_point=base, chart=chart)


def moment_norm_sq(rep: Representation, x, chart: str = AFFINE) -> float:
    p = moment_pairings(rep, x, chart)
    return float(p @ rep.gram_inv @ p)


def moment_map_exact(rep: Representation, x) -> tuple[Fraction, ...]:
    """Torus moment map in exact rational arithmetic.

    The float coordinates of ``x`` are read as the exact binary rationals they
    are; the Gram system is then solved over the rationals.
    """
    if rep.kind != TORUS:
        raise NotTorusKind("exact moment map is available for torus kind only")
    x = rep.check_point(x)
    sq = [Fraction(float(z.real)) ** 2 + Fraction(float(z.imag)) ** 2 for z in x]
    r = rep.rank
    p = [-Fraction(1, 2) * sum(sq[i] * int(rep.weights[i, a]) for i in range(rep.dim)) for a in range(r)]
    return tuple(_solve_rational([list(row) for row in rep.inner_product], p))


def _solve_rational(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(b)
    aug = [list(map(Fraction, row)) + [Fraction(b[i])] for i, row in enumerate(a)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [vr - f * vc for vr, vc in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


def nu_map(rep: Representation, v) -> NuValue:
    """Quadratic map ``<nu(v), xi> = 1/2 Omega_0(A_xi v, v)`` at the fixed origin.

    ``A_xi = rho(xi)`` is the linearised action and ``Omega_0 = omega``.  The
    pairing is built from :func:`symplectic_form` directly, independently of
    the closed form used by :func:`moment_pairing`.
    """
    v = rep.check_point(v)
    p = np.array([0.5 * symplectic_form(rep.basis[a] @ v, v) for a in range(rep.rank)])
    return NuValue(value=rep.gram_inv @ p, direction=v)


def _projective_tangent(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    # horizontal part: orthogonal to the complex line through z
    return w - (np.vdot(z, w) / np.vdot(z, z)) * z


def check_defining_property(rep: Representation, x, xi, step: float = 1e-5, chart: str = AFFINE) -> float:
    """Finite-difference residual of ``d<mu, xi>(w) = omega(w, sigma_x(xi))``.

    Central differences along the ``2d`` real coordinate directions.  In the
    projective chart ``mu`` is the scale-invariant lift to ``C^d \\ 0`` and
    ``omega`` the pull-back of the Fubini-Study form, which only sees the
    horizontal parts of tangent vectors.
    """
    if step <= 0:
        raise InputError("step must be positive")
    _check_chart(chart)
    xi = rep.check_lie_vector(xi)
    x = rep.check_point(x)
    if chart == PROJECTIVE:
        x = projective_normalize(x)
    sigma = infinitesimal_action(rep, xi, x)
    residual = 0.0
    for k in range(rep.dim):
        for unit in (1.0, 1j):
            w = np.zeros(rep.dim, dtype=complex)
            w[k] = unit
            fd = (moment_pairing(rep, x + step * w, xi, chart) - moment_pairing(rep, x - step * w, xi, chart)) / (2 * step)
            if chart == PROJECTIVE:
                exact = symplectic_form(_projective_tangent(x, w), _projective_tangent(x, sigma)) / float(np.vdot(x, x).real)
            else:
                exact = symplectic_form(w, sigma)
            residual = max(residual, abs(fd - exact))
    return residual
