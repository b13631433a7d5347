"""GIT stability of torus representations from weight polytopes.

For a torus acting on ``C^d`` with weights ``w_i`` and a point ``x``, let
``S`` be the weights of the nonzero coordinates of ``x``.  Then

* unstable       iff ``0`` is not in ``conv(S)``
* semistable     iff ``0`` is in ``conv(S)``
* polystable     iff ``0`` is in the relative interior of ``conv(S)``
* stable         iff polystable and ``S`` spans the whole weight space.

Every verdict comes with a certificate checked in exact arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from . import _simplex
from .algebra import TORUS, OVERFLOW_LIMIT, Representation
from .errors import AnalysisError, EmptySupport, NotTorusKind, Overflow, ZeroPoint

SUPPORT_REL_TOL = 1e-9


class Verdict(str, Enum):
    UNSTABLE = "Unstable"
    SEMISTABLE = "Semistable"
    POLYSTABLE = "Polystable"
    STABLE = "Stable"

    @property
    def is_polystable(self) -> bool:
        return self in (Verdict.POLYSTABLE, Verdict.STABLE)

    @property
    def is_semistable(self) -> bool:
        return self is not Verdict.UNSTABLE


@dataclass(frozen=True)
class StabilityReport:
    """Verdict plus exact certificate.

    ``certificate`` is a destabilizing one-parameter subgroup (tuple of int)
    for ``Unstable``; otherwise a tuple of Fractions, one per support index,
    expressing ``0`` as a convex combination of the support weights (all
    strictly positive for ``Polystable`` and ``Stable``).
    """

    verdict: Verdict
    support: tuple
    support_weights: tuple
    certificate: tuple
    stabilizer_rank: int

    def verify(self) -> bool:
        """Re-check the certificate in exact arithmetic."""
        ws = self.support_weights
        if self.verdict is Verdict.UNSTABLE:
            lam = self.certificate
            return any(lam) and all(sum(a * b for a, b in zip(w, lam)) < 0 for w in ws)
        coeffs = self.certificate
        if not ws:
            return self.verdict.is_polystable
        if len(coeffs) != len(ws) or sum(coeffs) != 1 or any(c < 0 for c in coeffs):
            return False
        r = len(ws[0])
        if any(sum(c * w[k] for c, w in zip(coeffs, ws)) != 0 for k in range(r)):
            return False
        if self.verdict.is_polystable and any(c <= 0 for c in coeffs):
            return False
        if self.verdict is Verdict.STABLE:
            return _simplex.rank(ws) == r
        return True


def _require_torus(rep: Representation) -> None:
    if rep.kind != TORUS:
        raise NotTorusKind("GIT classification needs a torus representation")


def support(rep: Representation, x) -> tuple:
    """Indices of coordinates above ``1e-9 * max|x_i|`` (scale invariant)."""
    x = rep.check_point(x)
    scale = float(np.abs(x).max(initial=0.0))
    return tuple(int(i) for i in np.flatnonzero(np.abs(x) > SUPPORT_REL_TOL * scale))


def _weights(rep: Representation, idx) -> list[tuple]:
    return [tuple(int(v) for v in rep.weights[i]) for i in idx]


def _convex_zero(ws: list[tuple], strict: bool):
    """Convex combination of ``ws`` equal to zero, maximising its smallest coefficient.

    Returns ``(coeffs, min_coeff)`` or ``None`` if ``0`` is not in the hull.
    """
    n = len(ws)
    r = len(ws[0])
    # variables: lambda_0..lambda_{n-1}, t
    a_eq = [[w[k] for w in ws] + [0] for k in range(r)]
    a_eq.append([1] * n + [0])
    b_eq = [0] * r + [1]
    a_ub = []
    b_ub = []
    if strict:
        for i in range(n):
            row = [0] * (n + 1)
            row[i] = -1
            row[n] = 1
            a_ub.append(row)
            b_ub.append(0)
    c = [0] * n + [-1 if strict else 0]
    status, sol, _ = _simplex.linprog(c, a_eq, b_eq, a_ub, b_ub)
    if status != _simplex.OPTIMAL:
        return None
    return tuple(sol[:n]), sol[n]


def _primitive(vec) -> tuple:
    den = math.lcm(*[Fraction(v).denominator for v in vec])
    ints = [int(Fraction(v) * den) for v in vec]
    g = math.gcd(*ints)
    return tuple(v // g for v in ints) if g else tuple(ints)


def _direction(zero_ws: list[tuple], neg_ws: list[tuple], r: int):
    """Primitive integer ``lam`` with ``w.lam = 0`` on ``zero_ws`` and ``< 0`` on ``neg_ws``.

    Among the rational solutions of ``w.lam <= -1`` the smallest L1 norm is
    taken, ties broken lexicographically, then scaled to a primitive vector.
    """
    if not neg_ws:
        return None
    # variables: u (r), v (r) >= 0 with lam = u - v
    def lam_row(w):
        return list(w) + [-c for c in w]

    a_eq = [lam_row(w) for w in zero_ws]
    b_eq = [0] * len(zero_ws)
    a_ub = [lam_row(w) for w in neg_ws]
    b_ub = [-1] * len(neg_ws)
    objectives = [[1] * (2 * r)] + [[1 if j == k else 0 for j in range(r)] + [-1 if j == k else 0 for j in range(r)] for k in range(r)]
    sol = None
    for obj in objectives:
        status, sol, value = _simplex.linprog(obj, a_eq, b_eq, a_ub, b_ub)
        if status == _simplex.INFEASIBLE:
            return None
        if status != _simplex.OPTIMAL:
            raise AnalysisError("direction LP unexpectedly unbounded")
        a_eq = a_eq + [obj]
        b_eq = b_eq + [value]
    lam = [sol[k] - sol[r + k] for k in range(r)]
    out = _primitive(lam)
    assert all(sum(a * b for a, b in zip(w, out)) == 0 for w in zero_ws)
    assert all(sum(a * b for a, b in zip(w, out)) < 0 for w in neg_ws)
    return out


def classify_stability(rep: Representation, x) -> StabilityReport:
    """Exact weight-polytope classification of ``x``.

    The zero vector is classified ``Polystable`` (a fixed point with vanishing
    moment map) with empty support.
    """
    _require_torus(rep)
    idx = support(rep, x)
    r = rep.weights.shape[1]
    ws = _weights(rep, idx)
    if not ws:
        return StabilityReport(Verdict.POLYSTABLE, (), (), (), r)
    stab_rank = r - _simplex.rank(ws)
    found = _convex_zero(ws, strict=True)
    if found is None:
        lam = _direction([], ws, r)
        return StabilityReport(Verdict.UNSTABLE, idx, tuple(ws), lam, stab_rank)
    coeffs, tmin = found
    if tmin > 0:
        verdict = Verdict.STABLE if stab_rank == 0 else Verdict.POLYSTABLE
    else:
        verdict = Verdict.SEMISTABLE
    return StabilityReport(verdict, idx, tuple(ws), coeffs, stab_rank)


def destabilizer(rep: Representation, x):
    """Integral one-parameter subgroup ``lam`` with ``w_i . lam < 0`` on the support.

    ``None`` when ``0`` lies in the convex hull of the support weights.  The
    output is primitive and deterministic.
    """
    _require_torus(rep)
    x = rep.check_point(x)
    if not np.any(x):
        raise ZeroPoint("destabilizer of the zero vector")
    ws = _weights(rep, support(rep, x))
    if _convex_zero(ws, strict=False) is not None:
        return None
    lam = _direction([], ws, rep.weights.shape[1])
    if asymptotic_slope(rep, x, lam) >= 0:
        raise AnalysisError("destabilizer failed sign validation")
    return lam


def degeneration_direction(rep: Representation, x, keep):
    """Integral ``lam`` fixing the coordinates in ``keep`` and shrinking the rest.

    ``w_i . lam = 0`` for support indices in ``keep`` and ``< 0`` for the other
    support indices, so ``exp(-i t lam) x`` converges to ``x`` with the
    non-kept coordinates set to zero.  ``None`` if no such ``lam`` exists.
    """
    _require_torus(rep)
    idx = support(rep, x)
    keep = set(keep)
    zero_ws = _weights(rep, [i for i in idx if i in keep])
    neg_ws = _weights(rep, [i for i in idx if i not in keep])
    return _direction(zero_ws, neg_ws, rep.weights.shape[1])


def limit_face(rep: Representation, x) -> tuple:
    """Support indices whose weights can carry positive mass in a zero combination.

    This is the minimal face of ``conv(S)`` containing ``0`` in its relative
    interior; empty if ``x`` is unstable.  It predicts the support of the
    flow limit.
    """
    _require_torus(rep)
    idx = support(rep, x)
    ws = _weights(rep, idx)
    if not ws or _convex_zero(ws, strict=False) is None:
        return ()
    n = len(ws)
    r = len(ws[0])
    a_eq = [[w[k] for w in ws] for k in range(r)] + [[1] * n]
    b_eq = [0] * r + [1]
    face = []
    for i in range(n):
        c = [0] * n
        c[i] = -1
        _, sol, _ = _simplex.linprog(c, a_eq, b_eq)
        if sol[i] > 0:
            face.append(idx[i])
    return tuple(face)


def one_ps_energy(rep: Representation, x, lam, t: float) -> float:
    """``1/2 sum_{i in S} |z_i|^2 exp(2 t w_i . lam)``, convex in ``t``."""
    _require_torus(rep)
    x = rep.check_point(x)
    idx = list(support(rep, x))
    if not idx:
        return 0.0
    pair = rep.weights[idx] @ np.asarray(lam, dtype=np.int64)
    logs = 2.0 * (np.log(np.abs(x[idx])) + t * pair)
    if logs.max() > np.log(OVERFLOW_LIMIT):
        raise Overflow(f"energy overflows at t={t}")
    with np.errstate(under="ignore"):
        return float(0.5 * np.exp(logs).sum())


def asymptotic_slope(rep: Representation, x, lam) -> Fraction:
    """Exact ``lim (1/t) log|exp(-i t lam) x| = max_{i in S} w_i . lam``."""
    _require_torus(rep)
    idx = support(rep, x)
    if not idx:
        raise EmptySupport("asymptotic slope of the zero vector")
    lam = [int(v) for v in lam]
    return Fraction(max(sum(int(a) * b for a, b in zip(rep.weights[i], lam)) for i in idx))
