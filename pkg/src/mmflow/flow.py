"""The moment map flow ``dx/dt = J sigma_x(mu(x))`` and its limits.

For a linear action the flow reads ``dx/dt = -i rho(mu(x)) x``; it is the
negative gradient flow of ``1/2 |mu|^2`` and never increases ``|x|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import git
from .algebra import (
    TORUS,
    Representation,
    complexified_action,
    make_matrix_rep,
    make_torus_rep,
    orthonormalize,
    stabilizer_algebra,
)
from .errors import InputError, NotCommuting, Overflow
from .integrate import StepStats, dormand_prince
from .symplectic import AFFINE, PROJECTIVE, moment_pairings, projective_normalize

SUPPORT_REL_TOL = 1e-9
DEFAULT_DECAY_TOL = 1e-2
DEFAULT_REPORT_TOL = 1e-5


class Termination(str, Enum):
    GRAD_TOL = "GradTolReached"
    MAX_TIME = "MaxTimeReached"


class Dichotomy(str, Enum):
    IN_ORBIT = "InOrbit"
    ORBIT_CLOSURE_ONLY = "OrbitClosureOnly"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class FlowParams:
    """Integration controls.

    ``record_every`` is the minimum time between stored samples; the initial
    and terminal states are always stored.  ``extrapolate_terminal`` replaces
    the terminal point by ``x(T) + T x'(T)``; it is off by default because it
    only helps on tails decaying like ``1/t``.
    """

    max_time: float = 1e4
    grad_tol: float = 1e-7
    initial_step: float = 1e-2
    max_step: float = 100.0
    error_tol: float = 1e-9
    record_every: float = 1.0
    extrapolate_terminal: bool = False

    def __post_init__(self):
        for name in ("max_time", "grad_tol", "initial_step", "max_step", "error_tol", "record_every"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InputError(f"flow parameter {name} must be positive and finite, got {value}")
        if self.grad_tol >= 1:
            raise InputError("grad_tol must be below 1")


@dataclass(frozen=True)
class FlowTrajectory:
    """Sampled flow line.

    ``points`` are always in the affine chart.  For projective flows
    ``aligned_time`` holds the matching affine-flow time: both flows trace the
    same curve, the projective one slowed by the factor ``1 / (1 + |x|^2)``.
    """

    t: np.ndarray
    points: np.ndarray
    mu_norm_sq: np.ndarray
    step: np.ndarray
    terminal: np.ndarray
    termination: Termination
    stats: StepStats
    params: FlowParams
    chart: str = AFFINE
    restricted_to: tuple | None = None
    aligned_time: np.ndarray | None = None

    def __len__(self):
        return len(self.t)


@dataclass(frozen=True)
class LimitReport:
    mu_norm: float
    stabilizer_dim: int
    support: frozenset
    initial_support: frozenset
    dichotomy: Dichotomy
    witness: np.ndarray | None = None
    limit_point: np.ndarray | None = None
    tilde_x: np.ndarray | None = None
    decay_rates: np.ndarray | None = None
    mu_direction: np.ndarray | None = None
    mu_decay_rate: float = 0.0
    final_clause: dict | None = field(default=None)
    report_tol: float = DEFAULT_REPORT_TOL
    decay_tol: float = DEFAULT_DECAY_TOL

    @property
    def mu_vanishing(self) -> bool:
        """``mu -> 0``: already below tolerance, or decaying along a power-law tail."""
        return self.mu_norm <= self.report_tol or self.mu_decay_rate <= -self.decay_tol


def _projector(rep: Representation, torus) -> np.ndarray | None:
    """Matrix of the orthogonal projection onto the complement of ``torus``."""
    if not torus:
        return None
    ortho = orthonormalize(rep, torus)
    proj = np.eye(rep.rank)
    for u in ortho:
        proj = proj - np.outer(u, u @ rep.gram)
    return proj


def _affine_field(rep: Representation, projector):
    ginv = rep.gram_inv
    gram = rep.gram
    if rep.kind == TORUS:
        w = rep.weights.astype(float)
        wt = w.T.copy()

        def mu_vec(x):
            m = ginv @ (-0.5 * (wt @ (x.real**2 + x.imag**2)))
            return m if projector is None else projector @ m

        def velocity(x):
            return (w @ mu_vec(x)) * x
    else:
        basis = rep.basis

        def mu_vec(x):
            p = -0.5 * np.einsum("i,aij,j->a", x.conj(), basis, x).imag
            m = ginv @ p
            return m if projector is None else projector @ m

        def velocity(x):
            return -1j * (np.tensordot(mu_vec(x), basis, axes=1) @ x)

    def energy(x):
        m = mu_vec(x)
        return float(m @ gram @ m)

    return mu_vec, velocity, energy


class _Recorder:
    def __init__(self, every: float):
        self.every = every
        self.next = 0.0
        self.rows: list = []
        self.last = None

    def __call__(self, t, y, e, h, f):
        self.last = (t, y.copy(), e, h)
        if t >= self.next:
            self.rows.append(self.last)
            self.next = t + self.every

    def finish(self):
        if self.rows[-1][0] != self.last[0]:
            self.rows.append(self.last)
        t = np.array([r[0] for r in self.rows])
        y = np.array([r[1] for r in self.rows])
        e = np.array([r[2] for r in self.rows])
        h = np.array([r[3] for r in self.rows])
        return t, y, e, h


def _run_affine(rep, x0, params, torus):
    x0 = rep.check_point(x0)
    projector = _projector(rep, torus)
    _, velocity, energy = _affine_field(rep, projector)
    rec = _Recorder(params.record_every)
    t_end, y, stats, stopped = dormand_prince(
        velocity,
        x0,
        params.max_time,
        h0=params.initial_step,
        h_max=params.max_step,
        tol=params.error_tol,
        energy=energy,
        energy_slack=params.error_tol,
        stop=lambda y, f: float(np.linalg.norm(f)) <= params.grad_tol,
        on_accept=rec,
    )
    t, pts, e, h = rec.finish()
    terminal = y
    if params.extrapolate_terminal:
        terminal = y + t_end * velocity(y)
    return FlowTrajectory(
        t=t,
        points=pts,
        mu_norm_sq=e,
        step=h,
        terminal=terminal,
        termination=Termination.GRAD_TOL if stopped else Termination.MAX_TIME,
        stats=stats,
        params=params,
        chart=AFFINE,
        restricted_to=tuple(torus) if torus else None,
    )


def integrate_flow(rep: Representation, x0, params: FlowParams | None = None) -> FlowTrajectory:
    """Integrate the moment map flow from ``x0`` on the affine chart.

    Stops once ``|sigma_x(mu(x))| <= grad_tol`` or at ``max_time``.

    Examples
    --------
    On the axis ``z2 = 0`` of the weights ``(1, -1)`` action the flow is
    ``z1' = -|z1|^2 z1 / 2``, so ``|z1(t)|^2 = 1 / (1 + t)``.
    """
    return _run_affine(rep, x0, params or FlowParams(), None)


def projected_flow(rep: Representation, x0, torus, params: FlowParams | None = None) -> FlowTrajectory:
    """Flow of ``mu_{T-perp}``: the moment map projected orthogonally to ``torus``."""
    vecs = [rep.check_lie_vector(v) for v in torus]
    for a in range(len(vecs)):
        for b in range(a + 1, len(vecs)):
            br = rep.bracket(vecs[a], vecs[b])
            if np.linalg.norm(br) > 1e-10 * max(1.0, np.linalg.norm(vecs[a]) * np.linalg.norm(vecs[b])):
                raise NotCommuting(f"torus vectors {a} and {b} do not commute")
    ortho = orthonormalize(rep, vecs)
    return _run_affine(rep, x0, params or FlowParams(), ortho)


def _extend_to_projective(rep: Representation) -> Representation:
    """Same group acting on ``C^{d+1}`` with a fixed extra coordinate in front."""
    if rep.kind == TORUS:
        w = np.vstack([np.zeros((1, rep.weights.shape[1]), dtype=np.int64), rep.weights])
        return make_torus_rep(rep.weights.shape[1], w, inner_product=rep.inner_product)
    mats = []
    for b in rep.basis:
        big = np.zeros((rep.dim + 1, rep.dim + 1), dtype=complex)
        big[1:, 1:] = b
        mats.append(big)
    return make_matrix_rep(mats, inner_product=rep.inner_product)


def projective_flow(rep: Representation, x0, params: FlowParams | None = None) -> FlowTrajectory:
    """Moment map flow on ``P^d`` containing ``C^d`` as the chart ``[1 : x]``.

    The action is extended trivially to the new homogeneous coordinate and the
    Fubini-Study moment map ``-Im(Z^H rho Z) / (2 |Z|^2)`` is used.  Samples are
    reported back in the affine chart.
    """
    params = params or FlowParams()
    x0 = rep.check_point(x0)
    ext = _extend_to_projective(rep)
    ginv, gram, basis = ext.gram_inv, ext.gram, ext.basis
    n = ext.dim

    def mu_vec(z):
        return ginv @ moment_pairings(ext, z, PROJECTIVE)

    def velocity(y):
        z = y[:n]
        a = np.tensordot(mu_vec(z), basis, axes=1)
        az = a @ z
        horiz = az - (np.vdot(z, az) / np.vdot(z, z)) * z
        out = np.empty_like(y)
        out[:n] = -1j * horiz
        out[n] = (abs(z[0]) ** 2) / float(np.vdot(z, z).real)
        return out

    def energy(y):
        m = mu_vec(y[:n])
        return float(m @ gram @ m)

    def renormalize(y):
        out = y.copy()
        out[:n] = projective_normalize(y[:n])
        out[n] = y[n].real
        return out

    y0 = np.empty(n + 1, dtype=complex)
    y0[:n] = projective_normalize(np.concatenate([[1.0], x0]))
    y0[n] = 0.0
    rec = _Recorder(params.record_every)
    _, y, stats, stopped = dormand_prince(
        velocity,
        y0,
        params.max_time,
        h0=params.initial_step,
        h_max=params.max_step,
        tol=params.error_tol,
        energy=energy,
        energy_slack=params.error_tol,
        stop=lambda y, f: float(np.linalg.norm(f[:n])) <= params.grad_tol,
        on_accept=rec,
        post_step=renormalize,
    )
    t, ys, e, h = rec.finish()
    pts = ys[:, 1:n] / ys[:, :1]
    return FlowTrajectory(
        t=t,
        points=pts,
        mu_norm_sq=e,
        step=h,
        terminal=y[1:n] / y[0],
        termination=Termination.GRAD_TOL if stopped else Termination.MAX_TIME,
        stats=stats,
        params=params,
        chart=PROJECTIVE,
        aligned_time=ys[:, n].real.copy(),
    )


def support_of(x, reference_scale: float) -> frozenset:
    x = np.asarray(x)
    eps = SUPPORT_REL_TOL * reference_scale
    return frozenset(int(i) for i in np.flatnonzero(np.abs(x) > eps))


def decay_rates(rep: Representation, traj: FlowTrajectory) -> np.ndarray:
    """Log-log decay exponents ``T d log|z_i| / dt`` at the terminal time.

    A coordinate tending to zero along a polynomial tail ``t^(-a)`` has
    exponent near ``-a``; a coordinate converging to a nonzero value has an
    exponent tending to zero.
    """
    projector = _projector(rep, list(traj.restricted_to) if traj.restricted_to else None)
    _, velocity, _ = _affine_field(rep, projector)
    x = traj.terminal
    v = velocity(x)
    mags = np.abs(x) ** 2
    rates = np.zeros(rep.dim)
    live = mags > 0
    rates[live] = traj.t[-1] * (x.conj()[live] * v[live]).real / mags[live]
    return rates


def analyze_limit(
    rep: Representation,
    traj: FlowTrajectory,
    x0,
    *,
    report_tol: float = DEFAULT_REPORT_TOL,
    decay_tol: float = DEFAULT_DECAY_TOL,
    stabilizer_tol: float = 1e-8,
) -> LimitReport:
    """Locate the flow limit relative to the complexified orbit of ``x0``.

    A coordinate belongs to the limit support when it is above the relative
    threshold ``1e-9 max|z_i(0)|`` and is not decaying along a power-law tail
    (terminal log-log exponent above ``-decay_tol``).

    Torus kind: ``InOrbit`` when the projected moment map vanishes to
    ``report_tol`` and the support is unchanged; ``OrbitClosureOnly`` when the
    support strictly shrank, with an integral witness ``xi`` such that
    ``exp(-i t xi) x0`` converges.  Matrix kind is ``Undetermined`` unless the
    trajectory never moved from a zero of the moment map.
    """
    if traj.chart != AFFINE:
        raise InputError("analyze_limit expects an affine-chart trajectory")
    x0 = rep.check_point(x0)
    torus = list(traj.restricted_to) if traj.restricted_to else None
    projector = _projector(rep, torus)
    mu_vec, velocity, energy = _affine_field(rep, projector)
    x_inf = traj.terminal
    scale = float(np.abs(x0).max(initial=0.0))
    s0 = support_of(x0, scale)
    rates = decay_rates(rep, traj)
    above = support_of(x_inf, scale)
    s_inf = frozenset(i for i in above if rates[i] > -decay_tol)
    limit = x_inf.copy()
    if rep.kind == TORUS:
        limit[[i for i in range(rep.dim) if i not in s_inf]] = 0.0
    m_inf = mu_vec(limit)
    mu_norm = float(np.sqrt(max(m_inf @ rep.gram @ m_inf, 0.0)))
    m_term = mu_vec(x_inf)
    mu_dir = None
    if np.linalg.norm(m_term) > 0:
        mu_dir = m_term / np.sqrt(m_term @ rep.gram @ m_term)
    stab_dim = len(stabilizer_algebra(rep, limit, stabilizer_tol))
    e_term = energy(x_inf)
    # gradient flow: d|mu|^2/dt = -2 |x'|^2
    mu_rate = -2.0 * traj.t[-1] * float(np.linalg.norm(velocity(x_inf)) ** 2) / e_term if e_term > 0 else 0.0
    base = dict(
        mu_norm=mu_norm,
        stabilizer_dim=stab_dim,
        support=s_inf,
        initial_support=s0,
        limit_point=limit,
        decay_rates=rates,
        mu_direction=mu_dir,
        mu_decay_rate=mu_rate,
        report_tol=report_tol,
        decay_tol=decay_tol,
    )

    if rep.kind != TORUS:
        moved = np.linalg.norm(x_inf - x0) <= report_tol * max(1.0, scale)
        verdict = Dichotomy.IN_ORBIT if (moved and mu_norm <= report_tol) else Dichotomy.UNDETERMINED
        return LimitReport(dichotomy=verdict, **base)

    if mu_norm <= report_tol and s_inf == s0:
        return LimitReport(dichotomy=Dichotomy.IN_ORBIT, **base)
    if not (s_inf < s0):
        return LimitReport(dichotomy=Dichotomy.UNDETERMINED, **base)

    lam = git.degeneration_direction(rep, x0, s_inf)
    if lam is None:
        return LimitReport(dichotomy=Dichotomy.UNDETERMINED, **base)
    xi = np.array(lam, dtype=float)
    if projector is not None and np.linalg.norm(projector @ xi - xi) > 1e-9 * np.linalg.norm(xi):
        return LimitReport(dichotomy=Dichotomy.UNDETERMINED, **base)
    if not _witness_converges(rep, xi, x0, s_inf):
        return LimitReport(dichotomy=Dichotomy.UNDETERMINED, **base)
    tilde = x0.copy()
    tilde[[i for i in range(rep.dim) if i not in s_inf]] = 0.0
    pairing = float(mu_vec(tilde) @ rep.gram @ xi)
    clause = {"pairing": pairing, "pairing_nonnegative": pairing >= -report_tol}
    if abs(pairing) <= report_tol:
        clause["tilde_equals_limit"] = bool(np.linalg.norm(tilde - limit) <= 1e-4 * max(1.0, scale))
        clause["same_torus_orbit"] = same_torus_orbit(rep, tilde, limit)
    return LimitReport(
        dichotomy=Dichotomy.ORBIT_CLOSURE_ONLY,
        witness=xi,
        tilde_x=tilde,
        final_clause=clause,
        **base,
    )


def _witness_converges(rep: Representation, xi, x0, keep) -> bool:
    """Forward-simulate ``exp(-i t xi) x0``: kept coordinates fixed, the rest shrink."""
    try:
        a = complexified_action(rep, xi, 10.0, x0)
        b = complexified_action(rep, xi, 20.0, x0)
    except Overflow:
        return False
    for i in range(rep.dim):
        if x0[i] == 0:
            continue
        if i in keep:
            if not np.isclose(b[i], x0[i], rtol=1e-12, atol=0):
                return False
        elif not abs(b[i]) < abs(a[i]) < abs(x0[i]):
            return False
    return True


def same_torus_orbit(rep: Representation, x, y, tol: float = 1e-4) -> bool:
    """Whether ``y = exp(-i xi) x`` for some real ``xi`` (torus kind).

    This is the orbit of the noncompact part of the complex torus, the part
    the flow moves along: same support, same phases, and
    ``log|y_i| - log|x_i|`` in the column space of the support weights.
    """
    sx = support_of(x, float(np.abs(x).max(initial=0.0)))
    sy = support_of(y, float(np.abs(y).max(initial=0.0)))
    if sx != sy:
        return False
    if not sx:
        return True
    idx = sorted(sx)
    ratio = np.asarray(y)[idx] / np.asarray(x)[idx]
    if np.max(np.abs(np.angle(ratio))) > tol:
        return False
    logs = np.log(np.abs(ratio))
    w = rep.weights[idx].astype(float)
    coef, *_ = np.linalg.lstsq(w, logs, rcond=None)
    return bool(np.linalg.norm(w @ coef - logs) <= tol * max(1.0, np.linalg.norm(logs)))


def projected_moment(rep: Representation, x, torus=None) -> np.ndarray:
    """``mu_{T-perp}(x)``: the affine moment map with its ``torus`` component removed."""
    mu_vec, _, _ = _affine_field(rep, _projector(rep, list(torus) if torus else None))
    return mu_vec(rep.check_point(x))


def stabilizer_residual(rep: Representation, x, xi, tol: float = 1e-8) -> float:
    """Distance from ``xi`` to the stabilizer algebra of ``x`` in the inner-product norm."""
    rest = np.asarray(xi, dtype=float).copy()
    for u in stabilizer_algebra(rep, x, tol):
        rest = rest - rep.pair(rest, u) * u
    return rep.norm(rest)


def with_params(params: FlowParams, **changes) -> FlowParams:
    return replace(params, **changes)
