"""Minimal-solution branch of (-Delta)^s u = lambda f(u) on the unit ball.

Two routes to the branch: monotone iteration from zero (yields the minimal
solution, diverges above the extremal parameter) and amplitude-parametrized
Newton continuation, which passes the fold where lambda-continuation would
lose the Jacobian.  The smallest eigenvalue of the linearized operator is
tracked along the branch; it crosses zero at the fold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import interpolate, linalg

from . import spectral

BLOWUP_THRESHOLD = 1e6
NEWTON_TOL = 1e-10
MONOTONE_TOL = 1e-9
EIG_TOL = 1e-8


class DivergenceSignal(Exception):
    """Monotone iteration blew up: no minimal solution at this lambda."""

    def __init__(self, lam, iterations, amplitude):
        super().__init__(
            f"monotone iteration diverged at lambda={lam} "
            f"(iter {iterations}, amplitude {amplitude:.3e})"
        )
        self.lam = lam
        self.iterations = iterations


class NewtonError(RuntimeError):
    pass


@dataclass(frozen=True)
class Nonlinearity:
    """Reaction term f with derivative; f(0) > 0, f nondecreasing, superlinear."""

    kind: str
    eval: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if not self.eval(np.array(0.0)) > 0:
            raise ValueError("nonlinearity must satisfy f(0) > 0")
        u = np.linspace(0.0, 100.0, 257)
        if np.any(self.deriv(u) < -1e-12):
            raise ValueError("nonlinearity must be nondecreasing on [0, 100]")
        if not self.eval(np.array(100.0)) / 100.0 > self.eval(np.array(1.0)):
            raise ValueError("nonlinearity fails the superlinearity proxy")


def exponential():
    return Nonlinearity("exp", np.exp, np.exp)


def power(p):
    """f(u) = (1+u)^p, superlinear for p > 1."""
    if p <= 1:
        raise ValueError("power nonlinearity needs p > 1")
    return Nonlinearity(
        f"power:{p}",
        lambda u: (1.0 + u) ** p,
        lambda u: p * (1.0 + u) ** (p - 1.0),
    )


def tabulated(u_vals, f_vals):
    """Monotone-cubic interpolant of sampled (u, f(u)) pairs."""
    pch = interpolate.PchipInterpolator(u_vals, f_vals)
    dpch = pch.derivative()
    return Nonlinearity("table", lambda u: pch(u), lambda u: dpch(u))


@dataclass(frozen=True)
class BranchPoint:
    t: float                      # amplitude u(0)
    lam: float
    u: spectral.RadialCoeffs
    nu1: float                    # smallest linearized eigenvalue
    residual: float


@dataclass
class Branch:
    points: list[BranchPoint] = field(default_factory=list)
    fold_index: Optional[int] = None

    @property
    def lambda_max(self):
        return max(p.lam for p in self.points)

    def lambda_star_bracket(self):
        lam = self.lambda_max
        return (lam, lam * 1.001)


def _nonlinear_nodes(basis, c):
    """Node values of the truncated expansion, safe to feed into f.

    Two guards against near-axis synthesis artifacts in high dimension,
    where basis values grow like rho^(-(n-1)/2) toward the axis:
    truncation ringing of size |c_K phi_K(rho)| that the exponential
    nonlinearity would amplify catastrophically, and nodes whose rho^(n-1)
    quadrature weight makes them irrelevant to every projection integral.
    For n >= 8 the synthesis is spectrally filtered (the damped tail sits
    below the ringing floor anyway); nodes with negligible weight are zeroed
    so f(noise) cannot overflow.  Neither guard changes any projection at
    double precision.
    """
    c = spectral.filtered(spectral.RadialCoeffs(basis, c)).c
    vals = c @ basis.phi_table
    w = basis.quad_weights
    return np.where(w > 1e-13 * w.max(), vals, 0.0)


def nonlinear_node_values(u):
    """Node values of u as fed into the nonlinearity by the solvers."""
    return _nonlinear_nodes(u.basis, u.c)


def residual(u, lam, f):
    """Coefficient-space residual (-Delta)^s u - lambda * P[f(u)]."""
    basis = u.basis
    fu = f.eval(_nonlinear_nodes(basis, u.c))
    proj = basis.phi_table @ (basis.quad_weights * fu)
    return spectral.RadialCoeffs(basis, basis.mu ** basis.s * u.c - lam * proj)


def _fprime_matrix(basis, u_nodes, f):
    with np.errstate(over="ignore", invalid="ignore"):
        w = basis.quad_weights * f.deriv(u_nodes)
        return (basis.phi_table * w) @ basis.phi_table.T


def stability_eigenvalue(u, lam, f):
    """Smallest eigenvalue of diag(mu^s) - lambda * F, F_jk = int f'(u) phi_j phi_k."""
    basis = u.basis
    A = np.diag(basis.mu ** basis.s) - lam * _fprime_matrix(
        basis, _nonlinear_nodes(basis, u.c), f
    )
    return float(linalg.eigh(A, eigvals_only=True, subset_by_index=(0, 0))[0])


def monotone_iterate(basis, lam, f, max_iter=4000, tol=MONOTONE_TOL):
    """Minimal solution by the sub/supersolution iteration from u = 0.

    u^{m+1} = lambda * (-Delta)^{-s} P[f(u^m)]; the iterates increase
    pointwise and converge exactly when lambda is below the extremal
    parameter.  Raises DivergenceSignal otherwise.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    u_nodes = np.zeros_like(basis.quad_nodes)
    c = np.zeros(basis.K)
    inv_mu = basis.mu ** (-basis.s)
    for m in range(1, max_iter + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            proj = basis.phi_table @ (basis.quad_weights * f.eval(u_nodes))
            c_new = lam * inv_mu * proj
            new_nodes = _nonlinear_nodes(basis, c_new)
        amp = float(np.max(np.abs(new_nodes))) if new_nodes.size else 0.0
        if not np.isfinite(amp) or amp > BLOWUP_THRESHOLD:
            raise DivergenceSignal(lam, m, amp)
        diff = float(np.max(np.abs(new_nodes - u_nodes)))
        u_nodes, c = new_nodes, c_new
        if diff < tol:
            return spectral.RadialCoeffs(basis, c)
    raise DivergenceSignal(lam, max_iter, float(np.max(np.abs(u_nodes))))


def amplitude(u):
    """Stable value at the origin: filtered synthesis at rho = 0.

    Raw partial sums at the origin converge slowly (phi_k(0) grows like
    k^{(n-1)/2}), and in higher dimension the unfiltered value is dominated
    by the truncation tail.  The filtered value is exact to rounding for
    functions the basis resolves.
    """
    return spectral.evaluate(spectral.filtered(u), 0.0)


def _amplitude_row(basis):
    """Linear functional c -> amplitude(u) as a coefficient-space row."""
    row = basis.phi_matrix(np.array([0.0]))[:, 0]
    k = np.arange(1, basis.K + 1)
    return row * np.exp(-36.0 * (k / basis.K) ** 8)


def newton_solve(basis, t, f, guess=None, tol=NEWTON_TOL, max_iter=60):
    """Solve {residual(u, lam) = 0, amplitude(u) = t} for (u, lam) by Newton.

    The amplitude constraint keeps the augmented Jacobian nonsingular at the
    fold.  Returns a BranchPoint with the stability eigenvalue attached.
    """
    if t < 0:
        raise ValueError("amplitude t must be >= 0")
    phi0 = _amplitude_row(basis)
    if guess is None:
        c = np.zeros(basis.K)
        lam = 0.0
        if t > 0:
            # first-order predictor along lambda*f(0)*zeta0
            zeta0 = basis.mu ** (-basis.s) * (
                basis.phi_table @ basis.quad_weights
            )
            lam = t / (float(f.eval(np.array(0.0))) * float(phi0 @ zeta0))
            c = lam * float(f.eval(np.array(0.0))) * zeta0
    else:
        c, lam = np.array(guess[0].c), float(guess[1])

    mus = basis.mu ** basis.s
    for _ in range(max_iter):
        u_nodes = _nonlinear_nodes(basis, c)
        with np.errstate(over="ignore", invalid="ignore"):
            fu = f.eval(u_nodes)
            proj = basis.phi_table @ (basis.quad_weights * fu)
        res = mus * c - lam * proj
        amp_res = float(phi0 @ c) - t
        norm = math.sqrt(float(res @ res) + amp_res ** 2)
        if norm <= tol:
            u = spectral.RadialCoeffs(basis, c)
            return BranchPoint(
                t=t,
                lam=lam,
                u=u,
                nu1=stability_eigenvalue(u, lam, f),
                residual=norm,
            )
        J = np.diag(mus) - lam * _fprime_matrix(basis, u_nodes, f)
        A = np.zeros((basis.K + 1, basis.K + 1))
        A[: basis.K, : basis.K] = J
        A[: basis.K, basis.K] = -proj
        A[basis.K, : basis.K] = phi0
        rhs = -np.concatenate([res, [amp_res]])
        try:
            step = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError as exc:
            raise NewtonError(f"singular augmented Jacobian at t={t}") from exc
        # damped update for large amplitudes
        scale = 1.0
        if np.max(np.abs(step[:-1] @ basis.phi_table)) > 5.0:
            scale = 0.5
        c = c + scale * step[: basis.K]
        lam = lam + scale * step[basis.K]
    raise NewtonError(f"Newton did not converge at t={t} (residual {norm:.3e})")


def continue_branch(basis, t_grid, f, refine_fold=True, tol=NEWTON_TOL):
    """Walk the branch over a strictly increasing amplitude grid.

    Secant predictor between consecutive solves; the fold is marked where
    lambda first decreases and, if requested, refined by maximizing lambda(t)
    and inserted as an extra branch point.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    br = Branch()
    prev = None
    prev2 = None
    for t in t_grid:
        if prev is None:
            guess = None
        elif prev2 is None:
            guess = (prev.u, prev.lam)
        else:
            dt = prev.t - prev2.t
            frac = (t - prev.t) / dt if dt > 0 else 0.0
            c_pred = prev.u.c + frac * (prev.u.c - prev2.u.c)
            lam_pred = prev.lam + frac * (prev.lam - prev2.lam)
            guess = (spectral.RadialCoeffs(basis, c_pred), lam_pred)
        try:
            point = newton_solve(basis, float(t), f, guess=guess, tol=tol)
        except NewtonError:
            break
        br.points.append(point)
        prev2, prev = prev, point
    lams = [p.lam for p in br.points]
    for i in range(1, len(lams)):
        if lams[i] < lams[i - 1]:
            br.fold_index = i - 1
            break
    if refine_fold and br.fold_index not in (None, 0):
        _refine_fold(basis, br, f, tol)
    return br


def _refine_fold(basis, br, f, tol):
    """Golden-section maximization of lambda(t) around the detected fold."""
    i = br.fold_index
    a = br.points[max(i - 1, 0)].t
    b = br.points[min(i + 1, len(br.points) - 1)].t
    guess = (br.points[i].u, br.points[i].lam)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    p1 = newton_solve(basis, x1, f, guess=guess, tol=tol)
    p2 = newton_solve(basis, x2, f, guess=guess, tol=tol)
    for _ in range(40):
        if b - a < 1e-7 * max(1.0, b):
            break
        if p1.lam < p2.lam:
            a, x1, p1 = x1, x2, p2
            x2 = a + invphi * (b - a)
            p2 = newton_solve(basis, x2, f, guess=(p1.u, p1.lam), tol=tol)
        else:
            b, x2, p2 = x2, x1, p1
            x1 = b - invphi * (b - a)
            p1 = newton_solve(basis, x1, f, guess=(p2.u, p2.lam), tol=tol)
    best = p1 if p1.lam >= p2.lam else p2
    # insert the refined fold point in amplitude order
    ts = [p.t for p in br.points]
    pos = int(np.searchsorted(ts, best.t))
    br.points.insert(pos, best)
    lams = [p.lam for p in br.points]
    br.fold_index = int(np.argmax(lams))


def estimate_lambda_star(basis, f, t_max=12.0, t_steps=48, bracket_rel_tol=1e-3,
                         max_iter=4000):
    """Two independent brackets for the extremal parameter.

    (i) maximum of the continued branch, refined at the fold;
    (ii) bisection on convergence/divergence of the monotone iteration.
    The routes must agree to bracket_rel_tol or a RuntimeError is raised.
    Returns (lo, hi, branch).
    """
    t_grid = np.linspace(0.0, t_max, t_steps + 1)[1:]
    br = continue_branch(basis, t_grid, f)
    if br.fold_index is None:
        raise RuntimeError("no fold detected; increase t_max")
    lam_fold = br.lambda_max

    lo, hi = lam_fold * (1.0 - 2.0 * bracket_rel_tol), lam_fold * (1.0 + 0.05)
    try:
        monotone_iterate(basis, lo, f, max_iter=max_iter)
    except DivergenceSignal:
        lo = lam_fold * 0.9  # fold estimate slightly high; widen downward
        monotone_iterate(basis, lo, f, max_iter=max_iter)
    while True:
        try:
            monotone_iterate(basis, hi, f, max_iter=max_iter)
            hi *= 1.05
        except DivergenceSignal:
            break
    while hi - lo > bracket_rel_tol * lam_fold:
        mid = 0.5 * (lo + hi)
        try:
            monotone_iterate(basis, mid, f, max_iter=max_iter)
            lo = mid
        except DivergenceSignal:
            hi = mid
    if not (lo - bracket_rel_tol * lam_fold <= lam_fold <= hi + bracket_rel_tol * lam_fold):
        raise RuntimeError(
            f"fold estimate {lam_fold} inconsistent with bisection bracket "
            f"[{lo}, {hi}]"
        )
    return lo, hi, br


def extremal_solution(br):
    """Branch point of largest lambda (the fold); its trace approximates u*."""
    if br.fold_index is None:
        raise ValueError("branch has no fold")
    return br.points[br.fold_index]
