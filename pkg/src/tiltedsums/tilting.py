"""Solving the tilting equation.

For a sequence X_1..X_n with average cgf kbar_n = (1/n) sum_j kappa_j, the
tilt parameter associated with a target mean a is the unique solution of

    grad kbar_n(theta) = a,       a in int(conv support).

kbar_n is strictly convex and steep on the open convex domain Theta, so a
damped Newton iteration started at theta = 0 converges globally: each step
solves Hess kbar_n(theta) p = -(grad kbar_n(theta) - a) and halves the step
until the iterate is strictly inside Theta and the residual merit
0.5 ||grad - a||^2 decreases.

Closed forms used as oracles in the test suite:

    all Normal:            mean(Gamma_j) theta = a - mean(mu_j)
    Gamma, shared scale:   theta = (1 - kbar t / a) / t,  kbar = mean shape
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, OutOfDomainError, UnsupportedFamilyError
from .families import GammaMember, NormalMember, validate_members
from .numerics import as_vector, guarded_eigh

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100

# Iterates must stay strictly inside the domain; for a half-line boundary b
# this keeps theta < b - 1e-14 * max(1, |b|).
BOUNDARY_MARGIN = 1e-14

MAX_HALVINGS = 60


@dataclass(frozen=True)
class TiltingSolution:
    theta: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool


def mean_cgf(members, theta):
    """(kbar_n, grad kbar_n, Hess kbar_n) at theta, as arithmetic means."""
    validate_members(members)
    t = as_vector(theta, members[0].dim)
    n = len(members)
    k = 0.0
    g = np.zeros(members[0].dim)
    h = np.zeros((members[0].dim, members[0].dim))
    for m in members:
        k += m.cgf(t)
        g += m.cgf_grad(t)
        h += m.cgf_hess(t)
    return k / n, g / n, h / n


def _check_target(members, a):
    """a must lie in the interior of the convex support hull."""
    first = members[0]
    if isinstance(first, GammaMember) and a[0] <= 0.0:
        raise OutOfDomainError(f"target mean a={a[0]} outside (0, inf) for gamma members")


def _in_domain(members, theta):
    margin = 0.0
    dom = members[0].domain
    if hasattr(dom, "upper"):
        margin = BOUNDARY_MARGIN * max(1.0, abs(dom.upper))
    return all(m.domain.contains(theta, margin=margin) for m in members)


def solve_tilt(members, a, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, callback=None):
    """Damped Newton iteration for grad kbar_n(theta) = a.

    Returns a TiltingSolution; converged is False (rather than raising) when
    max_iter Newton updates did not bring the residual below tol.
    """
    validate_members(members)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    a = as_vector(a, members[0].dim)
    _check_target(members, a)

    theta = np.zeros(members[0].dim)
    _, grad, hess = mean_cgf(members, theta)
    resid = grad - a
    merit = 0.5 * float(resid @ resid)
    iterations = 0

    for _ in range(max_iter):
        res_norm = float(np.linalg.norm(resid))
        if res_norm <= tol:
            return TiltingSolution(theta, res_norm, iterations, True)
        w, q = _guarded_hessian(hess)
        step = -(q @ ((q.T @ resid) / w))

        lam = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS):
            cand = theta + lam * step
            if _in_domain(members, cand):
                _, grad_c, hess_c = mean_cgf(members, cand)
                resid_c = grad_c - a
                merit_c = 0.5 * float(resid_c @ resid_c)
                if merit_c < merit:
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            return TiltingSolution(theta, res_norm, iterations, False)

        theta, resid, hess, merit = cand, resid_c, hess_c, merit_c
        iterations += 1
        if callback is not None:
            callback(theta.copy(), float(np.linalg.norm(resid)))

    res_norm = float(np.linalg.norm(resid))
    return TiltingSolution(theta, res_norm, iterations, res_norm <= tol)


def _guarded_hessian(hess):
    try:
        return guarded_eigh(hess)
    except Exception as exc:
        raise ConditioningError(f"mean cgf Hessian is numerically singular: {exc}") from exc


def tilt_oracle(members, a):
    """Closed-form tilt parameter for the shipped families.

    Normal: solve mean(Gamma_j) theta = a - mean(mu_j).  Gamma (shared scale):
    the average gradient kbar t/(1-theta t) depends on shapes only through
    their mean, so theta = (1 - kbar t / a)/t for any shape sequence.
    """
    validate_members(members)
    a = as_vector(a, members[0].dim)
    first = members[0]
    if isinstance(first, NormalMember):
        mu = np.mean([m.mean for m in members], axis=0)
        gam = np.mean([m.cov for m in members], axis=0)
        w, q = _guarded_hessian(gam)
        return q @ ((q.T @ (a - mu)) / w)
    if isinstance(first, GammaMember):
        _check_target(members, a)
        t = first.scale
        kbar = float(np.mean([m.shape for m in members]))
        return np.array([(1.0 - kbar * t / a[0]) / t])
    raise UnsupportedFamilyError(f"no closed-form tilt for kind {first.kind!r}")


def theta_bounds_1d(members, a):
    """Bracketing interval for the tilt parameter from envelope functions.

    Gamma members with shapes in [k_lo, k_hi] have means squeezed between
    f_-(theta) = k_lo t/(1-theta t) and f_+ = k_hi t/(1-theta t), so
    f_+^{-1}(a) <= theta <= f_-^{-1}(a).
    """
    validate_members(members)
    if not isinstance(members[0], GammaMember):
        raise UnsupportedFamilyError("envelope bounds are available for gamma members only")
    a = as_vector(a, 1)
    _check_target(members, a)
    t = members[0].scale
    k_lo = min(m.shape for m in members)
    k_hi = max(m.shape for m in members)
    lo = (1.0 - k_hi * t / a[0]) / t
    hi = (1.0 - k_lo * t / a[0]) / t
    return lo, hi
