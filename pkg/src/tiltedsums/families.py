"""Distribution members and exponential tilting.

A *member* is one coordinate law X_j of an independent (not necessarily
identically distributed) sequence.  Each member knows its cumulant
generating function

    kappa(theta) = log Phi(theta),    Phi(theta) = E[exp(<theta, X>)],

its gradient and Hessian (mean and covariance of the tilted variable), its
Lebesgue density, and how to tilt itself: the tilted density is

    p_theta(x) = exp(<theta, x>) p(x) / Phi(theta),

which stays inside the family for both concrete kinds shipped here:

    Normal(mu, Gamma)  ->  Normal(mu + Gamma theta, Gamma),   Theta = R^d
    Gamma(k, t)        ->  Gamma(k, t / (1 - theta t)),       Theta = (-inf, 1/t)

Gamma members require shape > 2 so densities are C^1 and fourth moments
stay uniformly controlled under tilting; sequences share a single scale t.

Members are immutable value objects; every operation is a pure function of
its inputs, and random number generators are always passed explicitly.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomainError, UnsupportedFamilyError
from .numerics import LOG_2PI, as_matrix, as_vector, check_symmetric, sym_inv, sym_logdet, sym_sqrt


# ---------------------------------------------------------------------------
# Domain of finiteness of the cgf
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AllSpace:
    """Theta = R^d (Normal members)."""

    dim: int

    def contains(self, theta, margin=0.0):
        t = as_vector(theta, self.dim)
        return bool(np.all(np.isfinite(t)))

    def boundary_distance(self, theta):
        return math.inf


@dataclass(frozen=True)
class HalfLine:
    """Theta = (-inf, upper), strictly (Gamma members, upper = 1/scale)."""

    upper: float

    def contains(self, theta, margin=0.0):
        t = as_vector(theta, 1)
        return bool(np.isfinite(t[0]) and t[0] < self.upper - margin)

    def boundary_distance(self, theta):
        t = as_vector(theta, 1)
        return self.upper - float(t[0])


# ---------------------------------------------------------------------------
# Member interface
# ---------------------------------------------------------------------------

class Member(ABC):
    """One distribution X_j: cgf with derivatives, density, sampler, tilt."""

    kind = "abstract"

    @property
    @abstractmethod
    def dim(self):
        ...

    @property
    @abstractmethod
    def domain(self):
        ...

    @abstractmethod
    def cgf(self, theta):
        """kappa(theta) = log Phi(theta); strictly convex on int(Theta)."""

    @abstractmethod
    def cgf_grad(self, theta):
        """Gradient of kappa; equals the mean of the tilted variable."""

    @abstractmethod
    def cgf_hess(self, theta):
        """Hessian of kappa; equals the covariance of the tilted variable."""

    @abstractmethod
    def log_density(self, x):
        """Log density w.r.t. Lebesgue measure (-inf outside the support)."""

    @abstractmethod
    def tilt(self, theta):
        """The member with density exp(<theta, x>) p(x) / Phi(theta)."""

    @abstractmethod
    def sample(self, rng, count):
        """i.i.d. draws, shape (count, dim). count = 0 gives an empty array."""

    # -- numeric hooks used by the assumption validators --------------------

    @abstractmethod
    def char_fn_modulus_sup(self, theta, radii):
        """sup over ||t|| = r of |E[exp(i <t, X_tilted>)]|, vectorized in r."""

    @abstractmethod
    def density_partial_l1(self, theta, axis):
        """L1 norm of the axis-th partial derivative of the tilted density,
        computed by adaptive quadrature."""

    @abstractmethod
    def fourth_central_moment(self, theta):
        """E[||X_tilted - mean||^4]."""

    @abstractmethod
    def third_central_moment_tensor(self, theta):
        """Tensor T[a,b,c] = E[(X-m)_a (X-m)_b (X-m)_c] of the tilted member."""

    # -- shared plumbing -----------------------------------------------------

    def density(self, x):
        out = np.exp(self.log_density(x))
        return float(out) if np.ndim(out) == 0 else out

    def _check_theta(self, theta):
        t = as_vector(theta, self.dim)
        if not self.domain.contains(t):
            raise OutOfDomainError(
                f"theta={t} outside the open domain of the {self.kind} cgf"
            )
        return t

    def _points(self, x):
        """Normalize x to an (N, d) array; report whether input was a single point."""
        a = np.asarray(x, dtype=float)
        if a.ndim == 0:
            if self.dim != 1:
                raise ValueError("scalar input for a multivariate member")
            return a.reshape(1, 1), True
        if a.ndim == 1:
            if self.dim == 1:
                return a.reshape(-1, 1), False
            if a.shape[0] != self.dim:
                raise ValueError(f"point of length {a.shape[0]} for dim {self.dim}")
            return a.reshape(1, -1), True
        if a.ndim == 2 and a.shape[1] == self.dim:
            return a, False
        raise ValueError(f"cannot interpret array of shape {a.shape} as points")


# ---------------------------------------------------------------------------
# Normal members
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NormalMember(Member):
    """Multivariate normal N(mean, cov) with symmetric positive definite cov."""

    mean: np.ndarray
    cov: np.ndarray
    index: int = 0

    kind = "normal"

    def __post_init__(self):
        mean = as_vector(self.mean)
        cov = check_symmetric(as_matrix(self.cov, mean.shape[0]))
        w = np.linalg.eigvalsh(cov)
        if w[0] <= 0.0:
            raise ValueError(f"covariance not positive definite: lambda_min={w[0]:.3e}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_cache", {})

    # Inverse / sqrt / logdet are computed lazily so that a nearly singular
    # covariance can still be *inspected* (eigenvalues, Hessian) even though
    # using its density or sampler raises DegenerateCovarianceError.
    def _prec(self, key):
        cache = self._cache
        if key not in cache:
            cache["inv"] = sym_inv(self.cov)
            cache["sqrt"] = sym_sqrt(self.cov)
            cache["logdet"] = sym_logdet(self.cov)
        return cache[key]

    @property
    def dim(self):
        return self.mean.shape[0]

    @property
    def domain(self):
        return AllSpace(self.dim)

    def cgf(self, theta):
        t = self._check_theta(theta)
        return float(self.mean @ t + 0.5 * t @ self.cov @ t)

    def cgf_grad(self, theta):
        t = self._check_theta(theta)
        return self.mean + self.cov @ t

    def cgf_hess(self, theta):
        self._check_theta(theta)
        return self.cov.copy()

    def log_density(self, x):
        pts, single = self._points(x)
        diff = pts - self.mean
        quad = np.einsum("ni,ij,nj->n", diff, self._prec("inv"), diff)
        out = -0.5 * (self.dim * LOG_2PI + self._prec("logdet") + quad)
        return float(out[0]) if single else out

    def tilt(self, theta):
        t = self._check_theta(theta)
        return NormalMember(self.mean + self.cov @ t, self.cov, self.index)

    def sample(self, rng, count):
        if count < 0:
            raise ValueError("count must be nonnegative")
        z = rng.standard_normal((count, self.dim))
        return self.mean + z @ self._prec("sqrt")

    def char_fn_modulus_sup(self, theta, radii):
        self._check_theta(theta)
        r = np.asarray(radii, dtype=float)
        lam_min = float(np.linalg.eigvalsh(self.cov)[0])
        return np.exp(-0.5 * lam_min * r * r)

    def density_partial_l1(self, theta, axis):
        # d p/dx_l = -(cov^{-1}(x - mu))_l p(x), so the integral reduces to
        # E|Y| with Y ~ N(0, (cov^{-1})_{ll}); integrate that scalar law.
        from scipy.integrate import quad

        self._check_theta(theta)
        v = float(self._prec("inv")[axis, axis])
        sd = math.sqrt(v)
        val, _ = quad(
            lambda y: 2.0 * y * math.exp(-0.5 * y * y / v) / (sd * math.sqrt(2.0 * math.pi)),
            0.0,
            40.0 * sd,
        )
        return val

    def fourth_central_moment(self, theta):
        self._check_theta(theta)
        g = self.cov
        return float(2.0 * np.trace(g @ g) + np.trace(g) ** 2)

    def third_central_moment_tensor(self, theta):
        self._check_theta(theta)
        d = self.dim
        return np.zeros((d, d, d))


# ---------------------------------------------------------------------------
# Gamma members
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaMember(Member):
    """Gamma(shape, scale) on (0, inf), shape > 2 strictly, scale > 0.

    kappa(theta) = -shape * log(1 - theta * scale) for theta < 1 / scale.
    """

    shape: float
    scale: float
    index: int = 0

    kind = "gamma"

    def __post_init__(self):
        if not (self.shape > 2.0):
            raise ValueError(f"gamma shape must exceed 2, got {self.shape}")
        if not (self.scale > 0.0):
            raise ValueError(f"gamma scale must be positive, got {self.scale}")

    @property
    def dim(self):
        return 1

    @property
    def domain(self):
        return HalfLine(1.0 / self.scale)

    def _theta_scalar(self, theta):
        return float(self._check_theta(theta)[0])

    def cgf(self, theta):
        th = self._theta_scalar(theta)
        return -self.shape * math.log1p(-th * self.scale)

    def cgf_grad(self, theta):
        th = self._theta_scalar(theta)
        return np.array([self.shape * self.scale / (1.0 - th * self.scale)])

    def cgf_hess(self, theta):
        th = self._theta_scalar(theta)
        return np.array([[self.shape * self.scale**2 / (1.0 - th * self.scale) ** 2]])

    def log_density(self, x):
        pts, single = self._points(x)
        v = pts[:, 0]
        out = np.full(v.shape, -np.inf)
        pos = v > 0.0
        k, t = self.shape, self.scale
        out[pos] = (k - 1.0) * np.log(v[pos]) - v[pos] / t - math.lgamma(k) - k * math.log(t)
        return float(out[0]) if single else out

    def tilt(self, theta):
        th = self._theta_scalar(theta)
        return GammaMember(self.shape, self.scale / (1.0 - th * self.scale), self.index)

    def sample(self, rng, count):
        if count < 0:
            raise ValueError("count must be nonnegative")
        return rng.gamma(self.shape, self.scale, size=(count, 1))

    def char_fn_modulus_sup(self, theta, radii):
        u = self.tilt(theta).scale
        r = np.asarray(radii, dtype=float)
        return (1.0 + (u * r) ** 2) ** (-0.5 * self.shape)

    def density_partial_l1(self, theta, axis):
        # p'(x) = p(x) ((k-1)/x - 1/u) changes sign exactly at the mode
        # (k-1) u, so split the quadrature there.
        from scipy.integrate import quad

        if axis != 0:
            raise ValueError("gamma members are one-dimensional")
        tilted = self.tilt(theta)
        k, u = tilted.shape, tilted.scale
        mode = (k - 1.0) * u

        def abs_deriv(x):
            return abs((k - 1.0) / x - 1.0 / u) * math.exp(
                (k - 1.0) * math.log(x) - x / u - math.lgamma(k) - k * math.log(u)
            )

        hi = k * u + 40.0 * math.sqrt(k) * u
        left, _ = quad(abs_deriv, 0.0, mode, limit=200)
        right, _ = quad(abs_deriv, mode, hi, limit=200)
        return left + right

    def fourth_central_moment(self, theta):
        tilted = self.tilt(theta)
        k, u = tilted.shape, tilted.scale
        return 3.0 * k * (k + 2.0) * u**4

    def third_central_moment_tensor(self, theta):
        tilted = self.tilt(theta)
        return np.array([[[2.0 * tilted.shape * tilted.scale**3]]])


# ---------------------------------------------------------------------------
# Sequence builders and validation
# ---------------------------------------------------------------------------

def gamma_family(shapes, scale):
    """Members Gamma(shapes[j], scale) sharing one scale."""
    return [GammaMember(float(k), float(scale), index=j) for j, k in enumerate(shapes)]


def normal_family(means, covs):
    """Normal members; covs may be a single matrix shared by every member."""
    means = list(means)
    if isinstance(covs, (list, tuple)) and len(covs) != 1 and len(covs) != len(means):
        raise ValueError("covs must be shared or match means in length")
    if not isinstance(covs, (list, tuple)):
        covs = [covs]
    if len(covs) == 1:
        covs = covs * len(means)
    return [NormalMember(m, c, index=j) for j, (m, c) in enumerate(zip(means, covs))]


def validate_members(members):
    """Check the structural conventions: a nonempty homogeneous sequence with a
    common cgf domain (same kind and dimension; Gamma members share the scale).
    """
    if len(members) == 0:
        raise ValueError("member sequence is empty")
    first = members[0]
    for m in members:
        if type(m) is not type(first):
            raise UnsupportedFamilyError("mixed-kind member sequences are not supported")
        if m.dim != first.dim:
            raise ValueError("members have inconsistent dimensions")
    if isinstance(first, GammaMember):
        scales = {m.scale for m in members}
        if len(scales) != 1:
            raise UnsupportedFamilyError("gamma members must share a single scale")
    return members
