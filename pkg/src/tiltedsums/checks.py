"""Numeric validation of the uniformity assumptions behind the expansions.

Every check evaluates a family sequence over a compact box K strictly inside
the cgf domain and reports a pass flag plus witness numbers:

  cv        covariances of tilted members have eigenvalues bounded away
            from 0 and infinity over K;
  am4       fourth absolute central moments stay below a configured ceiling;
  cf_decay  the characteristic function obeys |cf(t)| <= C_K / ||t||, with
            C_K the largest L1 norm of a density partial derivative
            (computed by quadrature);
  cf3       sup over ||t|| > beta of |cf(t)| stays strictly below 1
            (grid scan plus the analytic C_K / t_max tail bound);
  uf        one-dimensional gamma means are squeezed between the envelope
            functions shape_lo t/(1-theta t) and shape_hi t/(1-theta t).

Common support and positivity of the member densities hold by construction
(homogeneous kinds, open supports), so the report carries a structural
"supp" entry rather than a numeric one.  All evaluations are pure grid
computations: identical inputs give identical witnesses.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedFamilyError
from .families import GammaMember, HalfLine, validate_members


@dataclass(frozen=True)
class ThetaBox:
    """Compact axis-aligned box K inside the cgf domain."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi):
            raise ValueError("box corners have different lengths")
        if any(l > h for l, h in zip(lo, hi)):
            raise ValueError("box has negative extent")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    def grid(self, points_per_axis=33):
        axes = [np.linspace(l, h, points_per_axis) for l, h in zip(self.lo, self.hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @property
    def center(self):
        return np.array([(l + h) / 2.0 for l, h in zip(self.lo, self.hi)])


def theta_box_from_solutions(thetas, members, inflate=0.2, boundary_margin=1e-3):
    """Bounding box of observed tilt parameters, inflated and clipped
    strictly inside the domain (margin from a half-line boundary)."""
    arr = np.atleast_2d(np.asarray(thetas, dtype=float))
    lo = arr.min(axis=0)
    hi = arr.max(axis=0)
    pad = inflate * np.maximum(hi - lo, 1.0)
    lo = lo - pad
    hi = hi + pad
    dom = members[0].domain
    if isinstance(dom, HalfLine):
        hi = np.minimum(hi, dom.upper - boundary_margin)
        lo = np.minimum(lo, hi - 1e-9)
    return ThetaBox(tuple(lo), tuple(hi))


@dataclass
class CheckResult:
    name: str
    passed: bool
    witnesses: dict = field(default_factory=dict)


@dataclass
class AssumptionReport:
    entries: list
    theta_box: ThetaBox

    def to_text(self):
        lines = []
        width = max(len(e.name) for e in self.entries)
        for e in self.entries:
            status = "PASS" if e.passed else "FAIL"
            info = "  ".join(f"{k}={v:.6g}" for k, v in e.witnesses.items())
            lines.append(f"{e.name:<{width}}  {status}  {info}".rstrip())
        return "\n".join(lines)

    def csv_rows(self):
        rows = ["assumption,passed,witness1,witness2"]
        for e in self.entries:
            vals = [f"{v:.17g}" for v in e.witnesses.values()][:2]
            vals += [""] * (2 - len(vals))
            rows.append(f"{e.name},{str(e.passed).lower()},{vals[0]},{vals[1]}")
        return "\n".join(rows) + "\n"

    @property
    def all_passed(self):
        return all(e.passed for e in self.entries)


def _theta_grid(members, box, points_per_axis):
    if box.dim != members[0].dim:
        raise ValueError("box dimension does not match the members")
    grid = box.grid(points_per_axis)
    for theta in grid:
        if not members[0].domain.contains(theta):
            raise ValueError(f"grid point {theta} is outside the cgf domain")
    return grid


def check_cv(members, box, points_per_axis=33, eig_floor=1e-8, eig_ceiling=1e12):
    """Covariance eigenvalues of tilted members over K."""
    grid = _theta_grid(members, box, points_per_axis)
    lam_min = math.inf
    lam_max = -math.inf
    for member in members:
        for theta in grid:
            w = np.linalg.eigvalsh(member.cgf_hess(theta))
            lam_min = min(lam_min, float(w[0]))
            lam_max = max(lam_max, float(w[-1]))
    passed = eig_floor < lam_min <= lam_max < eig_ceiling
    return CheckResult("cv", passed, {"lambda_min": lam_min, "lambda_max": lam_max})


def check_am4(members, box, points_per_axis=33, ceiling=1e6):
    """Fourth absolute central moments of tilted members over K."""
    grid = _theta_grid(members, box, points_per_axis)
    worst = -math.inf
    for member in members:
        for theta in grid:
            worst = max(worst, float(member.fourth_central_moment(theta)))
    passed = math.isfinite(worst) and worst < ceiling
    return CheckResult("am4", passed, {"max_fourth_moment": worst, "ceiling": ceiling})


def _theta_list_for_cf(members, box, points_per_axis):
    """Tilting a normal member shifts its mean only, so its cf modulus and
    density-derivative norms do not depend on theta; one evaluation point
    suffices.  Other kinds are scanned over the full grid."""
    if all(m.kind == "normal" for m in members):
        return [box.center]
    return list(_theta_grid(members, box, points_per_axis))


def _sup_partial_l1(members, box, points_per_axis):
    thetas = _theta_list_for_cf(members, box, points_per_axis)
    worst = -math.inf
    for member in members:
        for theta in thetas:
            for axis in range(member.dim):
                worst = max(worst, float(member.density_partial_l1(theta, axis)))
    return worst


def check_cf_decay(members, box, points_per_axis=33, r_min=1.0, r_max=100.0, r_points=512):
    """Characteristic-function decay |cf(t)| <= C_K / ||t|| on ||t|| in
    [r_min, r_max], with C_K = sup of L1 norms of density partials."""
    c_k = _sup_partial_l1(members, box, points_per_axis)
    radii = np.geomspace(r_min, r_max, r_points)
    worst_ratio = -math.inf
    for member in members:
        for theta in _theta_list_for_cf(members, box, points_per_axis):
            modulus = np.asarray(member.char_fn_modulus_sup(theta, radii), dtype=float)
            worst_ratio = max(worst_ratio, float(np.max(modulus * radii / c_k)))
    passed = worst_ratio <= 1.0 + 1e-9
    return CheckResult("cf_decay", passed, {"c_k": c_k, "max_bound_ratio": worst_ratio})


def check_cf3(members, box, beta=0.5, points_per_axis=33, r_max=100.0, r_points=512):
    """Strict cf separation from 1: epsilon = sup over ||t|| > beta of
    |cf(t)|, combining a grid scan on [beta, r_max] with the analytic
    C_K / r_max bound beyond."""
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    radii = np.linspace(beta, r_max, r_points)
    eps = -math.inf
    for member in members:
        for theta in _theta_list_for_cf(members, box, points_per_axis):
            modulus = np.asarray(member.char_fn_modulus_sup(theta, radii), dtype=float)
            eps = max(eps, float(np.max(modulus)))
    tail = _sup_partial_l1(members, box, points_per_axis) / r_max
    eps = max(eps, tail)
    return CheckResult("cf3", eps < 1.0, {"epsilon": eps, "beta": beta})


def check_uf(members, box=None, shape_lo=None, shape_hi=None, points_per_axis=33):
    """Envelope squeeze for one-dimensional gamma means.

    With f_lo(theta) = shape_lo t/(1-theta t) and f_hi the same with
    shape_hi, verifies f_lo <= m_j <= f_hi on a theta grid; the witness is
    the worst margin (nonnegative means the squeeze holds).
    """
    validate_members(members)
    if not isinstance(members[0], GammaMember):
        raise UnsupportedFamilyError("envelope check is defined for gamma members only")
    t = members[0].scale
    if box is None:
        box = ThetaBox((-2.0 / t,), (1.0 / t - 1e-3,))
    grid = _theta_grid(members, box, points_per_axis)
    k_lo = min(m.shape for m in members) if shape_lo is None else float(shape_lo)
    k_hi = max(m.shape for m in members) if shape_hi is None else float(shape_hi)

    worst = math.inf
    for member in members:
        for theta in grid:
            m_val = float(member.cgf_grad(theta)[0])
            # Same operation order as the member gradient, so equal shapes
            # give an exactly zero margin.
            denom = 1.0 - float(theta[0]) * t
            f_lo = k_lo * t / denom
            f_hi = k_hi * t / denom
            worst = min(worst, m_val - f_lo, f_hi - m_val)
    return CheckResult("uf", worst >= 0.0, {"worst_margin": worst, "shape_lo": k_lo, "shape_hi": k_hi})


def run_assumption_checks(members, box, beta=0.5, points_per_axis=33, am4_ceiling=1e6,
                          r_max=100.0, r_points=512):
    """Full report over a family sequence: structural support entry plus the
    numeric battery (and the envelope check for gamma sequences)."""
    validate_members(members)
    entries = [CheckResult("supp", True, {})]
    entries.append(check_cv(members, box, points_per_axis))
    entries.append(check_am4(members, box, points_per_axis, ceiling=am4_ceiling))
    entries.append(check_cf_decay(members, box, points_per_axis, r_max=r_max, r_points=r_points))
    entries.append(
        check_cf3(members, box, beta=beta, points_per_axis=points_per_axis, r_max=r_max, r_points=r_points)
    )
    if isinstance(members[0], GammaMember):
        entries.append(check_uf(members, box=None, points_per_axis=points_per_axis))
    return AssumptionReport(entries, box)
