"""Shared fixtures, including the documented negative-control members that
the assumption checks must reject.
"""

import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

SRC = Path(__file__).resolve().parents[1] / "src"
if str(SRC) not in sys.path:
    try:
        import tiltedsums  # noqa: F401
    except ImportError:
        sys.path.insert(0, str(SRC))

from tiltedsums.families import AllSpace, Member  # noqa: E402


@dataclass(frozen=True)
class PointMassMember(Member):
    """Degenerate distribution concentrated at one point: the documented
    violator for the characteristic-function checks.

    It is an honest member of the tilting framework (its cgf is
    theta * location, so tilting leaves it unchanged), but it has no
    Lebesgue density and its characteristic function has modulus 1
    everywhere, so both the decay bound |cf| <= C/||t|| and the strict
    separation sup |cf| < 1 genuinely fail.  density_partial_l1 returns a
    vacuous finite placeholder (there is no density to differentiate) so
    the validators can run to their failure verdicts instead of erroring.
    """

    location: float = 1.0
    index: int = 0

    kind = "point_mass"

    @property
    def dim(self):
        return 1

    @property
    def domain(self):
        return AllSpace(1)

    def cgf(self, theta):
        return float(self._check_theta(theta)[0]) * self.location

    def cgf_grad(self, theta):
        self._check_theta(theta)
        return np.array([self.location])

    def cgf_hess(self, theta):
        self._check_theta(theta)
        return np.zeros((1, 1))

    def log_density(self, x):
        pts, single = self._points(x)
        out = np.full(pts.shape[0], -math.inf)
        return float(out[0]) if single else out

    def tilt(self, theta):
        self._check_theta(theta)
        return self

    def sample(self, rng, count):
        return np.full((count, 1), self.location)

    def char_fn_modulus_sup(self, theta, radii):
        return np.ones_like(np.asarray(radii, dtype=float))

    def density_partial_l1(self, theta, axis):
        return 1.0

    def fourth_central_moment(self, theta):
        return 0.0

    def third_central_moment_tensor(self, theta):
        return np.zeros((1, 1, 1))


@pytest.fixture
def point_mass_members():
    return [PointMassMember(1.0, index=j) for j in range(3)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
