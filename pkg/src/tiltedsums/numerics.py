"""Small shared numerical helpers.

All symmetric-matrix functional calculus (square roots, inverses, log
determinants) goes through a single guarded eigendecomposition so that
near-singular covariances fail loudly in one place instead of producing
NaNs downstream.
"""

import numpy as np

from .errors import DegenerateCovarianceError

# Eigenvalues below REL_EIG_FLOOR * lambda_max are treated as a hard error.
REL_EIG_FLOOR = 1e-12

LOG_2PI = float(np.log(2.0 * np.pi))


def as_vector(x, dim=None):
    """Coerce a scalar or sequence to a float vector of shape (d,)."""
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got array of shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"expected a vector of length {dim}, got {v.shape[0]}")
    return v


def as_matrix(m, dim=None):
    """Coerce a scalar or nested sequence to a float matrix of shape (d, d)."""
    a = np.asarray(m, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise ValueError(f"expected a {dim}x{dim} matrix, got {a.shape}")
    return a


def check_symmetric(m, tol=1e-10):
    a = as_matrix(m)
    if not np.allclose(a, a.T, rtol=tol, atol=tol):
        raise ValueError("matrix is not symmetric")
    return a


def guarded_eigh(mat, rel_floor=REL_EIG_FLOOR):
    """Eigendecomposition of a symmetric positive definite matrix.

    Raises DegenerateCovarianceError when the spectrum is not usable for
    square roots / inverses (lambda_min < rel_floor * lambda_max).
    """
    a = check_symmetric(mat)
    w, q = np.linalg.eigh(a)
    if w[-1] <= 0.0 or w[0] < rel_floor * w[-1]:
        raise DegenerateCovarianceError(
            f"matrix numerically singular: eigenvalues in [{w[0]:.3e}, {w[-1]:.3e}]"
        )
    return w, q


def sym_sqrt(mat):
    """Symmetric square root S of a SPD matrix, S @ S = mat."""
    w, q = guarded_eigh(mat)
    return (q * np.sqrt(w)) @ q.T


def sym_inv_sqrt(mat):
    """Symmetric inverse square root B of a SPD matrix, B @ mat @ B = I."""
    w, q = guarded_eigh(mat)
    return (q / np.sqrt(w)) @ q.T


def sym_inv(mat):
    w, q = guarded_eigh(mat)
    return (q / w) @ q.T


def sym_logdet(mat):
    w, _ = guarded_eigh(mat)
    return float(np.sum(np.log(w)))


def tensor_grid(lo, hi, points_per_axis, dim):
    """Uniform tensor-product grid over a box, returned as an (N, dim) array."""
    axes = [np.linspace(lo, hi, points_per_axis) for _ in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)
