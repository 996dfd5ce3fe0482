"""Dense symmetric linear algebra used by the PCA and discriminant modules.

Only two primitives live here: the 1/n-normalized sample covariance and a
symmetric eigendecomposition with a deterministic ordering and sign
convention. Orders stay small (at most the ambient feature dimension), so a
dense LAPACK solve is always appropriate.
"""

from typing import NamedTuple

import numpy as np

from ._validation import check_array


class EigenDecomposition(NamedTuple):
    """Eigenvalues sorted descending; column j of ``vectors`` pairs with ``values[j]``."""

    values: np.ndarray
    vectors: np.ndarray


def covariance(points):
    """Mean vector and 1/n-normalized covariance of the rows of ``points``.

    Returns
    -------
    mean : ndarray of shape (m,)
    cov : ndarray of shape (m, m)
        ``(1/n) * sum_i (x_i - mean)(x_i - mean)^T``, exactly symmetric.
    """
    pts = check_array(points, name="points")
    if pts.shape[0] < 1:
        raise ValueError("covariance requires at least one point")
    mean = pts.mean(axis=0)
    centered = pts - mean
    cov = centered.T @ centered / pts.shape[0]
    # BLAS can leave the two triangles a few ulps apart; enforce exact symmetry.
    cov = 0.5 * (cov + cov.T)
    return mean, cov


def sym_eigen(a, *, check=True):
    """Eigendecomposition of a symmetric matrix with deterministic output.

    Eigenvalues are sorted descending. Each eigenvector is scaled so its
    largest-magnitude component is positive (ties resolved by the lowest
    index), which makes the result reproducible across runs.

    Parameters
    ----------
    a : ndarray of shape (m, m)
        Symmetric matrix with finite entries.
    check : bool
        When True, verify symmetry up to a small tolerance before
        symmetrizing exactly.

    Raises
    ------
    ValueError
        If the input is not square or not symmetric.
    numpy.linalg.LinAlgError
        If the underlying iteration fails to converge (pathological input).
    """
    a = check_array(a, name="a")
    m = a.shape[0]
    if a.shape != (m, m):
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if check:
        scale = 1.0 + np.abs(a).max(initial=0.0)
        if np.abs(a - a.T).max(initial=0.0) > 1e-8 * scale:
            raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)

    values, vectors = np.linalg.eigh(a)
    values = values[::-1]
    vectors = vectors[:, ::-1]

    # Sign convention: largest-|component| entry of each eigenvector positive.
    anchor = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[anchor, np.arange(m)])
    signs[signs == 0] = 1.0
    vectors = vectors * signs

    return EigenDecomposition(np.ascontiguousarray(values), np.ascontiguousarray(vectors))
