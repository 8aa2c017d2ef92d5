"""Linear PCA: covariance, cyclic Jacobi eigendecomposition, projection, recovery."""

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import BadK, NoConvergence, NotSymmetric, PcaError, TooFewRows

logger = logging.getLogger(__name__)

MAX_SWEEPS = 100
OFF_DIAGONAL_TOL = 1e-12
SYMMETRY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PcaModel:
    mean: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self):
        return len(self.mean)


def _as_matrix(data):
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise PcaError(f'expected a 2-D matrix, got shape {data.shape}')
    return data


def covariance(data, center=True):
    """X^T X / (N - 1), with X mean-centred column-wise when ``center`` is set."""
    data = _as_matrix(data)
    n_rows = data.shape[0]
    if n_rows < 2:
        raise TooFewRows(f'covariance needs at least 2 rows, got {n_rows}')
    x = data - data.mean(axis=0) if center else data
    cov = x.T @ x / (n_rows - 1)
    return 0.5 * (cov + cov.T)


def _rotate(matrix, vectors, p, q):
    """Zero matrix[p, q] with one Jacobi rotation, accumulating it into vectors."""
    apq = matrix[p, q]
    theta = (matrix[q, q] - matrix[p, p]) / (2.0 * apq)
    if abs(theta) > 1e150:
        t = 1.0 / (2.0 * theta)
    else:
        t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c

    col_p = matrix[:, p].copy()
    col_q = matrix[:, q].copy()
    matrix[:, p] = c * col_p - s * col_q
    matrix[:, q] = s * col_p + c * col_q

    row_p = matrix[p, :].copy()
    row_q = matrix[q, :].copy()
    matrix[p, :] = c * row_p - s * row_q
    matrix[q, :] = s * row_p + c * row_q
    matrix[p, q] = matrix[q, p] = 0.0

    vec_p = vectors[:, p].copy()
    vec_q = vectors[:, q].copy()
    vectors[:, p] = c * vec_p - s * vec_q
    vectors[:, q] = s * vec_p + c * vec_q


def _off_norm(matrix):
    return float(np.linalg.norm(matrix - np.diag(np.diag(matrix))))


def canonical_signs(vectors):
    """Flip each column so its largest-magnitude entry is positive."""
    vectors = np.array(vectors, dtype=float)
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def eigen_sym(matrix, max_sweeps=MAX_SWEEPS, tol=OFF_DIAGONAL_TOL):
    """Eigenvalues (descending) and orthonormal eigenvectors (columns) of a
    symmetric matrix by cyclic Jacobi sweeps."""
    a = _as_matrix(matrix).copy()
    n = a.shape[0]
    if a.shape != (n, n):
        raise NotSymmetric(f'matrix must be square, got shape {a.shape}')
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    asymmetry = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asymmetry > SYMMETRY_TOL * scale:
        raise NotSymmetric(f'matrix is not symmetric (max |A - A^T| = {asymmetry:.3g})')
    a = 0.5 * (a + a.T)

    vectors = np.eye(n)
    threshold = tol * float(np.linalg.norm(a))
    sweeps = 0
    while _off_norm(a) > threshold:
        if sweeps == max_sweeps:
            raise NoConvergence(
                f'off-diagonal norm {_off_norm(a):.3g} above {threshold:.3g} after {max_sweeps} sweeps'
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] != 0.0:
                    _rotate(a, vectors, p, q)
        sweeps += 1

    values = np.diag(a).copy()
    order = np.argsort(-values, kind='stable')
    logger.debug(f'Jacobi converged in {sweeps} sweeps for a {n}x{n} matrix')
    return values[order], canonical_signs(vectors[:, order])


def pca_fit(data):
    data = _as_matrix(data)
    values, vectors = eigen_sym(covariance(data))
    model = PcaModel(mean=data.mean(axis=0), eigenvalues=values, eigenvectors=vectors)
    logger.info(
        f'Fitted PCA on {data.shape[0]}x{data.shape[1]}; leading eigenvalues '
        f'{", ".join(f"{v:.4g}" for v in values[:3])}'
    )
    return model


def _check_k(model, k):
    if not 1 <= k <= model.dim:
        raise BadK(f'k must lie in [1, {model.dim}], got {k}')


def pca_project(model, data, k):
    _check_k(model, k)
    return (_as_matrix(data) - model.mean) @ model.eigenvectors[:, :k]


def pca_recover(model, data, k):
    """Rank-k reconstruction of the centred data, X V_k V_k^T."""
    _check_k(model, k)
    basis = model.eigenvectors[:, :k]
    return (_as_matrix(data) - model.mean) @ basis @ basis.T


def reconstruction_error(model, data, k):
    """Frobenius norm of centred data minus its rank-k recovery."""
    centered = _as_matrix(data) - model.mean
    return float(np.linalg.norm(centered - pca_recover(model, data, k)))


def explained_variance_ratio(model):
    total = float(np.sum(model.eigenvalues))
    if total <= 0:
        return np.zeros_like(model.eigenvalues)
    return model.eigenvalues / total


# ============ EXPORT ============

def _fmt(value):
    return format(float(value), '.17g')


def write_model_csv(model, stream):
    """Three blocks: mean, eigenvalues, eigenvectors (one row per component)."""
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(['block', 'index'] + [f'd{j + 1}' for j in range(model.dim)])
    writer.writerow(['mean', 0] + [_fmt(v) for v in model.mean])
    writer.writerow(['eigenvalues', 0] + [_fmt(v) for v in model.eigenvalues])
    for k in range(model.dim):
        writer.writerow(['eigenvector', k + 1] + [_fmt(v) for v in model.eigenvectors[:, k]])


def read_model_csv(stream):
    rows = [row for row in csv.reader(stream) if row]
    blocks = {'mean': None, 'eigenvalues': None}
    vectors = []
    for row in rows[1:]:
        values = [float(v) for v in row[2:]]
        if row[0] == 'eigenvector':
            vectors.append(values)
        elif row[0] in blocks:
            blocks[row[0]] = values
        else:
            raise PcaError(f'unknown model block {row[0]!r}')
    if blocks['mean'] is None or blocks['eigenvalues'] is None or not vectors:
        raise PcaError('model file is missing a block')
    return PcaModel(
        mean=np.array(blocks['mean']),
        eigenvalues=np.array(blocks['eigenvalues']),
        eigenvectors=np.array(vectors).T,
    )
