"""Elastic maps: a rectangular elastic grid fitted to data by splitting optimization.

Energy of a grid with node positions y and a partition K of the data:

    U_A = (1/N) sum_j sum_{x in K_j} |x - y_j|^2          approximation
    U_E = lam * sum_edges w_e |y_a - y_b|^2               stretching
    U_R = mu  * sum_ribs  w_r |y_begin + y_end - 2 y_c|^2  bending

Each iteration reassigns points to their nearest node, then solves the sparse-in-
structure but small dense SPD system for the positions that minimise U with the
partition fixed, like a k-means step with springs. Nodes are numbered row-major:
node (r, c) has index r * cols + c.
"""

import csv
import logging
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.spatial.distance import cdist

from .exceptions import (
    BadPartition, DegenerateData, DimensionMismatch, ElasticMapError, SingularSystem,
)
from .pca import pca_fit, pca_project

logger = logging.getLogger(__name__)

DEFAULT_MULTIPLIERS = (16.0, 4.0, 1.0)


# ============ LATTICE ============

def lattice_edges(rows, cols):
    index = np.arange(rows * cols).reshape(rows, cols)
    horizontal = np.column_stack([index[:, :-1].ravel(), index[:, 1:].ravel()])
    vertical = np.column_stack([index[:-1, :].ravel(), index[1:, :].ravel()])
    return np.vstack([horizontal, vertical]).astype(int).reshape(-1, 2)


def lattice_ribs(rows, cols):
    index = np.arange(rows * cols).reshape(rows, cols)
    horizontal = np.column_stack([
        index[:, :-2].ravel(), index[:, 1:-1].ravel(), index[:, 2:].ravel(),
    ])
    vertical = np.column_stack([
        index[:-2, :].ravel(), index[1:-1, :].ravel(), index[2:, :].ravel(),
    ])
    return np.vstack([horizontal, vertical]).astype(int).reshape(-1, 3)


def _difference_operator(pairs, n_nodes, stencil):
    operator = np.zeros((len(pairs), n_nodes))
    for column, coefficient in enumerate(stencil):
        np.add.at(operator, (np.arange(len(pairs)), pairs[:, column]), coefficient)
    return operator


# ============ DOMAIN TYPES ============

@dataclass(frozen=True, eq=False)
class ElasticGraph:
    rows: int
    cols: int
    nodes: np.ndarray
    lam: float = 0.05
    mu: float = 0.5
    edge_weights: np.ndarray = None
    rib_weights: np.ndarray = None
    edges: np.ndarray = field(init=False, repr=False)
    ribs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ElasticMapError(f'grid must be at least 1x1, got {self.rows}x{self.cols}')
        if self.lam < 0 or self.mu < 0:
            raise ElasticMapError(f'lambda and mu must be non-negative, got {self.lam}, {self.mu}')
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[0] != self.rows * self.cols:
            raise DimensionMismatch(
                f'{self.rows}x{self.cols} grid needs {self.rows * self.cols} node rows, got {nodes.shape}'
            )
        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'edges', lattice_edges(self.rows, self.cols))
        object.__setattr__(self, 'ribs', lattice_ribs(self.rows, self.cols))
        for name, count in (('edge_weights', len(self.edges)), ('rib_weights', len(self.ribs))):
            weights = getattr(self, name)
            weights = np.ones(count) if weights is None else np.array(weights, dtype=float)
            if weights.shape != (count,) or np.any(weights < 0):
                raise ElasticMapError(f'{name} must be {count} non-negative values')
            object.__setattr__(self, name, weights)

    @property
    def n_nodes(self):
        return self.rows * self.cols

    @property
    def dim(self):
        return self.nodes.shape[1]

    @property
    def internal_coords(self):
        r, c = np.divmod(np.arange(self.n_nodes), self.cols)
        return np.column_stack([r, c]).astype(float)

    def with_nodes(self, nodes):
        return replace(self, nodes=nodes)

    def stretching_operator(self):
        diff = _difference_operator(self.edges, self.n_nodes, (1.0, -1.0))
        return diff.T @ (self.edge_weights[:, None] * diff)

    def bending_operator(self):
        diff = _difference_operator(self.ribs, self.n_nodes, (1.0, -2.0, 1.0))
        return diff.T @ (self.rib_weights[:, None] * diff)


class Energy(NamedTuple):
    total: float
    approximation: float
    stretching: float
    bending: float


@dataclass(frozen=True)
class FitReport:
    iterations: int
    energy_trace: tuple
    converged: bool
    phases: tuple = ()


# ============ INITIALIZATION ============

def init_grid(data, rows, cols, margin=0.05, lam=0.05, mu=0.5):
    """Regular lattice on the plane of the first two principal components,
    spanning the data's PC1/PC2 score range widened by ``margin`` per side.
    Columns run along PC1, rows along PC2."""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] < 3:
        raise DegenerateData(f'need at least 3 data rows, got shape {data.shape}')
    if rows < 2 or cols < 2:
        raise ElasticMapError(f'grid must be at least 2x2, got {rows}x{cols}')
    if float(np.sum(np.var(data, axis=0))) == 0.0:
        raise DegenerateData('data has zero total variance')

    model = pca_fit(data)
    k = min(2, model.dim)
    scores = pca_project(model, data, k)
    axes = np.zeros((2, model.dim))
    axes[:k] = model.eigenvectors[:, :k].T
    if k == 1:
        scores = np.column_stack([scores, np.zeros(len(scores))])

    low = scores.min(axis=0)
    high = scores.max(axis=0)
    spread = high - low
    low = low - margin * spread
    high = high + margin * spread
    along_pc1 = np.linspace(low[0], high[0], cols)
    along_pc2 = np.linspace(low[1], high[1], rows)

    r, c = np.divmod(np.arange(rows * cols), cols)
    nodes = model.mean + np.outer(along_pc1[c], axes[0]) + np.outer(along_pc2[r], axes[1])
    logger.info(f'Initialised {rows}x{cols} grid on the PC1/PC2 plane in {model.dim} dimensions')
    return ElasticGraph(rows=rows, cols=cols, nodes=nodes, lam=lam, mu=mu)


# ============ ENERGY ============

def _check_data(graph, data):
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[1] != graph.dim:
        raise DimensionMismatch(f'data shape {data.shape} does not match map dimension {graph.dim}')
    return data


def assign(graph, data):
    """Nearest node per data row; ties go to the lowest node index."""
    data = _check_data(graph, data)
    return np.argmin(cdist(data, graph.nodes, 'sqeuclidean'), axis=1)


def energy(graph, data, partition, lam=None, mu=None):
    data = _check_data(graph, data)
    partition = np.asarray(partition)
    if (partition.shape != (data.shape[0],) or not np.issubdtype(partition.dtype, np.integer)
            or np.any(partition < 0) or np.any(partition >= graph.n_nodes)):
        raise BadPartition(f'partition must give a node in [0, {graph.n_nodes}) for each of {len(data)} rows')
    lam = graph.lam if lam is None else lam
    mu = graph.mu if mu is None else mu
    nodes = graph.nodes

    residual = data - nodes[partition]
    approximation = float(np.sum(residual * residual)) / len(data)
    stretch = nodes[graph.edges[:, 0]] - nodes[graph.edges[:, 1]]
    stretching = lam * float(np.sum(graph.edge_weights * np.sum(stretch * stretch, axis=1)))
    bend = nodes[graph.ribs[:, 0]] + nodes[graph.ribs[:, 2]] - 2.0 * nodes[graph.ribs[:, 1]]
    bending = mu * float(np.sum(graph.rib_weights * np.sum(bend * bend, axis=1)))
    return Energy(approximation + stretching + bending, approximation, stretching, bending)


# ============ OPTIMIZATION ============

def default_schedule(lam0, mu0, multipliers=DEFAULT_MULTIPLIERS):
    """Softening phases from stiff to the target coefficients."""
    return [(lam0 * m, mu0 * m) for m in multipliers]


def _solve_positions(stiffness, data, partition, n_nodes):
    n_rows = data.shape[0]
    counts = np.bincount(partition, minlength=n_nodes)
    sums = np.zeros((n_nodes, data.shape[1]))
    np.add.at(sums, partition, data)
    system = stiffness + np.diag(counts / n_rows)
    try:
        factor = cho_factor(system)
    except LinAlgError:
        empty = int(np.sum(counts == 0))
        raise SingularSystem(f'position system is singular ({empty} empty nodes); use lambda > 0')
    return cho_solve(factor, sums / n_rows)


def fit(graph, data, schedule=None, max_iter=100, tol=1e-6):
    """Fit node positions through the softening schedule; returns the graph at the
    final phase's coefficients and the energy trace of every iteration."""
    data = _check_data(graph, data)
    if schedule is None:
        schedule = default_schedule(graph.lam, graph.mu)
    stretching = graph.stretching_operator()
    bending = graph.bending_operator()

    nodes = graph.nodes.copy()
    trace, phases = [], []
    converged = False
    for phase, (lam, mu) in enumerate(schedule):
        if lam < 0 or mu < 0:
            raise ElasticMapError(f'phase {phase} has negative coefficients ({lam}, {mu})')
        stiffness = lam * stretching + mu * bending
        current = graph.with_nodes(nodes)
        partition = None
        previous = None
        converged = False
        for iteration in range(max_iter):
            fresh = assign(current, data)
            if partition is not None and np.array_equal(fresh, partition):
                converged = True
                break
            partition = fresh
            nodes = _solve_positions(stiffness, data, partition, graph.n_nodes)
            current = graph.with_nodes(nodes)
            terms = energy(current, data, partition, lam=lam, mu=mu)
            trace.append(terms)
            phases.append(phase)
            logger.debug(f'phase {phase} iteration {iteration}: U={terms.total:.6g}')
            if previous is not None and abs(previous - terms.total) <= tol * abs(previous):
                converged = True
                break
            previous = terms.total
        if converged:
            logger.info(f'Phase {phase} (lambda={lam:g}, mu={mu:g}) converged, U={trace[-1].total:.6g}')
        else:
            logger.warning(f'Phase {phase} (lambda={lam:g}, mu={mu:g}) stopped at max_iter={max_iter}')

    report = FitReport(
        iterations=len(trace),
        energy_trace=tuple(trace),
        converged=converged,
        phases=tuple(phases),
    )
    final_lam, final_mu = schedule[-1]
    return replace(graph, nodes=nodes, lam=final_lam, mu=final_mu), report


# ============ INTERNAL COORDINATES ============

def _segment_parameter(points, start, end):
    direction = end - start
    length2 = np.sum(direction * direction, axis=1)
    along = np.sum((points - start) * direction, axis=1)
    safe = np.where(length2 > 0, length2, 1.0)
    return np.where(length2 > 0, np.clip(along / safe, 0.0, 1.0), 0.0)


def _axis_offset(graph, points, nearest, position, extent, step):
    offset = np.zeros(len(points))
    for sign in (1, -1):
        valid = (position + sign >= 0) & (position + sign < extent)
        if not np.any(valid):
            continue
        neighbour = nearest[valid] + sign * step
        t = _segment_parameter(points[valid], graph.nodes[nearest[valid]], graph.nodes[neighbour])
        offset[valid] += sign * t
    return offset


def project_internal_many(graph, points):
    """(r, c) lattice coordinates: nearest node plus the clamped projections onto
    its incident lattice segments along each axis."""
    points = _check_data(graph, np.atleast_2d(points))
    nearest = assign(graph, points)
    r0, c0 = np.divmod(nearest, graph.cols)
    r = r0 + _axis_offset(graph, points, nearest, r0, graph.rows, graph.cols)
    c = c0 + _axis_offset(graph, points, nearest, c0, graph.cols, 1)
    return np.column_stack([r, c])


def project_internal(graph, point):
    r, c = project_internal_many(graph, np.asarray(point, dtype=float)[None, :])[0]
    return float(r), float(c)


# ============ EXPORT ============

def _fmt(value):
    return format(float(value), '.17g')


def write_map_csv(graph, stream):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(['meta', graph.rows, graph.cols, _fmt(graph.lam), _fmt(graph.mu), graph.dim])
    for (r, c), position in zip(graph.internal_coords.astype(int), graph.nodes):
        writer.writerow(['node', r, c] + [_fmt(v) for v in position])
    for (a, b), weight in zip(graph.edges, graph.edge_weights):
        writer.writerow(['edge', a, b, _fmt(weight)])
    for (begin, center, end), weight in zip(graph.ribs, graph.rib_weights):
        writer.writerow(['rib', begin, center, end, _fmt(weight)])


def read_map_csv(stream):
    meta = None
    nodes, edges, edge_weights, ribs, rib_weights = [], [], [], [], []
    for row in csv.reader(stream):
        if not row:
            continue
        kind = row[0]
        if kind == 'meta':
            meta = (int(row[1]), int(row[2]), float(row[3]), float(row[4]))
        elif kind == 'node':
            nodes.append([float(v) for v in row[3:]])
        elif kind == 'edge':
            edges.append([int(row[1]), int(row[2])])
            edge_weights.append(float(row[3]))
        elif kind == 'rib':
            ribs.append([int(row[1]), int(row[2]), int(row[3])])
            rib_weights.append(float(row[4]))
        else:
            raise ElasticMapError(f'unknown map row kind {kind!r}')
    if meta is None:
        raise ElasticMapError('map file has no meta row')
    rows, cols, lam, mu = meta
    graph = ElasticGraph(
        rows=rows, cols=cols, nodes=np.array(nodes), lam=lam, mu=mu,
        edge_weights=np.array(edge_weights) if edges else None,
        rib_weights=np.array(rib_weights) if ribs else None,
    )
    if edges and not np.array_equal(np.array(edges), graph.edges):
        raise ElasticMapError('edge list does not match the lattice')
    if ribs and not np.array_equal(np.array(ribs), graph.ribs):
        raise ElasticMapError('rib list does not match the lattice')
    return graph


FIT_REPORT_COLUMNS = ['iteration', 'phase', 'total', 'approximation', 'stretching', 'bending']


def write_fit_report(report, stream):
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(FIT_REPORT_COLUMNS)
    for iteration, (phase, terms) in enumerate(zip(report.phases, report.energy_trace), start=1):
        writer.writerow([iteration, phase] + [_fmt(v) for v in terms])
