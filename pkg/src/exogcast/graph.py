"""State-to-state mobility graph and a two-layer GCN forward pass.

Pipeline: average directed flows over dates, keep the top fraction of cells
as a binary adjacency, make it full rank by row-wise Gram-Schmidt, then
normalize with self-loops for the propagation ``A_hat X W``.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import DimensionError, ParameterError

RANK_TOL = 1e-10


@dataclass(frozen=True)
class FlowMatrix:
    regions: tuple
    mean_flow: np.ndarray


@dataclass(frozen=True)
class BinaryAdjacency:
    regions: tuple
    matrix: np.ndarray

    @property
    def rank(self):
        return int(np.linalg.matrix_rank(self.matrix))

    def to_csv(self, path):
        write_matrix_csv(path, self.regions, self.matrix)


@dataclass(frozen=True)
class GcnWeights:
    W0: np.ndarray
    W1: np.ndarray

    def __post_init__(self):
        for w in (self.W0, self.W1):
            if np.asarray(w).ndim != 2 or not np.all(np.isfinite(w)):
                raise DimensionError("GCN weights must be finite 2-d matrices")
        if np.shape(self.W0)[1] != np.shape(self.W1)[0]:
            raise DimensionError(f"W0 has {np.shape(self.W0)[1]} columns, W1 has {np.shape(self.W1)[0]} rows")


def aggregate_flows(records, regions):
    """Mean ``pop_flows`` per region pair over the dates present in ``records``.

    Pairs absent on a date count as zero flow; records naming a region not in
    ``regions`` are ignored.
    """
    regions = tuple(regions)
    index = {r: i for i, r in enumerate(regions)}
    total = np.zeros((len(regions), len(regions)))
    dates = set()
    for rec in records:
        dates.add(rec.date)
        i, j = index.get(rec.origin), index.get(rec.destination)
        if i is None or j is None:
            continue
        total[i, j] += rec.pop_flows
    if dates:
        total /= len(dates)
    return FlowMatrix(regions, total)


def _n_ones(fraction, n_cells):
    # round first so that e.g. 0.2 * 25 stays 5 rather than 5.000000000000001
    return min(n_cells, math.ceil(round(fraction * n_cells, 9)))


def binarize_top_fraction(flows, fraction=0.2, exclude_self_loops=False):
    """Set the ``ceil(fraction * N^2)`` largest cells to 1.

    Ties are broken in favor of the smaller (origin, destination) pair. With
    ``exclude_self_loops`` the diagonal is ranked last, so it only receives
    ones when the off-diagonal cells run out.
    """
    if not 0 < fraction <= 1:
        raise ParameterError("fraction must lie in (0, 1]")
    F = np.asarray(flows.mean_flow, dtype=float)
    N = F.shape[0]
    keys = -F.ravel()
    if exclude_self_loops:
        keys = keys.copy()
        keys[np.arange(N) * (N + 1)] = np.inf
    # stable sort on row-major order gives the lexicographic tie-break
    top = np.argsort(keys, kind="stable")[: _n_ones(fraction, N * N)]
    A = np.zeros(N * N)
    A[top] = 1.0
    return BinaryAdjacency(tuple(flows.regions), A.reshape(N, N))


def full_rank_correct(adj, tol=RANK_TOL):
    """Orthonormalize the rows with modified Gram-Schmidt.

    A row whose residual norm falls below ``tol`` (relative to its original
    norm, absolute for zero rows) is replaced by the next standard basis
    vector that is itself independent of the rows accepted so far.
    """
    M = np.asarray(adj.matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError("adjacency must be square")
    N = M.shape[0]
    Q = np.zeros_like(M)
    basis = iter(np.eye(N))

    def reduce(v, k):
        v = v.copy()
        for i in range(k):
            v -= (Q[i] @ v) * Q[i]
        return v

    for k in range(N):
        v = reduce(M[k], k)
        scale = max(np.linalg.norm(M[k]), 1.0)
        while np.linalg.norm(v) <= tol * scale:
            v = reduce(next(basis), k)
            scale = 1.0
        Q[k] = v / np.linalg.norm(v)
    return BinaryAdjacency(adj.regions, Q)


def normalize_adjacency(adj):
    """``D^-1/2 (S + I) D^-1/2`` with ``S = (A + A') / 2``.

    Degrees are absolute row sums of ``S + I`` so that signed (corrected)
    matrices still get spectral radius at most one.
    """
    A = np.asarray(getattr(adj, "matrix", adj), dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError("adjacency must be square")
    S = (A + A.T) / 2 + np.eye(A.shape[0])
    deg = np.abs(S).sum(axis=1)
    deg[deg == 0] = 1.0
    d = 1.0 / np.sqrt(deg)
    return S * d[:, None] * d[None, :]


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def gcn_forward(X, A_hat, weights, final_activation="identity"):
    """``act(A_hat @ relu(A_hat @ X @ W0) @ W1)``."""
    X = np.asarray(X, dtype=float)
    A_hat = np.asarray(A_hat, dtype=float)
    W0, W1 = np.asarray(weights.W0, float), np.asarray(weights.W1, float)
    if X.ndim != 2 or A_hat.shape != (X.shape[0], X.shape[0]):
        raise DimensionError(f"A_hat {A_hat.shape} does not match X {X.shape}")
    if X.shape[1] != W0.shape[0]:
        raise DimensionError(f"X has {X.shape[1]} features, W0 expects {W0.shape[0]}")
    H = np.maximum(A_hat @ (X @ W0), 0.0)
    out = A_hat @ (H @ W1)
    if final_activation == "identity":
        return out
    if final_activation == "sigmoid":
        return _sigmoid(out)
    raise ParameterError(f"unknown activation {final_activation!r}")


def write_matrix_csv(path, regions, matrix):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(regions)
        for row in np.asarray(matrix):
            w.writerow([repr(float(v)) for v in row])


def read_matrix_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return tuple(rows[0]), np.array(rows[1:], dtype=float)


class MobilityGraph(BaseEstimator):
    """Build the normalized propagation matrix from flow records.

    After ``fit`` the intermediate products are available as ``flows_``,
    ``binary_``, ``corrected_`` and ``a_hat_``.
    """

    def __init__(self, fraction=0.2, exclude_self_loops=False, correct_rank=True):
        self.fraction = fraction
        self.exclude_self_loops = exclude_self_loops
        self.correct_rank = correct_rank

    def fit(self, records, regions=None):
        if isinstance(records, FlowMatrix):
            self.flows_ = records
        else:
            if regions is None:
                raise ParameterError("regions are required with raw flow records")
            self.flows_ = aggregate_flows(records, regions)
        self.binary_ = binarize_top_fraction(self.flows_, self.fraction, self.exclude_self_loops)
        self.corrected_ = full_rank_correct(self.binary_) if self.correct_rank else self.binary_
        self.a_hat_ = normalize_adjacency(self.corrected_)
        return self

    def forward(self, X, weights, final_activation="identity"):
        check_is_fitted(self, "a_hat_")
        return gcn_forward(X, self.a_hat_, weights, final_activation)
