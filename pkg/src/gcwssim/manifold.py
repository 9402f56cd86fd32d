"""Pairwise distance matrices and geodesics over t-nearest-neighbor graphs.

The manifold distance between two images is approximated by the shortest
path on a graph whose nodes are the images and whose edges connect each
image to its t nearest neighbors under a base distance (plain L2 or the
wavelet-similarity distance). Shortest paths are computed with per-source
Dijkstra over the sparse symmetrized graph.
"""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial.distance import pdist, squareform

from . import _kernels
from .cwssim import CwSsimConfig, PreparedSet
from .data import LabeledDataset

log = logging.getLogger(__name__)


class MatrixKind(enum.Enum):
    L2 = "l2"
    CWSSIM = "cwssim"
    GEO_L2 = "geo-l2"
    GCWSSIM = "gcwssim"


_GEODESIC_OF = {MatrixKind.L2: MatrixKind.GEO_L2, MatrixKind.CWSSIM: MatrixKind.GCWSSIM}


class DisconnectedGraphError(Exception):
    """The neighbor graph has multiple components, so some geodesics are
    undefined. Carries the component sizes for diagnostics."""

    def __init__(self, component_sizes):
        self.component_sizes = sorted((int(s) for s in component_sizes), reverse=True)
        super().__init__(
            f"neighbor graph is disconnected (component sizes: {self.component_sizes}); "
            "increase t or enable bridging"
        )


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative n x n distances with zero diagonal."""

    values: np.ndarray
    kind: MatrixKind

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise ValueError(f"distance matrix must be square, got {vals.shape}")
        if not np.isfinite(vals).all():
            raise ValueError("distance matrix contains non-finite entries")
        if (vals < 0.0).any():
            raise ValueError("distance matrix contains negative entries")
        if np.diagonal(vals).any():
            raise ValueError("distance matrix diagonal must be zero")
        if not (vals == vals.T).all():
            raise ValueError("distance matrix must be symmetric")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class NeighborGraph:
    """Undirected weighted graph from t-nn construction; edges satisfy i < j."""

    n: int
    t: int
    base_kind: MatrixKind
    edges_i: np.ndarray
    edges_j: np.ndarray
    weights: np.ndarray

    @property
    def n_edges(self) -> int:
        return len(self.weights)

    def to_csr(self) -> sparse.csr_matrix:
        """Sparse adjacency; zero-weight edges are kept as explicit entries."""
        ii = np.concatenate([self.edges_i, self.edges_j])
        jj = np.concatenate([self.edges_j, self.edges_i])
        ww = np.concatenate([self.weights, self.weights])
        return sparse.coo_matrix((ww, (ii, jj)), shape=(self.n, self.n)).tocsr()

    def component_labels(self) -> np.ndarray:
        _, labels = csgraph.connected_components(self.to_csr(), directed=False)
        return labels


def l2_distance(a, b) -> float:
    """Euclidean distance between two equal-shape pixel grids."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def pairwise_l2(ds: LabeledDataset) -> DistanceMatrix:
    """All-pairs Euclidean distance over raw pixels."""
    flat = ds.stacked_pixels().reshape(len(ds), -1)
    return DistanceMatrix(squareform(pdist(flat, metric="euclidean")), MatrixKind.L2)


def pairwise_cwssim(
    ds: LabeledDataset, cfg: CwSsimConfig = CwSsimConfig(), threads: int = 1
) -> DistanceMatrix:
    """All-pairs wavelet-similarity distance (1 - global index).

    Decompositions and windowed energies are computed once per image; pair
    batches may run on several threads, and the result is independent of
    ``threads`` because every pair is evaluated exactly once in isolation.
    """
    n = len(ds)
    prepared = PreparedSet(ds.images, cfg)
    iu, ju = np.triu_indices(n, 1)
    log.info("pairwise similarity: %d images, %d pairs", n, len(iu))
    if threads > 1 and _kernels.active_backend() != "compiled":
        log.warning(
            "the %s kernel backend holds the GIL; running pair batches on one thread",
            _kernels.active_backend(),
        )
        threads = 1
    if threads <= 1:
        dist = prepared.distances(iu, ju)
    else:
        chunks = np.array_split(np.arange(len(iu)), threads * 4)
        chunks = [c for c in chunks if len(c)]
        dist = np.empty(len(iu), dtype=np.float64)

        def fill(chunk):
            dist[chunk] = prepared.distances(iu[chunk], ju[chunk])

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, chunks))
    values = np.zeros((n, n))
    values[iu, ju] = np.maximum(dist, 0.0)
    values = values + values.T
    return DistanceMatrix(values, MatrixKind.CWSSIM)


def knn_graph(D: DistanceMatrix, t: int, mutual: bool = False) -> NeighborGraph:
    """Connect each point to its t nearest neighbors (ties to lower index).

    By default the directed neighbor relation is symmetrized by union, so
    every node keeps at least t incident edges; ``mutual=True`` keeps only
    reciprocated pairs.
    """
    n = D.n
    if not 1 <= t <= n - 1:
        raise ValueError(f"t must be in [1, {n - 1}], got {t}")
    chosen = np.zeros((n, n), dtype=bool)
    for i in range(n):
        order = np.argsort(D.values[i], kind="stable")
        order = order[order != i][:t]
        chosen[i, order] = True
    adjacency = (chosen & chosen.T) if mutual else (chosen | chosen.T)
    ii, jj = np.nonzero(np.triu(adjacency, 1))
    return NeighborGraph(
        n=n,
        t=t,
        base_kind=D.kind,
        edges_i=ii,
        edges_j=jj,
        weights=D.values[ii, jj].copy(),
    )


def bridge_components(graph: NeighborGraph, D: DistanceMatrix):
    """Repeatedly join the two closest components by their single cheapest
    base-distance edge until the graph is connected.

    Returns (connected graph, list of added (i, j, weight) edges).
    """
    if D.n != graph.n:
        raise ValueError("graph and base matrix sizes differ")
    edges_i = list(graph.edges_i)
    edges_j = list(graph.edges_j)
    weights = list(graph.weights)
    added = []
    current = graph
    while True:
        labels = current.component_labels()
        if labels.max() == 0:
            break
        cross = np.where(labels[:, None] != labels[None, :], D.values, np.inf)
        flat = int(np.argmin(cross))
        i, j = divmod(flat, D.n)
        i, j = min(i, j), max(i, j)
        w = float(D.values[i, j])
        edges_i.append(i)
        edges_j.append(j)
        weights.append(w)
        added.append((i, j, w))
        current = NeighborGraph(
            n=graph.n,
            t=graph.t,
            base_kind=graph.base_kind,
            edges_i=np.array(edges_i, dtype=np.int64),
            edges_j=np.array(edges_j, dtype=np.int64),
            weights=np.array(weights, dtype=np.float64),
        )
    if added:
        log.info("bridged %d component gaps: %s", len(added), added)
    return current, added


def all_pairs_geodesic(graph: NeighborGraph) -> DistanceMatrix:
    """Shortest-path length between every node pair (per-source Dijkstra)."""
    labels = graph.component_labels()
    if labels.max() > 0:
        raise DisconnectedGraphError(np.bincount(labels))
    dist = csgraph.dijkstra(graph.to_csr(), directed=False)
    dist = np.minimum(dist, dist.T)
    np.fill_diagonal(dist, 0.0)
    kind = _GEODESIC_OF.get(graph.base_kind, graph.base_kind)
    return DistanceMatrix(dist, kind)


def geodesic_matrix(
    D: DistanceMatrix, t: int, bridge: bool = False, mutual: bool = False
) -> DistanceMatrix:
    """t-nn graph construction plus all-pairs shortest paths over ``D``."""
    graph = knn_graph(D, t, mutual=mutual)
    if bridge:
        graph, _ = bridge_components(graph, D)
    return all_pairs_geodesic(graph)


def gcwssim_matrix(
    ds: LabeledDataset,
    t: int,
    cfg: CwSsimConfig = CwSsimConfig(),
    bridge: bool = False,
    threads: int = 1,
) -> DistanceMatrix:
    """Geodesic distance over the t-nn graph of wavelet-similarity distances."""
    return geodesic_matrix(pairwise_cwssim(ds, cfg, threads=threads), t, bridge=bridge)


def geodesic_l2_matrix(ds: LabeledDataset, t: int, bridge: bool = False) -> DistanceMatrix:
    """Geodesic distance over the t-nn graph of plain L2 distances."""
    return geodesic_matrix(pairwise_l2(ds), t, bridge=bridge)
