"""Manifold reduction of document embeddings before density clustering.

Builds an exact kNN graph, calibrates it into a fuzzy neighborhood graph
(per-point rho/sigma), and lays the points out by stochastic gradient
descent on the fuzzy cross-entropy. A deterministic PCA method is
available for tests and for the intertopic map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ModelError
from .kernels import knn_brute, sgd_layout, smooth_knn_sigma


@dataclass(frozen=True)
class ReduceConfig:
    n_neighbors: int = 15
    n_components: int = 5
    min_dist: float = 0.1
    n_epochs: int = 200
    negative_samples: int = 5
    seed: int = 0
    method: str = "umap"

    def __post_init__(self):
        if self.n_neighbors < 2:
            raise ModelError(f"n_neighbors must be >= 2, got {self.n_neighbors}")
        if self.n_components < 1:
            raise ModelError(f"n_components must be >= 1, got {self.n_components}")
        if self.min_dist < 0:
            raise ModelError(f"min_dist must be >= 0, got {self.min_dist}")
        if self.method not in ("umap", "pca"):
            raise ModelError(f"method must be umap or pca, got {self.method!r}")


@dataclass
class NeighborGraph:
    indices: np.ndarray          # (n, k) neighbor ids
    distances: np.ndarray        # (n, k) sorted ascending
    rho: np.ndarray | None = None
    sigma: np.ndarray | None = None
    weights: np.ndarray | None = None    # (n, k) directed membership strengths
    symmetric: sp.csr_matrix | None = None


def knn_graph(points: np.ndarray, k: int) -> NeighborGraph:
    """Exact k nearest neighbours, self excluded, ties to the smaller index."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    n = points.shape[0]
    if k >= n:
        raise ModelError(f"k={k} must be smaller than n_points={n}")
    idx, dist = knn_brute(points, k)
    return NeighborGraph(indices=idx, distances=dist)


def calibrate(graph: NeighborGraph, k: int) -> NeighborGraph:
    """Solve per-point bandwidths so each point's membership mass is log2(k),
    then symmetrize with p = w + w' - w*w'."""
    dist = graph.distances
    n = dist.shape[0]
    rho = dist[:, 0].copy()
    sigma = smooth_knn_sigma(dist, rho, float(np.log2(k)))
    weights = np.exp(-np.maximum(0.0, dist - rho[:, None]) / sigma[:, None])
    rows = np.repeat(np.arange(n), k)
    cols = graph.indices.ravel()
    directed = sp.csr_matrix((weights.ravel(), (rows, cols)), shape=(n, n))
    transpose = directed.T.tocsr()
    symmetric = directed + transpose - directed.multiply(transpose)
    return NeighborGraph(
        indices=graph.indices,
        distances=dist,
        rho=rho,
        sigma=sigma,
        weights=weights,
        symmetric=symmetric.tocsr(),
    )


def fit_curve_params(min_dist: float) -> tuple[float, float]:
    """Fit (a, b) of psi(x) = 1/(1 + a*x^(2b)) to the layout membership target.

    Weighted least squares over a 300-point grid on [0, 3] against a
    plateau-then-exponential-decay target, with two heavily weighted
    anchor points carrying the layout contract psi(min_dist) >= 0.99 and
    psi(3*min_dist) <= 0.5; 300 Adam gradient steps on (log knee, b).
    """
    m = float(min_dist)
    if m <= 0.0:
        # pure steep default; the contract bounds are undefined at 0
        return 1.93, 0.79
    s = 0.5 * m
    grid = np.linspace(0.0, 3.0, 300)
    target = np.where(grid <= 1.5 * m, 1.0, np.exp(-np.maximum(0.0, grid - 1.5 * m) / s))
    x = np.concatenate([grid[1:], [m, 3.0 * m]])
    y = np.concatenate([target[1:], [0.997, 0.42]])
    w = np.concatenate([np.full(grid.size - 1, 1.0 / grid.size), [300.0, 300.0]])
    b = np.log(99.0) / (2.0 * np.log(3.0))
    ln_c = np.log(3.0 * m)
    lnx = np.log(x)
    m1 = np.zeros(2)
    m2 = np.zeros(2)
    beta1, beta2, lr, eps = 0.9, 0.999, 0.05, 1e-8
    for i in range(300):
        t = np.clip(2.0 * b * (lnx - ln_c), -500.0, 500.0)
        psi = 1.0 / (1.0 + np.exp(t))
        r = psi - y
        dpsi = psi * (1.0 - psi)
        grad = np.array([
            np.sum(2.0 * w * r * dpsi * 2.0 * b),
            np.sum(2.0 * w * r * dpsi * (-2.0) * (lnx - ln_c)),
        ])
        m1 = beta1 * m1 + (1 - beta1) * grad
        m2 = beta2 * m2 + (1 - beta2) * grad * grad
        mh = m1 / (1 - beta1 ** (i + 1))
        vh = m2 / (1 - beta2 ** (i + 1))
        step = lr * mh / (np.sqrt(vh) + eps)
        ln_c -= step[0]
        b -= step[1]
    a = float(np.exp(-2.0 * b * ln_c))
    b = float(b)
    if m <= 1.0:
        psi_m = 1.0 / (1.0 + a * m ** (2 * b))
        psi_3m = 1.0 / (1.0 + a * (3.0 * m) ** (2 * b))
        if psi_m < 0.99 or psi_3m > 0.5:
            raise ModelError(
                f"curve fit violated layout contract for min_dist={m}: "
                f"psi(m)={psi_m:.4f}, psi(3m)={psi_3m:.4f}"
            )
    return a, b


def spectral_init(symmetric: sp.csr_matrix, n_components: int, seed: int) -> np.ndarray:
    """Top nontrivial eigenvectors of the normalized adjacency via subspace
    (power) iteration, scaled to max-abs 10."""
    n = symmetric.shape[0]
    degree = np.asarray(symmetric.sum(axis=1)).ravel()
    inv_sqrt = np.divide(1.0, np.sqrt(degree), out=np.ones_like(degree), where=degree > 0)
    normalized = sp.diags(inv_sqrt) @ symmetric @ sp.diags(inv_sqrt)
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((n, n_components + 1))
    q, _ = np.linalg.qr(q)
    for _ in range(120):
        # shifted operator (M + I) keeps the spectrum nonnegative
        q = normalized @ q + q
        q, _ = np.linalg.qr(q)
    small = q.T @ (normalized @ q + q)
    small = 0.5 * (small + small.T)
    eigvals, eigvecs = np.linalg.eigh(small)
    order = np.argsort(eigvals)[::-1]
    basis = q @ eigvecs[:, order]
    embedding = basis[:, 1 : n_components + 1]
    scale = np.max(np.abs(embedding))
    if scale > 0:
        embedding = embedding / scale * 10.0
    return np.ascontiguousarray(embedding, dtype=np.float64)


def pca(points: np.ndarray, n_components: int) -> np.ndarray:
    """Exact top principal components with a deterministic sign convention."""
    centered = points - points.mean(axis=0, keepdims=True)
    cov = centered.T @ centered / max(points.shape[0] - 1, 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:n_components]
    components = eigvecs[:, order]
    for c in range(components.shape[1]):
        pivot = np.argmax(np.abs(components[:, c]))
        if components[pivot, c] < 0:
            components[:, c] = -components[:, c]
    return centered @ components


def make_epochs_per_sample(weights: np.ndarray, n_epochs: int) -> np.ndarray:
    """Inverse sampling frequency per edge, proportional to edge weight."""
    result = np.full(weights.shape[0], -1.0)
    samples = n_epochs * (weights / weights.max())
    positive = samples > 0
    result[positive] = float(n_epochs) / samples[positive]
    return result


def fit(points: np.ndarray, cfg: ReduceConfig) -> np.ndarray:
    """Reduce points to cfg.n_components dimensions; deterministic per seed."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    n, dim = points.shape
    if cfg.n_components >= dim:
        raise ModelError(
            f"n_components={cfg.n_components} must be smaller than input dimension {dim}"
        )
    if n < cfg.n_components + 1:
        raise ModelError(f"need at least {cfg.n_components + 1} points, got {n}")
    if cfg.method == "pca":
        return pca(points, cfg.n_components)
    if cfg.n_neighbors >= n:
        raise ModelError(f"n_neighbors={cfg.n_neighbors} must be smaller than n_points={n}")
    graph = calibrate(knn_graph(points, cfg.n_neighbors), cfg.n_neighbors)
    embedding = spectral_init(graph.symmetric, cfg.n_components, cfg.seed)
    a, b = fit_curve_params(cfg.min_dist)
    coo = graph.symmetric.tocoo()
    epochs_per_sample = make_epochs_per_sample(coo.data, cfg.n_epochs)
    head = coo.row.astype(np.int64)
    tail = coo.col.astype(np.int64)
    rng_state = (cfg.seed ^ 0x9E3779B9) & 0xFFFFFFFF
    sgd_layout(
        embedding,
        head,
        tail,
        epochs_per_sample,
        a,
        b,
        1.0,
        cfg.n_epochs,
        cfg.negative_samples,
        rng_state,
    )
    return embedding
