"""Density clustering of reduced embeddings (HDBSCAN).

Core distances -> mutual-reachability MST -> single-linkage hierarchy ->
condensed tree -> excess-of-mass cluster extraction with noise (-1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelError
from .kernels import knn_brute, prim_mst_mutual_reachability


@dataclass(frozen=True)
class ClusterConfig:
    min_cluster_size: int = 15
    min_samples: int | None = None

    def __post_init__(self):
        if self.min_cluster_size < 2:
            raise ModelError(f"min_cluster_size must be >= 2, got {self.min_cluster_size}")
        if self.min_samples is not None and self.min_samples < 1:
            raise ModelError(f"min_samples must be >= 1, got {self.min_samples}")

    @property
    def effective_min_samples(self) -> int:
        return self.min_samples if self.min_samples is not None else self.min_cluster_size


@dataclass
class CondensedEdge:
    parent: int
    child: int        # < n_points: a point event; >= n_points: a child cluster
    lam: float        # 1 / merge distance
    child_size: int


@dataclass
class ClusterResult:
    labels: np.ndarray
    condensed_tree: list[CondensedEdge] = field(default_factory=list)
    stabilities: dict[int, float] = field(default_factory=dict)

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size and self.labels.max() >= 0 else 0


def core_distances(points: np.ndarray, min_samples: int) -> np.ndarray:
    """Distance from each point to its min_samples-th nearest neighbour."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    n = points.shape[0]
    if n <= min_samples:
        raise ModelError(f"need more than min_samples={min_samples} points, got {n}")
    _, dist = knn_brute(points, min_samples)
    return dist[:, min_samples - 1].copy()


def mst_mutual_reachability(points: np.ndarray, core: np.ndarray) -> np.ndarray:
    """(n-1, 3) rows (min_idx, max_idx, weight) of the mutual-reachability MST."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    return prim_mst_mutual_reachability(points, np.ascontiguousarray(core, dtype=np.float64))


def _single_linkage(edges: np.ndarray, n: int):
    """Union-find merge of MST edges in ascending (weight, min, max) order.

    Returns (children, distances, sizes) for merge nodes n .. 2n-2.
    """
    order = np.lexsort((edges[:, 1], edges[:, 0], edges[:, 2]))
    parent = np.arange(2 * n - 1, dtype=np.int64)
    size = np.ones(2 * n - 1, dtype=np.int64)
    children = np.empty((n - 1, 2), dtype=np.int64)
    distances = np.empty(n - 1, dtype=np.float64)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for step, e in enumerate(order):
        a = find(int(edges[e, 0]))
        b = find(int(edges[e, 1]))
        node = n + step
        children[step] = (a, b)
        distances[step] = edges[e, 2]
        parent[a] = node
        parent[b] = node
        size[node] = size[a] + size[b]
    return children, distances, size


def _collect_leaves(node: int, n: int, children: np.ndarray) -> list[int]:
    leaves = []
    stack = [node]
    while stack:
        x = stack.pop()
        if x < n:
            leaves.append(x)
        else:
            stack.extend(children[x - n])
    return leaves


def _condense(children, distances, sizes, n: int, min_cluster_size: int):
    """Condensed tree: clusters survive only while >= min_cluster_size points.

    Cluster ids start at n (the root). Smaller children fall out as point
    events at lambda = 1/distance of the split.
    """
    tree: list[CondensedEdge] = []
    cluster_parent: dict[int, int] = {}
    cluster_size: dict[int, int] = {n: int(sizes[2 * n - 2])}
    root_dendro = 2 * n - 2
    next_cluster = n + 1
    # stack entries: (dendrogram node, condensed cluster id it belongs to)
    stack = [(root_dendro, n)]
    while stack:
        node, cluster = stack.pop()
        if node < n:
            continue
        left, right = children[node - n]
        dist = distances[node - n]
        lam = 1.0 / dist if dist > 0.0 else np.inf
        left_size = int(sizes[left])
        right_size = int(sizes[right])
        left_big = left_size >= min_cluster_size
        right_big = right_size >= min_cluster_size
        if left_big and right_big:
            for child_node, child_size in ((left, left_size), (right, right_size)):
                cid = next_cluster
                next_cluster += 1
                cluster_parent[cid] = cluster
                cluster_size[cid] = child_size
                tree.append(CondensedEdge(cluster, cid, lam, child_size))
                stack.append((child_node, cid))
        elif left_big or right_big:
            big, small = (left, right) if left_big else (right, left)
            for leaf in _collect_leaves(small, n, children):
                tree.append(CondensedEdge(cluster, leaf, lam, 1))
            stack.append((big, cluster))
        else:
            for leaf in _collect_leaves(left, n, children):
                tree.append(CondensedEdge(cluster, leaf, lam, 1))
            for leaf in _collect_leaves(right, n, children):
                tree.append(CondensedEdge(cluster, leaf, lam, 1))
    return tree, cluster_parent, cluster_size


def extract(edges: np.ndarray, n_points: int, cfg: ClusterConfig) -> ClusterResult:
    """Stability-based cluster extraction from MST edges."""
    n = n_points
    if n == 0:
        return ClusterResult(labels=np.empty(0, dtype=np.int64))
    if n == 1 or cfg.min_cluster_size > n:
        return ClusterResult(labels=np.full(n, -1, dtype=np.int64))
    children, distances, sizes = _single_linkage(edges, n)
    tree, cluster_parent, cluster_size = _condense(
        children, distances, sizes, n, cfg.min_cluster_size
    )

    birth: dict[int, float] = {n: 0.0}
    for edge in tree:
        if edge.child >= n:
            birth[edge.child] = edge.lam
    stability: dict[int, float] = {c: 0.0 for c in cluster_size}
    for edge in tree:
        contribution = (edge.lam - birth[edge.parent]) * edge.child_size
        if np.isnan(contribution):
            contribution = 0.0  # inf - inf: zero-length lifetime
        stability[edge.parent] += contribution

    children_of: dict[int, list[int]] = {c: [] for c in cluster_size}
    for cid, parent in cluster_parent.items():
        children_of[parent].append(cid)

    # excess of mass, leaves first (child ids are always larger than their
    # parent's): a cluster is selected iff its own stability strictly
    # exceeds the total carried by its selected descendants
    selected: set[int] = set()
    subtree_value: dict[int, float] = {}
    for cid in sorted(cluster_size, reverse=True):
        child_total = sum(subtree_value[c] for c in children_of[cid])
        eligible = cluster_size[cid] >= cfg.min_cluster_size
        if eligible and stability[cid] > child_total:
            selected.add(cid)
            for c in children_of[cid]:
                _deselect_subtree(c, children_of, selected)
            subtree_value[cid] = stability[cid]
        else:
            subtree_value[cid] = child_total

    fallout_parent = np.full(n, -1, dtype=np.int64)
    for edge in tree:
        if edge.child < n:
            fallout_parent[edge.child] = edge.parent

    raw_labels = np.full(n, -1, dtype=np.int64)
    for p in range(n):
        c = int(fallout_parent[p])
        while c != -1:
            if c in selected:
                raw_labels[p] = c
                break
            c = cluster_parent.get(c, -1)

    labels, stabilities = _renumber(raw_labels, stability)
    return ClusterResult(labels=labels, condensed_tree=tree, stabilities=stabilities)


def _deselect_subtree(cid, children_of, selected):
    stack = [cid]
    while stack:
        x = stack.pop()
        selected.discard(x)
        stack.extend(children_of[x])


def _renumber(raw_labels: np.ndarray, stability: dict[int, float]):
    """Clusters numbered 0..C-1 by decreasing size, ties by lowest member index."""
    present = [c for c in np.unique(raw_labels) if c >= 0]
    keyed = []
    for c in present:
        members = np.nonzero(raw_labels == c)[0]
        keyed.append((-members.size, int(members.min()), int(c)))
    keyed.sort()
    mapping = {old: new for new, (_, _, old) in enumerate(keyed)}
    labels = np.array([mapping.get(int(c), -1) for c in raw_labels], dtype=np.int64)
    stabilities = {mapping[old]: float(stability[old]) for old in mapping}
    return labels, stabilities


def cluster(points: np.ndarray, cfg: ClusterConfig) -> ClusterResult:
    """Full pipeline: core distances, MST, extraction."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    n = points.shape[0]
    if cfg.min_cluster_size > n:
        return ClusterResult(labels=np.full(n, -1, dtype=np.int64))
    k = min(cfg.effective_min_samples, n - 1)
    core = core_distances(points, k)
    edges = mst_mutual_reachability(points, core)
    return extract(edges, n, cfg)
