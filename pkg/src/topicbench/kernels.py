"""Hot numeric kernels: brute-force kNN, smooth-kNN calibration, Prim's MST
over mutual reachability, and the edge-sampling layout SGD.

Every kernel is a plain loop over float64 arrays so that the jitted and
non-jitted paths produce identical results (see accel.py). Keep scalar
integer state below 2**32 so Python ints and numba int64 agree exactly.
"""

import math

import numpy as np

from .accel import njit

_MASK32 = 0xFFFFFFFF


@njit(cache=True)
def knn_brute(points, k):
    """Exact k nearest neighbours by Euclidean distance, self excluded.

    Distance ties are broken by the smaller candidate index. Returns
    (indices, distances), each of shape (n, k), neighbours sorted by
    (distance, index) ascending.
    """
    n, d = points.shape
    idx = np.empty((n, k), np.int64)
    dist = np.empty((n, k), np.float64)
    row = np.empty(n, np.float64)
    for i in range(n):
        for j in range(n):
            s = 0.0
            for t in range(d):
                diff = points[i, t] - points[j, t]
                s += diff * diff
            row[j] = s
        row[i] = np.inf
        for m in range(k):
            best = -1
            bestv = np.inf
            for j in range(n):
                if row[j] < bestv:
                    bestv = row[j]
                    best = j
            idx[i, m] = best
            dist[i, m] = np.sqrt(bestv)
            row[best] = np.inf
    return idx, dist


@njit(cache=True)
def smooth_knn_sigma(dist, rho, target):
    """Per-point bandwidth sigma solving
    sum_j exp(-max(0, d_ij - rho_i) / sigma_i) = target.

    Log-space bisection, 64 iterations over the bracket [1e-12, 1e12].
    The sum is monotone increasing in sigma, so the bracket midpoint
    converges to machine precision well inside the iteration budget.
    math.exp keeps the jitted and fallback paths bit-identical (both libm).
    """
    n, k = dist.shape
    sigma = np.empty(n, np.float64)
    log_lo0 = math.log(1e-12)
    log_hi0 = math.log(1e12)
    for i in range(n):
        lo = log_lo0
        hi = log_hi0
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            s = math.exp(mid)
            acc = 0.0
            for j in range(k):
                d = dist[i, j] - rho[i]
                if d > 0.0:
                    acc += math.exp(-d / s)
                else:
                    acc += 1.0
            if acc > target:
                hi = mid
            else:
                lo = mid
        sigma[i] = math.exp(0.5 * (lo + hi))
    return sigma


@njit(cache=True)
def prim_mst_mutual_reachability(points, core):
    """Minimum spanning tree of the complete mutual-reachability graph.

    d_mreach(a, b) = max(core[a], core[b], euclidean(a, b)). O(n^2) Prim
    scans; equal-weight candidates resolved by the smaller
    (min index, max index) endpoint pair. Returns (n-1, 3) rows
    (min_idx, max_idx, weight) in tree-growth order.
    """
    n, d = points.shape
    in_tree = np.zeros(n, np.bool_)
    best_w = np.full(n, np.inf)
    best_p = np.full(n, -1, np.int64)
    edges = np.empty((n - 1, 3), np.float64)
    in_tree[0] = True
    cur = 0
    for step in range(n - 1):
        for v in range(n):
            if in_tree[v]:
                continue
            s = 0.0
            for t in range(d):
                diff = points[cur, t] - points[v, t]
                s += diff * diff
            w = np.sqrt(s)
            if core[cur] > w:
                w = core[cur]
            if core[v] > w:
                w = core[v]
            if w < best_w[v]:
                best_w[v] = w
                best_p[v] = cur
            elif w == best_w[v] and best_p[v] >= 0:
                a1 = cur if cur < v else v
                b1 = v if cur < v else cur
                a2 = best_p[v] if best_p[v] < v else v
                b2 = v if best_p[v] < v else best_p[v]
                if a1 < a2 or (a1 == a2 and b1 < b2):
                    best_p[v] = cur
        pick = -1
        pw = np.inf
        pa = -1
        pb = -1
        for v in range(n):
            if in_tree[v]:
                continue
            a = best_p[v] if best_p[v] < v else v
            b = v if best_p[v] < v else best_p[v]
            if pick == -1 or best_w[v] < pw:
                pick = v
                pw = best_w[v]
                pa = a
                pb = b
            elif best_w[v] == pw and (a < pa or (a == pa and b < pb)):
                pick = v
                pa = a
                pb = b
        edges[step, 0] = pa
        edges[step, 1] = pb
        edges[step, 2] = pw
        in_tree[pick] = True
        cur = pick
    return edges


@njit(cache=True)
def sgd_layout(embedding, head, tail, epochs_per_sample, a, b,
               initial_alpha, n_epochs, negative_sample_rate, rng_state):
    """In-place fuzzy cross-entropy layout SGD over the positive edges.

    Single-threaded with a 32-bit xorshift RNG for negative sampling, so
    a fixed rng_state yields an identical layout on every run. Gradient
    components are clipped to [-4, 4].
    """
    n, dim = embedding.shape
    n_edges = head.shape[0]
    epochs_per_negative = epochs_per_sample / negative_sample_rate
    next_sample = epochs_per_sample.copy()
    next_negative = epochs_per_negative.copy()
    state = rng_state & _MASK32
    if state == 0:
        state = 1
    for epoch in range(n_epochs):
        alpha = initial_alpha * (1.0 - epoch / n_epochs)
        for e in range(n_edges):
            if next_sample[e] > epoch:
                continue
            i = head[e]
            j = tail[e]
            d2 = 0.0
            for t in range(dim):
                diff = embedding[i, t] - embedding[j, t]
                d2 += diff * diff
            if d2 > 0.0:
                coeff = (-2.0 * a * b * d2 ** (b - 1.0)) / (a * d2 ** b + 1.0)
            else:
                coeff = 0.0
            for t in range(dim):
                g = coeff * (embedding[i, t] - embedding[j, t])
                if g > 4.0:
                    g = 4.0
                elif g < -4.0:
                    g = -4.0
                embedding[i, t] += g * alpha
                embedding[j, t] -= g * alpha
            next_sample[e] += epochs_per_sample[e]
            n_neg = int((epoch - next_negative[e]) / epochs_per_negative[e])
            for _ in range(n_neg):
                state ^= (state << 13) & _MASK32
                state ^= state >> 17
                state ^= (state << 5) & _MASK32
                other = state % n
                if other == i:
                    continue
                d2 = 0.0
                for t in range(dim):
                    diff = embedding[i, t] - embedding[other, t]
                    d2 += diff * diff
                if d2 > 0.0:
                    coeff = (2.0 * b) / ((0.001 + d2) * (a * d2 ** b + 1.0))
                else:
                    coeff = 0.0
                for t in range(dim):
                    if coeff > 0.0:
                        g = coeff * (embedding[i, t] - embedding[other, t])
                        if g > 4.0:
                            g = 4.0
                        elif g < -4.0:
                            g = -4.0
                    else:
                        g = 4.0
                    embedding[i, t] += g * alpha
            next_negative[e] += n_neg * epochs_per_negative[e]
    return embedding


def warmup():
    """Trigger compilation of every kernel on tiny inputs."""
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    idx, dist = knn_brute(pts, 2)
    smooth_knn_sigma(dist, dist[:, 0].copy(), np.log2(2.0))
    core = dist[:, 1].copy()
    prim_mst_mutual_reachability(pts, core)
    emb = pts.copy()
    head = np.array([0, 1], dtype=np.int64)
    tail = np.array([1, 0], dtype=np.int64)
    eps = np.ones(2, dtype=np.float64)
    sgd_layout(emb, head, tail, eps, 1.5, 0.9, 1.0, 2, 5, 42)
