"""Density-based hierarchical clustering (HDBSCAN-style) on numpy.

The algorithm follows the classic recipe:

1. core distance of each point = distance to its ``min_samples``-th
   nearest neighbor (self excluded, clamped to the available n-1),
2. mutual reachability distance
   ``max(core(a), core(b), d(a, b))``,
3. minimum spanning tree of the mutual-reachability graph (Prim),
4. single-linkage dendrogram from MST edges sorted ascending,
5. condensed tree: walking down the dendrogram, a merge at distance
   ``d`` splits the current cluster only if both sides hold at least
   ``min_cluster_size`` points; smaller sides "fall out" at
   ``lambda = 1/d``. Merges at distance 0 never split: their points
   stay forever (``lambda = inf``), so exact duplicates can never be
   torn apart.
6. cluster stability
   ``sum_points(lambda_p - lambda_birth) + sum_children((lambda_child_birth - lambda_birth) * |child|)``
   and bottom-up excess-of-mass selection. The root competes like any
   other candidate (birth ``lambda = 0``), so a dataset that is one
   dense clump yields one cluster rather than none. Ties go to the
   parent.

Membership of a selected cluster is every point that falls anywhere in
its condensed subtree. Everything else is labeled :data:`OUTLIER`.

The implementation is dense (O(n^2) distances), which is appropriate
for corpus-scale inputs of up to a few thousand sentences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingMatrix

OUTLIER = -1


@dataclass
class ClusterAssignment:
    """Cluster labels keyed by row id; ``OUTLIER`` marks noise."""

    labels: dict[str, int]
    n_clusters: int = field(default=0)

    def __post_init__(self) -> None:
        real = {v for v in self.labels.values() if v != OUTLIER}
        expected = set(range(self.n_clusters))
        if real != expected:
            raise ValueError(
                f"labels {sorted(real)} do not form a dense range for "
                f"{self.n_clusters} clusters"
            )

    def sizes(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for v in self.labels.values():
            if v != OUTLIER:
                out[v] = out.get(v, 0) + 1
        return out

    def members(self, label: int) -> list[str]:
        return [k for k, v in self.labels.items() if v == label]

    def outliers(self) -> list[str]:
        return self.members(OUTLIER)


def pairwise_distances(x: np.ndarray) -> np.ndarray:
    """Exact euclidean distance matrix (float64, zero diagonal).

    Computed from explicit coordinate differences (block-wise to bound
    memory) so identical rows give exactly 0.0.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    dist = np.empty((n, n), dtype=np.float64)
    step = max(1, int(2**22 // max(1, n * x.shape[1])))
    for start in range(0, n, step):
        block = x[start : start + step, None, :] - x[None, :, :]
        np.sqrt((block * block).sum(axis=-1), out=dist[start : start + step])
    np.fill_diagonal(dist, 0.0)
    return dist


def core_distances(dist: np.ndarray, min_samples: int) -> np.ndarray:
    """Distance to each point's ``min_samples``-th nearest neighbor.

    Self is excluded; for tiny inputs the neighbor index clamps to n-1.
    """
    n = dist.shape[0]
    if n == 1:
        return np.zeros(1)
    k = min(min_samples, n - 1)
    # Row-sorted distances put self (0.0) first; index k is the k-th neighbor.
    return np.sort(dist, axis=1)[:, k]


def mutual_reachability(dist: np.ndarray, core: np.ndarray) -> np.ndarray:
    mr = np.maximum(dist, core[:, None])
    np.maximum(mr, core[None, :], out=mr)
    np.fill_diagonal(mr, 0.0)
    return mr


def _mst_edges(weights: np.ndarray) -> list[tuple[int, int, float]]:
    """Prim's algorithm on a dense symmetric weight matrix."""
    n = weights.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = weights[0].copy()
    source = np.zeros(n, dtype=np.int64)
    edges: list[tuple[int, int, float]] = []
    for _ in range(n - 1):
        candidate = np.where(in_tree, np.inf, best)
        j = int(candidate.argmin())
        edges.append((int(source[j]), j, float(best[j])))
        in_tree[j] = True
        improved = weights[j] < best
        best[improved] = weights[j][improved]
        source[improved] = j
    return edges


class _Dendrogram:
    """Single-linkage tree built from MST edges (union-find agglomeration)."""

    def __init__(self, n: int, edges: list[tuple[int, int, float]]):
        self.n = n
        total = 2 * n - 1
        self.left = [-1] * total
        self.right = [-1] * total
        self.height = [0.0] * total
        self.size = [1] * n + [0] * (n - 1)
        parent = list(range(total))

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        nxt = n
        for u, v, w in sorted(edges, key=lambda e: (e[2], e[0], e[1])):
            ru, rv = find(u), find(v)
            self.left[nxt] = ru
            self.right[nxt] = rv
            self.height[nxt] = w
            self.size[nxt] = self.size[ru] + self.size[rv]
            parent[ru] = nxt
            parent[rv] = nxt
            nxt += 1
        self.root = total - 1

    def leaves(self, node: int) -> list[int]:
        out: list[int] = []
        stack = [node]
        while stack:
            cur = stack.pop()
            if cur < self.n:
                out.append(cur)
            else:
                stack.append(self.left[cur])
                stack.append(self.right[cur])
        return out


class _CondensedTree:
    """Condensed cluster tree with per-cluster point falls and stability."""

    def __init__(self, tree: _Dendrogram, min_cluster_size: int):
        self.birth: list[float] = []
        self.parent: list[int] = []
        self.children: list[list[int]] = []
        self.node_size: list[int] = []
        self.falls: list[list[tuple[int, float]]] = []

        root_cluster = self._new_cluster(0.0, -1, tree.size[tree.root])
        stack: list[tuple[int, int]] = [(tree.root, root_cluster)]
        while stack:
            node, cluster = stack.pop()
            while True:
                if node < tree.n or tree.height[node] <= 0.0:
                    # A lone point or an all-duplicates clump: never splits.
                    for p in tree.leaves(node):
                        self.falls[cluster].append((p, math.inf))
                    break
                lam = 1.0 / tree.height[node]
                lhs, rhs = tree.left[node], tree.right[node]
                big_l = tree.size[lhs] >= min_cluster_size
                big_r = tree.size[rhs] >= min_cluster_size
                if big_l and big_r:
                    for side in (lhs, rhs):
                        child = self._new_cluster(lam, cluster, tree.size[side])
                        self.children[cluster].append(child)
                        stack.append((side, child))
                    break
                if big_l or big_r:
                    shed = rhs if big_l else lhs
                    for p in tree.leaves(shed):
                        self.falls[cluster].append((p, lam))
                    node = lhs if big_l else rhs
                    continue
                for p in tree.leaves(node):
                    self.falls[cluster].append((p, lam))
                break

    def _new_cluster(self, birth: float, parent: int, size: int) -> int:
        self.birth.append(birth)
        self.parent.append(parent)
        self.children.append([])
        self.node_size.append(size)
        self.falls.append([])
        return len(self.birth) - 1

    def stabilities(self) -> list[float]:
        out = []
        for c in range(len(self.birth)):
            s = sum(lam - self.birth[c] for _, lam in self.falls[c])
            s += sum(
                (self.birth[k] - self.birth[c]) * self.node_size[k]
                for k in self.children[c]
            )
            out.append(s)
        return out

    def select_eom(self) -> list[int]:
        """Excess-of-mass selection; returns selected cluster ids."""
        stability = self.stabilities()
        subtree_best = list(stability)
        selected = [True] * len(stability)
        # Children always carry higher ids than their parent.
        for c in range(len(stability) - 1, -1, -1):
            if not self.children[c]:
                continue
            child_sum = sum(subtree_best[k] for k in self.children[c])
            if child_sum > stability[c]:
                selected[c] = False
                subtree_best[c] = child_sum
        final: list[int] = []
        queue = [0]
        while queue:
            c = queue.pop()
            if selected[c]:
                final.append(c)
            else:
                queue.extend(self.children[c])
        return final

    def subtree_points(self, cluster: int) -> list[int]:
        points: list[int] = []
        stack = [cluster]
        while stack:
            c = stack.pop()
            points.extend(p for p, _ in self.falls[c])
            stack.extend(self.children[c])
        return points


def hdbscan(
    matrix: EmbeddingMatrix,
    min_cluster_size: int = 25,
    min_samples: int | None = None,
) -> ClusterAssignment:
    """Cluster matrix rows; returns labels keyed by row id.

    ``min_samples`` defaults to ``min_cluster_size``. Fewer than
    ``min_cluster_size`` rows yields all-outliers. Labels are dense
    integers starting at 0, ordered by cluster size (largest first,
    ties by first member row).
    """
    if min_cluster_size < 2:
        raise ValueError("min_cluster_size must be >= 2")
    if min_samples is None:
        min_samples = min_cluster_size
    if min_samples < 1:
        raise ValueError("min_samples must be >= 1")
    n = matrix.count
    if n < min_cluster_size:
        return ClusterAssignment({rid: OUTLIER for rid in matrix.ids}, 0)

    dist = pairwise_distances(matrix.rows)
    core = core_distances(dist, min_samples)
    mr = mutual_reachability(dist, core)
    tree = _Dendrogram(n, _mst_edges(mr))
    condensed = _CondensedTree(tree, min_cluster_size)
    final = condensed.select_eom()

    member_lists = [sorted(condensed.subtree_points(c)) for c in final]
    order = sorted(range(len(final)), key=lambda i: (-len(member_lists[i]), member_lists[i]))
    labels = np.full(n, OUTLIER, dtype=np.int64)
    for new_label, i in enumerate(order):
        labels[member_lists[i]] = new_label
    return ClusterAssignment(
        {rid: int(labels[i]) for i, rid in enumerate(matrix.ids)},
        n_clusters=len(final),
    )
