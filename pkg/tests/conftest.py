import random
from fractions import Fraction

import pytest

from rtrees import (
    EdgePoint,
    TreeSkeleton,
    Vertex,
    materialize,
    normalize_point,
    random_tree,
)


@pytest.fixture
def tripod():
    return TreeSkeleton("p", [("p", "y", 1), ("y", "a", 1), ("y", "b", 1)])


@pytest.fixture
def lone_point():
    return TreeSkeleton("p", (), extra_nodes=["p"])


def rng_for(seed) -> random.Random:
    return random.Random(f"rtrees-tests-{seed}")


def fw_distance(tree, a, b):
    """Independent path-sum oracle: Floyd-Warshall over the materialized
    vertex graph (different algorithm from the library's LCA walk)."""
    mat = materialize(tree, [a, b], prefix="fw")
    work = mat.tree
    nodes = list(work.nodes())
    idx = {n: i for i, n in enumerate(nodes)}
    inf = None
    n = len(nodes)
    dist = [[inf] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = Fraction(0)
    for u, v, w in work.edges():
        dist[idx[u]][idx[v]] = w
        dist[idx[v]][idx[u]] = w
    for k in range(n):
        for i in range(n):
            dik = dist[i][k]
            if dik is None:
                continue
            for j in range(n):
                dkj = dist[k][j]
                if dkj is None:
                    continue
                cand = dik + dkj
                if dist[i][j] is None or cand < dist[i][j]:
                    dist[i][j] = cand
    ia = idx[mat.node_for(normalize_point(tree, a))]
    ib = idx[mat.node_for(normalize_point(tree, b))]
    return dist[ia][ib]


def tree_grid(tree, parts_per_edge=4):
    """Vertices plus evenly spaced interior points on every edge."""
    pts = [Vertex(n) for n in tree.nodes()]
    for u, v, length in tree.edges():
        for k in range(1, parts_per_edge):
            pts.append(EdgePoint(u, v, length * Fraction(k, parts_per_edge)))
    return pts


def random_corpus(seed, count, max_nodes=8, radius=Fraction(2)):
    rng = rng_for(seed)
    return [
        random_tree(rng, max_nodes=max_nodes, radius=radius) for _ in range(count)
    ]
