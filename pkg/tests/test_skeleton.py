from fractions import Fraction

import pytest

from rtrees import (
    EdgePoint,
    SkeletonError,
    TreeSkeleton,
    UnknownPointError,
    Vertex,
    canonicalize,
    distance,
    materialize,
    normalize_point,
    point_on_edge,
    point_on_segment,
    validate,
)
from conftest import fw_distance, random_corpus, rng_for, tree_grid
from rtrees.generators import random_point


def test_constructor_rejects_malformed():
    with pytest.raises(SkeletonError):
        TreeSkeleton("p", [("p", "p", 1)])
    with pytest.raises(SkeletonError):
        TreeSkeleton("p", [("p", "q", 1), ("q", "p", 2)])
    with pytest.raises(SkeletonError):
        TreeSkeleton("bad id", ())


def test_validate_accepts_tripod(tripod):
    report = validate(tripod, 2)
    assert report.ok
    assert report.max_distance == 2


def test_validate_radius_witness(tripod):
    report = validate(tripod, Fraction(3, 2))
    assert not report.ok
    kinds = [v.kind for v in report.violations]
    assert kinds.count("radius_exceeded") == 2
    assert any("node a" in v.detail for v in report.violations)


def test_validate_nonpositive_edge():
    t = TreeSkeleton("p", [("p", "q", 0)])
    report = validate(t, 1)
    assert any(v.kind == "non_positive_edge" for v in report.violations)


def test_validate_disconnected_and_degree_two():
    t = TreeSkeleton("p", [("p", "q", 1)], extra_nodes=["lost"])
    report = validate(t, 2)
    assert any(v.kind == "disconnected" for v in report.violations)
    t2 = TreeSkeleton("p", [("p", "m", 1), ("m", "q", 1)])
    report2 = validate(t2, 2)
    assert any(v.kind == "non_canonical" for v in report2.violations)
    # a labeled middle node is fine
    t3 = TreeSkeleton("p", [("p", "m", 1), ("m", "q", 1)], labels={"m": "mid"})
    assert validate(t3, 2).ok


def test_validate_cycle():
    t = TreeSkeleton("p", [("p", "q", 1), ("q", "s", 1), ("s", "p", 1)])
    report = validate(t, 5)
    assert any(v.kind == "cycle" for v in report.violations)


def test_normalize_point(tripod):
    assert normalize_point(tripod, EdgePoint("y", "p", Fraction(1, 4))) == EdgePoint(
        "p", "y", Fraction(3, 4)
    )
    assert normalize_point(tripod, EdgePoint("p", "y", 0)) == Vertex("p")
    assert normalize_point(tripod, EdgePoint("p", "y", 1)) == Vertex("y")
    with pytest.raises(UnknownPointError):
        normalize_point(tripod, EdgePoint("p", "a", Fraction(1, 2)))
    with pytest.raises(UnknownPointError):
        normalize_point(tripod, EdgePoint("p", "y", 2))
    with pytest.raises(UnknownPointError):
        normalize_point(tripod, Vertex("zzz"))


def test_distance_examples(tripod):
    p, a, b = Vertex("p"), Vertex("a"), Vertex("b")
    assert distance(tripod, p, p) == 0
    assert distance(tripod, a, b) == 2
    assert distance(tripod, p, point_on_edge(tripod, "y", "a", Fraction(1, 2))) == Fraction(3, 2)
    m1 = point_on_edge(tripod, "p", "y", Fraction(1, 4))
    m2 = point_on_edge(tripod, "p", "y", Fraction(3, 4))
    assert distance(tripod, m1, m2) == Fraction(1, 2)
    assert distance(tripod, m1, point_on_edge(tripod, "y", "b", Fraction(1, 2))) == Fraction(5, 4)


def test_distance_against_floyd_warshall_oracle():
    for tree in random_corpus("fw", 12, max_nodes=7):
        rng = rng_for(("fwpts", tree.nodes()))
        pts = [random_point(rng, tree) for _ in range(5)]
        for i in range(len(pts)):
            for j in range(i, len(pts)):
                assert distance(tree, pts[i], pts[j]) == fw_distance(tree, pts[i], pts[j])


def test_distance_metric_axioms():
    for tree in random_corpus("metric", 8, max_nodes=6):
        pts = tree_grid(tree, 3)
        for x in pts:
            assert distance(tree, x, x) == 0
        rng = rng_for("metric-triples")
        for _ in range(30):
            x, y, z = (pts[rng.randrange(len(pts))] for _ in range(3))
            dxy = distance(tree, x, y)
            assert dxy == distance(tree, y, x)
            assert dxy <= distance(tree, x, z) + distance(tree, z, y)
            if dxy == 0:
                assert normalize_point(tree, x) == normalize_point(tree, y)


def test_materialize_round_trip(tripod):
    pt = point_on_edge(tripod, "p", "y", Fraction(1, 3))
    mat = materialize(tripod, [pt, Vertex("a")])
    node = mat.node_for(pt)
    assert mat.tree.dist_to_basepoint(node) == Fraction(1, 3)
    assert mat.pull_back(Vertex(node)) == pt
    assert mat.push_forward(pt) == Vertex(node)
    # interior of a subdivided half-edge maps back to source coordinates
    half = normalize_point(mat.tree, EdgePoint(node, "y", Fraction(1, 6)))
    assert normalize_point(tripod, mat.pull_back(half)) == point_on_edge(
        tripod, "p", "y", Fraction(1, 2)
    )


def test_canonicalize_merges_pass_through_nodes():
    t = TreeSkeleton("p", [("p", "m", 1), ("m", "q", 1)])
    c = canonicalize(t)
    assert c.nodes() == ("p", "q")
    assert c.edge_length("p", "q") == 2
    kept = canonicalize(t, keep=["m"])
    assert "m" in kept.nodes()


def test_point_on_segment(tripod):
    a, b = Vertex("a"), Vertex("b")
    assert point_on_segment(tripod, a, b, Fraction(1)) == Vertex("y")
    assert point_on_segment(tripod, a, b, Fraction(1, 2)) == EdgePoint(
        "a", "y", Fraction(1, 2)
    )
    assert point_on_segment(tripod, a, b, 0) == a
    assert point_on_segment(tripod, a, b, 2) == b
    with pytest.raises(ValueError):
        point_on_segment(tripod, a, b, 3)


def test_point_on_segment_distances_consistent():
    for tree in random_corpus("seg", 6, max_nodes=6):
        rng = rng_for("segpts")
        for _ in range(10):
            a = random_point(rng, tree)
            b = random_point(rng, tree)
            total = distance(tree, a, b)
            if total == 0:
                continue
            t = total * Fraction(rng.randint(0, 4), 4)
            z = point_on_segment(tree, a, b, t)
            assert distance(tree, a, z) == t
            assert distance(tree, z, b) == total - t
