"""Glue trees together: family attachments, basepoint stars, amalgams.

Amalgamation over a shared subtree takes the branches of the right factor
hanging off the shared part and reattaches them, wholesale, at the
matching points of the left factor.  Distances within each factor are
preserved exactly and paths between factors run through the projections
onto the shared subtree.
"""

from fractions import Fraction

from rtrees import (
    GlueSpec,
    SubtreeMap,
    TreeSkeleton,
    Vertex,
    amalgamate,
    distance,
    glue_family,
    segment,
    star_amalgam,
    validate,
)


def tripod():
    return TreeSkeleton("p", [("p", "y", 1), ("y", "a", 1), ("y", "b", 1)])


# attach a unit segment at the branch point of the tripod
arm = segment(1, basepoint="s0", tip="c")
glued = glue_family(GlueSpec(base=tripod(), attachments=((arm, Vertex("s0"), Vertex("y")),)), 2)
c = next(n for n in glued.nodes() if n.endswith(":c"))
print("glued a new leaf c at y:")
print("  d(p, c) =", distance(glued, Vertex("p"), Vertex(c)))
print("  d(a, c) =", distance(glued, Vertex("a"), Vertex(c)))

# a star of two diameters through the basepoint
star = star_amalgam([segment(2), segment(2)], 2)
tips = [n for n in star.nodes() if star.degree(n) == 1]
print("\nstar of two radius-2 segments: d(tip, tip) =",
      distance(star, Vertex(tips[0]), Vertex(tips[1])))

# amalgamate two tripods over their shared trunk [p, y]
left, right = tripod(), tripod()
shared = SubtreeMap(
    source=left,
    target=right,
    pairs=((Vertex("p"), Vertex("p")), (Vertex("y"), Vertex("y"))),
)
amalgam, g1, g2 = amalgamate(left, right, shared, 2)
print("\namalgam of two tripods over the trunk:")
print("  nodes:", sorted(amalgam.nodes()))
a1 = dict(g1.pairs)[Vertex("a")]
a2 = dict(g2.pairs)[Vertex("a")]
print("  the two copies of leaf a sit at distance", distance(amalgam, a1, a2))
print("  valid at radius 2?", validate(amalgam, 2).ok)
