"""Finite metrics and trees: the four-point condition both ways.

A finite metric embeds in a real tree exactly when every quadruple
satisfies d(x,y) + d(z,t) <= max(d(x,z) + d(y,t), d(y,z) + d(x,t)).
`realize_tree` reconstructs the (unique minimal) tree from such a metric,
and `tree_to_matrix` goes back, exactly.
"""

from fractions import Fraction

from rtrees import (
    MetricMatrix,
    Vertex,
    delta_hyperbolicity,
    four_point_check,
    random_tree,
    realize_tree,
    tree_to_matrix,
)
from rtrees.matrices import node_of_label

# Three leaves pairwise at distance 2: the metric of a unit tripod.
leaves = MetricMatrix(("p", "a", "b"), ((0, 2, 2), (2, 0, 2), (2, 2, 0)))
print("four-point check:", four_point_check(leaves))
tree = realize_tree(leaves, "p")
print("realized edges:", tree.edges())

# A non-additive square: the check returns the first violating quadruple.
square = MetricMatrix(
    ("x", "y", "z", "t"),
    ((0, 2, 1, 1), (2, 0, 1, 1), (1, 1, 0, 2), (1, 1, 2, 0)),
)
print("\nsquare metric:", four_point_check(square))
print("its hyperbolicity defect:", delta_hyperbolicity(square))

# Round trip on a random tree: sample labeled points, rebuild, compare.
t = random_tree(7, max_nodes=8, radius=Fraction(2))
names = [f"x{i}" for i, _ in enumerate(t.nodes())]
pts = [Vertex(n) for n in t.nodes()]
m = tree_to_matrix(t, pts, labels=names)
back = realize_tree(m, "x0")
m2 = tree_to_matrix(back, [Vertex(node_of_label(back, s)) for s in names], labels=names)
print("\nround trip on a random 8-node tree exact?", m2.entries == m.entries)
print("delta of any tree metric:", delta_hyperbolicity(m))
