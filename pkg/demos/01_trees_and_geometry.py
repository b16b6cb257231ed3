"""Build tree skeletons and explore their geodesic geometry.

A skeleton is a finite edge-weighted tree with a basepoint `p`; it stands
for the pointed real tree obtained by gluing real intervals along the
edges.  Every quantity below is an exact rational.
"""

from fractions import Fraction

from rtrees import (
    TreeSkeleton,
    Vertex,
    dist_to_center_ball,
    distance,
    endpoints,
    gromov_product,
    interpolate,
    is_between,
    median,
    point_on_edge,
    validate,
)

# The running example: a tripod with unit edges, based at a leaf.
#
#         a
#         |
#   p --- y
#         |
#         b
tripod = TreeSkeleton("p", [("p", "y", 1), ("y", "a", 1), ("y", "b", 1)])

print("validation at radius 2:", validate(tripod, 2))
print("validation at radius 3/2:", validate(tripod, Fraction(3, 2)))

p, y, a, b = Vertex("p"), Vertex("y"), Vertex("a"), Vertex("b")
print("\ndistances:")
print("  d(a, b) =", distance(tripod, a, b))

# Interior points of edges are first-class: no vertex insertion needed.
m = point_on_edge(tripod, "p", "y", Fraction(1, 2))
print("  d(p, midpoint of trunk) =", distance(tripod, p, m))
print("  d(a, midpoint of trunk) =", distance(tripod, a, m))

print("\nGromov products (distance from the base to the segment):")
print("  (a.b)_p =", gromov_product(tripod, a, b, p))
print("  (a.b)_y =", gromov_product(tripod, a, b, y))

print("\nmedians:")
print("  Y(p, a, b) =", median(tripod, p, a, b))
print("  Y(p, y, a) =", median(tripod, p, y, a), "(collinear: the middle point)")

print("\nbetweenness and interpolation:")
print("  y on [p, a]?", is_between(tripod, p, y, a))
print("  p on [a, b]?", is_between(tripod, a, p, b))
print("  point 3/4 of the way from a to b:", interpolate(tripod, a, b, Fraction(3, 4)))

print("\nclosed balls around the basepoint:")
for s in (Fraction(1, 2), 1, 2):
    print(f"  dist(a, B_{s}(p)) =", dist_to_center_ball(tripod, a, s))

print("\nendpoints (the unique smallest spanning set):",
      [e.node for e in endpoints(tripod)])
