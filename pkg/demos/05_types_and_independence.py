"""Types over parameter sets, their realizations, and independence.

A type over a finite parameter set A is pinned down by three pieces of
exact data: the closest points of its realizations on the subtree spanned
by A, the offsets to them, and the pairwise distances.  Realizing a type
attaches fresh branches; forking is visible as a moved closest point.
"""

from fractions import Fraction

from rtrees import (
    IndependenceQuery,
    TreeSkeleton,
    Vertex,
    canonical_base,
    distance,
    extend_nonforking,
    is_principal,
    is_star_independent,
    one_type_distance,
    realize_type,
    spanned_subtree,
    transfer_point,
    type_distance_search,
    type_of,
    types_equal_transferred,
    NTypeDescriptor,
    OneTypeDescriptor,
)

tripod = TreeSkeleton("p", [("p", "y", 1), ("y", "a", 1), ("y", "b", 1)])
p, y, a, b = Vertex("p"), Vertex("y"), Vertex("a"), Vertex("b")

q = type_of(tripod, [y], [a, b], 2)
print("tp((a,b) / {p,y}):")
print("  closest points:", [e.node for e in q.closest])
print("  offsets:       ", q.offsets)
print("  rho(1,2):      ", q.pairwise[0][1])
print("  canonical base:", [e.node for e in canonical_base(q)])

ext, realized = realize_type(tripod, q)
print("\nrealized on fresh branches:", realized)
q_back = type_of(ext, [transfer_point(ext, y)], realized, 2)
print("round trip reproduces the type?", types_equal_transferred(q, q_back))

# 1-types over the empty set form an interval of length r
dot = TreeSkeleton("p", (), extra_nodes=["p"])
ctx = spanned_subtree(dot, [])
q1 = OneTypeDescriptor(ctx, Fraction(2), Vertex("p"), Fraction(2))
q2 = OneTypeDescriptor(ctx, Fraction(2), Vertex("p"), Fraction(1, 2))
print("\nd(1-type at 2, 1-type at 1/2) =", one_type_distance(q1, q2))

# the equilateral 2-type family: distance exactly twice the deeper arm
def family(arm):
    return NTypeDescriptor(
        context=ctx, radius=Fraction(2),
        closest=(Vertex("p"), Vertex("p")),
        offsets=(2 * arm, 2 * arm),
        pairwise=((Fraction(0), 2 * arm), (2 * arm, Fraction(0))),
    )

cv = type_distance_search(family(Fraction(3, 4)), family(Fraction(1, 2)), Fraction(1, 32))
print("2-type family distance (arms 3/4 vs 1/2):", cv)

collinear = NTypeDescriptor(
    context=ctx, radius=Fraction(3), closest=(Vertex("p"), Vertex("p")),
    offsets=(Fraction(1), Fraction(2)),
    pairwise=((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0))),
)
print("\nprincipality over the empty set:")
print("  collinear (s = 1, 2 with rho = 1):", is_principal(collinear))
print("  tripod type (s = 2, 2 with rho = 2):", is_principal(family(Fraction(1))))

print("\nindependence on the tripod:")
verdict = is_star_independent(IndependenceQuery(tripod, (b,), (a,), ()))
print("  b indep a over {p}?", verdict.independent, "witness:", verdict.witness)
print("  a indep b over {p,y}?",
      is_star_independent(IndependenceQuery(tripod, (a,), (b,), (y,))).independent)

q_over_p = type_of(tripod, [], [a], 2)
ext_desc = extend_nonforking(tripod, q_over_p, [y])
print("  nonforking extension keeps the closest point:",
      [e.node for e in ext_desc.closest], ext_desc.offsets)
