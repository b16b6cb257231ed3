"""Model-family generators and the branching deficiency.

The deficiency psi(x) measures how far a point is from having three
sphere-reaching branches nearby; richly branching limit models drive its
supremum to zero.  Finite skeletons cannot: bare sphere-reaching edges
always leave peaks, which is quantified exactly below.
"""

from fractions import Fraction

from rtrees import (
    GeneratorConfig,
    StepFunction,
    TreeSkeleton,
    Vertex,
    au_distance,
    au_sample_ball,
    branch_degree_multiset,
    degree_family_tree,
    point_on_edge,
    psi_at,
    psi_grid_oracle,
    rb_deficiency,
    rb_extend,
)

r = Fraction(2)
tripod = TreeSkeleton("p", [("p", "y", 1), ("y", "a", 1), ("y", "b", 1)])

print("deficiency on the tripod (radius 2):")
for label, x in [("p", Vertex("p")), ("y", Vertex("y")),
                 ("trunk midpoint", point_on_edge(tripod, "p", "y", Fraction(1, 2)))]:
    exact = psi_at(tripod, x, r)
    oracle = psi_grid_oracle(tripod, x, r, r / 32)
    print(f"  psi({label}) = {exact}   (grid oracle at mesh r/32: {oracle})")
print("  sup over the whole tree:", rb_deficiency(tripod, r))

print("\nrichly-branching extension:")
for depth in (0, 1, 2):
    ext = rb_extend(tripod, r, depth)
    print(f"  depth {depth}: {len(ext.nodes())} nodes,"
          f" deficiency {rb_deficiency(ext, r)}")
print("  (the sup stabilizes at r/2: bare witness edges keep interior peaks)")

print("\ndegree families (every branch point's degree from the configured set):")
for degrees in ((3,), (4,), (3, 5)):
    cfg = GeneratorConfig(seed=0, depth=2, radius=r, degree_set=degrees)
    tree = degree_family_tree(cfg)
    print(f"  S={degrees}: branch degree multiset {branch_degree_multiset(tree)}")

print("\nthe step-function tree:")
f = StepFunction((Fraction(-1),), (1,), Fraction(0))
g = StepFunction((Fraction(-1),), (2,), Fraction(1, 2))
zero = StepFunction((), (), Fraction(0))
print("  d(f, zero) =", au_distance(f, zero))
print("  d(f, g)    =", au_distance(f, g))
funcs, ball_tree = au_sample_ball(3, 4, r, seed=11)
print("  sampled 4 functions; realized tree edges:")
for u, v, w in ball_tree.edges():
    print(f"    {u} -- {v}  ({w})")
