"""Evaluate continuous-logic formulas on trees.

Quantifier-free formulas evaluate to exact rationals.  A single quantifier
over a quantifier-free body is solved exactly by piecewise-linear analysis
along every edge; nested quantifiers fall back to a grid with a certified
Lipschitz error interval.
"""

from fractions import Fraction

from rtrees import (
    TreeSkeleton,
    Vertex,
    check_rt_axioms,
    eval_qf,
    eval_quantified,
    parse_formula,
)

tripod = TreeSkeleton("p", [("p", "y", 1), ("y", "a", 1), ("y", "b", 1)])
val = {"a": Vertex("a"), "b": Vertex("b")}

f = parse_formula("d(a,b) -. 1/2 * d(a,p)")
print("d(a,b) -. d(a,p)/2 =", eval_qf(tripod, f, val))

# single quantifier: exact, even when the optimum is inside an edge
for text in ("sup x. d(x,p)",
             "inf x. max(d(x,a), d(x,b))",
             "inf x. abs(d(x,a) - d(x,p))"):
    cv = eval_quantified(tripod, parse_formula(text), val, Fraction(1, 4))
    print(f"{text:35s} -> {cv}")

# nested quantifiers: certified interval (here the true value is 0)
midpoints = parse_formula(
    "sup x. sup y. inf z. max(abs(d(x,z) - 1/2 * d(x,y)),"
    " abs(d(y,z) - 1/2 * d(x,y)))"
)
print("midpoint defect:", eval_quantified(tripod, midpoints, {}, Fraction(1, 4)))

# the three axioms of bounded pointed real trees, evaluated exactly
print("\naxioms at radius 2:  ", check_rt_axioms(tripod, 2, Fraction(1, 2)).summary())
print("axioms at radius 3/2:", check_rt_axioms(tripod, Fraction(3, 2), Fraction(1, 2)).summary())
