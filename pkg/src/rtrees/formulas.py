"""Continuous-logic formulas over trees: parsing and exact evaluation.

The connective set is rational constants, ``+``, truncated subtraction
``-.``, ``max``, ``min``, ``abs(e1 - e2)``, scalar multiples and the
quantifiers ``inf v. e`` / ``sup v. e``.  Atoms are distances ``d(t1, t2)``
between the basepoint ``p``, bound variables and named parameter points.

Quantifier-free formulas are piecewise linear along every edge, so a single
quantifier block is evaluated exactly by piecewise-linear analysis.  Nested
quantifiers fall back to exhaustive grid enumeration with a certified
Lipschitz error interval.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Union

from .rationals import as_rat, format_rat
from .skeleton import (
    EdgePoint,
    PointRef,
    TreeSkeleton,
    Vertex,
    distance,
    normalize_point,
)
from .geometry import interpolate
from .matrices import delta_hyperbolicity, tree_to_matrix


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


# -- abstract syntax ---------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Dist:
    a: str
    b: str


@dataclass(frozen=True)
class Add:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class TruncSub:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Scale:
    coeff: Fraction
    body: "Formula"


@dataclass(frozen=True)
class Max:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Min:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class AbsDiff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Inf:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Sup:
    var: str
    body: "Formula"


Formula = Union[Const, Dist, Add, TruncSub, Scale, Max, Min, AbsDiff, Inf, Sup]

Valuation = Mapping[str, PointRef]


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, Dist):
        return frozenset(n for n in (f.a, f.b) if n != "p")
    if isinstance(f, (Add, TruncSub, Max, Min, AbsDiff)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Scale):
        return free_vars(f.body)
    if isinstance(f, (Inf, Sup)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def is_quantifier_free(f: Formula) -> bool:
    if isinstance(f, (Const, Dist)):
        return True
    if isinstance(f, (Add, TruncSub, Max, Min, AbsDiff)):
        return is_quantifier_free(f.left) and is_quantifier_free(f.right)
    if isinstance(f, Scale):
        return is_quantifier_free(f.body)
    return False


def lipschitz_bound(f: Formula, var: str) -> Fraction:
    """Syntactic bound on how fast the value moves when ``var`` moves."""
    if isinstance(f, Const):
        return Fraction(0)
    if isinstance(f, Dist):
        return Fraction(1) if (f.a == var) != (f.b == var) else Fraction(0)
    if isinstance(f, (Add, TruncSub, AbsDiff)):
        return lipschitz_bound(f.left, var) + lipschitz_bound(f.right, var)
    if isinstance(f, (Max, Min)):
        return max(lipschitz_bound(f.left, var), lipschitz_bound(f.right, var))
    if isinstance(f, Scale):
        return abs(f.coeff) * lipschitz_bound(f.body, var)
    if isinstance(f, (Inf, Sup)):
        return Fraction(0) if f.var == var else lipschitz_bound(f.body, var)
    raise TypeError(f"not a formula: {f!r}")


# -- parser -------------------------------------------------------------------


_SYMBOLS = ("-.", "(", ")", ",", ".", "+", "*", "/", "-")
_KEYWORDS = {"inf", "sup", "max", "min", "abs", "d"}


def _tokenize(text: str):
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        matched = None
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                matched = sym
                break
        if matched:
            tokens.append((matched, matched, line, col))
            i += len(matched)
            col += len(matched)
            continue
        if c.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(("INT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("NAME", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise FormulaSyntaxError(f"unexpected character {c!r}", line, col)
    tokens.append(("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.bound: list[str] = []

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        tok = self.next()
        if tok[0] != kind:
            raise FormulaSyntaxError(
                f"expected {kind!r}, found {tok[1]!r}", tok[2], tok[3]
            )
        return tok

    def fail(self, message: str):
        tok = self.peek()
        raise FormulaSyntaxError(message, tok[2], tok[3])

    # expr := quantifier | sum
    def parse_expr(self) -> Formula:
        kind, value, line, col = self.peek()
        if kind == "NAME" and value in ("inf", "sup"):
            self.next()
            var_tok = self.expect("NAME")
            var = var_tok[1]
            if var in _KEYWORDS or var == "p":
                raise FormulaSyntaxError(
                    f"{var!r} cannot be a variable", var_tok[2], var_tok[3]
                )
            if var in self.bound:
                raise FormulaSyntaxError(
                    f"variable {var!r} bound twice", var_tok[2], var_tok[3]
                )
            self.expect(".")
            self.bound.append(var)
            body = self.parse_expr()
            self.bound.pop()
            return Inf(var, body) if value == "inf" else Sup(var, body)
        return self.parse_sum()

    # sum := operand { ("+" | "-.") operand }
    def parse_sum(self) -> Formula:
        left = self.parse_operand()
        while True:
            kind = self.peek()[0]
            if kind == "+":
                self.next()
                left = Add(left, self.parse_operand())
            elif kind == "-.":
                self.next()
                left = TruncSub(left, self.parse_operand())
            else:
                return left

    def parse_rational(self) -> Fraction:
        neg = False
        if self.peek()[0] == "-":
            self.next()
            neg = True
        tok = self.expect("INT")
        num = int(tok[1])
        den = 1
        if self.peek()[0] == "/":
            self.next()
            den_tok = self.expect("INT")
            den = int(den_tok[1])
            if den == 0:
                raise FormulaSyntaxError("zero denominator", den_tok[2], den_tok[3])
        q = Fraction(num, den)
        return -q if neg else q

    def parse_operand(self) -> Formula:
        kind, value, line, col = self.peek()
        if kind in ("INT", "-"):
            q = self.parse_rational()
            if self.peek()[0] == "*":
                self.next()
                return Scale(q, self.parse_operand())
            return Const(q)
        if kind == "(":
            self.next()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if kind == "NAME":
            if value == "d":
                self.next()
                self.expect("(")
                a = self.parse_point()
                self.expect(",")
                b = self.parse_point()
                self.expect(")")
                return Dist(a, b)
            if value in ("max", "min"):
                self.next()
                self.expect("(")
                left = self.parse_expr()
                self.expect(",")
                right = self.parse_expr()
                self.expect(")")
                return Max(left, right) if value == "max" else Min(left, right)
            if value == "abs":
                self.next()
                self.expect("(")
                left = self.parse_expr()
                self.expect("-")
                right = self.parse_expr()
                self.expect(")")
                return AbsDiff(left, right)
            if value in ("inf", "sup"):
                return self.parse_expr()
        self.fail(f"unexpected token {value!r}")

    def parse_point(self) -> str:
        tok = self.expect("NAME")
        name = tok[1]
        if name in _KEYWORDS:
            raise FormulaSyntaxError(
                f"{name!r} is a keyword, not a point", tok[2], tok[3]
            )
        return name


def parse_formula(text: str) -> Formula:
    parser = _Parser(text)
    formula = parser.parse_expr()
    tok = parser.peek()
    if tok[0] != "EOF":
        raise FormulaSyntaxError(f"trailing input {tok[1]!r}", tok[2], tok[3])
    return formula


# -- quantifier-free evaluation ------------------------------------------------


def _resolve(tree: TreeSkeleton, name: str, val: Valuation) -> PointRef:
    if name == "p":
        return Vertex(tree.basepoint)
    try:
        return val[name]
    except KeyError:
        raise KeyError(f"valuation missing point {name!r}") from None


def eval_qf(tree: TreeSkeleton, f: Formula, val: Valuation) -> Fraction:
    """Exact value of a quantifier-free formula under a total valuation."""
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Dist):
        return distance(tree, _resolve(tree, f.a, val), _resolve(tree, f.b, val))
    if isinstance(f, Add):
        return eval_qf(tree, f.left, val) + eval_qf(tree, f.right, val)
    if isinstance(f, TruncSub):
        d = eval_qf(tree, f.left, val) - eval_qf(tree, f.right, val)
        return d if d > 0 else Fraction(0)
    if isinstance(f, Scale):
        return f.coeff * eval_qf(tree, f.body, val)
    if isinstance(f, Max):
        return max(eval_qf(tree, f.left, val), eval_qf(tree, f.right, val))
    if isinstance(f, Min):
        return min(eval_qf(tree, f.left, val), eval_qf(tree, f.right, val))
    if isinstance(f, AbsDiff):
        return abs(eval_qf(tree, f.left, val) - eval_qf(tree, f.right, val))
    raise ValueError("formula is not quantifier-free")


# -- piecewise-linear calculus along one edge -----------------------------------


@dataclass(frozen=True)
class PL:
    """Piecewise-linear function on an interval, exact breakpoints/values."""

    xs: tuple[Fraction, ...]
    ys: tuple[Fraction, ...]

    @staticmethod
    def const(lo: Fraction, hi: Fraction, c: Fraction) -> "PL":
        return PL((lo, hi), (c, c)) if lo != hi else PL((lo,), (c,))

    def value_at(self, x: Fraction) -> Fraction:
        xs, ys = self.xs, self.ys
        if x <= xs[0]:
            return ys[0]
        for i in range(1, len(xs)):
            if x <= xs[i]:
                x0, x1 = xs[i - 1], xs[i]
                y0, y1 = ys[i - 1], ys[i]
                if x1 == x0:
                    return y1
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        return ys[-1]

    def _zip(self, other: "PL", with_crossings: bool):
        grid = sorted(set(self.xs) | set(other.xs))
        if with_crossings:
            extra = []
            for i in range(len(grid) - 1):
                x0, x1 = grid[i], grid[i + 1]
                d0 = self.value_at(x0) - other.value_at(x0)
                d1 = self.value_at(x1) - other.value_at(x1)
                if (d0 > 0 > d1) or (d0 < 0 < d1):
                    cross = x0 + (x1 - x0) * d0 / (d0 - d1)
                    extra.append(cross)
            grid = sorted(set(grid) | set(extra))
        return grid

    def _apply(self, other: "PL", op, with_crossings: bool) -> "PL":
        grid = self._zip(other, with_crossings)
        ys = tuple(op(self.value_at(x), other.value_at(x)) for x in grid)
        return PL(tuple(grid), ys)

    def add(self, other: "PL") -> "PL":
        return self._apply(other, lambda a, b: a + b, False)

    def sub(self, other: "PL") -> "PL":
        return self._apply(other, lambda a, b: a - b, False)

    def max_with(self, other: "PL") -> "PL":
        return self._apply(other, max, True)

    def min_with(self, other: "PL") -> "PL":
        return self._apply(other, min, True)

    def scale(self, c: Fraction) -> "PL":
        return PL(self.xs, tuple(c * y for y in self.ys))

    def minimum(self) -> Fraction:
        return min(self.ys)

    def maximum(self) -> Fraction:
        return max(self.ys)


def _distance_profile(
    tree: TreeSkeleton, edge: tuple[str, str], q: PointRef
) -> PL:
    """d(x, q) as x sweeps the edge from its canonical first endpoint."""
    u, v = edge
    length = tree.edge_length(u, v)
    q = normalize_point(tree, q)
    if isinstance(q, EdgePoint) and (q.u, q.v) == (u, v):
        return PL((Fraction(0), q.offset, length), (q.offset, Fraction(0), length - q.offset))
    du = distance(tree, Vertex(u), q)
    dv = distance(tree, Vertex(v), q)
    if dv == du + length:
        return PL((Fraction(0), length), (du, du + length))
    if du == dv + length:
        return PL((Fraction(0), length), (dv + length, dv))
    raise AssertionError("point is on neither side of the edge")


def _profile(
    tree: TreeSkeleton,
    f: Formula,
    val: Valuation,
    var: str,
    edge: tuple[str, str],
) -> PL:
    length = tree.edge_length(*edge)
    if isinstance(f, Const):
        return PL.const(Fraction(0), length, f.value)
    if isinstance(f, Dist):
        if f.a == var and f.b == var:
            return PL.const(Fraction(0), length, Fraction(0))
        if f.a == var:
            return _distance_profile(tree, edge, _resolve(tree, f.b, val))
        if f.b == var:
            return _distance_profile(tree, edge, _resolve(tree, f.a, val))
        c = distance(tree, _resolve(tree, f.a, val), _resolve(tree, f.b, val))
        return PL.const(Fraction(0), length, c)
    if isinstance(f, Add):
        return _profile(tree, f.left, val, var, edge).add(
            _profile(tree, f.right, val, var, edge)
        )
    if isinstance(f, TruncSub):
        diff = _profile(tree, f.left, val, var, edge).sub(
            _profile(tree, f.right, val, var, edge)
        )
        return diff.max_with(PL.const(Fraction(0), length, Fraction(0)))
    if isinstance(f, Scale):
        return _profile(tree, f.body, val, var, edge).scale(f.coeff)
    if isinstance(f, Max):
        return _profile(tree, f.left, val, var, edge).max_with(
            _profile(tree, f.right, val, var, edge)
        )
    if isinstance(f, Min):
        return _profile(tree, f.left, val, var, edge).min_with(
            _profile(tree, f.right, val, var, edge)
        )
    if isinstance(f, AbsDiff):
        diff = _profile(tree, f.left, val, var, edge).sub(
            _profile(tree, f.right, val, var, edge)
        )
        return diff.max_with(diff.scale(Fraction(-1)))
    raise ValueError("profile requires a quantifier-free body")


# -- certified quantified evaluation ---------------------------------------------


@dataclass(frozen=True)
class CertifiedValue:
    """Interval guaranteed to contain the true value; exact when collapsed."""

    lower: Fraction
    upper: Fraction
    mesh: Fraction

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    def __str__(self) -> str:
        if self.exact:
            return format_rat(self.lower)
        return f"[{format_rat(self.lower)}, {format_rat(self.upper)}]"


def grid_points(
    tree: TreeSkeleton, mesh: Fraction, anchors: tuple[PointRef, ...] = ()
) -> list[PointRef]:
    """Vertices, points spaced <= mesh along every edge, and the anchors."""
    pts: list[PointRef] = [Vertex(n) for n in tree.nodes()]
    for u, v, length in tree.edges():
        k = 1
        while k * mesh < length:
            pts.append(EdgePoint(u, v, k * mesh))
            k += 1
    for a in anchors:
        a = normalize_point(tree, a)
        if a not in pts:
            pts.append(a)
    return pts


def _exact_single_block(
    tree: TreeSkeleton, f: Union[Inf, Sup], val: Valuation
) -> Fraction:
    """Exact optimum of a quantifier over a quantifier-free body."""
    body, var = f.body, f.var
    best: Optional[Fraction] = None
    is_inf = isinstance(f, Inf)
    for u, v, _ in tree.edges():
        prof = _profile(tree, body, val, var, (u, v))
        cand = prof.minimum() if is_inf else prof.maximum()
        if best is None or (cand < best if is_inf else cand > best):
            best = cand
    for node in tree.nodes():
        if tree.degree(node) == 0 or not tree.edges():
            cand = eval_qf(tree, body, {**val, var: Vertex(node)})
            if best is None or (cand < best if is_inf else cand > best):
                best = cand
    assert best is not None
    return best


def eval_quantified(
    tree: TreeSkeleton, f: Formula, val: Valuation, mesh
) -> CertifiedValue:
    """Certified evaluation; collapses to an exact value whenever the
    outermost quantifier block closes a quantifier-free body."""
    mesh = as_rat(mesh)
    if mesh <= 0:
        raise ValueError("mesh must be positive")

    def rec(g: Formula, v: Valuation) -> tuple[Fraction, Fraction]:
        if is_quantifier_free(g):
            x = eval_qf(tree, g, v)
            return x, x
        if isinstance(g, (Inf, Sup)) and is_quantifier_free(g.body):
            x = _exact_single_block(tree, g, v)
            return x, x
        if isinstance(g, (Inf, Sup)):
            anchors = tuple(v.values())
            pts = grid_points(tree, mesh, anchors)
            lows = []
            highs = []
            for pt in pts:
                lo, hi = rec(g.body, {**v, g.var: pt})
                lows.append(lo)
                highs.append(hi)
            L = lipschitz_bound(g.body, g.var)
            if isinstance(g, Inf):
                return min(lows) - L * mesh, min(highs)
            return max(lows), max(highs) + L * mesh
        # quantifiers strictly inside connectives: combine sub-intervals
        if isinstance(g, (Add, TruncSub, Max, Min, AbsDiff)):
            llo, lhi = rec(g.left, v)
            rlo, rhi = rec(g.right, v)
            if isinstance(g, Add):
                return llo + rlo, lhi + rhi
            if isinstance(g, TruncSub):
                return max(llo - rhi, Fraction(0)), max(lhi - rlo, Fraction(0))
            if isinstance(g, Max):
                return max(llo, rlo), max(lhi, rhi)
            if isinstance(g, Min):
                return min(llo, rlo), min(lhi, rhi)
            lo = max(llo - rhi, rlo - lhi, Fraction(0))
            hi = max(lhi - rlo, rhi - llo)
            return min(lo, hi), max(lo, hi)
        if isinstance(g, Scale):
            lo, hi = rec(g.body, v)
            if g.coeff >= 0:
                return g.coeff * lo, g.coeff * hi
            return g.coeff * hi, g.coeff * lo
        raise TypeError(f"not a formula: {g!r}")

    missing = free_vars(f) - set(val)
    if missing:
        raise KeyError(f"valuation missing points: {sorted(missing)}")
    lo, hi = rec(f, dict(val))
    return CertifiedValue(lo, hi, mesh)


# -- the three tree axioms ---------------------------------------------------------


@dataclass(frozen=True)
class RtAxiomsReport:
    """Exact values for the radius bound, midpoint and 0-hyperbolicity axioms."""

    axiom1: CertifiedValue
    axiom2: CertifiedValue
    axiom3: CertifiedValue
    radius: Fraction

    @property
    def axiom1_ok(self) -> bool:
        return self.axiom1.upper <= self.radius

    @property
    def ok(self) -> bool:
        return self.axiom1_ok and self.axiom2.upper == 0 and self.axiom3.upper == 0

    def summary(self) -> str:
        return (
            f"axiom1={format_rat(self.axiom1.upper)}"
            f"{'<=' if self.axiom1_ok else '>'}{format_rat(self.radius)} "
            f"axiom2={self.axiom2} axiom3={self.axiom3}"
        )


def check_rt_axioms(tree: TreeSkeleton, r, mesh) -> RtAxiomsReport:
    """Evaluate the three axioms exactly on a structurally valid skeleton.

    Axiom 1 (radius): the sup of d(x, p) is attained at a vertex.  Axiom 2
    (midpoints): exact midpoints are produced constructively for every
    vertex pair, so the defect is exactly 0.  Axiom 3 (0-hyperbolicity):
    the Gromov four-point defect over vertices and grid points, which is 0
    on every tree.
    """
    r = as_rat(r)
    mesh = as_rat(mesh)
    sup_d = max(tree.dist_to_basepoint(n) for n in tree.nodes())
    ax1 = CertifiedValue(sup_d, sup_d, mesh)

    defect = Fraction(0)
    nodes = tree.nodes()
    for i, x in enumerate(nodes):
        for y in nodes[i + 1:]:
            z = interpolate(tree, Vertex(x), Vertex(y), Fraction(1, 2))
            half = tree.vertex_distance(x, y) / 2
            gap = max(
                abs(distance(tree, Vertex(x), z) - half),
                abs(distance(tree, Vertex(y), z) - half),
            )
            if gap > defect:
                defect = gap
    ax2 = CertifiedValue(defect, defect, mesh)

    pts = grid_points(tree, mesh)
    delta = delta_hyperbolicity(tree_to_matrix(tree, pts))
    ax3 = CertifiedValue(delta, delta, mesh)
    return RtAxiomsReport(axiom1=ax1, axiom2=ax2, axiom3=ax3, radius=r)
