"""Semilinear predicates and piecewise-affine functions with direct evaluators.

The evaluators here are plain arithmetic and act as ground truth for the
verifier; nothing in this module knows about reaction networks.
"""

from __future__ import annotations

import itertools
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Union


class UndeclaredVariable(KeyError):
    pass


class PiecewiseError(ValueError):
    pass


class NoPiece(PiecewiseError):
    pass


class MultiplePieces(PiecewiseError):
    pass


class NonIntegerResult(PiecewiseError):
    pass


class NegativeResult(PiecewiseError):
    pass


Weights = tuple[tuple[str, int], ...]


def _weights(w) -> Weights:
    pairs = w.items() if isinstance(w, Mapping) else w
    out: dict[str, int] = {}
    for var, k in pairs:
        out[var] = out.get(var, 0) + int(k)
    return tuple(out.items())


def _dot(w: Weights, x: Mapping[str, int]) -> int:
    total = 0
    for var, k in w:
        if var not in x:
            raise UndeclaredVariable(var)
        total += k * x[var]
    return total


@dataclass(frozen=True)
class ThresholdAtom:
    """``w.x <= bound`` (sense "le") or ``w.x >= bound`` (sense "ge")."""

    weights: Weights
    bound: int
    sense: str = "le"

    def __post_init__(self):
        object.__setattr__(self, "weights", _weights(self.weights))
        if not self.weights:
            raise ValueError("threshold atom needs at least one variable")
        if self.sense not in ("le", "ge"):
            raise ValueError(f"sense must be 'le' or 'ge', not {self.sense!r}")

    def le_form(self) -> tuple[Weights, int]:
        if self.sense == "le":
            return self.weights, self.bound
        return tuple((v, -k) for v, k in self.weights), -self.bound

    def ge_form(self) -> tuple[Weights, int]:
        w, c = self.le_form()
        return tuple((v, -k) for v, k in w), -c

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.weights)


@dataclass(frozen=True)
class ModAtom:
    """``w.x == residue (mod modulus)``; weights and residue stored reduced."""

    weights: Weights
    residue: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 2:
            raise ValueError("modulus must be at least 2")
        m = self.modulus
        object.__setattr__(self, "weights", tuple((v, k % m) for v, k in _weights(self.weights)))
        object.__setattr__(self, "residue", self.residue % m)
        if not self.weights:
            raise ValueError("mod atom needs at least one variable")

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.weights)


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Or:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Not:
    arg: "Expr"


Atom = Union[ThresholdAtom, ModAtom]
Expr = Union[ThresholdAtom, ModAtom, And, Or, Not]


def variables_of(expr: Expr) -> tuple[str, ...]:
    """Variables in order of first appearance."""
    if isinstance(expr, (ThresholdAtom, ModAtom)):
        return expr.variables
    if isinstance(expr, Not):
        return variables_of(expr.arg)
    return tuple(dict.fromkeys(variables_of(expr.left) + variables_of(expr.right)))


@dataclass(frozen=True)
class Predicate:
    """A predicate expression together with its declared variable list."""

    variables: tuple[str, ...]
    expr: Expr

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        undeclared = set(variables_of(self.expr)) - set(self.variables)
        if undeclared:
            raise UndeclaredVariable(", ".join(sorted(undeclared)))

    @classmethod
    def infer(cls, expr: Expr) -> "Predicate":
        return cls(variables_of(expr), expr)


def _input(variables: Sequence[str], x) -> dict[str, int]:
    if isinstance(x, Mapping):
        extra = set(x) - set(variables)
        if extra:
            raise UndeclaredVariable(", ".join(sorted(extra)))
        vals = {v: x.get(v, 0) for v in variables}
    else:
        x = tuple(x)
        if len(x) != len(variables):
            raise ValueError(f"expected {len(variables)} values, got {len(x)}")
        vals = dict(zip(variables, x))
    if any(n < 0 for n in vals.values()):
        raise ValueError("inputs must be nonnegative")
    return vals


def eval_expr(expr: Expr, x: Mapping[str, int]) -> int:
    if isinstance(expr, ThresholdAtom):
        w, c = expr.le_form()
        return int(_dot(w, x) <= c)
    if isinstance(expr, ModAtom):
        return int(_dot(expr.weights, x) % expr.modulus == expr.residue)
    if isinstance(expr, Not):
        return 1 - eval_expr(expr.arg, x)
    if isinstance(expr, And):
        return eval_expr(expr.left, x) & eval_expr(expr.right, x)
    if isinstance(expr, Or):
        return eval_expr(expr.left, x) | eval_expr(expr.right, x)
    raise TypeError(f"not a predicate expression: {expr!r}")


def eval_predicate(pred: Union[Predicate, Expr], x) -> int:
    """Truth value (0 or 1) of ``pred`` at input ``x``."""
    if not isinstance(pred, Predicate):
        pred = Predicate.infer(pred)
    return eval_expr(pred.expr, _input(pred.variables, x))


# --- piecewise-affine functions --------------------------------------------

@dataclass(frozen=True)
class AffinePiece:
    """``b + (1/d) * sum_i n_i (x_i - c_i)`` on the inputs satisfying ``domain``.

    ``numerators`` are the ``n_i = d * a_i``; ``offsets`` the ``c_i``.
    """

    domain: Expr
    offset_b: int
    divisor_d: int
    numerators: Weights
    offsets_c: Weights = ()

    def __post_init__(self):
        object.__setattr__(self, "numerators", _weights(self.numerators))
        object.__setattr__(self, "offsets_c", _weights(self.offsets_c))
        if self.offset_b < 0:
            raise ValueError("offset b must be nonnegative")
        if self.divisor_d < 1:
            raise ValueError("divisor d must be positive")
        if any(c < 0 for _, c in self.offsets_c):
            raise ValueError("offsets c_i must be nonnegative")

    @property
    def variables(self) -> tuple[str, ...]:
        names = variables_of(self.domain) + tuple(v for v, _ in self.numerators)
        return tuple(dict.fromkeys(names + tuple(v for v, _ in self.offsets_c)))

    def numerator(self, var: str) -> int:
        return dict(self.numerators).get(var, 0)

    def offset(self, var: str) -> int:
        return dict(self.offsets_c).get(var, 0)

    def exact_value(self, x: Mapping[str, int]) -> Fraction:
        """Rational value of the formula, with no integrality checks."""
        s = sum(n * (x[v] - self.offset(v)) for v, n in self.numerators)
        return self.offset_b + Fraction(s, self.divisor_d)

    def value(self, x: Mapping[str, int]) -> int:
        """Integer value of the piece at ``x``, which must lie in its domain.

        Positive and negative parts are each floored by ``d``, matching a CRN
        that emits one output per ``d`` accumulated units of either sign.  So
        with only nonnegative numerators this is ``b + floor(sum / d)``; once any
        numerator is negative the weighted sum must be divisible by ``d``.
        """
        for v, c in self.offsets_c:
            if x[v] < c:
                raise NegativeResult(f"{v}={x[v]} below offset {c}")
        pos = sum(n * (x[v] - self.offset(v)) for v, n in self.numerators if n > 0)
        neg = -sum(n * (x[v] - self.offset(v)) for v, n in self.numerators if n < 0)
        d = self.divisor_d
        if (pos - neg) % d and any(n < 0 for _, n in self.numerators):
            raise NonIntegerResult(f"{pos - neg}/{d} is not an integer")
        y = self.offset_b + pos // d - neg // d
        if y < 0:
            raise NegativeResult(f"piece value {y} is negative")
        return y


@dataclass(frozen=True)
class PiecewiseFn:
    variables: tuple[str, ...]
    pieces: tuple[AffinePiece, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if not self.pieces:
            raise ValueError("piecewise function needs at least one piece")
        for p in self.pieces:
            undeclared = set(p.variables) - set(self.variables)
            if undeclared:
                raise UndeclaredVariable(", ".join(sorted(undeclared)))

    def domain_predicate(self, i: int) -> Predicate:
        return Predicate(self.variables, self.pieces[i].domain)


def covering_pieces(f: PiecewiseFn, x: Mapping[str, int]) -> list[int]:
    return [i for i, p in enumerate(f.pieces) if eval_expr(p.domain, x)]


def eval_function(f: PiecewiseFn, x) -> int:
    vals = _input(f.variables, x)
    hits = covering_pieces(f, vals)
    if not hits:
        raise NoPiece(f"no piece covers {vals}")
    if len(hits) > 1:
        raise MultiplePieces(f"pieces {hits} all cover {vals}")
    return f.pieces[hits[0]].value(vals)


@dataclass(frozen=True)
class Violation:
    x: tuple[int, ...]
    pieces: tuple[int, ...]
    kind: str  # "uncovered" | "overlap" | "value"
    detail: str = ""


def grid(dim: int, bound: int):
    return itertools.product(range(bound + 1), repeat=dim)


def check_disjoint(f: PiecewiseFn, grid_bound: int) -> list[Violation]:
    """Every grid point in ``{0..grid_bound}^d`` not covered by exactly one piece."""
    if grid_bound < 0:
        raise ValueError("grid_bound must be nonnegative")
    out = []
    for x in grid(len(f.variables), grid_bound):
        hits = covering_pieces(f, dict(zip(f.variables, x)))
        if len(hits) != 1:
            out.append(Violation(x, tuple(hits), "uncovered" if not hits else "overlap"))
    return out


def check_values(f: PiecewiseFn, grid_bound: int) -> list[Violation]:
    """Grid points where the covering piece's value is not a natural number."""
    out = []
    for x in grid(len(f.variables), grid_bound):
        vals = dict(zip(f.variables, x))
        for i in covering_pieces(f, vals):
            try:
                f.pieces[i].value(vals)
            except PiecewiseError as e:
                out.append(Violation(x, (i,), "value", str(e)))
    return out
