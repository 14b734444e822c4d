"""
Primary semialgebraic systems: emission of realization-space systems, exact
membership, stable-projection fibers, projective scales and a compiler of
polynomial systems into binary addition/multiplication constraints.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np
import sympy as sp

from services.hull_lattice import FaceLattice, candidate_basis, is_realization
from services.numeric_core import (
    DimensionMismatchError,
    MatrixQ,
    PointConfiguration,
    PolytopeToolkitError,
    Vector,
    affine_basis,
    collinear,
    dot,
    null_space,
    orientation,
    sub,
    to_rational,
    to_vector,
)

logger = logging.getLogger(__name__)

Exponents = tuple[int, ...]


class InvalidBasisError(PolytopeToolkitError):
    """Raised when a basis is not d+1 affinely independent vertices of a realization."""
    pass


class NonPrimarySystemError(PolytopeToolkitError):
    """Raised when a system with non-strict inequalities is given where a primary one is needed."""
    pass


class NotASolutionError(PolytopeToolkitError):
    """Raised when a vector does not satisfy the system it is supposed to solve."""
    pass


class CollinearityError(PolytopeToolkitError):
    """Raised when a point is not on the line of a projective scale."""
    pass


def _sympy_rational(value: Fraction) -> sp.Rational:
    return sp.Rational(value.numerator, value.denominator)


@dataclass(frozen=True)
class PolynomialZ:
    """Polynomial with integer coefficients as sorted (exponents, coefficient) terms."""

    n_vars: int
    terms: tuple[tuple[Exponents, int], ...] = ()

    def __post_init__(self):
        for exponents, coefficient in self.terms:
            if len(exponents) != self.n_vars:
                raise ValueError(f"exponent vector {exponents} does not have {self.n_vars} entries")
            if coefficient == 0:
                raise ValueError("zero coefficients are not stored")

    @classmethod
    def from_terms(cls, n_vars: int, terms: Mapping[Exponents, int] | Iterable[tuple[Exponents, int]]) -> "PolynomialZ":
        collected: dict[Exponents, int] = defaultdict(int)
        items = terms.items() if isinstance(terms, Mapping) else terms
        for exponents, coefficient in items:
            collected[tuple(int(e) for e in exponents)] += int(coefficient)
        return cls(n_vars, tuple(sorted((e, c) for e, c in collected.items() if c != 0)))

    @classmethod
    def constant(cls, n_vars: int, value: int) -> "PolynomialZ":
        return cls.from_terms(n_vars, {(0,) * n_vars: value})

    @classmethod
    def variable(cls, n_vars: int, i: int) -> "PolynomialZ":
        return cls.from_terms(n_vars, {tuple(int(k == i) for k in range(n_vars)): 1})

    @classmethod
    def from_sympy(cls, expr, symbols: Sequence[sp.Symbol], clear_denominators: bool = False) -> "PolynomialZ":
        """
        Convert a sympy expression that is polynomial in ``symbols``.

        With ``clear_denominators`` the expression is first multiplied by the
        (positive) lcm of its coefficient denominators, which keeps its sign.
        """
        expr = sp.expand(sp.sympify(expr))
        if symbols:
            raw = [(tuple(m), sp.Rational(c)) for m, c in sp.Poly(expr, *symbols).terms()]
        else:
            raw = [((), sp.Rational(expr))]
        denominators = [int(c.q) for _, c in raw]
        factor = lcm(*denominators) if clear_denominators and denominators else 1
        terms = []
        for exponents, c in raw:
            scaled = c * factor
            if scaled.q != 1:
                raise ValueError(f"coefficient {c} is not an integer")
            terms.append((exponents, int(scaled.p)))
        return cls.from_terms(len(symbols), terms)

    @classmethod
    def parse(cls, text: str, names: Sequence[str]) -> "PolynomialZ":
        """Parse "expr" or "lhs = rhs" (read as lhs - rhs) over the named variables."""
        symbols = [sp.Symbol(name) for name in names]
        local = {name: s for name, s in zip(names, symbols)}
        if "=" in text:
            lhs, rhs = text.split("=", 1)
            expr = sp.parse_expr(lhs, local_dict=local) - sp.parse_expr(rhs, local_dict=local)
        else:
            expr = sp.parse_expr(text, local_dict=local)
        unknown = expr.free_symbols - set(symbols)
        if unknown:
            raise ValueError(f"unknown variables {sorted(map(str, unknown))} in {text!r}")
        return cls.from_sympy(expr, symbols)

    def to_sympy(self, symbols: Sequence[sp.Symbol]):
        return sp.Add(*[
            c * sp.Mul(*[s ** e for s, e in zip(symbols, exponents)]) for exponents, c in self.terms
        ])

    def to_text(self, names: Sequence[str]) -> str:
        return str(self.to_sympy([sp.Symbol(n) for n in names]))

    def evaluate(self, point: Sequence) -> Fraction:
        if len(point) != self.n_vars:
            raise DimensionMismatchError(f"point has {len(point)} entries, polynomial has {self.n_vars} variables")
        x = [to_rational(v) for v in point]
        total = Fraction(0)
        for exponents, c in self.terms:
            term = Fraction(c)
            for value, e in zip(x, exponents):
                if e:
                    term *= value ** e
            total += term
        return total

    def __neg__(self) -> "PolynomialZ":
        return PolynomialZ(self.n_vars, tuple((e, -c) for e, c in self.terms))

    @property
    def coefficients(self) -> dict[Exponents, int]:
        return dict(self.terms)

    @property
    def term_count(self) -> int:
        return len(self.terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    @property
    def max_coefficient_bits(self) -> int:
        return max((abs(c).bit_length() for _, c in self.terms), default=0)

    def is_constant(self) -> bool:
        return all(not any(e) for e, _ in self.terms)

    def constant_value(self) -> int:
        return self.coefficients.get((0,) * self.n_vars, 0)


@dataclass(frozen=True)
class SemialgebraicSystem:
    """f = 0 for the equations, g > 0 for the strict and h >= 0 for the non-strict constraints."""

    n_vars: int
    equations: tuple[PolynomialZ, ...] = ()
    strict: tuple[PolynomialZ, ...] = ()
    nonstrict: tuple[PolynomialZ, ...] = ()
    variables: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.variables:
            object.__setattr__(self, "variables", tuple(f"x{i + 1}" for i in range(self.n_vars)))
        if len(self.variables) != self.n_vars:
            raise ValueError("one name per variable is required")
        for p in self.equations + self.strict + self.nonstrict:
            if p.n_vars != self.n_vars:
                raise DimensionMismatchError("constraint polynomial over a different variable count")

    def primary(self) -> bool:
        return not self.nonstrict

    @property
    def term_count(self) -> int:
        return sum(p.term_count for p in self.equations + self.strict + self.nonstrict)

    @property
    def coefficient_bits(self) -> int:
        return max((p.max_coefficient_bits for p in self.equations + self.strict + self.nonstrict), default=0)


def evaluate_membership(system: SemialgebraicSystem, x: Sequence) -> bool:
    if len(x) != system.n_vars:
        raise DimensionMismatchError(f"expected {system.n_vars} values, got {len(x)}")
    x = [to_rational(v) for v in x]
    return (
        all(p.evaluate(x) == 0 for p in system.equations)
        and all(p.evaluate(x) > 0 for p in system.strict)
        and all(p.evaluate(x) >= 0 for p in system.nonstrict)
    )


def facet_spanning_subset(points: Sequence[Vector], members: Sequence[int], size: int) -> list[int]:
    """Lexicographically first affinely independent ``size``-subset of ``members``."""
    chosen = [members[k] for k in affine_basis([points[i] for i in members])]
    if len(chosen) < size:
        raise InvalidBasisError(f"facet {members} does not span a hyperplane in the base realization")
    return chosen[:size]


def realization_variables(config: PointConfiguration, basis: Sequence[int]) -> list[str]:
    """Names of the free coordinates: x<point>_<coordinate> for every non-basis point."""
    return [f"x{i}_{c}" for i in range(len(config)) if i not in basis for c in range(config.dim)]


def configuration_from_variables(base: PointConfiguration, basis: Sequence[int], x: Sequence) -> PointConfiguration:
    """Basis points from ``base``, all other points from the free coordinates ``x``."""
    values = iter(to_rational(v) for v in x)
    points = [base.points[i] if i in basis else tuple(next(values) for _ in range(base.dim)) for i in range(len(base))]
    return base.replace_points(points)


def variables_from_configuration(config: PointConfiguration, basis: Sequence[int]) -> list[Fraction]:
    return [c for i, p in enumerate(config.points) if i not in basis for c in p]


def emit_realization_system(lattice: FaceLattice, basis: Sequence[int], base: PointConfiguration) -> SemialgebraicSystem:
    """
    Determinant-sign system whose solutions are the realizations with the basis fixed.

    Points are the positions of ``base``; position i stands for lattice vertex
    ``lattice.vertices[i]``. For every facet a spanning d-subset is fixed, and
    each other vertex contributes "det = 0" when it lies on the facet and
    "sign * det > 0" otherwise. Constant constraints are checked and dropped.
    """
    basis = list(basis)
    if not candidate_basis(base, basis):
        raise InvalidBasisError(f"{basis} is not an affinely independent set of d+1 points")
    if not is_realization(base, lattice):
        raise InvalidBasisError("the base configuration does not realize the lattice")
    d = base.dim
    names = realization_variables(base, basis)
    symbols = [sp.Symbol(name) for name in names]
    position = {v: i for i, v in enumerate(lattice.vertices)}
    coords: list[list] = []
    free = iter(symbols)
    for i, p in enumerate(base.points):
        if i in basis:
            coords.append([_sympy_rational(c) for c in p])
        else:
            coords.append([next(free) for _ in range(d)])

    equations, strict = [], []
    for facet in lattice.facets():
        members = sorted(position[v] for v in facet)
        span = facet_spanning_subset(base.points, members, d)
        for v in range(len(base)):
            if v in span:
                continue
            rows = [[1] + coords[s] for s in span] + [[1] + coords[v]]
            det = sp.Matrix(rows).det(method="berkowitz")
            if v in members:
                poly = PolynomialZ.from_sympy(det, symbols, clear_denominators=True)
                target = equations
            else:
                sign = orientation([base.points[s] for s in span] + [base.points[v]])
                poly = PolynomialZ.from_sympy(sign * det, symbols, clear_denominators=True)
                target = strict
            if poly.is_constant():
                holds = poly.constant_value() == 0 if target is equations else poly.constant_value() > 0
                if not holds:
                    raise InvalidBasisError("the base configuration violates its own constraint")
                continue
            target.append(poly)
    logger.info(
        "realization system: %d variables, %d equations, %d strict", len(names), len(equations), len(strict)
    )
    return SemialgebraicSystem(len(names), tuple(equations), tuple(strict), (), tuple(names))


@dataclass(frozen=True)
class StableProjectionSpec:
    """Fibers {v' : phi_i(v).v' > 0, psi_j(v).v' = 0} over base points v."""

    n: int
    d: int
    phi: tuple[tuple[PolynomialZ, ...], ...] = ()
    psi: tuple[tuple[PolynomialZ, ...], ...] = ()

    def __post_init__(self):
        for functional in self.phi + self.psi:
            if len(functional) != self.d or any(p.n_vars != self.n for p in functional):
                raise DimensionMismatchError("fiber functionals need d components over n variables")


@dataclass(frozen=True)
class FiberResult:
    strict: tuple[Vector, ...]
    equalities: tuple[Vector, ...]
    sample: Vector | None
    certificate: tuple[Fraction, ...] | None = None

    @property
    def empty(self) -> bool:
        return self.sample is None

    def sample_is_valid(self) -> bool:
        if self.sample is None:
            return False
        return all(dot(a, self.sample) > 0 for a in self.strict) and all(
            dot(b, self.sample) == 0 for b in self.equalities
        )

    def certificate_is_valid(self) -> bool:
        """y >= 0, y != 0 and sum y_i a_i orthogonal to the equality solution space."""
        if self.certificate is None:
            return False
        y = self.certificate
        if any(c < 0 for c in y) or not any(y):
            return False
        d = len(self.strict[0]) if self.strict else 0
        combined = tuple(sum(c * a[k] for c, a in zip(y, self.strict)) for k in range(d))
        directions = _fiber_directions(self.equalities, d)
        return all(dot(combined, n) == 0 for n in directions)


@dataclass
class _Inequality:
    coefficients: list[Fraction]
    rhs: Fraction
    multipliers: list[Fraction]


def fourier_motzkin(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> tuple[Vector | None, tuple[Fraction, ...] | None]:
    """
    Decide {t : rows t >= rhs} by exact elimination.

    Returns (sample, None) when feasible and (None, multipliers) otherwise; the
    multipliers y >= 0 combine the rows into 0 >= y.rhs > 0.
    """
    m = len(rows)
    n = len(rows[0]) if rows else 0
    system = [
        _Inequality([to_rational(c) for c in row], to_rational(b), [Fraction(int(i == k)) for i in range(m)])
        for k, (row, b) in enumerate(zip(rows, rhs))
    ]
    stages: list[list[_Inequality]] = []
    for var in range(n):
        stages.append(system)
        keep, lower, upper = [], [], []
        for ineq in system:
            c = ineq.coefficients[var]
            (keep if c == 0 else lower if c > 0 else upper).append(ineq)
        combined = list(keep)
        for lo in lower:
            for up in upper:
                a, b = -up.coefficients[var], lo.coefficients[var]
                combined.append(_Inequality(
                    [a * x + b * y for x, y in zip(lo.coefficients, up.coefficients)],
                    a * lo.rhs + b * up.rhs,
                    [a * x + b * y for x, y in zip(lo.multipliers, up.multipliers)],
                ))
        system = combined
        logger.debug("eliminated variable %d: %d inequalities", var, len(system))
    for ineq in system:
        if ineq.rhs > 0:
            return None, tuple(ineq.multipliers)

    sample = [Fraction(0)] * n
    for var in reversed(range(n)):
        low, high = None, None
        for ineq in stages[var]:
            c = ineq.coefficients[var]
            if c == 0:
                continue
            rest = sum(ineq.coefficients[k] * sample[k] for k in range(var + 1, n))
            bound = (ineq.rhs - rest) / c
            if c > 0:
                low = bound if low is None else max(low, bound)
            else:
                high = bound if high is None else min(high, bound)
        if low is not None and high is not None:
            sample[var] = (low + high) / 2
        elif low is not None:
            sample[var] = low
        elif high is not None:
            sample[var] = high
    return tuple(sample), None


def _fiber_directions(equalities: Sequence[Vector], d: int) -> list[Vector]:
    if not equalities:
        return [tuple(Fraction(int(i == k)) for i in range(d)) for k in range(d)]
    return null_space(MatrixQ.from_rows(equalities))


def fiber_of_stable_projection(spec: StableProjectionSpec, v: Sequence) -> FiberResult:
    """Evaluate the fiber functionals at v and look for a fiber point by elimination."""
    if len(v) != spec.n:
        raise DimensionMismatchError(f"base point needs {spec.n} entries")
    strict = tuple(tuple(p.evaluate(v) for p in functional) for functional in spec.phi)
    equalities = tuple(tuple(p.evaluate(v) for p in functional) for functional in spec.psi)
    directions = _fiber_directions(equalities, spec.d)
    if not strict:
        return FiberResult(strict, equalities, (Fraction(0),) * spec.d)
    # homogeneous strict system A t > 0 is feasible iff A t >= 1 is
    reduced = [[dot(a, n) for n in directions] for a in strict]
    t, certificate = fourier_motzkin(reduced, [Fraction(1)] * len(reduced))
    if t is None:
        return FiberResult(strict, equalities, None, certificate)
    sample = tuple(sum(tk * n[c] for tk, n in zip(t, directions)) for c in range(spec.d))
    return FiberResult(strict, equalities, sample)


RationalFunction = tuple[PolynomialZ, PolynomialZ]


@dataclass
class RationalMapReport:
    checked: int = 0
    passed: int = 0
    failures: list[tuple[Vector, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _evaluate_map(f: Sequence[RationalFunction], x: Sequence[Fraction]) -> Vector:
    values = []
    for numerator, denominator in f:
        den = denominator.evaluate(x)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes")
        values.append(numerator.evaluate(x) / den)
    return tuple(values)


def rational_map_check(
    f: Sequence[RationalFunction], g: Sequence[RationalFunction], system: SemialgebraicSystem, samples: Iterable[Sequence]
) -> RationalMapReport:
    """
    Check g(f(x)) = x exactly at every sample of the system's solution set.

    Samples outside the solution set are skipped. This is a sampling check,
    not a proof that f is a rational equivalence.
    """
    report = RationalMapReport()
    for sample in samples:
        x = to_vector(sample)
        if not evaluate_membership(system, x):
            continue
        report.checked += 1
        try:
            back = _evaluate_map(g, _evaluate_map(f, x))
        except ZeroDivisionError as err:
            report.failures.append((x, str(err)))
            continue
        if back == x:
            report.passed += 1
        else:
            report.failures.append((x, f"g(f(x)) = {back}"))
    return report


class ShorOp(str, Enum):
    ADD = "add"
    MUL = "mul"


@dataclass(frozen=True)
class ShorConstraint:
    """x_i + x_j = x_k or x_i * x_j = x_k with 1 <= i <= j < k."""

    i: int
    j: int
    k: int
    op: ShorOp

    def __post_init__(self):
        if not 1 <= self.i <= self.j < self.k:
            raise ValueError(f"index discipline violated by ({self.i}, {self.j}, {self.k})")

    def holds(self, values: Sequence[Fraction]) -> bool:
        a, b, c = values[self.i - 1], values[self.j - 1], values[self.k - 1]
        return (a + b if self.op == ShorOp.ADD else a * b) == c


@dataclass(frozen=True)
class ShorNormalForm:
    n: int
    constraints: tuple[ShorConstraint, ...]
    order: tuple[int, ...] | None = None


class OrderFlag(str, Enum):
    TOTAL = "total"
    PARTIAL = "partial"


@dataclass(frozen=True)
class ShorCompilation:
    normal_form: ShorNormalForm
    variable_map: dict[str, int]
    flag: OrderFlag
    relations: tuple[tuple[int, int], ...]
    contradiction: tuple[int, int] | None
    definitions: dict[int, ShorConstraint]
    source: SemialgebraicSystem
    input_size: int

    @property
    def infeasible(self) -> bool:
        return self.contradiction is not None

    @property
    def size(self) -> int:
        return len(self.normal_form.constraints)


class _CircuitBuilder:
    """Allocates x_1 = 1, the input variables, then one fresh variable per circuit node."""

    def __init__(self, n_inputs: int):
        self.n_inputs = n_inputs
        self.n = 1 + n_inputs
        self.constraints: list[ShorConstraint] = []
        self.definitions: dict[int, ShorConstraint] = {}
        self.constants: dict[int, int] = {1: 1}
        self.monomials: dict[Exponents, int] = {}

    def emit(self, op: ShorOp, a: int, b: int, target: int | None = None) -> int:
        """Write a op b into ``target`` when the index discipline allows, else into a fresh node."""
        i, j = min(a, b), max(a, b)
        if target is not None and j < target:
            self.constraints.append(ShorConstraint(i, j, target, op))
            return target
        self.n += 1
        node = ShorConstraint(i, j, self.n, op)
        self.constraints.append(node)
        self.definitions[self.n] = node
        return self.retarget(self.n, target)

    def equate(self, a: int, b: int) -> None:
        if a != b:
            self.constraints.append(ShorConstraint(1, min(a, b), max(a, b), ShorOp.MUL))

    def retarget(self, node: int, target: int | None) -> int:
        if target is None:
            return node
        self.equate(target, node)
        return target

    def constant(self, c: int) -> int:
        """c >= 1 from x_1 by doubling and adding, most significant bit first."""
        if c in self.constants:
            return self.constants[c]
        node, value = 1, 1
        for bit in bin(c)[3:]:
            value *= 2
            node = self.constants.get(value) or self.emit(ShorOp.ADD, node, node)
            self.constants[value] = node
            if bit == "1":
                value += 1
                node = self.constants.get(value) or self.emit(ShorOp.ADD, node, 1)
                self.constants[value] = node
        return node

    def power(self, var: int, e: int, target: int | None = None) -> int:
        key = tuple(e if k == var else 0 for k in range(self.n_inputs))
        if key in self.monomials:
            return self.retarget(self.monomials[key], target)
        if e == 1:
            return self.retarget(var + 2, target)
        half = self.power(var, e // 2)
        if e % 2:
            node = self.emit(ShorOp.MUL, self.emit(ShorOp.MUL, half, half), var + 2, target)
        else:
            node = self.emit(ShorOp.MUL, half, half, target)
        self.monomials[key] = node
        return node

    def monomial(self, exponents: Exponents, target: int | None = None) -> int:
        if not any(exponents):
            return self.retarget(1, target)
        if exponents in self.monomials:
            return self.retarget(self.monomials[exponents], target)
        factors = [(v, e) for v, e in enumerate(exponents) if e]
        if len(factors) == 1:
            node = self.power(*factors[0], target=target)
        else:
            nodes = [self.power(v, e) for v, e in factors]
            node = nodes[0]
            for k, other in enumerate(nodes[1:], start=2):
                node = self.emit(ShorOp.MUL, node, other, target if k == len(nodes) else None)
        self.monomials[exponents] = node
        return node

    def term(self, exponents: Exponents, c: int, target: int | None = None) -> int:
        if c == 1:
            return self.monomial(exponents, target)
        if not any(exponents):
            return self.retarget(self.constant(c), target)
        mono = self.monomial(exponents)
        return self.emit(ShorOp.MUL, self.constant(c), mono, target)

    def sum_of(self, terms: Sequence[tuple[Exponents, int]], target: int | None = None) -> int:
        """Node for a sum of positive terms; the last addition writes into ``target`` when possible."""
        if len(terms) == 1:
            return self.term(*terms[0], target=target)
        node = self.term(*terms[0])
        for k, t in enumerate(terms[1:], start=2):
            node = self.emit(ShorOp.ADD, node, self.term(*t), target if k == len(terms) else None)
        return node


def _split(poly: PolynomialZ) -> tuple[list[tuple[Exponents, int]], list[tuple[Exponents, int]]]:
    positive = [(e, c) for e, c in poly.terms if c > 0]
    negative = [(e, -c) for e, c in poly.terms if c < 0]
    return positive, negative


@dataclass(frozen=True)
class _DerivedOrder:
    closure: nx.DiGraph
    representative: dict[int, int]
    contradiction: tuple[int, int] | None


def _derive_order(builder: _CircuitBuilder, facts: set[tuple[int, int]]) -> _DerivedOrder:
    """
    Close strict order facts under equalities, transitivity and monotonicity.

    x + y exceeds both summands when both are positive; x * y exceeds both
    factors when both exceed 1. Variables are merged along the x_1 * a = b
    equalities first.
    """
    merged = nx.utils.UnionFind(range(1, builder.n + 1))
    for c in builder.constraints:
        if c.op == ShorOp.MUL and c.i == 1:
            merged.union(c.j, c.k)
    rep = {v: merged[v] for v in range(1, builder.n + 1)}
    positive = {rep[1]} | {rep[node] for node in builder.constants.values()}
    facts = set(facts) | {(1, node) for value, node in builder.constants.items() if value > 1}
    while True:
        graph = nx.DiGraph()
        graph.add_nodes_from(set(rep.values()))
        graph.add_edges_from((rep[a], rep[b]) for a, b in facts)
        if not nx.is_directed_acyclic_graph(graph):
            a, b = nx.find_cycle(graph)[0]
            return _DerivedOrder(graph, rep, (a, a))
        closure = nx.transitive_closure_dag(graph)
        above_one = set(closure.successors(rep[1]))
        positive |= above_one
        new_facts = set(facts)
        for c in builder.constraints:
            i, j = rep[c.i], rep[c.j]
            if c.op == ShorOp.ADD and i in positive and j in positive:
                new_facts |= {(c.i, c.k), (c.j, c.k)}
                positive.add(rep[c.k])
            elif c.op == ShorOp.MUL and c.i != 1 and i in above_one and j in above_one:
                new_facts |= {(c.i, c.k), (c.j, c.k)}
        if new_facts == facts:
            return _DerivedOrder(closure, rep, None)
        facts = new_facts


def _input_size(system: SemialgebraicSystem) -> int:
    return system.term_count * max(system.coefficient_bits, 1)


def _build_circuits(
    system: SemialgebraicSystem, var_bounds: Mapping[str, Fraction] | None = None
) -> tuple[_CircuitBuilder, dict[str, int], set[tuple[int, int]]]:
    """Binary constraints for the equations and order facts for the strict inequalities and bounds."""
    if not system.primary():
        raise NonPrimarySystemError("Shor compilation needs a system without non-strict inequalities")
    builder = _CircuitBuilder(system.n_vars)
    variable_map = {name: k + 2 for k, name in enumerate(system.variables)}
    facts: set[tuple[int, int]] = set()
    for name, bound in (var_bounds or {}).items():
        if to_rational(bound) <= 1:
            raise ValueError(f"lower bound for {name} must exceed 1")
        facts.add((1, variable_map[name]))

    for poly in system.equations:
        p, n = _split(poly)
        if not p or not n:
            # P = 0 becomes P + 1 = 1
            builder.equate(1, builder.emit(ShorOp.ADD, builder.sum_of(p or n), 1))
            continue
        builder.sum_of(p, target=builder.sum_of(n))
    for poly in system.strict:
        p, n = _split(poly)
        if not n:
            facts.add((1, builder.emit(ShorOp.ADD, builder.sum_of(p), 1)))
        elif not p:
            facts.add((builder.emit(ShorOp.ADD, builder.sum_of(n), 1), 1))
        else:
            facts.add((builder.sum_of(n), builder.sum_of(p)))
    return builder, variable_map, facts


def shor_compile(system: SemialgebraicSystem, var_bounds: Mapping[str, Fraction] | None = None) -> ShorCompilation:
    """
    Flatten a primary system into binary constraints over x_1 = 1 and fresh variables.

    Each equation P = N (positive and negative parts) becomes circuits for
    both sides sharing their output; each strict inequality P > N becomes an
    order fact between the two output variables. The flag is total when the
    derived order is a chain starting at x_1.
    """
    builder, variable_map, facts = _build_circuits(system, var_bounds)
    derived = _derive_order(builder, facts)
    order = None
    if derived.contradiction is None:
        chain = list(nx.topological_sort(derived.closure))
        if chain and chain[0] == derived.representative[1] and all(
            derived.closure.has_edge(a, b) for a, b in zip(chain, chain[1:])
        ):
            order = tuple(chain)
    flag = OrderFlag.TOTAL if order is not None else OrderFlag.PARTIAL
    relations = tuple(sorted(nx.transitive_reduction(derived.closure).edges())) if derived.contradiction is None else ()
    logger.info(
        "compiled %d input terms into %d constraints over %d variables (%s)",
        system.term_count, len(builder.constraints), builder.n, flag.value,
    )
    return ShorCompilation(
        normal_form=ShorNormalForm(builder.n, tuple(builder.constraints), order),
        variable_map=variable_map,
        flag=flag,
        relations=relations,
        contradiction=derived.contradiction,
        definitions=dict(builder.definitions),
        source=system,
        input_size=_input_size(system),
    )


def shor_solution_transport(compiled: ShorCompilation, x: Sequence) -> list[Fraction]:
    """Extend a solution of the source system to all compiled variables."""
    x = [to_rational(v) for v in x]
    if not evaluate_membership(compiled.source, x):
        raise NotASolutionError("the vector does not solve the source system")
    values: list[Fraction] = [Fraction(1)] + x
    for k in range(len(values) + 1, compiled.normal_form.n + 1):
        node = compiled.definitions[k]
        a, b = values[node.i - 1], values[node.j - 1]
        values.append(a + b if node.op == ShorOp.ADD else a * b)
    broken = [c for c in compiled.normal_form.constraints if not c.holds(values)]
    if broken:
        raise NotASolutionError(f"transported vector violates {broken[0]}")
    return values


def fit_polynomial_growth(sizes: Sequence[float], outputs: Sequence[float]) -> tuple[float, float]:
    """Least-squares fit of log(output) against log(size); returns (exponent, R^2)."""
    x = np.log(np.asarray(sizes, dtype=float))
    y = np.log(np.asarray(outputs, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = np.sum((y - y.mean()) ** 2)
    r_squared = 1.0 - float(np.sum(residual ** 2) / total) if total > 0 else 1.0
    return float(slope), r_squared


def polynomial_fit_r_squared(sizes: Sequence[float], outputs: Sequence[float], degree: int = 2) -> float:
    """R^2 of the least-squares polynomial of the given degree through (size, output)."""
    x = np.asarray(sizes, dtype=float)
    y = np.asarray(outputs, dtype=float)
    fitted = np.polyval(np.polyfit(x, y, degree), x)
    total = np.sum((y - y.mean()) ** 2)
    return 1.0 - float(np.sum((y - fitted) ** 2) / total) if total > 0 else 1.0


def measure_compiler_growth(
    max_terms: int, rng: np.random.Generator, n_vars: int = 6, draws: int = 4
) -> tuple[list[float], list[float]]:
    """
    Mean input size and mean constraint count of compiled random systems, one
    pair per term count 1..max_terms.

    The systems are solved by the all-twos point so the coefficient bit-length
    does not swing with the drawn solution. Only the circuits are built; the
    order derivation does not change the constraint count.
    """
    sizes, outputs = [], []
    for terms in range(1, max_terms + 1):
        systems = [random_primary_system(terms, n_vars, rng, solution_range=(2, 2))[0] for _ in range(draws)]
        sizes.append(float(np.mean([_input_size(s) for s in systems])))
        outputs.append(float(np.mean([len(_build_circuits(s)[0].constraints) for s in systems])))
    logger.debug("measured compiler growth over %d term counts, %d draws each", max_terms, draws)
    return sizes, outputs


def random_primary_system(
    n_terms: int,
    n_vars: int,
    rng: np.random.Generator,
    max_coefficient: int = 100,
    solution_range: tuple[int, int] = (2, 4),
) -> tuple[SemialgebraicSystem, list[Fraction]]:
    """
    A satisfiable primary system with one equation of about ``n_terms`` terms.

    The solution is drawn first (integers in ``solution_range``, both ends
    included); the constant term is then chosen so the equation vanishes
    there. Every variable is also required to exceed 1.
    """
    low, high = solution_range
    if low < 2 or high < low:
        raise ValueError(f"solution values must satisfy 2 <= low <= high, got {solution_range}")
    solution = [Fraction(int(v)) for v in rng.integers(low, high + 1, size=n_vars)]
    terms: dict[Exponents, int] = defaultdict(int)
    for _ in range(n_terms):
        exponents = tuple(int(e) for e in rng.integers(0, 3, size=n_vars))
        if not any(exponents):
            exponents = (1,) + exponents[1:]
        sign = 1 if rng.random() < 0.5 else -1
        terms[exponents] += sign * int(rng.integers(1, max_coefficient + 1))
    poly = PolynomialZ.from_terms(n_vars, terms)
    if not poly.terms:
        poly = PolynomialZ.variable(n_vars, 0)
    constant = -poly.evaluate(solution)
    equation = PolynomialZ.from_terms(n_vars, list(poly.terms) + [((0,) * n_vars, int(constant))])
    strict = tuple(
        PolynomialZ.from_terms(n_vars, {tuple(int(k == i) for k in range(n_vars)): 1, (0,) * n_vars: -1})
        for i in range(n_vars)
    )
    return SemialgebraicSystem(n_vars, (equation,), strict), solution


class AtInfinity(str, Enum):
    INFINITY = "infinity"


INFINITY = AtInfinity.INFINITY


@dataclass(frozen=True)
class ProjectiveScale:
    """Anchors 0*, 1*, inf* on a plane line; ``pinf`` None means the point at infinity."""

    p0: Vector
    p1: Vector
    pinf: Vector | None = None

    def __post_init__(self):
        anchors = [self.p0, self.p1] + ([self.pinf] if self.pinf is not None else [])
        if len(set(anchors)) != len(anchors):
            raise CollinearityError("scale anchors must be pairwise distinct")
        if not collinear(anchors):
            raise CollinearityError("scale anchors must be collinear")

    def line_coordinate(self, x: Sequence[Fraction]) -> Fraction:
        if not collinear([self.p0, self.p1, tuple(x)]):
            raise CollinearityError(f"{tuple(map(str, x))} is not on the line of the scale")
        direction = sub(self.p1, self.p0)
        return dot(sub(x, self.p0), direction) / dot(direction, direction)


def projective_scale(scale: ProjectiveScale, x: Sequence) -> Fraction | AtInfinity:
    """
    Projective coordinate of x: 0 at p0, 1 at p1 and infinity at pinf.

    With finite pinf this is the cross-ratio
    ((x - p0)(p1 - pinf)) / ((x - pinf)(p1 - p0)) in line coordinates.
    """
    t = scale.line_coordinate(to_vector(x))
    if scale.pinf is None:
        return t
    t_inf = scale.line_coordinate(scale.pinf)
    if t == t_inf:
        return INFINITY
    return (t * (1 - t_inf)) / (t - t_inf)


def scale_relation_holds(scale: ProjectiveScale, xi: Sequence, xj: Sequence, xk: Sequence, op: ShorOp) -> bool:
    """sigma(xi) + sigma(xj) = sigma(xk), or the product, on the scale."""
    values = [projective_scale(scale, p) for p in (xi, xj, xk)]
    if any(v is INFINITY for v in values):
        return False
    a, b, c = values
    return (a + b if op == ShorOp.ADD else a * b) == c
