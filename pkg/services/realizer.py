"""
Numerical search for realizations with exact rational certification.

The free coordinates are the non-basis vertices. Every facet contributes the
determinants of its spanning d-subset with each other vertex: equality
targets for vertices on the facet, sign targets for the rest. The penalty

    sum hinge(margin - s * det)^2 + sum det^2

is minimized from random starts, then the best point is rounded to small
rationals and checked exactly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from config import settings
from models import RealizerParams, StepRule
from services.hull_lattice import Face, FaceLattice, hull_lattice, is_realization
from services.numeric_core import (
    MatrixQ,
    PointConfiguration,
    Vector,
    affine_basis,
    dot,
    orientation,
    rank,
    solve_linear,
    sub,
)
from services.semialgebra import InvalidBasisError, facet_spanning_subset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DeterminantConstraint:
    """det [1 q_r] over ``rows`` has target sign ``sign`` (0 for an equality)."""

    rows: tuple[int, ...]
    sign: int
    facet: Face
    scale: float


@dataclass(frozen=True)
class RealizationProblem:
    """
    Realizations of a lattice with the basis points fixed to the base realization.

    Positions index the base configuration; position i stands for lattice
    vertex ``lattice.vertices[i]``.
    """

    lattice: FaceLattice
    basis: tuple[int, ...]
    base: PointConfiguration
    constraints: tuple[DeterminantConstraint, ...]

    @classmethod
    def build(cls, lattice: FaceLattice, basis: Sequence[int], base: PointConfiguration) -> "RealizationProblem":
        basis = tuple(basis)
        if len(basis) != base.dim + 1 or len(affine_basis([base.points[i] for i in basis])) != len(basis):
            raise InvalidBasisError(f"{list(basis)} is not an affinely independent set of d+1 points")
        if not is_realization(base, lattice):
            raise InvalidBasisError("the base configuration does not realize the lattice")
        position = {v: i for i, v in enumerate(lattice.vertices)}
        float_points = np.array([[float(c) for c in p] for p in base.points])
        constraints = []
        for facet in lattice.facets():
            members = sorted(position[v] for v in facet)
            span = facet_spanning_subset(base.points, members, base.dim)
            for v in range(len(base)):
                if v in span:
                    continue
                rows = tuple(span) + (v,)
                sign = 0 if v in members else orientation([base.points[r] for r in rows])
                scale = float(np.prod([max(1.0, np.abs(float_points[r]).max()) for r in rows]))
                constraints.append(DeterminantConstraint(rows, sign, frozenset(members), scale))
        return cls(lattice, basis, base, tuple(constraints))

    @property
    def d(self) -> int:
        return self.base.dim

    @property
    def n(self) -> int:
        return len(self.base)

    @property
    def free_positions(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if i not in self.basis)

    @property
    def free_vars(self) -> int:
        return self.d * (self.n - self.d - 1)

    @property
    def equalities(self) -> list[DeterminantConstraint]:
        return [c for c in self.constraints if c.sign == 0]

    def base_array(self) -> np.ndarray:
        return np.array([[float(c) for c in p] for p in self.base.points])

    def embed(self, x: np.ndarray) -> np.ndarray:
        """All points, with the free rows taken from the flat vector x."""
        points = self.base_array()
        if self.free_positions:
            points[list(self.free_positions)] = np.asarray(x, dtype=float).reshape(-1, self.d)
        return points

    def free_coordinates(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float)[list(self.free_positions)].ravel()


def problem_from_configuration(config: PointConfiguration, basis: Sequence[int] | None = None) -> RealizationProblem:
    """Problem for the hull lattice of a configuration; the default basis is lexicographically first."""
    _, lattice = hull_lattice(config)
    if basis is None:
        basis = affine_basis(list(config.points))
    return RealizationProblem.build(lattice, basis, config)


def normalized_configuration(config: PointConfiguration) -> PointConfiguration:
    """
    Affine copy centred at the centroid with largest absolute coordinate 1.

    Steinitz realizations have coordinates in the thousands while the penalty
    margin and convergence tolerance are absolute, so search bases are brought
    to unit size first. The face lattice is unchanged.
    """
    n = len(config)
    centroid = tuple(sum(p[k] for p in config.points) / n for k in range(config.dim))
    centred = [sub(p, centroid) for p in config.points]
    largest = max((abs(c) for p in centred for c in p), default=Fraction(0))
    if largest == 0:
        return config.replace_points(centred)
    return config.replace_points([tuple(c / largest for c in p) for p in centred])


def _cofactors(m: np.ndarray) -> np.ndarray:
    size = m.shape[0]
    out = np.empty_like(m)
    for i in range(size):
        for j in range(size):
            minor = np.delete(np.delete(m, i, axis=0), j, axis=1)
            out[i, j] = (-1) ** (i + j) * (np.linalg.det(minor) if minor.size else 1.0)
    return out


def _homogeneous(points: np.ndarray, rows: Sequence[int]) -> np.ndarray:
    block = points[list(rows)]
    return np.hstack([np.ones((len(rows), 1)), block])


def constraint_values(prob: RealizationProblem, points: np.ndarray) -> np.ndarray:
    """Scaled determinant of every constraint at the given points."""
    return np.array([np.linalg.det(_homogeneous(points, c.rows)) / c.scale for c in prob.constraints])


def penalty_and_gradient(x: np.ndarray, prob: RealizationProblem, margin: float) -> tuple[float, np.ndarray]:
    """Penalty value and its gradient in the free coordinates; d det / d entry is the cofactor."""
    points = prob.embed(x)
    value = 0.0
    grad = np.zeros_like(points)
    for c in prob.constraints:
        m = _homogeneous(points, c.rows)
        det = np.linalg.det(m) / c.scale
        if c.sign == 0:
            value += det * det
            weight = 2.0 * det
        else:
            gap = margin - c.sign * det
            if gap <= 0:
                continue
            value += gap * gap
            weight = -2.0 * gap * c.sign
        cof = _cofactors(m) / c.scale
        for r, p in enumerate(c.rows):
            grad[p] += weight * cof[r, 1:]
    return value, grad[list(prob.free_positions)].ravel()


def finite_difference_gradient(f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central differences, one coordinate at a time."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (f(x + step) - f(x - step)) / (2 * h)
    return grad


def residual(prob: RealizationProblem, points: np.ndarray, margin: float) -> float:
    """Largest violation: margin shortfall of a sign target or size of an equality determinant."""
    values = constraint_values(prob, points)
    worst = 0.0
    for c, v in zip(prob.constraints, values):
        worst = max(worst, abs(v) if c.sign == 0 else margin - c.sign * v)
    return worst


@dataclass
class RealizationAttempt:
    success: bool
    points: np.ndarray
    residual: float
    iterations: int
    restart: int | None
    seed: int


def _armijo_descent(objective, x0: np.ndarray, max_iters: int, tolerance: float) -> tuple[np.ndarray, int]:
    """Steepest descent with backtracking until the penalty drops below ``tolerance``."""
    c1, shrink = 1e-4, 0.5
    x = x0.copy()
    value, grad = objective(x)
    for iteration in range(1, max_iters + 1):
        if value <= tolerance:
            return x, iteration - 1
        direction = -grad
        slope = float(grad @ direction)
        if slope == 0.0:
            return x, iteration
        alpha = 1.0
        trial_value, trial_grad = objective(x + alpha * direction)
        while trial_value > value + c1 * alpha * slope and alpha > 1e-16:
            alpha *= shrink
            trial_value, trial_grad = objective(x + alpha * direction)
        x = x + alpha * direction
        value, grad = trial_value, trial_grad
    return x, max_iters


def _lbfgs(objective, x0: np.ndarray, max_iters: int, tolerance: float) -> tuple[np.ndarray, int]:
    result = minimize(
        objective, x0, jac=True, method="L-BFGS-B",
        options={"maxiter": max_iters, "ftol": tolerance * 1e-6, "gtol": 1e-14},
    )
    return result.x, int(result.nit)


STEP_RULES = {StepRule.LBFGS: _lbfgs, StepRule.ARMIJO: _armijo_descent}


def find_realization(prob: RealizationProblem, params: RealizerParams | None = None) -> RealizationAttempt:
    """
    Minimize the penalty from ``params.restarts`` random starts.

    Starts are the base free coordinates plus uniform noise in [-2, 2]. The
    first restart (in index order) whose residual is within the square root
    of the convergence tolerance wins; otherwise the best attempt is returned
    with ``success`` false.
    """
    params = params or RealizerParams()
    threshold = params.convergence_tolerance ** 0.5
    if prob.free_vars == 0:
        points = prob.base_array()
        res = residual(prob, points, params.penalty_margin)
        return RealizationAttempt(res <= threshold, points, res, 0, 0, params.seed)

    rng = np.random.default_rng(params.seed)
    base_x = prob.free_coordinates(prob.base_array())
    step = STEP_RULES[params.step_rule]

    def objective(x):
        return penalty_and_gradient(x, prob, params.penalty_margin)

    best: RealizationAttempt | None = None
    for restart in range(params.restarts):
        x0 = base_x + rng.uniform(-2.0, 2.0, size=base_x.shape)
        x, iterations = step(objective, x0, params.max_iters, params.convergence_tolerance)
        points = prob.embed(x)
        res = residual(prob, points, params.penalty_margin)
        attempt = RealizationAttempt(res <= threshold, points, res, iterations, restart, params.seed)
        logger.debug("restart %d: residual %.3e after %d iterations", restart, res, iterations)
        if attempt.success:
            logger.info("realized after restart %d (%d iterations)", restart, iterations)
            return attempt
        if best is None or res < best.residual:
            best = attempt
    best.success = False
    logger.info("no realization found; best residual %.3e", best.residual)
    return best


@dataclass(frozen=True)
class Certificate:
    accepted: bool
    configuration: PointConfiguration | None = None
    violated: str | None = None


def _round(value, max_denominator: int) -> Fraction:
    if isinstance(value, Fraction):
        return value
    return Fraction(float(value)).limit_denominator(max_denominator)


def first_violation(prob: RealizationProblem, config: PointConfiguration) -> str | None:
    """Exact check of every determinant target; describes the first one that fails."""
    for c in prob.constraints:
        sign = orientation([config.points[r] for r in c.rows])
        if sign != c.sign:
            labels = ", ".join(config.labels[i] for i in sorted(c.facet))
            point = config.labels[c.rows[-1]]
            where = "on the hyperplane of" if c.sign == 0 else "on the inner side of"
            return f"facet {{{labels}}}: point {point} is not {where} the facet"
    return None


def _orthogonal_projection(normal: Sequence[Fraction], directions: Sequence[Vector]) -> Vector:
    """Exact component of ``normal`` orthogonal to the span of ``directions``."""
    basis: list[Vector] = []
    for v in directions:
        w = v
        for b in basis:
            w = sub(w, tuple(dot(w, b) / dot(b, b) * x for x in b))
        if any(w):
            basis.append(w)
    result = tuple(normal)
    for b in basis:
        result = sub(result, tuple(dot(result, b) / dot(b, b) * x for x in b))
    return result


def _snap_to_facet_planes(prob: RealizationProblem, points: np.ndarray, max_denominator: int) -> PointConfiguration | None:
    """
    Rational facet hyperplanes near the float ones, then every free vertex as
    the exact meet of d of its facet hyperplanes.

    Hyperplanes through basis points are made to contain them exactly.
    """
    d = prob.d
    position = {v: i for i, v in enumerate(prob.lattice.vertices)}
    planes: dict[Face, tuple[Vector, Fraction]] = {}
    for facet in prob.lattice.facets():
        members = sorted(position[v] for v in facet)
        centred = points[members] - points[members].mean(axis=0)
        normal = np.linalg.svd(centred)[2][-1]
        normal = normal / np.abs(normal).max()
        exact = tuple(_round(c, max_denominator) for c in normal)
        fixed = [prob.base.points[i] for i in members if i in prob.basis]
        if fixed:
            exact = _orthogonal_projection(exact, [sub(p, fixed[0]) for p in fixed[1:]])
            if not any(exact):
                return None
            offset = dot(exact, fixed[0])
        else:
            offset = _round(float(np.dot([float(c) for c in exact], points[members].mean(axis=0))), max_denominator)
        planes[frozenset(members)] = (exact, offset)

    snapped = list(prob.base.points)
    for i in prob.free_positions:
        chosen: list[tuple[Vector, Fraction]] = []
        for members, plane in planes.items():
            if i in members and rank(MatrixQ.from_rows([n for n, _ in chosen] + [plane[0]])) == len(chosen) + 1:
                chosen.append(plane)
            if len(chosen) == d:
                break
        if len(chosen) < d:
            return None
        solution = solve_linear(MatrixQ.from_rows([n for n, _ in chosen]), [o for _, o in chosen])
        snapped[i] = solution.particular
    return prob.base.replace_points(snapped)


def certify(coords, prob: RealizationProblem, max_denominator: int | None = None, snap_tolerance: float | None = None) -> Certificate:
    """
    Round to rationals with bounded denominators and verify exactly.

    ``coords`` is an exact configuration or an (n, d) float array. When plain
    rounding breaks a coplanarity, the facet hyperplanes are rounded instead
    and the vertices recomputed, provided they stay within ``snap_tolerance``.
    """
    max_denominator = max_denominator or settings.max_denominator
    snap_tolerance = snap_tolerance or settings.snap_tolerance
    if isinstance(coords, PointConfiguration):
        candidate = coords
        points = np.array([[float(c) for c in p] for p in coords.points])
    else:
        points = np.asarray(coords, dtype=float).reshape(prob.n, prob.d)
        rounded = [
            prob.base.points[i] if i in prob.basis else tuple(_round(c, max_denominator) for c in points[i])
            for i in range(prob.n)
        ]
        candidate = prob.base.replace_points(rounded)

    violated = first_violation(prob, candidate)
    if violated is None and is_realization(candidate, prob.lattice):
        return Certificate(True, candidate)

    if prob.equalities and not isinstance(coords, PointConfiguration):
        snapped = _snap_to_facet_planes(prob, points, max_denominator)
        if snapped is not None:
            drift = max(
                abs(float(a) - b) for p, q in zip(snapped.points, points) for a, b in zip(p, q)
            )
            if drift <= snap_tolerance and first_violation(prob, snapped) is None and is_realization(snapped, prob.lattice):
                logger.debug("certified after snapping to rational facet planes (drift %.2e)", drift)
                return Certificate(True, snapped)
    return Certificate(False, None, violated or "face lattice of the rounded configuration differs")


def tangent_dimension(coords, prob: RealizationProblem, rank_tolerance: float | None = None) -> int:
    """free_vars minus the numerical rank of the equality Jacobian at coords."""
    rank_tolerance = rank_tolerance or settings.rank_tolerance
    if isinstance(coords, PointConfiguration):
        points = np.array([[float(c) for c in p] for p in coords.points])
    else:
        points = np.asarray(coords, dtype=float).reshape(prob.n, prob.d)
    equalities = prob.equalities
    if not equalities or prob.free_vars == 0:
        return prob.free_vars
    free_index = {p: k for k, p in enumerate(prob.free_positions)}
    jacobian = np.zeros((len(equalities), prob.free_vars))
    for row, c in enumerate(equalities):
        cof = _cofactors(_homogeneous(points, c.rows)) / c.scale
        for r, p in enumerate(c.rows):
            if p in free_index:
                k = free_index[p]
                jacobian[row, k * prob.d:(k + 1) * prob.d] += cof[r, 1:]
    singular = np.linalg.svd(jacobian, compute_uv=False)
    numerical_rank = int(np.sum(singular > rank_tolerance * singular.max())) if singular.max() > 0 else 0
    return prob.free_vars - numerical_rank
