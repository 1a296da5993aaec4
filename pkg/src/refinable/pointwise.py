"""Values of the limit function on the dense lattice {M^-j k}.

The two-scale relation restricted to integer points is a finite eigenvalue
problem: with candidate points k_1..k_N, the transfer matrix
B = m (c_{M k_i - k_j}) fixes the vector of integer-point values, and the
eigenvector for eigenvalue one (normalized to sum one) gives them.  Finer
lattice levels then follow from the same refinement kernel the cascade
module uses, level by level.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import IO, Mapping, Sequence

import numpy as np

from .bounds import (
    Ball,
    Box,
    SupportBound,
    TransformedBox,
    best_bound,
    enclosing_integer_box,
)
from .cascade import read_rows, refinement_step, write_rows
from .errors import (
    ContractionSearchExhausted,
    DomainTooSmall,
    NoBoundAvailable,
    NonUniqueWarning,
    NormalizationImpossible,
    NoUnitEigenvalue,
)
from .mask import Problem

UNIT_EIGENVALUE_TOL = 1e-9
STRUCTURAL_ZERO_TOL = 1e-10
_ENUMERATION_CAP = 5_000_000
_ESCAPE_RTOL = 1e-9


# ---------------------------------------------------------------------------
# candidate points and the transfer matrix
# ---------------------------------------------------------------------------

def candidate_points(problem: Problem) -> tuple[tuple[int, ...], ...]:
    """All integer points inside the best available support bound, in
    lexicographic order."""
    try:
        bound = best_bound(problem)
    except ContractionSearchExhausted as exc:
        raise NoBoundAvailable(str(exc)) from exc
    return lattice_points_in_bound(problem, bound, 0)


def lattice_points_in_bound(
    problem: Problem, bound: SupportBound, level: int
) -> tuple[tuple[int, ...], ...]:
    """Integer indices k with M^-level k inside the bound, in lex order."""
    d = problem.dim
    if level == 0:
        box = enclosing_integer_box(bound)
        halves = [int(h) for h in box.half_widths]
    else:
        power = problem.matrix.power(level).as_array()
        if isinstance(bound, Ball):
            extents = [bound.radius * float(np.linalg.norm(power[i])) for i in range(d)]
        elif isinstance(bound, Box):
            extents = list(np.abs(power) @ np.asarray(bound.half_widths))
        else:
            mapped = np.abs(power @ bound.transform)
            extents = list(mapped @ np.asarray(bound.half_widths))
        # one cell of margin so membership-tolerance slop cannot drop points
        halves = [int(math.ceil(e + 1e-6)) + 1 for e in extents]
    volume = 1
    for h in halves:
        volume *= 2 * h + 1
    if volume > _ENUMERATION_CAP:
        raise MemoryError(f"lattice enumeration of {volume} points refused")
    grids = np.meshgrid(
        *[np.arange(-h, h + 1, dtype=np.int64) for h in halves], indexing="ij"
    )
    points = np.stack([g.reshape(-1) for g in grids], axis=1)
    coords = points.astype(float) @ problem.matrix.inverse_power_array(level).T
    keep = bound.contains_many(coords)
    kept = points[keep]
    return tuple(tuple(int(x) for x in row) for row in kept)


@dataclass(frozen=True)
class TransferMatrix:
    """The matrix m (c_{M k_i - k_j}) over an ordered candidate set."""

    points: tuple[tuple[int, ...], ...]
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return len(self.points)


def build_transfer_matrix(
    problem: Problem, points: Sequence[Sequence[int]]
) -> TransferMatrix:
    """Assemble the transfer matrix by exact integer index arithmetic and
    mask lookups; indices outside the mask support contribute zero."""
    pts = tuple(tuple(int(x) for x in p) for p in points)
    if not pts:
        raise ValueError("points must be nonempty")
    if len(set(pts)) != len(pts):
        raise ValueError("points must be distinct")
    m = float(problem.m)
    coeffs = problem.mask.coefficients
    n = len(pts)
    matrix = np.zeros((n, n))
    for i, ki in enumerate(pts):
        mki = problem.matrix.matrix.apply(ki)
        for j, kj in enumerate(pts):
            q = tuple(a - b for a, b in zip(mki, kj))
            c = coeffs.get(q)
            if c is not None:
                matrix[i, j] = m * c
    return TransferMatrix(pts, matrix)


# ---------------------------------------------------------------------------
# integer-point values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegerValues:
    """Eigenvalue-1 eigenspace of the transfer matrix.

    With a one-dimensional eigenspace the single basis vector is scaled so
    its entries sum to one and ``values`` maps each candidate point to its
    value; otherwise the orthonormal basis is returned as-is and callers
    must resolve the ambiguity themselves.
    """

    points: tuple[tuple[int, ...], ...]
    basis: np.ndarray
    eigenspace_dimension: int
    normalized: bool
    structural_zeros: tuple[tuple[int, ...], ...]

    @property
    def values(self) -> dict[tuple[int, ...], float]:
        if not self.normalized:
            raise ValueError(
                "eigenspace is not one-dimensional; no canonical values"
            )
        return {p: float(v) for p, v in zip(self.points, self.basis[0])}


def integer_values(
    transfer: TransferMatrix,
    unit_tol: float = UNIT_EIGENVALUE_TOL,
    zero_tol: float = STRUCTURAL_ZERO_TOL,
) -> IntegerValues:
    """Solve B r = r.

    Raises NoUnitEigenvalue when no eigenvalue lies within ``unit_tol`` of
    one.  The eigenspace basis comes from an SVD null-space computation, so
    repeated unit eigenvalues yield a full geometric basis; a basis of
    dimension above one is reported with a NonUniqueWarning instead of being
    silently resolved.
    """
    b = transfer.matrix
    n = transfer.size
    eigs = np.linalg.eigvals(b)
    if not np.any(np.abs(eigs - 1.0) <= unit_tol):
        nearest = eigs[np.argmin(np.abs(eigs - 1.0))]
        raise NoUnitEigenvalue(
            f"no eigenvalue within {unit_tol:g} of 1 (nearest: {nearest:.6g})"
        )
    shifted = b - np.eye(n)
    _, sing, vt = np.linalg.svd(shifted)
    null_tol = unit_tol * max(1.0, float(sing[0]))
    dimension = int(np.sum(sing <= null_tol))
    if dimension == 0:
        dimension = 1
    basis = vt[n - dimension :][::-1].copy()
    for row in basis:
        k = int(np.argmax(np.abs(row)))
        if row[k] < 0:
            row *= -1.0
    if dimension == 1:
        vec = basis[0]
        total = float(vec.sum())
        if abs(total) <= 1e-12 * float(np.abs(vec).max()):
            raise NormalizationImpossible(
                "unit eigenvector has entry sum within 1e-12 of zero"
            )
        vec = vec / total
        zeros = tuple(
            p for p, v in zip(transfer.points, vec) if abs(v) <= zero_tol
        )
        return IntegerValues(transfer.points, vec[None, :], 1, True, zeros)
    warnings.warn(
        f"eigenvalue-1 eigenspace has dimension {dimension}; integer values "
        f"are not unique",
        NonUniqueWarning,
        stacklevel=2,
    )
    return IntegerValues(transfer.points, basis, dimension, False, ())


def converged_integer_values(
    problem: Problem,
    iterations: int = 200,
) -> dict[tuple[int, ...], float]:
    """Integer-point values obtained by iterating the transfer matrix on the
    integer samples of the box indicator (a unit spike at the origin).

    This is the cascade iteration restricted to the integer lattice; when
    the eigenvalue-1 eigenspace is not unique it selects the limit that a
    half-open box indicator produces, which is the usual tie-break.
    """
    points = candidate_points(problem)
    transfer = build_transfer_matrix(problem, points)
    vec = np.zeros(len(points))
    vec[points.index((0,) * problem.dim)] = 1.0
    acc = np.zeros_like(vec)
    tail = max(1, iterations // 4)
    for i in range(iterations):
        vec = transfer.matrix @ vec
        if i >= iterations - tail:
            acc += vec
    # averaging the tail tolerates slowly rotating transient components
    vec = acc / tail
    return {p: float(v) for p, v in zip(points, vec)}


# ---------------------------------------------------------------------------
# refinement to finer lattice levels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValueTable:
    """Limit-function values phi(M^-j k) for levels j = 0..J, keyed by the
    integer index k at each level."""

    levels: dict[int, dict[tuple[int, ...], float]]
    normalized: bool

    @property
    def max_level(self) -> int:
        return max(self.levels)


def refine_values(
    problem: Problem,
    level0: Mapping[tuple[int, ...], float],
    levels: int,
) -> ValueTable:
    """Extend integer-point values to the lattices M^-j Z^d, j = 1..levels.

    Each level applies the shared refinement kernel and stores every index
    whose lattice point lies inside the support bound.  Values escaping the
    bound abort with DomainTooSmall when they exceed the noise floor (that
    signals a bound or seed inconsistency), and are discarded as roundoff
    dust otherwise.
    """
    if levels < 1:
        raise ValueError("levels must be positive")
    points = candidate_points(problem)
    point_set = set(points)
    for key in level0:
        if tuple(key) not in point_set:
            raise DomainTooSmall(
                f"seed index {tuple(key)} is outside the candidate set"
            )
    bound = best_bound(problem)
    seed = {p: 0.0 for p in points}
    seed.update({tuple(k): float(v) for k, v in level0.items()})
    table: dict[int, dict[tuple[int, ...], float]] = {0: seed}
    indices = np.asarray(points, dtype=np.int64)
    values = np.asarray([seed[p] for p in points])
    for level in range(1, levels + 1):
        indices, values = refinement_step(problem, indices, values, level)
        coords = indices.astype(float) @ problem.matrix.inverse_power_array(level).T
        inside = bound.contains_many(coords)
        escaped = np.abs(values[~inside])
        floor = _ESCAPE_RTOL * max(1.0, float(np.abs(values).max(initial=0.0)))
        if escaped.size and float(escaped.max()) > floor:
            raise DomainTooSmall(
                f"value {escaped.max():.3g} escaped the support bound at "
                f"level {level}; bound, seed, or enumeration is inconsistent"
            )
        stored = {
            tuple(int(x) for x in idx): float(v)
            for idx, v in zip(indices[inside], values[inside])
        }
        targets = lattice_points_in_bound(problem, bound, level)
        level_values = {p: stored.get(p, 0.0) for p in targets}
        table[level] = level_values
        indices = np.asarray(targets, dtype=np.int64)
        values = np.asarray([level_values[p] for p in targets])
    total = math.fsum(seed.values())
    return ValueTable(table, abs(total - 1.0) <= 1e-12)


def periodization_check(
    problem: Problem,
    table: ValueTable,
    level: int,
    probes: Sequence[Sequence[float]],
) -> tuple[tuple[tuple[float, ...], float, float], ...]:
    """For each probe x on the level-j lattice, sum the stored values over
    the integer translates x + k and report (probe, total, |total - 1|)."""
    if level not in table.levels:
        raise ValueError(f"table has no level {level}")
    stored = table.levels[level]
    power = problem.matrix.power(level)
    inv_power = problem.matrix.inverse_power(level) if level else None
    results = []
    for probe in probes:
        x = tuple(float(v) for v in probe)
        kx_float = np.asarray(power.as_array() @ np.asarray(x))
        kx = tuple(int(round(v)) for v in kx_float)
        if np.max(np.abs(kx_float - np.asarray(kx, dtype=float))) > 1e-6:
            raise ValueError(f"probe {x} is not on the level-{level} lattice")
        total = 0.0
        for idx, value in stored.items():
            delta = [a - b for a, b in zip(idx, kx)]
            if level == 0:
                integral = True
            else:
                image = inv_power.apply(delta)
                integral = all(f.denominator == 1 for f in image)
            if integral:
                total += value
        results.append((x, total, abs(total - 1.0)))
    return tuple(results)


# ---------------------------------------------------------------------------
# serialization (same delimited layout as the cascade dumps)
# ---------------------------------------------------------------------------

def export_values(problem: Problem, table: ValueTable, stream: IO[str]) -> None:
    """Serialize a ValueTable deterministically, sorted by (level, index)."""
    dim = problem.dim

    def rows():
        for level in sorted(table.levels):
            inv_power = problem.matrix.inverse_power_array(level)
            for idx in sorted(table.levels[level]):
                coords = inv_power @ np.asarray(idx, dtype=float)
                yield (
                    level,
                    idx,
                    tuple(float(x) for x in coords),
                    table.levels[level][idx],
                )

    write_rows(stream, dim, rows())


def read_values(stream: IO[str]) -> ValueTable:
    """Parse an exported ValueTable; values round-trip bit-exactly."""
    levels: dict[int, dict[tuple[int, ...], float]] = {}
    for level, index, _, value in read_rows(stream):
        levels.setdefault(level, {})[index] = value
    if not levels:
        levels = {}
    level0 = levels.get(0, {})
    normalized = abs(math.fsum(level0.values()) - 1.0) <= 1e-12 if level0 else False
    return ValueTable(levels, normalized)
