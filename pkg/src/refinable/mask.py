"""Finitely supported masks paired with a dilation matrix.

A problem document is JSON with exactly three top-level fields::

    {
      "dimension": 1,
      "matrix": [[2]],
      "coefficients": [
        {"q": [0], "c": "1/2"},
        {"q": [1], "c": 0.5}
      ]
    }

``c`` is either a number or an exact "p/q" rational string.  Unknown fields
anywhere in the document are rejected.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping

from .errors import (
    DimensionMismatch,
    EmptyMask,
    MaskSumViolation,
    NotDilation,
    ParseError,
)
from .linalg import MAX_DIM, DilationMatrix, IntMatrix

MASK_SUM_TOL = 1e-12
COSET_UNIFORM_TOL = 1e-10

_RATIONAL_RE = re.compile(r"^[+-]?\d+/[1-9]\d*$")


@dataclass(frozen=True)
class Mask:
    """Finite map from integer translation vectors to real coefficients.

    ``rational`` carries the exact values when every input coefficient was
    rational, and is None otherwise.  Zero coefficients are dropped, so the
    support is exactly the key set.
    """

    dim: int
    coefficients: dict[tuple[int, ...], float]
    rational: dict[tuple[int, ...], Fraction] | None = None

    def __post_init__(self) -> None:
        if not self.coefficients:
            raise EmptyMask("mask has no nonzero coefficient")
        for q in self.coefficients:
            if len(q) != self.dim:
                raise DimensionMismatch(
                    f"index {q} does not have dimension {self.dim}"
                )
        if self.rational is not None:
            total = sum(self.rational.values())
            deviation = abs(total - 1)
        else:
            deviation = abs(math.fsum(self.coefficients.values()) - 1.0)
        if deviation > MASK_SUM_TOL:
            raise MaskSumViolation(
                f"mask coefficients must sum to 1 (off by {float(deviation):.3g})"
            )

    @property
    def support(self) -> tuple[tuple[int, ...], ...]:
        return tuple(sorted(self.coefficients))

    @cached_property
    def radius(self) -> float:
        return mask_radius(self)

    def items_sorted(self) -> list[tuple[tuple[int, ...], float]]:
        return sorted(self.coefficients.items())


@dataclass(frozen=True)
class Problem:
    """A validated dilation matrix plus mask, ready for analysis."""

    matrix: DilationMatrix
    mask: Mask

    def __post_init__(self) -> None:
        if self.mask.dim != self.matrix.dim:
            raise DimensionMismatch(
                f"mask dimension {self.mask.dim} vs matrix dimension {self.matrix.dim}"
            )
        check = self.matrix.dilation_check
        if not check:
            raise NotDilation(check.reason)

    @property
    def dim(self) -> int:
        return self.matrix.dim

    @property
    def m(self) -> int:
        return self.matrix.m


def mask_radius(mask: Mask) -> float:
    """Largest Euclidean norm over the support indices."""
    if not mask.coefficients:
        raise EmptyMask("mask has no nonzero coefficient")
    return max(math.sqrt(sum(x * x for x in q)) for q in mask.coefficients)


# ---------------------------------------------------------------------------
# parsing / serialization
# ---------------------------------------------------------------------------

def _require_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{what} must be an integer, got {value!r}")
    return value


def _parse_coefficient(value) -> tuple[float, Fraction | None]:
    if isinstance(value, str):
        if not _RATIONAL_RE.match(value):
            raise ParseError(
                f"coefficient string {value!r} is not of the form 'p/q'"
            )
        frac = Fraction(value)
        return float(frac), frac
    if isinstance(value, bool):
        raise ParseError(f"coefficient must be a number or 'p/q' string, got {value!r}")
    if isinstance(value, int):
        return float(value), Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ParseError(f"coefficient {value!r} is not finite")
        return value, None
    raise ParseError(f"coefficient must be a number or 'p/q' string, got {value!r}")


def problem_from_data(
    dimension: int,
    matrix_rows,
    coefficients,
) -> Problem:
    """Build a validated Problem from already-decoded document fields."""
    d = _require_int(dimension, "dimension")
    if d < 1 or d > MAX_DIM:
        raise ParseError(f"dimension must be in 1..{MAX_DIM}, got {d}")
    if not isinstance(matrix_rows, list) or len(matrix_rows) != d:
        raise DimensionMismatch(f"matrix must have {d} rows")
    rows = []
    for row in matrix_rows:
        if not isinstance(row, list) or len(row) != d:
            raise DimensionMismatch(f"matrix rows must have {d} entries")
        rows.append(tuple(_require_int(x, "matrix entry") for x in row))
    try:
        int_matrix = IntMatrix(tuple(rows))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc

    if not isinstance(coefficients, list) or not coefficients:
        raise ParseError("coefficients must be a nonempty list")
    coeffs: dict[tuple[int, ...], float] = {}
    rational: dict[tuple[int, ...], Fraction] = {}
    all_rational = True
    for record in coefficients:
        if not isinstance(record, dict):
            raise ParseError(f"coefficient record must be an object, got {record!r}")
        unknown = set(record) - {"q", "c"}
        if unknown:
            raise ParseError(f"unknown coefficient fields: {sorted(unknown)}")
        if "q" not in record or "c" not in record:
            raise ParseError("coefficient records need both 'q' and 'c'")
        qraw = record["q"]
        if not isinstance(qraw, list) or len(qraw) != d:
            raise DimensionMismatch(
                f"index {qraw!r} must be an integer list of length {d}"
            )
        q = tuple(_require_int(x, "index entry") for x in qraw)
        if q in coeffs:
            raise ParseError(f"duplicate coefficient index {list(q)}")
        value, frac = _parse_coefficient(record["c"])
        if frac is not None and frac == 0:
            continue
        if frac is None and value == 0.0:
            continue
        coeffs[q] = value
        if frac is None:
            all_rational = False
        else:
            rational[q] = frac
    if not coeffs:
        raise MaskSumViolation("all coefficients are zero; they must sum to 1")
    mask = Mask(d, coeffs, rational if all_rational else None)
    return Problem(DilationMatrix(int_matrix), mask)


def parse_problem(source: str) -> Problem:
    """Parse and validate one problem document."""
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("document root must be an object")
    unknown = set(data) - {"dimension", "matrix", "coefficients"}
    if unknown:
        raise ParseError(f"unknown document fields: {sorted(unknown)}")
    for field in ("dimension", "matrix", "coefficients"):
        if field not in data:
            raise ParseError(f"missing document field: {field!r}")
    return problem_from_data(data["dimension"], data["matrix"], data["coefficients"])


def serialize_problem(problem: Problem) -> str:
    """Canonical JSON for a problem; parse(serialize(p)) reproduces p."""
    records = []
    for q, value in problem.mask.items_sorted():
        if problem.mask.rational is not None:
            frac = problem.mask.rational[q]
            c = (
                frac.numerator
                if frac.denominator == 1
                else f"{frac.numerator}/{frac.denominator}"
            )
        else:
            c = value
        records.append({"q": list(q), "c": c})
    doc = {
        "dimension": problem.dim,
        "matrix": [list(row) for row in problem.matrix.matrix.rows],
        "coefficients": records,
    }
    return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# residue classes modulo M Z^d
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CosetSums:
    """Coefficient sums over the m residue classes of Z^d modulo M Z^d.

    ``uniform`` reports whether every class sums to 1/m; that condition is
    friendly to cascade convergence but never enforced here.
    """

    representatives: tuple[tuple[int, ...], ...]
    sums: tuple[float, ...]
    uniform: bool


def _coset_representatives(matrix: DilationMatrix) -> list[tuple[int, ...]]:
    """The integer points of M [0,1)^d: exactly m class representatives."""
    d = matrix.dim
    rows = matrix.matrix.rows
    lo = [sum(min(rows[i][j], 0) for j in range(d)) for i in range(d)]
    hi = [sum(max(rows[i][j], 0) for j in range(d)) for i in range(d)]
    inv = matrix.inverse
    reps = []

    def scan(prefix: list[int]) -> None:
        if len(prefix) == d:
            preimage = inv.apply(prefix)
            if all(0 <= x < 1 for x in preimage):
                reps.append(tuple(prefix))
            return
        i = len(prefix)
        for value in range(lo[i], hi[i] + 1):
            scan(prefix + [value])

    scan([])
    reps.sort()
    if len(reps) != matrix.m:
        raise ArithmeticError(
            f"found {len(reps)} residue representatives, expected {matrix.m}"
        )
    return reps


def coset_sum_report(problem: Problem) -> CosetSums:
    """Per-residue-class coefficient sums, decided in exact arithmetic.

    Two indices are congruent iff M^-1 (q - q') is integral; the test is an
    exact rational solve, so no digit-set enumeration is involved.
    """
    reps = _coset_representatives(problem.matrix)
    inv = problem.matrix.inverse
    sums = [0.0] * len(reps)
    for q, value in problem.mask.items_sorted():
        for i, rep in enumerate(reps):
            delta = [a - b for a, b in zip(q, rep)]
            preimage = inv.apply(delta)
            if all(x.denominator == 1 for x in preimage):
                sums[i] += value
                break
        else:
            raise ArithmeticError(f"index {q} matched no residue class")
    target = 1.0 / problem.m
    uniform = all(abs(s - target) <= COSET_UNIFORM_TOL for s in sums)
    return CosetSums(tuple(reps), tuple(sums), uniform)
