"""Tests for problem ingestion, validation, and residue-class sums."""

import json
import math

import pytest

from refinable import (
    Mask,
    coset_sum_report,
    mask_radius,
    parse_problem,
    problem_from_data,
    serialize_problem,
)
from refinable.errors import (
    DimensionMismatch,
    EmptyMask,
    MaskSumViolation,
    NotDilation,
    ParseError,
)
from conftest import D4_COEFFS


def doc(dimension, matrix, coefficients):
    return json.dumps(
        {"dimension": dimension, "matrix": matrix, "coefficients": coefficients}
    )


HAAR_DOC = doc(1, [[2]], [{"q": [0], "c": "1/2"}, {"q": [1], "c": "1/2"}])


class TestParsing:
    def test_haar(self):
        problem = parse_problem(HAAR_DOC)
        assert problem.m == 2
        assert problem.mask.radius == 1.0
        assert problem.mask.rational is not None

    def test_d4_decimal_coefficients(self):
        # 17+ significant digits keep the sum within 1e-12 of one
        records = [{"q": [q], "c": repr(c)} for q, c in D4_COEFFS.items()]
        text = doc(1, [[2]], [{"q": [q], "c": c} for q, c in D4_COEFFS.items()])
        problem = parse_problem(text)
        assert problem.mask.radius == 3.0
        assert problem.mask.rational is None
        total = math.fsum(problem.mask.coefficients.values())
        assert abs(total - 1.0) <= 1e-12
        # hand sum: (1 + 3 + 3 + 1)/8 plus cancelling sqrt(3) terms
        assert records  # decimal strings intentionally unused as 'c' values

    def test_sum_violation(self):
        with pytest.raises(MaskSumViolation):
            parse_problem(doc(1, [[2]], [{"q": [0], "c": "1/2"}, {"q": [1], "c": "1/4"}]))

    def test_unknown_top_level_field(self):
        data = json.loads(HAAR_DOC)
        data["comment"] = "nope"
        with pytest.raises(ParseError):
            parse_problem(json.dumps(data))

    def test_unknown_record_field(self):
        bad = doc(1, [[2]], [{"q": [0], "c": "1/2", "note": 1}, {"q": [1], "c": "1/2"}])
        with pytest.raises(ParseError):
            parse_problem(bad)

    def test_duplicate_index(self):
        bad = doc(1, [[2]], [{"q": [0], "c": "1/2"}, {"q": [0], "c": "1/2"}])
        with pytest.raises(ParseError):
            parse_problem(bad)

    def test_malformed_json(self):
        with pytest.raises(ParseError):
            parse_problem("{not json")

    def test_bad_rational_string(self):
        bad = doc(1, [[2]], [{"q": [0], "c": "1/0"}, {"q": [1], "c": "1/2"}])
        with pytest.raises(ParseError):
            parse_problem(bad)

    def test_float_matrix_entry_rejected(self):
        bad = doc(1, [[2.0]], [{"q": [0], "c": 1}])
        with pytest.raises(ParseError):
            parse_problem(bad)

    def test_dimension_mismatch_in_index(self):
        bad = doc(2, [[2, 0], [0, 2]], [{"q": [0], "c": 1}])
        with pytest.raises(DimensionMismatch):
            parse_problem(bad)

    def test_dimension_mismatch_in_matrix(self):
        bad = doc(2, [[2, 0]], [{"q": [0, 0], "c": 1}])
        with pytest.raises(DimensionMismatch):
            parse_problem(bad)

    def test_not_dilation(self):
        bad = doc(1, [[1]], [{"q": [0], "c": 1}])
        with pytest.raises(NotDilation):
            parse_problem(bad)

    def test_zero_coefficients_dropped_from_support(self):
        problem = parse_problem(
            doc(1, [[2]], [
                {"q": [0], "c": "1/2"},
                {"q": [1], "c": "1/2"},
                {"q": [7], "c": 0},
            ])
        )
        assert (7,) not in problem.mask.coefficients
        assert problem.mask.radius == 1.0

    def test_empty_mask(self):
        with pytest.raises(EmptyMask):
            Mask(1, {})


class TestRoundTrip:
    def test_rational_round_trip(self, haar_problem):
        text = serialize_problem(haar_problem)
        again = parse_problem(text)
        assert again.mask == haar_problem.mask
        assert again.matrix.matrix == haar_problem.matrix.matrix
        assert serialize_problem(again) == text

    def test_float_round_trip(self, d4_problem):
        text = serialize_problem(d4_problem)
        again = parse_problem(text)
        assert again.mask.coefficients == d4_problem.mask.coefficients


class TestRadius:
    def test_haar(self, haar_problem):
        assert mask_radius(haar_problem.mask) == 1.0

    def test_d4(self, d4_problem):
        assert mask_radius(d4_problem.mask) == 3.0

    def test_euclidean_2d(self):
        problem = problem_from_data(
            2,
            [[2, 0], [0, 2]],
            [{"q": [0, 0], "c": "1/2"}, {"q": [1, 1], "c": "1/2"}],
        )
        assert mask_radius(problem.mask) == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_permutation_invariance(self):
        records = [{"q": [q], "c": c} for q, c in D4_COEFFS.items()]
        r1 = problem_from_data(1, [[2]], records).mask.radius
        r2 = problem_from_data(1, [[2]], records[::-1]).mask.radius
        assert r1 == r2


class TestCosetSums:
    def test_haar(self, haar_problem):
        report = coset_sum_report(haar_problem)
        assert report.representatives == ((0,), (1,))
        assert report.sums == (0.5, 0.5)
        assert report.uniform

    def test_d4(self, d4_problem):
        report = coset_sum_report(d4_problem)
        assert report.sums[0] == pytest.approx(0.5, abs=1e-12)
        assert report.sums[1] == pytest.approx(0.5, abs=1e-12)
        assert report.uniform

    def test_non_uniform(self):
        problem = problem_from_data(1, [[2]], [{"q": [0], "c": 1}])
        report = coset_sum_report(problem)
        assert report.sums == (1.0, 0.0)
        assert not report.uniform

    def test_quincunx_representatives(self, quincunx_problem):
        report = coset_sum_report(quincunx_problem)
        assert report.representatives == ((0, 0), (1, 0))
        assert report.uniform

    @pytest.mark.parametrize(
        "fixture",
        ["haar_problem", "d4_problem", "quincunx_problem", "jordan2d_problem",
         "noncontractive_problem"],
    )
    def test_sums_total_one(self, fixture, request):
        problem = request.getfixturevalue(fixture)
        report = coset_sum_report(problem)
        assert len(report.representatives) == problem.m
        assert math.fsum(report.sums) == pytest.approx(1.0, abs=1e-12)
