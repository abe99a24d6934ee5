"""Metric arithmetic, tie rules, file parsing, and oracle equivalence."""

import io
import random

import pytest

from ontoalign.errors import (
    IncompleteScores,
    NoCases,
    ParseError,
    PrecisionUndefined,
    RecallUndefined,
)
from ontoalign.evalmetrics import (
    MappingSet,
    RankingCase,
    accuracy,
    hits_at_k,
    mrr,
    pr_curve,
    precision_recall_f,
    rank_of,
    read_mapping_file,
    read_ranking_file,
    write_mapping_file,
)


def _mapping_set(pairs) -> MappingSet:
    mapping = MappingSet()
    for source, target in pairs:
        mapping.add(source, target)
    return mapping


def _published_fixture(n_ref: int, hits: int, n_out: int) -> tuple[MappingSet, MappingSet]:
    """Reference of n_ref pairs; output hitting `hits` of them plus junk."""
    m_ref = _mapping_set((f"s{i}", f"t{i}") for i in range(n_ref))
    out_pairs = [(f"s{i}", f"t{i}") for i in range(hits)]
    out_pairs += [(f"s{i}", "t_wrong") for i in range(n_out - hits)]
    return _mapping_set(out_pairs), m_ref


class TestPrecisionRecallF:
    def test_perfect_alignment(self):
        m = _mapping_set([("a", "b"), ("c", "d")])
        assert precision_recall_f(m, m) == (1.0, 1.0, 1.0)

    # Fixtures sized to realize published (P, R) operating points; the
    # F-scores then fall out of the harmonic-mean arithmetic.
    @pytest.mark.parametrize(
        "n_ref,hits,n_out,p_expect,r_expect,f_expect",
        [
            (10_000, 7_380, 7_793, 0.947, 0.738, 0.830),
            (1_000, 929, 956, 0.972, 0.929, 0.950),
            (1_000, 795, 983, 0.809, 0.795, 0.802),
        ],
    )
    def test_published_operating_points(self, n_ref, hits, n_out, p_expect, r_expect, f_expect):
        m_out, m_ref = _published_fixture(n_ref, hits, n_out)
        precision, recall, f_score = precision_recall_f(m_out, m_ref, beta=1.0)
        assert precision == pytest.approx(p_expect, abs=5e-4)
        assert recall == pytest.approx(r_expect, abs=5e-4)
        assert f_score == pytest.approx(f_expect, abs=1e-3)

    def test_beta_weighting(self):
        m_out, m_ref = _published_fixture(100, 50, 75)
        p, r, f2 = precision_recall_f(m_out, m_ref, beta=2.0)
        assert f2 == pytest.approx(5 * p * r / (4 * p + r))

    def test_empty_out_undefined(self):
        with pytest.raises(PrecisionUndefined):
            precision_recall_f(MappingSet(), _mapping_set([("a", "b")]))

    def test_empty_ref_undefined(self):
        with pytest.raises(RecallUndefined):
            precision_recall_f(_mapping_set([("a", "b")]), MappingSet())

    def test_line_permutation_invariant(self):
        pairs = [(f"s{i}", f"t{i}") for i in range(30)]
        rng = random.Random(0)
        shuffled = pairs[:]
        rng.shuffle(shuffled)
        assert precision_recall_f(_mapping_set(pairs), _mapping_set(pairs[:20])) == (
            precision_recall_f(_mapping_set(shuffled), _mapping_set(pairs[:20]))
        )


class TestRankOf:
    def test_dominant_reference(self):
        case = RankingCase("s", "ref", ("n1", "n2"), {"ref": 0.9, "n1": 0.5, "n2": 0.1})
        assert rank_of(case) == 1

    def test_two_better_negatives(self):
        case = RankingCase("s", "ref", ("n1", "n2"), {"ref": 0.7, "n1": 0.8, "n2": 0.75})
        assert rank_of(case) == 3

    def test_tie_broken_lexicographically(self):
        case = RankingCase("s", "zref", ("alpha",), {"zref": 0.7, "alpha": 0.7})
        assert rank_of(case) == 2
        case2 = RankingCase("s", "aref", ("zeta",), {"aref": 0.7, "zeta": 0.7})
        assert rank_of(case2) == 1

    def test_missing_scores(self):
        case = RankingCase("s", "ref", ("n1",), {"ref": 0.5})
        with pytest.raises(IncompleteScores):
            rank_of(case)

    def test_scale_invariance(self):
        rng = random.Random(8)
        for _ in range(50):
            negatives = tuple(f"n{i}" for i in range(10))
            scores = {t: rng.random() for t in ("ref", *negatives)}
            case = RankingCase("s", "ref", negatives, scores)
            scaled = RankingCase(
                "s", "ref", negatives, {t: s * 7.3 for t, s in scores.items()}
            )
            assert rank_of(case) == rank_of(scaled)


def _random_cases(rng: random.Random, n_cases: int, n_neg: int) -> list[RankingCase]:
    cases = []
    for i in range(n_cases):
        negatives = tuple(f"c{i}_n{j}" for j in range(n_neg))
        scores = {t: round(rng.random(), 3) for t in (f"c{i}_ref", *negatives)}
        cases.append(RankingCase(f"s{i}", f"c{i}_ref", negatives, scores))
    return cases


def _oracle_rank(case: RankingCase) -> int:
    # Independent re-statement: sort candidates by (-score, id), find the
    # reference's 1-based position.
    ordered = sorted(
        (case.reference_target_id, *case.negative_targets),
        key=lambda t: (-case.scores[t], t),
    )
    return ordered.index(case.reference_target_id) + 1


class TestHitsAndMrr:
    def test_hits_examples(self):
        cases = [
            RankingCase("a", "r", ("n",), {"r": 0.9, "n": 0.1}),
            RankingCase("b", "r", ("n",), {"r": 0.1, "n": 0.9}),
        ]
        assert hits_at_k(cases, 1) == 0.5
        assert hits_at_k(cases, 2) == 1.0

    def test_all_rank_one(self):
        cases = [RankingCase("a", "r", ("n",), {"r": 1.0, "n": 0.0})] * 3
        for k in (1, 2, 5):
            assert hits_at_k(cases, k) == 1.0

    def test_k_at_pool_size_is_one(self):
        rng = random.Random(1)
        cases = _random_cases(rng, 20, 10)
        assert hits_at_k(cases, 11) == 1.0

    def test_mrr_examples(self):
        cases = [
            RankingCase("a", "r", ("n",), {"r": 0.9, "n": 0.1}),
            RankingCase("b", "r", ("n", "m"), {"r": 0.5, "n": 0.9, "m": 0.1}),
        ]
        assert mrr(cases) == pytest.approx(0.75)

    def test_mrr_constant_rank(self):
        negatives = tuple(f"n{i}" for i in range(100))
        scores = {t: 1.0 for t in negatives}
        scores["zz_ref"] = 0.0
        cases = [RankingCase("s", "zz_ref", negatives, scores)] * 5
        assert mrr(cases) == pytest.approx(1 / 101)

    def test_empty_cases(self):
        with pytest.raises(NoCases):
            hits_at_k([], 1)
        with pytest.raises(NoCases):
            mrr([])

    def test_oracle_equivalence_and_bounds(self):
        rng = random.Random(99)
        for _ in range(40):
            cases = _random_cases(rng, rng.randint(1, 30), rng.randint(1, 15))
            oracle_ranks = [_oracle_rank(c) for c in cases]
            assert [rank_of(c) for c in cases] == oracle_ranks
            n_neg = len(cases[0].negative_targets)
            value = mrr(cases)
            assert 1 / (1 + n_neg) <= value <= 1.0
            hits1 = hits_at_k(cases, 1)
            assert hits1 <= value <= 1.0
            previous = 0.0
            for k in range(1, n_neg + 2):
                current = hits_at_k(cases, k)
                assert current >= previous
                previous = current


class TestAccuracy:
    def test_perfect(self):
        ref = _mapping_set([("a", "x"), ("b", "y")])
        assert accuracy({"a": "x", "b": "y"}, ref) == 1.0

    def test_three_of_four(self):
        ref = _mapping_set([("a", "x"), ("b", "y"), ("c", "z"), ("d", "w")])
        assert accuracy({"a": "x", "b": "y", "c": "z", "d": "wrong"}, ref) == 0.75

    def test_no_predictions(self):
        ref = _mapping_set([("a", "x")])
        assert accuracy({}, ref) == 0.0

    def test_empty_reference(self):
        with pytest.raises(RecallUndefined):
            accuracy({}, MappingSet())


class TestMappingFiles:
    def test_write_read_round_trip(self):
        buffer = io.StringIO()
        write_mapping_file(
            buffer, [("s1", "t1", 0.9), ("s2", "t2", 0.5)], provenance="test run"
        )
        buffer.seek(0)
        mapping = read_mapping_file(buffer)
        assert mapping.pairs == {("s1", "t1"), ("s2", "t2")}
        assert mapping.scores[("s1", "t1")] == pytest.approx(0.9)

    def test_missing_header(self):
        with pytest.raises(ParseError) as exc_info:
            read_mapping_file(["s\tt\t0.5"])
        assert exc_info.value.line_no == 1

    def test_malformed_row_reports_line(self):
        lines = ["SrcEntity\tTgtEntity\tScore", "s1\tt1\t0.5", "s2\tt2"]
        with pytest.raises(ParseError) as exc_info:
            read_mapping_file(lines)
        assert exc_info.value.line_no == 3

    def test_bad_score_reports_line(self):
        lines = ["SrcEntity\tTgtEntity\tScore", "s1\tt1\tnot-a-number"]
        with pytest.raises(ParseError) as exc_info:
            read_mapping_file(lines)
        assert exc_info.value.line_no == 2

    def test_duplicates_keep_max_score(self):
        lines = [
            "SrcEntity\tTgtEntity\tScore",
            "s1\tt1\t0.3",
            "s1\tt1\t0.8",
        ]
        mapping = read_mapping_file(lines)
        assert len(mapping) == 1
        assert mapping.scores[("s1", "t1")] == pytest.approx(0.8)

    def test_predictions_pick_best_target(self):
        lines = [
            "SrcEntity\tTgtEntity\tScore",
            "s1\tt_low\t0.3",
            "s1\tt_high\t0.9",
        ]
        assert read_mapping_file(lines).predictions() == {"s1": "t_high"}


class TestRankingFiles:
    def test_round_trip(self):
        lines = [
            "SrcEntity\tTgtEntity\tTgtCandidates",
            "s1\tt_ref\tn1;n2;n3",
        ]
        cases = read_ranking_file(lines)
        assert cases == [RankingCase("s1", "t_ref", ("n1", "n2", "n3"))]

    def test_reference_among_candidates_rejected(self):
        lines = [
            "SrcEntity\tTgtEntity\tTgtCandidates",
            "s1\tt_ref\tn1;t_ref",
        ]
        with pytest.raises(ParseError):
            read_ranking_file(lines)


class TestPrCurve:
    def test_monotone_threshold_subsets(self):
        m_ref = _mapping_set([(f"s{i}", f"t{i}") for i in range(10)])
        m_out = MappingSet()
        rng = random.Random(2)
        for i in range(10):
            m_out.add(f"s{i}", f"t{i}" if i < 7 else "junk", rng.random())
        points = pr_curve(m_out, m_ref)
        assert points
        recalls = [r for _, _, r, _ in points]
        assert recalls == sorted(recalls, reverse=True)
