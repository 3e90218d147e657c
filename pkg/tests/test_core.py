import numpy as np
import pytest

from pseudotal.core import (
    Interval,
    Proposal,
    PseudoProposal,
    SnippetPredictions,
    TimeGrid,
    snippet_centers,
    snippet_index_to_interval,
    tiou,
)


class TestTypes:
    def test_grid_validation(self):
        g = TimeGrid(10, 0.64, 3)
        assert g.duration_s == pytest.approx(6.4)
        with pytest.raises(ValueError):
            TimeGrid(0, 1.0, 3)
        with pytest.raises(ValueError):
            TimeGrid(10, 0.0, 3)
        with pytest.raises(ValueError):
            TimeGrid(10, 1.0, 0)

    def test_interval_rejects_degenerate(self):
        with pytest.raises(ValueError):
            Interval(5.0, 5.0)
        with pytest.raises(ValueError):
            Interval(5.0, 2.0)
        with pytest.raises(ValueError):
            Interval(0.0, float("inf"))
        iv = Interval(2.0, 6.0)
        assert iv.duration_s == 4.0
        assert iv.midpoint_s == 4.0

    def test_proposal_validation(self):
        p = Proposal(Interval(0, 1), 0.5, 1)
        assert p.class_id == 1
        with pytest.raises(ValueError):
            Proposal(Interval(0, 1), 0.5, 0)
        with pytest.raises(ValueError):
            Proposal(Interval(0, 1), float("nan"), 1)

    def test_pseudo_proposal_confidence_nonneg(self):
        with pytest.raises(ValueError):
            PseudoProposal(Interval(0, 1), 1, -0.1)
        p = PseudoProposal(Interval(0, 4), 2, 0.5)
        as_prop = p.as_proposal(2.0)
        assert as_prop.score == 1.0
        assert as_prop.class_id == 2

    def test_snippet_predictions_validation(self):
        att = np.array([0.5, 1.0])
        cls = np.array([[0.4, 0.6], [0.2, 0.8]])
        preds = SnippetPredictions(att, cls)
        assert preds.num_snippets == 2
        assert preds.class_count == 1
        assert not preds.attention.flags.writeable
        with pytest.raises(ValueError):
            SnippetPredictions(np.array([1.5, 0.0]), cls)
        with pytest.raises(ValueError):
            SnippetPredictions(att, np.array([[0.4, 0.5], [0.2, 0.8]]))


class TestTiou:
    def test_examples(self):
        assert tiou(Interval(0, 10), Interval(5, 15)) == pytest.approx(1 / 3)
        assert tiou(Interval(0, 10), Interval(0, 10)) == 1.0
        assert tiou(Interval(0, 5), Interval(6, 9)) == 0.0

    def test_symmetry_property(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            a0, b0 = rng.uniform(0, 50, 2)
            a = Interval(a0, a0 + rng.uniform(0.1, 20))
            b = Interval(b0, b0 + rng.uniform(0.1, 20))
            assert tiou(a, b) == tiou(b, a)
            assert 0.0 <= tiou(a, b) <= 1.0

    def test_nested_equals_length_ratio(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            a = Interval(0.0, rng.uniform(5, 30))
            s = rng.uniform(0, a.duration_s * 0.5)
            e = rng.uniform(s + 0.1, a.duration_s)
            b = Interval(s, e)
            assert tiou(a, b) == pytest.approx(b.duration_s / a.duration_s)


class TestSnippetMapping:
    def test_examples(self):
        g = TimeGrid(10, 0.64, 1)
        iv = snippet_index_to_interval(g, 0)
        assert (iv.start_s, iv.end_s) == (pytest.approx(0.0), pytest.approx(0.64))
        iv = snippet_index_to_interval(g, 9)
        assert (iv.start_s, iv.end_s) == (pytest.approx(5.76), pytest.approx(6.40))
        g1 = TimeGrid(10, 1.0, 1)
        iv = snippet_index_to_interval(g1, 5)
        assert (iv.start_s, iv.end_s) == (5.0, 6.0)

    def test_out_of_range(self):
        g = TimeGrid(10, 1.0, 1)
        with pytest.raises(IndexError, match="snippet index out of grid"):
            snippet_index_to_interval(g, 10)
        with pytest.raises(IndexError):
            snippet_index_to_interval(g, -1)

    def test_centers(self):
        g = TimeGrid(4, 0.5, 1)
        assert snippet_centers(g).tolist() == [0.25, 0.75, 1.25, 1.75]
