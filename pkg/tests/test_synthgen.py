"""Synthetic fixture generator: determinism, statistics, structure."""

import numpy as np
import pytest

from citemetrics import build_graph, ingest, prune_leaves
from citemetrics.dataset import export_canonical_bytes
from citemetrics.synthgen import FixtureParams, gen_fixture, generate_dataset, write_fixture

from conftest import graph_of


class TestDeterminism:
    def test_same_seed_same_bytes(self):
        a = export_canonical_bytes(generate_dataset(FixtureParams(n_papers=120, seed=1)))
        b = export_canonical_bytes(generate_dataset(FixtureParams(n_papers=120, seed=1)))
        assert a == b

    def test_different_seed_differs(self):
        a = export_canonical_bytes(generate_dataset(FixtureParams(n_papers=120, seed=1)))
        b = export_canonical_bytes(generate_dataset(FixtureParams(n_papers=120, seed=2)))
        assert a != b

    def test_write_fixture_roundtrip(self, tmp_path):
        path = tmp_path / "fix.jsonl"
        d = write_fixture(path, FixtureParams(n_papers=60, seed=3))
        d2, report = ingest(path)
        assert report.records_dropped == 0
        assert d2 == d


class TestStatistics:
    def test_refs_mean_within_ten_percent(self):
        params = FixtureParams(n_papers=10_000, seed=4, refs_mean=20.0)
        d = generate_dataset(params)
        declared = np.array([p.declared_ref_count for p in d.papers.values()], dtype=float)
        assert abs(declared.mean() - 20.0) <= 2.0

    def test_authors_mean_reasonable(self):
        d = generate_dataset(FixtureParams(n_papers=5000, seed=5, authors_mean=3.0))
        n_aut = np.array([p.n_authors for p in d.papers.values() if p.collaboration is None])
        assert abs(n_aut.mean() - 3.0) <= 0.5

    def test_volume_grows(self):
        d = generate_dataset(FixtureParams(n_papers=5000, seed=6, growth=0.05, n_years=30))
        years = np.array([p.date.year for p in d.papers.values()])
        first_decade = (years < years.min() + 10).sum()
        last_decade = (years >= years.max() - 9).sum()
        assert last_decade > 1.5 * first_decade

    def test_citations_heavy_tailed(self):
        d = generate_dataset(FixtureParams(n_papers=3000, seed=7))
        g = graph_of(d)
        counts = np.sort(g.citation_count)[::-1]
        top_share = counts[: max(len(counts) // 25, 1)].sum() / max(counts.sum(), 1)
        assert top_share > 0.2  # top 4 percent of papers hold over 20 percent


class TestStructure:
    def test_single_paper_no_edges(self):
        d = generate_dataset(FixtureParams(n_papers=1, seed=8))
        g = graph_of(d)
        assert g.n_papers == 1
        assert g.n_edges == 0

    def test_references_point_backwards(self):
        d = generate_dataset(FixtureParams(n_papers=400, seed=9))
        for rec in d.papers.values():
            for ref in rec.references:
                assert d.papers[ref].date.year < rec.date.year

    def test_no_acausal_edges_generated(self):
        d = generate_dataset(FixtureParams(n_papers=400, seed=10))
        _, report = build_graph(d)
        assert report.acausal == 0

    def test_fully_internal_properties(self):
        d = generate_dataset(FixtureParams(n_papers=300, seed=11, fully_internal=True))
        for rec in d.papers.values():
            assert rec.declared_ref_count == len(rec.references)
            assert len(rec.references) >= 1
            for ref in rec.references:
                assert ref in d.papers

    def test_default_peeling_complete(self):
        # without the first-year ring the graph has no same-year edges
        d = generate_dataset(FixtureParams(n_papers=300, seed=12))
        result = prune_leaves(graph_of(d))
        assert result.residual.size == 0

    def test_validation(self):
        with pytest.raises(ValueError):
            FixtureParams(n_papers=0)
        with pytest.raises(ValueError):
            FixtureParams(n_papers=10, pref_attachment=1.5)
        with pytest.raises(ValueError):
            FixtureParams(n_papers=10, authors_mean=0.5)

    def test_gen_fixture_convenience(self):
        d = gen_fixture(13, 50, refs_mean=5.0)
        assert d.n_papers == 50
