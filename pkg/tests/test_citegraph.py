"""Graph construction, causal filtering, ordering, peeling, cache."""

import numpy as np
import pytest

from citemetrics import EdgeFilter, build_graph, prune_leaves, topological_order
from citemetrics.citegraph import (
    CacheMismatch,
    build_or_load,
    graph_fingerprint,
    load_graph_cache,
    save_graph_cache,
)
from conftest import graph_of, quick_dataset, random_dataset, random_graph


class TestBuildGraph:
    def test_causal_edge_kept(self):
        d = quick_dataset([
            {"id": 1, "year": 1990},
            {"id": 2, "year": 2000, "refs": [1]},
        ])
        g, report = build_graph(d)
        assert g.n_edges == 1
        assert report.deleted == 0

    def test_acausal_edge_deleted(self):
        d = quick_dataset([
            {"id": 1, "year": 1990, "refs": [2], "declared": 1},
            {"id": 2, "year": 2000},
        ])
        g, report = build_graph(d)
        assert g.n_edges == 0
        assert report.acausal == 1

    def test_same_year_edge_is_causal(self):
        d = quick_dataset([
            {"id": 1, "year": 2000},
            {"id": 2, "year": 2000, "refs": [1]},
        ])
        g, report = build_graph(d)
        assert g.n_edges == 1
        assert report.acausal == 0

    def test_transpose_consistency(self):
        rng = np.random.default_rng(0)
        d = random_dataset(rng, n_papers=80)
        g = graph_of(d)
        for p in range(g.n_papers):
            for q in g.references(p):
                assert p in g.citers(int(q))
        for q in range(g.n_papers):
            for p in g.citers(q):
                assert q in g.references(int(p))

    def test_edge_count_conservation(self):
        rng = np.random.default_rng(1)
        d = random_dataset(rng, n_papers=120, partial_authors=True)
        for kwargs in ({}, {"published_only": True}, {"drop_self_citations": True},
                       {"window": (2002, 2006)}):
            g, report = build_graph(d, EdgeFilter(**kwargs))
            assert report.raw_edges == report.kept_edges + report.deleted
            assert g.n_edges == report.kept_edges

    def test_self_citation_filter(self):
        d = quick_dataset([
            {"id": 1, "year": 2000, "authors": [5]},
            {"id": 2, "year": 2001, "refs": [1], "authors": [5, 6]},
            {"id": 3, "year": 2002, "refs": [1], "authors": [7]},
        ])
        g, report = build_graph(d, EdgeFilter(drop_self_citations=True))
        assert report.self_citation == 1
        assert g.n_edges == 1
        # unfiltered both edges survive
        assert graph_of(d).n_edges == 2

    def test_published_only_filter(self):
        d = quick_dataset([
            {"id": 1, "year": 2000},
            {"id": 2, "year": 2001, "refs": [1], "published": False},
            {"id": 3, "year": 2002, "refs": [1]},
        ])
        g, report = build_graph(d, EdgeFilter(published_only=True))
        assert g.n_edges == 1
        assert report.unpublished_citer == 1
        # the unpublished paper stays a node, only its outgoing edge is gone
        assert g.n_papers == 3

    def test_window_restricts_node_set(self):
        d = quick_dataset([
            {"id": 1, "year": 1995},
            {"id": 2, "year": 2001, "refs": [1]},
            {"id": 3, "year": 2002, "refs": [1, 2]},
        ])
        g, report = build_graph(d, EdgeFilter(window=(2000, None)))
        assert list(g.paper_ids) == [2, 3]
        assert g.n_edges == 1  # 3 -> 2 survives, both edges to paper 1 excluded
        assert report.window_excluded == 2

    def test_empty_window_rejected(self):
        with pytest.raises(ValueError):
            EdgeFilter(window=(2005, 2000))
        with pytest.raises(ValueError):
            EdgeFilter(window=(None, None))

    def test_empty_graph_is_valid(self):
        g, report = build_graph(quick_dataset([]))
        assert g.n_papers == 0
        assert g.n_edges == 0


class TestTopologicalOrder:
    def test_chain_oldest_first(self, chain_dataset):
        g = graph_of(chain_dataset)
        order = topological_order(g)
        assert [int(g.paper_ids[i]) for i in order] == [1, 2, 3]

    def test_same_year_cycle_kept_ordered_by_id(self):
        d = quick_dataset([
            {"id": 7, "year": 2000, "refs": [9]},
            {"id": 9, "year": 2000, "refs": [7]},
        ])
        g = graph_of(d)
        assert g.n_edges == 2
        order = topological_order(g)
        assert [int(g.paper_ids[i]) for i in order] == [7, 9]

    def test_empty_graph(self):
        g = graph_of(quick_dataset([]))
        assert topological_order(g).size == 0

    def test_edges_never_point_to_strictly_newer(self):
        rng = np.random.default_rng(3)
        g = graph_of(random_dataset(rng, n_papers=100))
        position = np.empty(g.n_papers, dtype=int)
        position[topological_order(g)] = np.arange(g.n_papers)
        for p in range(g.n_papers):
            for q in g.references(p):
                assert (position[q] < position[p]) or (g.year[q] == g.year[p])


class TestPruneLeaves:
    def test_chain_layers(self, chain_dataset):
        g = graph_of(chain_dataset)
        result = prune_leaves(g)
        layers = [[int(g.paper_ids[i]) for i in layer] for layer in result.layers]
        assert layers == [[3], [2], [1]]
        assert result.residual.size == 0

    def test_same_year_cycle_is_residual(self):
        d = quick_dataset([
            {"id": 1, "year": 2000, "refs": [2]},
            {"id": 2, "year": 2000, "refs": [1]},
        ])
        result = prune_leaves(graph_of(d))
        assert result.residual.size == 2
        assert result.n_peeled == 0

    def test_isolated_paper_in_layer_zero(self):
        d = quick_dataset([{"id": 1, "year": 2000}])
        result = prune_leaves(graph_of(d))
        assert [list(l) for l in result.layers] == [[0]]

    def test_peeling_complete_on_strictly_ordered_graph(self):
        rng = np.random.default_rng(4)
        g = random_graph(rng, max_nodes=150, cyclic=False)
        result = prune_leaves(g)
        assert result.residual.size == 0
        assert result.n_peeled == g.n_papers

    def test_layer_k_cited_only_by_earlier_layers(self):
        rng = np.random.default_rng(5)
        g = random_graph(rng, max_nodes=80, cyclic=False)
        result = prune_leaves(g)
        layer_of = {}
        for k, layer in enumerate(result.layers):
            for i in layer:
                layer_of[int(i)] = k
        for p in range(g.n_papers):
            for citer in g.citers(p):
                assert layer_of[int(citer)] < layer_of[p]


class TestCache:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(6)
        d = random_dataset(rng, n_papers=60)
        g, _ = build_graph(d)
        path = tmp_path / "graph.bin"
        save_graph_cache(g, path, "fp")
        g2 = load_graph_cache(path, "fp")
        assert np.array_equal(g.paper_ids, g2.paper_ids)
        assert np.array_equal(g.fwd_indptr, g2.fwd_indptr)
        assert np.array_equal(g.fwd_indices, g2.fwd_indices)
        assert np.array_equal(g.rev_indices, g2.rev_indices)
        assert np.array_equal(g.year, g2.year)
        assert np.array_equal(g.declared_ref_count, g2.declared_ref_count)
        assert np.array_equal(g.published, g2.published)

    def test_fingerprint_mismatch_raises(self, tmp_path):
        d = quick_dataset([{"id": 1, "year": 2000}])
        g, _ = build_graph(d)
        path = tmp_path / "graph.bin"
        save_graph_cache(g, path, "old")
        with pytest.raises(CacheMismatch):
            load_graph_cache(path, "new")

    def test_build_or_load_rebuilds_on_change(self, tmp_path):
        d = quick_dataset([
            {"id": 1, "year": 2000},
            {"id": 2, "year": 2001, "refs": [1]},
        ])
        path = tmp_path / "graph.bin"
        g1, report1 = build_or_load(d, None, path)
        assert report1 is not None  # built fresh
        g2, report2 = build_or_load(d, None, path)
        assert report2 is None  # cache hit
        assert np.array_equal(g1.fwd_indices, g2.fwd_indices)
        # different filter: another fingerprint, so rebuild
        g3, report3 = build_or_load(d, EdgeFilter(published_only=True), path)
        assert report3 is not None

    def test_fingerprint_depends_on_filter(self):
        d = quick_dataset([{"id": 1, "year": 2000}])
        a = graph_fingerprint(d, EdgeFilter())
        b = graph_fingerprint(d, EdgeFilter(published_only=True))
        assert a != b

    def test_garbage_file_rejected(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"definitely not a cache")
        with pytest.raises(CacheMismatch):
            load_graph_cache(path)

    def test_truncated_cache_rebuilt(self, tmp_path):
        d = quick_dataset([
            {"id": 1, "year": 2000},
            {"id": 2, "year": 2001, "refs": [1]},
        ])
        path = tmp_path / "graph.bin"
        g1, _ = build_or_load(d, None, path)
        with open(path, "r+b") as fh:
            fh.truncate(40)
        g2, report = build_or_load(d, None, path)
        assert report is not None
        assert np.array_equal(g1.fwd_indices, g2.fwd_indices)
