"""Shared fixtures, small dataset builders, and independent oracles.

The oracles here deliberately avoid the library's sparse code paths:
dense linear solves for the ranks, explicit path enumeration for the
generation expansion, double loops for Gini and the coin. Tests freeze
expected values computed with these, or compare against them directly.
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np
import pytest

from citemetrics import (
    AuthorLink,
    AuthorRecord,
    CalendarDate,
    CitationGraph,
    Dataset,
    EdgeFilter,
    InstitutionRecord,
    PaperRecord,
    build_graph,
)


# ---------------------------------------------------------------------------
# dataset builders

def quick_dataset(papers, genders=None, inst_coords=None, inst_geo=None) -> Dataset:
    """Construct a Dataset from terse paper dicts.

    Each paper dict takes: id, year, month (optional), refs, declared
    (defaults to len(refs)), authors (list of: author id, or
    (author id, [institution ids]), or None for an unresolved name),
    journal, published (default True), cats.

    Author, institution, and journal records are registered on the fly;
    ``genders`` maps author id to a tag, ``inst_coords`` maps
    institution id to (lat, lon), ``inst_geo`` to (country, continent).
    """
    d = Dataset()
    genders = genders or {}
    inst_coords = inst_coords or {}
    inst_geo = inst_geo or {}

    def ensure_author(aid):
        if aid is not None and aid not in d.authors:
            d.authors[aid] = AuthorRecord(aid, f"Author {aid}", genders.get(aid))

    def ensure_inst(iid):
        if iid not in d.institutions:
            lat, lon = inst_coords.get(iid, (None, None))
            country, continent = inst_geo.get(iid, (None, None))
            d.institutions[iid] = InstitutionRecord(iid, f"Inst {iid}", lat, lon, country, continent)

    for fields in papers:
        links = []
        for entry in fields.get("authors", ()):  # int | (int, affs) | None
            if entry is None:
                links.append(AuthorLink(None, []))
                continue
            if isinstance(entry, tuple):
                aid, affs = entry
            else:
                aid, affs = entry, []
            ensure_author(aid)
            for iid in affs:
                ensure_inst(iid)
            links.append(AuthorLink(aid, list(affs)))
        journal = fields.get("journal")
        if journal is not None and journal not in d.journals:
            d.journals[journal] = f"Journal {journal}"
        refs = sorted(fields.get("refs", ()))
        d.papers[fields["id"]] = PaperRecord(
            paper_id=fields["id"],
            date=CalendarDate(fields["year"], fields.get("month")),
            title=fields.get("title", f"Paper {fields['id']}"),
            authors=links,
            journal_id=journal,
            collaboration=fields.get("collaboration"),
            categories=list(fields.get("cats", ())),
            declared_ref_count=fields.get("declared", len(refs)),
            references=refs,
            published=fields.get("published", True),
        )
    return d


def graph_of(dataset, **filter_kwargs) -> CitationGraph:
    graph, _ = build_graph(dataset, EdgeFilter(**filter_kwargs) if filter_kwargs else None)
    return graph


@pytest.fixture
def chain_dataset() -> Dataset:
    # C(2002) cites B(2001) cites A(2000); ids 1, 2, 3
    return quick_dataset([
        {"id": 1, "year": 2000, "authors": [11]},
        {"id": 2, "year": 2001, "refs": [1], "authors": [12]},
        {"id": 3, "year": 2002, "refs": [2], "authors": [13]},
    ])


# ---------------------------------------------------------------------------
# random graphs

def random_graph(rng, max_nodes=300, cyclic=True, max_outdeg=3.0, min_nodes=2) -> CitationGraph:
    """A random directed graph wrapped in a CitationGraph.

    Cyclic graphs put every paper in the same year (any edge set is then
    causal); acyclic graphs orient every edge from a younger to a
    strictly older paper, one paper per year.
    """
    n = int(rng.integers(min_nodes, max_nodes + 1))
    m = int(n * rng.uniform(0.5, max_outdeg))
    src = rng.integers(0, n, m)
    dst = rng.integers(0, n, m)
    keep = src != dst
    src, dst = src[keep], dst[keep]
    if not cyclic:
        src, dst = np.maximum(src, dst), np.minimum(src, dst)
    pairs = np.unique(src * n + dst)
    src, dst = pairs // n, pairs % n
    years = np.full(n, 2000) if cyclic else 2000 + np.arange(n)
    return CitationGraph.from_arrays(np.arange(n), years, src, dst)


def random_dataset(rng, n_papers=60, n_authors=20, max_refs=6, partial_authors=False) -> Dataset:
    """A random dataset with resolvable references and full author lists."""
    papers = []
    for i in range(n_papers):
        year = 2000 + i // max(n_papers // 10, 1)
        k = int(rng.integers(0, min(max_refs, i) + 1))
        refs = sorted(rng.choice(i, size=k, replace=False).tolist()) if k else []
        n_aut = int(rng.integers(1, 4))
        authors = rng.choice(n_authors, size=n_aut, replace=False).tolist()
        if partial_authors and rng.random() < 0.2:
            authors[0] = None
        papers.append({
            "id": i,
            "year": year,
            "refs": refs,
            "authors": authors,
            "published": bool(rng.random() < 0.8),
        })
    return quick_dataset(papers)


# ---------------------------------------------------------------------------
# independent oracles

def dense_paperrank(graph: CitationGraph, damping: float) -> np.ndarray:
    """Direct dense solve of the rank equations, then the same rescale."""
    n = graph.n_papers
    m = np.zeros((n, n))
    outdeg = graph.indexed_ref_count
    for p in range(n):
        for q in graph.references(p):
            m[q, p] += 1.0 / outdeg[p]
    r = np.linalg.solve(np.eye(n) - damping * m, np.ones(n))
    r_tot = float(graph.n_edges)
    if r_tot == 0.0:
        return np.zeros(n)
    return r * (r_tot / r.sum())


def dense_authorrank(weights: np.ndarray, damping: float) -> np.ndarray:
    """Dense solve of the author rank with uniform dangling completion."""
    w = np.asarray(weights, dtype=np.float64)
    n = w.shape[0]
    out = w.sum(axis=1)
    c = np.full((n, n), 1.0 / n)
    rows = out > 0
    c[rows] = w[rows] / out[rows, None]
    r = np.linalg.solve(np.eye(n) - damping * c.T, np.ones(n))
    return r * (n / r.sum())


def brute_generation_contributions(graph: CitationGraph, g_max: int) -> np.ndarray:
    """Path enumeration: weight of every citation path of length <= g_max."""
    n = graph.n_papers
    outdeg = graph.indexed_ref_count
    out = np.zeros((n, g_max + 1))
    out[:, 0] = 1.0
    for p in range(n):
        stack = [(p, 1.0, 0)]
        while stack:
            node, weight, depth = stack.pop()
            if depth == g_max:
                continue
            for citer in graph.citers(node):
                w = weight / outdeg[citer]
                out[p, depth + 1] += w
                stack.append((int(citer), w, depth + 1))
    return out


def brute_h_index(citations) -> int:
    citations = list(citations)
    return max(
        (h for h in range(len(citations) + 1)
         if sum(1 for c in citations if c >= h) >= h),
        default=0,
    )


def brute_gini(values) -> float:
    x = np.asarray(values, dtype=np.float64)
    return float(np.abs(x[:, None] - x[None, :]).sum() / (2.0 * x.size * x.sum()))


def brute_citation_coin(dataset: Dataset, graph: CitationGraph) -> dict[int, float]:
    """Per-pair loop over every citation edge; no sparse machinery."""
    received: dict[int, float] = defaultdict(float)
    given: dict[int, float] = defaultdict(float)
    node_paper = {i: dataset.papers[int(pid)] for i, pid in enumerate(graph.paper_ids)}
    for src in range(graph.n_papers):
        citing = node_paper[src]
        for dst in graph.references(src):
            cited = node_paper[int(dst)]
            if citing.n_authors == 0 or cited.n_authors == 0:
                continue
            w = 1.0 / (cited.n_authors * citing.n_authors * citing.declared_ref_count)
            for la in citing.authors:
                if la.author_id is None:
                    continue
                for lb in cited.authors:
                    if lb.author_id is None:
                        continue
                    received[lb.author_id] += w
                    given[la.author_id] += w
    return {aid: received[aid] - given[aid] for aid in set(received) | set(given)}
