"""Immutable compressed sparse citation graph with causal-edge filtering.

An edge ``p' -> p`` means paper ``p'`` cites paper ``p``. Causality is
enforced at year granularity: an edge survives iff the citing paper's
year is greater than or equal to the cited paper's year, so same-year
citations (including same-year cycles) are kept. Dates are often only
year-accurate, and month-level filtering would delete legitimate
same-year citations.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import CitemetricsError

CACHE_MAGIC = b"CITEGRPH"
CACHE_VERSION = 1


@dataclass(frozen=True)
class EdgeFilter:
    """Which raw citation edges make it into the graph.

    ``window`` is an inclusive ``(min_year, max_year)`` pair applied to
    both endpoints: the graph's node set is restricted to papers inside
    the window, so all metrics computed from the graph see the induced
    subgraph. ``published_only`` keeps only citations coming from
    published papers. A self-citation is an edge whose citing and cited
    papers share at least one resolved author id.
    """

    drop_self_citations: bool = False
    window: tuple[int | None, int | None] | None = None
    published_only: bool = False

    def __post_init__(self):
        if self.window is not None:
            lo, hi = self.window
            if lo is None and hi is None:
                raise ValueError("window must constrain at least one bound")
            if lo is not None and hi is not None and lo > hi:
                raise ValueError(f"empty window {self.window}")

    def key(self) -> str:
        return json.dumps(
            {
                "self": self.drop_self_citations,
                "window": self.window,
                "published": self.published_only,
            },
            sort_keys=True,
        )


@dataclass
class FilterReport:
    raw_edges: int = 0
    kept_edges: int = 0
    acausal: int = 0
    self_citation: int = 0
    window_excluded: int = 0
    unpublished_citer: int = 0

    @property
    def deleted(self) -> int:
        return self.acausal + self.self_citation + self.window_excluded + self.unpublished_citer

    def to_dict(self) -> dict:
        return {
            "raw_edges": self.raw_edges,
            "kept_edges": self.kept_edges,
            "acausal": self.acausal,
            "self_citation": self.self_citation,
            "window_excluded": self.window_excluded,
            "unpublished_citer": self.unpublished_citer,
        }


class CitationGraph:
    """CSR adjacency in both directions plus per-paper attributes.

    ``forward`` rows list the papers a paper cites (its indexed
    references); ``reverse`` rows list the papers citing it. The two are
    transposes of each other by construction. Node order is ascending
    paper id; all arrays are aligned with that order.
    """

    def __init__(self, paper_ids, year, declared_ref_count, n_authors, published,
                 fwd_indptr, fwd_indices):
        self.paper_ids = np.asarray(paper_ids, dtype=np.int64)
        if self.paper_ids.size > 1 and not np.all(np.diff(self.paper_ids) > 0):
            raise ValueError("paper_ids must be strictly increasing")
        n = self.paper_ids.size
        self.year = np.asarray(year, dtype=np.int64)
        self.declared_ref_count = np.asarray(declared_ref_count, dtype=np.int64)
        self.n_authors = np.asarray(n_authors, dtype=np.int64)
        self.published = np.asarray(published, dtype=bool)
        self.fwd_indptr = np.asarray(fwd_indptr, dtype=np.int64)
        self.fwd_indices = np.asarray(fwd_indices, dtype=np.int64)
        for name, arr in (("year", self.year), ("declared_ref_count", self.declared_ref_count),
                          ("n_authors", self.n_authors), ("published", self.published)):
            if arr.size != n:
                raise ValueError(f"{name} has size {arr.size}, expected {n}")
        if self.fwd_indptr.size != n + 1:
            raise ValueError("fwd_indptr has wrong size")
        self.rev_indptr, self.rev_indices = _transpose_csr(n, self.fwd_indptr, self.fwd_indices)
        self._transition = None

    # -- basic accessors ----------------------------------------------------

    @property
    def n_papers(self) -> int:
        return int(self.paper_ids.size)

    @property
    def n_edges(self) -> int:
        return int(self.fwd_indices.size)

    @property
    def indexed_ref_count(self) -> np.ndarray:
        return np.diff(self.fwd_indptr)

    @property
    def citation_count(self) -> np.ndarray:
        return np.diff(self.rev_indptr)

    def index_of(self, paper_id: int) -> int:
        i = int(np.searchsorted(self.paper_ids, paper_id))
        if i >= self.n_papers or self.paper_ids[i] != paper_id:
            raise KeyError(f"paper {paper_id} not in graph")
        return i

    def references(self, i: int) -> np.ndarray:
        return self.fwd_indices[self.fwd_indptr[i]:self.fwd_indptr[i + 1]]

    def citers(self, i: int) -> np.ndarray:
        return self.rev_indices[self.rev_indptr[i]:self.rev_indptr[i + 1]]

    def edge_sources(self) -> np.ndarray:
        """Citing node index per forward edge, aligned with fwd_indices."""
        return np.repeat(np.arange(self.n_papers, dtype=np.int64), self.indexed_ref_count)

    def transition_matrix(self):
        """Sparse M with M[p, p'] = 1/outdeg(p') for each edge p' -> p.

        ``M @ r`` propagates one rank generation; rows of M correspond
        to cited papers and reuse the reverse CSR structure.
        """
        if self._transition is None:
            from scipy.sparse import csr_matrix

            outdeg = self.indexed_ref_count
            data = 1.0 / outdeg[self.rev_indices]
            self._transition = csr_matrix(
                (data, self.rev_indices.astype(np.int64), self.rev_indptr),
                shape=(self.n_papers, self.n_papers),
            )
        return self._transition

    @classmethod
    def from_arrays(cls, paper_ids, years, src, dst, declared_ref_count=None,
                    n_authors=None, published=None) -> "CitationGraph":
        """Build a graph directly from edge arrays, with no filtering.

        ``src`` and ``dst`` are node indices (positions into
        ``paper_ids``). Intended for synthetic graphs in tests and for
        solver inputs that never went through a Dataset.
        """
        paper_ids = np.asarray(paper_ids, dtype=np.int64)
        n = paper_ids.size
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        outdeg = np.diff(indptr)
        if declared_ref_count is None:
            declared_ref_count = outdeg
        if n_authors is None:
            n_authors = np.ones(n, dtype=np.int64)
        if published is None:
            published = np.ones(n, dtype=bool)
        return cls(paper_ids, years, declared_ref_count, n_authors, published, indptr, dst)


def _transpose_csr(n: int, indptr: np.ndarray, indices: np.ndarray):
    src = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    order = np.argsort(indices, kind="stable")
    rev_indices = src[order]
    rev_indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(indices, minlength=n), out=rev_indptr[1:])
    return rev_indptr, rev_indices


def build_graph(dataset: Dataset, efilter: EdgeFilter | None = None) -> tuple[CitationGraph, FilterReport]:
    """Assemble the filtered citation graph from a dataset.

    Edges are classified once, in this priority order: outside the
    window, unpublished citer (when ``published_only``), acausal
    (citing year strictly before cited year), self-citation (when
    enabled). The report counts each class so that
    ``raw_edges == kept_edges + deleted``.
    """
    efilter = efilter or EdgeFilter()
    report = FilterReport()

    all_ids = np.fromiter(sorted(dataset.papers), dtype=np.int64, count=len(dataset.papers))
    years_all = np.fromiter(
        (dataset.papers[int(p)].date.year for p in all_ids), dtype=np.int64, count=all_ids.size
    )
    report.raw_edges = dataset.total_indexed_refs()

    if efilter.window is not None:
        lo, hi = efilter.window
        mask = np.ones(all_ids.size, dtype=bool)
        if lo is not None:
            mask &= years_all >= lo
        if hi is not None:
            mask &= years_all <= hi
        ids = all_ids[mask]
    else:
        ids = all_ids

    id_set = set(int(i) for i in ids)
    n = ids.size
    year = np.empty(n, dtype=np.int64)
    declared = np.empty(n, dtype=np.int64)
    n_aut = np.empty(n, dtype=np.int64)
    published = np.empty(n, dtype=bool)
    ref_counts = np.empty(n, dtype=np.int64)
    for i, pid in enumerate(ids):
        rec = dataset.papers[int(pid)]
        year[i] = rec.date.year
        declared[i] = rec.declared_ref_count
        n_aut[i] = rec.n_authors
        published[i] = rec.published
        ref_counts[i] = len(rec.references)

    # edges from excluded citers never reach the graph
    if efilter.window is not None:
        for pid, rec in dataset.papers.items():
            if pid not in id_set:
                report.window_excluded += len(rec.references)

    total = int(ref_counts.sum())
    src = np.repeat(np.arange(n, dtype=np.int64), ref_counts)
    dst_ids = np.empty(total, dtype=np.int64)
    pos = 0
    for i, pid in enumerate(ids):
        refs = dataset.papers[int(pid)].references
        dst_ids[pos:pos + len(refs)] = refs
        pos += len(refs)

    dst = np.searchsorted(ids, dst_ids)
    dst_clip = np.minimum(dst, max(n - 1, 0))
    resolvable = (n > 0) & (ids[dst_clip] == dst_ids) if total else np.zeros(0, dtype=bool)
    report.window_excluded += int(total - resolvable.sum())
    src, dst = src[resolvable], dst_clip[resolvable]

    keep = np.ones(src.size, dtype=bool)
    if efilter.published_only:
        bad = ~published[src]
        report.unpublished_citer = int(bad.sum())
        keep &= ~bad
    acausal = keep & (year[src] < year[dst])
    report.acausal = int(acausal.sum())
    keep &= ~acausal

    if efilter.drop_self_citations and src.size:
        author_sets = []
        for pid in ids:
            rec = dataset.papers[int(pid)]
            author_sets.append(
                frozenset(l.author_id for l in rec.authors if l.author_id is not None)
            )
        for e in np.flatnonzero(keep):
            sa = author_sets[src[e]]
            if sa and not sa.isdisjoint(author_sets[dst[e]]):
                keep[e] = False
                report.self_citation += 1

    src, dst = src[keep], dst[keep]
    report.kept_edges = int(src.size)

    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    graph = CitationGraph(ids, year, declared, n_aut, published, indptr, dst)
    return graph, report


def topological_order(graph: CitationGraph) -> np.ndarray:
    """Node indices sorted oldest first: (year ascending, paper id ascending).

    On a causally filtered graph every edge then points from a later
    position to an earlier or same-year position. Same-year ties,
    including same-year cycles, are broken by paper id.
    """
    return np.argsort(graph.year, kind="stable")


@dataclass
class PruneResult:
    """Iterative peeling of uncited papers.

    ``layers[0]`` holds papers nobody cites; ``layers[k]`` holds papers
    whose citers all sit in earlier layers. ``residual`` lists papers
    that finite peeling never reaches (same-year citation cycles).
    """

    layers: list[np.ndarray] = field(default_factory=list)
    residual: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def n_peeled(self) -> int:
        return sum(layer.size for layer in self.layers)


def prune_leaves(graph: CitationGraph) -> PruneResult:
    """Peel papers with no remaining citers, layer by layer."""
    citers_left = graph.citation_count.copy()
    result = PruneResult()
    current = np.flatnonzero(citers_left == 0).astype(np.int64)
    removed = np.zeros(graph.n_papers, dtype=bool)
    while current.size:
        result.layers.append(np.sort(current))
        removed[current] = True
        # removing this layer frees its references of those citers
        touched = np.concatenate(
            [graph.references(int(i)) for i in current]
        ) if current.size else np.zeros(0, dtype=np.int64)
        if touched.size:
            dec = np.bincount(touched, minlength=graph.n_papers)
            citers_left -= dec
            candidates = np.unique(touched)
            current = candidates[(citers_left[candidates] == 0) & ~removed[candidates]]
        else:
            current = np.zeros(0, dtype=np.int64)
    result.residual = np.flatnonzero(~removed).astype(np.int64)
    return result


# ---------------------------------------------------------------------------
# binary cache
#
# Layout (all little-endian):
#   magic            8 bytes  b"CITEGRPH"
#   version          u32
#   header_len       u32      length of the JSON header that follows
#   header           JSON     {"n", "m", "fingerprint"}
#   paper_ids        n   * i64
#   year             n   * i64
#   declared         n   * i64
#   n_authors        n   * i64
#   published        n   * u8
#   fwd_indptr       n+1 * i64
#   fwd_indices      m   * i64
# The reverse adjacency is rebuilt on load.

class CacheMismatch(CitemetricsError):
    """The cache file does not match the requested dataset and filter."""


def graph_fingerprint(dataset: Dataset, efilter: EdgeFilter) -> str:
    ids = sorted(dataset.papers)
    probe = {
        "n_papers": len(dataset.papers),
        "n_refs": dataset.total_indexed_refs(),
        "first_id": ids[0] if ids else None,
        "last_id": ids[-1] if ids else None,
        "n_authors": len(dataset.authors),
        "filter": efilter.key(),
    }
    return hashlib.sha256(json.dumps(probe, sort_keys=True).encode()).hexdigest()


def save_graph_cache(graph: CitationGraph, path, fingerprint: str = "") -> None:
    header = json.dumps(
        {"n": graph.n_papers, "m": graph.n_edges, "fingerprint": fingerprint}
    ).encode()
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<II", CACHE_VERSION, len(header)))
        fh.write(header)
        for arr, dtype in (
            (graph.paper_ids, "<i8"),
            (graph.year, "<i8"),
            (graph.declared_ref_count, "<i8"),
            (graph.n_authors, "<i8"),
            (graph.published, "u1"),
            (graph.fwd_indptr, "<i8"),
            (graph.fwd_indices, "<i8"),
        ):
            fh.write(np.ascontiguousarray(arr, dtype=dtype).tobytes())


def load_graph_cache(path, expected_fingerprint: str | None = None) -> CitationGraph:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != CACHE_MAGIC:
            raise CacheMismatch("not a citation graph cache file")
        version, header_len = struct.unpack("<II", fh.read(8))
        if version != CACHE_VERSION:
            raise CacheMismatch(f"unsupported cache version {version}")
        header = json.loads(fh.read(header_len))
        if expected_fingerprint is not None and header.get("fingerprint") != expected_fingerprint:
            raise CacheMismatch("cache fingerprint mismatch; rebuild required")
        n, m = header["n"], header["m"]

        def read(count, dtype):
            raw = fh.read(count * np.dtype(dtype).itemsize)
            return np.frombuffer(raw, dtype=dtype).copy()

        paper_ids = read(n, "<i8")
        year = read(n, "<i8")
        declared = read(n, "<i8")
        n_authors = read(n, "<i8")
        published = read(n, "u1").astype(bool)
        fwd_indptr = read(n + 1, "<i8")
        fwd_indices = read(m, "<i8")
    return CitationGraph(paper_ids, year, declared, n_authors, published, fwd_indptr, fwd_indices)


def build_or_load(dataset: Dataset, efilter: EdgeFilter | None, cache_path) -> tuple[CitationGraph, FilterReport | None]:
    """Load the graph from cache when the fingerprint matches, else build and save."""
    efilter = efilter or EdgeFilter()
    fp = graph_fingerprint(dataset, efilter)
    if cache_path is not None:
        try:
            return load_graph_cache(cache_path, fp), None
        except (FileNotFoundError, CacheMismatch):
            pass
        except (ValueError, KeyError, struct.error):  # truncated or corrupt file
            pass
    graph, report = build_graph(dataset, efilter)
    if cache_path is not None:
        save_graph_cache(graph, cache_path, fp)
    return graph, report
