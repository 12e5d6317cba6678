"""Per-author indices: counts, h-index, ranks, and the citation coin.

Every per-paper quantity is shared equally among the paper's authors
(division by the full author-slot count, so unresolved names dilute the
share without receiving one). The author-to-author flow matrix
generalizes this: a citation between papers spreads over all resolved
(citing author, cited author) pairs with weight
``1 / (n_aut(cited) * n_aut(citing) * declared_refs(citing))``.

The citation coin is the net flow through that matrix, received minus
given. Adding any constant to every edge of a directed author cycle
(including the diagonal, a self-citation) changes in-flow and out-flow
by the same amount, so the coin is immune to self-citations and to
citation cartels of any length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from .citegraph import CitationGraph
from .dataset import Dataset
from .errors import ConvergenceError
from .paper_metrics import MetricVector, n_icit_papers, ccoin_papers, _check_ref_counts

DEFAULT_AUTHOR_DAMPING = 0.9


class AuthorIndex:
    """Paper/author incidence aligned with a graph's node order.

    ``paper_author_indptr``/``paper_author_idx`` list the resolved author
    indices of every paper; the inverse arrays list each author's papers
    as node indices. Author indices point into ``author_ids`` (all
    authors known to the dataset, ascending).
    """

    def __init__(self, author_ids, paper_author_indptr, paper_author_idx, n_papers):
        self.author_ids = author_ids
        self.paper_author_indptr = paper_author_indptr
        self.paper_author_idx = paper_author_idx
        order = np.argsort(paper_author_idx, kind="stable")
        self.author_paper_idx = np.repeat(
            np.arange(n_papers, dtype=np.int64), np.diff(paper_author_indptr)
        )[order]
        self.author_paper_indptr = np.zeros(author_ids.size + 1, dtype=np.int64)
        np.cumsum(
            np.bincount(paper_author_idx, minlength=author_ids.size),
            out=self.author_paper_indptr[1:],
        )

    @property
    def n_authors(self) -> int:
        return int(self.author_ids.size)

    @property
    def resolved_per_paper(self) -> np.ndarray:
        return np.diff(self.paper_author_indptr)

    def authors_of(self, node: int) -> np.ndarray:
        return self.paper_author_idx[
            self.paper_author_indptr[node]:self.paper_author_indptr[node + 1]
        ]

    def papers_of(self, author_idx: int) -> np.ndarray:
        return self.author_paper_idx[
            self.author_paper_indptr[author_idx]:self.author_paper_indptr[author_idx + 1]
        ]

    def index_of(self, author_id: int) -> int:
        i = int(np.searchsorted(self.author_ids, author_id))
        if i >= self.n_authors or self.author_ids[i] != author_id:
            raise KeyError(f"author {author_id} not in dataset")
        return i

    @classmethod
    def build(cls, dataset: Dataset, graph: CitationGraph) -> "AuthorIndex":
        author_ids = np.fromiter(sorted(dataset.authors), dtype=np.int64, count=len(dataset.authors))
        flat: list[int] = []
        indptr = np.zeros(graph.n_papers + 1, dtype=np.int64)
        for i, pid in enumerate(graph.paper_ids):
            rec = dataset.papers[int(pid)]
            for link in rec.authors:
                if link.author_id is not None:
                    flat.append(link.author_id)
            indptr[i + 1] = len(flat)
        flat_ids = np.asarray(flat, dtype=np.int64)
        flat_idx = np.searchsorted(author_ids, flat_ids)
        return cls(author_ids, indptr, flat_idx, graph.n_papers)


@dataclass
class AuthorCounts:
    npap: MetricVector
    nipap: MetricVector
    ncit: MetricVector
    nicit: MetricVector
    papers_without_authors: int = 0


def author_counts(dataset: Dataset, graph: CitationGraph,
                  index: AuthorIndex | None = None) -> AuthorCounts:
    """Paper, citation, and individual counts summed over each author's papers."""
    index = index or AuthorIndex.build(dataset, graph)
    naut = graph.n_authors.astype(np.float64)
    ncit_p = graph.citation_count.astype(np.float64)
    nicit_p = n_icit_papers(graph).scores
    share = np.zeros(graph.n_papers)
    nz = naut > 0
    share[nz] = 1.0 / naut[nz]

    pairs_paper = np.repeat(np.arange(graph.n_papers, dtype=np.int64), index.resolved_per_paper)
    pairs_author = index.paper_author_idx
    n_a = index.n_authors

    def acc(weights_per_paper: np.ndarray) -> np.ndarray:
        return np.bincount(pairs_author, weights=weights_per_paper[pairs_paper], minlength=n_a)

    ones = np.ones(graph.n_papers)
    vectors = {
        "npap": acc(ones),
        "nipap": acc(share),
        "ncit": acc(ncit_p),
        "nicit": acc(nicit_p * share),
    }
    without = int(np.count_nonzero(index.resolved_per_paper == 0))
    return AuthorCounts(
        npap=MetricVector("npap", index.author_ids, vectors["npap"]),
        nipap=MetricVector("nipap", index.author_ids, vectors["nipap"]),
        ncit=MetricVector("ncit_author", index.author_ids, vectors["ncit"]),
        nicit=MetricVector("nicit_author", index.author_ids, vectors["nicit"]),
        papers_without_authors=without,
    )


def h_index(dataset: Dataset, graph: CitationGraph,
            index: AuthorIndex | None = None) -> MetricVector:
    """Largest h such that h of the author's papers have at least h citations."""
    index = index or AuthorIndex.build(dataset, graph)
    ncit_p = graph.citation_count
    scores = np.zeros(index.n_authors)
    for a in range(index.n_authors):
        cits = ncit_p[index.papers_of(a)]
        if cits.size == 0:
            continue
        cits = np.sort(cits)[::-1]
        ranks = np.arange(1, cits.size + 1)
        ok = cits >= ranks
        scores[a] = float(ranks[ok][-1]) if ok.any() else 0.0
    return MetricVector("h", index.author_ids, scores)


def paperrank_of_authors(dataset: Dataset, graph: CitationGraph, paper_rank: MetricVector,
                         index: AuthorIndex | None = None) -> MetricVector:
    """Author visibility: the rank of each paper shared among its authors."""
    index = index or AuthorIndex.build(dataset, graph)
    naut = graph.n_authors.astype(np.float64)
    share = np.zeros(graph.n_papers)
    nz = naut > 0
    share[nz] = paper_rank.lookup(graph.paper_ids)[nz] / naut[nz]
    pairs_paper = np.repeat(np.arange(graph.n_papers, dtype=np.int64), index.resolved_per_paper)
    scores = np.bincount(index.paper_author_idx, weights=share[pairs_paper], minlength=index.n_authors)
    return MetricVector("prank", index.author_ids, scores, params=dict(paper_rank.params))


@dataclass
class AuthorFlowMatrix:
    """Sparse author-to-author individual-citation weights."""

    author_ids: np.ndarray
    matrix: csr_matrix
    self_citations_removed: bool = False
    antisymmetrized: bool = False

    @property
    def n_authors(self) -> int:
        return int(self.author_ids.size)


def build_flow_matrix(dataset: Dataset | None, graph: CitationGraph, *,
                      remove_self: bool = False, antisymmetrize: bool = False,
                      index: AuthorIndex | None = None,
                      pair_chunk: int = 4_000_000) -> AuthorFlowMatrix:
    """Accumulate the author citation matrix over all citation edges.

    Work proceeds in edge chunks bounded by the number of expanded
    (citing author, cited author) pairs, so memory stays proportional to
    ``pair_chunk``. Chunk boundaries depend only on the input, keeping
    the accumulation deterministic.
    """
    if index is None:
        if dataset is None:
            raise ValueError("either a dataset or a prebuilt AuthorIndex is required")
        index = AuthorIndex.build(dataset, graph)
    _check_ref_counts(graph, graph.declared_ref_count, "declared")
    n_a = index.n_authors
    src = graph.edge_sources()
    dst = graph.fwd_indices
    cnt = index.resolved_per_paper
    naut = graph.n_authors.astype(np.float64)
    declared = graph.declared_ref_count.astype(np.float64)

    pair_cnt = cnt[src] * cnt[dst]
    live = pair_cnt > 0
    src, dst, pair_cnt = src[live], dst[live], pair_cnt[live]
    weight_edge = 1.0 / (naut[dst] * naut[src] * declared[src])

    matrix = csr_matrix((n_a, n_a))
    start = 0
    cum = np.cumsum(pair_cnt)
    while start < src.size:
        base = int(cum[start - 1]) if start else 0
        stop = int(np.searchsorted(cum, base + pair_chunk, side="right"))
        stop = min(max(stop, start + 1), src.size)
        s, d, m = src[start:stop], dst[start:stop], pair_cnt[start:stop]
        w = weight_edge[start:stop]
        total = int(m.sum())
        eid = np.repeat(np.arange(s.size, dtype=np.int64), m)
        offsets = np.cumsum(m) - m
        pos = np.arange(total, dtype=np.int64) - offsets[eid]
        kb = cnt[d][eid]
        rows = index.paper_author_idx[index.paper_author_indptr[s[eid]] + pos // kb]
        cols = index.paper_author_idx[index.paper_author_indptr[d[eid]] + pos % kb]
        chunk = coo_matrix((w[eid], (rows, cols)), shape=(n_a, n_a)).tocsr()
        matrix = matrix + chunk
        start = stop

    if remove_self and matrix.nnz:
        matrix.setdiag(0.0)
        matrix.eliminate_zeros()
    if antisymmetrize and matrix.nnz:
        diff = (matrix - matrix.T).tocsr()
        diff.data = np.maximum(diff.data, 0.0)
        diff.eliminate_zeros()
        matrix = diff
    matrix.sort_indices()
    return AuthorFlowMatrix(index.author_ids, matrix, remove_self, antisymmetrize)


@dataclass
class StochasticAuthorMatrix:
    """Row-normalized flow matrix plus the set of dangling rows."""

    author_ids: np.ndarray
    matrix: csr_matrix
    dangling: np.ndarray  # boolean mask of rows with zero out-weight

    @property
    def n_authors(self) -> int:
        return int(self.author_ids.size)


def row_normalize(flow: AuthorFlowMatrix) -> StochasticAuthorMatrix:
    from scipy.sparse import diags

    out = np.asarray(flow.matrix.sum(axis=1)).ravel()
    dangling = out <= 0.0
    inv = np.zeros_like(out)
    inv[~dangling] = 1.0 / out[~dangling]
    matrix = (diags(inv) @ flow.matrix).tocsr()
    return StochasticAuthorMatrix(flow.author_ids, matrix, dangling)


def authorrank(flow: AuthorFlowMatrix | StochasticAuthorMatrix,
               damping: float = DEFAULT_AUTHOR_DAMPING,
               tol: float = 1e-10, max_iters: int = 10_000) -> MetricVector:
    """Principal-eigenvector rank of the row-stochastic author matrix.

    Dangling rows (authors citing nobody in-dataset) are completed with
    the uniform distribution before iterating. The additive constant is
    the same for every author, and the converged vector is normalized so
    its total equals the number of authors: rank 1 is an average author.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError(f"damping must be in (0, 1), got {damping}")
    stochastic = flow if isinstance(flow, StochasticAuthorMatrix) else row_normalize(flow)
    n = stochastic.n_authors
    params = {"damping": damping, "tol": tol, "dangling": int(stochastic.dangling.sum())}
    if n == 0:
        params["iterations"] = 0
        return MetricVector("arank", stochastic.author_ids, np.zeros(0), params=params)
    transition = stochastic.matrix.T.tocsr()
    dangling = stochastic.dangling
    r = np.ones(n)
    residual = np.inf
    for iteration in range(1, max_iters + 1):
        dangling_mass = float(r[dangling].sum()) / n
        r_new = damping * (transition.dot(r) + dangling_mass)
        r_new += 1.0
        residual = float(np.max(np.abs(r_new - r)) / np.max(np.abs(r_new)))
        r = r_new
        if residual <= tol:
            params["iterations"] = iteration
            params["residual"] = residual
            r *= n / r.sum()
            return MetricVector("arank", stochastic.author_ids, r, params=params)
    raise ConvergenceError(
        f"author rank did not reach tol {tol:g} after {max_iters} sweeps "
        f"(residual {residual:.3e})",
        residual=residual,
        iterations=max_iters,
    )


def coin_from_flow(matrix: csr_matrix) -> np.ndarray:
    """Net flow per author: column sum (received) minus row sum (given)."""
    received = np.asarray(matrix.sum(axis=0)).ravel()
    given = np.asarray(matrix.sum(axis=1)).ravel()
    return received - given


def citation_coin(dataset: Dataset, graph: CitationGraph, *,
                  index: AuthorIndex | None = None,
                  flow: AuthorFlowMatrix | None = None) -> MetricVector:
    """Individual citations received minus individual citations given.

    Computed from the untruncated flow matrix, so the totals sum to zero
    exactly. ``params["closed_form_max_gap"]`` reports how far the
    received-minus-individual-papers shortcut (exact only on a fully
    internal dataset) drifts from the net-flow value.
    """
    index = index or AuthorIndex.build(dataset, graph)
    if flow is None:
        flow = build_flow_matrix(dataset, graph, index=index)
    scores = coin_from_flow(flow.matrix)
    counts = author_counts(dataset, graph, index=index)
    closed = counts.nicit.scores - counts.nipap.scores
    gap = float(np.max(np.abs(scores - closed))) if scores.size else 0.0
    return MetricVector("ccoin_author", index.author_ids, scores,
                        params={"closed_form_max_gap": gap})


def citation_coin_plus(dataset: Dataset, graph: CitationGraph,
                       index: AuthorIndex | None = None) -> MetricVector:
    """Sum of the positive per-paper coins only, shared among co-authors.

    Discarding below-average papers stops the metric from penalising
    recent work; only papers with a positive balance contribute.
    """
    index = index or AuthorIndex.build(dataset, graph)
    coin_p = ccoin_papers(graph).scores
    naut = graph.n_authors.astype(np.float64)
    share = np.zeros(graph.n_papers)
    pos = (coin_p > 0) & (naut > 0)
    share[pos] = coin_p[pos] / naut[pos]
    pairs_paper = np.repeat(np.arange(graph.n_papers, dtype=np.int64), index.resolved_per_paper)
    scores = np.bincount(index.paper_author_idx, weights=share[pairs_paper], minlength=index.n_authors)
    return MetricVector("ccoin_plus", index.author_ids, scores)
