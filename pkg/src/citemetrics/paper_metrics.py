"""Per-paper indices: citation counts, individual citations, ranks.

The rank of a paper solves

    R_p = damping * sum_{p' -> p} R_{p'} / outdeg(p') + const

with one additive constant per paper. The constant is fixed to 1 before
normalization; afterwards the vector is rescaled so that the total rank
equals the total number of citations, which makes rank values directly
comparable with citation counts. Rank transitions are normalized with
the indexed reference count (the out-degree actually present in the
graph, so the transition weights of a citing paper sum to one), whereas
individual citations divide by the declared bibliography length.

Papers with no indexed references are dead ends: their rank mass is not
redistributed, and the final global rescale absorbs the loss.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .citegraph import CitationGraph, prune_leaves
from .errors import ConvergenceError, DataInconsistencyError

DEFAULT_DAMPING = 0.99
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 10_000


@dataclass
class MetricVector:
    """A named score per entity id.

    ``ids`` are sorted ascending and aligned with ``scores``; ``params``
    echoes whatever the producing computation wants to report (damping,
    iterations, residual, normalization constant, ...).
    """

    kind: str
    ids: np.ndarray
    scores: np.ndarray
    window: tuple | None = None
    params: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.ids.size)

    def get(self, entity_id, default: float = 0.0) -> float:
        i = int(np.searchsorted(self.ids, entity_id))
        if i < len(self) and self.ids[i] == entity_id:
            return float(self.scores[i])
        return default

    def __getitem__(self, entity_id) -> float:
        i = int(np.searchsorted(self.ids, entity_id))
        if i >= len(self) or self.ids[i] != entity_id:
            raise KeyError(entity_id)
        return float(self.scores[i])

    def to_dict(self) -> dict:
        return {k: float(v) for k, v in zip(self.ids.tolist(), self.scores)}

    def total(self) -> float:
        return float(self.scores.sum())

    def top(self, n: int | None = None):
        """(id, score) pairs sorted by score descending, ties by id ascending."""
        order = np.argsort(-self.scores, kind="stable")
        if n is not None:
            order = order[:n]
        return [(self.ids[i], float(self.scores[i])) for i in order]

    def lookup(self, entity_ids) -> np.ndarray:
        """Scores for an array of ids; missing entities score 0."""
        entity_ids = np.asarray(entity_ids)
        pos = np.searchsorted(self.ids, entity_ids)
        pos_clip = np.minimum(pos, max(len(self) - 1, 0))
        out = self.scores[pos_clip].copy() if len(self) else np.zeros(entity_ids.size)
        if len(self):
            out[self.ids[pos_clip] != entity_ids] = 0.0
        return out


def n_cit(graph: CitationGraph) -> MetricVector:
    """Plain citation counts: the in-degree of every paper."""
    return MetricVector("ncit", graph.paper_ids, graph.citation_count.astype(np.float64))


def _check_ref_counts(graph: CitationGraph, counts: np.ndarray, label: str) -> None:
    outdeg = graph.indexed_ref_count
    bad = np.flatnonzero((outdeg > 0) & (counts <= 0))
    if bad.size:
        pid = int(graph.paper_ids[bad[0]])
        raise DataInconsistencyError(
            f"paper {pid} has citations outgoing but {label} reference count "
            f"{int(counts[bad[0]])}"
        )


def _edge_weighted_insum(graph: CitationGraph, per_citer: np.ndarray) -> np.ndarray:
    """sum over citing papers p' of per_citer[p'], for every paper."""
    sources = graph.edge_sources()
    return np.bincount(
        graph.fwd_indices, weights=per_citer[sources], minlength=graph.n_papers
    )


def n_icit_papers(graph: CitationGraph, ref_weighting: str = "declared") -> MetricVector:
    """Individual citations: every citation weighted by 1/(refs of the citer).

    ``ref_weighting`` selects the reference count used in the weight:
    ``"declared"`` (the default, the printed bibliography length) or
    ``"indexed"`` (the in-graph out-degree, which ties the metric to the
    first rank generation).
    """
    if ref_weighting == "declared":
        counts = graph.declared_ref_count
    elif ref_weighting == "indexed":
        counts = graph.indexed_ref_count
    else:
        raise ValueError(f"unknown ref_weighting {ref_weighting!r}")
    _check_ref_counts(graph, counts, ref_weighting)
    inv = np.zeros(graph.n_papers)
    nz = counts > 0
    inv[nz] = 1.0 / counts[nz]
    scores = _edge_weighted_insum(graph, inv)
    return MetricVector("nicit", graph.paper_ids, scores, params={"ref_weighting": ref_weighting})


def paperrank(graph: CitationGraph, damping: float = DEFAULT_DAMPING,
              tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS) -> MetricVector:
    """Iterative rank over the citation graph.

    Jacobi-style full-vector updates ``r <- damping * M r + 1`` with a
    max-norm convergence test: stop once ``max|dr| <= tol * max|r|``.
    The result is rescaled so the total equals the total citation count
    (zero-citation graphs return the all-zero vector). Raises
    :class:`ConvergenceError` after ``max_iters`` sweeps.
    """
    if not 0.0 < damping < 1.0:
        raise ValueError(f"damping must be in (0, 1), got {damping}")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    n = graph.n_papers
    r_tot = float(graph.n_edges)
    params = {"damping": damping, "tol": tol, "r_tot": r_tot}
    if n == 0 or r_tot == 0.0:
        params["iterations"] = 0
        return MetricVector("paperrank", graph.paper_ids, np.zeros(n), params=params)

    m = graph.transition_matrix()
    r = np.ones(n)
    residual = np.inf
    for iteration in range(1, max_iters + 1):
        r_new = damping * m.dot(r)
        r_new += 1.0
        residual = float(np.max(np.abs(r_new - r)) / np.max(np.abs(r_new)))
        r = r_new
        if residual <= tol:
            params["iterations"] = iteration
            params["residual"] = residual
            r *= r_tot / r.sum()
            return MetricVector("paperrank", graph.paper_ids, r, params=params)
    raise ConvergenceError(
        f"rank iteration did not reach tol {tol:g} after {max_iters} sweeps "
        f"(residual {residual:.3e})",
        residual=residual,
        iterations=max_iters,
    )


@dataclass
class GenerationProfile:
    """Per-paper contribution of each citation generation.

    ``contributions[i, g]`` is the weighted number of length-``g``
    citation paths ending at paper ``i`` (generation 0 contributes 1 for
    every paper). The damped sum over generations reproduces the
    iterative rank.
    """

    paper_ids: np.ndarray
    contributions: np.ndarray  # shape (n_papers, g_max + 1)
    damping: float
    r_tot: float
    truncated: bool = False

    @property
    def g_max(self) -> int:
        return self.contributions.shape[1] - 1

    def profile(self, paper_id: int) -> np.ndarray:
        i = int(np.searchsorted(self.paper_ids, paper_id))
        if i >= self.paper_ids.size or self.paper_ids[i] != paper_id:
            raise KeyError(paper_id)
        return self.contributions[i]

    def combined(self) -> MetricVector:
        """Damped generation sum, normalized the same way as the iterative rank."""
        powers = self.damping ** np.arange(self.g_max + 1)
        raw = self.contributions @ powers
        total = raw.sum()
        scores = raw * (self.r_tot / total) if total > 0 and self.r_tot > 0 else np.zeros_like(raw)
        return MetricVector(
            "paperrank_expansion",
            self.paper_ids,
            scores,
            params={"damping": self.damping, "g_max": self.g_max, "r_tot": self.r_tot},
        )


def generation_expansion(graph: CitationGraph, damping: float, g_max: int) -> GenerationProfile:
    """Expand the rank as a damped sum over citation generations.

    Generation ``g+1`` is one sparse transpose-multiplication applied to
    generation ``g``. On a graph whose peeling leaves a residual set
    (same-year cycles) the series does not terminate and is truncated at
    ``g_max`` with a warning.
    """
    if g_max < 1:
        raise ValueError(f"g_max must be >= 1, got {g_max}")
    if not 0.0 < damping < 1.0:
        raise ValueError(f"damping must be in (0, 1), got {damping}")
    n = graph.n_papers
    contributions = np.zeros((n, g_max + 1))
    if n == 0:
        return GenerationProfile(graph.paper_ids, contributions, damping, 0.0)
    residual = prune_leaves(graph).residual
    truncated = residual.size > 0
    if truncated:
        warnings.warn(
            f"{residual.size} papers sit in same-year citation cycles; "
            f"generation series truncated at g_max={g_max}",
            RuntimeWarning,
            stacklevel=2,
        )
    m = graph.transition_matrix()
    gen = np.ones(n)
    contributions[:, 0] = gen
    for g in range(1, g_max + 1):
        gen = m.dot(gen)
        contributions[:, g] = gen
        if not truncated and not gen.any():
            break
    return GenerationProfile(graph.paper_ids, contributions, damping, float(graph.n_edges), truncated)


def authorrank_of_papers(dataset, graph: CitationGraph, author_rank: MetricVector) -> MetricVector:
    """Citations weighted by the rank of the citing authors.

    Each citing paper contributes the mean author rank over its full
    author list (unresolved names contribute zero) divided by its
    declared reference count. Citing papers with no resolved authors
    contribute nothing.
    """
    _check_ref_counts(graph, graph.declared_ref_count, "declared")
    n = graph.n_papers
    rank_sum = np.zeros(n)
    for i, pid in enumerate(graph.paper_ids):
        rec = dataset.papers[int(pid)]
        total = 0.0
        for link in rec.authors:
            if link.author_id is not None:
                total += author_rank.get(link.author_id, 0.0)
        rank_sum[i] = total
    per_citer = np.zeros(n)
    ok = (graph.n_authors > 0) & (graph.declared_ref_count > 0)
    per_citer[ok] = rank_sum[ok] / (graph.n_authors[ok] * graph.declared_ref_count[ok])
    scores = _edge_weighted_insum(graph, per_citer)
    return MetricVector("arp", graph.paper_ids, scores)


def ccoin_papers(graph: CitationGraph) -> MetricVector:
    """Net individual-citation balance of a paper: icit received minus one.

    One is the price of writing the paper, so the metric is negative for
    papers drawing a below-average number of individual citations and
    sums to zero over a dataset whose declared references are all
    internal.
    """
    icit = n_icit_papers(graph)
    return MetricVector("ccoin", graph.paper_ids, icit.scores - 1.0)
