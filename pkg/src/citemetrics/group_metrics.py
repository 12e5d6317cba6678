"""Aggregation of paper and author metrics to groups.

Groups are institutions, towns (institutions within 30 km of each other,
transitively), countries, continents, journals, and gender tags. Every
grouping assigns each paper weighted shares that sum to one over the
groups the paper resolves to, so group totals of any metric preserve the
metric's total over the covered papers. Shares are renormalized whenever
data are partial (an author without affiliations, an untagged author).

Also here: yearly trend statistics, per-group time series as world
percentages, Gini coefficients, and metric correlation matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .citegraph import CitationGraph
from .dataset import Dataset
from .paper_metrics import MetricVector, n_icit_papers

EARTH_RADIUS_KM = 6371.0088
DEFAULT_TOWN_RADIUS_KM = 30.0
UNPUBLISHED_BUCKET = "(unpublished)"


@dataclass
class GroupingScheme:
    """Weighted paper-to-group shares in coordinate form.

    ``group_keys`` fixes the group order; ``entry_paper_ids``,
    ``entry_group_idx`` and ``entry_weights`` are parallel arrays, one
    element per (paper, group) share. ``n_uncovered`` counts papers that
    resolved to no group at all.
    """

    kind: str
    group_keys: list
    entry_paper_ids: np.ndarray
    entry_group_idx: np.ndarray
    entry_weights: np.ndarray
    n_uncovered: int = 0

    @property
    def n_groups(self) -> int:
        return len(self.group_keys)

    def shares_of(self, paper_id: int) -> dict:
        mask = self.entry_paper_ids == paper_id
        return {
            self.group_keys[g]: float(w)
            for g, w in zip(self.entry_group_idx[mask], self.entry_weights[mask])
        }

    def share_sums(self) -> tuple[np.ndarray, np.ndarray]:
        """(paper_ids, total share per paper) over covered papers."""
        ids, inverse = np.unique(self.entry_paper_ids, return_inverse=True)
        sums = np.bincount(inverse, weights=self.entry_weights, minlength=ids.size)
        return ids, sums


def _scheme_from_lists(kind: str, paper_ids: list, keys_per_entry: list,
                       weights: list, n_uncovered: int) -> GroupingScheme:
    group_keys = sorted(set(keys_per_entry))
    key_pos = {k: i for i, k in enumerate(group_keys)}
    return GroupingScheme(
        kind=kind,
        group_keys=group_keys,
        entry_paper_ids=np.asarray(paper_ids, dtype=np.int64),
        entry_group_idx=np.asarray([key_pos[k] for k in keys_per_entry], dtype=np.int64),
        entry_weights=np.asarray(weights, dtype=np.float64),
        n_uncovered=n_uncovered,
    )


def institution_shares(dataset: Dataset) -> GroupingScheme:
    """Split each paper over institutions: 1/n_authors per author, then
    1/n_affiliations per affiliation, renormalized to sum 1 when some
    authors carry no affiliation. Papers with no affiliations anywhere
    are left uncovered and counted."""
    paper_ids: list[int] = []
    keys: list[int] = []
    weights: list[float] = []
    uncovered = 0
    for pid in sorted(dataset.papers):
        rec = dataset.papers[pid]
        naut = rec.n_authors
        if naut == 0:
            uncovered += 1
            continue
        acc: dict[int, float] = {}
        for link in rec.authors:
            naff = len(link.affiliation_ids)
            if naff == 0:
                continue
            w = 1.0 / (naut * naff)
            for iid in link.affiliation_ids:
                acc[iid] = acc.get(iid, 0.0) + w
        total = sum(acc.values())
        if total <= 0.0:
            uncovered += 1
            continue
        for iid in sorted(acc):
            paper_ids.append(pid)
            keys.append(iid)
            weights.append(acc[iid] / total)
    return _scheme_from_lists("institution", paper_ids, keys, weights, uncovered)


def regroup(scheme: GroupingScheme, mapping: dict, kind: str,
            renormalize: bool = True) -> GroupingScheme:
    """Coarsen a scheme by mapping group keys onto new ones.

    Keys missing from ``mapping`` (or mapped to None) drop out; when
    ``renormalize`` the surviving shares of each paper are rescaled to
    sum 1 again. Papers losing every group become uncovered.
    """
    new_keys_per_entry = []
    keep = np.zeros(scheme.entry_paper_ids.size, dtype=bool)
    for i, g in enumerate(scheme.entry_group_idx):
        new = mapping.get(scheme.group_keys[g])
        if new is not None:
            keep[i] = True
            new_keys_per_entry.append(new)
    pids = scheme.entry_paper_ids[keep]
    weights = scheme.entry_weights[keep]
    group_keys = sorted(set(new_keys_per_entry))
    key_pos = {k: i for i, k in enumerate(group_keys)}
    gidx = np.asarray([key_pos[k] for k in new_keys_per_entry], dtype=np.int64)

    # merge duplicate (paper, group) entries
    if pids.size:
        combo = pids * max(len(group_keys), 1) + gidx
        uniq, inverse = np.unique(combo, return_inverse=True)
        merged_w = np.bincount(inverse, weights=weights, minlength=uniq.size)
        merged_p = uniq // max(len(group_keys), 1)
        merged_g = uniq % max(len(group_keys), 1)
    else:
        merged_w = weights
        merged_p = pids
        merged_g = gidx

    if renormalize and merged_p.size:
        ids, inverse = np.unique(merged_p, return_inverse=True)
        sums = np.bincount(inverse, weights=merged_w, minlength=ids.size)
        merged_w = merged_w / sums[inverse]

    covered_before = np.unique(scheme.entry_paper_ids).size
    covered_after = np.unique(merged_p).size
    uncovered = scheme.n_uncovered + (covered_before - covered_after)
    return GroupingScheme(kind, group_keys, merged_p, merged_g, merged_w, uncovered)


def country_scheme(dataset: Dataset, base: GroupingScheme | None = None) -> GroupingScheme:
    base = base or institution_shares(dataset)
    mapping = {iid: inst.country_code for iid, inst in dataset.institutions.items()}
    return regroup(base, mapping, "country")


def continent_scheme(dataset: Dataset, base: GroupingScheme | None = None) -> GroupingScheme:
    base = base or institution_shares(dataset)
    mapping = {iid: inst.continent for iid, inst in dataset.institutions.items()}
    return regroup(base, mapping, "continent")


def journal_scheme(dataset: Dataset) -> GroupingScheme:
    """Whole-paper shares by journal name; papers without one fall into
    the unpublished bucket."""
    paper_ids, keys, weights = [], [], []
    for pid in sorted(dataset.papers):
        rec = dataset.papers[pid]
        name = dataset.journals.get(rec.journal_id, UNPUBLISHED_BUCKET) \
            if rec.journal_id is not None else UNPUBLISHED_BUCKET
        paper_ids.append(pid)
        keys.append(name)
        weights.append(1.0)
    return _scheme_from_lists("journal", paper_ids, keys, weights, 0)


def gender_scheme(dataset: Dataset) -> GroupingScheme:
    """Shares by author gender tag, renormalized among tagged authors."""
    paper_ids, keys, weights = [], [], []
    uncovered = 0
    for pid in sorted(dataset.papers):
        rec = dataset.papers[pid]
        naut = rec.n_authors
        acc = {"female": 0.0, "male": 0.0}
        for link in rec.authors:
            if link.author_id is None:
                continue
            tag = dataset.authors[link.author_id].gender_tag
            if tag in acc:
                acc[tag] += 1.0 / naut
        total = sum(acc.values())
        if total <= 0.0:
            uncovered += 1
            continue
        for tag in ("female", "male"):
            if acc[tag] > 0:
                paper_ids.append(pid)
                keys.append(tag)
                weights.append(acc[tag] / total)
    return _scheme_from_lists("gender", paper_ids, keys, weights, uncovered)


def group_metric(scheme: GroupingScheme, paper_metric: MetricVector) -> MetricVector:
    """Aggregate a per-paper metric to groups: value[G] = sum shares * metric."""
    values = paper_metric.lookup(scheme.entry_paper_ids) if scheme.entry_paper_ids.size \
        else np.zeros(0)
    totals = np.bincount(scheme.entry_group_idx, weights=scheme.entry_weights * values,
                         minlength=scheme.n_groups) if scheme.entry_paper_ids.size \
        else np.zeros(scheme.n_groups)
    ids = np.asarray(scheme.group_keys, dtype=object)
    return MetricVector(f"{paper_metric.kind}_by_{scheme.kind}", ids, totals,
                        params={"n_uncovered": scheme.n_uncovered})


# ---------------------------------------------------------------------------
# town clustering

def haversine_km(lat1, lon1, lat2, lon2) -> np.ndarray:
    """Great-circle distance on a spherical Earth, in kilometres."""
    lat1, lon1, lat2, lon2 = (np.radians(np.asarray(x, dtype=np.float64))
                              for x in (lat1, lon1, lat2, lon2))
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    a = np.sin(dlat / 2.0) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


@dataclass
class TownClusters:
    """Partition of institutions into towns (single-linkage clusters).

    ``cluster_of`` maps every institution id to its cluster key (the
    smallest institution id in the cluster); ``labels`` gives a display
    name per cluster; ``no_coordinates`` lists institutions that formed
    singleton clusters because they carry no usable coordinates.
    """

    radius_km: float
    cluster_of: dict[int, int] = field(default_factory=dict)
    members: dict[int, list[int]] = field(default_factory=dict)
    labels: dict[int, str] = field(default_factory=dict)
    no_coordinates: list[int] = field(default_factory=list)


def cluster_towns(institutions, radius_km: float = DEFAULT_TOWN_RADIUS_KM) -> TownClusters:
    """Single-linkage clustering: two institutions share a town iff they
    are connected by a chain of pairwise distances within the radius."""
    if isinstance(institutions, Dataset):
        records = [institutions.institutions[i] for i in sorted(institutions.institutions)]
    else:
        records = sorted(institutions, key=lambda r: r.institution_id)
    located = [r for r in records if r.has_coordinates]
    missing = [r for r in records if not r.has_coordinates]

    ids = np.asarray([r.institution_id for r in located], dtype=np.int64)
    lat = np.asarray([r.latitude for r in located])
    lon = np.asarray([r.longitude for r in located])
    n = ids.size

    parent = np.arange(n)

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    chunk = 512
    for i0 in range(0, n, chunk):
        i1 = min(i0 + chunk, n)
        block = haversine_km(lat[i0:i1, None], lon[i0:i1, None], lat[None, :], lon[None, :])
        close_i, close_j = np.nonzero(block <= radius_km)
        for bi, j in zip(close_i, close_j):
            i = i0 + int(bi)
            if i < j:
                union(i, int(j))

    result = TownClusters(radius_km=radius_km)
    roots = np.asarray([find(i) for i in range(n)])
    by_name = {r.institution_id: r.name for r in records}
    for i in range(n):
        key = int(ids[roots[i]])
        result.cluster_of[int(ids[i])] = key
        result.members.setdefault(key, []).append(int(ids[i]))
    for rec in missing:
        result.no_coordinates.append(rec.institution_id)
        result.cluster_of[rec.institution_id] = rec.institution_id
        result.members.setdefault(rec.institution_id, []).append(rec.institution_id)
    for key in result.members:
        result.labels[key] = by_name.get(key, str(key))
    return result


def town_scheme(dataset: Dataset, radius_km: float = DEFAULT_TOWN_RADIUS_KM,
                base: GroupingScheme | None = None) -> GroupingScheme:
    base = base or institution_shares(dataset)
    clusters = cluster_towns(dataset, radius_km)
    return regroup(base, dict(clusters.cluster_of), "town")


# ---------------------------------------------------------------------------
# tables

def affiliate_rank_table(dataset: Dataset, author_metrics: dict[str, MetricVector],
                         active_window: tuple[int, int]) -> list[dict]:
    """Rank institutions by the all-time metrics of their active affiliates.

    An author is active when they wrote at least one paper inside the
    window. Affiliation fractions (1/n_affiliations per paper) are
    averaged over the author's in-window papers that carry any
    affiliation, so each author's fractions sum to one. Metric columns
    are percentages of the metric's total over all authors.
    """
    lo, hi = active_window
    fractions: dict[int, dict[int, float]] = {}
    for rec in dataset.papers.values():
        if not lo <= rec.date.year <= hi:
            continue
        for link in rec.authors:
            if link.author_id is None or not link.affiliation_ids:
                continue
            per_paper = {iid: 1.0 / len(link.affiliation_ids) for iid in link.affiliation_ids}
            bucket = fractions.setdefault(link.author_id, {"__papers__": 0.0})
            bucket["__papers__"] += 1.0
            for iid, w in per_paper.items():
                bucket[iid] = bucket.get(iid, 0.0) + w

    inst_rows: dict[int, dict] = {}
    totals = {name: vec.scores.sum() for name, vec in author_metrics.items()}
    for author_id, bucket in fractions.items():
        n_papers = bucket.pop("__papers__")
        for iid, w in bucket.items():
            share = w / n_papers
            row = inst_rows.setdefault(
                iid, {"institution_id": iid,
                      "name": dataset.institutions[iid].name if iid in dataset.institutions else "",
                      "n_iaut": 0.0,
                      **{f"pct_{m}": 0.0 for m in author_metrics}}
            )
            row["n_iaut"] += share
            for name, vec in author_metrics.items():
                total = totals[name]
                if total:
                    row[f"pct_{name}"] += 100.0 * share * vec.get(author_id, 0.0) / total
    rows = sorted(inst_rows.values(),
                  key=lambda r: (-r[f"pct_{next(iter(author_metrics))}"] if author_metrics
                                 else -r["n_iaut"], r["institution_id"]))
    return rows


def journal_table(dataset: Dataset, graph: CitationGraph,
                  window: tuple[int, int] | None = None) -> list[dict]:
    """Per journal: papers, individual citations, their ratio, and the
    coin (icit minus papers). Papers without a journal share one
    unpublished bucket."""
    icit = n_icit_papers(graph)
    buckets: dict[str, dict] = {}
    for i, pid in enumerate(graph.paper_ids):
        rec = dataset.papers[int(pid)]
        if window is not None and not window[0] <= rec.date.year <= window[1]:
            continue
        name = dataset.journals.get(rec.journal_id, UNPUBLISHED_BUCKET) \
            if rec.journal_id is not None else UNPUBLISHED_BUCKET
        row = buckets.setdefault(name, {"journal": name, "n_pap": 0, "n_icit": 0.0})
        row["n_pap"] += 1
        row["n_icit"] += float(icit.scores[i])
    rows = []
    for name in sorted(buckets):
        row = buckets[name]
        row["icit_per_pap"] = row["n_icit"] / row["n_pap"] if row["n_pap"] else 0.0
        row["ccoin"] = row["n_icit"] - row["n_pap"]
        rows.append(row)
    rows.sort(key=lambda r: (-r["n_icit"], r["journal"]))
    return rows


# ---------------------------------------------------------------------------
# inequality and correlations

def gini(values) -> float:
    """Mean-absolute-difference Gini coefficient, no small-sample correction.

    G = sum_ij |x_i - x_j| / (2 n sum x) for nonnegative inputs with a
    positive total. Ranges from 0 (perfect equality) to 1 - 1/n.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        raise ValueError("gini of an empty sequence is undefined")
    if np.any(x < 0):
        raise ValueError("gini requires nonnegative values")
    total = x.sum()
    if total <= 0.0:
        raise ValueError("gini requires at least one positive value")
    n = x.size
    xs = np.sort(x)
    ranks = np.arange(1, n + 1, dtype=np.float64)
    return float((2.0 * (ranks * xs).sum() - (n + 1) * total) / (n * total))


@dataclass
class CorrelationResult:
    kinds: list[str]
    pearson: np.ndarray
    spearman: np.ndarray
    undefined: list[str] = field(default_factory=list)
    n_entities: int = 0


def metric_correlations(vectors) -> CorrelationResult:
    """Pairwise Pearson and Spearman correlations on the common support.

    Zero-variance vectors get NaN rows and columns (diagonal stays 1)
    and are listed in ``undefined``.
    """
    from scipy.stats import rankdata

    vectors = list(vectors)
    if len(vectors) < 2:
        raise ValueError("at least two metric vectors are required")
    common = vectors[0].ids
    for vec in vectors[1:]:
        common = np.intersect1d(common, vec.ids)
    data = np.vstack([vec.lookup(common) for vec in vectors])
    kinds = [vec.kind for vec in vectors]
    k = len(vectors)
    variances = data.var(axis=1)
    flat = variances <= 0.0

    def corr(matrix_rows: np.ndarray) -> np.ndarray:
        out = np.full((k, k), np.nan)
        np.fill_diagonal(out, 1.0)
        good = np.flatnonzero(~flat)
        if good.size >= 2:
            sub = np.corrcoef(matrix_rows[good])
            for a, ia in enumerate(good):
                for b, ib in enumerate(good):
                    out[ia, ib] = sub[a, b]
        return out

    pearson = corr(data)
    ranked = np.vstack([rankdata(row) for row in data])
    spearman = corr(ranked)
    return CorrelationResult(
        kinds=kinds,
        pearson=pearson,
        spearman=spearman,
        undefined=[kinds[i] for i in np.flatnonzero(flat)],
        n_entities=int(common.size),
    )


# ---------------------------------------------------------------------------
# time series and trends

def _category_mask(dataset: Dataset, graph: CitationGraph, category: str | None) -> np.ndarray:
    if category is None:
        return np.ones(graph.n_papers, dtype=bool)
    mask = np.zeros(graph.n_papers, dtype=bool)
    for i, pid in enumerate(graph.paper_ids):
        mask[i] = category in dataset.papers[int(pid)].categories
    return mask


def trend_series(dataset: Dataset, graph: CitationGraph,
                 category: str | None = None) -> list[dict]:
    """Yearly snapshot rows: paper volume, mean declared references, mean
    authors, mean citations received (all and from published citers),
    and author birth/death statistics.

    An author is born in year y when they published in y but not in
    y - 1, and dead in y when they published in y - 1 but not in y;
    percentages are relative to the authors active in y (births) and in
    y - 1 (deaths). A final row beyond the last active year carries the
    trailing deaths.
    """
    mask = _category_mask(dataset, graph, category)
    if not mask.any():
        return []
    years = graph.year
    sources = graph.edge_sources()
    published_citers = np.bincount(
        graph.fwd_indices, weights=graph.published[sources].astype(np.float64),
        minlength=graph.n_papers,
    )
    ncit = graph.citation_count

    active: dict[int, set[int]] = {}
    for i, pid in enumerate(graph.paper_ids):
        if not mask[i]:
            continue
        rec = dataset.papers[int(pid)]
        bucket = active.setdefault(int(years[i]), set())
        for link in rec.authors:
            if link.author_id is not None:
                bucket.add(link.author_id)

    y_lo = int(years[mask].min())
    y_hi = int(years[mask].max())
    rows = []
    for y in range(y_lo, y_hi + 2):
        sel = mask & (years == y)
        count = int(sel.sum())
        now = active.get(y, set())
        before = active.get(y - 1, set())
        births = len(now - before)
        deaths = len(before - now)
        row = {
            "year": y,
            "n_papers": count,
            "mean_refs_declared": float(graph.declared_ref_count[sel].mean()) if count else 0.0,
            "mean_authors": float(graph.n_authors[sel].mean()) if count else 0.0,
            "mean_citations": float(ncit[sel].mean()) if count else 0.0,
            "mean_citations_published": float(published_citers[sel].mean()) if count else 0.0,
            "authors_active": len(now),
            "authors_born": births,
            "authors_died": deaths,
            "birth_pct": 100.0 * births / len(now) if now else 0.0,
            "death_pct": 100.0 * deaths / len(before) if before else 0.0,
        }
        if y == y_hi + 1 and count == 0 and deaths == 0:
            continue
        rows.append(row)
    return rows


def timeseries_table(dataset: Dataset, graph: CitationGraph, scheme: GroupingScheme,
                     paper_metric: MetricVector, category: str | None = None) -> list[dict]:
    """Per (group, year): percentage of the world total of the metric
    among papers written that year. With a category, both the numerator
    and the world denominator are restricted to that category."""
    mask = _category_mask(dataset, graph, category)
    years = graph.year
    metric_on_nodes = paper_metric.lookup(graph.paper_ids)
    metric_on_nodes = np.where(mask, metric_on_nodes, 0.0)

    y_lo, y_hi = (int(years.min()), int(years.max())) if years.size else (0, -1)
    n_years = max(y_hi - y_lo + 1, 0)
    world = np.bincount(years - y_lo, weights=metric_on_nodes, minlength=n_years) \
        if years.size else np.zeros(n_years)

    node_of = {int(pid): i for i, pid in enumerate(graph.paper_ids)}
    cell: dict[tuple[int, int], float] = {}
    for pid, g, w in zip(scheme.entry_paper_ids, scheme.entry_group_idx, scheme.entry_weights):
        node = node_of.get(int(pid))
        if node is None:
            continue
        value = w * metric_on_nodes[node]
        if value:
            key = (int(g), int(years[node]))
            cell[key] = cell.get(key, 0.0) + value

    rows = []
    for (g, y) in sorted(cell):
        denom = world[y - y_lo]
        rows.append({
            "group": scheme.group_keys[g],
            "year": y,
            "value": cell[(g, y)],
            "pct_of_world": 100.0 * cell[(g, y)] / denom if denom else 0.0,
        })
    return rows


def gender_stats(dataset: Dataset, graph: CitationGraph,
                 author_metrics: dict[str, MetricVector],
                 category: str | None = None) -> dict:
    """Shares of authors and of each metric by gender tag, plus the
    yearly female share of individual citations among tagged authors."""
    tags = {aid: rec.gender_tag for aid, rec in dataset.authors.items()
            if rec.gender_tag in ("female", "male")}
    summary: dict = {"n_tagged": len(tags), "genders": {}, "metric_shares": {}, "yearly": []}
    if not tags:
        return summary
    n_female = sum(1 for t in tags.values() if t == "female")
    summary["genders"] = {"female": n_female, "male": len(tags) - n_female}
    summary["author_share_pct"] = {
        "female": 100.0 * n_female / len(tags),
        "male": 100.0 * (len(tags) - n_female) / len(tags),
    }
    for name, vec in author_metrics.items():
        per_gender = {"female": 0.0, "male": 0.0}
        for aid, tag in tags.items():
            per_gender[tag] += vec.get(aid, 0.0)
        total = per_gender["female"] + per_gender["male"]
        summary["metric_shares"][name] = {
            g: (100.0 * v / total if total else 0.0) for g, v in per_gender.items()
        }

    mask = _category_mask(dataset, graph, category)
    icit = n_icit_papers(graph).scores
    per_year: dict[int, dict[str, float]] = {}
    for i, pid in enumerate(graph.paper_ids):
        if not mask[i] or icit[i] == 0.0:
            continue
        rec = dataset.papers[int(pid)]
        naut = rec.n_authors
        if naut == 0:
            continue
        bucket = per_year.setdefault(int(graph.year[i]), {"female": 0.0, "male": 0.0})
        for link in rec.authors:
            tag = tags.get(link.author_id)
            if tag is not None:
                bucket[tag] += icit[i] / naut
    for y in sorted(per_year):
        f, m = per_year[y]["female"], per_year[y]["male"]
        total = f + m
        summary["yearly"].append({
            "year": y,
            "female_icit_pct": 100.0 * f / total if total else 0.0,
            "tagged_icit": total,
        })
    return summary


def geo_normalized(table_rows: list[dict], denominators: dict[str, dict[str, float]],
                   value_key: str = "score") -> list[dict]:
    """Append per-population and per-GDP columns to a country table."""
    out = []
    for row in table_rows:
        row = dict(row)
        denom = denominators.get(str(row.get("group")))
        if denom:
            pop = denom.get("population") or math.nan
            gdp = denom.get("gdp_usd") or math.nan
            row["per_million_pop"] = row[value_key] / (pop / 1e6) if pop and pop > 0 else math.nan
            row["per_billion_gdp"] = row[value_key] / (gdp / 1e9) if gdp and gdp > 0 else math.nan
        out.append(row)
    return out
