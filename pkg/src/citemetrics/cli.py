"""Command-line frontend: ingest, rank, aggregate, report.

Outputs are deterministic: the same configuration on the same input
produces byte-identical files. CSV is the primary format (JSONL
optional); every command emits a machine-readable run summary on stderr
or to ``--summary PATH``. Figures are opt-in via ``--figure PATH`` and
never replace the delimited output.

Exit codes: 0 success, 1 runtime failure (bad data, non-convergence),
2 invalid configuration; configuration problems are reported all at
once. ``CITEMETRICS_LOG`` sets the log level.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import dataclass, field

import click
import numpy as np

from . import author_metrics as am
from . import citegraph as cg
from . import group_metrics as gm
from . import paper_metrics as pm
from .dataset import Dataset, IngestOptions, export_canonical, ingest
from .errors import CitemetricsError
from .synthgen import FixtureParams, write_fixture

log = logging.getLogger("citemetrics")

PAPER_METRICS = ("ncit", "nicit", "paperrank", "arp", "ccoin")
AUTHOR_METRICS = ("npap", "ncit", "h", "nipap", "nicit", "prank", "arank", "ccoin", "ccoin-plus")
GROUP_KINDS = ("institution", "town", "country", "continent", "journal", "gender")


def _setup_logging() -> None:
    level = os.environ.get("CITEMETRICS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _limit_threads(n: int | None) -> None:
    if n is None:
        return
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(limits=n)
    except Exception:  # pragma: no cover - best effort
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(n)


@dataclass
class RunConfig:
    """Validated knobs shared by the metric commands."""

    damping: float = 0.99
    author_damping: float = 0.9
    tol: float = 1e-10
    max_iters: int = 10_000
    after: int | None = None
    before: int | None = None
    no_self_citations: bool = False
    published_only: bool = False
    top: int | None = None
    out_format: str = "csv"
    threads: int | None = None
    errors: list[str] = field(default_factory=list)

    def validate(self) -> None:
        if not 0.0 < self.damping < 1.0:
            self.errors.append(f"--damping must be in (0, 1), got {self.damping}")
        if not 0.0 < self.author_damping < 1.0:
            self.errors.append(f"--author-damping must be in (0, 1), got {self.author_damping}")
        if self.tol <= 0.0:
            self.errors.append(f"--tol must be positive, got {self.tol}")
        if self.max_iters < 1:
            self.errors.append(f"--max-iters must be >= 1, got {self.max_iters}")
        if self.top is not None and self.top < 1:
            self.errors.append(f"--top must be >= 1, got {self.top}")
        if self.after is not None and self.before is not None and self.after > self.before:
            self.errors.append(f"--after {self.after} is later than --before {self.before}")
        if self.out_format not in ("csv", "jsonl"):
            self.errors.append(f"--format must be csv or jsonl, got {self.out_format}")
        if self.threads is not None and self.threads < 1:
            self.errors.append(f"--threads must be >= 1, got {self.threads}")
        if self.errors:
            raise click.UsageError("invalid configuration:\n  " + "\n  ".join(self.errors))

    def edge_filter(self) -> cg.EdgeFilter:
        window = None
        if self.after is not None or self.before is not None:
            window = (self.after, self.before)
        return cg.EdgeFilter(
            drop_self_citations=self.no_self_citations,
            window=window,
            published_only=self.published_only,
        )


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _write_rows(rows: list[dict], columns: list[str], output: str, out_format: str) -> None:
    with open(output, "w", encoding="utf-8", newline="") as fh:
        if out_format == "jsonl":
            for row in rows:
                fh.write(json.dumps({c: row.get(c) for c in columns}, sort_keys=True) + "\n")
            return
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c, "")) for c in columns])


def _emit_summary(summary: dict, path: str | None) -> None:
    text = json.dumps(summary, sort_keys=True, indent=2, default=str)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text, err=True)


def _load_dataset(path: str) -> tuple[Dataset, dict]:
    dataset, report = ingest(path, IngestOptions(lenient=True))
    log.info("loaded %d papers, %d authors (%d records dropped)",
             dataset.n_papers, len(dataset.authors), report.records_dropped)
    return dataset, report.to_dict()


def _build_graph(dataset: Dataset, config: RunConfig, cache: str | None):
    graph, report = cg.build_or_load(dataset, config.edge_filter(), cache)
    return graph, (report.to_dict() if report is not None else {"cache": "hit"})


def _paper_metric(dataset: Dataset, graph, name: str, config: RunConfig) -> pm.MetricVector:
    if name == "ncit":
        return pm.n_cit(graph)
    if name == "nicit":
        return pm.n_icit_papers(graph)
    if name == "paperrank":
        return pm.paperrank(graph, config.damping, config.tol, config.max_iters)
    if name == "ccoin":
        return pm.ccoin_papers(graph)
    if name == "arp":
        # author rank comes from the full unwindowed graph; the windowed
        # graph then supplies the citations it weights
        full_filter = cg.EdgeFilter(drop_self_citations=config.no_self_citations,
                                    published_only=config.published_only)
        full_graph, _ = cg.build_graph(dataset, full_filter)
        flow = am.build_flow_matrix(dataset, full_graph)
        arank = am.authorrank(flow, config.author_damping, config.tol, config.max_iters)
        return pm.authorrank_of_papers(dataset, graph, arank)
    raise click.UsageError(f"unknown paper metric {name}")


def _author_metric(dataset: Dataset, graph, name: str, config: RunConfig) -> pm.MetricVector:
    index = am.AuthorIndex.build(dataset, graph)
    if name in ("npap", "ncit", "nipap", "nicit"):
        counts = am.author_counts(dataset, graph, index=index)
        return {"npap": counts.npap, "ncit": counts.ncit,
                "nipap": counts.nipap, "nicit": counts.nicit}[name]
    if name == "h":
        return am.h_index(dataset, graph, index=index)
    if name == "prank":
        rank = pm.paperrank(graph, config.damping, config.tol, config.max_iters)
        return am.paperrank_of_authors(dataset, graph, rank, index=index)
    if name == "arank":
        flow = am.build_flow_matrix(dataset, graph, index=index)
        return am.authorrank(flow, config.author_damping, config.tol, config.max_iters)
    if name == "ccoin":
        return am.citation_coin(dataset, graph, index=index)
    if name == "ccoin-plus":
        return am.citation_coin_plus(dataset, graph, index=index)
    raise click.UsageError(f"unknown author metric {name}")


def config_options(fn):
    fn = click.option("--damping", type=float, default=0.99, show_default=True,
                      help="Damping for the paper rank iteration.")(fn)
    fn = click.option("--author-damping", type=float, default=0.9, show_default=True,
                      help="Damping for the author rank iteration.")(fn)
    fn = click.option("--tol", type=float, default=1e-10, show_default=True)(fn)
    fn = click.option("--max-iters", type=int, default=10_000, show_default=True)(fn)
    fn = click.option("--after", type=int, default=None,
                      help="Keep only papers written in or after this year.")(fn)
    fn = click.option("--before", type=int, default=None,
                      help="Keep only papers written in or before this year.")(fn)
    fn = click.option("--no-self-citations", is_flag=True,
                      help="Drop citations between papers sharing an author.")(fn)
    fn = click.option("--published-only", is_flag=True,
                      help="Count citations from published papers only.")(fn)
    fn = click.option("--top", type=int, default=None, help="Emit only the top N rows.")(fn)
    fn = click.option("--format", "out_format", type=click.Choice(["csv", "jsonl"]),
                      default="csv", show_default=True)(fn)
    fn = click.option("--graph-cache", type=click.Path(), default=None,
                      help="Binary CSR cache; reused when it matches input and filters.")(fn)
    fn = click.option("--summary", "summary_path", type=click.Path(), default=None,
                      help="Write the JSON run summary here instead of stderr.")(fn)
    fn = click.option("--figure", type=click.Path(), default=None,
                      help="Also render a figure of the output table to this path.")(fn)
    fn = click.option("--threads", type=int, default=None,
                      help="Limit dense-kernel thread pools; scores do not depend on it.")(fn)
    return fn


def _make_config(kwargs) -> RunConfig:
    config = RunConfig(
        damping=kwargs.pop("damping"),
        author_damping=kwargs.pop("author_damping"),
        tol=kwargs.pop("tol"),
        max_iters=kwargs.pop("max_iters"),
        after=kwargs.pop("after"),
        before=kwargs.pop("before"),
        no_self_citations=kwargs.pop("no_self_citations"),
        published_only=kwargs.pop("published_only"),
        top=kwargs.pop("top"),
        out_format=kwargs.pop("out_format"),
        threads=kwargs.pop("threads"),
    )
    config.validate()
    _limit_threads(config.threads)
    return config


@click.group()
@click.version_option(package_name="citemetrics")
def main() -> None:
    """Citation-network analytics: build graphs, rank papers and authors,
    aggregate to groups."""
    _setup_logging()


@main.command("ingest")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--strict", is_flag=True, help="Abort on malformed lines and duplicate ids.")
@click.option("--report", "report_path", type=click.Path(), default=None,
              help="Write the ingest report JSON here instead of stderr.")
def ingest_cmd(input_path, output_path, strict, report_path) -> None:
    """Normalize a raw JSONL dump into the canonical format."""
    try:
        dataset, report = ingest(input_path, IngestOptions(lenient=not strict))
    except CitemetricsError as exc:
        raise click.ClickException(str(exc))
    export_canonical(dataset, output_path)
    _emit_summary(report.to_dict(), report_path)


@main.command("rank-papers")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--metric", type=click.Choice(PAPER_METRICS), default="nicit", show_default=True)
@click.option("--output", "output_path", required=True, type=click.Path())
@config_options
def rank_papers_cmd(input_path, metric, output_path, graph_cache, summary_path, figure, **kwargs):
    """Score every paper and write a ranked table."""
    config = _make_config(kwargs)
    dataset, ingest_report = _load_dataset(input_path)
    graph, filter_report = _build_graph(dataset, config, graph_cache)
    vector = _paper_metric(dataset, graph, metric, config)
    rows = []
    for rank, (pid, score) in enumerate(vector.top(config.top), start=1):
        rec = dataset.papers[int(pid)]
        rows.append({
            "rank": rank, "paper_id": int(pid), "title": rec.title, "date": str(rec.date),
            "n_authors": rec.n_authors, "score": score,
        })
    _write_rows(rows, ["rank", "paper_id", "title", "date", "n_authors", "score"],
                output_path, config.out_format)
    if figure:
        from .plotting import save_rank_figure

        save_rank_figure(rows, figure, label_key="title", title=f"top papers by {metric}")
    _emit_summary({"command": "rank-papers", "metric": metric, "rows": len(rows),
                   "ingest": ingest_report, "filter": filter_report,
                   "params": vector.params}, summary_path)


@main.command("rank-authors")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--metric", type=click.Choice(AUTHOR_METRICS), default="nicit", show_default=True)
@click.option("--output", "output_path", required=True, type=click.Path())
@config_options
def rank_authors_cmd(input_path, metric, output_path, graph_cache, summary_path, figure, **kwargs):
    """Score every author and write a ranked table."""
    config = _make_config(kwargs)
    dataset, ingest_report = _load_dataset(input_path)
    graph, filter_report = _build_graph(dataset, config, graph_cache)
    try:
        vector = _author_metric(dataset, graph, metric, config)
    except CitemetricsError as exc:
        raise click.ClickException(str(exc))
    rows = []
    for rank, (aid, score) in enumerate(vector.top(config.top), start=1):
        rec = dataset.authors.get(int(aid))
        rows.append({"rank": rank, "author_id": int(aid),
                     "name": rec.display_name if rec else "", "score": score})
    _write_rows(rows, ["rank", "author_id", "name", "score"], output_path, config.out_format)
    if figure:
        from .plotting import save_rank_figure

        save_rank_figure(rows, figure, label_key="name", title=f"top authors by {metric}")
    _emit_summary({"command": "rank-authors", "metric": metric, "rows": len(rows),
                   "ingest": ingest_report, "filter": filter_report,
                   "params": vector.params}, summary_path)


@main.command("author-report")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--author", "author_id", required=True, type=int)
@click.option("--output", "output_path", required=True, type=click.Path())
@config_options
def author_report_cmd(input_path, author_id, output_path, graph_cache, summary_path, figure, **kwargs):
    """Full per-author profile: all metrics, time evolution, self-citations,
    top citers and citees."""
    config = _make_config(kwargs)
    dataset, ingest_report = _load_dataset(input_path)
    if author_id not in dataset.authors:
        raise click.ClickException(f"author {author_id} not in dataset")
    graph, filter_report = _build_graph(dataset, config, graph_cache)
    index = am.AuthorIndex.build(dataset, graph)
    counts = am.author_counts(dataset, graph, index=index)
    h_vec = am.h_index(dataset, graph, index=index)
    rank = pm.paperrank(graph, config.damping, config.tol, config.max_iters)
    prank = am.paperrank_of_authors(dataset, graph, rank, index=index)
    flow = am.build_flow_matrix(dataset, graph, index=index)
    arank = am.authorrank(flow, config.author_damping, config.tol, config.max_iters)
    coin = am.citation_coin(dataset, graph, index=index, flow=flow)
    coin_plus = am.citation_coin_plus(dataset, graph, index=index)

    a = index.index_of(author_id)
    papers = index.papers_of(a)
    years = np.sort(graph.year[papers]) if papers.size else np.zeros(0, dtype=np.int64)
    nicit_p = pm.n_icit_papers(graph).scores
    per_year: dict[int, dict[str, float]] = {}
    for node in papers:
        y = int(graph.year[node])
        bucket = per_year.setdefault(y, {"n_papers": 0, "nicit": 0.0})
        bucket["n_papers"] += 1
        bucket["nicit"] += float(nicit_p[node] / graph.n_authors[node])

    row = flow.matrix.getrow(a)
    col = flow.matrix.getcol(a).T.tocsr()
    given_total = float(row.sum())
    received_total = float(col.sum())
    self_w = float(flow.matrix[a, a])

    def top_partners(vecrow, exclude: int, n: int = 10) -> list[dict]:
        entries = [(int(j), float(w)) for j, w in zip(vecrow.indices, vecrow.data) if j != exclude]
        entries.sort(key=lambda e: (-e[1], e[0]))
        return [{"author_id": int(index.author_ids[j]),
                 "name": dataset.authors[int(index.author_ids[j])].display_name,
                 "weight": w} for j, w in entries[:n]]

    profile = {
        "author_id": author_id,
        "name": dataset.authors[author_id].display_name,
        "metrics": {
            "npap": counts.npap.get(author_id), "nipap": counts.nipap.get(author_id),
            "ncit": counts.ncit.get(author_id), "nicit": counts.nicit.get(author_id),
            "h": h_vec.get(author_id), "prank": prank.get(author_id),
            "arank": arank.get(author_id), "ccoin": coin.get(author_id),
            "ccoin_plus": coin_plus.get(author_id),
        },
        "scientific_age": {
            "first_year": int(years[0]) if years.size else None,
            "last_year": int(years[-1]) if years.size else None,
            "span": int(years[-1] - years[0] + 1) if years.size else 0,
        },
        "per_year": [{"year": y, **per_year[y]} for y in sorted(per_year)],
        "self_citations": {
            "given_pct": 100.0 * self_w / given_total if given_total else 0.0,
            "received_pct": 100.0 * self_w / received_total if received_total else 0.0,
        },
        "top_citees": top_partners(row, a),
        "top_citers": top_partners(col, a),
    }
    with open(output_path, "w", encoding="utf-8") as fh:
        json.dump(profile, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _emit_summary({"command": "author-report", "author": author_id,
                   "ingest": ingest_report, "filter": filter_report}, summary_path)


@main.command("rank-groups")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--by", "by", type=click.Choice(GROUP_KINDS), required=True)
@click.option("--metric", type=click.Choice(PAPER_METRICS), default="nicit", show_default=True)
@click.option("--radius-km", type=float, default=30.0, show_default=True,
              help="Town clustering radius.")
@click.option("--geo-denominators", type=click.Path(exists=True), default=None,
              help="CSV with country,population,gdp_usd for per-capita columns.")
@click.option("--output", "output_path", required=True, type=click.Path())
@config_options
def rank_groups_cmd(input_path, by, metric, radius_km, geo_denominators, output_path,
                    graph_cache, summary_path, figure, **kwargs):
    """Aggregate a paper metric to institutions, towns, countries,
    continents, journals, or gender tags."""
    config = _make_config(kwargs)
    dataset, ingest_report = _load_dataset(input_path)
    graph, filter_report = _build_graph(dataset, config, graph_cache)
    vector = _paper_metric(dataset, graph, metric, config)
    scheme = _scheme_for(dataset, by, radius_km)
    totals = gm.group_metric(scheme, vector)
    label = _group_labels(dataset, by, radius_km)
    rows = [{"rank": i + 1, "group": label(g), "score": s}
            for i, (g, s) in enumerate(totals.top(config.top))]
    columns = ["rank", "group", "score"]
    if geo_denominators and by == "country":
        denominators = _read_denominators(geo_denominators)
        rows = gm.geo_normalized(rows, denominators)
        columns += ["per_million_pop", "per_billion_gdp"]
    _write_rows(rows, columns, output_path, config.out_format)
    if figure:
        from .plotting import save_rank_figure

        save_rank_figure(rows, figure, label_key="group", title=f"{metric} by {by}")
    _emit_summary({"command": "rank-groups", "by": by, "metric": metric,
                   "rows": len(rows), "uncovered_papers": scheme.n_uncovered,
                   "ingest": ingest_report, "filter": filter_report}, summary_path)


def _scheme_for(dataset: Dataset, by: str, radius_km: float) -> gm.GroupingScheme:
    if by == "institution":
        return gm.institution_shares(dataset)
    if by == "town":
        return gm.town_scheme(dataset, radius_km)
    if by == "country":
        return gm.country_scheme(dataset)
    if by == "continent":
        return gm.continent_scheme(dataset)
    if by == "journal":
        return gm.journal_scheme(dataset)
    if by == "gender":
        return gm.gender_scheme(dataset)
    raise click.UsageError(f"unknown grouping {by}")


def _group_labels(dataset: Dataset, by: str, radius_km: float = 30.0):
    if by == "institution":
        return lambda g: dataset.institutions[g].name if g in dataset.institutions else str(g)
    if by == "town":
        clusters = gm.cluster_towns(dataset, radius_km)
        return lambda g: clusters.labels.get(g, str(g))
    return lambda g: str(g)


def _read_denominators(path: str) -> dict:
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out[row["country"]] = {
                "population": float(row["population"]) if row.get("population") else None,
                "gdp_usd": float(row["gdp_usd"]) if row.get("gdp_usd") else None,
            }
    return out


@main.command("timeseries")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--by", "by", type=click.Choice(GROUP_KINDS), required=True)
@click.option("--metric", type=click.Choice(PAPER_METRICS), default="nicit", show_default=True)
@click.option("--category", type=str, default=None)
@click.option("--radius-km", type=float, default=30.0, show_default=True)
@click.option("--output", "output_path", required=True, type=click.Path())
@config_options
def timeseries_cmd(input_path, by, metric, category, radius_km, output_path,
                   graph_cache, summary_path, figure, **kwargs):
    """Yearly world-percentage of a metric per group."""
    config = _make_config(kwargs)
    dataset, ingest_report = _load_dataset(input_path)
    graph, filter_report = _build_graph(dataset, config, graph_cache)
    vector = _paper_metric(dataset, graph, metric, config)
    scheme = _scheme_for(dataset, by, radius_km)
    label = _group_labels(dataset, by, radius_km)
    rows = gm.timeseries_table(dataset, graph, scheme, vector, category)
    for row in rows:
        row["group"] = label(row["group"])
    _write_rows(rows, ["group", "year", "value", "pct_of_world"], output_path, config.out_format)
    if figure:
        from .plotting import save_timeseries_figure

        save_timeseries_figure(rows, figure, title=f"{metric} share by {by}")
    _emit_summary({"command": "timeseries", "by": by, "metric": metric, "rows": len(rows),
                   "ingest": ingest_report, "filter": filter_report}, summary_path)


@main.command("trends")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--category", type=str, default=None)
@click.option("--output", "output_path", required=True, type=click.Path())
@config_options
def trends_cmd(input_path, category, output_path, graph_cache, summary_path, figure, **kwargs):
    """Per-year volume, reference/author averages, and author turnover."""
    config = _make_config(kwargs)
    dataset, ingest_report = _load_dataset(input_path)
    graph, filter_report = _build_graph(dataset, config, graph_cache)
    rows = gm.trend_series(dataset, graph, category)
    columns = ["year", "n_papers", "mean_refs_declared", "mean_authors", "mean_citations",
               "mean_citations_published", "authors_active", "authors_born", "authors_died",
               "birth_pct", "death_pct"]
    _write_rows(rows, columns, output_path, config.out_format)
    if figure:
        from .plotting import save_trends_figure

        save_trends_figure(rows, figure, title=category or "all categories")
    _emit_summary({"command": "trends", "rows": len(rows), "category": category,
                   "ingest": ingest_report, "filter": filter_report}, summary_path)


@main.command("correlations")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--entity", type=click.Choice(["papers", "authors"]), default="papers",
              show_default=True)
@click.option("--output", "output_path", required=True, type=click.Path())
@config_options
def correlations_cmd(input_path, entity, output_path, graph_cache, summary_path, figure, **kwargs):
    """Pairwise Pearson and Spearman correlations between the indices."""
    config = _make_config(kwargs)
    dataset, ingest_report = _load_dataset(input_path)
    graph, filter_report = _build_graph(dataset, config, graph_cache)
    if entity == "papers":
        flow = am.build_flow_matrix(dataset, graph)
        arank = am.authorrank(flow, config.author_damping, config.tol, config.max_iters)
        vectors = [
            pm.n_cit(graph),
            pm.n_icit_papers(graph),
            pm.paperrank(graph, config.damping, config.tol, config.max_iters),
            pm.authorrank_of_papers(dataset, graph, arank),
        ]
    else:
        index = am.AuthorIndex.build(dataset, graph)
        counts = am.author_counts(dataset, graph, index=index)
        rank = pm.paperrank(graph, config.damping, config.tol, config.max_iters)
        flow = am.build_flow_matrix(dataset, graph, index=index)
        h_vec = am.h_index(dataset, graph, index=index)
        h_squared = pm.MetricVector("h2", h_vec.ids, h_vec.scores ** 2)
        vectors = [
            counts.npap, counts.ncit, h_squared, counts.nipap, counts.nicit,
            am.paperrank_of_authors(dataset, graph, rank, index=index),
            am.authorrank(flow, config.author_damping, config.tol, config.max_iters),
            am.citation_coin(dataset, graph, index=index, flow=flow),
        ]
    result = gm.metric_correlations(vectors)
    rows = []
    for i, a in enumerate(result.kinds):
        for j, b in enumerate(result.kinds):
            rows.append({"metric_a": a, "metric_b": b,
                         "pearson": result.pearson[i, j], "spearman": result.spearman[i, j]})
    _write_rows(rows, ["metric_a", "metric_b", "pearson", "spearman"],
                output_path, config.out_format)
    if figure:
        from .plotting import save_correlations_figure

        save_correlations_figure(result.kinds, result.spearman, figure,
                                 title=f"{entity} metric correlations (Spearman)")
    _emit_summary({"command": "correlations", "entity": entity,
                   "n_entities": result.n_entities, "undefined": result.undefined,
                   "ingest": ingest_report, "filter": filter_report}, summary_path)


@main.command("gen-fixture")
@click.option("--seed", type=int, required=True)
@click.option("--papers", "n_papers", type=int, required=True)
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--start-year", type=int, default=1970, show_default=True)
@click.option("--years", "n_years", type=int, default=40, show_default=True)
@click.option("--refs-mean", type=float, default=12.0, show_default=True)
@click.option("--authors-mean", type=float, default=2.5, show_default=True)
@click.option("--external-ref-frac", type=float, default=0.0, show_default=True)
@click.option("--fully-internal", is_flag=True,
              help="Every declared reference resolves inside the fixture.")
@click.option("--summary", "summary_path", type=click.Path(), default=None)
def gen_fixture_cmd(seed, n_papers, output_path, start_year, n_years, refs_mean,
                    authors_mean, external_ref_frac, fully_internal, summary_path):
    """Write a seeded synthetic dataset in canonical JSONL."""
    try:
        params = FixtureParams(
            n_papers=n_papers, seed=seed, start_year=start_year, n_years=n_years,
            refs_mean=refs_mean, authors_mean=authors_mean,
            external_ref_frac=external_ref_frac, fully_internal=fully_internal,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))
    dataset = write_fixture(output_path, params)
    _emit_summary({"command": "gen-fixture", "papers": dataset.n_papers,
                   "refs": dataset.total_indexed_refs(), "authors": len(dataset.authors)},
                  summary_path)


if __name__ == "__main__":  # pragma: no cover
    main()
