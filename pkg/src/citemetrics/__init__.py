"""Citation-network analytics engine.

Ingest bibliographic JSONL dumps, build time-ordered sparse citation
graphs, and compute paper, author, and group indices: citation counts,
individual citations, damped ranks over papers and authors, and the
net-flow citation coin.
"""

__version__ = "0.1.0"

from .dataset import (
    AuthorLink,
    AuthorRecord,
    CalendarDate,
    Dataset,
    IngestOptions,
    IngestReport,
    InstitutionRecord,
    PaperRecord,
    export_canonical,
    ingest,
    resolve_date,
)
from .citegraph import (
    CitationGraph,
    EdgeFilter,
    FilterReport,
    build_graph,
    build_or_load,
    prune_leaves,
    topological_order,
)
from .paper_metrics import (
    GenerationProfile,
    MetricVector,
    authorrank_of_papers,
    ccoin_papers,
    generation_expansion,
    n_cit,
    n_icit_papers,
    paperrank,
)
from .author_metrics import (
    AuthorFlowMatrix,
    AuthorIndex,
    StochasticAuthorMatrix,
    author_counts,
    authorrank,
    build_flow_matrix,
    citation_coin,
    citation_coin_plus,
    coin_from_flow,
    h_index,
    paperrank_of_authors,
    row_normalize,
)
from .group_metrics import (
    GroupingScheme,
    cluster_towns,
    gender_stats,
    gini,
    group_metric,
    haversine_km,
    institution_shares,
    journal_table,
    metric_correlations,
    trend_series,
)
from .synthgen import FixtureParams, gen_fixture, generate_dataset, write_fixture
from .errors import (
    CitemetricsError,
    ConvergenceError,
    DataInconsistencyError,
    IngestError,
)

__all__ = [name for name in dir() if not name.startswith("_")]
