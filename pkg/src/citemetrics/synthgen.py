"""Deterministic synthetic bibliographic fixtures.

The generator grows a literature year by year: paper volume rises
geometrically, authors enter the pool over time with log-normal
productivity, and references mix uniform attachment with preferential
attachment to previously cited papers, which produces the heavy-tailed
citation counts real corpora show. References only point to earlier
years, so the resulting graph is causal by construction.

``fully_internal`` tightens the output for sum-rule checks: every
declared reference is indexed and internal, every paper carries at least
one reference, and the first-year papers cite each other in a ring
(same-year citations are causal).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import (
    AuthorLink,
    AuthorRecord,
    CalendarDate,
    Dataset,
    InstitutionRecord,
    PaperRecord,
    export_canonical,
)

CATEGORIES = ("hep-ph", "hep-th", "hep-ex", "astro-ph", "gr-qc", "hep-lat", "nucl-th", "nucl-ex")
COUNTRIES = (
    ("US", "North America"), ("CH", "Europe"), ("DE", "Europe"), ("IT", "Europe"),
    ("FR", "Europe"), ("GB", "Europe"), ("JP", "Asia"), ("CN", "Asia"),
    ("RU", "Asia"), ("CA", "North America"), ("BR", "South America"), ("IN", "Asia"),
)


@dataclass
class FixtureParams:
    n_papers: int = 1000
    seed: int = 0
    start_year: int = 1970
    n_years: int = 40
    growth: float = 0.05
    refs_mean: float = 12.0
    authors_mean: float = 2.5
    max_authors: int = 10
    author_pool: int | None = None
    n_institutions: int | None = None
    n_journals: int | None = None
    external_ref_frac: float = 0.0
    fully_internal: bool = False
    pref_attachment: float = 0.7
    published_frac: float = 0.8
    collaboration_frac: float = 0.01
    affiliation_missing_frac: float = 0.1
    untagged_frac: float = 0.1

    def __post_init__(self):
        if self.n_papers < 1:
            raise ValueError("n_papers must be >= 1")
        if self.n_years < 1:
            raise ValueError("n_years must be >= 1")
        if not 0.0 <= self.pref_attachment <= 1.0:
            raise ValueError("pref_attachment must be in [0, 1]")
        if self.refs_mean < 0 or self.authors_mean < 1:
            raise ValueError("refs_mean must be >= 0 and authors_mean >= 1")
        if self.external_ref_frac < 0:
            raise ValueError("external_ref_frac must be >= 0")


def _papers_per_year(params: FixtureParams) -> np.ndarray:
    weights = (1.0 + params.growth) ** np.arange(params.n_years)
    weights /= weights.sum()
    cum = np.floor(np.cumsum(weights) * params.n_papers + 0.5).astype(np.int64)
    counts = np.diff(np.concatenate(([0], cum)))
    counts[-1] += params.n_papers - counts.sum()
    if params.fully_internal and params.n_papers >= 2:
        # the ring of mutual first-year citations needs two papers
        while counts[0] < 2:
            donor = int(np.argmax(counts))
            counts[donor] -= 1
            counts[0] += 1
    return counts


def generate_dataset(params: FixtureParams) -> Dataset:
    """Build an in-memory dataset; same params always give the same data."""
    rng = np.random.default_rng(params.seed)
    n = params.n_papers
    counts = _papers_per_year(params)
    years = np.repeat(params.start_year + np.arange(params.n_years), counts)

    month_known = rng.random(n) > 0.1
    months = rng.integers(1, 13, n)

    pool = params.author_pool or max(4, n // 8)
    productivity = rng.lognormal(0.0, 1.0, pool)
    entry_year = np.sort(rng.integers(0, params.n_years, pool))
    genders = rng.choice(
        ["female", "male", "indeterminate", ""],
        size=pool,
        p=[0.14, 0.56, 0.20, 0.10],
    )

    n_inst = params.n_institutions or max(3, pool // 20)
    n_centers = max(1, n_inst // 3)
    center_lat = rng.uniform(-60.0, 70.0, n_centers)
    center_lon = rng.uniform(-179.0, 179.0, n_centers)
    center_country = rng.integers(0, len(COUNTRIES), n_centers)
    inst_center = rng.integers(0, n_centers, n_inst)
    inst_lat = center_lat[inst_center] + rng.normal(0.0, 0.05, n_inst)
    inst_lon = center_lon[inst_center] + rng.normal(0.0, 0.05, n_inst)
    inst_no_coords = rng.random(n_inst) < 0.02
    inst_no_country = rng.random(n_inst) < 0.02

    home_affs = []
    for a in range(pool):
        k = int(rng.integers(1, 4))
        home_affs.append(sorted(set(int(x) for x in rng.integers(0, n_inst, k))))

    n_journals = params.n_journals or 20
    journal_weights = 1.0 / (1.0 + np.arange(n_journals)) ** 1.2
    journal_weights /= journal_weights.sum()
    published = rng.random(n) < params.published_frac
    journal_pick = rng.choice(n_journals, size=n, p=journal_weights)

    collab = rng.random(n) < params.collaboration_frac
    cat_primary = rng.integers(0, len(CATEGORIES), n)
    cat_second = rng.integers(0, len(CATEGORIES), n)
    cat_two = rng.random(n) < 0.3

    # author slots per paper, then one weighted draw per year
    author_count = np.minimum(
        1 + rng.poisson(max(params.authors_mean - 1.0, 0.0), n), params.max_authors
    )
    author_count[collab] = 0
    paper_authors: list[list[int]] = [[] for _ in range(n)]
    offset = 0
    for t in range(params.n_years):
        n_y = int(counts[t])
        if n_y == 0:
            continue
        active = int(np.searchsorted(entry_year, t, side="right"))
        active = max(active, 1)
        weights = productivity[:active] / productivity[:active].sum()
        sel = slice(offset, offset + n_y)
        slots = author_count[sel].sum()
        if slots:
            draws = rng.choice(active, size=int(slots), p=weights)
            pos = 0
            for i in range(offset, offset + n_y):
                k = int(author_count[i])
                paper_authors[i] = sorted(set(int(x) for x in draws[pos:pos + k]))
                pos += k
        offset += n_y

    # references: uniform or preferential to already-cited papers
    ref_count = rng.poisson(params.refs_mean, n)
    if params.fully_internal:
        ref_count = np.maximum(ref_count, 1)
    paper_refs: list[np.ndarray] = [np.zeros(0, dtype=np.int64) for _ in range(n)]
    history: list[np.ndarray] = []
    history_size = 0
    offset = 0
    for t in range(params.n_years):
        n_y = int(counts[t])
        if n_y == 0:
            continue
        prior = offset
        if prior == 0:
            if params.fully_internal and n_y >= 2:
                ring = np.arange(n_y)
                for i in range(n_y):
                    paper_refs[i] = np.asarray([int((ring[i] + 1) % n_y)], dtype=np.int64)
                history.append(np.asarray([(i + 1) % n_y for i in range(n_y)], dtype=np.int64))
                history_size += n_y
            offset += n_y
            continue
        slots = int(ref_count[offset:offset + n_y].sum())
        if slots:
            uniform = rng.integers(0, prior, slots)
            use_pref = (rng.random(slots) < params.pref_attachment) & (history_size > 0)
            if history_size:
                hist = np.concatenate(history) if len(history) > 1 else history[0]
                history = [hist]
                pref = hist[rng.integers(0, history_size, slots)]
            else:
                pref = uniform
            dst = np.where(use_pref, pref, uniform)
            pos = 0
            for i in range(offset, offset + n_y):
                k = int(ref_count[i])
                paper_refs[i] = np.unique(dst[pos:pos + k])
                pos += k
            history.append(dst)
            history_size += slots
        offset += n_y

    extra_refs = rng.poisson(params.refs_mean * params.external_ref_frac, n) \
        if params.external_ref_frac > 0 else np.zeros(n, dtype=np.int64)

    dataset = Dataset()
    for j in range(n_journals):
        dataset.journals[j] = f"Journal {j}"
    for i in range(n_inst):
        dataset.institutions[i] = InstitutionRecord(
            institution_id=i,
            name=f"Institute {i}",
            latitude=None if inst_no_coords[i] else round(float(inst_lat[i]), 6),
            longitude=None if inst_no_coords[i] else round(float(inst_lon[i]), 6),
            country_code=None if inst_no_country[i] else COUNTRIES[center_country[inst_center[i]]][0],
            continent=None if inst_no_country[i] else COUNTRIES[center_country[inst_center[i]]][1],
        )
    for a in range(pool):
        dataset.authors[a] = AuthorRecord(a, f"Author {a}", genders[a] or None)

    drop_aff = rng.random(n * params.max_authors) < params.affiliation_missing_frac
    slot = 0
    for i in range(n):
        links = []
        for a in paper_authors[i]:
            affs = [] if drop_aff[slot % drop_aff.size] else list(home_affs[a])
            links.append(AuthorLink(a, affs))
            slot += 1
        refs = [int(r) for r in paper_refs[i]]
        if params.fully_internal:
            declared = len(refs)
        else:
            declared = int(ref_count[i]) + int(extra_refs[i])
            declared = max(declared, len(refs))
        cats = [CATEGORIES[cat_primary[i]]]
        if cat_two[i] and CATEGORIES[cat_second[i]] not in cats:
            cats.append(CATEGORIES[cat_second[i]])
        dataset.papers[i] = PaperRecord(
            paper_id=i,
            date=CalendarDate(int(years[i]), int(months[i]) if month_known[i] else None),
            title=f"Paper {i}",
            authors=links,
            journal_id=int(journal_pick[i]) if published[i] else None,
            collaboration=f"Collab-{i % 7}" if collab[i] else None,
            categories=cats,
            declared_ref_count=declared,
            references=refs,
            published=bool(published[i]),
        )
    return dataset


def gen_fixture(seed: int, n_papers: int, **overrides) -> Dataset:
    return generate_dataset(FixtureParams(n_papers=n_papers, seed=seed, **overrides))


def write_fixture(sink, params: FixtureParams) -> Dataset:
    """Generate a fixture and write it as canonical JSONL; returns the dataset."""
    dataset = generate_dataset(params)
    export_canonical(dataset, sink)
    return dataset
