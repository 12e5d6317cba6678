"""Bibliographic data model with JSONL ingestion and canonical export.

The canonical on-disk format is line-delimited JSON. Every line is one
record carrying a ``kind`` field:

``paper``
    ``{"kind": "paper", "id": 7, "date": "1998-01", "title": "...",
    "authors": [{"id": 3, "affiliations": [1, 2]}], "journal": 5,
    "collaboration": null, "categories": ["hep-ph"], "refs": [1, 4],
    "refs_declared": 30, "published": true}``
``author``
    ``{"kind": "author", "id": 3, "name": "A. Author", "gender": "female"}``
``institution``
    ``{"kind": "institution", "id": 1, "name": "CERN", "lat": 46.23,
    "lon": 6.05, "country": "CH", "continent": "Europe"}``
``journal``
    ``{"kind": "journal", "id": 5, "name": "Phys.Rev.D"}``

Raw dumps may carry several candidate dates instead of a resolved one
(``"dates": {"preprint": "1998-01", "publication": "1998-04"}``);
ingestion resolves them to the earliest and the canonical export always
writes a single ``date``.

Two reference counts are kept per paper. ``refs_declared`` is the length
of the printed bibliography, including entries that point outside the
dataset; ``refs`` lists only the identifiers that resolve inside the
dataset. Downstream code weights individual citations with the declared
count and normalizes rank transitions with the indexed one.
"""

from __future__ import annotations

import datetime
import io
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Any, Iterator, Mapping

from .errors import IngestError

GENDER_TAGS = ("female", "male", "indeterminate")

# candidate date kinds in tie-break priority order
DATE_KINDS = ("earliest", "preprint", "publication", "added")

_DATE_RE = re.compile(r"^(\d{4})(?:-(\d{1,2}))?(?:-(\d{1,2}))?$")


@dataclass(frozen=True)
class CalendarDate:
    """A calendar date where month and day may be unknown."""

    year: int
    month: int | None = None
    day: int | None = None

    @classmethod
    def parse(cls, text: str) -> "CalendarDate":
        m = _DATE_RE.match(str(text).strip())
        if not m:
            raise ValueError(f"unparseable date {text!r}")
        year = int(m.group(1))
        month = int(m.group(2)) if m.group(2) else None
        day = int(m.group(3)) if m.group(3) else None
        if month is not None and not 1 <= month <= 12:
            raise ValueError(f"bad month in date {text!r}")
        if day is not None and (month is None or not 1 <= day <= 31):
            raise ValueError(f"bad day in date {text!r}")
        return cls(year, month, day)

    def sort_key(self) -> tuple[int, int, int]:
        # a year-only date sorts before any dated month of that year
        return (self.year, self.month or 0, self.day or 0)

    def __str__(self) -> str:
        if self.month is None:
            return f"{self.year:04d}"
        if self.day is None:
            return f"{self.year:04d}-{self.month:02d}"
        return f"{self.year:04d}-{self.month:02d}-{self.day:02d}"


def resolve_date(candidates: Mapping[str, Any]) -> CalendarDate:
    """Pick the earliest of several candidate dates.

    ``candidates`` maps a date kind (earliest, preprint, publication,
    added) to a date string. When parsed dates compare equal the kinds
    tie-break in that order. A year-only date sorts before any explicit
    month of the same year.

    Raises ValueError when no candidate parses.
    """
    best = None
    for rank, kind in enumerate(DATE_KINDS):
        raw = candidates.get(kind)
        if raw in (None, ""):
            continue
        try:
            date = CalendarDate.parse(raw)
        except ValueError:
            continue
        key = (date.sort_key(), rank)
        if best is None or key < best[0]:
            best = (key, date)
    if best is None:
        raise ValueError("no usable date among candidates")
    return best[1]


@dataclass
class AuthorLink:
    """One author slot on a paper; ``author_id`` is None for unresolved names."""

    author_id: int | None = None
    affiliation_ids: list[int] = field(default_factory=list)


@dataclass
class PaperRecord:
    paper_id: int
    date: CalendarDate
    title: str = ""
    authors: list[AuthorLink] = field(default_factory=list)
    journal_id: int | None = None
    collaboration: str | None = None
    categories: list[str] = field(default_factory=list)
    declared_ref_count: int = 0
    references: list[int] = field(default_factory=list)
    published: bool = False

    @property
    def n_authors(self) -> int:
        return len(self.authors)


@dataclass
class AuthorRecord:
    author_id: int
    display_name: str = ""
    gender_tag: str | None = None


@dataclass
class InstitutionRecord:
    institution_id: int
    name: str = ""
    latitude: float | None = None
    longitude: float | None = None
    country_code: str | None = None
    continent: str | None = None

    @property
    def has_coordinates(self) -> bool:
        return self.latitude is not None and self.longitude is not None


@dataclass
class Dataset:
    """Id-indexed collections; immutable by convention after ingestion."""

    papers: dict[int, PaperRecord] = field(default_factory=dict)
    authors: dict[int, AuthorRecord] = field(default_factory=dict)
    institutions: dict[int, InstitutionRecord] = field(default_factory=dict)
    journals: dict[int, str] = field(default_factory=dict)

    @property
    def n_papers(self) -> int:
        return len(self.papers)

    def total_indexed_refs(self) -> int:
        return sum(len(p.references) for p in self.papers.values())


@dataclass
class IngestOptions:
    lenient: bool = True
    min_year: int = 1200
    max_year: int | None = None  # defaults to the current year

    def year_bounds(self) -> tuple[int, int]:
        hi = self.max_year if self.max_year is not None else datetime.date.today().year
        return self.min_year, hi


@dataclass
class IngestReport:
    """Counters describing what ingestion kept, fixed, and threw away."""

    records_read: int = 0
    papers: int = 0
    authors: int = 0
    institutions: int = 0
    journals: int = 0
    dropped: dict[str, int] = field(default_factory=dict)
    external_refs: int = 0
    self_refs: int = 0
    duplicate_refs: int = 0
    dangling_author_ids: int = 0
    dangling_affiliations: int = 0
    dangling_journals: int = 0
    ref_count_adjusted: int = 0
    bad_coordinates: int = 0
    bad_gender_tags: int = 0

    def drop(self, reason: str, count: int = 1) -> None:
        self.dropped[reason] = self.dropped.get(reason, 0) + count

    @property
    def records_kept(self) -> int:
        return self.papers + self.authors + self.institutions + self.journals

    @property
    def records_dropped(self) -> int:
        return sum(self.dropped.values())

    def to_dict(self) -> dict:
        return {
            "records_read": self.records_read,
            "records_kept": self.records_kept,
            "kept": {
                "papers": self.papers,
                "authors": self.authors,
                "institutions": self.institutions,
                "journals": self.journals,
            },
            "dropped": dict(sorted(self.dropped.items())),
            "external_refs": self.external_refs,
            "self_refs": self.self_refs,
            "duplicate_refs": self.duplicate_refs,
            "dangling_author_ids": self.dangling_author_ids,
            "dangling_affiliations": self.dangling_affiliations,
            "dangling_journals": self.dangling_journals,
            "ref_count_adjusted": self.ref_count_adjusted,
            "bad_coordinates": self.bad_coordinates,
            "bad_gender_tags": self.bad_gender_tags,
        }


def _iter_lines(source) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            yield from fh
        return
    if isinstance(source, bytes):
        yield from io.StringIO(source.decode("utf-8"))
        return
    if hasattr(source, "read"):
        for line in source:
            if isinstance(line, bytes):
                line = line.decode("utf-8")
            yield line
        return
    yield from source  # pragma: no cover - iterable of lines


def _as_id(value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"id must be an integer, got {value!r}")
    return value


def _parse_author_links(raw) -> list[tuple[int | None, list[int]]]:
    links = []
    if raw is None:
        return links
    if not isinstance(raw, list):
        raise ValueError("authors must be a list")
    for entry in raw:
        if isinstance(entry, int):
            links.append((entry, []))
            continue
        if not isinstance(entry, dict):
            raise ValueError("author entry must be an object")
        aid = entry.get("id")
        if aid is not None:
            aid = _as_id(aid)
        affs = entry.get("affiliations") or []
        if not isinstance(affs, list):
            raise ValueError("affiliations must be a list")
        links.append((aid, [_as_id(a) for a in affs]))
    return links


def _parse_paper(obj: dict, options: IngestOptions):
    pid = _as_id(obj["id"])
    if "date" in obj and obj["date"] not in (None, ""):
        date = CalendarDate.parse(obj["date"])
    elif isinstance(obj.get("dates"), dict):
        date = resolve_date(obj["dates"])
    else:
        raise _BadDate("no date")
    lo, hi = options.year_bounds()
    if not lo <= date.year <= hi:
        raise _BadDate(f"year {date.year} outside [{lo}, {hi}]")
    links = _parse_author_links(obj.get("authors"))
    refs = obj.get("refs") or []
    if not isinstance(refs, list):
        raise ValueError("refs must be a list")
    refs = [_as_id(r) for r in refs]
    declared = obj.get("refs_declared")
    if declared is None:
        declared = len(refs)
    elif not isinstance(declared, int) or declared < 0:
        raise ValueError("refs_declared must be a nonnegative integer")
    journal = obj.get("journal")
    if journal is not None:
        journal = _as_id(journal)
    categories = obj.get("categories") or []
    record = PaperRecord(
        paper_id=pid,
        date=date,
        title=str(obj.get("title", "")),
        authors=[AuthorLink(aid, affs) for aid, affs in links],
        journal_id=journal,
        collaboration=obj.get("collaboration"),
        categories=[str(c) for c in categories],
        declared_ref_count=declared,
        references=refs,
        published=bool(obj.get("published", False)),
    )
    return record


class _BadDate(Exception):
    pass


def ingest(source, options: IngestOptions | None = None) -> tuple[Dataset, IngestReport]:
    """Read line-delimited records into a validated :class:`Dataset`.

    Cleaning rules, applied in order per paper: records with no usable
    date (or a year outside the accepted range) are dropped; duplicate
    ids keep the first occurrence; reference lists are de-duplicated,
    self references removed, and references to unknown papers dropped
    while ``refs_declared`` keeps the printed bibliography length.
    Dangling author, affiliation, and journal ids are cleared from the
    surviving records. Every removal is tallied in the report so that
    ``records_read == records_kept + sum(dropped.values())``.

    In strict mode (``options.lenient=False``) malformed lines and
    duplicate ids raise :class:`IngestError` instead of being counted.
    """
    options = options or IngestOptions()
    report = IngestReport()
    papers: dict[int, PaperRecord] = {}
    authors: dict[int, AuthorRecord] = {}
    institutions: dict[int, InstitutionRecord] = {}
    journals: dict[int, str] = {}

    def fail_or_drop(reason: str, line_no: int, message: str) -> None:
        if not options.lenient and reason in ("malformed", "duplicate_id", "unknown_kind"):
            raise IngestError(f"line {line_no}: {message}")
        report.drop(reason)

    for line_no, line in enumerate(_iter_lines(source), start=1):
        line = line.strip()
        if not line:
            continue
        report.records_read += 1
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            fail_or_drop("malformed", line_no, f"invalid JSON ({exc.msg})")
            continue
        if not isinstance(obj, dict) or "kind" not in obj or "id" not in obj:
            fail_or_drop("malformed", line_no, "record must be an object with kind and id")
            continue
        kind = obj["kind"]
        try:
            if kind == "paper":
                record = _parse_paper(obj, options)
                if record.paper_id in papers:
                    fail_or_drop("duplicate_id", line_no, f"duplicate paper id {record.paper_id}")
                    continue
                papers[record.paper_id] = record
                report.papers += 1
            elif kind == "author":
                aid = _as_id(obj["id"])
                if aid in authors:
                    fail_or_drop("duplicate_id", line_no, f"duplicate author id {aid}")
                    continue
                gender = obj.get("gender")
                if gender is not None and gender not in GENDER_TAGS:
                    report.bad_gender_tags += 1
                    gender = None
                authors[aid] = AuthorRecord(aid, str(obj.get("name", "")), gender)
                report.authors += 1
            elif kind == "institution":
                iid = _as_id(obj["id"])
                if iid in institutions:
                    fail_or_drop("duplicate_id", line_no, f"duplicate institution id {iid}")
                    continue
                lat, lon = obj.get("lat"), obj.get("lon")
                if lat is not None or lon is not None:
                    ok = (
                        isinstance(lat, (int, float))
                        and isinstance(lon, (int, float))
                        and -90.0 <= float(lat) <= 90.0
                        and -180.0 <= float(lon) <= 180.0
                    )
                    if not ok:
                        report.bad_coordinates += 1
                        lat = lon = None
                institutions[iid] = InstitutionRecord(
                    iid,
                    str(obj.get("name", "")),
                    float(lat) if lat is not None else None,
                    float(lon) if lon is not None else None,
                    obj.get("country"),
                    obj.get("continent"),
                )
                report.institutions += 1
            elif kind == "journal":
                jid = _as_id(obj["id"])
                if jid in journals:
                    fail_or_drop("duplicate_id", line_no, f"duplicate journal id {jid}")
                    continue
                journals[jid] = str(obj.get("name", ""))
                report.journals += 1
            else:
                fail_or_drop("unknown_kind", line_no, f"unknown record kind {kind!r}")
        except _BadDate:
            report.drop("bad_date")
        except (ValueError, KeyError, TypeError) as exc:
            fail_or_drop("malformed", line_no, str(exc))

    # resolution pass: every surviving id must point inside the dataset
    for record in papers.values():
        raw_refs = record.references
        unique = list(dict.fromkeys(raw_refs))
        report.duplicate_refs += len(raw_refs) - len(unique)
        no_self = [r for r in unique if r != record.paper_id]
        report.self_refs += len(unique) - len(no_self)
        internal = [r for r in no_self if r in papers]
        report.external_refs += len(no_self) - len(internal)
        record.references = sorted(internal)
        if record.declared_ref_count < len(record.references):
            record.declared_ref_count = len(record.references)
            report.ref_count_adjusted += 1
        for link in record.authors:
            if link.author_id is not None and link.author_id not in authors:
                link.author_id = None
                report.dangling_author_ids += 1
            kept_affs = [a for a in link.affiliation_ids if a in institutions]
            report.dangling_affiliations += len(link.affiliation_ids) - len(kept_affs)
            link.affiliation_ids = kept_affs
        if record.journal_id is not None and record.journal_id not in journals:
            record.journal_id = None
            report.dangling_journals += 1

    dataset = Dataset(papers=papers, authors=authors, institutions=institutions, journals=journals)
    return dataset, report


# ---------------------------------------------------------------------------
# canonical export

def _paper_obj(p: PaperRecord) -> dict:
    obj: dict[str, Any] = {
        "kind": "paper",
        "id": p.paper_id,
        "date": str(p.date),
        "title": p.title,
        "authors": [
            {"id": a.author_id, "affiliations": list(a.affiliation_ids)} for a in p.authors
        ],
        "refs": list(p.references),
        "refs_declared": p.declared_ref_count,
        "published": p.published,
    }
    if p.journal_id is not None:
        obj["journal"] = p.journal_id
    if p.collaboration is not None:
        obj["collaboration"] = p.collaboration
    if p.categories:
        obj["categories"] = list(p.categories)
    return obj


def _author_obj(a: AuthorRecord) -> dict:
    obj: dict[str, Any] = {"kind": "author", "id": a.author_id, "name": a.display_name}
    if a.gender_tag is not None:
        obj["gender"] = a.gender_tag
    return obj


def _institution_obj(i: InstitutionRecord) -> dict:
    obj: dict[str, Any] = {"kind": "institution", "id": i.institution_id, "name": i.name}
    if i.has_coordinates:
        obj["lat"] = i.latitude
        obj["lon"] = i.longitude
    if i.country_code is not None:
        obj["country"] = i.country_code
    if i.continent is not None:
        obj["continent"] = i.continent
    return obj


def dump_record_line(obj: dict) -> str:
    """Serialize one record object in canonical byte-stable form."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def export_canonical(dataset: Dataset, sink) -> None:
    """Write a dataset as canonical JSONL, sorted by kind then id.

    The output is byte-stable: re-exporting an identical dataset yields
    identical bytes, and ``ingest(export_canonical(d))`` reproduces ``d``.
    """
    close = False
    if isinstance(sink, (str, Path)):
        fh: IO[str] = open(sink, "w", encoding="utf-8", newline="\n")
        close = True
    else:
        fh = sink  # any text-mode writable
    try:
        for jid in sorted(dataset.journals):
            fh.write(dump_record_line({"kind": "journal", "id": jid, "name": dataset.journals[jid]}))
        for iid in sorted(dataset.institutions):
            fh.write(dump_record_line(_institution_obj(dataset.institutions[iid])))
        for aid in sorted(dataset.authors):
            fh.write(dump_record_line(_author_obj(dataset.authors[aid])))
        for pid in sorted(dataset.papers):
            fh.write(dump_record_line(_paper_obj(dataset.papers[pid])))
    finally:
        if close:
            fh.close()


def export_canonical_bytes(dataset: Dataset) -> bytes:
    buf = io.StringIO()
    export_canonical(dataset, buf)
    return buf.getvalue().encode("utf-8")
