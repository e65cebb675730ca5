"""Desk-scale disaster graph builder and structural QA checks.

The generator emits a schema-complete synthetic graph (events, declarations,
requests, locations, geofeatures, imagery) that always passes the four QA
checks; the checks themselves are pure pattern counts so corrupted graphs
trip exactly the targeted counter.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from pathlib import Path

from .rdf import Dataset, DKG_GRAPH, Iri, Literal, Quad, lit, lit_bool, lit_int
from .vocab import DM, GEO, IOTREG, PROV, RDF_TYPE

_STATES = [
    "Texas", "Florida", "Louisiana", "California", "Oklahoma",
    "North Carolina", "Missouri", "Iowa", "New York", "Washington",
]
_INCIDENT_TYPES = ["Hurricane", "Flood", "Wildfire", "Tornado", "Severe Storm", "Earthquake"]
_DECLARATION_TYPES = ["DR", "EM", "FM"]
_REQUEST_STATUSES = ["Approved", "Denied", "Pending"]
_PROGRAMS = ["IA", "PA", "HM"]


@dataclass(frozen=True)
class SyntheticConfig:
    """Class counts plus the PII ratio and seed; generation is bit-reproducible."""

    events: int = 50
    declarations: int = 50
    requests: int = 12
    locations: int = 60
    geofeatures: int = 12
    images: int = 500
    pii_ratio: float = 0.3
    geofeature_fraction: float | None = None
    seed: int = 7

    def __post_init__(self) -> None:
        for name in ("events", "declarations", "requests", "locations", "geofeatures", "images"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def effective_geofeatures(self) -> int:
        if self.geofeature_fraction is not None:
            return round(self.events * self.geofeature_fraction)
        return self.geofeatures


@dataclass(frozen=True)
class QaReport:
    events_without_locations: int
    declarations_without_events: int
    derived_images_without_provenance: int
    conflicting_flags: int

    def all_zero(self) -> bool:
        return not any(
            (
                self.events_without_locations,
                self.declarations_without_events,
                self.derived_images_without_provenance,
                self.conflicting_flags,
            )
        )

    def as_dict(self) -> dict[str, int]:
        return {
            "events_without_locations": self.events_without_locations,
            "declarations_without_events": self.declarations_without_events,
            "derived_images_without_provenance": self.derived_images_without_provenance,
            "conflicting_flags": self.conflicting_flags,
        }


def generate_dkg(cfg: SyntheticConfig) -> Dataset:
    """Build a synthetic disaster graph honoring every structural invariant."""
    rng = random.Random(cfg.seed)
    quads: list[Quad] = []
    g = DKG_GRAPH

    def add(s: Iri, p: Iri, o) -> None:
        quads.append(Quad(s, p, o, g))

    locations = []
    for i in range(cfg.locations):
        loc = Iri(DM.base + f"Location_{i:04d}")
        locations.append(loc)
        state = _STATES[i % len(_STATES)]
        add(loc, RDF_TYPE, DM.Location)
        add(loc, DM.placeName, lit(f"{state} County {i:03d}"))
        add(loc, DM.stateName, lit(state))
        add(loc, DM.placeCode, lit_int(48000 + i))
        if i % 7 == 0 and i + 1 < cfg.locations:
            add(loc, DM.contains, Iri(DM.base + f"Location_{i + 1:04d}"))

    programs = []
    if cfg.declarations > 0:  # programs only exist to serve authorizes links
        for name in _PROGRAMS:
            prog = Iri(DM.base + f"Program_{name}")
            programs.append(prog)
            add(prog, RDF_TYPE, DM.Program)

    events = []
    for i in range(cfg.events):
        ev = Iri(DM.base + f"DisasterEvent_{i:04d}")
        events.append(ev)
        year = 2005 + (i % 20)
        add(ev, RDF_TYPE, DM.DisasterEvent)
        add(ev, DM.disasterNumber, lit_int(4000 + i))
        add(ev, DM.incidentType, lit(_INCIDENT_TYPES[i % len(_INCIDENT_TYPES)]))
        add(ev, DM.incidentBeginDate, lit(f"{year}-0{1 + i % 9}-01"))
        add(ev, DM.incidentEndDate, lit(f"{year}-0{1 + i % 9}-15"))
        add(ev, DM.declarationDate, lit(f"{year}-0{1 + i % 9}-05"))
        if locations:
            # Every event must hit at least one location.
            add(ev, DM.occured_in, locations[i % len(locations)])
            if rng.random() < 0.4:
                add(ev, DM.occured_in, locations[(i * 3 + 1) % len(locations)])

    for i in range(cfg.declarations):
        decl = Iri(DM.base + f"Declaration_{i:04d}")
        add(decl, RDF_TYPE, DM.Declaration)
        add(decl, DM.femaDeclarationString, lit(f"DR-{4000 + i}-{_STATES[i % len(_STATES)][:2].upper()}"))
        add(decl, DM.declarationType, lit(_DECLARATION_TYPES[i % len(_DECLARATION_TYPES)]))
        add(decl, DM.declarationDate, lit(f"{2005 + i % 20}-0{1 + i % 9}-05"))
        add(decl, DM.disasterCloseoutDate, lit(f"{2006 + i % 20}-0{1 + i % 9}-01"))
        if events:
            # Every declaration hangs off an event.
            add(events[i % len(events)], DM.has_declaration, decl)
        add(decl, DM.authorizes, programs[i % len(programs)])

    for i in range(cfg.requests):
        req = Iri(DM.base + f"DeclarationRequest_{i:04d}")
        add(req, RDF_TYPE, DM.DeclarationRequest)
        add(req, DM.declarationRequestNumber, lit_int(90000 + i))
        add(req, DM.requestStatus, lit(_REQUEST_STATUSES[i % len(_REQUEST_STATUSES)]))

    n_geo = min(cfg.effective_geofeatures(), len(events)) if events else 0
    for i in range(n_geo):
        geo = Iri(DM.base + f"GeoFeature_{i:04d}")
        lon, lat = -100 + i, 30 + (i % 10)
        add(geo, RDF_TYPE, DM.GeoFeature)
        add(
            geo,
            GEO.asWKT,
            lit(f"POLYGON(({lon} {lat}, {lon + 1} {lat}, {lon + 1} {lat + 1}, {lon} {lat + 1}, {lon} {lat}))"),
        )
        add(geo, DM.hasAreaSqKm, lit(str(round(10 + i * 2.5, 1)), datatype="http://www.w3.org/2001/XMLSchema#decimal"))
        add(geo, DM.describes, events[i])

    for i in range(cfg.images):
        img = Iri(DM.base + f"Image_{i:06d}")
        add(img, RDF_TYPE, DM.Image)
        add(img, RDF_TYPE, IOTREG.Image)
        add(img, DM.fileUrl, lit(f"https://imagery.example.org/uas/{i:06d}.jpg"))
        add(img, DM.captured_time, lit(f"{2005 + i % 20}-0{1 + i % 9}-02T1{i % 10}:00:00Z", datatype="http://www.w3.org/2001/XMLSchema#dateTime"))
        if events:
            add(img, DM.captures, events[i % len(events)])
        if locations:
            add(img, DM.taken_at, locations[i % len(locations)])
        has_pii = rng.random() < cfg.pii_ratio
        add(img, DM.containsPII, lit_bool(has_pii))
        # Flags never conflict: anonymized imagery cannot still carry PII.
        add(img, IOTREG.isAnonymized, lit_bool(not has_pii and rng.random() < 0.5))
        add(img, IOTREG.isEncrypted, lit_bool(False))
        add(img, DM.isRetained, lit_bool(True))

    dataset = Dataset()
    dataset.insert(quads)
    return dataset


# --- QA checks ----------------------------------------------------------------


def _subjects_of_type(d: Dataset, cls: Iri) -> set[Iri]:
    return {q.subject for q in d.quads_for(DKG_GRAPH, predicate=RDF_TYPE, obj=cls) if isinstance(q.subject, Iri)}


def qa_check(d: Dataset) -> QaReport:
    """The four structural checks; each is a pure pattern count."""
    events = _subjects_of_type(d, DM.DisasterEvent)
    events_without_locations = sum(
        1 for ev in events if next(iter(d.quads_for(DKG_GRAPH, subject=ev, predicate=DM.occured_in)), None) is None
    )

    declarations = _subjects_of_type(d, DM.Declaration)
    declared = {q.object for q in d.quads_for(DKG_GRAPH, predicate=DM.has_declaration) if isinstance(q.object, Iri)}
    declarations_without_events = sum(1 for decl in declarations if decl not in declared)

    # A derived image is one carrying a transform marker; it must link back
    # to its original.
    derived = {q.subject for q in d.quads_for(DKG_GRAPH, predicate=DM.transformedBy) if isinstance(q.subject, Iri)}
    derived_images_without_provenance = sum(
        1
        for subj in derived
        if next(iter(d.quads_for(DKG_GRAPH, subject=subj, predicate=PROV.wasDerivedFrom)), None) is None
    )

    conflicting = 0
    for q in d.quads_for(DKG_GRAPH, predicate=IOTREG.isAnonymized, obj=lit_bool(True)):
        if next(iter(d.quads_for(DKG_GRAPH, subject=q.subject, predicate=DM.containsPII, obj=lit_bool(True))), None) is not None:
            conflicting += 1

    return QaReport(
        events_without_locations=events_without_locations,
        declarations_without_events=declarations_without_events,
        derived_images_without_provenance=derived_images_without_provenance,
        conflicting_flags=conflicting,
    )


# --- CSV loading -----------------------------------------------------------------


class CsvLoadError(ValueError):
    """A row broke the mapping contract; nothing was loaded."""


@dataclass(frozen=True)
class CsvMapping:
    """Column mapping for one CSV: class, key column and predicate bindings.

    `columns` maps CSV header names to predicate IRIs (as prefixed names).
    Unmapped columns are ignored. The key column names the individual.
    """

    rdf_class: Iri
    iri_prefix: str
    key_column: str
    columns: dict[str, Iri]
    integer_columns: frozenset[str] = frozenset()

    @staticmethod
    def from_json(obj: dict) -> "CsvMapping":
        from .vocab import expand

        return CsvMapping(
            rdf_class=expand(obj["class"]),
            iri_prefix=obj.get("iri_prefix", DM.base),
            key_column=obj["key_column"],
            columns={k: expand(v) for k, v in obj["columns"].items()},
            integer_columns=frozenset(obj.get("integer_columns", [])),
        )


def load_csv_summaries(path: Path, mapping: CsvMapping) -> Dataset:
    """Map CSV rows onto typed individuals; a missing key aborts the load."""
    quads: list[Quad] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or mapping.key_column not in reader.fieldnames:
            raise CsvLoadError(f"key column {mapping.key_column!r} not in header")
        for index, row in enumerate(reader, start=1):
            key = (row.get(mapping.key_column) or "").strip()
            if not key:
                raise CsvLoadError(f"row {index}: missing key column {mapping.key_column!r}")
            subject = Iri(mapping.iri_prefix + _slug(key))
            quads.append(Quad(subject, RDF_TYPE, mapping.rdf_class, DKG_GRAPH))
            for column, predicate in mapping.columns.items():
                value = (row.get(column) or "").strip()
                if not value:
                    continue
                obj: Literal = lit_int(int(value)) if column in mapping.integer_columns else lit(value)
                quads.append(Quad(subject, predicate, obj, DKG_GRAPH))
    dataset = Dataset()
    dataset.insert(quads)
    return dataset


def _slug(value: str) -> str:
    return "".join(c if c.isalnum() or c in "_-." else "_" for c in value)
