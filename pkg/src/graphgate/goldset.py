"""Builder for the 24-packet gold fixture.

Twenty-four release packets over eighteen scenarios cover every reachable
verdict path: pre-compliant artifacts, transform-then-allow runs, prohibited
shares, missing permissions and the error conditions (missing file, absent
artifact, corrupted input, malformed URI, unknown type). `build_gold_fixture`
writes a self-contained directory: graph dump, policy pack, artifact files,
packet JSONs and the expected-outcome manifest.
"""

from __future__ import annotations

import io
import json
from importlib import resources
from pathlib import Path

from PIL import Image as PilImage

from .jpegseg import COM, insert_segment_after_soi
from .rdf import Dataset, DKG_GRAPH, Iri, Quad, lit, lit_bool
from .vocab import DM, IOTREG, RDF_TYPE

APP1 = 0xE1

# Gold artifact URIs. The derived ones only exist after the runs that
# produce them; P23/P24 re-request those URIs directly.
IMG_RAW = Iri(DM.base + "Image_0a1b2c3d4e5f_2017_Hurricane_Harvey")
IMG_ANON = Iri(DM.base + "Image_26bd9fa01c44_2018_Camp_Fire")
IMG_OVER = Iri(DM.base + "Image_37ce0fb12d55_2012_Hurricane_Sandy")
IMG_NOPII = Iri(DM.base + "Image_48df1ac23e66_2019_Midwest_Floods")
IMG_NULLFLAG = Iri(DM.base + "Image_59e02bd34f77_2020_Oregon_Wildfires")
IMG_NOTRETAINED = Iri(DM.base + "Image_6af13ce45088_2016_Louisiana_Floods")
IMG_MISSINGFILE = Iri(DM.base + "Image_7b024df56199_2021_Hurricane_Ida")
IMG_CORRUPT = Iri(DM.base + "Image_8c135e0672aa_2011_Joplin_Tornado")
IMG_ENCSHARE = Iri(DM.base + "Image_9d246f1783bb_2022_Hurricane_Ian")
IMG_KATRINA = Iri(DM.base + "Image_17dd9ac6cded_2005_Hurricane_Katrina")

REC_RAWPII = Iri(DM.base + "AssistanceFile_ab12cd34ef56")
REC_PREENC = Iri(DM.base + "AssistanceFile_bc23de45f067")
REC_OVER = Iri(DM.base + "AssistanceFile_cd34ef56a178")
REC_ANONPII = Iri(DM.base + "AssistanceFile_de45f067a289")
REC_RETAINED = Iri(DM.base + "AssistanceFile_ef56a178b39a")
FEAT_SENSOR = Iri(DM.base + "SensorFeed_fa67b289c4ab")
REC_ABSENT = Iri(DM.base + "AssistanceFile_00000000dead")  # never inserted

PUBLIC = "policy-ext:PublicAudience"
PARTNER = "policy-ext:PartnerAgency"
INTERNAL = "policy-ext:InternalAudience"
UNKNOWN_AUDIENCE = "http://example.org/audience#UnvettedOutlet"
SHARING = "iot-reg:DataSharing"


def make_jpeg(with_exif: bool = True, with_comment: bool = False, size: int = 16, shade: int = 96) -> bytes:
    """A small true JPEG, optionally with an APP1 Exif and a COM segment."""
    buf = io.BytesIO()
    PilImage.new("RGB", (size, size), (shade, shade // 2, 255 - shade)).save(buf, format="JPEG", quality=90)
    data = buf.getvalue()
    if with_comment:
        data = insert_segment_after_soi(data, COM, b"field capture note")
    if with_exif:
        # Minimal TIFF block: little-endian header, zero-entry IFD.
        tiff = b"II*\x00\x08\x00\x00\x00" + b"\x00\x00" + b"\x00\x00\x00\x00"
        data = insert_segment_after_soi(data, APP1, b"Exif\x00\x00" + tiff)
    return data


def make_corrupt_jpeg() -> bytes:
    """SOI then truncation: parses as JPEG head but fails segment parsing."""
    return b"\xff\xd8\xff\xe0\x00\x10JFIF"


def _artifact_quads() -> list[Quad]:
    g = DKG_GRAPH
    q: list[Quad] = []

    def image(uri: Iri, *, pii=None, anon=None, enc=None, retained=None, personal=False, feature=False, file_url=None):
        q.append(Quad(uri, RDF_TYPE, DM.Image, g))
        q.append(Quad(uri, RDF_TYPE, IOTREG.Image, g))
        if personal:
            q.append(Quad(uri, RDF_TYPE, IOTREG.PersonalData, g))
        if feature:
            q.append(Quad(uri, RDF_TYPE, IOTREG.FeatureOfInterest, g))
        for prop, value in ((DM.containsPII, pii), (IOTREG.isAnonymized, anon), (IOTREG.isEncrypted, enc), (DM.isRetained, retained)):
            if value is not None:
                q.append(Quad(uri, prop, lit_bool(value), g))
        if file_url:
            q.append(Quad(uri, DM.fileUrl, lit(file_url), g))

    def record(uri: Iri, *, pii=None, anon=None, enc=None, retained=None, file_url=None):
        q.append(Quad(uri, RDF_TYPE, IOTREG.PersonalData, g))
        for prop, value in ((DM.containsPII, pii), (IOTREG.isAnonymized, anon), (IOTREG.isEncrypted, enc), (DM.isRetained, retained)):
            if value is not None:
                q.append(Quad(uri, prop, lit_bool(value), g))
        if file_url:
            q.append(Quad(uri, DM.fileUrl, lit(file_url), g))

    # Imagery (exactly ten artifacts typed iot-reg:Image).
    image(IMG_RAW, pii=True, anon=False, enc=False, retained=True, file_url="files/raw_harvey.jpg")
    image(IMG_ANON, pii=False, anon=True, enc=False, retained=True)
    image(IMG_OVER, pii=False, anon=True, enc=True, retained=True)
    image(IMG_NOPII, pii=False, anon=True, retained=True)
    image(IMG_NULLFLAG, file_url="files/nullflag.jpg")
    image(IMG_NOTRETAINED, pii=True, anon=False, retained=False, file_url="files/notretained.jpg")
    image(IMG_MISSINGFILE, pii=True, anon=False, retained=True, file_url="files/ghost.jpg")
    image(IMG_CORRUPT, pii=True, anon=False, retained=True, file_url="files/corrupt.jpg")
    image(IMG_ENCSHARE, pii=True, enc=True, retained=True, personal=True)
    q.append(Quad(IMG_ENCSHARE, IOTREG.usesEncryptionMethod, lit("AES-128-CBC-HMAC (Fernet-compatible)"), g))
    image(IMG_KATRINA, pii=True, anon=False, enc=False, personal=True, file_url="files/katrina_pii.jpg")

    # Tabular assistance records (personal data, not imagery).
    record(REC_RAWPII, pii=True, enc=False, retained=True)
    record(REC_PREENC, pii=True, enc=True, retained=True)
    record(REC_OVER, pii=False, anon=True, enc=True, retained=True)
    record(REC_ANONPII, pii=False, anon=True, retained=True)
    record(REC_RETAINED, pii=True, retained=True, file_url="files/retained_record.csv")

    # A non-image, non-personal artifact for the unknown-type scenario.
    q.append(Quad(FEAT_SENSOR, RDF_TYPE, IOTREG.FeatureOfInterest, g))
    q.append(Quad(FEAT_SENSOR, DM.fileUrl, lit("files/sensor_feed.bin"), g))

    # A slim event/location backbone keeps the fixture QA-clean and gives
    # the single-graph templates something to chew on.
    katrina_ev = Iri(DM.base + "DisasterEvent_1602")
    harvey_ev = Iri(DM.base + "DisasterEvent_4332")
    loc_la = Iri(DM.base + "Location_LA_Orleans")
    loc_tx = Iri(DM.base + "Location_TX_Harris")
    for ev, loc, year, title, state in (
        (katrina_ev, loc_la, "2005", "Hurricane Katrina", "Louisiana"),
        (harvey_ev, loc_tx, "2017", "Hurricane Harvey", "Texas"),
    ):
        q.append(Quad(ev, RDF_TYPE, DM.DisasterEvent, g))
        q.append(Quad(ev, DM.incidentType, lit("Hurricane"), g))
        q.append(Quad(ev, DM.incidentBeginDate, lit(f"{year}-08-23"), g))
        q.append(Quad(ev, DM.occured_in, loc, g))
        q.append(Quad(loc, RDF_TYPE, DM.Location, g))
        q.append(Quad(loc, DM.stateName, lit(state), g))
        decl = Iri(ev.value + "_decl")
        q.append(Quad(decl, RDF_TYPE, DM.Declaration, g))
        q.append(Quad(decl, DM.declarationType, lit("DR"), g))
        q.append(Quad(ev, DM.has_declaration, decl, g))
    q.append(Quad(IMG_KATRINA, DM.captures, katrina_ev, g))
    q.append(Quad(IMG_RAW, DM.captures, harvey_ev, g))
    return q


def gold_dkg() -> Dataset:
    dataset = Dataset()
    dataset.insert(_artifact_quads())
    return dataset


def _packet(artifact: Iri | str, audience: str, data_type: str | None = None, file_url: str | None = None) -> dict:
    packet: dict = {
        "artifact_uri": artifact.value if isinstance(artifact, Iri) else artifact,
        "audience": audience,
        "activity": SHARING,
    }
    if data_type:
        packet["data_type"] = data_type
    if file_url:
        packet["file_url"] = file_url
    return packet


def _expect(initial: str, final: str, transforms: list[str] | None = None, incident: str | None = None, approved: Iri | str | None = None) -> dict:
    # Transforms execute only on the AwT-then-Allow path; the error rows
    # demand a transform but never apply one.
    applied = list(transforms or []) if (initial == AWT and final == "Allow") else []
    return {
        "initial_verdict": initial,
        "final_verdict": final,
        "transforms": transforms or [],
        "applied_transforms": applied,
        "incident": incident is not None,
        "incident_category": incident,
        "approved_artifact": (approved.value if isinstance(approved, Iri) else approved),
    }


AWT = "Allow-with-Transform"


def gold_packets() -> list[dict]:
    """The 24 packets with their expected outcomes, in run order."""
    anon_raw = Iri(IMG_RAW.value + "_anonymized")
    enc_katrina = Iri(IMG_KATRINA.value + "_encrypted")
    return [
        {"id": "P1", "scenario": "Raw image to public", "packet": _packet(IMG_RAW, PUBLIC, file_url="files/raw_harvey.jpg"),
         "expected": _expect(AWT, "Allow", ["strip_exif"], approved=anon_raw)},
        {"id": "P2", "scenario": "Pre-anonymized image", "packet": _packet(IMG_ANON, PUBLIC),
         "expected": _expect("Allow", "Allow", approved=IMG_ANON)},
        {"id": "P3", "scenario": "Raw PII to partner", "packet": _packet(IMG_KATRINA, PARTNER, file_url="files/katrina_pii.jpg"),
         "expected": _expect(AWT, "Allow", ["encrypt_file"], approved=enc_katrina)},
        {"id": "P4", "scenario": "Pre-encrypted PII", "packet": _packet(REC_PREENC, PARTNER),
         "expected": _expect("Allow", "Allow", approved=REC_PREENC)},
        {"id": "P5", "scenario": "PII to public", "packet": _packet(REC_RAWPII, PUBLIC),
         "expected": _expect("Block", "Block", incident="Prohibited_Share")},
        {"id": "P6", "scenario": "No image-to-partner permission", "packet": _packet(IMG_RAW, PARTNER),
         "expected": _expect("Block", "Block")},
        {"id": "P7", "scenario": "Unknown audience, PII", "packet": _packet(REC_RAWPII, UNKNOWN_AUDIENCE),
         "expected": _expect("Block", "Block", incident="Invalid_Audience")},
        {"id": "P8", "scenario": "Missing file", "packet": _packet(IMG_MISSINGFILE, PUBLIC, file_url="files/ghost.jpg"),
         "expected": _expect(AWT, "Block", ["strip_exif"])},
        {"id": "P9", "scenario": "Over-transformed image", "packet": _packet(IMG_OVER, PUBLIC),
         "expected": _expect("Allow", "Allow", approved=IMG_OVER)},
        {"id": "P10", "scenario": "Over-transformed PII", "packet": _packet(REC_OVER, PARTNER),
         "expected": _expect("Allow", "Allow", approved=REC_OVER)},
        {"id": "P11", "scenario": "No PII present", "packet": _packet(IMG_NOPII, PUBLIC),
         "expected": _expect("Allow", "Allow", approved=IMG_NOPII)},
        {"id": "P12", "scenario": "Not in DKG", "packet": _packet(REC_ABSENT, PARTNER, data_type="iot-reg:PersonalData"),
         "expected": _expect("Block", "Block", incident="Other")},
        {"id": "P13", "scenario": "Transform fails", "packet": _packet(IMG_CORRUPT, PUBLIC, file_url="files/corrupt.jpg"),
         "expected": _expect(AWT, "Block", ["strip_exif"])},
        {"id": "P14", "scenario": "Internal audience, PII", "packet": _packet(REC_RAWPII, INTERNAL),
         "expected": _expect("Block", "Block", incident="No_Permission")},
        {"id": "P15", "scenario": "Encrypted image to partner", "packet": _packet(IMG_ENCSHARE, PARTNER),
         "expected": _expect("Allow", "Allow", approved=IMG_ENCSHARE)},
        {"id": "P16", "scenario": "Anonymized PII to public", "packet": _packet(REC_ANONPII, PUBLIC),
         "expected": _expect("Block", "Block", incident="Prohibited_Share")},
        {"id": "P17", "scenario": "Unknown audience, image", "packet": _packet(IMG_RAW, UNKNOWN_AUDIENCE),
         "expected": _expect("Block", "Block")},
        {"id": "P18", "scenario": "Malformed URI", "packet": _packet("not a valid uri", PARTNER, data_type="iot-reg:PersonalData"),
         "expected": _expect("Block", "Block", incident="Other")},
        {"id": "P19", "scenario": "Null compliance flag", "packet": _packet(IMG_NULLFLAG, PUBLIC, file_url="files/nullflag.jpg"),
         "expected": _expect(AWT, "Allow", ["strip_exif"], approved=Iri(IMG_NULLFLAG.value + "_anonymized"))},
        {"id": "P20", "scenario": "Unknown data type", "packet": _packet(FEAT_SENSOR, PUBLIC),
         "expected": _expect("Block", "Block")},
        {"id": "P21", "scenario": "Not retained image", "packet": _packet(IMG_NOTRETAINED, PUBLIC, file_url="files/notretained.jpg"),
         "expected": _expect(AWT, "Allow", ["strip_exif"], approved=Iri(IMG_NOTRETAINED.value + "_anonymized"))},
        {"id": "P22", "scenario": "Multi-obligation PII", "packet": _packet(REC_RETAINED, PARTNER, file_url="files/retained_record.csv"),
         "expected": _expect(AWT, "Allow", ["encrypt_file"], approved=Iri(REC_RETAINED.value + "_encrypted"))},
        {"id": "P23", "scenario": "Re-request derived image", "packet": _packet(anon_raw, PUBLIC),
         "expected": _expect("Allow", "Allow", approved=anon_raw)},
        {"id": "P24", "scenario": "Re-request derived PII", "packet": _packet(enc_katrina, PARTNER),
         "expected": _expect("Allow", "Allow", approved=enc_katrina)},
    ]


def build_gold_fixture(target: Path) -> Path:
    """Write the complete gold fixture directory and return its path."""
    target = Path(target)
    (target / "files").mkdir(parents=True, exist_ok=True)
    (target / "packets").mkdir(parents=True, exist_ok=True)

    (target / "files" / "raw_harvey.jpg").write_bytes(make_jpeg(with_exif=True, with_comment=True, shade=96))
    (target / "files" / "katrina_pii.jpg").write_bytes(make_jpeg(with_exif=True, shade=60))
    (target / "files" / "nullflag.jpg").write_bytes(make_jpeg(with_exif=True, shade=130))
    (target / "files" / "notretained.jpg").write_bytes(make_jpeg(with_exif=True, shade=200))
    (target / "files" / "corrupt.jpg").write_bytes(make_corrupt_jpeg())
    (target / "files" / "retained_record.csv").write_text(
        "registration_id,name,address\nR-1001,J. Doe,121 Canal St\nR-1002,A. Roe,77 Bayou Rd\n", encoding="utf-8"
    )
    (target / "files" / "sensor_feed.bin").write_bytes(b"\x00\x01waterlevel\x02")

    (target / "dkg.nt").write_bytes(gold_dkg().dump_ntriples(DKG_GRAPH))
    pack_text = resources.files("graphgate.fixtures").joinpath("pkg_fema.ttl").read_text(encoding="utf-8")
    (target / "pkg_fema.ttl").write_text(pack_text, encoding="utf-8")

    manifest = []
    for entry in gold_packets():
        packet_file = target / "packets" / f"{entry['id'].lower()}.json"
        packet_file.write_text(json.dumps(entry["packet"], indent=2, sort_keys=True) + "\n", encoding="utf-8")
        manifest.append(
            {
                "id": entry["id"],
                "scenario": entry["scenario"],
                "packet_file": f"packets/{entry['id'].lower()}.json",
                "expected": entry["expected"],
            }
        )
    (target / "expected.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return target
