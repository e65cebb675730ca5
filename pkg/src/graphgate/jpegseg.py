"""JPEG segment-level parsing and rewriting.

Works at the marker-segment layer only (no entropy decoding), so dropping
metadata segments leaves the compressed pixel data byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

SOI = 0xD8
EOI = 0xD9
SOS = 0xDA
APP0 = 0xE0
APP1 = 0xE1
COM = 0xFE

_STANDALONE = {0x01} | set(range(0xD0, 0xD8))  # TEM and RST0-7


class JpegError(ValueError):
    """The byte stream is not a well-formed JPEG."""


@dataclass(frozen=True)
class Segment:
    """One marker segment, or raw entropy-coded scan data (marker is None)."""

    marker: int | None
    raw: bytes


def parse_segments(data: bytes) -> list[Segment]:
    """Split a JPEG byte stream into segments; raises JpegError if truncated."""
    if len(data) < 4 or data[0] != 0xFF or data[1] != SOI:
        raise JpegError("missing SOI marker")
    segments: list[Segment] = [Segment(SOI, data[0:2])]
    pos = 2
    while True:
        if pos + 2 > len(data):
            raise JpegError("truncated before EOI")
        if data[pos] != 0xFF:
            raise JpegError(f"expected marker at offset {pos}")
        marker = data[pos + 1]
        if marker == EOI:
            segments.append(Segment(EOI, data[pos : pos + 2]))
            pos += 2
            if pos < len(data):
                # Trailing bytes after EOI are preserved verbatim.
                segments.append(Segment(None, data[pos:]))
            return segments
        if marker in _STANDALONE:
            segments.append(Segment(marker, data[pos : pos + 2]))
            pos += 2
            continue
        if pos + 4 > len(data):
            raise JpegError("truncated segment header")
        length = int.from_bytes(data[pos + 2 : pos + 4], "big")
        if length < 2:
            raise JpegError(f"bad segment length at offset {pos}")
        end = pos + 2 + length
        if end > len(data):
            raise JpegError("segment extends past end of file")
        segments.append(Segment(marker, data[pos:end]))
        pos = end
        if marker == SOS:
            scan_start = pos
            while True:
                if pos + 1 >= len(data):
                    raise JpegError("truncated scan data")
                if data[pos] == 0xFF and data[pos + 1] != 0x00 and data[pos + 1] not in _STANDALONE:
                    break
                pos += 1
            if pos > scan_start:
                segments.append(Segment(None, data[scan_start:pos]))


def rebuild(segments: list[Segment]) -> bytes:
    return b"".join(s.raw for s in segments)


def strip_metadata_segments(data: bytes) -> tuple[bytes, int]:
    """Drop every APP1 (Exif/XMP) and COM segment.

    Returns the rewritten stream and the number of bytes removed. Pixel
    data, APP0, quantization and huffman tables all pass through untouched.
    """
    segments = parse_segments(data)
    kept = [s for s in segments if s.marker not in (APP1, COM)]
    out = rebuild(kept)
    return out, len(data) - len(out)


def count_segments(data: bytes, marker: int) -> int:
    return sum(1 for s in parse_segments(data) if s.marker == marker)


def insert_segment_after_soi(data: bytes, marker: int, payload: bytes) -> bytes:
    """Insert a new marker segment directly after SOI (fixture tooling)."""
    segments = parse_segments(data)
    raw = bytes([0xFF, marker]) + (len(payload) + 2).to_bytes(2, "big") + payload
    return rebuild([segments[0], Segment(marker, raw), *segments[1:]])
