"""Registry of deterministic file transforms: EXIF stripping and encryption.

A transform maps an input path to a new output path plus a success flag and
a metadata map. Transforms never mutate their input and never leave partial
output behind on failure.
"""

from __future__ import annotations

import base64
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from cryptography.hazmat.primitives import hashes, hmac, padding
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .jpegseg import JpegError, strip_metadata_segments

ENCRYPTION_SCHEME = "AES-128-CBC-HMAC (Fernet-compatible)"


class UnknownTransformError(KeyError):
    """A pipeline referenced a transform name that is not registered."""


@dataclass
class TransformContext:
    """Ambient configuration for a transform run.

    `fernet_key`, `fernet_iv` and `fernet_time` pin the encryption output for
    reproducible tests; production runs leave them unset and get a fresh
    random key and IV per artifact.
    """

    key_dir: Path
    artifact_id: str = "artifact"
    fernet_key: bytes | None = None
    fernet_iv: bytes | None = None
    fernet_time: int | None = None


@dataclass(frozen=True)
class TransformResult:
    output_path: Path | None
    success: bool
    metadata: dict[str, str] = field(default_factory=dict)


TransformFn = Callable[[Path, TransformContext], TransformResult]


# --- Fernet-compatible token construction -----------------------------------
#
# Token layout: 0x80 | 64-bit big-endian timestamp | 16-byte IV |
# AES-128-CBC ciphertext (PKCS7) | HMAC-SHA256 over everything before it.
# The 32-byte urlsafe-base64 key splits into signing key (first half) and
# encryption key (second half), matching the Fernet specification so any
# standard Fernet implementation can decrypt the output.


def generate_key() -> bytes:
    return base64.urlsafe_b64encode(os.urandom(32))


def fernet_encrypt(key: bytes, plaintext: bytes, iv: bytes | None = None, timestamp: int | None = None) -> bytes:
    material = base64.urlsafe_b64decode(key)
    if len(material) != 32:
        raise ValueError("Fernet key must decode to 32 bytes")
    signing_key, enc_key = material[:16], material[16:]
    iv = iv if iv is not None else os.urandom(16)
    if len(iv) != 16:
        raise ValueError("IV must be 16 bytes")
    ts = int(time.time()) if timestamp is None else int(timestamp)

    padder = padding.PKCS7(128).padder()
    padded = padder.update(plaintext) + padder.finalize()
    enc = Cipher(algorithms.AES(enc_key), modes.CBC(iv)).encryptor()
    ciphertext = enc.update(padded) + enc.finalize()

    body = b"\x80" + ts.to_bytes(8, "big") + iv + ciphertext
    mac = hmac.HMAC(signing_key, hashes.SHA256())
    mac.update(body)
    return base64.urlsafe_b64encode(body + mac.finalize())


def fernet_decrypt(key: bytes, token: bytes) -> bytes:
    """Decrypt and authenticate a token (verification helper and CLI use)."""
    from cryptography.fernet import Fernet

    return Fernet(key).decrypt(token)


# --- transforms ---------------------------------------------------------------


def strip_exif(path: Path, ctx: TransformContext) -> TransformResult:
    """Remove APP1 and COM segments from a JPEG without re-encoding.

    The output decodes to pixel data identical to the input. Non-JPEG or
    truncated input fails without producing an output file.
    """
    out_path = path.with_name(f"{path.stem}_anonymized{path.suffix or '.jpg'}")
    try:
        data = path.read_bytes()
    except OSError as exc:
        return TransformResult(None, False, {"error": f"unreadable input: {exc}"})
    try:
        cleaned, removed = strip_metadata_segments(data)
    except JpegError as exc:
        return TransformResult(None, False, {"error": str(exc)})
    out_path.write_bytes(cleaned)
    return TransformResult(out_path, True, {"bytes_removed": str(removed)})


def encrypt_file(path: Path, ctx: TransformContext) -> TransformResult:
    """Encrypt a file under an authenticated symmetric scheme.

    The key lands in a separate key file (`<artifact-id>.key` under the
    configured key directory), never next to the ciphertext. If the key file
    cannot be written the ciphertext is removed again.
    """
    out_path = path.with_name(f"{path.stem}_encrypted{path.suffix}")
    try:
        plaintext = path.read_bytes()
    except OSError as exc:
        return TransformResult(None, False, {"error": f"unreadable input: {exc}"})
    key = ctx.fernet_key if ctx.fernet_key is not None else generate_key()
    token = fernet_encrypt(key, plaintext, iv=ctx.fernet_iv, timestamp=ctx.fernet_time)
    out_path.write_bytes(token)
    key_file = ctx.key_dir / f"{ctx.artifact_id}.key"
    try:
        ctx.key_dir.mkdir(parents=True, exist_ok=True)
        key_file.write_bytes(key)
    except OSError as exc:
        out_path.unlink(missing_ok=True)
        return TransformResult(None, False, {"error": f"key store write failed: {exc}"})
    return TransformResult(
        out_path,
        True,
        {"scheme": ENCRYPTION_SCHEME, "key_file": str(key_file)},
    )


_REGISTRY: dict[str, TransformFn] = {
    "strip_exif": strip_exif,
    "encrypt_file": encrypt_file,
}


def registered_transform_names() -> frozenset[str]:
    return frozenset(_REGISTRY)


def get_transform(name: str) -> TransformFn:
    fn = _REGISTRY.get(name)
    if fn is None:
        raise UnknownTransformError(name)
    return fn


def register_transform(name: str, fn: TransformFn) -> None:
    """Register a pluggable transform. Intended for startup time only."""
    _REGISTRY[name] = fn


@dataclass(frozen=True)
class PipelineResult:
    final_path: Path | None
    success: bool
    steps: tuple[tuple[str, TransformResult], ...]


def run_pipeline(transforms: list[str], path: Path, ctx: TransformContext) -> PipelineResult:
    """Apply transforms in order; the first failure aborts the whole run.

    No partial output survives a failure: every intermediate file produced
    by earlier steps is deleted before reporting.
    """
    for name in transforms:
        if name not in _REGISTRY:
            raise UnknownTransformError(name)
    steps: list[tuple[str, TransformResult]] = []
    produced: list[Path] = []
    current = path
    for name in transforms:
        result = _REGISTRY[name](current, ctx)
        steps.append((name, result))
        if not result.success or result.output_path is None:
            for leftover in produced:
                leftover.unlink(missing_ok=True)
            return PipelineResult(None, False, tuple(steps))
        produced.append(result.output_path)
        current = result.output_path
    return PipelineResult(current, True, tuple(steps))
