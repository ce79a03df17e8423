"""Token manifest extraction from triple TSV files.

Mirrors the main tool's file contract exactly: 3-column TSV, blank lines
allowed, fields trimmed, '%' and internal whitespace percent-encoded.
Tokens are the join key between the two packages, so the encoding here
must match byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from urllib.parse import unquote


class TriplesError(Exception):
    """Unreadable or malformed triple file (exit code 2)."""


def encode_token(raw: str) -> str:
    if not any(ch == "%" or ch.isspace() for ch in raw):
        return raw
    out = []
    for ch in raw:
        if ch == "%" or ch.isspace():
            out.append("".join("%%%02X" % b for b in ch.encode("utf-8")))
        else:
            out.append(ch)
    return "".join(out)


def decode_token(token: str) -> str:
    return unquote(token)


@dataclass
class TokenManifest:
    """Deduplicated tokens in first-appearance order, covering every head,
    relation and tail of the source file."""

    tokens: list[str]

    def __len__(self) -> int:
        return len(self.tokens)


def read_manifest(path: str | Path) -> TokenManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise TriplesError(f"cannot read triples file: {e}") from None
    seen: dict[str, None] = {}
    count = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise TriplesError(
                f"{path}:{lineno}: expected 3 tab-separated fields, got {len(fields)}"
            )
        stripped = [f.strip() for f in fields]
        if any(not f for f in stripped):
            raise TriplesError(f"{path}:{lineno}: empty field in triple")
        count += 1
        for raw in stripped:
            seen.setdefault(encode_token(raw), None)
    if count == 0:
        raise TriplesError(f"{path}: no triples")
    return TokenManifest(tokens=list(seen))
