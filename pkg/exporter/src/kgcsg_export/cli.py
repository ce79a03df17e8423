"""kgcsg-export: write transformer embeddings for a triple file's tokens.

Usage: ``kgcsg-export --triples <path> --model <name> --out <path>
[--batch-size N] [--pooling cls|mean]``. The output conforms to the
main tool's embedding file format, one row per manifest token. Exit
codes: 0 success, 2 triples/write error, 3 model failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .encoder import ModelError, encode_texts, load_encoder
from .manifest import TriplesError, decode_token, read_manifest

log = logging.getLogger("kgcsg_export")


def export_embeddings(
    triples_path: str | Path,
    model_name: str,
    output_path: str | Path,
    batch_size: int = 32,
    pooling: str = "mean",
) -> int:
    """Encode every manifest token and write the embedding file.

    Tokens are percent-decoded before encoding (the model sees the
    original string) and written percent-encoded, matching the triple
    parser. Returns the number of tokens written.
    """
    manifest = read_manifest(triples_path)
    encoder = load_encoder(model_name)
    log.info(
        "encoding %d tokens with %s (dim %d, pooling %s, batch %d)",
        len(manifest),
        model_name,
        encoder.hidden_size,
        pooling,
        batch_size,
    )
    texts = [decode_token(t) for t in manifest.tokens]
    vectors = encode_texts(encoder, texts, batch_size=batch_size, pooling=pooling)
    try:
        with open(output_path, "w", encoding="utf-8") as fh:
            fh.write(f"{len(manifest)} {encoder.hidden_size}\n")
            for token, vec in zip(manifest.tokens, vectors):
                fh.write(token)
                for x in vec:
                    fh.write(" " + repr(float(x)))
                fh.write("\n")
    except OSError as e:
        raise TriplesError(f"cannot write output: {e}") from None
    return len(manifest)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="kgcsg-export",
        description="export token embeddings in the kgcsg embedding file format",
    )
    p.add_argument("--triples", required=True, metavar="PATH")
    p.add_argument("--model", required=True, metavar="NAME",
                   help="encoder model name or local path")
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--batch-size", type=int, default=32, metavar="N")
    p.add_argument("--pooling", choices=("cls", "mean"), default="mean")
    return p


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.batch_size < 1:
        print("kgcsg-export: error: batch size must be >= 1", file=sys.stderr)
        return 2
    try:
        count = export_embeddings(
            args.triples,
            args.model,
            args.out,
            batch_size=args.batch_size,
            pooling=args.pooling,
        )
    except TriplesError as e:
        print(f"kgcsg-export: error: {e}", file=sys.stderr)
        return 2
    except ModelError as e:
        print(f"kgcsg-export: error: {e}", file=sys.stderr)
        return 3
    log.info("wrote %d vectors to %s", count, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
