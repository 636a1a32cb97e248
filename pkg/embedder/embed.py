#!/usr/bin/env python3
"""Embed sentences or keyword terms into a binary interchange file pair.

Reads either a sentences JSONL file (one ``{"id": ..., "text": ...}``
object per line) or, with ``--mode terms``, a plain term list (one term
per line, the term doubling as its row id), encodes the texts with a
Sentence Transformers model, and writes:

* ``<out>.json`` — header: ``count``, ``dim``, ``dtype`` (``"f32le"``),
  ``l2_normalized``, ``ids`` (row order = input order), plus
  ``model_id`` and ``revision`` for provenance;
* ``<out>.bin`` — the row-major little-endian float32 matrix.

The pair is exactly what the analysis toolkit's ``analyze topics`` verb
consumes via ``--emb`` / ``--term-emb``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

logger = logging.getLogger("embed")

DEFAULT_MODEL = "sentence-transformers/all-mpnet-base-v2"
#: Pinned revision of the default model, recorded in the output header.
DEFAULT_REVISION = "bd44305"
DTYPE_TAG = "f32le"


class InputError(ValueError):
    """Bad input file; the message carries the 1-based line number."""

    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def read_sentences(path: str | Path) -> tuple[list[str], list[str]]:
    """Parse a sentences JSONL file into parallel (ids, texts) lists."""
    ids: list[str] = []
    texts: list[str] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(line_no, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict) or "id" not in record or "text" not in record:
                raise InputError(line_no, "expected an object with 'id' and 'text'")
            rid = str(record["id"])
            if rid in seen:
                raise InputError(line_no, f"duplicate id {rid!r}")
            seen.add(rid)
            ids.append(rid)
            texts.append(str(record["text"]))
    return ids, texts


def read_terms(path: str | Path) -> tuple[list[str], list[str]]:
    """Parse a term list (one term per line); each term is its own id."""
    ids: list[str] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            term = line.strip()
            if not term:
                continue
            if term in seen:
                raise InputError(line_no, f"duplicate term {term!r}")
            seen.add(term)
            ids.append(term)
    return ids, list(ids)


def _is_oom(exc: BaseException) -> bool:
    if isinstance(exc, MemoryError):
        return True
    return isinstance(exc, RuntimeError) and "out of memory" in str(exc).lower()


def encode_texts(encoder, texts: list[str], batch_size: int, normalize: bool) -> np.ndarray:
    """Encode texts, halving the batch size and retrying once on OOM."""

    def run(size: int) -> np.ndarray:
        return encoder.encode(
            texts,
            batch_size=size,
            normalize_embeddings=normalize,
            convert_to_numpy=True,
            show_progress_bar=False,
        )

    try:
        rows = run(batch_size)
    except Exception as exc:
        if not _is_oom(exc) or batch_size <= 1:
            raise
        retry = max(1, batch_size // 2)
        logger.warning("encoder ran out of memory; retrying once with batch %d", retry)
        rows = run(retry)
    return np.ascontiguousarray(rows, dtype="<f4")


def write_interchange(
    stem: str | Path,
    ids: list[str],
    rows: np.ndarray,
    *,
    normalized: bool,
    model_id: str,
    revision: str | None,
) -> tuple[Path, Path]:
    """Write ``<stem>.json`` + ``<stem>.bin`` and return both paths."""
    stem = Path(stem)
    header_path = stem.with_suffix(".json")
    bin_path = stem.with_suffix(".bin")
    header = {
        "count": len(ids),
        "dim": int(rows.shape[1]),
        "dtype": DTYPE_TAG,
        "l2_normalized": bool(normalized),
        "ids": list(ids),
        "model_id": model_id,
        "revision": revision,
    }
    stem.parent.mkdir(parents=True, exist_ok=True)
    header_path.write_text(json.dumps(header, ensure_ascii=False), encoding="utf-8")
    bin_path.write_bytes(rows.tobytes())
    return header_path, bin_path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed.py",
        description="Embed sentences (or terms) into a .json/.bin interchange pair.",
    )
    parser.add_argument(
        "--in",
        dest="input",
        required=True,
        metavar="PATH",
        help="sentences JSONL ({'id', 'text'} per line); with --mode terms, one term per line",
    )
    parser.add_argument(
        "--out",
        required=True,
        metavar="STEM",
        help="output stem; writes STEM.json and STEM.bin",
    )
    parser.add_argument(
        "--model",
        default=DEFAULT_MODEL,
        help=f"Sentence Transformers model id or local path (default: {DEFAULT_MODEL})",
    )
    parser.add_argument(
        "--revision",
        default=None,
        help="model revision to load and record (defaults to the pinned "
        "revision for the default model, otherwise unrecorded)",
    )
    parser.add_argument("--batch", type=int, default=64, help="encoder batch size")
    parser.add_argument("--mode", choices=("sentences", "terms"), default="sentences")
    parser.add_argument("--device", default="cpu", help="torch device (default: cpu)")
    parser.add_argument(
        "--no-normalize",
        dest="normalize",
        action="store_false",
        help="skip L2 normalization of the output rows",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    if args.batch < 1:
        print("error: --batch must be >= 1", file=sys.stderr)
        return 2
    revision = args.revision
    if revision is None and args.model == DEFAULT_MODEL:
        revision = DEFAULT_REVISION

    reader = read_terms if args.mode == "terms" else read_sentences
    try:
        ids, texts = reader(args.input)
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        return 2
    if not ids:
        print(f"error: no texts found in {args.input}", file=sys.stderr)
        return 2

    from sentence_transformers import SentenceTransformer  # deferred: heavy import

    kwargs: dict = {"device": args.device}
    if revision is not None:
        kwargs["revision"] = revision
    encoder = SentenceTransformer(args.model, **kwargs)
    rows = encode_texts(encoder, texts, args.batch, args.normalize)
    header_path, bin_path = write_interchange(
        args.out,
        ids,
        rows,
        normalized=args.normalize,
        model_id=args.model,
        revision=revision,
    )
    print(f"wrote {len(ids)} x {rows.shape[1]} embeddings to {header_path} + {bin_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
