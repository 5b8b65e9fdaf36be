"""Command line: `sts-exporter export` and `sts-exporter spot-check`."""

from __future__ import annotations

import argparse
import sys

from .encoder import DEFAULT_MODEL_ID
from .export import export, verify_manifest
from .spot_check import spot_check


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sts-exporter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="encode a benchmark split and emit interchange files")
    p.add_argument("--split", default="train",
                   help="benchmark split name, or a path to a local JSONL file")
    p.add_argument("--model-id", default=DEFAULT_MODEL_ID,
                   help="encoder id ('stub:<dim>' for the offline hash encoder)")
    p.add_argument("--out-dir", default="export-out")
    p.add_argument("--batch-size", type=int, default=32)

    p = sub.add_parser("spot-check", help="independent metrics for a pairs file")
    p.add_argument("--input", required=True)

    p = sub.add_parser("verify-manifest", help="re-hash emitted files against the manifest")
    p.add_argument("--out-dir", required=True)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "export":
            manifest = export(args.split, args.model_id, args.out_dir, args.batch_size)
            print(
                f"exported {manifest.n_pairs} pairs (d={manifest.dimension}, "
                f"encoder {manifest.encoder_id}) to {args.out_dir}"
            )
        elif args.command == "spot-check":
            spot_check(args.input)
        else:
            manifest = verify_manifest(args.out_dir)
            print(f"manifest ok: {manifest.n_pairs} pairs, digests match")
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"sts-exporter: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
