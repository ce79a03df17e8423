"""Command-line interface.

Subcommands: ``csg`` (single run), ``sweep`` (M x k grid), ``correlate``
(CSG vs. MRR join), ``stats`` (dataset counts). Exit codes: 0 success,
1 config error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import correlate as corr
from . import pipeline, reports, triples
from .errors import ConfigError, KgcsgError


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; map those to config errors
    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got '{text}'") from None


def _add_dataset_args(p: argparse.ArgumentParser, with_name: bool = True) -> None:
    p.add_argument("--triples", nargs="+", required=True, metavar="PATH",
                   help="triple TSV files (splits are concatenated in order)")
    if with_name:
        p.add_argument("--name", help="dataset label (default: derived from paths)")


def _add_run_args(p: argparse.ArgumentParser, sweep: bool) -> None:
    _add_dataset_args(p)
    p.add_argument("--embeddings", metavar="PATH",
                   help="embedding file (mutually exclusive with --hash-dim)")
    p.add_argument("--hash-dim", type=int, metavar="D",
                   help="use the deterministic hash embedder at this dimension")
    p.add_argument("--hash-seed", type=int, default=0, metavar="S")
    if sweep:
        p.add_argument("--m", type=_int_list, default=[120], metavar="M1,M2,...",
                       help="sample caps per class (default 120)")
        p.add_argument("--k", type=_int_list, default=[50], metavar="K1,K2,...",
                       help="neighbor counts (default 50)")
    else:
        p.add_argument("--m", type=int, default=120, help="sample cap per class")
        p.add_argument("--k", type=int, default=50, help="neighbor count")
    p.add_argument("--kc", type=int, default=None,
                   help="optional eigenvalue cutoff for a partial CSG")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--normalize-embeddings", action="store_true",
                   help="L2-normalize token vectors before composing")
    p.add_argument("--include-self", action="store_true",
                   help="let a query count itself among its neighbors")
    p.add_argument("--no-symmetrize", action="store_true",
                   help="skip symmetrization and use the general eigensolver on I - S")
    p.add_argument("--min-pairs", type=int, default=1,
                   help="drop classes with fewer pairs")
    p.add_argument("--max-classes", type=int, default=None,
                   help="keep only the largest N classes")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", metavar="PATH", default=None,
                   help="output path (default: stdout)")
    p.add_argument("--format", choices=reports.FORMATS, default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="kgcsg",
        description="Cumulative Spectral Gradient complexity for KG tail prediction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_csg = sub.add_parser("csg", help="single CSG run")
    _add_run_args(p_csg, sweep=False)
    _add_output_args(p_csg)
    p_csg.add_argument("--dump-similarity", metavar="PATH",
                       help="also write the raw similarity matrix as CSV")
    p_csg.add_argument("--dump-spectrum", metavar="PATH",
                       help="also write the eigenvalues, one per line")

    p_sweep = sub.add_parser("sweep", help="CSG over an M x k grid")
    _add_run_args(p_sweep, sweep=True)
    _add_output_args(p_sweep)

    p_corr = sub.add_parser("correlate", help="join CSG reports with MRR metrics")
    p_corr.add_argument("reports", nargs="+", metavar="REPORT.json",
                        help="CSG reports produced by 'csg --format json'")
    p_corr.add_argument("--metrics", required=True, metavar="CSV",
                        help="metrics file with header dataset,model,mrr")
    _add_output_args(p_corr)

    p_stats = sub.add_parser("stats", help="dataset statistics")
    _add_dataset_args(p_stats, with_name=False)
    _add_output_args(p_stats)
    return parser


def _config_from_args(args: argparse.Namespace, sweep: bool) -> pipeline.RunConfig:
    return pipeline.RunConfig(
        triples=list(args.triples),
        embeddings_path=args.embeddings,
        hash_dim=args.hash_dim,
        hash_seed=args.hash_seed,
        m=args.m if not sweep else 1,
        k=args.k if not sweep else 1,
        k_c=args.kc,
        seed=args.seed,
        normalize_embeddings=args.normalize_embeddings,
        include_self=args.include_self,
        symmetrize=not args.no_symmetrize,
        min_pairs=args.min_pairs,
        max_classes=args.max_classes,
        dataset_name=args.name,
    )


def _emit(report: reports.Report, args: argparse.Namespace) -> None:
    if args.out is None or args.out == "-":
        reports.emit_report(report, args.format, sys.stdout)
    else:
        reports.emit_report(report, args.format, Path(args.out))


def run(argv: list[str] | None = None) -> None:
    args = build_parser().parse_args(argv)
    if args.command == "csg":
        config = _config_from_args(args, sweep=False)
        report = pipeline.run_csg(
            config,
            dump_similarity=args.dump_similarity,
            dump_spectrum=args.dump_spectrum,
        )
        _emit(report, args)
    elif args.command == "sweep":
        config = _config_from_args(args, sweep=True)
        grid = pipeline.run_sweep(config, m_values=args.m, k_values=args.k)
        _emit(grid, args)
    elif args.command == "correlate":
        csg_reports = [reports.load_csg_report(p) for p in args.reports]
        report = corr.correlate_with_metrics(csg_reports, args.metrics)
        _emit(report, args)
    elif args.command == "stats":
        ts = triples.parse_triple_files(args.triples)
        _emit(triples.dataset_stats(ts), args)


def main(argv: list[str] | None = None) -> int:
    try:
        run(argv)
    except KgcsgError as e:
        print(f"kgcsg: error: {e}", file=sys.stderr)
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
