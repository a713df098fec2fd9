"""Command-line interface.

Subcommands: ``cluster``, ``evaluate``, ``verify``, ``height``, ``balance``.
Results go to stdout as JSON (or TSV where asked); logs go to stderr at the
level named by ``HAC_LOG`` (error, info or debug).

Exit codes: 0 success, 1 verification divergence, 2 invalid flags or input
combination, 3 I/O or file-format error, 4 algorithmic error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from typing import List, Optional

import numpy as np

from . import __version__
from .chamfer import ChamferVariant
from .dendrogram import balance_score, height
from .engine import run_hac
from .geometry import BaseMetric, Dataset
from .io import (FormatError, load_dataset, load_dendrogram, load_labels, save_binary,
                 save_dendrogram)
from .linkages import LINKAGES, make_backend
from .metrics import METRICS, evaluate_dendrogram
from .oracle import DEFAULT_CAP, oracle_hac

log = logging.getLogger("chamfer_hac")

EXIT_DIVERGED = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_ALGO = 4


TRADEOFF_LINKAGES = (ChamferVariant.CH.value, ChamferVariant.CHN.value)


def _setup_logging() -> None:
    level = {"error": logging.ERROR, "info": logging.INFO,
             "debug": logging.DEBUG}.get(os.environ.get("HAC_LOG", "info").lower(), logging.INFO)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(level)
    log.propagate = False


def _threads(value: str) -> int:
    if value == "max":
        return os.cpu_count() or 1
    try:
        k = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer or 'max', got {value!r}")
    if k < 1:
        raise argparse.ArgumentTypeError("threads must be >= 1")
    return k


def _positive(value: str) -> int:
    try:
        k = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {value!r}")
    if k < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return k


def _int_list(value: str) -> List[int]:
    try:
        out = [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}")
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("values must be positive integers")
    return out


def _header(value: str) -> Optional[bool]:
    return {"auto": None, "yes": True, "no": False}[value]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chamfer-hac",
        description="Hierarchical agglomerative clustering with Chamfer and classical linkages.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster a dataset and write a dendrogram TSV")
    p.add_argument("--input", required=True, help="dataset (.csv, or HACD binary)")
    p.add_argument("--linkage", default="chamfer", choices=LINKAGES)
    p.add_argument("--metric", default="euclidean", choices=[m.value for m in BaseMetric])
    p.add_argument("--output", required=True, help="dendrogram TSV to write")
    p.add_argument("--tradeoff-t", type=_positive, default=None,
                   help="store rows only for clusters of size >= T (chamfer, chamfer-n)")
    p.add_argument("--threads", type=_threads, default="max",
                   help="workers for the distance matrix (default: all cores)")
    p.add_argument("--header", type=_header, default="auto", metavar="{auto,yes,no}",
                   help="CSV header row (default: auto)")
    p.add_argument("--label-column", default=None,
                   help="CSV column (index or header name) holding labels, excluded from features")
    p.add_argument("--check", action="store_true",
                   help="rescan all nearest-neighbour pointers after each merge (slow)")

    p = sub.add_parser("evaluate", help="best ARI/NMI/AMI/FMI over three exposure orders")
    p.add_argument("--dendrogram", required=True)
    p.add_argument("--labels", required=True,
                   help="label CSV (one column, or see --label-column) or HACD binary")
    p.add_argument("--label-column", default=None)
    p.add_argument("--labels-header", action="store_true", help="label CSV has a header row")
    p.add_argument("--metrics", default=",".join(METRICS))
    p.add_argument("--format", default="json", choices=["json", "tsv"])
    p.add_argument("--ami-exact", action="store_true", help="score AMI at every cut")

    p = sub.add_parser("verify", help="fuzz fast backends against the brute-force oracle")
    p.add_argument("--seeds", type=_positive, default=100)
    p.add_argument("--max-n", type=_positive, default=128)
    p.add_argument("--ns", type=_int_list, default=[5, 16, 50, 128],
                   help="instance sizes (those above --max-n are dropped)")
    p.add_argument("--dims", type=_int_list, default=[1, 2, 8])
    p.add_argument("--linkages", default=",".join(LINKAGES))
    p.add_argument("--tradeoff-ts", default="1,2,sqrt,n",
                   help="thresholds for the trade-off backend: integers, 'sqrt' or 'n'")
    p.add_argument("--metric", default="euclidean", choices=[m.value for m in BaseMetric])
    p.add_argument("--repro-dir", default="verify-repro")

    p = sub.add_parser("height", help="dendrogram heights")
    p.add_argument("dendrograms", nargs="+")

    p = sub.add_parser("balance", help="height balance score per method")
    p.add_argument("--heights", required=True,
                   help='JSON: {"dataset": {"method": height, ...}, ...} or a list of such maps')
    return parser


def cmd_cluster(args) -> int:
    try:
        ds = load_dataset(args.input, args.header, args.label_column)
    except (OSError, FormatError) as exc:
        log.error("cannot read %s: %s", args.input, exc)
        return EXIT_IO
    log.info("loaded %s: n=%d d=%d", args.input, ds.n, ds.d)
    try:
        backend = make_backend(args.linkage, args.metric, args.tradeoff_t, args.threads)
        start = time.perf_counter()
        dg = run_hac(ds, backend, check=args.check)
        seconds = time.perf_counter() - start
    except (ValueError, MemoryError, AssertionError) as exc:
        log.error("clustering failed: %s", exc)
        return EXIT_ALGO
    try:
        save_dendrogram(dg, args.output)
    except OSError as exc:
        log.error("cannot write %s: %s", args.output, exc)
        return EXIT_IO
    summary = {
        "n": ds.n,
        "d": ds.d,
        "linkage": args.linkage,
        "seconds": seconds,
        "peak-entry-count": int(backend.peak_entries),
        "dendrogram-height": height(dg),
    }
    print(json.dumps(summary))
    return 0


def cmd_evaluate(args) -> int:
    metrics = [m.strip().lower() for m in args.metrics.split(",") if m.strip()]
    unknown = [m for m in metrics if m not in METRICS]
    if unknown or not metrics:
        log.error("unknown metrics: %s", ",".join(unknown) or "(none)")
        return EXIT_USAGE
    try:
        dg = load_dendrogram(args.dendrogram)
    except (OSError, FormatError) as exc:
        log.error("cannot read %s: %s", args.dendrogram, exc)
        return EXIT_IO
    try:
        truth = load_labels(args.labels, args.label_column, args.labels_header)
    except OSError as exc:
        log.error("cannot read %s: %s", args.labels, exc)
        return EXIT_IO
    except FormatError as exc:
        log.error("no usable labels in %s: %s", args.labels, exc)
        return EXIT_USAGE
    if truth.shape[0] != dg.n:
        log.error("dendrogram has n=%d but %d labels were read", dg.n, truth.shape[0])
        return EXIT_USAGE
    try:
        report = evaluate_dendrogram(dg, truth, metrics, ami_exact=args.ami_exact)
    except ValueError as exc:
        log.error("evaluation failed: %s", exc)
        return EXIT_ALGO
    sys.stdout.write(report.to_json() + "\n" if args.format == "json" else report.to_tsv())
    return 0


def _thresholds(text: str, n: int) -> List[int]:
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        if tok == "sqrt":
            out.append(math.isqrt(n - 1) + 1)  # ceil(sqrt(n))
        elif tok == "n":
            out.append(n)
        else:
            out.append(int(tok))
    return sorted({min(max(t, 1), n) for t in out})


def _same_merges(fast, ref, rel: float = 1e-9) -> Optional[str]:
    for i, (a, b) in enumerate(zip(fast.merges, ref.merges)):
        if (a.left, a.right, a.size) != (b.left, b.right, b.size):
            return f"merge {i}: ({a.left},{a.right}) vs ({b.left},{b.right})"
        if abs(a.cost - b.cost) > rel * max(abs(b.cost), 1e-300):
            return f"merge {i}: cost {a.cost!r} vs {b.cost!r}"
    return None


def _instance(seed: int, n: int, d: int) -> Dataset:
    rng = np.random.default_rng([seed, n, d])
    return Dataset(rng.normal(size=(n, d)), name=f"seed{seed}-n{n}-d{d}")


def _write_repro(args, ds: Dataset, info: dict) -> str:
    os.makedirs(args.repro_dir, exist_ok=True)
    base = os.path.join(args.repro_dir, f"{info['linkage']}-{ds.name}")
    save_binary(ds, base + ".hacd")
    with open(base + ".json", "w", encoding="utf-8") as fh:
        json.dump({**info, "dataset": base + ".hacd"}, fh, indent=2)
    return base + ".json"


def cmd_verify(args) -> int:
    if args.max_n > DEFAULT_CAP:
        log.error("--max-n %d exceeds the oracle cap of %d", args.max_n, DEFAULT_CAP)
        return EXIT_USAGE
    linkages = [x.strip() for x in args.linkages.split(",") if x.strip()]
    bad = [x for x in linkages if x not in LINKAGES]
    if bad:
        log.error("unknown linkages: %s", ",".join(bad))
        return EXIT_USAGE
    try:
        _thresholds(args.tradeoff_ts, 2)
    except ValueError:
        log.error("bad --tradeoff-ts %r", args.tradeoff_ts)
        return EXIT_USAGE
    ns = [n for n in args.ns if n <= args.max_n] or [args.max_n]
    metric = BaseMetric(args.metric)
    if metric is not BaseMetric.EUCLIDEAN:
        linkages = [x for x in linkages if x not in ("centroid", "ward")]
    checked = 0
    start = time.perf_counter()
    for seed in range(args.seeds):
        for n in ns:
            for d in args.dims:
                ds = _instance(seed, n, d)
                for name in linkages:
                    info = {"linkage": name, "seed": seed, "n": n, "d": d,
                            "metric": metric.value}
                    try:
                        ref = oracle_hac(ds, name, metric)
                        fast = run_hac(ds, make_backend(name, metric))
                        why = _same_merges(fast, ref)
                        if why is None and name in TRADEOFF_LINKAGES:
                            for t in _thresholds(args.tradeoff_ts, n):
                                alt = run_hac(ds, make_backend(name, metric, tradeoff_t=t))
                                if alt.merges != fast.merges:
                                    info["tradeoff_t"] = t
                                    why = _same_merges(alt, fast, rel=0.0) or "dendrograms differ"
                                    break
                    except (ValueError, AssertionError) as exc:
                        why = f"error: {exc}"
                    checked += 1
                    if why is not None:
                        info["divergence"] = why
                        path = _write_repro(args, ds, info)
                        log.error("divergence: %s (repro %s)", why, path)
                        print(json.dumps({"status": "fail", "checked": checked,
                                          "repro": path, **info}))
                        return EXIT_DIVERGED
    print(json.dumps({"status": "pass", "checked": checked,
                      "seconds": time.perf_counter() - start}))
    return 0


def cmd_height(args) -> int:
    out = {}
    for path in args.dendrograms:
        try:
            out[path] = height(load_dendrogram(path))
        except (OSError, FormatError) as exc:
            log.error("cannot read %s: %s", path, exc)
            return EXIT_IO
    print(json.dumps(out))
    return 0


def cmd_balance(args) -> int:
    try:
        with open(args.heights, encoding="utf-8") as fh:
            table = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        log.error("cannot read %s: %s", args.heights, exc)
        return EXIT_IO
    if isinstance(table, dict) and not all(isinstance(v, (int, float)) for v in table.values()):
        table = list(table.values())
    try:
        scores = balance_score(table)
    except (ValueError, TypeError, AttributeError) as exc:
        log.error("bad height table: %s", exc)
        return EXIT_USAGE
    print(json.dumps(scores))
    return 0


COMMANDS = {
    "cluster": cmd_cluster,
    "evaluate": cmd_evaluate,
    "verify": cmd_verify,
    "height": cmd_height,
    "balance": cmd_balance,
}


def main(argv: Optional[List[str]] = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
