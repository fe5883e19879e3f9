"""Command-line front end: simulate path batches, run verification suites,
and benchmark methods, with reproducible seeds and CSV/JSON output.

Exit codes: 0 success, 2 usage error (including invalid process/method
combinations), 3 numerical failure (e.g. indefinite circulant embedding).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .core import (
    DEFAULT_SEED,
    GridSpec,
    ParameterError,
    ReplicateBatch,
    RngStream,
    generate_batch,
)
from .covmodels import make_kernel
from .lamperti import error_bound_diagnostics, marginal_variance_profile, simulate_lamperti
from .samplers import (
    MA_DEFAULT_SUBSTEPS,
    MA_DEFAULT_TRUNCATION,
    MAX_DOUBLINGS,
    EmbeddingError,
    NotPositiveDefiniteError,
    cholesky_sample,
    davies_harte_fbm,
    ma_truncated_fbm,
    sample_bm,
    wood_chan_fbm,
)
from .verify import covariance_match, method_equivalence, normality_check

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

VALID_COMBINATIONS = {
    "bm": {"bm-cumsum"},
    "fbm": {"cholesky", "davies-harte", "circulant", "ma-truncated", "lamperti"},
    "sfbm": {"cholesky", "lamperti"},
}

SUITES = ("marginals", "covariance", "normality", "equivalence", "error-bound")

_DEFAULTS = {
    "process": "fbm",
    "method": "davies-harte",
    "hurst": 0.5,
    "n": 256,
    "paths": 1,
    "seed": None,
    "out": None,
    "format": "csv",
    "truncation": MA_DEFAULT_TRUNCATION,
    "substeps": MA_DEFAULT_SUBSTEPS,
    "embedding_cap": MAX_DOUBLINGS,
    "suite": "marginals",
    "baseline": "cholesky",
}


class UsageError(Exception):
    pass


def _read_config(path: str) -> dict:
    """Plain key=value config file; '#' starts a comment."""
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"bad config line: {raw.strip()!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


def _resolve(args: argparse.Namespace, key: str, cast=None):
    """Precedence: command-line flag > config file > defaults."""
    value = getattr(args, key, None)
    if value is None:
        value = getattr(args, "_config", {}).get(key)
    if value is None:
        value = _DEFAULTS[key]
    if value is not None and cast is not None:
        value = cast(value)
    return value


def _resolve_seed(args: argparse.Namespace) -> int:
    seed = _resolve(args, "seed")
    if seed is None:
        seed = os.environ.get("SELFSIM_SEED")
    if seed is None:
        seed = DEFAULT_SEED
    return int(seed)


def _build_sampler(process, method, hurst, n, truncation, substeps, embedding_cap):
    if method not in VALID_COMBINATIONS.get(process, set()):
        raise UsageError(f"method {method!r} is not valid for process {process!r}")
    grid = GridSpec(n)
    if method == "bm-cumsum":
        return lambda rng: sample_bm(grid, rng)
    if method == "cholesky":
        kernel = make_kernel(process, hurst)
        return lambda rng: cholesky_sample(kernel, grid, rng)
    if method == "davies-harte":
        return lambda rng: davies_harte_fbm(grid, hurst, rng)
    if method == "circulant":
        return lambda rng: wood_chan_fbm(grid, hurst, rng, max_doublings=embedding_cap)
    if method == "ma-truncated":
        return lambda rng: ma_truncated_fbm(
            grid, hurst, rng, truncation=truncation, substeps=substeps
        )
    if method == "lamperti":
        return lambda rng: simulate_lamperti(process, hurst, grid, rng)
    raise UsageError(f"unknown method {method!r}")


def _open_out(out):
    if out is None:
        return sys.stdout, False
    return open(out, "w", newline=""), True


def _write_csv(batch: ReplicateBatch, stream) -> None:
    n = batch.n
    stream.write("path_id,t,value\n")
    for i, path in enumerate(batch.paths):
        stream.write(f"{i},0.0,0.0\n")
        for j, value in enumerate(path.values, start=1):
            stream.write(f"{i},{j / n!r},{float(value)!r}\n")


def _write_json(batch: ReplicateBatch, meta: dict, stream) -> None:
    payload = {
        "meta": {**meta, "artifact_version": __version__},
        "paths": [[0.0] + [float(v) for v in path.values] for path in batch.paths],
    }
    json.dump(payload, stream, indent=2)
    stream.write("\n")


def cmd_simulate(args: argparse.Namespace) -> int:
    process = _resolve(args, "process")
    method = _resolve(args, "method")
    hurst = _resolve(args, "hurst", float)
    n = _resolve(args, "n", int)
    paths = _resolve(args, "paths", int)
    seed = _resolve_seed(args)
    out = _resolve(args, "out")
    fmt = _resolve(args, "format")
    truncation = _resolve(args, "truncation", float)
    substeps = _resolve(args, "substeps", int)
    embedding_cap = _resolve(args, "embedding_cap", int)
    if fmt not in ("csv", "json"):
        raise UsageError(f"unknown format {fmt!r}")

    sampler = _build_sampler(process, method, hurst, n, truncation, substeps, embedding_cap)
    batch = generate_batch(sampler, paths, seed)
    stream, close = _open_out(out)
    try:
        if fmt == "csv":
            _write_csv(batch, stream)
        else:
            meta = {
                "process": process,
                "method": method,
                "hurst": hurst,
                "n": n,
                "paths": paths,
                "seed": seed,
                "format": fmt,
            }
            if method == "ma-truncated":
                meta.update(truncation=truncation, substeps=substeps)
            _write_json(batch, meta, stream)
    finally:
        if close:
            stream.close()
    return EXIT_OK


def _error_bound_report(n_values, hurst) -> dict:
    diag = error_bound_diagnostics(n_values, hurst)
    first, last = diag["entries"][0], diag["entries"][-1]
    # rate confirmation against log(n)/n with 50% slack
    expected_ratio = (np.log(last["n"]) / last["n"]) / (np.log(first["n"]) / first["n"])
    rate_ok = last["a"] / first["a"] < expected_ratio * 1.5
    verdict = diag["a_decreasing"] and diag["b_decreasing"] and rate_ok
    return {
        "check": "error-bound",
        "method": "lamperti",
        "process": "any",
        "hurst": hurst,
        "n": int(last["n"]),
        "m_replicates": 0,
        "verdict": "pass" if verdict else "fail",
        "worst_deviation": diag["c1_fitted"],
        "tolerance": diag["c1_fitted"],
        "details": diag["entries"],
    }


def cmd_verify(args: argparse.Namespace) -> int:
    suite = _resolve(args, "suite")
    process = _resolve(args, "process")
    method = _resolve(args, "method")
    hurst = _resolve(args, "hurst", float)
    paths = _resolve(args, "paths", int)
    seed = _resolve_seed(args)
    out = _resolve(args, "out")
    truncation = _resolve(args, "truncation", float)
    substeps = _resolve(args, "substeps", int)
    embedding_cap = _resolve(args, "embedding_cap", int)
    n_raw = str(_resolve(args, "n"))
    n_values = [int(part) for part in n_raw.split(",")]
    n = n_values[0]

    if suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")

    reports: list[dict] = []
    if suite == "error-bound":
        reports.append(_error_bound_report(n_values, hurst))
    else:
        sampler = _build_sampler(
            process, method, hurst, n, truncation, substeps, embedding_cap
        )
        batch = generate_batch(sampler, paths, seed)
        if suite == "marginals":
            reports.append(marginal_variance_profile(batch, process, hurst).to_dict())
        elif suite == "covariance":
            kernel = make_kernel("fbm" if process == "bm" else process, hurst)
            reports.append(covariance_match(batch, kernel).to_dict())
        elif suite == "normality":
            for node in sorted({max(1, n // 4), max(1, n // 2), n}):
                reports.append(normality_check(batch, node).to_dict())
        elif suite == "equivalence":
            baseline = _resolve(args, "baseline")
            base_sampler = _build_sampler(
                process, baseline, hurst, n, truncation, substeps, embedding_cap
            )
            base_batch = generate_batch(base_sampler, paths, seed + 1)
            diagonal_only = "lamperti" in (method, baseline)
            reports.append(
                method_equivalence(batch, base_batch, diagonal_only=diagonal_only).to_dict()
            )

    stream, close = _open_out(out)
    try:
        json.dump(reports if len(reports) > 1 else reports[0], stream, indent=2)
        stream.write("\n")
    finally:
        if close:
            stream.close()
    all_pass = all(r["verdict"] == "pass" for r in reports)
    return EXIT_OK if all_pass else 1


def cmd_bench(args: argparse.Namespace) -> int:
    process = _resolve(args, "process")
    hurst = _resolve(args, "hurst", float)
    seed = _resolve_seed(args)
    out = _resolve(args, "out")
    fmt = _resolve(args, "format")
    paths = _resolve(args, "paths", int)
    truncation = _resolve(args, "truncation", float)
    substeps = _resolve(args, "substeps", int)
    embedding_cap = _resolve(args, "embedding_cap", int)
    methods = str(_resolve(args, "method")).split(",")
    n_values = [int(part) for part in str(_resolve(args, "n")).split(",")]

    rows = []
    for method in methods:
        previous = None
        for n in n_values:
            sampler = _build_sampler(
                process, method, hurst, n, truncation, substeps, embedding_cap
            )
            sampler(RngStream(seed, 0))  # warmup: builds cached spectra/factors
            count = max(3, paths)
            start = time.perf_counter()
            generate_batch(sampler, count, seed)
            elapsed = time.perf_counter() - start
            per_path = elapsed / count
            row = {
                "method": method,
                "n": n,
                "paths": count,
                "seconds_per_path": per_path,
                "seconds_per_batch": elapsed,
                "ratio_vs_previous_n": (per_path / previous) if previous else None,
            }
            previous = per_path
            rows.append(row)

    stream, close = _open_out(out)
    try:
        if fmt == "json":
            json.dump(rows, stream, indent=2)
            stream.write("\n")
        else:
            stream.write("method,n,paths,seconds_per_path,seconds_per_batch,ratio_vs_previous_n\n")
            for r in rows:
                ratio = "" if r["ratio_vs_previous_n"] is None else repr(r["ratio_vs_previous_n"])
                stream.write(
                    f"{r['method']},{r['n']},{r['paths']},"
                    f"{r['seconds_per_path']!r},{r['seconds_per_batch']!r},{ratio}\n"
                )
    finally:
        if close:
            stream.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selfsim",
        description="Simulate and verify self-similar Gaussian process paths.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--process", choices=("bm", "fbm", "sfbm"))
        p.add_argument("--method")
        p.add_argument("--hurst", type=float)
        p.add_argument("--n")
        p.add_argument("--paths", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--truncation", type=float)
        p.add_argument("--substeps", type=int)
        p.add_argument("--embedding-cap", dest="embedding_cap", type=int)
        p.add_argument("--config")

    p_sim = sub.add_parser("simulate", help="write a batch of sample paths")
    add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_ver = sub.add_parser("verify", help="run a statistical verification suite")
    add_common(p_ver)
    p_ver.add_argument("--suite", choices=SUITES)
    p_ver.add_argument("--baseline")
    p_ver.set_defaults(func=cmd_verify)

    p_bench = sub.add_parser("bench", help="time methods across grid sizes")
    add_common(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args._config = _read_config(args.config) if args.config else {}
        return args.func(args)
    except (UsageError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EmbeddingError, NotPositiveDefiniteError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
