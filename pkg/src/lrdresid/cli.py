"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 data error.  Every command
that writes files also writes ``<command>_manifest.json``; ``replay`` reruns a
manifest and checks the output digests.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .empproc import estimate_theta, ks_sup, scale_from_theta
from .lrd import Backend, gaussian_family, generate_path, make_spec
from .mc import (RATE_STATISTICS, TABLE1_STATISTICS, X_LAWS, ExperimentConfig, RateStudyConfig,
                 run_rate_study, run_table1)
from .records import DataError, file_digest, read_column, write_records
from .streams import StreamKey, make_stream, named_stream_id
from .sums import sigma_nr_asymptotic

log = logging.getLogger("lrdresid")

OUT_DIR_ENV = "LRDRESID_OUT_DIR"

TABLE1_FIELDS = ["scenario", "statistic", "q1", "q3", "sd", "mean", "reps", "n", "seed", "backend"]
RAW_FIELDS = ["rep", "scenario", "statistic", "sup_value", "argmax_x", "theta_hat", "n", "alpha", "backend"]
RATE_FIELDS = ["n", "reps", "statistic", "dispersion", "slope", "slope_se", "alpha", "backend", "seed"]
CONJ_FIELDS = ["n", "h", "dispersion", "feasible_bias", "feasible_lrd"]


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _names(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _threads(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("threads must be >= 1")
    return v


def _out_dir(args) -> Path:
    d = Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_manifest(out_dir: Path, command: str, argv: list[str], config: dict, seed, outputs, t0) -> Path:
    manifest = {
        "command": command,
        "argv": argv,
        "config": config,
        "seed": seed,
        "version": __version__,
        "outputs": {p.name: file_digest(p) for p in outputs},
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }
    path = out_dir / f"{command}_manifest.json"
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return path


def cmd_table1(args, argv) -> int:
    t0 = time.perf_counter()
    config = ExperimentConfig(
        n=args.n, reps=args.reps, alphas=tuple(args.alphas), include_iid=not args.no_iid,
        backend=args.backend, x_law=args.x_law, statistics=tuple(args.statistics),
        master_seed=args.seed, threads=args.threads,
    )
    result = run_table1(config)
    out_dir = _out_dir(args)
    outputs = write_records(out_dir / "table1.csv", TABLE1_FIELDS, result.rows(), args.json)
    if args.raw:
        outputs += write_records(out_dir / "table1_raw.csv", RAW_FIELDS, result.raw_rows(), args.json)
    params = config.to_dict()
    params["scenarios"] = {name: spec.to_dict() for name, spec in config.scenarios()}
    _write_manifest(out_dir, "table1", argv, params, args.seed, outputs, t0)
    print(f"wrote {len(result.summaries)} summary rows to {outputs[0]}")
    return 0


def cmd_rates(args, argv) -> int:
    t0 = time.perf_counter()
    config = RateStudyConfig(
        alpha=args.alpha, n_grid=tuple(args.n_grid), reps=args.reps,
        statistics=tuple(args.statistics), backend=args.backend, x_law=args.x_law,
        master_seed=args.seed, threads=args.threads, bandwidth_const=args.bandwidth_const,
    )
    results = run_rate_study(config)
    rows = []
    for name, res in results.items():
        for n, d in zip(res.n_grid, res.dispersions):
            rows.append({"n": n, "reps": config.reps, "statistic": name, "dispersion": d,
                         "slope": res.slope, "slope_se": res.slope_se, "alpha": config.alpha,
                         "backend": config.backend, "seed": config.master_seed})
    out_dir = _out_dir(args)
    outputs = write_records(out_dir / "rates.csv", RATE_FIELDS, rows, args.json)
    _write_manifest(out_dir, "rates", argv, config.to_dict(), args.seed, outputs, t0)
    for name, res in results.items():
        print(f"{name:14s} slope {res.slope:+.4f} (se {res.slope_se:.4f})")
    return 0


def cmd_gof(args, argv) -> int:
    t0 = time.perf_counter()
    try:
        sample = np.asarray(read_column(args.input))
    except OSError as exc:
        raise DataError(str(exc)) from None
    n = len(sample)
    report = {"n": n}
    if args.estimate_theta:
        if n < 2:
            raise DataError("estimating theta needs at least two observations")
        theta_sq = estimate_theta(sample)
        if theta_sq == 0.0:
            raise DataError("all observations are zero; cannot estimate a scale")
        theta = scale_from_theta(theta_sq)
        report["theta_hat_sq"] = theta_sq
        report["theta_hat"] = theta
    else:
        theta = args.theta
        report["theta"] = theta
    res = ks_sup(sample, gaussian_family(theta))
    report.update(sup_value=res.sup_value, raw_sup=res.raw_sup, argmax_x=res.argmax_x,
                  scaled_sqrt_n=res.raw_sup / np.sqrt(n))
    if args.alpha is not None:
        report["alpha"] = args.alpha
        report["scaled_sigma_n1"] = res.raw_sup / sigma_nr_asymptotic(args.alpha, n, 1)
        if 2 * args.alpha < 1:
            report["scaled_sigma_n2"] = res.raw_sup / sigma_nr_asymptotic(args.alpha, n, 2)
    if args.json:
        print(json.dumps(report, indent=1))
    else:
        for k, v in report.items():
            print(f"{k:16s} {v:.17g}" if isinstance(v, float) else f"{k:16s} {v}")
    if args.out_dir or os.environ.get(OUT_DIR_ENV):
        out_dir = _out_dir(args)
        path = out_dir / "gof.json"
        path.write_text(json.dumps(report, indent=1) + "\n")
        _write_manifest(out_dir, "gof", argv, {"input": str(args.input)}, None, [path], t0)
    return 0


def cmd_simulate(args, argv) -> int:
    t0 = time.perf_counter()
    if args.n < 1:
        raise ConfigError("n must be >= 1")
    backend = Backend(args.backend)
    if backend is not Backend.IID and args.alpha is None:
        raise ConfigError(f"--alpha is required for backend {backend.value}")
    spec = make_spec(args.alpha, backend, n=args.n, truncation_m=args.truncation)
    stream = make_stream(StreamKey(args.seed, named_stream_id("simulate")))
    path = generate_path(spec, args.n, stream)
    fields = ["epsilon"]
    if path.has_innovations:
        fields.append("eta")
        rows = [{"epsilon": e, "eta": h} for e, h in zip(path.values, path.scaled_innovations())]
    else:
        rows = [{"epsilon": e} for e in path.values]
    out_dir = _out_dir(args)
    outputs = write_records(out_dir / "path.csv", fields, rows, args.json)
    _write_manifest(out_dir, "simulate", argv, {"spec": spec.to_dict(), "n": args.n}, args.seed, outputs, t0)
    print(f"wrote {args.n} rows to {outputs[0]}")
    return 0


def cmd_conjecture(args, argv) -> int:
    from .density import ConjectureConfig, conjecture_diag

    t0 = time.perf_counter()
    config = ConjectureConfig(alpha=args.alpha, n_grid=tuple(args.n_grid), reps=args.reps,
                              h_const=args.h_const, h_exponent=args.h_exponent,
                              master_seed=args.seed, threads=args.threads)
    rows = conjecture_diag(config)
    out_dir = _out_dir(args)
    outputs = write_records(out_dir / "conjecture.csv", CONJ_FIELDS, rows, args.json)
    cfg = dict(vars(config))
    cfg["n_grid"] = list(config.n_grid)
    _write_manifest(out_dir, "conjecture", argv, cfg, args.seed, outputs, t0)
    print("exploratory diagnostic; dispersion of n/sigma_n2 * (fhat(x0) - f(x0))")
    for r in rows:
        print(f"n={r['n']:6d} h={r['h']:.4f} dispersion={r['dispersion']:.4f}")
    return 0


def cmd_replay(args, argv) -> int:
    manifest = json.loads(Path(args.manifest).read_text())
    out_dir = Path(args.out_dir or Path(args.manifest).parent / "replay")
    old = []
    skip = False
    for tok in manifest["argv"]:
        if skip:
            skip = False
        elif tok == "--out-dir":
            skip = True
        elif not tok.startswith("--out-dir="):
            old.append(tok)
    code = main(old + ["--out-dir", str(out_dir)])
    if code:
        return code
    mismatched = [name for name, digest in manifest["outputs"].items()
                  if not (out_dir / name).exists() or file_digest(out_dir / name) != digest]
    if mismatched:
        print(f"replay differs: {', '.join(mismatched)}", file=sys.stderr)
        return 2
    print(f"replay reproduced {len(manifest['outputs'])} file(s) byte-exactly")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lrdresid", description="Residual empirical processes under long memory.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=True, threads=True):
        sp.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or .)")
        sp.add_argument("--json", action="store_true", help="also write JSON records")
        if seed:
            sp.add_argument("--seed", type=_seed, default=0)
        if threads:
            sp.add_argument("--threads", type=_threads, default=1)

    t = sub.add_parser("table1", help="dispersion table of sup statistics")
    t.add_argument("--n", type=int, default=100)
    t.add_argument("--reps", type=int, default=1000)
    t.add_argument("--alphas", type=_floats, default=[0.2, 0.4, 0.6, 0.8])
    t.add_argument("--no-iid", action="store_true", help="skip the i.i.d. scenario")
    t.add_argument("--backend", choices=[b.value for b in Backend], default="fgn")
    t.add_argument("--x-law", choices=X_LAWS, default="uniform_sym")
    t.add_argument("--statistics", type=_names, default=list(TABLE1_STATISTICS))
    t.add_argument("--raw", action="store_true", help="also write per-replication values")
    common(t)
    t.set_defaults(func=cmd_table1)

    r = sub.add_parser("rates", help="log-log rate study over a grid of n")
    r.add_argument("--alpha", type=float, required=True)
    r.add_argument("--n-grid", type=_ints, default=[512, 1024, 2048, 4096, 8192])
    r.add_argument("--reps", type=int, default=200)
    r.add_argument("--statistics", type=_names, default=["Kn", "KnHat"],
                   help=f"comma list from {','.join(RATE_STATISTICS)}")
    r.add_argument("--backend", choices=[b.value for b in Backend], default="ma")
    r.add_argument("--x-law", choices=X_LAWS, default="uniform_sym")
    r.add_argument("--bandwidth-const", type=float, default=1.0)
    common(r)
    r.set_defaults(func=cmd_rates)

    g = sub.add_parser("gof", help="sup statistic of a residual file against a Gaussian")
    g.add_argument("input", type=Path)
    th = g.add_mutually_exclusive_group(required=True)
    th.add_argument("--theta", type=float)
    th.add_argument("--estimate-theta", action="store_true")
    g.add_argument("--alpha", type=float, help="memory parameter for sigma-scaled output")
    common(g, seed=False, threads=False)
    g.set_defaults(func=cmd_gof)

    s = sub.add_parser("simulate", help="write one error path")
    s.add_argument("--alpha", type=float)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--backend", choices=[b.value for b in Backend], default="ma")
    s.add_argument("--truncation", type=int, help="MA lag cutoff (default max(10 n, 10^4))")
    common(s, threads=False)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("conjecture", help="exploratory residual density diagnostic")
    c.add_argument("--alpha", type=float, default=0.3)
    c.add_argument("--n-grid", type=_ints, default=[2048, 4096, 8192])
    c.add_argument("--reps", type=int, default=200)
    c.add_argument("--h-const", type=float, default=1.0)
    c.add_argument("--h-exponent", type=float, default=0.21)
    common(c)
    c.set_defaults(func=cmd_conjecture)

    rp = sub.add_parser("replay", help="rerun a manifest and compare outputs")
    rp.add_argument("manifest", type=Path)
    rp.add_argument("--out-dir")
    rp.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, argv)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
