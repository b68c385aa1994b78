"""Command-line front end.

Subcommands: fit, index, simulate, calibrate, regress, rankplot, series.
Every run writes its primary outputs plus a ``*_manifest.json`` record
(command, inputs, parameters, seed, tool version) so results can be
reproduced exactly; the manifest timestamp is the only non-deterministic
byte in a run's output set.

Asset sizes are read in billions of USD; index values are reported in
trillions here at the CLI layer (the library keeps billions throughout).
On failure a machine-readable error record is printed to stderr as JSON
and the exit code is 1 (argparse usage errors keep their conventional 2).
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import secrets
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import calibrate as calibrate_mod
from . import dataset, kernelreg, prgsim, sbindex, tailfit
from .errors import TailgapError

_YEAR_RE = re.compile(r"(\d{4})")


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _infer_list_year(path: Path, override: int | None) -> int:
    if override is not None:
        return override
    m = _YEAR_RE.search(path.stem)
    if not m:
        raise TailgapError(
            f"cannot infer list year from filename {path.name!r}; pass --list-year")
    return int(m.group(1))


def _load_snapshot_arg(args, path_attr="snapshot") -> dataset.Snapshot:
    path = Path(getattr(args, path_attr))
    year = _infer_list_year(path, getattr(args, "list_year", None))
    snap = dataset.load_snapshot(path, year)
    sector = getattr(args, "sector", "all")
    if sector == "financial":
        classifier = _classifier_from_args(args)
        snap = snap.filter(lambda f: classifier.is_financial(f.industry))
    return snap


def _classifier_from_args(args) -> dataset.SectorClassifier:
    strict = bool(getattr(args, "strict", False))
    path = getattr(args, "classifier", None)
    if path:
        return dataset.load_classifier(path, strict=strict)
    return dataset.SectorClassifier(strict=strict)


def _parse_grid(text: str) -> list[float]:
    """Either 'start:stop:step' (inclusive) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise TailgapError(f"bad grid spec {text!r} (use start:stop[:step])")
        start, stop = float(parts[0]), float(parts[1])
        step = float(parts[2]) if len(parts) == 3 else 1.0
        if step <= 0 or stop < start:
            raise TailgapError(f"bad grid spec {text!r}")
        n = int(round((stop - start) / step))
        return [start + i * step for i in range(n + 1)]
    return [float(t) for t in text.split(",") if t.strip()]


def _load_config_doc(path: str, seed) -> tuple[prgsim.PrgParams, prgsim.SimConfig]:
    """Parse a params+config document; ``seed`` (already resolved) fills in
    or overrides the document's own."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        params = prgsim.PrgParams.from_dict(doc["params"])
        config = prgsim.SimConfig.from_dict(dict(doc["config"], seed=seed))
    except (KeyError, TypeError) as exc:
        raise TailgapError(f"malformed config document {path}: {exc}") from exc
    return params, config


def _document_seed(path: str):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return doc.get("config", {}).get("seed")


def _load_observed_sizes(path: str) -> np.ndarray:
    """Observed top-rank sizes from either a snapshot CSV or a rank/size CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise TailgapError(f"{path}: empty file")
        cols = [c.strip() for c in header]
        if "assets" in cols:
            snap = dataset.load_snapshot(path, list_year=9999)
            return np.asarray(snap.sizes())
        if "size" in cols:
            idx = cols.index("size")
            sizes = [float(row[idx]) for row in reader if row]
            return np.sort(np.asarray(sizes))[::-1]
    raise TailgapError(f"{path}: expected a snapshot CSV or a rank,size CSV")


def _load_comparison(path: str) -> dict[int, float]:
    """External comparison series (`year,value_trillions`)."""
    out: dict[int, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "year" not in reader.fieldnames \
                or "value_trillions" not in reader.fieldnames:
            raise TailgapError(f"{path}: expected header year,value_trillions")
        for row in reader:
            out[int(row["year"])] = float(row["value_trillions"])
    return out


def _write_manifest(prefix: Path, command: str, inputs: dict, params: dict,
                    seed, outputs: list[str]) -> None:
    manifest = {
        "command": command,
        "tool_version": __version__,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "seed": seed,
        "inputs": inputs,
        "params": params,
        "outputs": outputs,
    }
    path = Path(f"{prefix}_manifest.json")
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _resolve_seed(args, config_seed=None):
    """Single source of randomness: --seed wins, then the config document,
    then a freshly drawn seed (recorded in the manifest either way)."""
    if getattr(args, "seed", None) is not None:
        return args.seed
    if config_seed is not None:
        return config_seed
    return secrets.randbits(63)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_fit(args) -> int:
    snap = _load_snapshot_arg(args)
    prefix = Path(args.out or f"{Path(args.snapshot).stem}_fit")
    if args.dry_run:
        print(json.dumps({"dry_run": True, "command": "fit", "ok": True}))
        return 0
    points = tailfit.empirical_ccdf(snap.sizes())
    if args.smin is None or args.smax is None:
        s_minus, s_plus = tailfit.suggest_range(points)
    else:
        s_minus, s_plus = args.smin, args.smax
    fit = tailfit.fit_pareto(points, s_minus, s_plus)

    payload = dict(fit.to_dict(), list_year=snap.list_year, sector=args.sector)
    _write_json(Path(f"{prefix}.json"), payload)
    tailfit.write_ccdf_csv(points, f"{prefix}_ccdf.csv")
    _write_manifest(prefix, "fit",
                    inputs={"snapshot": str(args.snapshot)},
                    params={"smin": s_minus, "smax": s_plus, "sector": args.sector,
                            "list_year": snap.list_year},
                    seed=None,
                    outputs=[f"{prefix}.json", f"{prefix}_ccdf.csv"])
    print(f"gamma_hat={fit.gamma_hat:.4f} (se {fit.se_gamma:.4g}) "
          f"over [{s_minus:g}, {s_plus:g}], {fit.n_points} points -> {prefix}.json")
    return 0


def _cmd_index(args) -> int:
    snap = _load_snapshot_arg(args)
    prefix = Path(args.out or f"{Path(args.snapshot).stem}_index")
    if args.dry_run:
        print(json.dumps({"dry_run": True, "command": "index", "ok": True}))
        return 0
    points = tailfit.empirical_ccdf(snap.sizes())
    fit = tailfit.fit_pareto(points, args.smin, args.smax)
    result = sbindex.compute_index(snap, fit, n_top=args.ntop)

    payload = {
        "list_year": snap.list_year,
        "gamma_hat": fit.gamma_hat,
        "i_sb": result.i_sb / 1000.0,  # trillions at the CLI layer
        "band_low": result.band_low / 1000.0,
        "band_high": result.band_high / 1000.0,
        "n_top": result.n_top,
    }
    _write_json(Path(f"{prefix}.json"), payload)
    sbindex.write_rank_gaps_csv(result, f"{prefix}_ranks.csv")
    _write_manifest(prefix, "index",
                    inputs={"snapshot": str(args.snapshot)},
                    params={"smin": args.smin, "smax": args.smax,
                            "ntop": args.ntop, "sector": args.sector,
                            "units": "trillion_usd"},
                    seed=None,
                    outputs=[f"{prefix}.json", f"{prefix}_ranks.csv"])
    print(f"i_sb={payload['i_sb']:.3f}T in [{payload['band_low']:.3f}, "
          f"{payload['band_high']:.3f}] (gamma_hat={fit.gamma_hat:.4f}) -> {prefix}.json")
    return 0


def _cmd_simulate(args) -> int:
    seed = _resolve_seed(args, _document_seed(args.config))
    params, config = _load_config_doc(args.config, seed)
    prefix = Path(args.out or f"{Path(args.config).stem}_sim")
    if args.dry_run:
        print(json.dumps({"dry_run": True, "command": "simulate", "ok": True}))
        return 0
    result = prgsim.simulate(params, config, backend=args.backend)

    prgsim.write_sizes_csv(result, f"{prefix}_sizes.csv")
    summary = {
        "shed_total": result.shed_total,
        "n_entries": result.n_entries,
        "n_exits": result.n_exits,
        "n_sheds": result.n_sheds,
        "n_final": result.n_final,
        "largest": float(result.sizes_top[0]),
    }
    _write_json(Path(f"{prefix}.json"), summary)
    _write_manifest(prefix, "simulate",
                    inputs={"config": str(args.config)},
                    params={"params": params.to_dict(),
                            "config": config.to_dict(),
                            "backend": args.backend},
                    seed=seed if isinstance(seed, int) else list(seed),
                    outputs=[f"{prefix}_sizes.csv", f"{prefix}.json"])
    print(f"simulated {result.n_final} firms, {result.n_sheds} sheddings, "
          f"shed_total={result.shed_total:.4g} -> {prefix}_sizes.csv")
    return 0


def _cmd_calibrate(args) -> int:
    seed = _resolve_seed(args, _document_seed(args.config))
    params, config = _load_config_doc(args.config, seed)
    observed = _load_observed_sizes(args.observed)
    if args.epsilon is not None:
        params = prgsim.PrgParams.from_dict(
            dict(params.to_dict(), epsilon=args.epsilon))
    grid = _parse_grid(args.grid)
    prefix = Path(args.out or f"{Path(args.observed).stem}_calibration")
    if args.dry_run:
        print(json.dumps({"dry_run": True, "command": "calibrate", "ok": True,
                          "grid_size": len(grid)}))
        return 0
    result = calibrate_mod.calibrate_lambda(
        params, config, observed, grid,
        n_replicas=args.replicas, n_top=args.ntop, n_jobs=args.jobs,
        backend=args.backend)

    _write_json(Path(f"{prefix}.json"), result.to_dict())
    calibrate_mod.write_objective_csv(result, f"{prefix}_objective.csv")
    _write_manifest(prefix, "calibrate",
                    inputs={"config": str(args.config), "observed": str(args.observed)},
                    params={"grid": grid, "replicas": args.replicas,
                            "epsilon": params.epsilon, "ntop": args.ntop,
                            "params": params.to_dict(), "config": config.to_dict(),
                            "backend": args.backend},
                    seed=seed if isinstance(seed, int) else list(seed),
                    outputs=[f"{prefix}.json", f"{prefix}_objective.csv"])
    print(f"lambda_hat={result.lambda_hat:g} (flux {result.flux:.3g}/y) "
          f"-> {prefix}.json")
    return 0


def _cmd_regress(args) -> int:
    snap = _load_snapshot_arg(args)
    prefix = Path(args.out or f"{Path(args.snapshot).stem}_{args.mode}_curve")
    if args.dry_run:
        print(json.dumps({"dry_run": True, "command": "regress", "ok": True}))
        return 0
    bandwidth = "auto" if args.bandwidth == "auto" else float(args.bandwidth)
    if args.mode == "roa":
        sample = kernelreg.returns_on_assets(snap)
        curve = kernelreg.nw_regress(sample.x, sample.y, bandwidth=bandwidth,
                                     grid_size=args.grid_size)
        n_dropped = sample.n_dropped
    else:  # growth
        if not args.prev:
            raise TailgapError("regress --mode growth requires --prev SNAPSHOT")
        prev_path = Path(args.prev)
        prev = dataset.load_snapshot(
            prev_path, _infer_list_year(prev_path, None))
        curve = kernelreg.conditional_growth_curve(
            prev, snap, bandwidth=bandwidth, grid_size=args.grid_size)
        n_dropped = 0

    kernelreg.write_curve_csv(curve, f"{prefix}.csv")
    _write_manifest(prefix, "regress",
                    inputs={"snapshot": str(args.snapshot),
                            **({"prev": str(args.prev)} if args.prev else {})},
                    params={"mode": args.mode, "bandwidth": args.bandwidth,
                            "bandwidth_resolved": curve.bandwidth,
                            "grid_size": args.grid_size, "n_dropped": n_dropped},
                    seed=None,
                    outputs=[f"{prefix}.csv"])
    print(f"curve on {curve.grid.size} grid points "
          f"(bandwidth {curve.bandwidth:.4g}) -> {prefix}.csv")
    return 0


def _cmd_rankplot(args) -> int:
    snap = _load_snapshot_arg(args)
    classifier = _classifier_from_args(args)
    prefix = Path(args.out or f"{Path(args.snapshot).stem}_rankplot")
    if args.dry_run:
        print(json.dumps({"dry_run": True, "command": "rankplot", "ok": True}))
        return 0
    with open(f"{prefix}.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "name", "size", "sector"])
        for rank, firm in enumerate(snap.sorted_firms(), start=1):
            sector = "financial" if classifier.is_financial(firm.industry) \
                else "non_financial"
            writer.writerow([rank, firm.name, _fmt(firm.assets), sector])
    _write_manifest(prefix, "rankplot",
                    inputs={"snapshot": str(args.snapshot)},
                    params={"list_year": snap.list_year},
                    seed=None,
                    outputs=[f"{prefix}.csv"])
    print(f"{len(snap.firms)} ranked firms -> {prefix}.csv")
    return 0


def _load_ranges(path: str) -> dict[int, tuple[float, float]]:
    out: dict[int, tuple[float, float]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"list_year", "smin", "smax"}
        if reader.fieldnames is None or not need.issubset(reader.fieldnames):
            raise TailgapError(f"{path}: expected header list_year,smin,smax")
        for row in reader:
            out[int(row["list_year"])] = (float(row["smin"]), float(row["smax"]))
    return out


def _cmd_series(args) -> int:
    prefix = Path(args.out or "series")
    ranges = _load_ranges(args.ranges) if args.ranges else {}
    compare = _load_comparison(args.compare) if args.compare else None
    snaps = []
    for path_str in args.snapshots:
        path = Path(path_str)
        snap = dataset.load_snapshot(path, _infer_list_year(path, None))
        snaps.append(snap)
    snaps.sort(key=lambda s: s.list_year)
    if args.dry_run:
        print(json.dumps({"dry_run": True, "command": "series", "ok": True,
                          "years": [s.list_year for s in snaps]}))
        return 0

    header = ["list_year", "gamma_hat", "se_gamma", "s_minus", "s_plus",
              "i_sb", "band_low", "band_high"]
    if compare is not None:
        header.append("compare")
    rows = []
    for snap in snaps:
        points = tailfit.empirical_ccdf(snap.sizes())
        if snap.list_year in ranges:
            s_minus, s_plus = ranges[snap.list_year]
        else:
            s_minus, s_plus = tailfit.suggest_range(points)
        fit = tailfit.fit_pareto(points, s_minus, s_plus)
        ntop = min(args.ntop, len(snap.firms))
        result = sbindex.compute_index(snap, fit, n_top=ntop)
        row = [snap.list_year, _fmt(fit.gamma_hat), _fmt(fit.se_gamma),
               _fmt(s_minus), _fmt(s_plus), _fmt(result.i_sb / 1000.0),
               _fmt(result.band_low / 1000.0), _fmt(result.band_high / 1000.0)]
        if compare is not None:
            value = compare.get(snap.list_year)
            row.append("" if value is None else _fmt(value))
        rows.append(row)

    with open(f"{prefix}.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    _write_manifest(prefix, "series",
                    inputs={"snapshots": list(args.snapshots),
                            **({"compare": args.compare} if args.compare else {}),
                            **({"ranges": args.ranges} if args.ranges else {})},
                    params={"ntop": args.ntop, "units": "trillion_usd"},
                    seed=None,
                    outputs=[f"{prefix}.csv"])
    print(f"{len(rows)} years -> {prefix}.csv")
    return 0


# ---------------------------------------------------------------------------
# parser and dispatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailgap",
        description="Interrupted power-law analytics for firm-size lists.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seeded=False):
        p.add_argument("-o", "--out", help="output path prefix")
        p.add_argument("--dry-run", action="store_true",
                       help="validate inputs and flags, write nothing")
        if seeded:
            p.add_argument("--seed", type=int,
                           help="master seed (default: drawn and recorded)")

    def add_snapshot_flags(p, sector=True):
        p.add_argument("snapshot", help="snapshot CSV")
        p.add_argument("--list-year", type=int,
                       help="override the list year inferred from the filename")
        p.add_argument("--classifier", help="financial-industry override file")
        p.add_argument("--strict", action="store_true",
                       help="error on industries outside the financial list")
        if sector:
            p.add_argument("--sector", choices=["all", "financial"], default="all")

    p = sub.add_parser("fit", help="CCDF + power-law exponent fit")
    add_snapshot_flags(p)
    p.add_argument("--smin", type=float, help="fit range lower edge (billions)")
    p.add_argument("--smax", type=float, help="fit range upper edge (billions)")
    add_common(p)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("index", help="missing-mass index with confidence band")
    add_snapshot_flags(p)
    p.add_argument("--smin", type=float, required=True)
    p.add_argument("--smax", type=float, required=True)
    p.add_argument("--ntop", type=int, default=1000)
    add_common(p)
    p.set_defaults(func=_cmd_index)

    p = sub.add_parser("simulate", help="run the growth model")
    p.add_argument("--config", required=True, help="params+config JSON document")
    p.add_argument("--backend", choices=["auto", "cython", "numpy"], default="auto")
    add_common(p, seeded=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("calibrate", help="grid-calibrate the shedding rate")
    p.add_argument("--config", required=True, help="params+config JSON document")
    p.add_argument("--observed", required=True,
                   help="observed sizes (snapshot CSV or rank,size CSV)")
    p.add_argument("--grid", required=True,
                   help="candidate rates: start:stop[:step] or comma list")
    p.add_argument("--replicas", type=int, default=100)
    p.add_argument("--epsilon", type=float, help="override the shed fraction")
    p.add_argument("--ntop", type=int, default=1000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--backend", choices=["auto", "cython", "numpy"], default="auto")
    add_common(p, seeded=True)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("regress", help="kernel regression diagnostics")
    add_snapshot_flags(p, sector=True)
    p.add_argument("--mode", choices=["roa", "growth"], default="roa")
    p.add_argument("--prev", help="prior-year snapshot (growth mode)")
    p.add_argument("--bandwidth", default="auto")
    p.add_argument("--grid-size", type=int, default=100)
    add_common(p)
    p.set_defaults(func=_cmd_regress)

    p = sub.add_parser("rankplot", help="rank-size CSV with sector labels")
    add_snapshot_flags(p, sector=False)
    add_common(p)
    p.set_defaults(func=_cmd_rankplot)

    p = sub.add_parser("series", help="per-year exponent and index table")
    p.add_argument("snapshots", nargs="+", help="snapshot CSVs, year in filename")
    p.add_argument("--ranges", help="per-year fit ranges CSV (list_year,smin,smax)")
    p.add_argument("--ntop", type=int, default=1000)
    p.add_argument("--compare", help="external comparison CSV (year,value_trillions)")
    add_common(p)
    p.set_defaults(func=_cmd_series)

    return parser


def dispatch(argv) -> int:
    """Parse and run; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles usage errors itself
        return int(exc.code or 0)
    try:
        return args.func(args)
    except TailgapError as exc:
        record = {"error": {"module": exc.module, "message": str(exc)}}
        print(json.dumps(record), file=sys.stderr)
        return 1
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        record = {"error": {"module": "cli", "message": str(exc)}}
        print(json.dumps(record), file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
