"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 a checked property
failed (ratio cap exceeded, margin violation, partition deviation, ...).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import CatalogError, function_catalog
from .config import ConfigError, ExperimentConfig, RunManifest, parse_list
from .extremal import ConstructionError, RangeError, line_transfer, rho, verify_lower
from .harness import (
    WITNESS_COLUMNS,
    BernsteinConfig,
    SweepConfig,
    WitnessError,
    bernstein_sweep,
    converse_witness,
    lift,
    random_witnesses,
    sweep,
    trial_pair,
)
from .lpdecomp import decompose, partition_deviation
from .serialize import save_matrix
from .trig import TrigPolynomial, sup_norm

__all__ = ["run", "main", "build_parser"]

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file whose keys override the flags")
    p.add_argument("--out", help="output file (or directory for decompose/report)")


def _add_ensemble(p: argparse.ArgumentParser) -> None:
    p.add_argument("--class", dest="kind", help="selfadjoint | unitary | normal | contraction | tuple")
    p.add_argument("--dim", help="dimension or comma list")
    p.add_argument("--p", help="Schatten exponent(s), comma list")
    p.add_argument("--l", help="'full' or comma list of truncation indices")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--cap", type=float)
    p.add_argument("--delta-min", type=float)
    p.add_argument("--delta-max", type=float)
    p.add_argument("--modes", help="comma list of perturbation modes")
    p.add_argument("--rank", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="svbounds", description="Singular-value perturbation experiments")
    parser.add_argument("--version", action="version", version=f"svbounds {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("check-partition", help="check the dyadic partition of unity")
    _add_common(p)
    p.add_argument("--maxfreq", type=int)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("decompose", help="Littlewood-Paley bands of a trigonometric polynomial")
    _add_common(p)
    p.add_argument("--input", help="JSON list of [k, re, im]")
    p.add_argument("--f", help="catalog function instead of --input")
    p.add_argument("--levels", type=int)

    p = sub.add_parser("verify-upper", help="empirical constants of the upper bound")
    _add_common(p)
    _add_ensemble(p)
    p.add_argument("--j", help="comma list of singular value indices")
    p.add_argument("--omega", help="modulus, e.g. power:0.5 or JSON")
    p.add_argument("--f", help="catalog function (default power_abs(alpha))")
    p.add_argument("--grid", dest="grid_size", type=int)
    p.add_argument("--maxdeg", type=int)
    p.add_argument("--tuple-size", type=int)
    p.add_argument("--dump", help="directory for the matrices of the worst trial")

    p = sub.add_parser("verify-bernstein", help="Bernstein-type ratios for trigonometric polynomials")
    _add_common(p)
    _add_ensemble(p)
    p.add_argument("--degrees", help="comma list of degrees")

    p = sub.add_parser("converse", help="commuting diagonal witnesses")
    _add_common(p)
    p.add_argument("--f", help="catalog function")
    p.add_argument("--zeta")
    p.add_argument("--eta")
    p.add_argument("--n", type=int)
    p.add_argument("--p")
    p.add_argument("--dim")
    p.add_argument("--random", type=int, help="number of random witness cases")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("lower-bound", help="rank-one lower-bound construction")
    _add_common(p)
    p.add_argument("--omega")
    p.add_argument("--K", dest="K", type=int)
    p.add_argument("--nmax", type=int)
    p.add_argument("--scale", type=float)

    p = sub.add_parser("line-transfer", help="line version of the lower-bound construction")
    _add_common(p)
    p.add_argument("--omega")
    p.add_argument("--nmax", type=int)
    p.add_argument("--C-cap", dest="C_cap", type=float)
    p.add_argument("--grid", dest="grid_size", type=int)

    p = sub.add_parser("report", help="figures and statistics for report CSVs")
    _add_common(p)
    p.add_argument("--input", nargs="+", help="report CSV file(s)")
    return parser


def _load_overrides(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _prepare_file(path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _sidecar(out: Path, suffix: str) -> Path:
    return out.with_name(out.stem + suffix)


def _write_json(path: Path, data) -> Path:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    return str(o)


def _g(v) -> str:
    return repr(float(v))


# -- command handlers: return (status, outputs, message) --------------------


def _check_partition(cfg: ExperimentConfig):
    maxfreq = int(cfg.extra.get("maxfreq", 4096))
    tol = float(cfg.extra.get("tol", 1e-12))
    dev = partition_deviation(maxfreq)
    print(f"max deviation {dev:.3e} over 1 <= |k| <= {maxfreq} (tol {tol:g})")
    outs = []
    if cfg.out:
        outs.append(_write_json(_prepare_file(cfg.out), {"maxfreq": maxfreq, "max_deviation": dev, "tol": tol}))
    return (EXIT_OK if dev <= tol else EXIT_FAIL), outs, f"max deviation {dev:.3e}"


def _decompose(cfg: ExperimentConfig):
    src = cfg.extra.get("input")
    if src:
        try:
            f = TrigPolynomial.loads(Path(src).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read polynomial {src}: {exc}") from exc
    elif cfg.functions:
        f = function_catalog(cfg.functions[0])
        if not isinstance(f, TrigPolynomial):
            raise ConfigError("decompose needs a trigonometric polynomial")
    else:
        raise ConfigError("decompose requires --input or --f")
    if "levels" not in cfg.extra:
        raise ConfigError("decompose requires --levels")
    N = int(cfg.extra["levels"])
    if N < 0:
        raise ConfigError("levels must be nonnegative")
    dec = decompose(f, N)
    err = float(np.abs((dec.reassemble() - f).dense(max(f.degree, dec.reassemble().degree))).max(initial=0.0))
    summary = {
        "degree": f.degree,
        "levels": [{"n": n, "degree": b.degree, "sup_norm": sup_norm(b)} for n, b in enumerate(dec.levels)],
        "tail_degree": dec.tail.degree,
        "tail_sup_norm": sup_norm(dec.tail),
        "reassembly_error": err,
    }
    outs = []
    if cfg.out:
        d = Path(cfg.out)
        d.mkdir(parents=True, exist_ok=True)
        for n, b in enumerate(dec.levels):
            p = d / f"level_{n:03d}.json"
            p.write_text(b.dumps())
            outs.append(p)
        (d / "tail.json").write_text(dec.tail.dumps())
        outs += [d / "tail.json", _write_json(d / "summary.json", summary)]
    print(f"{len(dec.levels)} levels, reassembly error {err:.3e}")
    return (EXIT_OK if err <= 1e-13 else EXIT_FAIL), outs, f"reassembly error {err:.3e}"


def _delta_range(cfg: ExperimentConfig) -> tuple:
    lo = float(cfg.extra.get("delta_min", 1e-3))
    hi = float(cfg.extra.get("delta_max", 1.0))
    if lo < 0 or hi < lo:
        raise ConfigError("need 0 <= delta-min <= delta-max")
    return lo, hi


def _report_outputs(report, cfg: ExperimentConfig, summary: dict):
    outs = []
    if cfg.out:
        out = _prepare_file(cfg.out)
        report.write_csv(out)
        trials = _sidecar(out, ".trials.csv")
        report.write_trials_csv(trials)
        outs += [out, trials, _write_json(_sidecar(out, ".summary.json"), summary)]
    return outs


def _ratio_status(report, cap: float) -> tuple[int, str]:
    r = report.column("ratio")
    bad = int(np.sum(~np.isfinite(r) | (r > cap)))
    mx = float(r.max()) if len(r) else 0.0
    msg = f"{len(r)} rows, max ratio {mx:.6g} (cap {cap:g}), {bad} over cap"
    return (EXIT_FAIL if bad else EXIT_OK), msg


def _verify_upper(cfg: ExperimentConfig):
    if len(cfg.functions) > 1:
        raise ConfigError("verify-upper takes a single --f")
    ex = cfg.extra
    sc = SweepConfig(
        kind=cfg.kind,
        dims=cfg.dims,
        ps=cfg.ps,
        js=cfg.js,
        modulus=cfg.modulus,
        function=cfg.functions[0] if cfg.functions else None,
        trials=cfg.trials,
        seed=cfg.seed,
        l_policy=cfg.l_policy,
        delta_range=_delta_range(cfg),
        modes=ex.get("modes", ["gaussian", "rank"]),
        rank=int(ex.get("rank", 1)),
        grid_size=int(ex.get("grid_size", 1025 if cfg.kind in ("selfadjoint", "unitary", "contraction") else 961)),
        cap=cfg.cap,
        maxdeg=int(ex.get("maxdeg", 32)),
        tuple_size=int(ex.get("tuple_size", 2)),
        experiment_id=f"verify-upper/{cfg.hash()[:12]}",
    )
    try:
        sc.default_function()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report = sweep(sc)
    status, msg = _ratio_status(report, cfg.cap)
    summary = report.summary()
    summary["cap"] = cfg.cap
    outs = _report_outputs(report, cfg, summary)
    dump = ex.get("dump")
    if dump and report.rows:
        ri = report.columns.index("ratio")
        worst = max(report.rows, key=lambda r: r[ri])
        pair = trial_pair(sc, int(worst[4]), int(worst[0]))
        d = Path(dump)
        d.mkdir(parents=True, exist_ok=True)
        As = pair.A if pair.kind == "tuple" else [pair.A]
        Bs = pair.B if pair.kind == "tuple" else [pair.B]
        for i, (A, B) in enumerate(zip(As, Bs)):
            tag = f"_{i}" if pair.kind == "tuple" else ""
            outs += [save_matrix(d / f"A{tag}.json", A), save_matrix(d / f"B{tag}.json", B)]
            outs += [save_matrix(d / f"A{tag}.npy", A), save_matrix(d / f"B{tag}.npy", B)]
    print(msg)
    return status, outs, msg


def _verify_bernstein(cfg: ExperimentConfig):
    degrees = parse_list(cfg.extra.get("degrees", "1,2,4,8,16,32"), int, "degrees")
    if any(d < 1 for d in degrees):
        raise ConfigError("degrees must be >= 1")
    bc = BernsteinConfig(
        kind=cfg.kind,
        dims=cfg.dims,
        degrees=degrees,
        ps=cfg.ps,
        trials=cfg.trials,
        seed=cfg.seed,
        l_policy=cfg.l_policy,
        delta_range=_delta_range(cfg),
        modes=cfg.extra.get("modes", ["gaussian", "rank"]),
        rank=int(cfg.extra.get("rank", 1)),
        cap=cfg.cap,
        experiment_id=f"verify-bernstein/{cfg.hash()[:12]}",
    )
    report = bernstein_sweep(bc)
    status, msg = _ratio_status(report, cfg.cap)
    summary = report.summary(("dim", "degree", "p", "l"))
    summary["cap"] = cfg.cap
    outs = _report_outputs(report, cfg, summary)
    print(msg)
    return status, outs, msg


def _parse_point(text) -> complex | float:
    try:
        z = complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"bad point {text!r}") from exc
    return z.real if z.imag == 0 else z


def _converse(cfg: ExperimentConfig):
    ex = cfg.extra
    rows = []
    try:
        if ex.get("random"):
            for case, kind, zeta, eta, rec in random_witnesses(int(ex["random"]), cfg.seed):
                rows.append((case, kind, rec, zeta, eta))
        else:
            for k in ("zeta", "eta", "n"):
                if k not in ex:
                    raise ConfigError(f"converse requires --{k} (or --random)")
            zeta, eta = _parse_point(ex["zeta"]), _parse_point(ex["eta"])
            f = function_catalog(cfg.functions[0] if cfg.functions else "identity")
            real = isinstance(zeta, float) and isinstance(eta, float)
            if not real and not isinstance(f, TrigPolynomial):
                f = lift(f, "unitary")
            if not real and (abs(abs(zeta) - 1) > 1e-12 or abs(abs(eta) - 1) > 1e-12):
                raise ConfigError("complex witness points must be unimodular")
            ps = cfg.ps or [2.0]
            dim = cfg.dims[0] if cfg.dims else None
            for i, p in enumerate(ps):
                rec = converse_witness(f, zeta, eta, int(ex["n"]), p, dim=dim)
                rows.append((i, "selfadjoint" if real else "unitary", rec, complex(zeta), complex(eta)))
    except WitnessError as exc:
        print(f"witness failed: {exc}")
        return EXIT_FAIL, [], str(exc)
    outs = []
    if cfg.out:
        out = _prepare_file(cfg.out)
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(WITNESS_COLUMNS)
            for case, kind, rec, z, e in rows:
                w.writerow([case, kind, rec.n, _g(rec.p), _g(z.real), _g(z.imag), _g(e.real), _g(e.imag),
                            _g(rec.s_n), _g(rec.f_gap), _g(rec.norm_sp), _g(rec.expected_norm)])
        outs.append(out)
    worst = max((max(r[2].deviations) for r in rows), default=0.0)
    msg = f"{len(rows)} witnesses, worst deviation {worst:.3e}"
    print(msg)
    return EXIT_OK, outs, msg


def _lower_bound(cfg: ExperimentConfig):
    ex = cfg.extra
    K, nmax = int(ex.get("K", 1024)), int(ex.get("nmax", 4))
    scale = float(ex.get("scale", 32.0 / 3.0))
    try:
        table = verify_lower(cfg.modulus, K, nmax, scale=scale)
    except RangeError as exc:
        raise ConfigError(str(exc)) from exc
    outs = []
    if cfg.out:
        out = _prepare_file(cfg.out)
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["m", "s_m", "omega_bound", "margin"])
            for m, s, b, mg in table.rows:
                w.writerow([m, _g(s), _g(b), _g(mg)])
        tn = _sidecar(out, ".tn.csv")
        with open(tn, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "side", "value", "max_offpattern", "max_sv_deviation"])
            for n, side, v, off, dev in table.tn:
                w.writerow([n, side, _g(v), _g(off), _g(dev)])
        summary = {
            "modulus": table.modulus.to_dict(),
            "K": K,
            "n_max": nmax,
            "scale": scale,
            "rank_U_minus_V": table.rank_uv,
            "min_margin": table.min_margin,
            "chain_min_margin": min((s - b for _, s, b in table.chain), default=math.inf),
            "violations": [list(v) for v in table.violations],
        }
        outs += [out, tn, _write_json(_sidecar(out, ".summary.json"), summary)]
    msg = f"rank(U-V)={table.rank_uv}, {len(table.rows)} rows, min margin {table.min_margin:.6g}, {len(table.violations)} violations"
    print(msg)
    return (EXIT_OK if table.ok else EXIT_FAIL), outs, msg


def _rho_errors(count: int = 1024, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    z = np.exp(1j * rng.uniform(-np.pi, np.pi, count))
    return {
        "points": count,
        "partition": float(np.abs(rho(z) + rho(1j * z) - 1).max()),
        "conjugation": float(np.abs(rho(np.conj(z)) - rho(z)).max()),
    }


def _line_transfer(cfg: ExperimentConfig):
    ex = cfg.extra
    nmax = int(ex.get("nmax", 3))
    C_cap = float(ex.get("C_cap", 2.0**20))
    grid = int(ex.get("grid_size", 2049))
    summary = {"modulus": cfg.modulus.to_dict(), "n_max": nmax, "C_cap": C_cap, "rho": _rho_errors()}
    outs = []
    try:
        res = line_transfer(cfg.modulus, nmax, C_cap=C_cap, grid_size=grid)
    except ConstructionError as exc:
        summary.update(found=False, message=str(exc))
        if cfg.out:
            out = _prepare_file(cfg.out)
            outs.append(_write_json(_sidecar(out, ".summary.json"), summary))
        print(f"negative result: {exc}")
        return EXIT_FAIL, outs, str(exc)
    margins = res.margins
    summary.update(
        found=True,
        C=res.C,
        search=[list(s) for s in res.search],
        hankel_size=res.hankel_size,
        coefficient_tail=res.coefficient_tail,
        f_seminorm_sharp=res.f_seminorm,
        seminorm_grid=res.seminorm_grid,
        f_at_one=float(np.real(res.f_samples[-1])),
        min_margin=float(margins.min()),
    )
    if cfg.out:
        out = _prepare_file(cfg.out)
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["m", "s_m", "omega_bound", "margin"])
            for j, (s, b) in enumerate(zip(res.C * res.singular_values, res.bounds)):
                w.writerow([j, _g(s), _g(b), _g(s - b)])
        outs += [out, _write_json(_sidecar(out, ".summary.json"), summary)]
    msg = f"C={res.C:g} after {len(res.search)} steps, min margin {margins.min():.6g}"
    print(msg)
    return EXIT_OK, outs, msg


def _report(cfg: ExperimentConfig):
    from .plotting import render_report

    inputs = cfg.extra.get("input")
    if not inputs:
        raise ConfigError("report requires --input")
    inputs = [inputs] if isinstance(inputs, str) else list(inputs)
    outs = []
    for src in inputs:
        src = Path(src)
        if not src.is_file():
            raise ConfigError(f"no such report {src}")
        try:
            outs += render_report(src, cfg.out or src.parent)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    for p in outs:
        print(p)
    return EXIT_OK, outs, f"{len(outs)} files"


HANDLERS = {
    "check-partition": _check_partition,
    "decompose": _decompose,
    "verify-upper": _verify_upper,
    "verify-bernstein": _verify_bernstein,
    "converse": _converse,
    "lower-bound": _lower_bound,
    "line-transfer": _line_transfer,
    "report": _report,
}


def _manifest_path(cfg: ExperimentConfig) -> Path | None:
    if not cfg.out:
        return None
    out = Path(cfg.out)
    if cfg.command in ("decompose", "report"):
        return out / "manifest.json"
    return _sidecar(out, ".manifest.json")


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_ERROR
    sub = parser._subparsers._group_actions[0].choices[args.command]
    data = {k: v for k, v in vars(args).items() if k not in ("command", "config") and v is not None}
    try:
        if args.config:
            data.update(_load_overrides(args.config))
        cfg = ExperimentConfig.from_mapping(args.command, data)
        status, outs, msg = HANDLERS[args.command](cfg)
    except (ConfigError, CatalogError, ValueError) as exc:
        sub.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_ERROR
    mpath = _manifest_path(cfg)
    if mpath is not None:
        manifest = RunManifest(cfg.to_dict(), __version__, status, [str(p) for p in outs], message=msg)
        try:
            mpath.parent.mkdir(parents=True, exist_ok=True)
            manifest.write(mpath)
        except OSError as exc:
            print(f"error: cannot write manifest: {exc}", file=sys.stderr)
            return EXIT_ERROR
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
