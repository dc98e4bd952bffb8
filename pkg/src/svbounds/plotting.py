"""Figures and summary tables for report CSVs.

Only the ``report`` command imports this module; the experiment code never
touches matplotlib.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["read_table", "detect_kind", "render_report"]


def read_table(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in r] for r in body], dtype=float).reshape(len(body), len(header))
    return header, data


def detect_kind(header: list[str]) -> str:
    cols = set(header)
    if {"m", "s_m", "omega_bound", "margin"} <= cols:
        return "lower"
    if {"degree", "ratio", "dim"} <= cols:
        return "bernstein"
    if {"j", "ratio", "dim"} <= cols:
        return "upper"
    raise ValueError(f"unrecognised report columns {header}")


def _group_stats(header, data, keys):
    idx = [header.index(k) for k in keys]
    r = data[:, header.index("ratio")]
    groups: dict = {}
    for row, val in zip(data, r):
        groups.setdefault(tuple(row[i] for i in idx), []).append(val)
    out = []
    for key in sorted(groups):
        a = np.asarray(groups[key])
        out.append((*key, float(a.max()), float(np.median(a)), float(np.percentile(a, 95)), len(a)))
    return out


def _write_stats(path: Path, keys, stats) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*keys, "max", "median", "p95", "count"])
        for row in stats:
            w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])


def _ratio_figure(stats, keys, x_key: str, series_key: str, title: str, path: Path) -> None:
    xi, si = keys.index(x_key), keys.index(series_key)
    fig, ax = plt.subplots(figsize=(6, 4))
    for s in sorted({row[si] for row in stats}):
        sel = [row for row in stats if row[si] == s]
        xs = sorted({row[xi] for row in sel})
        for col, style, label in ((len(keys), "-o", "max"), (len(keys) + 2, "--", "p95")):
            ys = [max(r[col] for r in sel if r[xi] == x) for x in xs]
            ax.plot(xs, ys, style, label=f"{series_key}={s:g} {label}")
    ax.set_xscale("log", base=2)
    ax.set_xlabel(x_key)
    ax.set_ylabel("ratio")
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _histogram(values, path: Path, title: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    v = values[np.isfinite(values)]
    ax.hist(v, bins=50)
    ax.set_xlabel("ratio")
    ax.set_ylabel("count")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _lower_figure(header, data, path: Path) -> None:
    m = data[:, header.index("m")]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(1 + m, data[:, header.index("s_m")], ".", label="s_m")
    ax.loglog(1 + m, data[:, header.index("omega_bound")], "-", label="omega(1/(1+m))")
    ax.set_xlabel("1 + m")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report(csv_path, out_dir) -> list[Path]:
    """Write a statistics CSV and PNG figures for one report CSV.

    Returns the files written, all inside ``out_dir``.
    """
    csv_path, out_dir = Path(csv_path), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header, data = read_table(csv_path)
    kind = detect_kind(header)
    stem = csv_path.stem
    written: list[Path] = []
    if kind == "lower":
        fig = out_dir / f"{stem}_singular_values.png"
        _lower_figure(header, data, fig)
        margins = data[:, header.index("margin")]
        stats = out_dir / f"{stem}_stats.csv"
        with open(stats, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["rows", "min_margin", "violations"])
            w.writerow([len(margins), repr(float(margins.min())) if len(margins) else "nan", int((margins < -1e-10).sum())])
        return [stats, fig]
    keys = ["dim", "j", "p", "l"] if kind == "upper" else ["dim", "degree", "p", "l"]
    stats = _group_stats(header, data, keys)
    stats_path = out_dir / f"{stem}_stats.csv"
    _write_stats(stats_path, keys, stats)
    written.append(stats_path)
    series = "j" if kind == "upper" else "p"
    if data.shape[0]:
        if kind == "upper":
            fig = out_dir / f"{stem}_ratio_vs_dim.png"
            _ratio_figure(stats, keys, "dim", series, "ratio by dimension", fig)
        else:
            fig = out_dir / f"{stem}_ratio_vs_degree.png"
            _ratio_figure(stats, keys, "degree", "dim", "ratio by degree", fig)
        hist = out_dir / f"{stem}_ratio_hist.png"
        _histogram(data[:, header.index("ratio")], hist, "ratio distribution")
        written += [fig, hist]
    return written
