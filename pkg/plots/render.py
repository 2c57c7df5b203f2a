#!/usr/bin/env python3
"""Figure generation from simulation CSV outputs.

Four plot kinds, all driven by a JSON spec file:

    convergence  sweep CSV (eps, t, composite_error, ...) -> log-log error
                 plot with a fitted-slope label and an eps^2 guide line
    density      run CSV (t, x, n) -> stacked density snapshots
    decay        sweep CSV -> layer_error against t per eps, log scale
    coeffs       coefficient CSV (x, D, W, E) -> coefficient profiles

Only the documented CSV columns and ``# key: value`` metadata lines are read;
no simulation code is imported.  Plots are derived artifacts: deleting them
loses nothing.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

EXPECTED_COLUMNS = {
    "convergence": ["eps", "t", "composite_error", "layer_error", "bulk_error"],
    "decay": ["eps", "t", "composite_error", "layer_error", "bulk_error"],
    "density": ["t", "x", "n"],
    "coeffs": ["x", "D", "W", "E"],
}


class SchemaError(ValueError):
    pass


def load_csv(path: str, kind: str):
    """Metadata dict + list of float-valued row dicts, schema-checked."""
    meta: dict[str, str] = {}
    rows: list[dict[str, float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        data_lines = []
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, val = body.split(":", 1)
                    meta[key.strip()] = val.strip()
            else:
                data_lines.append(line)
    if not data_lines:
        raise SchemaError(f"{path}: no header row found")
    reader = csv.DictReader(data_lines)
    want = EXPECTED_COLUMNS[kind]
    got = reader.fieldnames or []
    if got != want:
        raise SchemaError(
            f"{path}: columns {got} do not match the {kind} schema {want}")
    for raw in reader:
        rows.append({k: float(v) for k, v in raw.items()})
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return meta, rows


def fit_slope(eps, errors):
    slope, _ = np.polyfit(np.log(np.asarray(eps)), np.log(np.asarray(errors)), 1)
    return float(slope)


def render_convergence(meta, rows, spec, ax):
    fit_time = float(meta.get("fit_time", max(r["t"] for r in rows)))
    pts = sorted(((r["eps"], r["composite_error"]) for r in rows
                  if abs(r["t"] - fit_time) < 1e-12), reverse=True)
    eps = [p[0] for p in pts]
    errs = [p[1] for p in pts]
    slope = fit_slope(eps, errs)
    ax.loglog(eps, errs, "o-", label=f"error at t={fit_time:g}")
    guide = [errs[0] * (e / eps[0]) ** 2 for e in eps]
    ax.loglog(eps, guide, "k--", alpha=0.6, label=r"slope-2 guide")
    ax.annotate(f"fitted slope = {slope:.2f}", xy=(0.05, 0.9),
                xycoords="axes fraction")
    ax.set_xlabel(spec.get("xlabel", "Knudsen number"))
    ax.set_ylabel(spec.get("ylabel", "weighted-norm error"))
    ax.legend()
    return {"slope": slope, "metadata_order": meta.get("fitted_order")}


def render_density(meta, rows, spec, ax):
    times = sorted({r["t"] for r in rows})
    for t in times:
        xs = [r["x"] for r in rows if r["t"] == t]
        ns = [r["n"] for r in rows if r["t"] == t]
        ax.plot(xs, ns, label=f"t = {t:g}")
    ax.set_xlabel(spec.get("xlabel", "x"))
    ax.set_ylabel(spec.get("ylabel", "density"))
    ax.legend()
    return {"snapshots": len(times)}


def render_decay(meta, rows, spec, ax):
    eps_values = sorted({r["eps"] for r in rows}, reverse=True)
    for e in eps_values:
        ts = [r["t"] for r in rows if r["eps"] == e]
        lay = [r["layer_error"] for r in rows if r["eps"] == e]
        ax.semilogy(ts, lay, "o-", label=f"eps = {e:g}")
    ax.set_xlabel(spec.get("xlabel", "t"))
    ax.set_ylabel(spec.get("ylabel", "layer-term norm"))
    ax.legend()
    return {"curves": len(eps_values)}


def render_coeffs(meta, rows, spec, ax):
    xs = [r["x"] for r in rows]
    for col in ("D", "W", "E"):
        ax.plot(xs, [r[col] for r in rows], label=col)
    ax.set_xlabel(spec.get("xlabel", "x"))
    ax.set_ylabel(spec.get("ylabel", "coefficient"))
    ax.legend()
    return {}


RENDERERS = {
    "convergence": render_convergence,
    "density": render_density,
    "decay": render_decay,
    "coeffs": render_coeffs,
}


def render(spec: dict) -> dict:
    kind = spec.get("kind")
    if kind not in RENDERERS:
        raise SchemaError(f"unknown plot kind {kind!r}; "
                          f"expected one of {sorted(RENDERERS)}")
    meta, rows = load_csv(spec["input"], kind)
    fig, ax = plt.subplots(figsize=tuple(spec.get("figsize", (6.0, 4.0))))
    if "title" in spec:
        ax.set_title(spec["title"])
    info = RENDERERS[kind](meta, rows, spec, ax)
    fig.tight_layout()
    fig.savefig(spec["output"], dpi=int(spec.get("dpi", 150)))
    plt.close(fig)
    info["output"] = spec["output"]
    return info


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plots/render.py")
    parser.add_argument("--spec", required=True, help="JSON plot spec")
    args = parser.parse_args(argv)
    try:
        with open(args.spec, encoding="utf-8") as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2
    try:
        info = render(spec)
    except (OSError, SchemaError, KeyError) as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {info['output']}")
    if "slope" in info:
        print(f"fitted slope = {info['slope']:.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
