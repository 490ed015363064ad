"""CSV parsing, schema validation, and deterministic figure rendering."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (after backend selection)

KINDS = ("growth", "ratio-heatmap", "residual")

REQUIRED_COLUMNS = {
    "growth": ("t", "h2"),
    "ratio-heatmap": ("N", "M", "max_ratio"),
    "residual": ("t", "residual"),
}

FIGSIZE = (6.4, 4.8)
DPI = 110


class SchemaError(ValueError):
    """Input CSV does not match the published schema for the plot kind."""


@dataclass(frozen=True)
class PlotSpec:
    """What to draw: input CSVs, plot kind, output path, axis flags."""

    kind: str
    inputs: list
    output: str
    logx: bool = False
    logy: bool = False
    title: str = ""
    growth_order: int = 1  # k of the rendered run; bound exponent 2(2k-1)/3

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown plot kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise SchemaError("at least one input CSV is required")


@dataclass
class RenderResult:
    """Where the image went plus the values drawn on it."""

    output: str
    annotations: dict = field(default_factory=dict)
    fit_constant: float | None = None


def read_csv(path: str, required: tuple) -> dict:
    """Parse one hash-stamped CSV into {column: list of strings}.

    Leading `#` comment lines are skipped, unknown columns are kept,
    missing required columns raise SchemaError naming them.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: empty input (no header row)")
    reader = csv.reader(lines)
    header = next(reader)
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(
            f"{path}: missing required column(s) {missing}; found {header}"
        )
    rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    table = {c: [] for c in header}
    for row in rows:
        if len(row) != len(header):
            raise SchemaError(f"{path}: row width {len(row)} != header width {len(header)}")
        for c, cell in zip(header, row):
            table[c].append(cell)
    return table


def _floats(table: dict, column: str) -> np.ndarray:
    out = []
    for cell in table[column]:
        if cell == "":
            out.append(np.nan)
        else:
            try:
                out.append(float(cell))
            except ValueError as exc:
                raise SchemaError(f"column {column!r}: non-numeric cell {cell!r}") from exc
    return np.array(out)


def _new_axes(spec: PlotSpec):
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    if spec.title:
        ax.set_title(spec.title)
    if spec.logx:
        ax.set_xscale("log")
    if spec.logy:
        ax.set_yscale("log")
    return fig, ax


def _render_growth(spec: PlotSpec) -> RenderResult:
    fig, ax = _new_axes(spec)
    exponent = 2.0 * (2 * spec.growth_order - 1) / 3.0
    fit_c = None
    for path in spec.inputs:
        table = read_csv(path, REQUIRED_COLUMNS["growth"])
        t = _floats(table, "t")
        h2 = _floats(table, "h2")
        ax.plot(t, h2, label=f"H^2 norm ({path.rsplit('/', 1)[-1]})")
        for extra in ("d2k_norm", "moment2k"):
            if extra in table:
                vals = _floats(table, extra)
                if np.all(np.isfinite(vals)):
                    ax.plot(t, vals, alpha=0.6, label=extra)
        # least-squares constant for the bound curve c <t>^exponent
        angle = np.sqrt(1.0 + t**2) ** exponent
        c = float(np.dot(angle, h2) / np.dot(angle, angle))
        if fit_c is None or c > fit_c:
            fit_c = c
        ax.plot(t, c * angle, "--", label=f"c <t>^{exponent:.3f}, c={c:.3g}")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.legend(fontsize=8)
    fig.savefig(spec.output)
    plt.close(fig)
    return RenderResult(output=spec.output, fit_constant=fit_c)


def _render_heatmap(spec: PlotSpec) -> RenderResult:
    cells = {}
    for path in spec.inputs:
        table = read_csv(path, REQUIRED_COLUMNS["ratio-heatmap"])
        Ns = _floats(table, "N").astype(int)
        Ms = _floats(table, "M").astype(int)
        ratios = _floats(table, "max_ratio")
        for n, m, r in zip(Ns, Ms, ratios):
            key = (int(n), int(m))
            cells[key] = max(cells.get(key, -math.inf), float(r))
    n_axis = sorted({k[0] for k in cells})
    m_axis = sorted({k[1] for k in cells})
    grid = np.full((len(m_axis), len(n_axis)), np.nan)
    for (n, m), r in cells.items():
        grid[m_axis.index(m), n_axis.index(n)] = r
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    if spec.title:
        ax.set_title(spec.title)
    im = ax.imshow(grid, origin="lower", cmap="viridis")
    ax.set_xticks(range(len(n_axis)), [str(n) for n in n_axis])
    ax.set_yticks(range(len(m_axis)), [str(m) for m in m_axis])
    ax.set_xlabel("N")
    ax.set_ylabel("M")
    annotations = {}
    for (n, m), r in cells.items():
        annotations[(n, m)] = r
        ax.text(
            n_axis.index(n), m_axis.index(m), f"{r:.3g}",
            ha="center", va="center", color="w", fontsize=8,
        )
    fig.colorbar(im, ax=ax, label="max ratio")
    fig.savefig(spec.output)
    plt.close(fig)
    return RenderResult(output=spec.output, annotations=annotations)


def _render_residual(spec: PlotSpec) -> RenderResult:
    fig, ax = _new_axes(spec)
    for path in spec.inputs:
        table = read_csv(path, REQUIRED_COLUMNS["residual"])
        t = _floats(table, "t")
        r = np.abs(_floats(table, "residual"))
        keep = np.isfinite(r)
        ax.plot(t[keep], r[keep], marker=".", label=path.rsplit("/", 1)[-1])
    ax.set_xlabel("t")
    ax.set_ylabel("|residual|")
    ax.legend(fontsize=8)
    fig.savefig(spec.output)
    plt.close(fig)
    return RenderResult(output=spec.output)


def render(spec: PlotSpec) -> RenderResult:
    """Render one figure; raises SchemaError for malformed input."""
    if spec.kind == "growth":
        return _render_growth(spec)
    if spec.kind == "ratio-heatmap":
        return _render_heatmap(spec)
    return _render_residual(spec)
