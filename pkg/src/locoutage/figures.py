"""Figure experiments: curve tables, CSV serialization and SVG line charts.

Every table is a list of rows sharing a header.  CSVs use 17 significant
digits and LF line endings so reruns can be compared byte for byte, and the
SVG renderer only ever sees CSV text, so a chart can be regenerated from its
files alone.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from locoutage.analytic import AllAnchorQuery, allanchor_lop
from locoutage.bounds import DeltaQuery, GeometryRatio, delta_from_threshold, p_delta, two_anchor_bounds
from locoutage.fim import RangingNoise
from locoutage.montecarlo import (
    NetworkConfig,
    Selector,
    TrialConfig,
    allanchor_speb_samples,
    lop_curve,
    two_anchor_speb_samples,
)

FIG3_COLUMNS = (
    "N",
    "allanchor_analytic",
    "allanchor_mc",
    "allanchor_mc_stderr",
    "twoanchor_mc_opt",
    "twoanchor_mc_opt_stderr",
    "lower_bound",
    "upper_bound",
)
FIG4_COLUMNS = (
    "N",
    "delta",
    "p_delta_lower",
    "p_delta_upper",
    "twoanchor_mc_opt",
    "twoanchor_mc_opt_stderr",
    "twoanchor_mc_dis",
    "twoanchor_mc_dis_stderr",
)
FIG5_COLUMNS = ("threshold_ratio",) + FIG3_COLUMNS[1:]

FIG4_THRESHOLDS = (1.5, 2.0, 4.0)
FIG4_KAPPA = 0.4
FIG5_THRESHOLDS = (1.05, 1.1, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 7.0, 8.0)


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[str, ...]
    rows: list[tuple]

    def column(self, name: str) -> list[float]:
        k = self.columns.index(name)
        return [row[k] for row in self.rows]


@dataclass(frozen=True)
class FigureSettings:
    n_values: tuple[int, ...] = tuple(range(2, 11))
    threshold_ratio: float = 2.0
    thresholds: tuple[float, ...] = FIG5_THRESHOLDS
    r_over_r: float = 100.0
    trials: int = 1_000_000
    seed: int = 42
    agent_policy: str = "at-center"
    speb_policy: str = "at-agent"
    workers: int = 1
    noise: RangingNoise = field(default_factory=RangingNoise)

    def trial_config(self, n: int, threshold: float | None = None, noise: RangingNoise | None = None) -> TrialConfig:
        net = NetworkConfig(
            n,
            big_r=self.r_over_r,
            small_r=1.0,
            noise=noise or self.noise,
            threshold_ratio=threshold or self.threshold_ratio,
        )
        return TrialConfig(net, self.trials, self.seed, self.agent_policy, self.speb_policy)


def _threshold_rows(s: FigureSettings, n: int, thresholds: Sequence[float]) -> list[tuple]:
    """Analytic, MC and bound values at each threshold for one N (common random numbers)."""
    cfg = s.trial_config(n)
    geom = GeometryRatio(s.r_over_r, 1.0)
    all_mc = lop_curve(allanchor_speb_samples(cfg, s.workers), thresholds, s.seed)
    if n >= 2:
        two_mc = lop_curve(two_anchor_speb_samples(cfg, Selector.OPTIMAL, s.workers), thresholds, s.seed)
    rows = []
    for k, t in enumerate(thresholds):
        analytic = allanchor_lop(AllAnchorQuery(n, t))
        if n >= 2:
            b = two_anchor_bounds(n, t, geom)
            two = (two_mc[k].mean, two_mc[k].stderr, b.lower, b.upper)
        else:
            two = (1.0, 0.0, 1.0, 1.0)
        rows.append((t, analytic, all_mc[k].mean, all_mc[k].stderr) + two)
    return rows


def fig3_table(s: FigureSettings) -> Table:
    rows = []
    for n in s.n_values:
        (row,) = _threshold_rows(s, n, [s.threshold_ratio])
        rows.append((n,) + row[1:])
    return Table("fig3", FIG3_COLUMNS, rows)


def fig4_tables(s: FigureSettings) -> list[Table]:
    """P(delta) versus N per threshold, against two-anchor MC with and without distance noise."""
    dis = RangingNoise.constant_ratio(FIG4_KAPPA, s.noise.sigma_clk)
    tables = []
    for t in FIG4_THRESHOLDS:
        delta = delta_from_threshold(t)
        rows = []
        for n in s.n_values:
            if n < 2:
                continue
            b = p_delta(DeltaQuery(n, delta))
            clk = lop_curve(two_anchor_speb_samples(s.trial_config(n, t), Selector.OPTIMAL, s.workers), [t], s.seed)[0]
            noisy = lop_curve(
                two_anchor_speb_samples(s.trial_config(n, t, dis), Selector.OPTIMAL, s.workers), [t], s.seed
            )[0]
            rows.append((n, delta, b.lower, b.upper, clk.mean, clk.stderr, noisy.mean, noisy.stderr))
        tables.append(Table(f"fig4_threshold_{t:g}", FIG4_COLUMNS, rows))
    return tables


def fig5_tables(s: FigureSettings) -> list[Table]:
    return [Table(f"fig5_N{n}", FIG5_COLUMNS, _threshold_rows(s, n, s.thresholds)) for n in s.n_values]


def figure_tables(kind: str, s: FigureSettings) -> list[Table]:
    if kind == "fig3":
        return [fig3_table(s)]
    if kind == "fig4":
        return fig4_tables(s)
    if kind == "fig5":
        return fig5_tables(s)
    raise ValueError(f"unknown figure {kind!r}")


def default_settings(kind: str, **overrides) -> FigureSettings:
    base = FigureSettings()
    if kind == "fig5":
        base = replace(base, n_values=(3, 4, 5))
    return replace(base, **{k: v for k, v in overrides.items() if v is not None})


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return format(float(x), ".17g")


def table_to_csv(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def csv_to_table(name: str, text: str) -> Table:
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    rows = [tuple(float(x) for x in line) for line in reader if line]
    return Table(name, header, rows)


def write_csv(table: Table, out_dir: Path) -> Path:
    path = Path(out_dir) / f"{table.name}.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(table_to_csv(table))
    return path


# --------------------------------------------------------------------------
# SVG
# --------------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 190, 40, 50

# curves drawn for each figure: (x column, [(y column, legend label, dashed)])
PLOT_LAYOUT = {
    "fig3": ("N", [
        ("allanchor_analytic", "all-anchor analytic", False),
        ("allanchor_mc", "all-anchor MC", True),
        ("twoanchor_mc_opt", "two-anchor MC", True),
        ("lower_bound", "lower bound", False),
        ("upper_bound", "upper bound", False),
    ]),
    "fig4": ("N", [
        ("p_delta_lower", "P(delta) lower", False),
        ("p_delta_upper", "P(delta) upper", False),
        ("twoanchor_mc_opt", "MC, clock noise", True),
        ("twoanchor_mc_dis", "MC, kappa=0.4", True),
    ]),
    "fig5": ("threshold_ratio", [
        ("allanchor_analytic", "all-anchor", False),
        ("twoanchor_mc_opt", "two-anchor MC", True),
    ]),
}


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_svg(kind: str, csv_texts: dict[str, str], log_y: bool = True, title: str | None = None) -> str:
    """Line chart of the curves in ``csv_texts`` (name -> CSV text), a pure function of its inputs."""
    xcol, curves = PLOT_LAYOUT[kind]
    series = []
    for name in sorted(csv_texts):
        table = csv_to_table(name, csv_texts[name])
        xs = table.column(xcol)
        for ycol, label, dashed in curves:
            if ycol not in table.columns:
                continue
            tag = label if len(csv_texts) == 1 else f"{label} [{name}]"
            pts = [(x, y) for x, y in zip(xs, table.column(ycol)) if math.isfinite(y) and (y > 0 or not log_y)]
            series.append((tag, dashed, pts))

    all_pts = [p for _, _, pts in series for p in pts]
    if not all_pts:
        all_pts = [(0.0, 1.0), (1.0, 1.0)]
    x0, x1 = min(p[0] for p in all_pts), max(p[0] for p in all_pts)
    ty = (lambda y: math.log10(y)) if log_y else (lambda y: y)
    y0, y1 = min(ty(p[1]) for p in all_pts), max(ty(p[1]) for p in all_pts)
    if log_y:
        y0, y1 = math.floor(y0), math.ceil(y1)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    pw, ph = _W - _ML - _MR, _H - _MT - _MB

    def sx(x):
        return _ML + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return _MT + (1 - (ty(y) - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{_ML + pw / 2:.1f}" y="20" text-anchor="middle" font-size="13">{_esc(title or kind)}</text>',
        f'<text x="{_ML + pw / 2:.1f}" y="{_H - 12}" text-anchor="middle">{_esc(xcol)}</text>',
        f'<text x="16" y="{_MT + ph / 2:.1f}" text-anchor="middle" transform="rotate(-90 16 {_MT + ph / 2:.1f})">LOP</text>',
    ]
    if log_y:
        ticks = [10.0**k for k in range(int(y0), int(y1) + 1)]
        labels = [f"1e{int(math.log10(t))}" for t in ticks]
    else:
        ticks = [y0 + (y1 - y0) * k / 5 for k in range(6)]
        labels = [f"{t:.3g}" for t in ticks]
    for t, lab in zip(ticks, labels):
        y = sy(t)
        out.append(f'<line x1="{_ML}" y1="{y:.1f}" x2="{_ML + pw}" y2="{y:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{_ML - 6}" y="{y + 4:.1f}" text-anchor="end">{lab}</text>')
    for k in range(6):
        xv = x0 + (x1 - x0) * k / 5
        out.append(f'<text x="{sx(xv):.1f}" y="{_MT + ph + 16}" text-anchor="middle">{xv:.3g}</text>')

    for k, (label, dashed, pts) in enumerate(series):
        color = _PALETTE[k % len(_PALETTE)]
        dash = ' stroke-dasharray="5,3"' if dashed else ""
        if pts:
            path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>')
        ly = _MT + 12 + 16 * k
        lx = _ML + pw + 10
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 28}" y="{ly}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(kind: str, csv_paths: Sequence[Path], out_path: Path, log_y: bool = True) -> Path:
    texts = {Path(p).stem: Path(p).read_text(encoding="utf-8") for p in csv_paths}
    Path(out_path).write_text(render_svg(kind, texts, log_y), encoding="utf-8", newline="\n")
    return Path(out_path)
