"""CSV-backed SVG figures, written by hand so the bytes are deterministic."""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from xml.sax.saxutils import escape

from ._validation import ValidationError
from .tables import read_csv_untyped

FIGURES = ("spectrum_curves", "restriction_bounds", "knapp_scaling", "decay_scatter")
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")
WIDTH, HEIGHT = 640, 440
MARGIN = dict(left=70, right=170, top=40, bottom=55)


@dataclass
class Series:
    label: str
    x: list
    y: list
    lines: bool = True
    color: str = PALETTE[0]


@dataclass
class FigureSpec:
    figure_id: str
    table: str
    x_range: tuple = None
    y_range: tuple = None
    log_x: bool = False
    log_y: bool = False
    title: str = ""
    styles: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.figure_id not in FIGURES:
            raise ValidationError(f"unknown figure id {self.figure_id!r}; one of {FIGURES}")


def _num(cell):
    return float(Fraction(cell)) if "/" in cell else float(cell)


def _load(path):
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"missing data table: {path}")
    header, rows = read_csv_untyped(path)
    return header, rows


def _col(header, rows, name):
    if name not in header:
        raise ValidationError(f"table lacks column {name!r}")
    i = header.index(name)
    return [r[i] for r in rows]


def _series_spectrum(header, rows):
    out, markers = [], []
    kind, ks = _col(header, rows, "series"), _col(header, rows, "k")
    th, val = _col(header, rows, "theta"), _col(header, rows, "value")
    keys = sorted({(kind[i], int(ks[i])) for i in range(len(rows))}, key=lambda t: (t[1], t[0]))
    for n, (sk, k) in enumerate(keys):
        idx = [i for i in range(len(rows)) if kind[i] == sk and int(ks[i]) == k]
        pts = sorted((_num(th[i]), _num(val[i])) for i in idx)
        out.append(Series(f"k={k} {sk}", [p[0] for p in pts], [p[1] for p in pts],
                          lines=(sk == "theory"), color=PALETTE[(k - 1) % len(PALETTE)]))
        if sk == "theory" and k > 2:
            t = (k - 2) / (k - 0.5)
            markers.append((t, min(k + t / 2, 2 + k * t), PALETTE[(k - 1) % len(PALETTE)]))
    return out, markers, "theta", "Fourier spectrum"


def _series_bounds(header, rows):
    k = [_num(c) for c in _col(header, rows, "k")]
    labels = {"stein_tomas": "Stein-Tomas", "sufficient": "sufficient",
              "necessary": "necessary", "hambrook_laba": "Hambrook-Laba"}
    out = [Series(lab, k, [_num(c) for c in _col(header, rows, name)], True, PALETTE[i])
           for i, (name, lab) in enumerate(labels.items())]
    return out, [], "k", "q"


def _series_knapp(header, rows):
    d = [_num(c) for c in _col(header, rows, "delta")]
    out = [Series(name, d, [_num(c) for c in _col(header, rows, name)], True, PALETTE[i])
           for i, name in enumerate(("lhs_closed", "lhs_quadrature", "rhs"))]
    return out, [], "delta", "norm"


def _series_decay(header, rows):
    x = [abs(_num(c)) for c in _col(header, rows, "xi_j")]
    m = [_num(c) for c in _col(header, rows, "modulus")]
    reg = _col(header, rows, "regime")
    out = []
    for i, name in enumerate(sorted(set(reg))):
        idx = [j for j in range(len(rows)) if reg[j] == name and m[j] > 0 and x[j] > 0]
        out.append(Series(name, [x[j] for j in idx], [m[j] for j in idx], False, PALETTE[i]))
    return out, [], "|xi_j|", "modulus"


_BUILDERS = {"spectrum_curves": _series_spectrum, "restriction_bounds": _series_bounds,
             "knapp_scaling": _series_knapp, "decay_scatter": _series_decay}
_LOG_DEFAULTS = {"knapp_scaling": (True, True), "decay_scatter": (True, True)}


def _fmt(v):
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _ticks(lo, hi, log):
    if log:
        return [10.0**e for e in range(math.ceil(lo), math.floor(hi) + 1)]
    step = 10 ** math.floor(math.log10((hi - lo) / 4)) if hi > lo else 1.0
    for mult in (1, 2, 5, 10):
        if (hi - lo) / (step * mult) <= 6:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    return [first + i * step for i in range(int((hi - first) / step + 1e-9) + 1)]


def render_svg(spec):
    """SVG text for ``spec``; data is read from ``spec.table`` on disk."""
    header, rows = _load(spec.table)
    series, markers, xlabel, ylabel = _BUILDERS[spec.figure_id](header, rows)
    log_x, log_y = _LOG_DEFAULTS.get(spec.figure_id, (spec.log_x, spec.log_y))
    log_x, log_y = log_x or spec.log_x, log_y or spec.log_y
    tx = (lambda v: math.log10(v)) if log_x else (lambda v: v)
    ty = (lambda v: math.log10(v)) if log_y else (lambda v: v)
    xs = [tx(v) for s in series for v in s.x]
    ys = [ty(v) for s in series for v in s.y]
    if not xs:
        raise ValidationError(f"{spec.table} holds no plottable rows")
    xr = tuple(map(tx, spec.x_range)) if spec.x_range else (min(xs), max(xs))
    yr = tuple(map(ty, spec.y_range)) if spec.y_range else (min(ys), max(ys))
    if xr[1] == xr[0]:
        xr = (xr[0] - 0.5, xr[1] + 0.5)
    if yr[1] == yr[0]:
        yr = (yr[0] - 0.5, yr[1] + 0.5)
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v):
        return MARGIN["left"] + (tx(v) - xr[0]) / (xr[1] - xr[0]) * pw

    def py(v):
        return MARGIN["top"] + ph - (ty(v) - yr[0]) / (yr[1] - yr[0]) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">'
           f'{escape(spec.title or spec.figure_id)}</text>',
           f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
           f'fill="none" stroke="black"/>']
    for v in _ticks(*xr, log_x):
        x = MARGIN["left"] + (v - xr[0]) / (xr[1] - xr[0]) * pw
        lab = f"1e{int(v)}" if log_x else _fmt(v)
        out.append(f'<line x1="{x:.2f}" y1="{MARGIN["top"] + ph}" x2="{x:.2f}" '
                   f'y2="{MARGIN["top"] + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{MARGIN["top"] + ph + 18}" '
                   f'text-anchor="middle">{lab}</text>')
    for v in _ticks(*yr, log_y):
        y = MARGIN["top"] + ph - (v - yr[0]) / (yr[1] - yr[0]) * ph
        lab = f"1e{int(v)}" if log_y else _fmt(v)
        out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{y:.2f}" x2="{MARGIN["left"]}" '
                   f'y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{y + 4:.2f}" '
                   f'text-anchor="end">{lab}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2:.1f}" y="{HEIGHT - 15}" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{MARGIN["top"] + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {MARGIN["top"] + ph / 2:.1f})">{escape(ylabel)}</text>')
    for n, s in enumerate(series):
        color = spec.styles.get(s.label, s.color)
        pts = [(px(a), py(b)) for a, b in zip(s.x, s.y)]
        out.append(f'<g class="series" data-label="{escape(s.label)}">')
        if s.lines and len(pts) > 1:
            d = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
            out.append(f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        else:
            for a, b in pts:
                out.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="2.5" fill="{color}"/>')
        out.append("</g>")
        ly = MARGIN["top"] + 12 + 16 * n
        lx = WIDTH - MARGIN["right"] + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 18}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{lx + 24}" y="{ly + 4}">{escape(s.label)}</text>')
    for t, v, color in markers:
        out.append(f'<g class="phase-transition"><line x1="{px(t):.2f}" y1="{MARGIN["top"]}" '
                   f'x2="{px(t):.2f}" y2="{MARGIN["top"] + ph}" stroke="{color}" '
                   f'stroke-dasharray="4 3"/><circle cx="{px(t):.2f}" cy="{py(v):.2f}" r="4" '
                   f'fill="none" stroke="{color}"/></g>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(spec, path):
    path = Path(path)
    path.write_text(render_svg(spec), encoding="utf-8", newline="\n")
    return path


def theory_spectrum_table(k_values=range(1, 7), n_theta=21):
    """Closed-form spectrum curves as a figure table (series, k, theta, value)."""
    from .energy import theory_curve
    from .tables import Table

    rows = []
    for k in k_values:
        for i in range(n_theta):
            th = i / (n_theta - 1)
            rows.append(("theory", k, th, float(theory_curve(k, th))))
    return Table(["series", "k", "theta", "value"], ["text", "integer", "real", "real"], rows)
