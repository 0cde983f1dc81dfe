"""Command-line entry point: ``sheetlab <command> [flags]``.

Every command writes its CSV outputs and a ``manifest.json`` into a fresh
run directory ``<out>/<timestamp>-<digest8>``.  Exit codes: 0 success,
1 bad input (including unknown flags), 2 numeric or coverage failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import NumericError, SheetlabError, ValidationError
from .manifest import RunManifest, compare_outputs, make_run_dir, sha256_file
from .tables import Table, emit_csv, read_csv_untyped

DEFAULTS = {
    "simulate": dict(k=1, level=12, seed=0, replicate=0, alpha=0.45),
    "transform": dict(k=1, level=12, seed=0, replicate=0, count=100, max_freq=256.0,
                      sample_seed=1, smoothing=0.0, xi=None, y=None),
    "decay": dict(k=1, level=12, seed=0, replicate=0, samples=10_000, lo=2.0**-4,
                  hi=2.0**12, sample_seed=1, levels=[10, 12, 14]),
    "spectrum": dict(k=1, theta=[0.4, 0.6, 0.8, 1.0], seeds=8, seed=0, samples=100_000,
                     level=14, smoothing=0.25, max_exp=14, sample_seed=1),
    "knapp": dict(k=1, level=16, seed=0, replicate=0, p=2.0, q=4.0, alpha=0.45,
                  delta_max_exp=-4, delta_min_exp=-9, nodes=16),
    "exponents": dict(k=3, k_max=6),
    "figures": dict(ids=["spectrum_curves", "restriction_bounds"], spectrum_csv=[],
                    knapp_csv=None, decay_csv=None, k_max=6),
}


class _ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _ArgumentError(f"{self.prog}: error: {message}")


def _floats(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in str(text).split(",") if v.strip()]


def build_parser():
    p = _Parser(prog="sheetlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    S = argparse.SUPPRESS

    def common(sp, *, sheet=True):
        sp.add_argument("--config", default=S, help="JSON file of option values")
        sp.add_argument("--out", default=S, help="base directory for run folders (default runs)")
        if sheet:
            sp.add_argument("--k", type=int, default=S)
            sp.add_argument("--level", type=int, default=S)
            sp.add_argument("--seed", type=int, default=S, help="base seed")

    sp = sub.add_parser("simulate", help="generate sheet paths on the dyadic grid")
    common(sp)
    sp.add_argument("--replicate", type=int, default=S)
    sp.add_argument("--alpha", type=float, default=S, help="Hölder probe exponent")

    sp = sub.add_parser("transform", help="evaluate the surface transform")
    common(sp)
    sp.add_argument("--replicate", type=int, default=S)
    sp.add_argument("--count", type=int, default=S, help="random frequencies to draw")
    sp.add_argument("--max-freq", type=float, default=S, dest="max_freq")
    sp.add_argument("--sample-seed", type=int, default=S, dest="sample_seed")
    sp.add_argument("--smoothing", type=float, default=S)
    sp.add_argument("--xi", type=_floats, default=S, help="single frequency xi_1,..,xi_k")
    sp.add_argument("--y", type=float, default=S)

    sp = sub.add_parser("decay", help="envelope ratios and decay fits")
    common(sp)
    sp.add_argument("--replicate", type=int, default=S)
    sp.add_argument("--samples", type=int, default=S)
    sp.add_argument("--lo", type=float, default=S)
    sp.add_argument("--hi", type=float, default=S)
    sp.add_argument("--sample-seed", type=int, default=S, dest="sample_seed")
    sp.add_argument("--levels", type=_ints, default=S, help="comma list for the drift check")

    sp = sub.add_parser("spectrum", help="empirical Fourier spectrum thresholds")
    common(sp)
    sp.add_argument("--theta", type=_floats, default=S, help="comma list in (0, 1]")
    sp.add_argument("--seeds", type=int, default=S, help="number of replicate sheets")
    sp.add_argument("--samples", type=int, default=S)
    sp.add_argument("--smoothing", type=float, default=S)
    sp.add_argument("--max-exp", type=int, default=S, dest="max_exp")
    sp.add_argument("--sample-seed", type=int, default=S, dest="sample_seed")

    sp = sub.add_parser("knapp", help="Knapp cap scaling")
    common(sp)
    sp.add_argument("--replicate", type=int, default=S)
    sp.add_argument("--p", type=float, default=S)
    sp.add_argument("--q", type=float, default=S)
    sp.add_argument("--alpha", type=float, default=S)
    sp.add_argument("--delta-max-exp", type=int, default=S, dest="delta_max_exp")
    sp.add_argument("--delta-min-exp", type=int, default=S, dest="delta_min_exp")
    sp.add_argument("--nodes", type=int, default=S)

    sp = sub.add_parser("exponents", help="exact exponent thresholds")
    common(sp, sheet=False)
    sp.add_argument("--k", type=int, default=S)
    sp.add_argument("--k-max", type=int, default=S, dest="k_max")

    sp = sub.add_parser("figures", help="SVG figures from CSV tables")
    common(sp, sheet=False)
    sp.add_argument("--ids", type=lambda t: [v for v in t.split(",") if v], default=S)
    sp.add_argument("--spectrum-csv", action="append", default=S, dest="spectrum_csv")
    sp.add_argument("--knapp-csv", default=S, dest="knapp_csv")
    sp.add_argument("--decay-csv", default=S, dest="decay_csv")
    sp.add_argument("--k-max", type=int, default=S, dest="k_max")

    sp = sub.add_parser("replay", help="re-run a manifest and compare CSV bytes")
    sp.add_argument("manifest")
    sp.add_argument("--out", default=S)
    return p


def merge_config(command, flags):
    """Defaults < config file < explicit flags."""
    cfg = dict(DEFAULTS[command])
    path = flags.pop("config", None)
    if path:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from exc
        unknown = sorted(set(loaded) - set(cfg))
        if unknown:
            raise ValidationError(f"unknown config keys for {command}: {unknown}")
        cfg.update(loaded)
    cfg.update({k: v for k, v in flags.items() if k in cfg})
    return cfg


# ------------------------------------------------------------------ commands


def _sheet(cfg):
    from .paths import make_sheet, sheet_seeds

    seeds = sheet_seeds(cfg["seed"], cfg["k"], cfg.get("replicate", 0))
    return make_sheet(seeds, cfg["level"]), seeds


def cmd_simulate(cfg, run, log):
    from .paths import holder_probe

    sheet, seeds = _sheet(cfg)
    p0 = sheet.paths[0]
    names = ["t"] + [f"w_{j + 1}" for j in range(sheet.k)]
    rows = [tuple(r) for r in np.column_stack([p0.times] + [p.values for p in sheet.paths])]
    probes = [(j + 1, holder_probe(p, cfg["alpha"]).constant) for j, p in enumerate(sheet.paths)]
    for j, c in probes:
        log(f"holder constant (alpha={cfg['alpha']}) path {j}: {c:.6g}")
    return {"paths.csv": Table(names, ["real"] * len(names), rows),
            "holder.csv": Table(["coord", "constant"], ["integer", "real"], probes)}, seeds


def cmd_transform(cfg, run, log):
    from .fourier import sweep_table

    sheet, seeds = _sheet(cfg)
    k = cfg["k"]
    if cfg["xi"] is not None or cfg["y"] is not None:
        xi = cfg["xi"] or [0.0] * k
        if len(xi) != k:
            raise ValidationError(f"--xi needs {k} values")
        X = np.array([list(xi) + [cfg["y"] or 0.0]])
    else:
        rng = np.random.default_rng(cfg["sample_seed"])
        X = rng.uniform(-cfg["max_freq"], cfg["max_freq"], size=(cfg["count"], k + 1))
    table = sweep_table(sheet, X, cfg["smoothing"])
    if len(table.rows) == 1:
        log(f"transform {table.rows[0][-2]:.17g}  modulus {table.rows[0][-1]:.17g}")
    return {"transform.csv": table}, seeds


def cmd_decay(cfg, run, log):
    from .decay import DecayEnvelopeEstimator, envelope_level_sweep, regime_table

    sheet, seeds = _sheet(cfg)
    est = DecayEnvelopeEstimator(cfg["samples"], cfg["lo"], cfg["hi"],
                                 random_state=cfg["sample_seed"]).fit(sheet)
    sweep = envelope_level_sweep(seeds, cfg["levels"], est.samples_)
    fits = [(j + 1, r.name, f.exponent, f.n_samples, f.residual_rms, int(f.sufficient))
            for (j, r), f in est.fits_.items()]
    for row in fits:
        log(f"coord {row[0]} {row[1]:<18} exponent {row[2]:+.3f} (n={row[3]})")
    log(f"envelope constants by level {sweep.levels}: "
        + ", ".join(f"{c:.3f}" for c in sweep.constants) + f"; drift {sweep.drift:.3f}")
    return {
        "regimes.csv": regime_table(est.report_, est.samples_),
        "decay_fits.csv": Table(["coord", "regime", "exponent", "n", "residual_rms", "sufficient"],
                                ["integer", "text", "real", "integer", "real", "integer"], fits),
        "envelope_levels.csv": Table(["level", "constant", "max_ratio"],
                                     ["integer", "real", "real"],
                                     list(zip(sweep.levels, sweep.constants, sweep.max_ratios))),
    }, seeds


def cmd_spectrum(cfg, run, log):
    from .energy import SpectrumConfig, replicate_sheets, spectrum_curve, spectrum_table

    conf = SpectrumConfig(n_samples=cfg["samples"],
                          radii=tuple(2.0**m for m in range(4, cfg["max_exp"] + 1)),
                          n_seeds=cfg["seeds"], level=cfg["level"], smoothing=cfg["smoothing"],
                          base_seed=cfg["seed"], sample_seed=cfg["sample_seed"])
    sheets = replicate_sheets(cfg["k"], conf)
    curve = spectrum_curve(sheets, cfg["theta"], conf)
    for th, s, e, t in zip(curve.theta_grid, curve.s_star, curve.s_err, curve.theory):
        log(f"theta {th:.3f}  s_star {s:.4f} +- {e:.4f}  theory {t:.4f}")
    log(f"theta 0 (sup decay)  {curve.theta0_estimate:.4f}")
    per_seed = [(r, th, v) for r in range(curve.per_seed.shape[0])
                for th, v in zip(curve.theta_grid, curve.per_seed[r])]
    seeds = [s for sh in sheets for s in sh.seeds]
    return {"spectrum.csv": spectrum_table(curve),
            "spectrum_per_seed.csv": Table(["replicate", "theta", "s_star"],
                                           ["integer", "real", "real"], per_seed)}, seeds


def cmd_knapp(cfg, run, log):
    from .knapp import knapp_scaling_fit, scaling_table

    sheet, seeds = _sheet(cfg)
    deltas = [2.0**e for e in range(cfg["delta_max_exp"], cfg["delta_min_exp"] - 1, -1)]
    res = knapp_scaling_fit(sheet, None, deltas, cfg["p"], cfg["q"], cfg["alpha"], cfg["nodes"])
    log(f"alpha_eff {res.alpha_eff:.4f}; lhs exponent {res.fitted_lhs_exponent:.4f} "
        f"(predicted {res.predicted_lhs_exponent:.4f}); rhs exponent "
        f"{res.fitted_rhs_exponent:.4f}; violated {res.violated}")
    fit = Table(["quantity", "value"], ["text", "real"], [
        ("alpha_eff", res.alpha_eff), ("alpha", res.alpha),
        ("lhs_exponent", res.fitted_lhs_exponent), ("lhs_exponent_err", res.lhs_exponent_err),
        ("predicted_lhs_exponent", res.predicted_lhs_exponent),
        ("rhs_exponent", res.fitted_rhs_exponent), ("ratio_slope", res.ratio_slope),
        ("violated", float(res.violated))])
    return {"knapp.csv": scaling_table(res), "knapp_fit.csv": fit}, seeds


def cmd_exponents(cfg, run, log):
    from .exponents import bounds_table, report, report_table

    rep = report(cfg["k"])
    log(f"k={rep.k}: sufficient {rep.sufficient_q}, necessary {rep.necessary_q}, "
        f"hambrook_laba {rep.hambrook_laba_q}, stein_tomas {rep.stein_tomas_q}, "
        f"optimal_theta {rep.optimal_theta}")
    return {"exponents.csv": report_table(rep), "bounds.csv": bounds_table(cfg["k_max"])}, []


def _spectrum_rows(path):
    header, rows = read_csv_untyped(path)
    need = ["k", "theta", "s_star"]
    if any(n not in header for n in need):
        raise ValidationError(f"{path} is not a spectrum table")
    i = [header.index(n) for n in need]
    return [("empirical", int(r[i[0]]), float(r[i[1]]), float(r[i[2]])) for r in rows
            if float(r[i[1]]) > 0]


def cmd_figures(cfg, run, log):
    from .exponents import bounds_table
    from .svg import FIGURES, FigureSpec, emit_svg, theory_spectrum_table

    ids = cfg["ids"]
    bad = [i for i in ids if i not in FIGURES]
    if bad:
        raise ValidationError(f"unknown figure ids {bad}")
    missing = [f"{n} (needed by {i})" for i, n in (("knapp_scaling", "knapp_csv"),
                                                    ("decay_scatter", "decay_csv"))
               if i in ids and not cfg[n]]
    missing += [p for p in list(cfg["spectrum_csv"]) + [cfg["knapp_csv"], cfg["decay_csv"]]
                if p and not Path(p).is_file()]
    if missing:
        raise ValidationError(f"missing data tables: {missing}")
    tables = {}
    if "spectrum_curves" in ids:
        t = theory_spectrum_table(range(1, cfg["k_max"] + 1))
        for p in cfg["spectrum_csv"]:
            t.rows += _spectrum_rows(p)
        tables["spectrum_curves"] = t
    if "restriction_bounds" in ids:
        tables["restriction_bounds"] = bounds_table(cfg["k_max"])
    outputs = {}
    for fid in ids:
        csv_name = f"{fid}.csv"
        if fid in tables:
            emit_csv(tables[fid], run / csv_name)
        else:
            src = cfg["knapp_csv"] if fid == "knapp_scaling" else cfg["decay_csv"]
            (run / csv_name).write_bytes(Path(src).read_bytes())
        emit_svg(FigureSpec(fid, str(run / csv_name)), run / f"{fid}.svg")
        outputs[csv_name] = None
        outputs[f"{fid}.svg"] = None
        log(f"wrote {fid}.svg")
    return outputs, []


COMMANDS = {"simulate": cmd_simulate, "transform": cmd_transform, "decay": cmd_decay,
            "spectrum": cmd_spectrum, "knapp": cmd_knapp, "exponents": cmd_exponents,
            "figures": cmd_figures}


def _input_paths(command, cfg):
    if command != "figures":
        return []
    return [p for p in list(cfg["spectrum_csv"]) + [cfg["knapp_csv"], cfg["decay_csv"]] if p]


def execute(command, cfg, out_base, log=print):
    """Run one command with a merged config; returns (run_dir, manifest)."""
    inputs = {p: sha256_file(p) for p in _input_paths(command, cfg) if Path(p).is_file()}
    run, stamp = make_run_dir(out_base, command, cfg)
    outputs, seeds = COMMANDS[command](cfg, run, log)
    for name, table in outputs.items():
        if table is not None:
            emit_csv(table, run / name)
    digests = {name: sha256_file(run / name) for name in sorted(outputs)}
    manifest = RunManifest(command, cfg, [int(s) for s in seeds], timestamp=stamp,
                           inputs=inputs, outputs=digests)
    manifest.write(run / "manifest.json")
    log(f"run directory: {run}")
    return run, manifest


def replay(path, out_base, log=print):
    old = RunManifest.read(path)
    if old.command not in COMMANDS:
        raise ValidationError(f"manifest names unknown command {old.command!r}")
    changed = [p for p, d in old.inputs.items() if not Path(p).is_file() or sha256_file(p) != d]
    if changed:
        raise ValidationError(f"replay inputs changed or missing: {changed}")
    run, _ = execute(old.command, old.config, out_base, log)
    bad = compare_outputs(old.outputs, run)
    if bad:
        raise NumericError(f"replayed outputs differ: {bad}")
    log(f"replay identical: {len(old.outputs)} files")
    return run


def run(argv=None):
    """Parse ``argv`` and execute; returns the process exit code."""
    parser = build_parser()
    try:
        ns = vars(parser.parse_args(argv))
        command = ns.pop("command")
        out = Path(ns.pop("out", "runs"))
        if command == "replay":
            replay(ns["manifest"], out)
        else:
            execute(command, merge_config(command, ns), out)
        return 0
    except _ArgumentError as exc:
        print(exc, file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, ValueError, OSError, SheetlabError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
