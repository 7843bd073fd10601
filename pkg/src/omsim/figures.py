"""Figure presets, sweep records and file output.

Each preset pairs a parameter set with a one-dimensional sweep and a list
of named feature checks.  :func:`run_figure` evaluates the sweep, runs the
checks and returns a :class:`SweepResult` that :func:`write_csv`,
:func:`write_json` and :func:`write_plot` serialise.

Data rows never carry timestamps, so CSV output is byte-stable; the run
time is stored only in the JSON provenance block.
"""
from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
import os
import subprocess
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import metadata
from pathlib import Path

import numpy as np

from . import effective_mass as em
from . import linear_response as lr
from . import multistability as ms
from .errors import OutputError, UnknownFigure
from .params import TWO_PI, SystemParams, reference_params, to_config

BRANCH_COLUMNS = ("sweep_value", "root_index", "x1_m", "stable", "eigen_max_real")
MASS_COLUMNS = ("delta_over_omega_m", "m_prime_ng", "m_doubleprime_ng",
                "m_prime_oracle_ng", "m_doubleprime_oracle_ng", "pole_flag")
SPECTRUM_COLUMNS = ("omega_over_omega_m", "eps_t_re", "eps_t_im", "t_b", "t_f",
                    "branch_index", "method")

#: Half width of the window around Omega_m used for Fano metrics, in Omega_m.
FANO_WINDOW = 0.05

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


@dataclass(frozen=True)
class Sweep:
    """Linear sweep of ``variable`` in SI units.

    ``variable`` is ``Pc`` [W], ``Delta1``/``Delta2`` [rad/s] or ``Omega``
    [rad/s, probe detuning].
    """

    variable: str
    start: float
    stop: float
    points: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class FigurePreset:
    figure_id: str
    kind: str  # "effective_mass", "branches" or "spectrum"
    params: SystemParams
    sweep: Sweep
    expected_features: tuple[str, ...]
    plot_columns: tuple[str, str]
    notes: tuple[str, ...] = ()

    def with_points(self, points: int) -> "FigurePreset":
        s = self.sweep
        return FigurePreset(self.figure_id, self.kind, self.params,
                            Sweep(s.variable, s.start, s.stop, points),
                            self.expected_features, self.plot_columns, self.notes)


@dataclass(frozen=True)
class FeatureOutcome:
    name: str
    status: str
    detail: str

    @property
    def passed(self) -> bool:
        return self.status == PASS


@dataclass
class SweepResult:
    preset: FigurePreset
    columns: tuple[str, ...]
    rows: list[tuple]
    features: tuple[FeatureOutcome, ...] = ()
    summary: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]

    def feature(self, name: str) -> FeatureOutcome:
        for f in self.features:
            if f.name == name:
                return f
        raise KeyError(name)


# --------------------------------------------------------------------------
# row builders, shared with the command line

def branch_rows(sets: list[ms.BranchSet]) -> list[tuple]:
    rows = []
    for bs in sets:
        for k, r in enumerate(bs.roots):
            rows.append((bs.sweep_value, k, r.x1, r.stability, r.eigen_max_real))
    return rows


def mass_row(params: SystemParams, delta_over_omega_m: float) -> tuple:
    rep = em.report(params)
    ng = em.KG_PER_NG
    cf = (math.nan, math.nan) if rep.M_prime is None else (rep.M_prime, rep.M_doubleprime)
    return (delta_over_omega_m, cf[0] / ng, cf[1] / ng,
            rep.M_prime_oracle / ng, rep.M_doubleprime_oracle / ng,
            rep.pole or "")


def mass_rows(params: SystemParams, variable: str, values) -> list[tuple]:
    """Masses along a ``Delta1`` or ``Delta2`` sweep (values in rad/s)."""
    if variable not in ("Delta1", "Delta2"):
        raise ValueError("mass sweeps run over Delta1 or Delta2")
    rows = []
    for v in values:
        p = params.replace(**{variable: float(v)})
        rows.append(mass_row(p, float(v) / params.Omega_m))
    return rows


def spectrum_rows(points: list[lr.SpectrumPoint], Omega_m: float) -> list[tuple]:
    return [(pt.Omega / Omega_m, pt.eps_T.real, pt.eps_T.imag, pt.T_b, pt.T_f,
             pt.branch_index, pt.method) for pt in points]


def fano_metrics(omega_over_m, t_f, half_width: float = FANO_WINDOW) -> dict | None:
    """Extremes of ``T_f`` within ``|Omega/Omega_m - 1| <= half_width``.

    ``depth`` is max minus min and ``contrast`` is depth over max.
    """
    w = np.asarray(omega_over_m, dtype=float)
    t = np.asarray(t_f, dtype=float)
    sel = (np.abs(w - 1.0) <= half_width) & np.isfinite(t)
    if not np.any(sel):
        return None
    tw = t[sel]
    hi, lo = float(tw.max()), float(tw.min())
    return {
        "max": hi,
        "min": lo,
        "depth": hi - lo,
        "contrast": (hi - lo) / hi if hi > 0 else 0.0,
        "omega_at_min": float(w[sel][int(tw.argmin())]),
    }


# --------------------------------------------------------------------------
# presets

def _fig2_params(**overrides):
    cfg = dict(g_tunnel_over_omega_m=0.1, delta1_over_omega_m=1.0,
               delta2_over_omega_m=1.0, pc_w=0.03)
    cfg.update(overrides)
    return reference_params(**cfg)


def _fig5_params(g):
    return reference_params(g1_hz_per_m=6.0e18, g2_hz_per_m=6.0e18,
                            g_tunnel_over_omega_m=g, delta1_over_omega_m=-1.0,
                            delta2_over_omega_m=-1.0, pc_w=1e-3, pp_w=1e-6)


FIG3_G = {"a": 0.0, "b": 0.1, "c": 0.2, "d": 0.4, "e": 0.5, "f": 0.6}
FIG5_G = {"a": 0.0, "b": 0.2, "c": 0.4}

_RANGE_NOTE = "sweep range is an estimate of the plotted axis"
_G_NOTE = "tunnelling rate per panel is an estimate"


def _build_presets() -> dict[str, FigurePreset]:
    presets = {}
    Wm = reference_params().Omega_m

    p = _fig2_params()
    presets["2a"] = FigurePreset(
        "2a", "effective_mass", p, Sweep("Delta1", -Wm, Wm, 500),
        ("oracle_agreement", "m_prime_negligible"),
        ("delta_over_omega_m", "m_prime_ng"),
        ("Delta2 held at +Omega_m while Delta1 is swept",
         "single tunnelling rate g = 0.1 Omega_m"))
    presets["2b"] = FigurePreset(
        "2b", "effective_mass", p, Sweep("Delta2", -Wm, Wm, 500),
        ("oracle_agreement", "m_doubleprime_plateau"),
        ("delta_over_omega_m", "m_doubleprime_ng"),
        ("Delta1 held at +Omega_m while Delta2 is swept",
         "single tunnelling rate g = 0.1 Omega_m"))

    for panel, g in FIG3_G.items():
        p = reference_params(g_tunnel_over_omega_m=g, pc_w=0.03)
        if panel == "a":
            feats = ("single_bistable_window",)
        elif panel == "b":
            feats = ("five_roots_present", "onset_above_single_cavity")
        else:
            feats = ("multistable_present", "onset_above_single_cavity")
        presets["3" + panel] = FigurePreset(
            "3" + panel, "branches", p, Sweep("Pc", 0.0, 0.05, 500), feats,
            ("sweep_value", "x1_m"),
            (_RANGE_NOTE, _G_NOTE, "both cavities held at the same effective detuning"))

    for panel, g in FIG3_G.items():
        p = reference_params(g_tunnel_over_omega_m=g, pc_w=0.03)
        feats = ("nonlinearity_red_detuned",) if panel == "a" else ("multistable_present",)
        presets["4" + panel] = FigurePreset(
            "4" + panel, "branches", p, Sweep("Delta1", -2 * Wm, 2 * Wm, 500), feats,
            ("sweep_value", "x1_m"),
            (_RANGE_NOTE, _G_NOTE, "Delta2 set equal to Delta1 at every point",
             "both cavities held at the same effective detuning"))

    feats5 = {"a": ("tf_zero", "eps_t_dip_at_omega_m"),
              "b": ("fano_contrast",),
              "c": ("dip_smaller_than_5b",)}
    for panel, g in FIG5_G.items():
        p = _fig5_params(g)
        presets["5" + panel] = FigurePreset(
            "5" + panel, "spectrum", p, Sweep("Omega", 0.5 * Wm, 1.5 * Wm, 1024),
            feats5[panel], ("omega_over_omega_m", "t_f"),
            ("probe power 1 uW; the normalised response does not depend on it",
             "steady state from the lowest equal-detuning branch"))
    return presets


PRESETS: dict[str, FigurePreset] = _build_presets()
FIGURE_IDS = tuple(PRESETS)


def get_preset(figure_id: str) -> FigurePreset:
    try:
        return PRESETS[figure_id]
    except KeyError:
        raise UnknownFigure(figure_id) from None


# --------------------------------------------------------------------------
# evaluation

def _sweep_branches(preset: FigurePreset) -> list[ms.BranchSet]:
    s = preset.sweep
    return ms.sweep_branches(preset.params, s.variable, s.start, s.stop, s.points)


def spectrum_state(params: SystemParams, branch_index: int = 0):
    """Equal-detuning steady state used for a spectrum, and the root count."""
    states = ms.equal_detuning_states(params)
    if not 0 <= branch_index < len(states):
        raise IndexError(f"branch {branch_index} requested, {len(states)} available")
    return states[branch_index], len(states)


def _evaluate(preset: FigurePreset):
    p = preset.params
    if preset.kind == "effective_mass":
        rows = mass_rows(p, preset.sweep.variable, preset.sweep.values())
        return MASS_COLUMNS, rows, {}
    if preset.kind == "branches":
        sets = _sweep_branches(preset)
        summary = {
            "intervals_3_roots": ms.multi_root_intervals(sets, 3),
            "intervals_5_roots": ms.multi_root_intervals(sets, 5),
            "failed_points": [[bs.sweep_value, bs.error] for bs in sets if bs.error],
            "max_root_count": max((bs.count for bs in sets), default=0),
            "stable_counts_at_5_roots": sorted({bs.stable_count for bs in sets
                                                if bs.count == 5}),
        }
        return BRANCH_COLUMNS, branch_rows(sets), summary
    state, n_roots = spectrum_state(p)
    pts = lr.spectrum(p, state, preset.sweep.values())
    summary = {"branch_count": n_roots, "branch_index": 0,
               "x1_m": state.x1_bar, "x2_m": state.x2_bar,
               "failed_points": [[pt.Omega, pt.error] for pt in pts if pt.error]}
    return SPECTRUM_COLUMNS, spectrum_rows(pts, p.Omega_m), summary


@lru_cache(maxsize=None)
def _onset(figure_id: str, points: int) -> float | None:
    """First sweep value with more than one root."""
    for bs in _sweep_branches(get_preset(figure_id).with_points(points)):
        if bs.count > 1:
            return bs.sweep_value
    return None


@lru_cache(maxsize=None)
def _reference_fano(figure_id: str, points: int) -> dict | None:
    res = _raw(get_preset(figure_id).with_points(points))
    return fano_metrics(res.column("omega_over_omega_m"), res.column("t_f"))


def _raw(preset: FigurePreset) -> SweepResult:
    cols, rows, summary = _evaluate(preset)
    return SweepResult(preset, cols, rows, (), summary)


def _counts(result: SweepResult) -> dict[float, int]:
    counts: dict[float, int] = {}
    for v in result.column("sweep_value"):
        counts[v] = counts.get(v, 0) + 1
    for v in result.preset.sweep.values():
        counts.setdefault(float(v), 0)
    return dict(sorted(counts.items()))


def _check(name: str, result: SweepResult) -> FeatureOutcome:
    pre = result.preset

    def out(ok, detail):
        return FeatureOutcome(name, PASS if ok else FAIL, detail)

    if name == "oracle_agreement":
        devs = []
        for r in result.rows:
            if r[5]:
                continue
            devs.append(em.relative_deviation(r[1], r[3], pre.params.m1 / em.KG_PER_NG))
            devs.append(em.relative_deviation(r[2], r[4], pre.params.m2 / em.KG_PER_NG))
        if not devs:
            return FeatureOutcome(name, SKIPPED, "every point hit a pole")
        worst = max(devs)
        return out(worst < 1e-6, f"max relative deviation {worst:.2e}")
    if name == "m_prime_negligible":
        mp = max(abs(v) for v in result.column("m_prime_ng"))
        mpp = min(abs(v) for v in result.column("m_doubleprime_ng"))
        return out(mp < 1e-3 * mpp, f"max |M'| = {mp:.3e} ng, min |M''| = {mpp:.3g} ng")
    if name == "m_doubleprime_plateau":
        vals = [r[2] for r in result.rows if 0.5 <= abs(r[0]) <= 1.0]
        if not vals:
            return FeatureOutcome(name, SKIPPED, "no sweep points with |Delta2| >= 0.5 Omega_m")
        lo, hi = min(vals), max(vals)
        ok = all(abs(v + 20.0) <= 2.0 for v in vals)
        return out(ok, f"M'' in [{lo:.4g}, {hi:.4g}] ng for |Delta2| in [0.5, 1] Omega_m")
    if name in ("single_bistable_window", "five_roots_present", "multistable_present",
                "nonlinearity_red_detuned"):
        counts = _counts(result)
        values = list(counts)
        n = [counts[v] for v in values]
        if name == "single_bistable_window":
            three = result.summary["intervals_3_roots"]
            ok = (len(three) == 1 and 5 not in n and n[0] == 1 and n[-1] == 1)
            return out(ok, f"3-root intervals {_fmt_intervals(three, 1e3, 'mW')}")
        if name == "five_roots_present":
            five = result.summary["intervals_5_roots"]
            return out(bool(five), f"5-root intervals {_fmt_intervals(five, 1e3, 'mW')}; "
                       f"stable counts {result.summary['stable_counts_at_5_roots']}")
        multi = [v for v, k in zip(values, n) if k > 1]
        if name == "multistable_present":
            return out(bool(multi), f"{len(multi)} of {len(values)} points with several roots")
        Wm = pre.params.Omega_m
        ok = bool(multi) and max(multi) < 0
        rng = f"[{min(multi) / Wm:.3f}, {max(multi) / Wm:.3f}]" if multi else "none"
        return out(ok, f"several roots for Delta1/Omega_m in {rng}")
    if name == "onset_above_single_cavity":
        ref = _onset("3a", pre.sweep.points)
        own = next((v for v, k in _counts(result).items() if k > 1), None)
        if ref is None or own is None:
            return FeatureOutcome(name, SKIPPED, "no multistable onset found")
        return out(own > ref, f"onset {own * 1e3:.3f} mW vs {ref * 1e3:.3f} mW at g = 0")
    if name == "tf_zero":
        worst = max(abs(v) for v in result.column("t_f"))
        return out(worst <= 1e-12, f"max |T_f| = {worst:.3e}")
    if name == "eps_t_dip_at_omega_m":
        w = np.array(result.column("omega_over_omega_m"))
        re = np.array(result.column("eps_t_re"))
        interior = np.arange(1, len(w) - 1)
        minima = interior[(re[interior] < re[interior - 1]) & (re[interior] < re[interior + 1])]
        if minima.size == 0:
            return out(False, "Re eps_T has no local minimum")
        k = minima[np.argmin(np.abs(w[minima] - 1.0))]
        step = w[1] - w[0]
        return out(abs(w[k] - 1.0) <= step,
                   f"local minimum at {w[k]:.6f} Omega_m, grid step {step:.2e}")
    if name == "fano_contrast":
        m = fano_metrics(result.column("omega_over_omega_m"), result.column("t_f"))
        if m is None:
            return FeatureOutcome(name, SKIPPED, "no finite T_f near Omega_m")
        return out(abs(m["contrast"] - 0.70) <= 0.15,
                   f"contrast {100 * m['contrast']:.1f}% (target 70 +- 15)")
    if name == "dip_smaller_than_5b":
        own = fano_metrics(result.column("omega_over_omega_m"), result.column("t_f"))
        ref = _reference_fano("5b", pre.sweep.points)
        if own is None or ref is None:
            return FeatureOutcome(name, SKIPPED, "no finite T_f near Omega_m")
        return out(own["depth"] < ref["depth"],
                   f"dip depth {own['depth']:.4f} vs {ref['depth']:.4f} at g = 0.2 Omega_m")
    return FeatureOutcome(name, SKIPPED, "no check registered")


def _fmt_intervals(intervals, factor, unit):
    if not intervals:
        return "none"
    return ", ".join(f"[{a * factor:.3f}, {b * factor:.3f}] {unit}" for a, b in intervals)


def version_string() -> str:
    """Package version, with the short commit hash when run from a checkout."""
    try:
        v = "v" + metadata.version("artifact")
    except metadata.PackageNotFoundError:
        v = "v0.0.0"
    try:
        rev = subprocess.run(["git", "rev-parse", "--short", "HEAD"],
                             cwd=os.path.dirname(__file__), capture_output=True,
                             text=True, timeout=5)
        if rev.returncode == 0 and rev.stdout.strip():
            v += "-g" + rev.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return v


def provenance(params: SystemParams, notes=()) -> dict:
    return {
        "omega_c_hz": params.omega_c / TWO_PI,
        "version": version_string(),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "params": to_config(params),
        "advisories": list(params.advisories),
        "notes": list(notes),
    }


def run_figure(figure_id: str, points: int | None = None) -> SweepResult:
    """Evaluate a preset and its feature checks.

    ``points`` overrides the sweep resolution.
    """
    preset = get_preset(figure_id)
    if points is not None:
        preset = preset.with_points(points)
    res = _raw(preset)
    res.features = tuple(_check(name, res) for name in preset.expected_features)
    res.provenance = provenance(preset.params, preset.notes)
    return res


# --------------------------------------------------------------------------
# output

def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, complex):
        return [_jsonable(v.real), _jsonable(v.imag)]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def result_dict(result: SweepResult) -> dict:
    pre = result.preset
    s = pre.sweep
    return _jsonable({
        "figure_id": pre.figure_id,
        "kind": pre.kind,
        "sweep": {"variable": s.variable, "start": s.start, "stop": s.stop,
                  "points": s.points},
        "columns": list(result.columns),
        "rows": [dict(zip(result.columns, r)) for r in result.rows],
        "features": [{"name": f.name, "status": f.status, "detail": f.detail}
                     for f in result.features],
        "summary": result.summary,
        "provenance": result.provenance,
    })


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write(path, text: str):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(path, exc.strerror or str(exc)) from exc


def write_csv(result: SweepResult, path) -> None:
    _write(path, csv_text(result.columns, result.rows))


def write_json(result: SweepResult, path) -> None:
    _write(path, json_text(result_dict(result)))


def write_plot(result: SweepResult, path) -> None:
    """Two whitespace-separated columns with a ``#`` header."""
    xc, yc = result.preset.plot_columns
    x, y = result.column(xc), result.column(yc)
    lines = [f"# {xc} {yc}"] + [f"{_cell(a)} {_cell(b)}" for a, b in zip(x, y)]
    _write(path, "\n".join(lines) + "\n")


def write_figure(result: SweepResult, out_dir, plot: bool = True) -> Path:
    """Write ``<out_dir>/<figure_id>/{data.csv,result.json,plot.dat}``."""
    d = Path(out_dir) / result.preset.figure_id
    write_csv(result, d / "data.csv")
    write_json(result, d / "result.json")
    if plot:
        write_plot(result, d / "plot.dat")
    return d
