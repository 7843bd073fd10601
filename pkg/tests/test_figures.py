import json
import math

import numpy as np
import pytest

from omsim import figures
from omsim.errors import OutputError, UnknownFigure

TWO_PI = 2 * math.pi
WM = TWO_PI * 51.8e6

# published figure parameters in SI (rad/s, rad/(s m), kg, W)
COMMON = dict(m1=2e-11, m2=2e-11, Omega1=WM, Omega2=WM, gamma1=TWO_PI * 41e3,
              gamma2=TWO_PI * 41e3, kappa=TWO_PI * 15e6)
FIGURE_PARAMS = {
    "2": dict(COMMON, G1=TWO_PI * 1.8e19, G2=TWO_PI * 6e18, Pc=0.03, Delta1=WM, Delta2=WM),
    "3": dict(COMMON, G1=TWO_PI * 1.8e19, G2=TWO_PI * 6e18, Delta1=-WM),
    "4": dict(COMMON, G1=TWO_PI * 1.8e19, G2=TWO_PI * 6e18, Pc=0.03),
    "5": dict(COMMON, G1=TWO_PI * 6e18, G2=TWO_PI * 6e18, Pc=1e-3, Delta1=-WM, Delta2=-WM),
}
PANEL_G = {"2a": 0.1, "2b": 0.1, **{"3" + k: v for k, v in figures.FIG3_G.items()},
           **{"4" + k: v for k, v in figures.FIG3_G.items()},
           **{"5" + k: v for k, v in figures.FIG5_G.items()}}


@pytest.mark.parametrize("fid", figures.FIGURE_IDS)
def test_preset_matches_figure_parameters(fid):
    p = figures.get_preset(fid).params
    for name, value in FIGURE_PARAMS[fid[0]].items():
        assert getattr(p, name) == pytest.approx(value, rel=1e-12), name
    assert p.g == pytest.approx(PANEL_G[fid] * WM, rel=1e-12, abs=0)


def test_figure_ids_and_unknown():
    assert set(figures.FIGURE_IDS) == {"2a", "2b", *[f"{n}{c}" for n in "34" for c in "abcdef"],
                                       "5a", "5b", "5c"}
    with pytest.raises(UnknownFigure):
        figures.run_figure("6a")


def test_sweep_defaults():
    assert figures.PRESETS["3a"].sweep.points == 500
    assert figures.PRESETS["4c"].sweep.variable == "Delta1"
    assert figures.PRESETS["5b"].sweep.points == 1024


@pytest.fixture(scope="module")
def fig5b():
    return figures.run_figure("5b")


def test_5a_features():
    res = figures.run_figure("5a")
    assert res.feature("tf_zero").passed
    assert res.feature("eps_t_dip_at_omega_m").passed
    assert all(v == 0 for v in res.column("t_f"))


def test_2b_features():
    res = figures.run_figure("2b", points=101)
    assert res.feature("oracle_agreement").passed
    assert res.feature("m_doubleprime_plateau").passed
    assert len(res.rows) == 101 and res.columns == figures.MASS_COLUMNS


def test_3a_features():
    res = figures.run_figure("3a", points=101)
    assert res.feature("single_bistable_window").passed
    assert set(res.column("stable")) <= {"stable", "unstable", "marginal"}


def test_every_feature_has_an_outcome(fig5b):
    res = figures.run_figure("4b", points=51)
    for r in (res, fig5b):
        names = [f.name for f in r.features]
        assert names == list(r.preset.expected_features)
        assert all(f.status in (figures.PASS, figures.FAIL, figures.SKIPPED) for f in r.features)
        assert all(f.detail for f in r.features)


def test_5b_has_1024_rows(fig5b, tmp_path):
    assert len(fig5b.rows) == 1024
    d = figures.write_figure(fig5b, tmp_path)
    lines = (d / "data.csv").read_bytes().split(b"\r\n")
    assert lines[0].decode() == ",".join(figures.SPECTRUM_COLUMNS)
    assert len([ln for ln in lines if ln]) == 1025
    assert len((d / "plot.dat").read_text().splitlines()) == 1025


def test_csv_is_byte_stable(tmp_path):
    a, b = figures.run_figure("5c", points=64), figures.run_figure("5c", points=64)
    figures.write_csv(a, tmp_path / "a.csv")
    figures.write_csv(b, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_floats_round_trip_through_csv(fig5b):
    text = figures.csv_text(fig5b.columns, fig5b.rows[:20])
    k = fig5b.columns.index("t_b")
    for line, row in zip(text.splitlines()[1:], fig5b.rows):
        assert float(line.split(",")[k]) == row[k]


def test_empty_rows_give_header_only():
    assert figures.csv_text(figures.BRANCH_COLUMNS, []) == ",".join(figures.BRANCH_COLUMNS) + "\r\n"


def test_json_carries_provenance(fig5b, tmp_path):
    figures.write_json(fig5b, tmp_path / "r.json")
    doc = json.loads((tmp_path / "r.json").read_text())
    prov = doc["provenance"]
    assert prov["omega_c_hz"] > 0 and prov["version"].startswith("v")
    assert prov["timestamp"] and prov["params"]["pc_w"] == 1e-3
    assert doc["figure_id"] == "5b" and len(doc["rows"]) == 1024
    assert {f["name"] for f in doc["features"]} == {"fano_contrast"}


def test_json_has_no_nan():
    assert figures.json_text({"x": float("nan"), "y": [1.0, float("inf")]}) == (
        '{\n  "x": null,\n  "y": [\n    1.0,\n    null\n  ]\n}\n')


def test_write_errors_carry_the_path(tmp_path, fig5b):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OutputError) as exc:
        figures.write_csv(fig5b, blocker / "sub" / "data.csv")
    assert str(blocker) in str(exc.value)
    assert isinstance(exc.value, OSError)


def test_fano_metrics_on_a_synthetic_line():
    w = np.linspace(0.9, 1.1, 401)
    t = 1 - 0.5 * np.exp(-((w - 1.01) / 0.005) ** 2)
    m = figures.fano_metrics(w, t)
    assert m["max"] == pytest.approx(1.0, abs=1e-6)
    assert m["contrast"] == pytest.approx(0.5, rel=1e-6)
    assert m["omega_at_min"] == pytest.approx(1.01, abs=1e-3)
    assert figures.fano_metrics(w[:10], t[:10]) is None
