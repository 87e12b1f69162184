import json
import math
import pathlib

import pytest

import dcp

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def test_normalize_amplitude_small_aperture():
    k = 2 * math.pi * 9.192631770e9 / 299792458.0
    eta = dcp.normalize_amplitude(5e-3, k)
    assert 1.0 < eta < 1.3


def test_p1_template_is_a_sine():
    for b in (0.3, 1.0, 2.7):
        dphi, dp = dcp.longitudinal_template(b, 1)
        assert dphi == pytest.approx(math.sin(b * math.pi / 2), rel=1e-12)
        assert dp == pytest.approx(0.5 * math.sin(b * math.pi / 2) ** 2, rel=1e-12)
    text = dcp.template_csv([1, 3], [0.5, 1.0])
    assert text.splitlines()[0].startswith("b,p")
    assert len(text.splitlines()) == 5


def test_balanced_network_cancels_odd_m():
    net = dcp.preset_network("two_balanced")
    assert abs(dcp.network_factor(net, 1)) < 1e-12
    assert abs(dcp.network_factor(net, 0) - 1) < 1e-12
    assert sum(dcp.feed_weights(net)) == pytest.approx(1.0)


def test_phase_imbalance_matches_cases():
    q0, ql, phi = 30000.0, 7500.0, 0.1
    net = dcp.case_phase_imbalance(q0, phi, ql)
    direct = dcp.network_factor(net, 1)
    closed = dcp.phase_imbalance_scale(q0 / net.q_loaded(), phi, 1)
    assert direct == pytest.approx(closed, abs=1e-12)


def test_config_and_errors(tmp_path):
    cfg = dcp.load_config(str(CONFIGS / "closed_analytic.json"))
    assert cfg.violations() == []
    assert len(cfg.hash) > 0
    assert cfg.body_radius == pytest.approx(0.026)

    doc = json.loads(cfg.document)
    doc["geometry"]["body_radius"] = "-3 mm"
    fields = [f for f, _ in dcp.config_from_dict(doc).violations()]
    assert "geometry.body_radius" in fields

    with pytest.raises(dcp.DcpError):
        dcp.load_config(str(tmp_path / "missing.json"))


def test_analytic_curve_deterministic():
    cfg = dcp.load_config(str(CONFIGS / "closed_analytic.json"), ["run.trajectories=2000"])
    field = dcp.build_field(cfg, [0, 1])
    assert field.eta == pytest.approx(1.12, abs=0.01)
    a = dcp.dcp_curve(field, "delta0", "mc", [1.0, 3.0], [0, 1], 2000, 1)
    b = dcp.dcp_curve(field, "delta0", "mc", [1.0, 3.0], [0, 1], 2000, 2)
    assert a == b
    assert len(a["points"]) == 4
    assert a["points"][0]["b"] == 1.0
