# Copyright 2026 The lidarnav Authors
# SPDX-License-Identifier: Apache-2.0

import math

import numpy as np
import pytest

import lidarnav


def test_rigid_transform_round_trip():
    rng = np.random.default_rng(1)
    src = rng.uniform(-10, 10, size=(40, 3))
    t = lidarnav.transform_from_components(0.4, 0.1, -0.2, [1.0, -2.0, 0.5])
    dst = src @ t[:3, :3].T + t[:3, 3]
    est = lidarnav.estimate_rigid_transform(src, dst)
    assert np.allclose(est, t, atol=1e-9)


def test_nmea_sample():
    fix = lidarnav.parse_nmea_gga(
        "$GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,*47")
    assert fix["latitude"] == pytest.approx(48.1173, abs=1e-4)
    assert fix["longitude"] == pytest.approx(11.5167, abs=1e-4)
    assert fix["hdop"] == pytest.approx(0.9)
    with pytest.raises(lidarnav.LidarnavError, match="BadChecksum"):
        lidarnav.parse_nmea_gga(
            "$GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,*48")


def test_geodetic_offsets():
    x, y = lidarnav.geodetic_to_local(42.0 + 1e-5, 10.0, 42.0, 10.0)
    assert y == pytest.approx(1.11, abs=0.01)
    assert x == 0.0


def test_phase_correlate_integer_shift():
    rng = np.random.default_rng(2)
    a = rng.uniform(0, 10, size=(64, 64))
    b = np.roll(a, shift=(-3, 5), axis=(0, 1))
    dx, dy, peak = lidarnav.phase_correlate(a, b)
    assert (dx, dy) == (5, -3)
    assert peak > 0.9


def test_planar_match_on_simulated_scan():
    scan = lidarnav.raycast_scan("bridge_crossing", 140.0, seed=3)
    assert 6000 <= len(scan) <= 27000
    t = lidarnav.transform_from_components(math.radians(2.0), translation=[1.0, -0.5, 0.0])
    m = lidarnav.match_planar(scan, lidarnav.apply_transform(t, scan))
    assert m["yaw"] == pytest.approx(math.radians(2.0), abs=math.radians(0.125))
    assert m["dx"] == pytest.approx(1.0)
    assert m["dy"] == pytest.approx(-0.5)


def test_simulate_and_run(tmp_path):
    settings = {"sim.duration": 2, "sim.start_x": 135, "pipeline.method": "planar"}
    n = lidarnav.simulate(tmp_path / "data", settings)
    assert n == 20
    report = lidarnav.run(tmp_path / "data", tmp_path / "out", settings)
    assert report["trajectory"].shape[1] == 4
    assert (tmp_path / "out" / "trajectory.csv").read_text().startswith("t,x,y,yaw,source\n")
    assert report["fused_metrics"]["ate_rmse"] < 1.0
    m = lidarnav.compute_metrics(report["truth"], report["truth"])
    assert m["ate_rmse"] == 0.0


def test_bad_setting_raises():
    with pytest.raises(lidarnav.LidarnavError):
        lidarnav.simulate("/tmp/never", {"sim.warp": 1})
