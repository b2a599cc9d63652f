# Copyright 2026 The lidarnav Authors
# SPDX-License-Identifier: Apache-2.0
"""LiDAR scan matching and GPS fusion for surface vessels.

Clouds are (N, 4) float64 arrays of x, y, z, intensity. Transforms are 4x4
homogeneous matrices mapping the source scan onto the target. ``settings``
dictionaries take the same dotted keys as the CLI config file, for example
``{"pipeline.method": "planar", "sim.duration": 5}``.
"""

from ._core import (
    LidarnavError,
    apply_transform,
    bundled_scene_names,
    compute_metrics,
    config_keys,
    estimate_rigid_transform,
    geodetic_to_local,
    match_planar,
    nmea_checksum,
    parse_nmea_gga,
    phase_correlate,
    raycast_scan,
    read_cloud,
    register_scans,
    run,
    simulate,
    transform_from_components,
    write_cloud,
)

__all__ = [
    "LidarnavError",
    "apply_transform",
    "bundled_scene_names",
    "compute_metrics",
    "config_keys",
    "estimate_rigid_transform",
    "geodetic_to_local",
    "match_planar",
    "nmea_checksum",
    "parse_nmea_gga",
    "phase_correlate",
    "raycast_scan",
    "read_cloud",
    "register_scans",
    "run",
    "simulate",
    "transform_from_components",
    "write_cloud",
]
