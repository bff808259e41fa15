import math
from pathlib import Path

import numpy as np
import pytest

import roi_nbv

ROOT = Path(__file__).resolve().parents[2]

SMALL = """name: py-small
scene:
  seed: 4
  resolution_m: 0.02
  room_min_m: [-0.6, -0.6, 0]
  room_max_m: [0.6, 0.6, 1.0]
  plants:
    - {base_m: [0.2, 0, 0], height_m: 0.6, leaf_count: 6, fruit_count: 3}
workspace:
  - shell: {center_m: [0, 0, 0.5], r_min_m: 0.1, r_max_m: 0.6}
planner:
  n_vps: 20
  budget_s: 10
  ray_rows: 6
  ray_cols: 8
  start_position_m: [-0.2, 0, 0.6]
  start_look_at_m: [0.2, 0, 0.3]
"""


@pytest.fixture(scope="module")
def scenario(tmp_path_factory):
    path = tmp_path_factory.mktemp("scn") / "small.yaml"
    path.write_text(SMALL)
    return roi_nbv.Scenario.load(str(path))


def test_single_ray_insert():
    m = roi_nbv.RoiMap(0.1)
    m.insert([0.0, 0.0, 0.0], np.array([[0.05, 0.0, 0.0]]), np.array([True]))
    assert m.state((0, 0, 0)) == "occupied"
    assert m.is_roi((0, 0, 0))
    keys, hit = m.raycast([-0.95, 0.05, 0.05], [1.0, 0.0, 0.0], 2.0)
    assert hit == (0, 0, 0)
    assert keys[-1] == hit


def test_serialize_round_trip():
    m = roi_nbv.RoiMap(0.05)
    pts = np.random.default_rng(0).uniform(-1, 1, size=(50, 3))
    m.insert([0.0, 0.0, 0.0], pts, pts[:, 0] > 0)
    data = m.serialize()
    assert len(data) == 24 + 20 * len(m)
    assert roi_nbv.RoiMap.deserialize(data) == m


def test_formulas():
    assert roi_nbv.proximity_weight(0.0, 0.1) == 1.0
    assert roi_nbv.proximity_weight(0.1, 0.1) == 0.5
    assert roi_nbv.utility(0.5, 2.0, 0.05) == pytest.approx(0.4)
    u, p, exact = roi_nbv.mann_whitney_u([4, 5, 6], [1, 2, 3])
    assert (u, p, exact) == (9.0, 0.05, True)
    m = roi_nbv.RoiMap(0.05)
    assert roi_nbv.information_gain(m, [0, 0, 0], [1, 0, 0]) == 1.0
    assert roi_nbv.information_gain(m, [0, 0, 0], [1, 0, 0], "proximity") == pytest.approx(0.5)


def test_bad_input_raises():
    with pytest.raises(ValueError):
        roi_nbv.RoiMap(0.1).insert([0, 0, 0], np.zeros((2, 2)), np.zeros(2, dtype=bool))
    with pytest.raises(ValueError):
        roi_nbv.Scenario.load("/nonexistent.yaml")


def test_scene_render_and_trial(scenario):
    assert len(scenario.fruit_centroids) == 3
    truth = scenario.ground_truth_map()
    assert scenario.metrics(truth)["detected_rois"] == 3
    assert len(roi_nbv.cluster_rois(truth)) == 3

    depth, pts, roi = scenario.render([-0.2, 0, 0.6], [0.2, 0, 0.3])
    assert depth.shape == (120, 160)
    assert pts.shape[0] == roi.shape[0] > 0

    a = scenario.run_trial(seed=1)
    b = scenario.run_trial(seed=1)
    summary = lambda t: [(r["time"], r["kind"], r["known_voxels"], r["roi_voxels"]) for r in t["rows"]]
    assert summary(a) == summary(b)
    assert a["final_map"] == b["final_map"]
    assert a["contract_issues"] == []
    assert a["rows"][0]["kind"] == "initial"
    assert a["rows"][-1]["kind"] == "final"
    assert math.isclose(a["rows"][-1]["time"], 10.0)
    roi_f, expl_f = roi_nbv.frontiers(a["final_map"])
    assert len(expl_f) > 0


def test_shipped_scenario_parses():
    s = roi_nbv.Scenario.load(str(ROOT / "scenarios" / "scenario1.yaml"))
    assert len(s.fruit_centroids) == 14
