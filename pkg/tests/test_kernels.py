import numpy as np
import pytest

from rmsim import _kernels
from rmsim import _kernels_numpy as np_lane

numba_lane = pytest.importorskip("rmsim._kernels_numba")


class TestFirstPassage:
    def test_hand_cases(self):
        inc = np.array(
            [
                [1.0, -3.0, 1.0],   # crosses at step 2
                [-0.5, 1.0, 1.0],   # crosses at step 1
                [1.0, 1.0, 1.0],    # never crosses -> n + 1
                [0.0, 0.0, -0.1],   # crosses at step 3
            ]
        )
        for lane in (np_lane, numba_lane):
            out = lane.first_passage_below(inc)
            assert out.tolist() == [2, 1, 4, 3]

    def test_lanes_agree_exactly(self):
        rng = np.random.default_rng(5)
        inc = rng.standard_normal((4000, 96))
        a = np_lane.first_passage_below(inc)
        b = numba_lane.first_passage_below(inc)
        assert np.array_equal(a, b)


class TestPlaneWalk:
    def _run(self, lane, inc_tau, inc_s, detect_s=-1.0, reset_s=0.5):
        n = inc_tau.size
        tau = np.empty(n + 1)
        s = np.empty(n + 1)
        det_steps = np.empty(n, dtype=np.int64)
        det_taus = np.empty(n)
        n_det = lane.plane_walk(
            0.0, 0.5, inc_tau, inc_s, detect_s, reset_s, tau, s, det_steps, det_taus
        )
        return tau, s, det_steps[:n_det], det_taus[:n_det]

    def test_detection_and_reset_semantics(self):
        inc_tau = np.array([0.1, 0.1, 0.1, 0.1])
        inc_s = np.array([-0.5, -1.5, 0.2, -2.0])
        for lane in (np_lane, numba_lane):
            tau, s, det_steps, det_taus = self._run(lane, inc_tau, inc_s)
            # crossing values stay in the trace, the walk resumes from reset_s
            assert s.tolist() == pytest.approx([0.5, 0.0, -1.5, 0.7, -1.3])
            assert det_steps.tolist() == [2, 4]
            assert det_taus.tolist() == pytest.approx([0.2, 0.4])
            assert tau.tolist() == pytest.approx([0.0, 0.1, 0.2, 0.3, 0.4])

    def test_lanes_agree(self):
        rng = np.random.default_rng(6)
        inc_tau = 0.01 + 0.05 * rng.standard_normal(20000)
        inc_s = 0.3 * rng.standard_normal(20000)
        res_np = self._run(np_lane, inc_tau, inc_s)
        res_nb = self._run(numba_lane, inc_tau, inc_s)
        assert np.array_equal(res_np[2], res_nb[2])
        assert np.allclose(res_np[0], res_nb[0], atol=1e-12)
        assert np.allclose(res_np[1], res_nb[1], atol=1e-12)
        assert np.allclose(res_np[3], res_nb[3], atol=1e-12)

    def test_no_detection_without_crossing(self):
        inc_tau = np.zeros(10)
        inc_s = np.full(10, 0.1)
        for lane in (np_lane, numba_lane):
            _, s, det_steps, _ = self._run(lane, inc_tau, inc_s)
            assert det_steps.size == 0
            assert s[-1] == pytest.approx(1.5)


def test_active_lane_reports_selection():
    assert _kernels.active_lane() in ("numba", "numpy")
