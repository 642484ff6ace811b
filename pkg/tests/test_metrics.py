import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flowbench import metrics, spawn_rng
from flowbench.core import SEVERITIES, CorruptionKind as K, KITTI_FC_KINDS
from flowbench.metrics import CellMetrics, EpeValue


def loop_epe(pred, gt, mask):
    """Independent scalar per-pixel oracle."""
    total, count = 0.0, 0
    h, w = pred.shape[:2]
    for y in range(h):
        for x in range(w):
            if mask[y, x]:
                du = float(pred[y, x, 0]) - float(gt[y, x, 0])
                dv = float(pred[y, x, 1]) - float(gt[y, x, 1])
                total += math.sqrt(du * du + dv * dv)
                count += 1
    return total / count


def random_field(rng, h=8, w=8):
    return (rng.random((h, w, 2)) * 40 - 20).astype(np.float32)


# Per-corruption CRE values of two model rows from the source benchmark's
# published results, used as metric-arithmetic fixtures.
RAFT_OOD_CRE = {
    K.JPEG: 5.99, K.PIXELATE: 0.24, K.CONTRAST: 0.48, K.SATURATE: 1.44,
    K.HIGH_LIGHT: 0.90, K.LOW_LIGHT: 2.95, K.OVER_EXPOSURE: 2.45, K.UNDER_EXPOSURE: 0.05,
    K.SPATTER: 17.20, K.FOG: 2.05, K.FROST: 23.46, K.SNOW: 9.71,
    K.GAUSSIAN_NOISE: 9.48, K.SHOT_NOISE: 7.92, K.IMPULSE_NOISE: 9.91,
    K.GAUSSIAN_BLUR: 1.85, K.DEFOCUS_BLUR: 2.02, K.GLASS_BLUR: 4.72,
    K.CAMERA_MOTION_BLUR: 0.93, K.PSF_BLUR: 1.11,
}
RAFT_OOD_CLEAN_EPE = 4.29

ARFLOW_ID_CRE = {
    K.JPEG: 0.92, K.PIXELATE: 0.05, K.CONTRAST: 4.67, K.SATURATE: 0.34,
    K.HIGH_LIGHT: 1.64, K.LOW_LIGHT: 3.86, K.OVER_EXPOSURE: 0.64, K.UNDER_EXPOSURE: 0.42,
    K.SPATTER: 5.74, K.FOG: 4.10, K.FROST: 15.51, K.SNOW: 7.58,
    K.GAUSSIAN_NOISE: 2.28, K.SHOT_NOISE: 1.77, K.IMPULSE_NOISE: 2.35,
    K.GAUSSIAN_BLUR: 0.28, K.DEFOCUS_BLUR: 0.30, K.GLASS_BLUR: 0.81,
    K.CAMERA_MOTION_BLUR: 0.84, K.PSF_BLUR: 0.73,
}
ARFLOW_ID_CLEAN_EPE = 3.02


def report_from_cre_row(model_id, cre_per_kind, epe_clean):
    """Grid whose per-severity EPEs reproduce the given per-kind CREs."""
    cells = [
        CellMetrics(kind, s, epe=epe_clean + value, rcre=value)
        for kind, value in cre_per_kind.items()
        for s in SEVERITIES
    ]
    return metrics.aggregate("kitti_fc", model_id, list(cre_per_kind), epe_clean, cells)


class TestEpe:
    def test_identity_zero(self):
        f = random_field(spawn_rng(1))
        assert metrics.epe(f, f).value == 0.0

    def test_three_four_five(self):
        pred = np.zeros((4, 4, 2), dtype=np.float32)
        pred[..., 0] = 3.0
        pred[..., 1] = 4.0
        gt = np.zeros((4, 4, 2), dtype=np.float32)
        result = metrics.epe(pred, gt)
        assert result.value == pytest.approx(5.0, abs=1e-9)
        assert result.pixel_count == 16

    def test_matches_loop_oracle(self):
        rng = spawn_rng(2)
        for _ in range(5):
            pred, gt = random_field(rng), random_field(rng)
            mask = rng.random((8, 8)) < 0.7
            mask[0, 0] = True
            assert metrics.epe(pred, gt, mask).value == pytest.approx(
                loop_epe(pred, gt, mask), abs=1e-6
            )

    def test_mask_restriction(self):
        pred = np.zeros((2, 2, 2), dtype=np.float32)
        gt = np.zeros((2, 2, 2), dtype=np.float32)
        gt[0, 0] = (10, 0)
        mask = np.array([[False, True], [True, True]])
        assert metrics.epe(pred, gt, mask).value == 0.0

    def test_zero_valid_pixels(self):
        f = random_field(spawn_rng(3))
        with pytest.raises(metrics.MetricError, match="zero valid"):
            metrics.epe(f, f, np.zeros((8, 8), bool))

    def test_nan_rejected(self):
        f = random_field(spawn_rng(4))
        g = f.copy()
        g[0, 0, 0] = np.nan
        with pytest.raises(metrics.MetricError, match="finite"):
            metrics.epe(f, g)

    def test_dimension_mismatch(self):
        with pytest.raises(metrics.MetricError, match="differ"):
            metrics.epe(random_field(spawn_rng(5)), random_field(spawn_rng(5), 9, 8))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_symmetric(self, seed):
        rng = spawn_rng(seed)
        a, b = random_field(rng, 4, 4), random_field(rng, 4, 4)
        assert metrics.epe(a, b).value == pytest.approx(metrics.epe(b, a).value, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_triangle_inequality(self, seed):
        rng = spawn_rng(seed)
        a, b, c = (random_field(rng, 4, 4) for _ in range(3))
        assert metrics.epe(a, c).value <= metrics.epe(a, b).value + metrics.epe(b, c).value + 1e-9


class TestRcre:
    def test_identical_zero(self):
        f = random_field(spawn_rng(6))
        assert metrics.rcre(f, f) == 0.0

    def test_constant_offset(self):
        f = random_field(spawn_rng(7))
        shifted = f + np.array([0.0, 1.0], dtype=np.float32)
        assert metrics.rcre(shifted, f) == pytest.approx(1.0, abs=1e-6)

    def test_translation_detection(self):
        f = random_field(spawn_rng(8))
        shifted = f + np.array([3.0, 4.0], dtype=np.float32)
        assert metrics.rcre(shifted, f) == pytest.approx(5.0, abs=1e-5)

    def test_matches_loop_oracle(self):
        rng = spawn_rng(9)
        a, b = random_field(rng), random_field(rng)
        mask = rng.random((8, 8)) < 0.6
        mask[0, 0] = True
        assert metrics.rcre(a, b, mask) == pytest.approx(loop_epe(a, b, mask), abs=1e-6)


class TestCreCrer:
    def test_cre_difference(self):
        assert metrics.cre(EpeValue(9.54, 100), EpeValue(4.29, 100)) == pytest.approx(5.25)

    def test_cre_zero_and_negative(self):
        assert metrics.cre(EpeValue(4.0, 10), EpeValue(4.0, 10)) == 0.0
        assert metrics.cre(EpeValue(3.5, 10), EpeValue(4.0, 10)) == pytest.approx(-0.5)

    def test_cre_mask_mismatch(self):
        with pytest.raises(metrics.MetricError, match="mask mismatch"):
            metrics.cre(EpeValue(1.0, 10), EpeValue(1.0, 11))

    def test_crer_paper_rows(self):
        assert metrics.crer(5.24, 4.29) == pytest.approx(1.22, abs=0.01)
        assert metrics.crer(2.74, 3.02) == pytest.approx(0.91, abs=0.01)

    def test_crer_zero(self):
        assert metrics.crer(0.0, 2.0) == 0.0

    def test_crer_guard(self):
        with pytest.raises(metrics.MetricError, match="positive"):
            metrics.crer(1.0, 0.0)


class TestAggregate:
    def test_constant_grid(self):
        cells = [
            CellMetrics(k, s, epe=3.0, rcre=1.5) for k in KITTI_FC_KINDS for s in SEVERITIES
        ]
        report = metrics.aggregate("kitti_fc", "m", KITTI_FC_KINDS, 2.0, cells)
        for k in KITTI_FC_KINDS:
            assert report.cre_per_kind[k] == pytest.approx(1.0)
            assert report.rcre_per_kind[k] == pytest.approx(1.5)
        assert report.cre == pytest.approx(1.0)
        assert report.rcre == pytest.approx(1.5)
        assert report.crer == pytest.approx(0.5)
        assert report.avg_corrupted_epe == pytest.approx(3.0)

    def test_single_kind_severity_mean(self):
        cells = [CellMetrics(K.FOG, s, epe=1.0 + s) for s in SEVERITIES]
        report = metrics.aggregate("kitti_fc", "m", [K.FOG], 1.0, cells)
        assert report.cre_per_kind[K.FOG] == pytest.approx(3.0)

    def test_missing_cells_listed(self):
        cells = [CellMetrics(K.FOG, s, epe=2.0) for s in (1, 2, 3)]
        with pytest.raises(metrics.MissingCellsError, match="fog/s4"):
            metrics.aggregate("kitti_fc", "m", [K.FOG], 1.0, cells)

    def test_paper_raft_ood_row(self):
        report = report_from_cre_row("RAFT", RAFT_OOD_CRE, RAFT_OOD_CLEAN_EPE)
        assert report.cre == pytest.approx(5.24, abs=0.02)
        assert report.crer == pytest.approx(1.22, abs=0.01)

    def test_paper_arflow_id_row(self):
        report = report_from_cre_row("ARFlow", ARFLOW_ID_CRE, ARFLOW_ID_CLEAN_EPE)
        assert report.cre == pytest.approx(2.74, abs=0.02)
        assert report.crer == pytest.approx(0.91, abs=0.01)

    def test_rcre_only_grid(self):
        cells = [CellMetrics(k, s, rcre=0.5) for k in KITTI_FC_KINDS for s in SEVERITIES]
        report = metrics.aggregate("gopro_fc", "m", KITTI_FC_KINDS, None, cells)
        assert report.cre is None and report.crer is None
        assert report.rcre == pytest.approx(0.5)

    def test_scaling_linearity(self):
        def build(k):
            cells = [
                CellMetrics(kind, s, epe=k * (2.0 + s * 0.1), rcre=k * 0.3)
                for kind in KITTI_FC_KINDS
                for s in SEVERITIES
            ]
            return metrics.aggregate("kitti_fc", "m", KITTI_FC_KINDS, k * 2.0, cells)

        base, scaled = build(1.0), build(3.0)
        assert scaled.cre == pytest.approx(3.0 * base.cre, rel=1e-9)
        assert scaled.rcre == pytest.approx(3.0 * base.rcre, rel=1e-9)
        assert scaled.crer == pytest.approx(base.crer, rel=1e-9)

    def test_order_independence(self):
        rng = spawn_rng(10)
        cells = [
            CellMetrics(k, s, epe=float(rng.random() * 10))
            for k in KITTI_FC_KINDS
            for s in SEVERITIES
        ]
        a = metrics.aggregate("kitti_fc", "m", KITTI_FC_KINDS, 1.0, cells)
        b = metrics.aggregate("kitti_fc", "m", KITTI_FC_KINDS, 1.0, cells[::-1])
        assert a.cre == b.cre


class TestRanking:
    def make(self, model_id, crer_value):
        cells = [
            CellMetrics(k, s, epe=RAFT_OOD_CLEAN_EPE * (1 + crer_value))
            for k in KITTI_FC_KINDS
            for s in SEVERITIES
        ]
        return metrics.aggregate("kitti_fc", model_id, KITTI_FC_KINDS, RAFT_OOD_CLEAN_EPE, cells)

    def test_single_report(self):
        ranking = metrics.rank_models([self.make("only", 1.0)], "crer")
        assert ranking == [(1, "only", pytest.approx(1.0))]

    def test_paper_crer_ordering(self):
        reports = [
            self.make("RAFT", 1.22),
            self.make("SAMFlow-B", 1.09),
            self.make("FlowFormer", 1.13),
        ]
        ranking = metrics.rank_models(reports, "crer")
        assert [m for _, m, _ in ranking] == ["SAMFlow-B", "FlowFormer", "RAFT"]
        assert [r for r, _, _ in ranking] == [1, 2, 3]

    def test_ties_share_smaller_rank(self):
        reports = [self.make("a", 1.0), self.make("b", 1.0), self.make("c", 2.0)]
        ranking = metrics.rank_models(reports, "crer")
        assert [(r, m) for r, m, _ in ranking] == [(1, "a"), (1, "b"), (3, "c")]

    @settings(max_examples=20, deadline=None)
    @given(
        st.lists(
            st.floats(min_value=0.01, max_value=50, allow_nan=False),
            min_size=2,
            max_size=6,
            unique=True,
        ),
        st.sampled_from(["exp", "affine", "cube"]),
    )
    def test_monotone_transform_invariance(self, values, transform):
        fn = {
            "exp": lambda v: math.exp(v / 10),
            "affine": lambda v: 3 * v + 7,
            "cube": lambda v: v**3,
        }[transform]
        base = [self.make(f"m{i}", v) for i, v in enumerate(values)]
        mapped = [self.make(f"m{i}", fn(v)) for i, v in enumerate(values)]
        rank_base = [(r, m) for r, m, _ in metrics.rank_models(base, "crer")]
        rank_mapped = [(r, m) for r, m, _ in metrics.rank_models(mapped, "crer")]
        assert rank_base == rank_mapped

    def test_mismatched_sets_rejected(self):
        a = self.make("a", 1.0)
        cells = [CellMetrics(K.FOG, s, epe=2.0) for s in SEVERITIES]
        b = metrics.aggregate("kitti_fc", "b", [K.FOG], 1.0, cells)
        with pytest.raises(metrics.MetricError, match="mix"):
            metrics.rank_models([a, b], "crer")

    def test_unknown_key(self):
        with pytest.raises(metrics.MetricError, match="unknown ranking key"):
            metrics.rank_models([self.make("a", 1.0)], "flops")


class TestSerialization:
    def test_report_round_trip(self, tmp_path):
        report = report_from_cre_row("RAFT", RAFT_OOD_CRE, RAFT_OOD_CLEAN_EPE)
        path = tmp_path / "report.json"
        metrics.save_report(report, path)
        back = metrics.load_report(path)
        assert back.cre == pytest.approx(report.cre, abs=1e-12)
        assert back.crer == pytest.approx(report.crer, abs=1e-12)
        assert back.model_id == "RAFT"
        assert back.corruption_kinds == report.corruption_kinds

    def test_render_table(self):
        report = report_from_cre_row("RAFT", RAFT_OOD_CRE, RAFT_OOD_CLEAN_EPE)
        table = metrics.render_table(report)
        assert "fog" in table and "CREr=1.222" in table

    def test_class_summary_grouping(self):
        report = report_from_cre_row("RAFT", RAFT_OOD_CRE, RAFT_OOD_CLEAN_EPE)
        summary = report.class_summary(report.cre_per_kind)
        # snow counts toward weather, psf toward blur
        weather = [RAFT_OOD_CRE[k] for k in (K.SPATTER, K.FOG, K.FROST, K.SNOW)]
        assert summary["weather"] == pytest.approx(sum(weather) / 4)
        blur = [
            RAFT_OOD_CRE[k]
            for k in (K.GAUSSIAN_BLUR, K.DEFOCUS_BLUR, K.GLASS_BLUR, K.CAMERA_MOTION_BLUR, K.PSF_BLUR)
        ]
        assert summary["blur"] == pytest.approx(sum(blur) / 5)

    def test_plot_csv(self, tmp_path):
        report = report_from_cre_row("RAFT", RAFT_OOD_CRE, RAFT_OOD_CLEAN_EPE)
        path = tmp_path / "cells.csv"
        metrics.write_plot_csv([report], path)
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 1 + 20 * 5
        assert lines[0].startswith("model,benchmark,kind")
