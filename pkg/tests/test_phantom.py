import math

import numpy as np
import pytest

from cimt_kit.bandcore import AggregationPolicy
from cimt_kit.calibrator import temperature_scale
from cimt_kit.contours import BandMaskSpec, rasterize_band, reference_cimt
from cimt_kit.errors import InvalidConfigError
from cimt_kit.phantom import Curve, PhantomSpec, generate, generate_suite, write_suite
from cimt_kit.pipeline import measure_probability_map


def hard_spec(thickness=20.0, li=40.0, height=128, width=96, mm=0.05, **kw):
    return PhantomSpec(
        width=width,
        height=height,
        li_curve=Curve("constant", base=li),
        thickness_curve=Curve("constant", base=thickness),
        mm_per_pixel=mm,
        **kw,
    )


class TestHardBand:
    def test_exact_pipeline_measurement(self):
        bundle = generate(hard_spec(thickness=20.0, mm=0.05))
        result = measure_probability_map(bundle.prob, bundle.calibration, threshold=0.5)
        assert result.cimt_px_working == 20.0
        assert result.cimt_um == 1000.0
        assert bundle.analytic_cimt_um == 1000.0

    def test_band_rows_are_half_open(self):
        bundle = generate(hard_spec(thickness=3.0, li=10.0, height=32, width=4))
        col = bundle.prob.values[:, 0]
        assert col[9] == 0.0 and col[10] == 1.0 and col[12] == 1.0 and col[13] == 0.0

    def test_temperature_noop_on_hard_band(self):
        bundle = generate(hard_spec())
        for T in (0.5, 2.0, 5.0):
            scaled = temperature_scale(bundle.prob, T)
            r1 = measure_probability_map(bundle.prob, bundle.calibration, 0.5)
            r2 = measure_probability_map(scaled, bundle.calibration, 0.5)
            assert r1.cimt_um == r2.cimt_um

    def test_reference_matches_analytic(self):
        bundle = generate(hard_spec(thickness=17.0, mm=0.07))
        ref = reference_cimt(bundle.contours, bundle.calibration, AggregationPolicy())
        assert ref.cimt_um == pytest.approx(bundle.analytic_cimt_um, rel=1e-9)

    def test_reference_matches_analytic_on_curved_bands(self):
        spec = PhantomSpec(
            width=160, height=256,
            li_curve=Curve("sinusoidal", base=70.0, amplitude=6.0, period_px=50.0, phase_rad=1.1),
            thickness_curve=Curve("sinusoidal", base=18.0, amplitude=2.5, period_px=37.0, phase_rad=0.4),
            edge_softness=1.0, mm_per_pixel=0.055,
        )
        bundle = generate(spec)
        ref = reference_cimt(bundle.contours, bundle.calibration, AggregationPolicy())
        assert ref.cimt_um == pytest.approx(bundle.analytic_cimt_um, rel=1e-9)

    def test_prediction_equals_rasterized_reference(self):
        bundle = generate(hard_spec(thickness=12.0, li=30.0))
        from cimt_kit.bandcore import threshold_map

        pred = threshold_map(bundle.prob, 0.5)
        ref = rasterize_band(
            bundle.contours,
            BandMaskSpec(bundle.prob.width, bundle.prob.height),
            1.0,
            1.0,
        )
        assert np.array_equal(pred.bits, ref.bits)


class TestSoftBand:
    def test_measurement_within_one_pixel(self):
        spec = hard_spec(thickness=20.0, edge_softness=1.5, mm=0.05)
        bundle = generate(spec)
        result = measure_probability_map(bundle.prob, bundle.calibration, threshold=0.5)
        assert abs(result.cimt_um - bundle.analytic_cimt_um) <= 1.0 * 0.05 * 1000

    def test_offset_thickens_at_default_threshold(self):
        base = generate(hard_spec(thickness=20.0, edge_softness=3.0))
        offset = generate(hard_spec(thickness=20.0, edge_softness=3.0, probability_offset=0.2))
        r_base = measure_probability_map(base.prob, base.calibration, 0.5)
        r_off = measure_probability_map(offset.prob, offset.calibration, 0.5)
        assert r_off.cimt_um > r_base.cimt_um
        assert r_off.cimt_um > offset.analytic_cimt_um

    def test_sinusoidal_analytic_profile(self):
        spec = PhantomSpec(
            width=200,
            height=256,
            li_curve=Curve("sinusoidal", base=60.0, amplitude=5.0, period_px=80.0, phase_rad=0.3),
            thickness_curve=Curve("linear", base=14.0, slope=0.02),
            edge_softness=1.0,
            mm_per_pixel=0.06,
        )
        bundle = generate(spec)
        x = np.arange(200, dtype=np.float64)
        expected = (math.fsum((14.0 + 0.02 * x).tolist()) / 200) * 0.06 * 1000
        assert bundle.analytic_cimt_um == pytest.approx(expected, rel=1e-12)


class TestDeterminism:
    def test_same_seed_same_bytes(self, tmp_path):
        spec = hard_spec(noise_sd=0.05, edge_softness=1.0, rng_seed=77)
        b1, b2 = generate(spec), generate(spec)
        assert np.array_equal(b1.prob.values, b2.prob.values)
        d1, d2 = tmp_path / "a", tmp_path / "b"
        write_suite(d1, [b1])
        write_suite(d2, [b2])
        f1 = d1 / "phantom_0000.prob.pgm"
        f2 = d2 / "phantom_0000.prob.pgm"
        assert f1.read_bytes() == f2.read_bytes()

    def test_different_seed_different_noise(self):
        a = generate(hard_spec(noise_sd=0.05, edge_softness=1.0, rng_seed=1))
        b = generate(hard_spec(noise_sd=0.05, edge_softness=1.0, rng_seed=2))
        assert not np.array_equal(a.prob.values, b.prob.values)


class TestSuite:
    def test_suite_size_and_reproducibility(self):
        base = hard_spec()
        s1 = generate_suite(28, base, variation_seed=42)
        s2 = generate_suite(28, base, variation_seed=42)
        assert len(s1) == 28
        for a, b in zip(s1, s2):
            assert np.array_equal(a.prob.values, b.prob.values)
            assert a.calibration == b.calibration

    def test_singleton(self):
        assert len(generate_suite(1, hard_spec(), variation_seed=0)) == 1

    def test_hard_suite_is_exact_oracle(self):
        for bundle in generate_suite(10, hard_spec(), variation_seed=9):
            result = measure_probability_map(bundle.prob, bundle.calibration, 0.5)
            assert result.cimt_um == bundle.analytic_cimt_um

    def test_files_consumable(self, tmp_path):
        from cimt_kit.calibration import load_calibration_table
        from cimt_kit.pgmio import read_prob_pgm

        bundles = generate_suite(3, hard_spec(), variation_seed=5)
        write_suite(tmp_path, bundles)
        cal = load_calibration_table(tmp_path / "calibration.csv")
        assert len(cal) == 3
        p = read_prob_pgm(tmp_path / "phantom_0000.prob.pgm")
        assert p.width == 96 and p.height == 128


class TestSpecValidation:
    def test_band_must_fit(self):
        with pytest.raises(InvalidConfigError, match="height - 2"):
            PhantomSpec(
                width=10,
                height=32,
                li_curve=Curve("constant", base=20.0),
                thickness_curve=Curve("constant", base=15.0),
            )

    def test_thin_band_rejected(self):
        with pytest.raises(InvalidConfigError, match="below 2"):
            hard_spec(thickness=1.0)

    def test_offset_range(self):
        with pytest.raises(InvalidConfigError, match="offset"):
            hard_spec(probability_offset=0.5)

    def test_sinusoidal_needs_period(self):
        with pytest.raises(InvalidConfigError, match="period"):
            Curve("sinusoidal", base=10.0, amplitude=2.0)
