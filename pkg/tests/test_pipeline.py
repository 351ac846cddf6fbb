"""Warp pipeline tests: scaling, ordering, conventions, parallel determinism."""

from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import rand_bounded_mobius
from oracles import bicubic_upsample_reference

from omnizoom.errors import BadDimsError
from omnizoom.geometry import MobiusMatrix, SpherePoint, ViewControls, build_index_map, from_rotation
from omnizoom.image import ErpImage
from omnizoom.pipeline import WarpOrder, WarpRequest, downsample, upsample, warp
from omnizoom.resample import ResampleKernel, resample


def rand_image(rng, h, w, c=3):
    return ErpImage(rng.uniform(0.0, 1.0, size=(h, w, c)), allow_any_aspect=True)


def checkerboard(h, w):
    i, j = np.mgrid[0:h, 0:w]
    return ErpImage(((i + j) % 2).astype(np.float64)[..., None], allow_any_aspect=True)


class TestUpsample:
    def test_unit_scale_identity(self):
        rng = np.random.default_rng(31)
        src = rand_image(rng, 4, 8)
        assert np.array_equal(upsample(src, 1).samples, src.samples)

    def test_constant_grows(self):
        src = ErpImage(np.full((2, 4, 1), 0.25), allow_any_aspect=True)
        out = upsample(src, 8)
        assert out.samples.shape == (16, 32, 1)
        assert np.max(np.abs(out.samples - 0.25)) <= 1e-12

    def test_cosine_ramp_matches_polynomial_oracle(self):
        w = 16
        ramp = 0.5 + 0.4 * np.cos(2 * math.pi * np.arange(w) / w)
        src = ErpImage(np.tile(ramp[None, :, None], (8, 1, 1)), allow_any_aspect=True)
        got = upsample(src, 2)
        want = bicubic_upsample_reference(src.samples, 2)
        assert np.max(np.abs(got.samples - want)) <= 1e-6

    def test_bad_scale(self):
        src = ErpImage(np.zeros((2, 4, 1)), allow_any_aspect=True)
        with pytest.raises(BadDimsError):
            upsample(src, 0)


class TestDownsample:
    def test_unit_scale_identity(self):
        rng = np.random.default_rng(32)
        src = rand_image(rng, 4, 8)
        assert np.array_equal(downsample(src, 1).samples, src.samples)

    def test_box_mean(self):
        block = np.array([[0.0, 0.0], [1.0, 1.0]])
        src = ErpImage(np.tile(block, (2, 4))[..., None], allow_any_aspect=True)
        out = downsample(src, 2)
        assert out.samples.shape == (2, 4, 1)
        assert np.max(np.abs(out.samples - 0.5)) <= 1e-15

    def test_round_trip_on_smooth_image(self):
        h, w = 16, 32
        i, j = np.mgrid[0:h, 0:w]
        img = 0.5 + 0.3 * np.sin(2 * math.pi * j / w) * np.sin(math.pi * (i + 0.5) / h)
        src = ErpImage(img[..., None], allow_any_aspect=True)
        back = downsample(upsample(src, 2), 2)
        assert np.max(np.abs(back.samples - src.samples)) <= 5e-3

    def test_not_divisible(self):
        src = ErpImage(np.zeros((3, 6, 1)), allow_any_aspect=True)
        with pytest.raises(BadDimsError):
            downsample(src, 2)


class TestWarp:
    @pytest.mark.parametrize("kernel", list(ResampleKernel), ids=lambda k: k.value)
    def test_identity_matrix(self, kernel):
        rng = np.random.default_rng(33)
        src = rand_image(rng, 8, 16)
        out = warp(src, WarpRequest(view=MobiusMatrix.identity(), kernel=kernel))
        assert np.max(np.abs(out.samples - src.samples)) <= 1e-6

    def test_raw_matrix_column_shift(self):
        rng = np.random.default_rng(34)
        h, w, k = 8, 16, 3
        src = rand_image(rng, h, w)
        m = from_rotation(SpherePoint(0.0, 0.0, 1.0), 2 * math.pi * k / w)
        out = warp(src, WarpRequest(view=m))
        assert np.max(np.abs(out.samples - np.roll(src.samples, -k, axis=1))) <= 1e-6

    def test_controls_column_shift_opposite(self):
        rng = np.random.default_rng(35)
        h, w, k = 8, 16, 3
        src = rand_image(rng, h, w)
        req = WarpRequest(view=ViewControls(yaw=2 * math.pi * k / w))
        out = warp(src, req)
        assert np.max(np.abs(out.samples - np.roll(src.samples, k, axis=1))) <= 1e-6

    def test_backward_warp_composition_is_bit_identical(self):
        rng = np.random.default_rng(36)
        src = rand_image(rng, 8, 16)
        m = rand_bounded_mobius(rng)
        out = warp(src, WarpRequest(view=m, kernel=ResampleKernel.SPHERICAL))
        direct = resample(src, build_index_map(8, 16, m), ResampleKernel.SPHERICAL)
        assert out.samples.tobytes() == direct.samples.tobytes()

    def test_order_sensitivity_on_checkerboard(self):
        src = checkerboard(8, 16)
        m = rand_bounded_mobius(np.random.default_rng(37))
        up_first = warp(src, WarpRequest(view=m, scale=2,
                                         order=WarpOrder.UPSAMPLE_THEN_TRANSFORM))
        tf_first = warp(src, WarpRequest(view=m, scale=2,
                                         order=WarpOrder.TRANSFORM_THEN_UPSAMPLE))
        assert up_first.samples.shape == tf_first.samples.shape == (16, 32, 1)
        assert np.max(np.abs(up_first.samples - tf_first.samples)) > 1e-3

    @pytest.mark.parametrize("order", list(WarpOrder), ids=lambda o: o.value)
    def test_both_orders_preserve_constants(self, order):
        src = ErpImage(np.full((8, 16, 1), 0.6), allow_any_aspect=True)
        m = rand_bounded_mobius(np.random.default_rng(38))
        out = warp(src, WarpRequest(view=m, scale=2, order=order))
        assert np.max(np.abs(out.samples - 0.6)) <= 1e-9

    def test_thread_determinism(self):
        rng = np.random.default_rng(39)
        src = rand_image(rng, 70, 140)
        m = rand_bounded_mobius(rng)
        outs = [warp(src, WarpRequest(view=m), threads=t).samples for t in (1, 2, 4)]
        assert outs[0].tobytes() == outs[1].tobytes() == outs[2].tobytes()

    def test_scale_validation(self):
        with pytest.raises(ValueError):
            WarpRequest(view=MobiusMatrix.identity(), scale=3)

    def test_order_names(self):
        assert WarpOrder.from_name("up-first") is WarpOrder.UPSAMPLE_THEN_TRANSFORM
        assert WarpOrder.from_name("transform-first") is WarpOrder.TRANSFORM_THEN_UPSAMPLE
