"""Covariance formulas and samplers for the fractional processes.

Monte-Carlo checks compare sample moments against the closed-form or
quadrature covariances within four standard errors of the product moments;
fixed-value checks use literals frozen from independent arbitrary-precision
quadrature.
"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as scipy_integrate

from fbmkit.acceptance import inversion_grid
from fbmkit.context import make_context
from fbmkit.errors import AccuracyError, ValidationError
from fbmkit.fbm import (
    cross_cov_wz,
    fbm_cov,
    fbm_cov_matrix,
    fgn_autocov,
    integrate_by_parts_eval,
    joint_wz_cov,
    levy_cov,
    levy_cov_matrix,
    refine_obm,
    sample_fbm,
    sample_fbm_bilateral,
    sample_fbm_paths,
    sample_fgn,
    sample_joint_wz,
    sample_levy_paths,
    sample_obm,
)
from fbmkit.gaussian import cholesky_with_jitter, cov_standard_errors, estimate_cov
from fbmkit.grids import GridPath, SampledPath
from fbmkit.rng import make_rng

# Reference values for the one-sided moving-average covariance
# c1(H)^2 * integral_0^{s ^ t} (s-u)^eta (t-u)^eta du, computed with
# 40-digit arbitrary-precision quadrature.
LEVY_COV_FROZEN = {
    (0.25, 0.5, 1.5): 0.3159105287890550640057,
    (0.25, 1.0, 1.0): 0.8346268416740731862814,
    (0.25, 0.25, 2.0): 0.1685596461287102296272,
    (0.75, 0.5, 1.5): 0.4087063314010335925093,
    (0.75, 1.0, 1.0): 0.7627597635018131880623,
    (0.75, 0.25, 2.0): 0.1896667365499727613147,
}


def assert_within_se(estimate, exact, se, z=4.0, slack=0.0):
    gap = np.abs(np.asarray(estimate) - np.asarray(exact))
    bound = z * np.asarray(se) + slack
    assert np.all(gap <= bound), (
        f"max gap {gap.max():.4g} exceeds {z} SE bound {bound.min():.4g}"
    )


hursts = st.sampled_from([0.1, 0.25, 0.5, 0.6, 0.75, 0.9])
times = st.floats(-3.0, 3.0)


class TestFbmCov:
    @given(hursts, times, times)
    def test_symmetry_and_variance(self, hurst, s, t):
        assert fbm_cov(s, t, hurst) == pytest.approx(fbm_cov(t, s, hurst))
        assert fbm_cov(t, t, hurst) == pytest.approx(abs(t) ** (2 * hurst))
        assert fbm_cov(0.0, t, hurst) == 0.0

    @given(hursts, times, times)
    def test_increment_variance(self, hurst, s, t):
        var = (
            fbm_cov(t, t, hurst)
            - 2 * fbm_cov(s, t, hurst)
            + fbm_cov(s, s, hurst)
        )
        assert var == pytest.approx(abs(t - s) ** (2 * hurst), abs=1e-12)

    @given(st.floats(0.01, 3.0), st.floats(0.01, 3.0))
    def test_brownian_case(self, s, t):
        assert fbm_cov(s, t, 0.5) == pytest.approx(min(s, t))
        # Two-sided Brownian motion has independent halves.
        assert fbm_cov(-s, t, 0.5) == pytest.approx(0.0, abs=1e-12)

    def test_matrix_agrees_and_is_psd(self):
        grid = np.array([-2.0, -0.5, 0.25, 1.0, 3.0])
        for hurst in (0.25, 0.75):
            mat = fbm_cov_matrix(grid, hurst)
            for i, s in enumerate(grid):
                for j, t in enumerate(grid):
                    assert mat[i, j] == fbm_cov(s, t, hurst)
            _, jitter = cholesky_with_jitter(mat)
            assert jitter <= 1e-10

    def test_rejects_bad_hurst(self):
        for bad in (0.0, 1.0, -0.3, 1.7):
            with pytest.raises(ValidationError):
                fbm_cov(1.0, 2.0, bad)


class TestFgnAutocov:
    @given(hursts, st.floats(0.05, 4.0), st.integers(0, 12))
    def test_matches_increment_covariance(self, hurst, dt, lag):
        gam = fgn_autocov(lag + 1, hurst, dt)
        # Cov of increments B_{(k+1)dt} - B_{k dt} and B_dt - B_0.
        k = lag
        direct = (
            fbm_cov((k + 1) * dt, dt, hurst)
            - fbm_cov(k * dt, dt, hurst)
            - fbm_cov((k + 1) * dt, 0.0, hurst)
            + fbm_cov(k * dt, 0.0, hurst)
        )
        assert gam[-1] == pytest.approx(direct, rel=1e-9, abs=1e-12)

    def test_lag_zero_and_sign(self):
        assert fgn_autocov(1, 0.3, 0.5)[0] == pytest.approx(0.5**0.6)
        assert fgn_autocov(2, 0.25, 1.0)[1] < 0  # antipersistent
        assert fgn_autocov(2, 0.75, 1.0)[1] > 0  # persistent
        assert fgn_autocov(2, 0.5, 1.0)[1] == pytest.approx(0.0, abs=1e-15)

    def test_validation(self):
        with pytest.raises(ValidationError):
            fgn_autocov(0, 0.5)
        with pytest.raises(ValidationError):
            fgn_autocov(4, 0.5, dt=0.0)
        with pytest.raises(ValidationError):
            fgn_autocov(4, 1.5)


class TestLevyCov:
    def test_frozen_values(self):
        for (hurst, s, t), expected in LEVY_COV_FROZEN.items():
            ctx = make_context(hurst)
            got = levy_cov(s, t, ctx)
            assert got == pytest.approx(expected, rel=5e-9)

    def test_symmetry_and_zero_time(self):
        ctx = make_context(0.75)
        assert levy_cov(0.5, 1.5, ctx) == pytest.approx(
            levy_cov(1.5, 0.5, ctx), rel=1e-12
        )
        assert levy_cov(0.0, 1.5, ctx) == 0.0

    def test_diagonal_closed_form(self):
        for hurst in (0.25, 0.6, 0.75):
            ctx = make_context(hurst)
            for t in (0.25, 1.0, 2.0):
                expected = ctx.c1**2 * t ** (2 * hurst) / (2 * hurst)
                assert levy_cov(t, t, ctx) == pytest.approx(expected, rel=1e-12)

    def test_brownian_case_is_min(self):
        ctx = make_context(0.5)
        for s, t in ((0.5, 1.5), (1.0, 1.0), (0.25, 2.0)):
            assert levy_cov(s, t, ctx) == pytest.approx(min(s, t), rel=1e-9)

    def test_matrix_agrees_with_scalar(self):
        ctx = make_context(0.75)
        grid = np.array([0.0, 0.25, 0.5, 1.0, 2.0])
        mat = levy_cov_matrix(grid, ctx)
        assert np.allclose(mat, mat.T, rtol=0, atol=0)
        for i, s in enumerate(grid):
            for j, t in enumerate(grid):
                assert mat[i, j] == pytest.approx(
                    levy_cov(s, t, ctx), rel=1e-9, abs=1e-12
                )
        _, jitter = cholesky_with_jitter(mat[1:, 1:])
        assert jitter <= 1e-10

    def test_validation(self):
        ctx = make_context(0.75)
        with pytest.raises(ValidationError):
            levy_cov(-0.5, 1.0, ctx)
        with pytest.raises(ValidationError):
            levy_cov_matrix([0.5, 0.25], ctx)
        with pytest.raises(ValidationError):
            levy_cov_matrix([[0.5]], ctx)


class TestSamplers:
    @pytest.mark.parametrize("hurst", [0.25, 0.75])
    def test_fgn_covariance(self, hurst):
        rng = make_rng(101)
        n, dt, paths = 8, 0.5, 20_000
        x = sample_fgn(hurst, n, dt, rng, paths)
        assert x.shape == (paths, n)
        gam = fgn_autocov(n, hurst, dt)
        idx = np.arange(n)
        exact = gam[np.abs(idx[:, None] - idx[None, :])]
        assert_within_se(estimate_cov(x), exact, cov_standard_errors(x))

    def test_fgn_single_lag(self):
        rng = make_rng(7)
        x = sample_fgn(0.75, 1, 0.5, rng, 50_000)
        var = float(np.mean(x**2))
        exact = fgn_autocov(1, 0.75, 0.5)[0]
        se = np.std(x.ravel() ** 2) / np.sqrt(x.size)
        assert abs(var - exact) <= 4 * se

    @pytest.mark.parametrize("hurst", [0.25, 0.75])
    def test_fbm_paths_covariance(self, hurst):
        rng = make_rng(202)
        n_steps, dt, paths = 6, 0.4, 20_000
        x = sample_fbm_paths(hurst, n_steps, dt, rng, paths)
        assert x.shape == (paths, n_steps + 1)
        assert np.all(x[:, 0] == 0.0)
        body = x[:, 1:]
        exact = fbm_cov_matrix(dt * np.arange(1, n_steps + 1), hurst)
        assert_within_se(estimate_cov(body), exact, cov_standard_errors(body))

    def test_sample_fbm_grid_path(self):
        rng = make_rng(3)
        path = sample_fbm(0.75, 16, 0.125, rng)
        assert isinstance(path, GridPath)
        assert path.kind == "fBm"
        assert path.t0 == 0.0 and path.values[0] == 0.0
        assert path.n == 17

    def test_sample_fbm_deterministic(self):
        a = sample_fbm(0.25, 8, 0.5, make_rng(11))
        b = sample_fbm(0.25, 8, 0.5, make_rng(11))
        assert np.array_equal(a.values, b.values)

    def test_bilateral_covariance(self):
        hurst, n_past, n_future, dt = 0.75, 2, 2, 0.5
        rng = make_rng(404)
        draws = np.empty((4000, n_past + n_future + 1))
        for i in range(draws.shape[0]):
            path = sample_fbm_bilateral(hurst, n_past, n_future, dt, rng)
            draws[i] = path.values
        path = sample_fbm_bilateral(hurst, n_past, n_future, dt, rng)
        assert path.t0 == -n_past * dt
        assert path.values[n_past] == 0.0 and path.kind == "fBm"
        exact = fbm_cov_matrix(path.times, hurst)
        assert_within_se(
            estimate_cov(draws), exact, cov_standard_errors(draws), slack=1e-12
        )

    @pytest.mark.parametrize("hurst", [0.25, 0.75])
    def test_levy_paths_covariance(self, hurst):
        ctx = make_context(hurst)
        rng = make_rng(505)
        n_steps, dt, paths = 4, 0.25, 20_000
        x = sample_levy_paths(ctx, n_steps, dt, rng, paths)
        assert np.all(x[:, 0] == 0.0)
        body = x[:, 1:]
        exact = levy_cov_matrix(dt * np.arange(1, n_steps + 1), ctx)
        assert_within_se(estimate_cov(body), exact, cov_standard_errors(body))

    def test_obm_two_sided_covariance(self):
        rng = make_rng(606)
        n_steps, dt, t0 = 8, 0.25, -1.0
        draws = np.empty((5000, n_steps + 1))
        for i in range(draws.shape[0]):
            path = sample_obm(n_steps, dt, rng, t0=t0)
            draws[i] = path.values
        grid = t0 + dt * np.arange(n_steps + 1)
        anchor = np.argmin(np.abs(grid))
        assert np.all(draws[:, anchor] == 0.0)
        sign = np.sign(grid)
        exact = np.where(
            sign[:, None] * sign[None, :] > 0,
            np.minimum(np.abs(grid)[:, None], np.abs(grid)[None, :]),
            0.0,
        )
        assert_within_se(
            estimate_cov(draws), exact, cov_standard_errors(draws), slack=1e-12
        )

    def test_obm_requires_origin_on_grid(self):
        rng = make_rng(1)
        with pytest.raises(ValidationError):
            sample_obm(4, 0.25, rng, t0=0.1)
        with pytest.raises(ValidationError):
            sample_obm(4, 0.25, rng, t0=-0.3)
        with pytest.raises(ValidationError):
            sample_obm(2, 0.25, rng, t0=-1.0)  # grid ends before t = 0


class TestRefineObm:
    def test_preserves_coarse_grid(self):
        rng = make_rng(17)
        path = sample_obm(8, 0.5, rng, t0=-2.0)
        fine = refine_obm(path, rng)
        assert fine.kind == "oBm"
        assert fine.dt == path.dt / 2 and fine.t0 == path.t0
        assert fine.n == 2 * path.n - 1
        assert np.array_equal(fine.values[0::2], path.values)

    def test_midpoint_bridge_law(self):
        rng = make_rng(18)
        base = GridPath(t0=0.0, dt=1.0, values=np.array([0.0, 1.2]), kind="oBm")
        mids = np.array(
            [refine_obm(base, rng).values[1] for _ in range(8000)]
        )
        mean, var = mids.mean(), mids.var()
        se_mean = mids.std() / np.sqrt(mids.size)
        assert abs(mean - 0.6) <= 4 * se_mean
        se_var = var * np.sqrt(2.0 / (mids.size - 1))
        assert abs(var - 0.25) <= 4 * se_var

    def test_requires_obm(self):
        rng = make_rng(1)
        path = sample_fbm(0.75, 4, 0.5, rng)
        with pytest.raises(ValidationError):
            refine_obm(path, rng)


class TestJointWZ:
    def test_cross_cov_brownian_identities(self):
        ctx = make_context(0.5)
        for s, t in ((0.5, 1.5), (1.5, 0.5), (2.0, 2.0)):
            assert cross_cov_wz(ctx, s, t) == pytest.approx(min(s, t))
        # Driver past is independent of the driven process's future values.
        assert cross_cov_wz(ctx, -1.0, 2.0) == pytest.approx(0.0, abs=1e-12)
        assert cross_cov_wz(ctx, -1.0, -0.5) == pytest.approx(0.5)
        assert cross_cov_wz(ctx, -0.25, -2.0) == pytest.approx(0.25)

    @pytest.mark.parametrize("hurst", [0.25, 0.75])
    def test_cross_cov_vs_quadrature(self, hurst):
        # Independent oracle: Cov(W_s, Z_t) as a sign-carrying integral of
        # the moving-average kernel over the driver increment window.
        ctx = make_context(hurst)
        eta = ctx.eta

        def kernel(u, t):
            lead = (t - u) ** eta if t > u else 0.0
            lag = (-u) ** eta if u < 0 else 0.0
            return lead - lag

        for s, t in ((0.75, 1.5), (1.5, 0.75), (-0.5, 1.0), (-2.0, 0.5)):
            lo, hi = min(s, 0.0), max(s, 0.0)
            val, err = scipy_integrate.quad(
                kernel, lo, hi, args=(t,), limit=300, points=[0.0, t]
            )
            expected = np.sign(s) * ctx.c1 * val
            assert cross_cov_wz(ctx, s, t) == pytest.approx(
                expected, rel=1e-7, abs=1e-10
            )

    def test_joint_cov_blocks(self):
        ctx = make_context(0.75)
        w_times = np.array([-1.0, -0.25, 0.5])
        z_times = np.array([0.5, 1.0])
        mat = joint_wz_cov(ctx, w_times, z_times)
        assert mat.shape == (5, 5)
        assert np.allclose(mat, mat.T)
        assert np.allclose(
            mat[3:, 3:], fbm_cov_matrix(z_times, ctx.hurst)
        )
        assert mat[0, 1] == pytest.approx(0.25)  # both in the past
        assert mat[0, 2] == 0.0  # opposite sides of the origin
        assert mat[1, 3] == pytest.approx(cross_cov_wz(ctx, -0.25, 0.5))

    def test_sample_joint_matches_cov(self):
        ctx = make_context(0.75)
        w_times = np.array([-1.0, 0.0, 0.5])
        z_times = np.array([0.0, 0.5, 1.5])
        rng = make_rng(909)
        w, z = sample_joint_wz(ctx, w_times, z_times, rng, paths=20_000)
        assert np.all(w[:, 1] == 0.0) and np.all(z[:, 0] == 0.0)
        stacked = np.hstack([w, z])
        exact = joint_wz_cov(ctx, w_times, z_times)
        assert_within_se(
            estimate_cov(stacked), exact, cov_standard_errors(stacked),
            slack=1e-12,
        )


class TestIntegrateByParts:
    def test_brownian_case_returns_driver(self):
        ctx = make_context(0.5)
        rng = make_rng(21)
        path = sample_obm(64, 0.125, rng, t0=-4.0)
        for t in (0.5, 1.0, path.t_end):
            assert integrate_by_parts_eval(ctx, path, t) == path.value_at(t)
        assert integrate_by_parts_eval(ctx, path, 0.0) == 0.0

    @staticmethod
    def _driver_grid(dt, u_deep):
        past = inversion_grid(dt, u_deep=u_deep)
        future = dt * np.arange(1, int(2.0 / dt) + 1)
        return np.concatenate([past, future])

    @staticmethod
    def _linear_ma(ctx, times, values, t):
        # Exact moving-average integral against the piecewise-linear
        # interpolant of the driver: sum over segments of
        # slope_j * [G(s_{j+1}) - G(s_j)] with G(s) = F(-s) - F(t - s)
        # and F(x) = x_+^{eta+1} / (eta + 1).
        eta = ctx.eta

        def antideriv(x):
            x = np.maximum(np.asarray(x, dtype=float), 0.0)
            return x ** (eta + 1.0) / (eta + 1.0)

        clipped = np.minimum(times, t)  # kernel vanishes beyond s = t
        slopes = np.diff(values) / np.diff(times)
        g = antideriv(-clipped) - antideriv(t - clipped)
        return ctx.c1 * float(np.sum(slopes * np.diff(g)))

    @pytest.mark.parametrize(
        "hurst,u_deep", [(0.25, 600.0), (0.75, 1.0e7)]
    )
    def test_matches_exact_linear_moving_average(self, hurst, u_deep):
        # Same driver path, two routes: the integration-by-parts quadrature
        # versus the closed-form integral against the piecewise-linear
        # driver.  Any formula or sign error shows up at order one; the
        # observed gap is panel/knot misalignment only (< 1e-2).
        ctx = make_context(hurst)
        w_times = self._driver_grid(1.0 / 256, u_deep)
        z_times = np.array([0.5, 1.0, 1.7])
        rng = make_rng(303)
        w, _ = sample_joint_wz(ctx, w_times, z_times, rng, paths=8)
        gaps, scales = [], []
        for i in range(w.shape[0]):
            driver = SampledPath(times=w_times, values=w[i], kind="oBm")
            for t in z_times:
                got = integrate_by_parts_eval(ctx, driver, t)
                want = self._linear_ma(ctx, w_times, w[i], t)
                gaps.append(got - want)
                scales.append(want)
        rel = np.sqrt(np.mean(np.square(gaps)) / np.mean(np.square(scales)))
        assert rel < 0.02, f"H={hurst}: linear-MA mismatch rel L2 {rel:.4f}"

    @pytest.mark.parametrize(
        "hurst,u_deep,tol", [(0.25, 600.0, 0.20), (0.75, 1.0e7, 0.05)]
    )
    def test_driver_route_matches_joint_law(self, hurst, u_deep, tol):
        # Evaluate the moving average from a simulated driver path and
        # compare with the jointly drawn process values.  The residual is
        # the conditional-interpolation error of the discrete driver grid,
        # which scales like dt^H — hence the looser gate for the
        # antipersistent case.
        ctx = make_context(hurst)
        w_times = self._driver_grid(1.0 / 256, u_deep)
        z_times = np.array([0.5, 1.0, 1.7])
        rng = make_rng(303)
        w, z = sample_joint_wz(ctx, w_times, z_times, rng, paths=24)
        recon = np.empty_like(z)
        for i in range(w.shape[0]):
            driver = SampledPath(times=w_times, values=w[i], kind="oBm")
            for j, t in enumerate(z_times):
                recon[i, j] = integrate_by_parts_eval(ctx, driver, t)
        rel = np.sqrt(np.mean((recon - z) ** 2) / np.mean(z**2))
        assert rel < tol, f"H={hurst}: joint-law mismatch rel L2 {rel:.4f}"

    def test_short_window_raises_accuracy_error(self):
        ctx = make_context(0.75)
        times = np.concatenate([inversion_grid(1.0 / 64), [1.0]])
        path = SampledPath(
            times=times, values=np.zeros(times.size), kind="oBm"
        )
        with pytest.raises(AccuracyError):
            integrate_by_parts_eval(ctx, path, 1.0)

    def test_validation(self):
        ctx = make_context(0.75)
        rng = make_rng(5)
        obm = sample_obm(32, 0.25, rng, t0=-4.0)
        fbm = sample_fbm(0.75, 8, 0.5, rng)
        with pytest.raises(ValidationError):
            integrate_by_parts_eval(ctx, fbm, 1.0)
        with pytest.raises(ValidationError):
            integrate_by_parts_eval(ctx, obm, obm.t_end + 1.0)
        short = sample_obm(4, 0.25, rng, t0=-0.5)
        with pytest.raises(ValidationError):
            integrate_by_parts_eval(ctx, short, -1.0)
