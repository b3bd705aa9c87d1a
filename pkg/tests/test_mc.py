"""Monte Carlo oracle chain: per-sample information against finite differences,
averaged blocks against the analytic assembly, bound against the closed form."""

import math

import numpy as np
import pytest

from metabcrb import (ParameterSample, RicianSpec, Scenario, SensingPrior,
                      SensorModel, SubcarrierGrid, assemble_bfim,
                      bcrb_closed_form, conditional_fim, draw_samples,
                      mc_blocks, mc_bound, posterior_mean_mse, snr_to_noise)
from metabcrb.expectations import chunk_rng


def _scenario(depth=0.9, width=1.0, rate=1.0, mean=0.0, std=1.0, kappa=1.0,
              los=False, snr_db=20.0, spacing=0.4, count=8):
    sensor = SensorModel(absorption_depth=depth, half_width=width, shift_rate=rate)
    prior = SensingPrior(mean=mean, std=std)
    return Scenario(
        sensor=sensor,
        prior=prior,
        channel=RicianSpec(kappa=kappa, deterministic_los=los),
        noise=snr_to_noise(snr_db),
        grid=SubcarrierGrid.uniform(center=sensor.resonance(mean), spacing=spacing, count=count),
    )


# ------------------------------------------------- per-sample information

def test_conditional_fim_condition_entry_hand_value():
    sc = _scenario(count=1, snr_db=0.0)
    smp = ParameterSample(condition=0.0, receive=np.ones(1, complex), transmit=np.ones(1, complex))
    fim = conditional_fim(sc, smp)
    # (c, c) entry with unit gains is (2 / noise_var) |gamma'(f)|^2
    f = sc.grid.as_array()[0]
    expect = 2.0 * abs(sc.sensor.reflection_dc(f, 0.0)) ** 2
    assert fim[0, 0] == pytest.approx(expect, rel=1e-14)
    assert fim.shape == (5, 5)


def _fd_fim(sc, c, h_r, h_t, step=1e-5):
    # central-difference Hessian of the quadratic mismatch
    # q(t) = |mu(t0) - mu(t)|^2 / noise_var, which equals the FIM at t = t0
    count = sc.grid.count
    dim = 1 + 4 * count
    theta0 = np.concatenate(
        [[c], np.stack([h_r.real, h_r.imag, h_t.real, h_t.imag], axis=1).ravel()])

    def unpack(t):
        rest = t[1:].reshape(count, 4)
        return t[0], rest[:, 0] + 1j * rest[:, 1], rest[:, 2] + 1j * rest[:, 3]

    def mean_vec(t):
        cc, hr, ht = unpack(t)
        return hr * np.asarray(sc.sensor.reflection(sc.grid.as_array(), cc)) * ht

    mu0 = mean_vec(theta0)

    def q(t):
        return float(np.sum(np.abs(mu0 - mean_vec(t)) ** 2)) / sc.noise.variance

    hess = np.zeros((dim, dim))
    for i in range(dim):
        for j in range(dim):
            acc = 0.0
            for si, sj, sign in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
                t = theta0.copy()
                t[i] += si * step
                t[j] += sj * step
                acc += sign * q(t)
            hess[i, j] = acc / (4.0 * step * step)
    return hess


def test_conditional_fim_matches_finite_difference_hessian():
    for count, seed in ((1, 0), (2, 1)):
        sc = _scenario(count=count, spacing=0.7, kappa=2.0, snr_db=10.0)
        cs, hrs, hts = draw_samples(sc, 4, chunk_rng(seed, 0))
        for i in range(4):
            smp = ParameterSample(condition=cs[i], receive=hrs[i], transmit=hts[i])
            fim = conditional_fim(sc, smp)
            fd = _fd_fim(sc, cs[i], hrs[i], hts[i])
            rel = np.linalg.norm(fim - fd) / np.linalg.norm(fim)
            assert rel < 1e-5
            np.testing.assert_allclose(fim, fim.T, atol=1e-12)
            assert np.all(np.linalg.eigvalsh(fim) > -1e-10)


def test_conditional_fim_is_singular_per_sample():
    # one complex observation per tone caps the Jacobian at 2 L real rows, so
    # the (1 + 4 L)-dim matrix is rank deficient: rank = 2 L
    sc = _scenario(count=3, spacing=0.6)
    cs, hrs, hts = draw_samples(sc, 1, chunk_rng(4, 0))
    fim = conditional_fim(sc, ParameterSample(condition=cs[0], receive=hrs[0], transmit=hts[0]))
    rank = np.linalg.matrix_rank(fim, tol=1e-9)
    assert rank == 2 * sc.grid.count


def test_conditional_fim_validates_shapes():
    sc = _scenario(count=2)
    with pytest.raises(ValueError):
        conditional_fim(sc, ParameterSample(condition=0.0, receive=np.ones(3, complex),
                                            transmit=np.ones(2, complex)))


# ------------------------------------------------- sampling

def test_draw_samples_match_prior_and_fading_statistics():
    sc = _scenario(kappa=3.0, count=4)
    c, h_r, h_t = draw_samples(sc, 200_000, chunk_rng(8, 0))
    assert np.mean(c) == pytest.approx(0.0, abs=0.01)
    assert np.std(c) == pytest.approx(1.0, abs=0.01)
    v = sc.channel.scatter_variance()
    for h in (h_r, h_t):
        assert np.mean(h.real) == pytest.approx(sc.channel.mean(), abs=0.01)
        assert np.mean(h.imag) == pytest.approx(0.0, abs=0.01)
        assert np.var(h.real) == pytest.approx(v / 2, rel=0.05)
        assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, rel=0.01)


def test_draw_samples_los_returns_unit_gains():
    sc = _scenario(los=True, count=3)
    c, h_r, h_t = draw_samples(sc, 10, chunk_rng(0, 0))
    assert np.all(h_r == 1.0) and np.all(h_t == 1.0)
    assert c.shape == (10,)


# ------------------------------------------------- averaged blocks

def test_mc_blocks_agree_with_analytic_assembly():
    sc = _scenario(kappa=2.0, count=4, snr_db=10.0)
    exact = assemble_bfim(sc)
    est = mc_blocks(sc, 400_000, seed=12)
    assert abs(est.a - exact.a) <= 4 * est.a_se
    # cross vectors: entrywise within 4 standard errors (plus a floor for
    # entries whose estimator noise dwarfs the tiny true value)
    np.testing.assert_array_less(
        np.abs(est.b - exact.b), 4 * est.b_se + 1e-12)
    # channel blocks concentrate much faster; 1% relative is loose at this
    # sample size, and the absolute floor covers the exact zeros of the
    # analytic pattern that sampling noise fills in
    np.testing.assert_allclose(est.d, exact.d, rtol=0.01, atol=0.03)


def test_mc_blocks_rayleigh_cross_vector_near_zero():
    sc = _scenario(kappa=0.0, count=3)
    est = mc_blocks(sc, 200_000, seed=9)
    np.testing.assert_array_less(np.abs(est.b), 4 * est.b_se + 1e-12)


def test_mc_blocks_validation():
    with pytest.raises(ValueError):
        mc_blocks(_scenario(los=True), 100)
    with pytest.raises(ValueError):
        mc_blocks(_scenario(), 1)


# ------------------------------------------------- the bound

def test_mc_bound_matches_closed_form():
    for kwargs, samples, seed in (
        (dict(kappa=1.0, count=8), 300_000, 3),
        (dict(kappa=0.0, count=8), 200_000, 4),
        (dict(kappa=5.0, count=4, snr_db=0.0), 200_000, 5),
    ):
        sc = _scenario(**kwargs)
        closed = bcrb_closed_form(sc).bound
        est = mc_bound(sc, samples, seed=seed)
        assert abs(est.value - closed) <= 3 * est.std_err, kwargs
        assert est.std_err < 0.05 * closed


def test_mc_bound_los_is_exact():
    sc = _scenario(los=True)
    est = mc_bound(sc, 1000, seed=0)
    assert est.value == bcrb_closed_form(sc).bound
    assert est.std_err == 0.0


def test_mc_bound_error_shrinks_as_root_n():
    sc = _scenario(count=4)
    closed = bcrb_closed_form(sc).bound
    sizes = [10_000, 40_000, 160_000, 640_000]
    ses = []
    for n in sizes:
        est = mc_bound(sc, n, seed=100)
        ses.append(est.std_err)
        assert abs(est.value - closed) <= 4 * est.std_err
    slope = np.polyfit(np.log(sizes), np.log(ses), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.15)


def test_mc_bound_reruns_bit_identical():
    sc = _scenario(count=4)
    a = mc_bound(sc, 50_000, seed=42)
    b = mc_bound(sc, 50_000, seed=42)
    assert a.value == b.value and a.std_err == b.std_err
    c = mc_bound(sc, 50_000, seed=43)
    assert c.value != a.value


# ------------------------------------------------- posterior-mean simulator

def test_posterior_mean_mse_blind_sensor_recovers_prior_variance():
    # zero dip depth: the observation is independent of the condition and the
    # posterior mean is the prior mean, so the MSE is the prior variance
    sc = _scenario(depth=0.0, los=True, count=4)
    est = posterior_mean_mse(sc, trials=4000, seed=5)
    assert abs(est.value - 1.0) <= 3 * est.std_err


def test_posterior_mean_mse_respects_los_bound():
    sc = _scenario(los=True, count=16, spacing=0.2)
    for snr in (0.0, 10.0, 20.0):
        s = sc.with_noise(snr_to_noise(snr))
        bound = bcrb_closed_form(s).bound
        est = posterior_mean_mse(s, trials=6000, seed=21)
        assert est.value >= bound - 2 * est.std_err
    # with tones covering the full prior sweep the posterior mean is
    # essentially efficient at high SNR, so the bound is also nearly tight
    s = _scenario(los=True, count=16, spacing=0.4)
    est = posterior_mean_mse(s, trials=6000, seed=21)
    assert est.value <= 1.3 * bcrb_closed_form(s).bound


def test_posterior_mean_mse_requires_los():
    with pytest.raises(ValueError):
        posterior_mean_mse(_scenario(kappa=1.0), trials=100)
    with pytest.raises(ValueError):
        posterior_mean_mse(_scenario(los=True), trials=1)
