"""Monte Carlo oracle: averaged exact conditional Fisher information.

Independent check of the closed-form bound. Draw (c, channels) from the
prior, form the exact conditional Fisher information of the observation
model y_k = h_r gamma_k(c) h_t + noise for every draw, average, add the
prior information, invert. Nothing here reuses the analytic fading
averages, so agreement with bcrb_closed_form validates them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bcrb import bcrb_closed_form
from .expectations import McEstimate, chunk_rng
from .scenario import Scenario

MC_CHUNK = 512  # small enough that chunk means make a usable bootstrap population
BOOTSTRAP_RESAMPLES = 200
_BOOT_KEY = 0x626F6F74  # distinct stream for bootstrap resampling


@dataclass(frozen=True)
class ParameterSample:
    """One draw of the latent parameters: condition plus per-subcarrier gains."""

    condition: float
    receive: np.ndarray
    transmit: np.ndarray


def draw_samples(scenario: Scenario, size: int, rng: np.random.Generator):
    """Vectorized draws; channels are CN(mean, scatter_variance) per tone."""
    count = scenario.grid.count
    c = scenario.prior.mean + scenario.prior.std * rng.standard_normal(size)
    ch = scenario.channel
    if ch.deterministic_los:
        ones = np.ones((size, count), dtype=complex)
        return c, ones, ones.copy()
    mean = ch.mean()
    sigma = math.sqrt(ch.scatter_variance() / 2.0)
    h_r = mean + sigma * (rng.standard_normal((size, count)) + 1j * rng.standard_normal((size, count)))
    h_t = mean + sigma * (rng.standard_normal((size, count)) + 1j * rng.standard_normal((size, count)))
    return c, h_r, h_t


def conditional_fim(scenario: Scenario, sample: ParameterSample) -> np.ndarray:
    """Exact conditional Fisher information at one parameter draw.

    For the complex Gaussian observation with mean mu(theta) and noise
    variance v, entry (i, j) is (2 / v) Re(conj(d mu / d theta_i) d mu / d theta_j)
    summed over tones. Ordering: [c, (Re h_r, Im h_r, Re h_t, Im h_t)_1, ...].
    Symmetric positive semidefinite (and singular: only the product of the
    gains is observable per tone).
    """
    freqs = scenario.grid.as_array()
    count = freqs.size
    h_r = np.asarray(sample.receive, dtype=complex)
    h_t = np.asarray(sample.transmit, dtype=complex)
    if h_r.shape != (count,) or h_t.shape != (count,):
        raise ValueError(f"channel arrays must have shape ({count},)")
    gamma = scenario.sensor.reflection(freqs, sample.condition)
    dgamma = scenario.sensor.reflection_dc(freqs, sample.condition)

    n = 1 + 4 * count
    deriv = np.zeros((count, n), dtype=complex)
    deriv[:, 0] = h_r * dgamma * h_t
    for k in range(count):
        base = 1 + 4 * k
        deriv[k, base + 0] = gamma[k] * h_t[k]
        deriv[k, base + 1] = 1j * gamma[k] * h_t[k]
        deriv[k, base + 2] = h_r[k] * gamma[k]
        deriv[k, base + 3] = 1j * h_r[k] * gamma[k]
    fim = (2.0 / scenario.noise.variance) * np.real(np.conj(deriv).T @ deriv)
    return fim


@dataclass(frozen=True)
class McBlocks:
    """Chunk-averaged information blocks (prior included) with per-chunk means
    retained for resampling. b_se bounds the standard error of each cross entry."""

    a: float
    b: np.ndarray
    d: np.ndarray
    a_se: float
    b_se: np.ndarray
    samples: int
    chunk_a: np.ndarray
    chunk_b: np.ndarray
    chunk_d: np.ndarray
    chunk_sizes: np.ndarray


def _chunk_block_means(scenario: Scenario, c, h_r, h_t):
    """Per-sample conditional-information entries averaged over one chunk.

    Same derivative algebra as conditional_fim, vectorized and folded into the
    arrow blocks. Returns (a_mean, b_mean (L,4), d_mean (L,4,4)) without the
    2/noise_var scale or prior terms.
    """
    freqs = scenario.grid.as_array()
    gamma = scenario.sensor.reflection(freqs[None, :], c[:, None])
    dgamma = scenario.sensor.reflection_dc(freqs[None, :], c[:, None])

    a_mean = np.mean(np.sum(np.abs(h_r * dgamma * h_t) ** 2, axis=1))

    core = np.conj(dgamma) * gamma
    w1 = np.conj(h_r) * np.abs(h_t) ** 2 * core
    w2 = np.abs(h_r) ** 2 * np.conj(h_t) * core
    b_mean = np.stack([
        np.mean(w1.real, axis=0),
        np.mean(-w1.imag, axis=0),
        np.mean(w2.real, axis=0),
        np.mean(-w2.imag, axis=0),
    ], axis=1)

    power = np.abs(gamma) ** 2
    d11 = np.mean(power * np.abs(h_t) ** 2, axis=0)
    d22 = np.mean(power * np.abs(h_r) ** 2, axis=0)
    z12 = np.mean(h_r * np.conj(h_t) * power, axis=0)

    count = freqs.size
    d_mean = np.zeros((count, 4, 4))
    d_mean[:, 0, 0] = d_mean[:, 1, 1] = d11
    d_mean[:, 2, 2] = d_mean[:, 3, 3] = d22
    d_mean[:, 0, 2] = d_mean[:, 2, 0] = z12.real
    d_mean[:, 1, 3] = d_mean[:, 3, 1] = z12.real
    d_mean[:, 0, 3] = d_mean[:, 3, 0] = -z12.imag
    d_mean[:, 1, 2] = d_mean[:, 2, 1] = z12.imag
    return a_mean, b_mean, d_mean


def mc_blocks(scenario: Scenario, samples: int, seed: int = 0) -> McBlocks:
    """Monte Carlo estimate of the information blocks, prior terms included."""
    if scenario.channel.deterministic_los:
        raise ValueError("deterministic LoS has no channel blocks to estimate")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    count = scenario.grid.count
    n_chunks = (samples + MC_CHUNK - 1) // MC_CHUNK
    chunk_a = np.zeros(n_chunks)
    chunk_b = np.zeros((n_chunks, count, 4))
    chunk_d = np.zeros((n_chunks, count, 4, 4))
    sizes = np.zeros(n_chunks)
    for idx in range(n_chunks):
        size = min(MC_CHUNK, samples - idx * MC_CHUNK)
        c, h_r, h_t = draw_samples(scenario, size, chunk_rng(seed, idx))
        chunk_a[idx], chunk_b[idx], chunk_d[idx] = _chunk_block_means(scenario, c, h_r, h_t)
        sizes[idx] = size

    weights = sizes / samples
    two_over = 2.0 / scenario.noise.variance
    a_mean = float(np.sum(weights * chunk_a))
    b_mean = np.einsum("i,ikj->kj", weights, chunk_b)
    d_mean = np.einsum("i,iklm->klm", weights, chunk_d)

    # spread of chunk means gives the standard error of the weighted mean
    a_se = float(np.sqrt(np.sum(weights**2 * (chunk_a - a_mean) ** 2) * n_chunks / max(n_chunks - 1, 1)))
    b_se = np.sqrt(np.einsum("i,ikj->kj", weights**2, (chunk_b - b_mean) ** 2) * n_chunks / max(n_chunks - 1, 1))

    info = scenario.channel.prior_info_per_coordinate()
    d_full = two_over * d_mean
    d_full[:, np.arange(4), np.arange(4)] += info
    return McBlocks(
        a=two_over * a_mean + scenario.prior.curvature(),
        b=two_over * b_mean,
        d=d_full,
        a_se=two_over * a_se,
        b_se=two_over * b_se,
        samples=samples,
        chunk_a=chunk_a,
        chunk_b=chunk_b,
        chunk_d=chunk_d,
        chunk_sizes=sizes,
    )


def _bound_from_avg(scenario: Scenario, a_mean: float, b_mean: np.ndarray, d_mean: np.ndarray) -> float:
    two_over = 2.0 / scenario.noise.variance
    a = two_over * a_mean + scenario.prior.curvature()
    b = two_over * b_mean
    d = two_over * d_mean
    d[:, np.arange(4), np.arange(4)] += scenario.channel.prior_info_per_coordinate()
    coupling = 0.0
    for k in range(b.shape[0]):
        coupling += float(b[k] @ np.linalg.solve(d[k], b[k]))
    return 1.0 / (a - coupling)


def mc_bound(scenario: Scenario, samples: int, seed: int = 0) -> McEstimate:
    """Bound from Monte Carlo averaged conditional information.

    Standard error comes from a block bootstrap over chunk means (the bound
    is a nonlinear function of the averaged entries, so the uncertainty must
    be propagated through the inversion). Deterministic LoS has no sampling
    dimension left that the bound actually depends on beyond the condition
    average, which is evaluated by quadrature: the estimate is exact and the
    standard error is zero.
    """
    if scenario.channel.deterministic_los:
        return McEstimate(value=bcrb_closed_form(scenario).bound, std_err=0.0, samples=samples)
    blocks = mc_blocks(scenario, samples, seed)
    n_chunks = blocks.chunk_a.size
    value = _bound_from_avg(
        scenario,
        float(np.sum(blocks.chunk_sizes / samples * blocks.chunk_a)),
        np.einsum("i,ikj->kj", blocks.chunk_sizes / samples, blocks.chunk_b),
        np.einsum("i,iklm->klm", blocks.chunk_sizes / samples, blocks.chunk_d),
    )
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence(entropy=seed, spawn_key=(_BOOT_KEY,))))
    resampled = np.empty(BOOTSTRAP_RESAMPLES)
    for r in range(BOOTSTRAP_RESAMPLES):
        pick = rng.integers(0, n_chunks, size=n_chunks)
        w = blocks.chunk_sizes[pick]
        w = w / np.sum(w)
        resampled[r] = _bound_from_avg(
            scenario,
            float(np.sum(w * blocks.chunk_a[pick])),
            np.einsum("i,ikj->kj", w, blocks.chunk_b[pick]),
            np.einsum("i,iklm->klm", w, blocks.chunk_d[pick]),
        )
    return McEstimate(value=value, std_err=float(np.std(resampled, ddof=1)), samples=samples)


def posterior_mean_mse(scenario: Scenario, trials: int, grid_points: int = 2000,
                       seed: int = 0) -> McEstimate:
    """Mean squared error of the grid posterior mean under deterministic LoS.

    Simulates y = gamma(f, c) + noise, computes the posterior over a uniform
    condition grid spanning the prior mean +/- 6 std, and averages the squared
    estimation error. Lower-bounded by the LoS bound up to Monte Carlo noise.
    """
    if not scenario.channel.deterministic_los:
        raise ValueError("posterior_mean_mse requires the deterministic LoS mode")
    if trials < 2 or grid_points < 2:
        raise ValueError("need at least 2 trials and 2 grid points")
    prior = scenario.prior
    freqs = scenario.grid.as_array()
    noise_var = scenario.noise.variance

    c_grid = np.linspace(prior.mean - 6.0 * prior.std, prior.mean + 6.0 * prior.std, grid_points)
    g = scenario.sensor.reflection(freqs[None, :], c_grid[:, None])  # (P, L)
    g_norm = np.sum(np.abs(g) ** 2, axis=1)
    log_prior = -0.5 * ((c_grid - prior.mean) / prior.std) ** 2

    total_sq = 0.0
    total_q = 0.0
    n_chunks = (trials + 512 - 1) // 512
    done = 0
    for idx in range(n_chunks):
        size = min(512, trials - done)
        rng = chunk_rng(seed, idx)
        c_true = prior.mean + prior.std * rng.standard_normal(size)
        clean = scenario.sensor.reflection(freqs[None, :], c_true[:, None])
        noise = math.sqrt(noise_var / 2.0) * (
            rng.standard_normal((size, freqs.size)) + 1j * rng.standard_normal((size, freqs.size)))
        y = clean + noise

        cross = y @ np.conj(g.T)  # (size, P)
        log_lik = -(np.sum(np.abs(y) ** 2, axis=1)[:, None] - 2.0 * cross.real + g_norm[None, :]) / noise_var
        log_post = log_lik + log_prior[None, :]
        log_post -= np.max(log_post, axis=1, keepdims=True)
        w = np.exp(log_post)
        est = np.sum(w * c_grid[None, :], axis=1) / np.sum(w, axis=1)

        sq = (est - c_true) ** 2
        total_sq += float(np.sum(sq))
        total_q += float(np.sum(sq**2))
        done += size

    mse = total_sq / trials
    var = max(total_q - trials * mse**2, 0.0) / (trials - 1)
    return McEstimate(value=mse, std_err=math.sqrt(var / trials), samples=trials)
