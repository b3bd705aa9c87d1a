"""Bayesian information matrix blocks and the Cramer-Rao bound on the condition.

The parameter vector is theta = [c, h_1, ..., h_L] with h_k the four real
coordinates (Re, Im of the receive and transmit channel gains) of subcarrier k.
Averaging the conditional Fisher information over fading, condition and noise
and adding the prior information gives an arrow-shaped Bayesian information
matrix; the bound on the condition is the (1,1) element of its inverse, i.e.
the inverse Schur complement

    bcrb = 1 / (a - sum_k b_k^T d_k^{-1} b_k).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expectations import Quadrature, prior_moments
from .scenario import Scenario, SubcarrierGrid


@dataclass(frozen=True)
class BfimBlocks:
    """Arrow-matrix blocks: scalar condition info `a`, per-subcarrier cross
    vectors `b` (L, 4) and channel blocks `d` (L, 4, 4), prior included."""

    a: float
    b: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        d = np.asarray(self.d, dtype=float)
        if b.ndim != 2 or b.shape[1] != 4:
            raise ValueError(f"b must have shape (L, 4), got {b.shape}")
        if d.shape != (b.shape[0], 4, 4):
            raise ValueError(f"d must have shape (L, 4, 4), got {d.shape}")
        if not (np.isfinite(self.a) and self.a > 0.0):
            raise ValueError(f"a must be positive and finite, got {self.a}")
        if not np.allclose(d, np.swapaxes(d, 1, 2), rtol=0.0, atol=0.0):
            raise ValueError("every channel block must be exactly symmetric")
        for k in range(d.shape[0]):
            try:
                np.linalg.cholesky(d[k])
            except np.linalg.LinAlgError:
                raise ValueError(f"channel block {k} is not positive definite") from None
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    @property
    def count(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class BcrbResult:
    """Bound decomposition. 1/bound = first_term + prior_term - coupling_term,
    contributions holds the per-subcarrier information terms (positive)."""

    bound: float
    first_term: float
    prior_term: float
    coupling_term: float
    contributions: np.ndarray


def _moment_values(scenario: Scenario, frequencies, method):
    sp, corr, rp = prior_moments(scenario.sensor, np.asarray(frequencies, float),
                                 scenario.prior, method)
    return np.atleast_1d(sp), np.atleast_1d(corr), np.atleast_1d(rp)


def assemble_bfim(scenario: Scenario, method=Quadrature()) -> BfimBlocks:
    """Bayesian information blocks for a Rician scenario (prior terms included).

    Deterministic LoS has no channel uncertainty and therefore no channel
    blocks; use bcrb_closed_form for that mode.
    """
    ch = scenario.channel
    if ch.deterministic_los:
        raise ValueError("assemble_bfim requires a random channel; deterministic LoS has no channel blocks")
    sp, corr, rp = _moment_values(scenario, scenario.grid.as_array(), method)
    two_over = 2.0 / scenario.noise.variance
    a = two_over * float(np.sum(sp)) + scenario.prior.curvature()

    mean = ch.mean()
    b = two_over * mean * np.stack(
        [corr.real, -corr.imag, corr.real, -corr.imag], axis=1
    )

    count = sp.size
    diag = two_over * rp + ch.prior_info_per_coordinate()
    cross = two_over * rp * (ch.kappa / (ch.kappa + 1.0))
    d = np.zeros((count, 4, 4))
    idx = np.arange(4)
    d[:, idx, idx] = diag[:, None]
    for i, j in ((0, 2), (2, 0), (1, 3), (3, 1)):
        d[:, i, j] = cross
    return BfimBlocks(a=a, b=b, d=d)


def _structured_quadratic(b_k: np.ndarray, d_k: np.ndarray) -> float | None:
    """b^T d^{-1} b when d = [[p I2, q I2], [q I2, p I2]]; None if unstructured."""
    p = d_k[0, 0]
    q = d_k[0, 2]
    pattern = np.array([
        [p, 0.0, q, 0.0],
        [0.0, p, 0.0, q],
        [q, 0.0, p, 0.0],
        [0.0, q, 0.0, p],
    ])
    if not np.array_equal(d_k, pattern):
        return None
    det = p * p - q * q
    quad = p * float(b_k @ b_k) - 2.0 * q * float(b_k[0] * b_k[2] + b_k[1] * b_k[3])
    return quad / det


def bcrb_from_blocks(blocks: BfimBlocks) -> float:
    """Bound via the Schur complement of the channel blocks.

    Structured blocks are reduced in closed form; anything else falls back to
    a dense 4x4 solve per subcarrier.
    """
    coupling_sum = 0.0
    for k in range(blocks.count):
        val = _structured_quadratic(blocks.b[k], blocks.d[k])
        if val is None:
            val = float(blocks.b[k] @ np.linalg.solve(blocks.d[k], blocks.b[k]))
        coupling_sum += val
    denom = blocks.a - coupling_sum
    if denom <= 0.0:
        raise ArithmeticError(
            f"information matrix is not positive definite: a={blocks.a!r} <= coupling sum={coupling_sum!r}"
        )
    return 1.0 / denom


def bfim_dense(blocks: BfimBlocks) -> np.ndarray:
    """Full (1 + 4L) x (1 + 4L) information matrix from the blocks."""
    count = blocks.count
    n = 1 + 4 * count
    m = np.zeros((n, n))
    m[0, 0] = blocks.a
    for k in range(count):
        sl = slice(1 + 4 * k, 5 + 4 * k)
        m[0, sl] = blocks.b[k]
        m[sl, 0] = blocks.b[k]
        m[sl, sl] = blocks.d[k]
    return m


def bcrb_from_dense(blocks: BfimBlocks) -> float:
    """Oracle path: (1,1) element of the dense inverse. Verification only, L <= 64."""
    if blocks.count > 64:
        raise ValueError(f"dense verification path is limited to 64 subcarriers, got {blocks.count}")
    m = bfim_dense(blocks)
    e0 = np.zeros(m.shape[0])
    e0[0] = 1.0
    return float(np.linalg.solve(m, e0)[0])


def _contributions(scenario: Scenario, sp, corr, rp) -> np.ndarray:
    """Per-subcarrier information after fading loss.

    contribution_k = slope_power_k
                     - 2 kappa |corr_k|^2 / ((2 kappa + 1) reflection_power_k
                                             + noise_var (kappa + 1)^2)

    Positive whenever the dip has nonzero depth, by Cauchy-Schwarz
    (|corr|^2 <= slope_power * reflection_power).
    """
    ch = scenario.channel
    if ch.deterministic_los:
        return np.array(sp, dtype=float, copy=True)
    kappa = ch.kappa
    denom = (2.0 * kappa + 1.0) * rp + scenario.noise.variance * (kappa + 1.0) ** 2
    return sp - 2.0 * kappa * np.abs(corr) ** 2 / denom


def bcrb_closed_form(scenario: Scenario, method=Quadrature()) -> BcrbResult:
    """Bound on the condition from the three prior moments, no matrix algebra.

    Equals bcrb_from_blocks(assemble_bfim(...)) for random channels; in
    deterministic LoS mode the channels drop out and the bound reduces to
    1 / ((2 / noise_var) * sum slope_power + prior curvature).
    """
    sp, corr, rp = _moment_values(scenario, scenario.grid.as_array(), method)
    two_over = 2.0 / scenario.noise.variance
    first = two_over * float(np.sum(sp))
    prior_term = scenario.prior.curvature()
    contrib = _contributions(scenario, sp, corr, rp)
    coupling = first - two_over * float(np.sum(contrib))
    denom = first + prior_term - coupling
    if denom <= 0.0:
        raise ArithmeticError(f"bound denominator is not positive: {denom!r}")
    return BcrbResult(
        bound=1.0 / denom,
        first_term=first,
        prior_term=prior_term,
        coupling_term=coupling,
        contributions=contrib,
    )


def subcarrier_contribution(scenario: Scenario, k: int, method=Quadrature()) -> float:
    """Information contribution of subcarrier k of the scenario grid."""
    freqs = scenario.grid.as_array()
    if not 0 <= k < freqs.size:
        raise IndexError(f"subcarrier index {k} out of range for {freqs.size} tones")
    sp, corr, rp = _moment_values(scenario, freqs[k], method)
    return float(_contributions(scenario, sp, corr, rp)[0])


def select_subcarriers(candidates: SubcarrierGrid, scenario: Scenario, budget: int,
                       method=Quadrature()) -> list[float]:
    """Pick `budget` candidate tones by descending information contribution.

    Contributions are additive across tones, so the greedy pick is optimal.
    Ties break toward the tone closest to the prior-mean resonance, then
    toward the lower frequency. scenario.grid is ignored; `candidates` is the
    menu of frequencies.
    """
    freqs = candidates.as_array()
    if not 1 <= budget <= freqs.size:
        raise ValueError(f"budget must be in [1, {freqs.size}], got {budget}")
    sp, corr, rp = _moment_values(scenario, freqs, method)
    contrib = _contributions(scenario, sp, corr, rp)
    center = scenario.sensor.resonance(scenario.prior.mean)
    order = sorted(range(freqs.size),
                   key=lambda i: (-contrib[i], abs(freqs[i] - center), freqs[i]))
    return [float(freqs[i]) for i in order[:budget]]
