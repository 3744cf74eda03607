"""Line-of-sight uplink channel, zero-forcing reception and the gain matrix.

The gain matrix ``Z = Ω⁻¹ Hᴴ H`` (``Ω = diag(ε_i σ²)``) drives everything
downstream: its eigenvalue reciprocals sum to the minimum total transmit
power under zero forcing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import ScenarioConfig

__all__ = [
    "RankDeficientError",
    "DecompositionError",
    "GainEigensystem",
    "UplinkSample",
    "steering_vector",
    "channel_matrix",
    "zf_combiner",
    "sinr_general",
    "sinr_zf",
    "min_powers",
    "gain_matrix",
    "gain_matrix_partial",
    "gain_matrix_partials",
    "eigendecompose_gain",
    "simulate_uplink",
    "simulate_uplink_sinr",
]

RANK_TOL = 1e-10
HERMITIAN_TOL = 1e-8


class RankDeficientError(np.linalg.LinAlgError):
    """Channel matrix has (numerically) dependent columns."""


class DecompositionError(np.linalg.LinAlgError):
    """Gain matrix is not similar to a Hermitian PSD matrix."""


def steering_vector(x, theta: float, wavelength: float = 1.0) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.exp(1j * (2 * np.pi / wavelength) * x * np.sin(theta))


def channel_matrix(x, cfg: ScenarioConfig) -> np.ndarray:
    """N×M matrix whose column i is the steering vector toward user i."""
    x = np.asarray(x, dtype=float)
    return np.exp(1j * cfg.wavenumber * np.outer(x, cfg.sines))


def _gram_inverse(h: np.ndarray) -> np.ndarray:
    gram = h.conj().T @ h
    s = np.linalg.svd(gram, compute_uv=False)
    if s[-1] <= RANK_TOL * s[0]:
        cond = np.inf if s[-1] == 0 else s[0] / s[-1]
        raise RankDeficientError(f"HᴴH is rank deficient (condition number {cond:.3e})")
    return np.linalg.inv(gram)


def zf_combiner(h: np.ndarray) -> np.ndarray:
    """Zero-forcing combiner ``W = H (HᴴH)⁻¹`` so that ``Wᴴ H = I``."""
    return h @ _gram_inverse(h)


def sinr_general(w: np.ndarray, h: np.ndarray, p, sigma2: float) -> np.ndarray:
    """Per-user SINR for an arbitrary linear combiner ``w`` (N×M)."""
    p = np.asarray(p, dtype=float)
    cross = np.abs(w.conj().T @ h) ** 2  # [i, k] = |w_iᴴ h_k|²
    received = cross * p[None, :]
    signal = np.diag(received).copy()
    interference = received.sum(axis=1) - signal
    noise = np.sum(np.abs(w) ** 2, axis=0) * sigma2
    return signal / (interference + noise)


def _zf_column_norms_sq(x, cfg: ScenarioConfig) -> np.ndarray:
    w = zf_combiner(channel_matrix(x, cfg))
    return np.sum(np.abs(w) ** 2, axis=0)


def sinr_zf(x, cfg: ScenarioConfig, p) -> np.ndarray:
    return np.asarray(p, dtype=float) / (_zf_column_norms_sq(x, cfg) * cfg.noise_power)


def min_powers(x, cfg: ScenarioConfig) -> np.ndarray:
    """Smallest transmit powers meeting every rate target with ZF reception."""
    return _zf_column_norms_sq(x, cfg) * cfg.epsilons * cfg.noise_power


def gain_matrix(x, cfg: ScenarioConfig) -> np.ndarray:
    """``Z[i, j] = (1/(ε_i σ²)) Σ_k exp(j k0 x_k (sin θ_j - sin θ_i))``."""
    x = np.asarray(x, dtype=float)
    s = cfg.sines
    ds = s[None, :] - s[:, None]
    phases = np.exp(1j * cfg.wavenumber * x[:, None, None] * ds[None, :, :])
    return phases.sum(axis=0) / cfg.omega[:, None]


def gain_matrix_partials(x, cfg: ScenarioConfig) -> np.ndarray:
    """Stack of ``∂Z/∂x_n`` for every antenna, shape (N, M, M)."""
    x = np.asarray(x, dtype=float)
    k0 = cfg.wavenumber
    s = cfg.sines
    ds = s[None, :] - s[:, None]
    scale = k0 * ds / cfg.omega[:, None]
    return scale[None] * np.exp(1j * (k0 * x[:, None, None] * ds[None] + np.pi / 2))


def gain_matrix_partial(x, cfg: ScenarioConfig, n: int) -> np.ndarray:
    """``∂Z/∂x_n`` for a single zero-based antenna index ``n``."""
    x = np.asarray(x, dtype=float)
    if not 0 <= n < len(x):
        raise IndexError(f"antenna index {n} out of range for N={len(x)}")
    return gain_matrix_partials(x[n:n + 1], cfg)[0]


@dataclass(frozen=True)
class GainEigensystem:
    """``Z = V diag(eigenvalues) V⁻¹`` with eigenvalues ascending."""

    z: np.ndarray
    v: np.ndarray
    v_inv: np.ndarray
    eigenvalues: np.ndarray

    def reconstruction_error(self) -> float:
        zr = (self.v * self.eigenvalues) @ self.v_inv
        return float(np.linalg.norm(zr - self.z) / np.linalg.norm(self.z))


def eigendecompose_gain(z: np.ndarray, omega_inv_sqrt_diag) -> GainEigensystem:
    """Eigensystem of the non-Hermitian gain matrix via a Hermitian similarity.

    ``S = Ω^{1/2} Z Ω^{-1/2}`` is Hermitian PSD. With ``S = U Λ Uᴴ`` we get
    ``V = Ω^{-1/2} U`` and ``V⁻¹ = Uᴴ Ω^{1/2}`` without inverting anything.
    Columns of ``V`` are not unit norm; the eigenvalue-derivative formula
    does not care.
    """
    d = np.asarray(omega_inv_sqrt_diag, dtype=float)
    s = (z / d[:, None]) * d[None, :]
    scale = np.linalg.norm(s)
    asym = np.linalg.norm(s - s.conj().T) / scale if scale > 0 else 0.0
    if asym > HERMITIAN_TOL:
        raise DecompositionError(
            f"similarity-transformed gain matrix is not Hermitian (relative asymmetry {asym:.2e})"
        )
    lam, u = np.linalg.eigh(0.5 * (s + s.conj().T))
    v = d[:, None] * u
    v_inv = u.conj().T / d[None, :]
    return GainEigensystem(z=z, v=v, v_inv=v_inv, eigenvalues=lam)


# -- Monte-Carlo link simulation ----------------------------------------------

@dataclass(frozen=True)
class UplinkSample:
    """Per-user average powers measured at the ZF combiner output."""

    signal: np.ndarray
    interference: np.ndarray
    noise: np.ndarray

    @property
    def sinr(self) -> np.ndarray:
        return self.signal / (self.interference + self.noise)


def simulate_uplink(x, cfg: ScenarioConfig, p, num_symbols: int, seed: int,
                    chunk: int = 1 << 16) -> UplinkSample:
    """Push random symbols and noise through ``y = Wᴴ H P^{1/2} s + Wᴴ n``.

    Symbols are unit-modulus with uniform random phase; noise is circular
    complex Gaussian with variance σ² per antenna. Powers are sample means
    over ``num_symbols`` channel uses.
    """
    if num_symbols < 1:
        raise ValueError("num_symbols must be >= 1")
    h = channel_matrix(x, cfg)
    w = zf_combiner(h)
    g = w.conj().T @ h  # M×M, ≈ I
    amp = np.sqrt(np.asarray(p, dtype=float))
    M, N = cfg.num_users, cfg.num_antennas
    rng = np.random.default_rng(seed)
    sig = np.zeros(M)
    intf = np.zeros(M)
    noi = np.zeros(M)
    g_diag = np.diag(g)
    g_off = g - np.diag(g_diag)
    done = 0
    while done < num_symbols:
        b = min(chunk, num_symbols - done)
        sym = np.exp(2j * np.pi * rng.random((M, b))) * amp[:, None]
        n = rng.standard_normal((N, b)) + 1j * rng.standard_normal((N, b))
        n *= np.sqrt(cfg.noise_power / 2)
        sig += np.sum(np.abs(g_diag[:, None] * sym) ** 2, axis=1)
        intf += np.sum(np.abs(g_off @ sym) ** 2, axis=1)
        noi += np.sum(np.abs(w.conj().T @ n) ** 2, axis=1)
        done += b
    return UplinkSample(sig / num_symbols, intf / num_symbols, noi / num_symbols)


def simulate_uplink_sinr(x, cfg: ScenarioConfig, p, num_symbols: int, seed: int) -> np.ndarray:
    return simulate_uplink(x, cfg, p, num_symbols, seed).sinr
