"""Total transmit power ``f(x) = Σ_i 1/λ_i(Z)`` and three routes to its gradient.

``gradient_closed_form`` is the eigenvalue-derivative formula used by the
optimizer. ``gradient_finite_difference`` and ``gradient_trace_form``
(``-tr(Z⁻² ∂Z/∂x_n)``) are independent oracles for it.
"""

from __future__ import annotations

import logging
import warnings

import numpy as np

from .channel import (
    channel_matrix,
    eigendecompose_gain,
    gain_matrix,
    gain_matrix_partials,
    GainEigensystem,
    zf_combiner,
)
from .scenario import ScenarioConfig

__all__ = [
    "SingularGainError",
    "DegenerateSpectrumError",
    "DegenerateSpectrumWarning",
    "SINGULAR_TOL",
    "GAP_TOL",
    "gain_eigensystem",
    "total_power_objective",
    "objective_faces",
    "gradient_from_eigensystem",
    "gradient_closed_form",
    "gradient_finite_difference",
    "gradient_trace_form",
]

log = logging.getLogger(__name__)

SINGULAR_TOL = 1e-12
GAP_TOL = 1e-8
IMAG_TOL = 1e-9


class SingularGainError(np.linalg.LinAlgError):
    """Gain matrix is numerically singular; the power objective blows up."""


class DegenerateSpectrumError(np.linalg.LinAlgError):
    """Repeated eigenvalues make the per-eigenvalue derivatives ill defined."""


class DegenerateSpectrumWarning(RuntimeWarning):
    pass


def gain_eigensystem(x, cfg: ScenarioConfig) -> GainEigensystem:
    eig = eigendecompose_gain(gain_matrix(x, cfg), 1.0 / np.sqrt(cfg.omega))
    lam = eig.eigenvalues
    if lam[0] <= SINGULAR_TOL * lam[-1]:
        raise SingularGainError(
            f"gain matrix singular: min eigenvalue {lam[0]:.3e} vs max {lam[-1]:.3e}"
        )
    return eig


def total_power_objective(x, cfg: ScenarioConfig) -> float:
    """Minimum total ZF transmit power at positions ``x``."""
    return float(np.sum(1.0 / gain_eigensystem(x, cfg).eigenvalues))


def objective_faces(x, cfg: ScenarioConfig) -> dict[str, float]:
    """The same power evaluated four ways; useful only as a cross-check.

    Keys: ``column_norms`` (per-user ZF powers summed), ``frobenius``,
    ``trace`` (``tr Z⁻¹`` by direct inversion) and ``eigen``.
    """
    h = channel_matrix(x, cfg)
    w = zf_combiner(h)
    omega = cfg.omega
    col = float(np.sum(np.sum(np.abs(w) ** 2, axis=0) * omega))
    frob = float(np.linalg.norm(w * np.sqrt(omega)[None, :], "fro") ** 2)
    z = (h.conj().T @ h) / omega[:, None]
    tr = float(np.trace(np.linalg.inv(z)).real)
    return {"column_norms": col, "frobenius": frob, "trace": tr,
            "eigen": total_power_objective(x, cfg)}


def _min_gap(lam: np.ndarray) -> float:
    return float(np.min(np.diff(lam))) if len(lam) > 1 else np.inf


def gradient_from_eigensystem(eig: GainEigensystem, partials: np.ndarray) -> np.ndarray:
    """``g_n = -Σ_i [V⁻¹ ∂Z/∂x_n V]_ii / λ_i²`` for a given eigensystem.

    The diagonal terms are real in exact arithmetic; a residue above
    ``1e-9`` (relative to their magnitude) means the eigensystem and the
    partials do not belong together.
    """
    d_lam = np.einsum("ia,nab,bi->ni", eig.v_inv, partials, eig.v)
    scale = max(1.0, float(np.max(np.abs(d_lam)))) if d_lam.size else 1.0
    resid = float(np.max(np.abs(d_lam.imag))) if d_lam.size else 0.0
    if resid > IMAG_TOL * scale:
        raise np.linalg.LinAlgError(
            f"eigenvalue derivatives not real (imaginary residue {resid:.2e})"
        )
    return -(d_lam.real / eig.eigenvalues[None, :] ** 2).sum(axis=1)


def gradient_closed_form(x, cfg: ScenarioConfig, degenerate_policy: str = "trace_fallback",
                         eig: GainEigensystem | None = None) -> np.ndarray:
    """Gradient of the total power via eigenvalue derivatives.

    When two eigenvalues are closer than ``1e-8`` of the largest, the
    per-eigenvalue derivatives stop being meaningful. ``trace_fallback``
    then returns the trace-identity gradient (their sum is still well
    defined) and warns; ``abort`` raises :class:`DegenerateSpectrumError`.
    """
    if eig is None:
        eig = gain_eigensystem(x, cfg)
    lam = eig.eigenvalues
    if _min_gap(lam) < GAP_TOL * lam[-1]:
        msg = f"near-repeated eigenvalues (gap {_min_gap(lam):.2e}) at x={np.asarray(x)!r}"
        if degenerate_policy == "abort":
            raise DegenerateSpectrumError(msg)
        if degenerate_policy != "trace_fallback":
            raise ValueError(f"unknown degenerate_policy {degenerate_policy!r}")
        log.info("%s; using trace identity", msg)
        warnings.warn(msg, DegenerateSpectrumWarning, stacklevel=2)
        return gradient_trace_form(x, cfg)
    return gradient_from_eigensystem(eig, gain_matrix_partials(x, cfg))


def gradient_finite_difference(x, cfg: ScenarioConfig, epsilon: float = 1e-6,
                               scheme: str = "central") -> np.ndarray:
    """Gradient by perturbing one antenna at a time.

    ``scheme="forward"`` is the one-sided difference quotient with N+1
    objective evaluations; ``"central"`` costs 2N but is second order.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    x = np.asarray(x, dtype=float)
    g = np.empty(len(x))
    if scheme == "forward":
        f0 = total_power_objective(x, cfg)
    elif scheme != "central":
        raise ValueError(f"unknown scheme {scheme!r}")
    for n in range(len(x)):
        xp = x.copy()
        xp[n] += epsilon
        if scheme == "forward":
            g[n] = (total_power_objective(xp, cfg) - f0) / epsilon
        else:
            xm = x.copy()
            xm[n] -= epsilon
            g[n] = (total_power_objective(xp, cfg) - total_power_objective(xm, cfg)) / (2 * epsilon)
    return g


def gradient_trace_form(x, cfg: ScenarioConfig) -> np.ndarray:
    """``g_n = -tr(Z⁻² ∂Z/∂x_n)`` with an explicit inverse; fine at repeated eigenvalues."""
    z = gain_matrix(x, cfg)
    lam = np.linalg.eigvals(z).real
    if lam.min() <= SINGULAR_TOL * lam.max():
        raise SingularGainError("gain matrix singular")
    zi = np.linalg.inv(z)
    zi2 = zi @ zi
    # tr(A B) = Σ_ab A[a, b] B[b, a]
    return -np.einsum("ab,nba->n", zi2, gain_matrix_partials(x, cfg)).real
