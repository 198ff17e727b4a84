"""Quantitative evaluation: joint cost, gauge-aligned MSE, image entropy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .forward_model import ObservationMatrix, PhaseErrorVector, PhaseHistory, corrupted_matvec
from .regularizers import RegularizerSpec, penalty_value


@dataclass(frozen=True)
class EvalReport:
    """One method's numbers for a reconstruction experiment."""

    mse: float
    mse_raw: float
    entropy: float
    final_cost: float
    iterations: int

    def __post_init__(self):
        if self.mse < 0.0 or self.mse_raw < 0.0 or self.entropy < -1e-12:
            raise ConfigurationError("mse and entropy must be nonnegative")


def cost_with_matrix(C_phi: ObservationMatrix, f: np.ndarray, g, spec: RegularizerSpec) -> float:
    """J evaluated with an already-corrupted observation matrix."""
    samples = g.samples if isinstance(g, PhaseHistory) else np.asarray(g, dtype=complex)
    residual = samples - C_phi.entries @ np.asarray(f, dtype=complex)
    fidelity = float(np.vdot(residual, residual).real)
    return fidelity + penalty_value(spec, f, shape=C_phi.image_shape)


def cost_J(
    C_clean: ObservationMatrix,
    phi: PhaseErrorVector,
    f: np.ndarray,
    g,
    spec: RegularizerSpec,
) -> float:
    """Joint cost ||g - C(phi) f||^2 + lam * R(f)."""
    samples = g.samples if isinstance(g, PhaseHistory) else np.asarray(g, dtype=complex)
    f = np.asarray(f, dtype=complex)
    if f.shape != (C_clean.n_pixels,) or samples.shape != (C_clean.n_rows,):
        raise ConfigurationError("dimension mismatch in cost_J")
    residual = samples - corrupted_matvec(C_clean, phi, f)
    fidelity = float(np.vdot(residual, residual).real)
    return fidelity + penalty_value(spec, f, shape=C_clean.image_shape)


def mse(f_hat: np.ndarray, f_ref: np.ndarray, align: bool = True) -> float:
    """Mean squared error (1/N) sum |f_hat_i - f_ref_i|^2.

    By default the best global phase is removed from f_hat first, since the
    observation model cannot distinguish (f, phi) from (e^{jc} f, phi - c).
    Set align=False for the raw difference.
    """
    f_hat = np.asarray(f_hat, dtype=complex)
    f_ref = np.asarray(f_ref, dtype=complex)
    if f_hat.shape != f_ref.shape:
        raise ConfigurationError("mse needs equal-length images")
    if align:
        inner = np.vdot(f_hat, f_ref)
        if inner != 0.0:
            f_hat = f_hat * np.exp(1j * np.angle(inner))
    return float(np.mean(np.abs(f_hat - f_ref) ** 2))


def entropy(f: np.ndarray) -> float:
    """Shannon entropy of normalized pixel intensities, -sum p ln p.

    p_i = |f_i|^2 / sum_j |f_j|^2; zero-intensity pixels contribute nothing.
    Lies in [0, ln N] and is invariant under global complex scaling.
    """
    intensity = np.abs(np.asarray(f, dtype=complex)) ** 2
    total = intensity.sum()
    if total == 0.0:
        raise ConfigurationError("entropy of an all-zero image is undefined")
    p = intensity / total
    nonzero = p > 0.0
    return float(-np.sum(p[nonzero] * np.log(p[nonzero])))
