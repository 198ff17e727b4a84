"""Outer alternating minimization: image step, phase-error step, bookkeeping.

Each outer iteration solves the image sub-problem with the configured engine
(forward-backward splitting or the Wirtinger/CG fixed-point step), then
updates every aperture phase in closed form as the minimizer of
||g_m - e^{j phi} C_m f||^2 over phi, i.e. the principal angle of
(C_m f)^H g_m, and rebuilds the corrupted observation matrix. Iterations
start from f = C^H g and phi = 0 and stop once the relative image change
drops to the outer tolerance or the iteration budget is exhausted.

The data model is invariant under (f, phi) -> (e^{jc} f, phi - c); helpers
for removing that global gauge from images and phase estimates live here.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .cfba import CfbaConfig, cfba_inner, check_prox_convexity, estimate_lipschitz
from .errors import ConfigurationError
from .forward_model import (
    ObservationMatrix,
    PhaseErrorVector,
    PhaseHistory,
    adjoint_image,
    apply_phase_error,
    wrap_angle,
)
from .metrics import cost_with_matrix
from .regularizers import RegularizerSpec
from .wama import WamaConfig, wama_f_step

ENGINES = ("cfba", "wama")


@dataclass(frozen=True)
class AutofocusConfig:
    """Engine selection, penalty, and outer stopping parameters."""

    engine: str
    spec: RegularizerSpec
    engine_cfg: CfbaConfig | WamaConfig
    outer_max_iters: int = 300
    outer_rel_tol: float = 1e-3

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ConfigurationError(f"unknown engine {self.engine!r}; choose from {ENGINES}")
        if self.outer_max_iters < 1:
            raise ConfigurationError("outer_max_iters must be >= 1")
        if self.outer_rel_tol < 0.0:
            raise ConfigurationError("outer_rel_tol must be >= 0")
        if self.engine == "cfba":
            if not isinstance(self.engine_cfg, CfbaConfig):
                raise ConfigurationError("engine 'cfba' needs a CfbaConfig")
            check_prox_convexity(self.engine_cfg, self.spec)
        else:
            if not isinstance(self.engine_cfg, WamaConfig):
                raise ConfigurationError("engine 'wama' needs a WamaConfig")


@dataclass(frozen=True)
class TraceRow:
    n: int
    cost: float
    rel_change: float
    wall_time_s: float


@dataclass
class CostTrace:
    """Per-outer-iteration record of the joint cost and iterate movement."""

    rows: list[TraceRow] = field(default_factory=list)

    def append(self, n: int, cost: float, rel_change: float, wall_time_s: float) -> None:
        self.rows.append(TraceRow(n, cost, rel_change, wall_time_s))

    def costs(self) -> np.ndarray:
        return np.array([row.cost for row in self.rows])

    def rel_changes(self) -> np.ndarray:
        return np.array([row.rel_change for row in self.rows])

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class AutofocusResult:
    f_hat: np.ndarray = field(repr=False)
    phi_hat: PhaseErrorVector
    trace: CostTrace
    converged: bool
    iterations: int


def phase_update(C_clean: ObservationMatrix, g, f: np.ndarray) -> PhaseErrorVector:
    """Per-aperture closed-form phase estimate.

    For each block m the minimizer of ||g_m - e^{j phi} C_m f||^2 over
    [-pi, pi) is the angle of (C_m f)^H g_m, taken with the two-argument
    arctangent so every quadrant is reachable. Blocks with C_m f = 0 get 0.
    """
    samples = g.samples if isinstance(g, PhaseHistory) else np.asarray(g, dtype=complex)
    f = np.asarray(f, dtype=complex)
    if f.shape != (C_clean.n_pixels,) or samples.shape != (C_clean.n_rows,):
        raise ConfigurationError("dimension mismatch in phase_update")
    m, k = C_clean.num_apertures, C_clean.samples_per_pulse
    cf = (C_clean.entries @ f).reshape(m, k)
    z = np.sum(np.conj(cf) * samples.reshape(m, k), axis=1)
    return PhaseErrorVector(angles=np.arctan2(z.imag, z.real))


def update_corrupted_matrix(C_clean: ObservationMatrix, phi: PhaseErrorVector) -> ObservationMatrix:
    """Rebuild C(phi) from the clean operator and the current phase estimate."""
    return apply_phase_error(C_clean, phi)


def _relative_change(new: np.ndarray, old: np.ndarray) -> float:
    denom = np.linalg.norm(old)
    if denom == 0.0:
        return 0.0 if np.linalg.norm(new) == 0.0 else np.inf
    return float(np.linalg.norm(new - old) / denom)


def run_autofocus(C_clean: ObservationMatrix, g, cfg: AutofocusConfig) -> AutofocusResult:
    """Alternate image and phase-error steps until the stopping rule fires.

    Initialization follows the standard recipe: f = C^H g, phi = 0, so the
    first trace row records the joint cost of the matched-filter start. The
    loop stops when the relative image change is <= outer_rel_tol (converged)
    or after outer_max_iters iterations.
    """
    samples = g.samples if isinstance(g, PhaseHistory) else np.asarray(g, dtype=complex)
    start = time.perf_counter()
    f = adjoint_image(C_clean, samples)
    phi = PhaseErrorVector(angles=np.zeros(C_clean.num_apertures))
    C_phi = C_clean
    trace = CostTrace()
    trace.append(0, cost_with_matrix(C_phi, f, samples, cfg.spec), np.inf,
                 time.perf_counter() - start)
    converged = False
    iterations = 0
    for n in range(1, cfg.outer_max_iters + 1):
        if cfg.engine == "cfba":
            f_new = cfba_inner(C_phi, samples, f, cfg.spec, cfg.engine_cfg)
        else:
            f_new = wama_f_step(C_phi, samples, f, cfg.spec, cfg.engine_cfg).x
        phi = phase_update(C_clean, samples, f_new)
        C_phi = update_corrupted_matrix(C_clean, phi)
        rel = _relative_change(f_new, f)
        f = f_new
        iterations = n
        trace.append(n, cost_with_matrix(C_phi, f, samples, cfg.spec), rel,
                     time.perf_counter() - start)
        if rel <= cfg.outer_rel_tol:
            converged = True
            break
    return AutofocusResult(
        f_hat=f, phi_hat=phi, trace=trace, converged=converged, iterations=iterations
    )


def default_engine_config(engine: str, lipschitz: float, mu_multiplier: float = 0.9):
    """Engine configuration with the documented step-size convention."""
    if engine == "cfba":
        return CfbaConfig(mu=mu_multiplier / lipschitz, lipschitz=lipschitz)
    if engine == "wama":
        return WamaConfig()
    raise ConfigurationError(f"unknown engine {engine!r}")


def auto_lambda(gamma: float, lipschitz: float) -> float:
    """Default penalty weight: as large as the prox convexity constraint
    allows at mu = 0.9/L, with a 10% margin on gamma (lam = 3.6 gamma^2 L)."""
    return 3.6 * gamma**2 * lipschitz


def make_default_config(
    engine: str,
    C_clean: ObservationMatrix,
    gamma: float = 0.1,
    lam: float | None = None,
    mu_multiplier: float = 0.9,
    outer_max_iters: int = 300,
    outer_rel_tol: float = 1e-3,
) -> AutofocusConfig:
    """AutofocusConfig with auto-scaled Cauchy penalty for a given operator.

    The spectral bound is estimated once from the clean operator; the phase
    corruption multiplies blocks by unit-modulus scalars, so
    C(phi)^H C(phi) = C^H C and the bound holds for every outer iteration.
    """
    lipschitz = estimate_lipschitz(C_clean, iters=60, seed=0)
    if lam is None:
        lam = auto_lambda(gamma, lipschitz)
    spec = RegularizerSpec.cauchy(gamma=gamma, lam=lam)
    return AutofocusConfig(
        engine=engine,
        spec=spec,
        engine_cfg=default_engine_config(engine, lipschitz, mu_multiplier),
        outer_max_iters=outer_max_iters,
        outer_rel_tol=outer_rel_tol,
    )


def align_global_phase(f_hat: np.ndarray, f_ref: np.ndarray) -> np.ndarray:
    """Rotate f_hat by the constant phase minimizing ||e^{jc} f_hat - f_ref||."""
    f_hat = np.asarray(f_hat, dtype=complex)
    f_ref = np.asarray(f_ref, dtype=complex)
    inner = np.vdot(f_hat, f_ref)
    if inner == 0.0:
        return f_hat.copy()
    return f_hat * np.exp(1j * np.angle(inner))


def phase_offset(phi_hat, phi_ref) -> float:
    """Best single constant c (circular mean) such that phi_hat ≈ phi_ref + c."""
    a = phi_hat.angles if isinstance(phi_hat, PhaseErrorVector) else np.asarray(phi_hat)
    b = phi_ref.angles if isinstance(phi_ref, PhaseErrorVector) else np.asarray(phi_ref)
    return float(np.angle(np.mean(np.exp(1j * (a - b)))))


def aligned_phase_residual(phi_hat, phi_ref) -> np.ndarray:
    """wrap(phi_hat - phi_ref - c) with the gauge constant c removed."""
    a = phi_hat.angles if isinstance(phi_hat, PhaseErrorVector) else np.asarray(phi_hat)
    b = phi_ref.angles if isinstance(phi_ref, PhaseErrorVector) else np.asarray(phi_ref)
    return wrap_angle(a - b - phase_offset(a, b))
