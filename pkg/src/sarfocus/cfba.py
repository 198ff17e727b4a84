"""Complex forward-backward splitting for the image sub-problem.

Minimizes J_n(o) = ||g - C o||^2 + lam * R_cauchy(o) over complex o by
alternating a Wirtinger gradient step on the fidelity term with the
closed-form magnitude-Cauchy prox:

    o <- prox_{mu G}( o - 2 mu C^H (C o - g) )

The step size must satisfy mu <= 1 / L with L the largest eigenvalue of
C^H C, and the prox requires gamma >= sqrt(mu * lam) / 2. A real-valued twin
of the iteration on the 2N-dimensional lifting (re-parts stacked over
im-parts, C lifted to [[Re C, -Im C], [Im C, Re C]]) is provided for
equivalence checking: both paths produce the same iterates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .forward_model import ObservationMatrix, PhaseHistory
from .regularizers import RegularizerSpec, cauchy_prox_magnitude, complex_prox, penalty_value


@dataclass(frozen=True)
class CfbaConfig:
    """Step size and stopping parameters of the inner splitting loop.

    ``mu`` is the prox scale; the gradient stride is 2*mu. ``lipschitz`` is
    the spectral bound L = lambda_max(C^H C); the constraint 0 < mu <= 1/L is
    enforced here, the prox convexity constraint in :func:`check_prox_convexity`.
    """

    mu: float
    lipschitz: float
    max_inner_iters: int = 500
    inner_rel_tol: float = 1e-3

    def __post_init__(self):
        if not self.mu > 0.0:
            raise ConfigurationError("mu must be > 0")
        if not self.lipschitz > 0.0:
            raise ConfigurationError("lipschitz must be > 0")
        if self.mu > (1.0 + 1e-12) / self.lipschitz:
            raise ConfigurationError(
                f"mu = {self.mu} violates mu <= 1/L with L = {self.lipschitz}"
            )
        if self.max_inner_iters < 1:
            raise ConfigurationError("max_inner_iters must be >= 1")
        if self.inner_rel_tol < 0.0:
            raise ConfigurationError("inner_rel_tol must be >= 0")


def check_prox_convexity(cfg: CfbaConfig, spec: RegularizerSpec) -> None:
    """Raise unless gamma >= sqrt(mu * lam) / 2 (single-real-root regime)."""
    if spec.kind != "cauchy":
        raise ConfigurationError("the splitting solver supports the cauchy penalty only")
    bound = np.sqrt(cfg.mu * spec.lam) / 2.0
    if spec.gamma < bound - 1e-12:
        raise ConfigurationError(
            f"gamma = {spec.gamma} < sqrt(mu*lam)/2 = {bound:.6g}; "
            "decrease lam or mu, or increase gamma"
        )


def wirtinger_grad_fidelity(C: ObservationMatrix, f: np.ndarray, g) -> np.ndarray:
    """Complex (Wirtinger) gradient of ||g - C f||^2, namely C^H (C f - g)."""
    samples = g.samples if isinstance(g, PhaseHistory) else np.asarray(g, dtype=complex)
    f = np.asarray(f, dtype=complex)
    if f.shape != (C.n_pixels,) or samples.shape != (C.n_rows,):
        raise ConfigurationError("dimension mismatch in wirtinger_grad_fidelity")
    return C.entries.conj().T @ (C.entries @ f - samples)


def estimate_lipschitz(C: ObservationMatrix, iters: int = 100, seed: int = 0) -> float:
    """Power-iteration bound on lambda_max(C^H C), inflated by 1.05.

    Deterministic under ``seed``. A zero operator returns 0.0 with a warning.
    """
    if iters < 1:
        raise ConfigurationError("iters must be >= 1")
    rng = np.random.default_rng(seed)
    n = C.n_pixels
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(iters):
        w = C.entries.conj().T @ (C.entries @ v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            warnings.warn("estimate_lipschitz: operator annihilated the probe vector")
            return 0.0
        estimate = float(np.vdot(v, w).real)
        v = w / norm_w
    return 1.05 * estimate


def _relative_change(new: np.ndarray, old: np.ndarray) -> float:
    denom = np.linalg.norm(old)
    if denom == 0.0:
        return 0.0 if np.linalg.norm(new) == 0.0 else np.inf
    return float(np.linalg.norm(new - old) / denom)


def cfba_inner(
    C: ObservationMatrix,
    g,
    f0: np.ndarray,
    spec: RegularizerSpec,
    cfg: CfbaConfig,
    history: list | None = None,
    iterates: list | None = None,
) -> np.ndarray:
    """Run the inner splitting loop from f0 and return the final iterate.

    Stops after max_inner_iters steps or once the relative iterate change
    drops to inner_rel_tol. When ``history`` is a list, rows
    (k, J_n(o^k), rel_change) are appended for every visited iterate
    (rel_change is inf for k = 0); ``iterates`` collects copies of o^k.
    """
    check_prox_convexity(cfg, spec)
    samples = g.samples if isinstance(g, PhaseHistory) else np.asarray(g, dtype=complex)
    o = np.asarray(f0, dtype=complex).copy()
    if o.shape != (C.n_pixels,) or samples.shape != (C.n_rows,):
        raise ConfigurationError("dimension mismatch in cfba_inner")
    mu = cfg.mu

    def objective(v):
        r = C.entries @ v - samples
        return float(np.vdot(r, r).real) + penalty_value(spec, v)

    if history is not None:
        history.append((0, objective(o), np.inf))
    if iterates is not None:
        iterates.append(o.copy())
    for k in range(cfg.max_inner_iters):
        residual = C.entries @ o - samples
        z = o - 2.0 * mu * (C.entries.conj().T @ residual)
        o_new = complex_prox(z, spec, mu)
        rel = _relative_change(o_new, o)
        o = o_new
        if history is not None:
            history.append((k + 1, objective(o), rel))
        if iterates is not None:
            iterates.append(o.copy())
        if rel <= cfg.inner_rel_tol:
            break
    return o


@dataclass(frozen=True)
class RealLifting:
    """Real 2N x 2N block form [[Re C, -Im C], [Im C, Re C]] of an operator."""

    c_tilde: np.ndarray = field(repr=False)
    n_complex: int

    def __post_init__(self):
        c = np.asarray(self.c_tilde, dtype=float)
        object.__setattr__(self, "c_tilde", c)


def lift_vector(v: np.ndarray) -> np.ndarray:
    """Complex N-vector -> real 2N-vector (re-parts then im-parts)."""
    v = np.asarray(v, dtype=complex)
    return np.concatenate([v.real, v.imag])


def unlift_vector(u: np.ndarray) -> np.ndarray:
    """Inverse of :func:`lift_vector`."""
    u = np.asarray(u, dtype=float)
    n = u.size // 2
    return u[:n] + 1j * u[n:]


def lift_real(C: ObservationMatrix) -> RealLifting:
    """Lift C to its real 2N x 2N block form."""
    re, im = C.entries.real, C.entries.imag
    top = np.hstack([re, -im])
    bot = np.hstack([im, re])
    return RealLifting(c_tilde=np.vstack([top, bot]), n_complex=C.n_pixels)


def _group_prox(u: np.ndarray, n: int, gamma: float, mu_lambda: float) -> np.ndarray:
    """Prox of the lifted penalty: magnitude prox on each (u_i, u_{i+n}) pair."""
    pair_mag = np.hypot(u[:n], u[n:])
    shrunk = cauchy_prox_magnitude(pair_mag, gamma, mu_lambda)
    scale = np.where(pair_mag > 0.0, shrunk / np.where(pair_mag > 0.0, pair_mag, 1.0), 0.0)
    return np.concatenate([scale * u[:n], scale * u[n:]])


def run_lifted_fb(
    lift: RealLifting,
    g,
    f0: np.ndarray,
    spec: RegularizerSpec,
    cfg: CfbaConfig,
    iterates: list | None = None,
) -> np.ndarray:
    """The 2N-dimensional real forward-backward twin of :func:`cfba_inner`.

    Takes the same complex inputs (lifted internally) and applies the same
    stopping rule, so iterate sequences of the two algorithms can be compared
    one-to-one. Returns the final real 2N iterate.
    """
    check_prox_convexity(cfg, spec)
    samples = g.samples if isinstance(g, PhaseHistory) else np.asarray(g, dtype=complex)
    ct = lift.c_tilde
    n = lift.n_complex
    u = lift_vector(np.asarray(f0, dtype=complex))
    g_t = lift_vector(samples)
    mu = cfg.mu
    if iterates is not None:
        iterates.append(u.copy())
    for _ in range(cfg.max_inner_iters):
        w = u - 2.0 * mu * (ct.T @ (ct @ u - g_t))
        u_new = _group_prox(w, n, spec.gamma, mu * spec.lam)
        rel = _relative_change(u_new, u)
        u = u_new
        if iterates is not None:
            iterates.append(u.copy())
        if rel <= cfg.inner_rel_tol:
            break
    return u


def lifted_objective(lift: RealLifting, g, u: np.ndarray, spec: RegularizerSpec) -> float:
    """J_n evaluated on a lifted iterate (used to compare the twin runs)."""
    samples = g.samples if isinstance(g, PhaseHistory) else np.asarray(g, dtype=complex)
    r = lift.c_tilde @ np.asarray(u, dtype=float) - lift_vector(samples)
    return float(r @ r) + penalty_value(spec, unlift_vector(u))
