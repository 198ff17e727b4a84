"""Fixed-point image step via the Wirtinger normal equations and complex CG.

Setting the Wirtinger gradient of the cost to zero and freezing the weight
diagonal at the previous image f_prev turns the image sub-problem into one
Hermitian positive-definite linear system

    [C(phi)^H C(phi) + lam * W(f_prev)] f = C(phi)^H g,

solved here by plain conjugate gradients with conjugate inner products. For
the composite TV weight, which is not Hermitian as written, the solver
applies the symmetrized (W + W^H)/2 and reports the asymmetry norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import CgBreakdownError, ConfigurationError
from .forward_model import ObservationMatrix, PhaseHistory
from .regularizers import RegularizerSpec, tv_weight_operator, weight_diagonal


@dataclass(frozen=True)
class WamaConfig:
    """CG budget and tolerances for one fixed-point image step."""

    cg_max_iters: int = 500
    cg_rel_tol: float = 1e-8
    damping: float = 0.0

    def __post_init__(self):
        if self.cg_max_iters < 1:
            raise ConfigurationError("cg_max_iters must be >= 1")
        if not self.cg_rel_tol > 0.0:
            raise ConfigurationError("cg_rel_tol must be > 0")
        if self.damping < 0.0:
            raise ConfigurationError("damping must be >= 0")


@dataclass
class NormalSystem:
    """Hermitian operator closure A v and right-hand side of the normal equations."""

    apply: Callable[[np.ndarray], np.ndarray]
    rhs: np.ndarray = field(repr=False)
    dim: int
    weight_asymmetry: float = 0.0


@dataclass
class CgResult:
    """Solution and convergence flags of a CG run."""

    x: np.ndarray = field(repr=False)
    converged: bool
    iterations: int
    rel_residual: float


def assemble_normal_system(
    C: ObservationMatrix,
    g,
    f_prev: np.ndarray,
    spec: RegularizerSpec,
) -> NormalSystem:
    """Build A = C^H C + lam * W(f_prev) and rhs = C^H g.

    ``C`` is the (already corrupted) observation matrix of the current outer
    iteration. The TV weight uses the image shape carried by C and is applied
    in symmetrized form; its asymmetry norm is reported on the result.
    """
    samples = g.samples if isinstance(g, PhaseHistory) else np.asarray(g, dtype=complex)
    f_prev = np.asarray(f_prev, dtype=complex)
    n = C.n_pixels
    if f_prev.shape != (n,) or samples.shape != (C.n_rows,):
        raise ConfigurationError("dimension mismatch in assemble_normal_system")
    if spec.kind == "approx_tv":
        weight = tv_weight_operator(spec, f_prev, C.image_shape)
    else:
        weight = weight_diagonal(spec, f_prev)
    entries = C.entries
    lam = spec.lam

    def apply(v: np.ndarray) -> np.ndarray:
        return entries.conj().T @ (entries @ v) + lam * weight.apply_symmetrized(v)

    return NormalSystem(
        apply=apply,
        rhs=entries.conj().T @ samples,
        dim=n,
        weight_asymmetry=weight.asymmetry_norm(),
    )


def cg_solve(
    system: NormalSystem,
    cfg: WamaConfig,
    x0: np.ndarray | None = None,
    residual_history: list | None = None,
) -> CgResult:
    """Hermitian conjugate gradients on A x = rhs.

    Stops when ||rhs - A x|| / ||rhs|| <= cg_rel_tol or the iteration budget
    runs out (result flagged unconverged). The recursion is restarted with a
    fresh residual every ``dim`` iterations. A non-positive curvature
    direction raises :class:`CgBreakdownError` carrying the partial result.
    """
    apply_a = system.apply
    b = system.rhs
    if cfg.damping > 0.0:
        damping = cfg.damping
        base_apply = system.apply
        apply_a = lambda v: base_apply(v) + damping * v
    x = np.zeros_like(b) if x0 is None else np.asarray(x0, dtype=complex).copy()
    r = b - apply_a(x)
    p = r.copy()
    rs = float(np.vdot(r, r).real)
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return CgResult(x=np.zeros_like(b), converged=True, iterations=0, rel_residual=0.0)
    rel = np.sqrt(rs) / b_norm
    if residual_history is not None:
        residual_history.append((0, rel))
    if rel <= cfg.cg_rel_tol:
        return CgResult(x=x, converged=True, iterations=0, rel_residual=rel)
    iterations = 0
    for it in range(1, cfg.cg_max_iters + 1):
        ap = apply_a(p)
        curvature = float(np.vdot(p, ap).real)
        if curvature <= 0.0:
            partial = CgResult(x=x, converged=False, iterations=iterations, rel_residual=rel)
            raise CgBreakdownError(
                f"CG breakdown at iteration {it}: curvature {curvature:.3e} <= 0",
                partial=partial,
            )
        alpha = rs / curvature
        x += alpha * p
        r -= alpha * ap
        iterations = it
        rs_new = float(np.vdot(r, r).real)
        rel = np.sqrt(rs_new) / b_norm
        if residual_history is not None:
            residual_history.append((it, rel))
        if rel <= cfg.cg_rel_tol:
            return CgResult(x=x, converged=True, iterations=it, rel_residual=rel)
        if it % system.dim == 0:
            # periodic restart: recompute the true residual, reset the search
            r = b - apply_a(x)
            p = r.copy()
            rs = float(np.vdot(r, r).real)
        else:
            p = r + (rs_new / rs) * p
            rs = rs_new
    return CgResult(x=x, converged=False, iterations=iterations, rel_residual=rel)


def wama_f_step(
    C: ObservationMatrix,
    g,
    f_prev: np.ndarray,
    spec: RegularizerSpec,
    cfg: WamaConfig,
    steps: int = 1,
    residual_history: list | None = None,
) -> CgResult:
    """One fixed-point image update: solve the W(f_prev)-frozen normal system.

    CG warm-starts at f_prev, which makes the surrogate objective of the
    half-quadratic view nonincreasing even under early termination. The
    returned ``rel_residual`` is the true fixed-point residual
    ||A x - rhs|| / ||rhs|| of the final system. ``steps > 1`` re-freezes the
    weight at the new image and re-solves (off by default).
    """
    if steps < 1:
        raise ConfigurationError("steps must be >= 1")
    x = np.asarray(f_prev, dtype=complex)
    result = None
    for _ in range(steps):
        system = assemble_normal_system(C, g, x, spec)
        result = cg_solve(system, cfg, x0=x, residual_history=residual_history)
        x = result.x
        final = np.linalg.norm(system.apply(x) - system.rhs) / np.linalg.norm(system.rhs)
        result.rel_residual = float(final)
    return result
