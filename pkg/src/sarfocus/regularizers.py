"""Magnitude-domain penalties R(f), their fixed-point weights, and proximal
machinery.

Five penalties are supported, all acting on pixel magnitudes:

* ``cauchy``:        R(f) = -sum_i ln(gamma / (gamma^2 + |f_i|^2))
* ``approx_lp``:     R(f) = sum_i (|f_i|^2 + beta)^(p/2), 0 < p <= 1
* ``approx_tv``:     R(f) = sum_ij sqrt(|d_i F|^2 + |d_j F|^2 + beta)
* ``welsh``:         R(f) = sum_i (1 - exp(-|f_i|^2 / (2 delta^2)))
* ``geman_mcclure``: R(f) = sum_i |f_i|^2 / (2 delta^2 + |f_i|^2)

Each non-TV penalty has a diagonal weight s(f) with Wirtinger gradient
lambda * W(f) f, W = diag(s); approximate TV uses a composite operator built
from four signed first-difference matrices. The Cauchy penalty additionally
has a closed-form proximal operator on magnitudes (single real cubic root
under the convexity condition gamma >= sqrt(mu*lambda)/2). The half-quadratic
surrogates K(b, f, phi) with inf_b K = J are provided for the four pixelwise
penalties; they double as correctness oracles for the weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError

PENALTY_KINDS = ("cauchy", "approx_lp", "approx_tv", "welsh", "geman_mcclure")
_PIXELWISE_KINDS = ("cauchy", "approx_lp", "welsh", "geman_mcclure")


@dataclass(frozen=True)
class RegularizerSpec:
    """Tagged penalty selection: a kind plus its constants and the weight lam."""

    kind: str
    lam: float
    gamma: float | None = None
    p: float | None = None
    beta: float | None = None
    delta: float | None = None

    def __post_init__(self):
        if self.kind not in PENALTY_KINDS:
            raise ConfigurationError(
                f"unknown regularizer kind {self.kind!r}; choose from {PENALTY_KINDS}"
            )
        if not self.lam > 0.0:
            raise ConfigurationError("regularizer weight lam must be > 0")
        if self.kind == "cauchy":
            if self.gamma is None or not self.gamma > 0.0:
                raise ConfigurationError("cauchy needs gamma > 0")
        elif self.kind == "approx_lp":
            if self.p is None or not 0.0 < self.p <= 1.0:
                raise ConfigurationError("approx_lp needs 0 < p <= 1")
            if self.beta is None or not self.beta > 0.0:
                raise ConfigurationError("approx_lp needs beta > 0")
        elif self.kind == "approx_tv":
            if self.beta is None or not self.beta > 0.0:
                raise ConfigurationError("approx_tv needs beta > 0")
        else:
            if self.delta is None or not self.delta > 0.0:
                raise ConfigurationError(f"{self.kind} needs delta > 0")

    @classmethod
    def cauchy(cls, gamma: float, lam: float) -> "RegularizerSpec":
        return cls(kind="cauchy", lam=lam, gamma=gamma)

    @classmethod
    def approx_lp(cls, p: float, beta: float, lam: float) -> "RegularizerSpec":
        return cls(kind="approx_lp", lam=lam, p=p, beta=beta)

    @classmethod
    def approx_tv(cls, beta: float, lam: float) -> "RegularizerSpec":
        return cls(kind="approx_tv", lam=lam, beta=beta)

    @classmethod
    def welsh(cls, delta: float, lam: float) -> "RegularizerSpec":
        return cls(kind="welsh", lam=lam, delta=delta)

    @classmethod
    def geman_mcclure(cls, delta: float, lam: float) -> "RegularizerSpec":
        return cls(kind="geman_mcclure", lam=lam, delta=delta)


@dataclass(frozen=True)
class AuxiliaryB:
    """Strictly positive auxiliary vector of a half-quadratic surrogate."""

    b: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        if b.ndim != 1 or not np.all(b > 0.0):
            raise ConfigurationError("auxiliary vector b must be 1D and strictly positive")
        object.__setattr__(self, "b", b)


def penalty_value(spec: RegularizerSpec, f: np.ndarray, shape: tuple[int, int] | None = None) -> float:
    """lam * R(f). ``shape`` (rows, cols) is required for approx_tv only."""
    f = np.asarray(f, dtype=complex)
    a2 = np.abs(f) ** 2
    if spec.kind == "cauchy":
        value = np.sum(np.log((spec.gamma**2 + a2) / spec.gamma))
    elif spec.kind == "approx_lp":
        value = np.sum((a2 + spec.beta) ** (spec.p / 2.0))
    elif spec.kind == "welsh":
        value = np.sum(1.0 - np.exp(-a2 / (2.0 * spec.delta**2)))
    elif spec.kind == "geman_mcclure":
        value = np.sum(a2 / (2.0 * spec.delta**2 + a2))
    else:
        if shape is None:
            raise ConfigurationError("approx_tv penalty needs the 2D image shape")
        gi, gj = _grid_differences(f.reshape(shape, order="F"))
        value = np.sum(np.sqrt(np.abs(gi) ** 2 + np.abs(gj) ** 2 + spec.beta))
    return float(spec.lam * value)


def weight_diagonal(spec: RegularizerSpec, f: np.ndarray) -> "WeightOperator":
    """Diagonal fixed-point weight s(f) with lambda * diag(s) f = grad of lam*R."""
    if spec.kind == "approx_tv":
        raise ConfigurationError("approx_tv weights are built by tv_weight_operator")
    a2 = np.abs(np.asarray(f, dtype=complex)) ** 2
    if spec.kind == "cauchy":
        s = 1.0 / (spec.gamma**2 + a2)
    elif spec.kind == "approx_lp":
        s = spec.p / (2.0 * (a2 + spec.beta) ** (1.0 - spec.p / 2.0))
    elif spec.kind == "welsh":
        s = np.exp(-a2 / (2.0 * spec.delta**2)) / (2.0 * spec.delta**2)
    else:  # geman_mcclure
        s = 2.0 * spec.delta**2 / (2.0 * spec.delta**2 + a2) ** 2
    return WeightOperator(diag=s)


def _grid_differences(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First differences down rows (gi) and across columns (gj), zero at i=0/j=0."""
    gi = np.zeros_like(F)
    gj = np.zeros_like(F)
    gi[1:, :] = F[1:, :] - F[:-1, :]
    gj[:, 1:] = F[:, 1:] - F[:, :-1]
    return gi, gj


def difference_matrices(rows: int, cols: int):
    """The four signed first-difference matrices of the TV weight operator.

    With F the rows x cols image and f its column-major vec:
      d1 f = vec of row differences F[i,j] - F[i-1,j]   (zero at i = 0)
      d2 f = vec of col differences F[i,j] - F[i,j-1]   (zero at j = 0)
      d3 f = vec of F[i,j] - F[i,j+1]                   (zero at j = cols-1)
      d4 f = vec of F[i,j] - F[i+1,j]                   (zero at i = rows-1)
    All entries are in {-1, 0, 1}.
    """
    def backward(n):
        if n == 1:
            return sp.csr_matrix((1, 1))
        main = np.ones(n)
        main[0] = 0.0
        return sp.diags([main, -np.ones(n - 1)], [0, -1], format="csr")

    def negforward(n):
        if n == 1:
            return sp.csr_matrix((1, 1))
        main = np.ones(n)
        main[-1] = 0.0
        return sp.diags([main, -np.ones(n - 1)], [0, 1], format="csr")

    ia = sp.eye(rows, format="csr")
    ib = sp.eye(cols, format="csr")
    d1 = sp.kron(ib, backward(rows), format="csr")
    d2 = sp.kron(backward(cols), ia, format="csr")
    d3 = sp.kron(negforward(cols), ia, format="csr")
    d4 = sp.kron(ib, negforward(rows), format="csr")
    return d1, d2, d3, d4


@dataclass(frozen=True)
class TvForm:
    """Diagonal factors and difference matrices of the TV weight operator."""

    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    d1: sp.csr_matrix
    d2: sp.csr_matrix
    d3: sp.csr_matrix
    d4: sp.csr_matrix


@dataclass(frozen=True)
class WeightOperator:
    """W(f): either diag(s) or the TV composite S1 d1 + S1 d2 + S2 d3 + S3 d4."""

    diag: np.ndarray | None = None
    tv: TvForm | None = None

    def __post_init__(self):
        if (self.diag is None) == (self.tv is None):
            raise ConfigurationError("WeightOperator needs exactly one of diag / tv")
        if self.diag is not None and not np.all(np.asarray(self.diag) > 0.0):
            raise ConfigurationError("diagonal weight entries must be strictly positive")

    @property
    def is_diagonal(self) -> bool:
        return self.diag is not None

    def apply(self, v: np.ndarray) -> np.ndarray:
        if self.diag is not None:
            return self.diag * v
        t = self.tv
        return t.s1 * (t.d1 @ v) + t.s1 * (t.d2 @ v) + t.s2 * (t.d3 @ v) + t.s3 * (t.d4 @ v)

    def apply_adjoint(self, v: np.ndarray) -> np.ndarray:
        if self.diag is not None:
            return self.diag * v
        t = self.tv
        return (
            t.d1.T @ (t.s1 * v)
            + t.d2.T @ (t.s1 * v)
            + t.d3.T @ (t.s2 * v)
            + t.d4.T @ (t.s3 * v)
        )

    def apply_symmetrized(self, v: np.ndarray) -> np.ndarray:
        """(W + W^H)/2 applied to v; equals W v for diagonal weights."""
        if self.diag is not None:
            return self.diag * v
        return 0.5 * (self.apply(v) + self.apply_adjoint(v))

    def as_matrix(self) -> np.ndarray:
        if self.diag is not None:
            return np.diag(self.diag)
        t = self.tv
        w = (
            sp.diags(t.s1) @ t.d1
            + sp.diags(t.s1) @ t.d2
            + sp.diags(t.s2) @ t.d3
            + sp.diags(t.s3) @ t.d4
        )
        return np.asarray(w.todense())

    def asymmetry_norm(self) -> float:
        """Frobenius norm of W - W^T (zero for diagonal weights)."""
        if self.diag is not None:
            return 0.0
        t = self.tv
        w = (
            sp.diags(t.s1) @ t.d1
            + sp.diags(t.s1) @ t.d2
            + sp.diags(t.s2) @ t.d3
            + sp.diags(t.s3) @ t.d4
        )
        diff = w - w.T
        return float(np.sqrt((diff.multiply(diff)).sum()))


def tv_smoothness_maps(spec: RegularizerSpec, f2d: np.ndarray):
    """S1, S2, S3 maps of the TV weights; out-of-range entries are zero.

    S1[i,j] = 1 / (2 t[i,j]) with t = sqrt(|d_i F|^2 + |d_j F|^2 + beta);
    S2 reads t at (i, j+1), S3 at (i+1, j).
    """
    gi, gj = _grid_differences(f2d)
    t = np.sqrt(np.abs(gi) ** 2 + np.abs(gj) ** 2 + spec.beta)
    s1 = 1.0 / (2.0 * t)
    s2 = np.zeros_like(s1)
    s3 = np.zeros_like(s1)
    s2[:, :-1] = 1.0 / (2.0 * t[:, 1:])
    s3[:-1, :] = 1.0 / (2.0 * t[1:, :])
    return s1, s2, s3


def tv_weight_operator(spec: RegularizerSpec, f: np.ndarray, shape: tuple[int, int]) -> WeightOperator:
    """Composite TV weight W(f) = S1 d1 + S1 d2 + S2 d3 + S3 d4 (column-major vec)."""
    if spec.kind != "approx_tv":
        raise ConfigurationError("tv_weight_operator requires an approx_tv spec")
    rows, cols = shape
    f = np.asarray(f, dtype=complex)
    if f.shape != (rows * cols,):
        raise ConfigurationError(
            f"image has shape {f.shape}, expected ({rows * cols},) for a {rows}x{cols} grid"
        )
    f2d = f.reshape(rows, cols, order="F")
    s1, s2, s3 = tv_smoothness_maps(spec, f2d)
    d1, d2, d3, d4 = difference_matrices(rows, cols)
    tv = TvForm(
        s1=s1.flatten(order="F"),
        s2=s2.flatten(order="F"),
        s3=s3.flatten(order="F"),
        d1=d1, d2=d2, d3=d3, d4=d4,
    )
    return WeightOperator(tv=tv)


def cauchy_prox_magnitude(x_abs, gamma: float, mu_lambda: float):
    """Closed-form magnitude of the Cauchy prox: the single real cubic root.

    Solves min_y 0.5 (x_abs - y)^2 + mu_lambda * ln((gamma^2 + y^2) / gamma)
    under the convexity condition gamma >= sqrt(mu_lambda)/2, via the shifted
    cubic y = x/3 + s + t. Accepts scalars or arrays; the radicand is clamped
    at zero if roundoff drives it negative (it is nonnegative under the
    condition).
    """
    if mu_lambda < 0.0:
        raise ConfigurationError("mu_lambda must be >= 0")
    if gamma < np.sqrt(mu_lambda) / 2.0 - 1e-12:
        raise ConfigurationError(
            f"convexity condition violated: gamma = {gamma} < sqrt(mu*lambda)/2 = "
            f"{np.sqrt(mu_lambda) / 2.0}"
        )
    x = np.asarray(x_abs, dtype=float)
    if np.any(x < 0.0):
        raise ConfigurationError("x_abs must be >= 0")
    g2 = gamma * gamma
    p = g2 + 2.0 * mu_lambda - x * x / 3.0
    q = g2 * x + 2.0 * x**3 / 27.0 - (g2 + 2.0 * mu_lambda) * x / 3.0
    disc = np.maximum(p**3 / 27.0 + q * q / 4.0, 0.0)
    root = np.sqrt(disc)
    y = x / 3.0 + np.cbrt(q / 2.0 + root) + np.cbrt(q / 2.0 - root)
    y = np.maximum(y, 0.0)
    return float(y) if np.isscalar(x_abs) else y


def complex_prox(x: np.ndarray, spec: RegularizerSpec, mu: float) -> np.ndarray:
    """Componentwise Cauchy prox of a complex vector via magnitude splitting.

    The output keeps the argument of each nonzero input exactly; zero inputs
    map to the real magnitude prox at zero (which is zero).
    """
    if spec.kind != "cauchy":
        raise ConfigurationError("complex_prox is defined for the cauchy penalty only")
    x = np.asarray(x, dtype=complex)
    ax = np.abs(x)
    mag = cauchy_prox_magnitude(ax, spec.gamma, mu * spec.lam)
    phase = np.where(ax > 0.0, x / np.where(ax > 0.0, ax, 1.0), 1.0 + 0.0j)
    return np.asarray(mag) * phase


def auxiliary_b_star(spec: RegularizerSpec, f: np.ndarray) -> AuxiliaryB:
    """Minimizer b* of K(b, f, phi) over b, per pixelwise penalty."""
    if spec.kind not in _PIXELWISE_KINDS:
        raise ConfigurationError(f"no half-quadratic auxiliary for {spec.kind!r}")
    a2 = np.abs(np.asarray(f, dtype=complex)) ** 2
    if spec.kind == "cauchy":
        b = 1.0 / (spec.gamma**2 + a2)
    elif spec.kind == "welsh":
        b = np.exp(-a2 / (2.0 * spec.delta**2)) / (2.0 * spec.delta**2)
    elif spec.kind == "geman_mcclure":
        b = 2.0 * spec.delta**2 / (a2 + 2.0 * spec.delta**2) ** 2
    else:  # approx_lp
        b = spec.p / (2.0 * (a2 + spec.beta) ** (1.0 - spec.p / 2.0))
    return AuxiliaryB(b=b)


def k_value(spec: RegularizerSpec, b: AuxiliaryB, f: np.ndarray, fidelity: float) -> float:
    """Half-quadratic surrogate K(b, f, phi); the caller supplies the fidelity
    term ||g - C(phi) f||^2.

    Satisfies K(b*, f, phi) = J(f, phi) and K(b, ...) >= K(b*, ...) for b > 0.
    """
    if spec.kind not in _PIXELWISE_KINDS:
        raise ConfigurationError(f"no half-quadratic surrogate for {spec.kind!r}")
    bb = b.b if isinstance(b, AuxiliaryB) else np.asarray(b, dtype=float)
    a2 = np.abs(np.asarray(f, dtype=complex)) ** 2
    if bb.shape != a2.shape:
        raise ConfigurationError("auxiliary vector and image must have equal lengths")
    if spec.kind == "cauchy":
        terms = (a2 + spec.gamma**2) * bb - np.log(spec.gamma * bb) - 1.0
    elif spec.kind == "welsh":
        d2 = 2.0 * spec.delta**2
        terms = (a2 - d2) * bb + d2 * bb * np.log(d2 * bb) + 1.0
    elif spec.kind == "geman_mcclure":
        d2 = 2.0 * spec.delta**2
        terms = (a2 + d2) * bb - 2.0 * np.sqrt(2.0) * spec.delta * np.sqrt(bb) + 1.0
    else:  # approx_lp
        terms = bb * (a2 + spec.beta) + (2.0 - spec.p) / 2.0 * (2.0 * bb / spec.p) ** (
            spec.p / (spec.p - 2.0)
        )
    return float(fidelity + spec.lam * np.sum(terms))
