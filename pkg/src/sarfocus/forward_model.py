"""Discretized spotlight-SAR observation model.

A scene of complex reflectivities f (length N, column-major flattening of a
rows x cols grid) is observed through a dense complex matrix C whose rows are
indexed by (aperture position m, fast-time sample k) and whose entry is

    C[(m, k), i] = exp(-j * U(t_k) * (x_i cos(theta_m) + y_i sin(theta_m)))

with U(t) = (2/c) * (omega0 + 2*alpha*(t - tau0)). Every entry has unit
modulus. A 1D azimuth phase error phi multiplies block m of C by exp(j*phi_m).

Conventions fixed here and relied on everywhere else:

* The image is a ``rows x cols`` grid. Row index r is range (x axis), column
  index c is cross-range (y axis). Flattening is column-major:
  ``i = r + c * rows`` (numpy ``order="F"``).
* K = rows fast-time samples per pulse, uniformly spanning [tau0, tau0 + T];
  M = cols aperture look angles, uniformly spanning the angular range and
  centered on boresight theta = 0. C is therefore square, (M*K) x N = N x N.
* ``make_scene_grid`` spaces pixels so that consecutive fast-time samples
  advance the range phase by exactly 2*pi/K per pixel (and analogously in
  cross-range at the mid-pulse wavenumber), which keeps C well conditioned.
  Note U depends on t - tau0 only, so the demodulation time drops out of C;
  it is kept as an explicit parameter for completeness.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

SPEED_OF_LIGHT_M_S = 2.998e8


def wrap_angle(angles):
    """Wrap angles (scalar or array) to [-pi, pi)."""
    return (np.asarray(angles, dtype=float) + np.pi) % (2.0 * np.pi) - np.pi


@dataclass(frozen=True)
class RadarParams:
    """Radar system constants of the observation model.

    ``chirp_rate_rad_s2`` stores alpha; the full chirp term in the transmitted
    phase is 2*alpha. The default values follow the standard desk-scale
    spotlight setup: 2*pi x 10^10 rad/s carrier, 2*pi x 10^12 rad/s^2 chirp
    rate, 0.4 ms pulses and a 2.3 degree angular range.
    """

    carrier_freq_rad_s: float = 2.0 * np.pi * 1.0e10
    chirp_rate_rad_s2: float = np.pi * 1.0e12
    pulse_duration_s: float = 4.0e-4
    angular_range_rad: float = float(np.deg2rad(2.3))
    demodulation_time_s: float = 2.0 * 10_000.0 / SPEED_OF_LIGHT_M_S
    light_speed_m_s: float = SPEED_OF_LIGHT_M_S
    patch_radius_m: float = 50.0

    def __post_init__(self):
        for name in (
            "carrier_freq_rad_s",
            "chirp_rate_rad_s2",
            "pulse_duration_s",
            "angular_range_rad",
            "demodulation_time_s",
            "light_speed_m_s",
            "patch_radius_m",
        ):
            if not getattr(self, name) > 0.0:
                raise ConfigurationError(f"RadarParams.{name} must be strictly positive")
        if not self.angular_range_rad < np.pi:
            raise ConfigurationError("RadarParams.angular_range_rad must be < pi")


def default_radar_params() -> RadarParams:
    """Radar constants used by all builtin experiments."""
    return RadarParams()


@dataclass(frozen=True)
class SceneGrid:
    """Pixel grid of the reflectivity scene.

    ``pixel_coords`` is an (N, 2) array of (x, y) positions in meters, ordered
    column-major (i = r + c*rows). Construct directly for hand-placed pixels,
    or through :func:`make_scene_grid` for the standard uniform grid.
    """

    rows: int
    cols: int
    pixel_coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigurationError("SceneGrid needs rows >= 1 and cols >= 1")
        coords = np.asarray(self.pixel_coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ConfigurationError("pixel_coords must have shape (N, 2)")
        if coords.shape[0] != self.rows * self.cols:
            raise ConfigurationError(
                f"pixel_coords has {coords.shape[0]} entries, expected rows*cols = "
                f"{self.rows * self.cols}"
            )
        object.__setattr__(self, "pixel_coords", coords)

    @property
    def n_pixels(self) -> int:
        return self.rows * self.cols

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)


@dataclass(frozen=True)
class ObservationMatrix:
    """Dense observation operator, partitioned into M aperture blocks of K rows.

    Immutable after construction; the entry buffer is marked read-only so the
    matrix can be shared freely across threads.
    """

    entries: np.ndarray = field(repr=False)
    num_apertures: int
    samples_per_pulse: int

    def __post_init__(self):
        entries = np.ascontiguousarray(self.entries, dtype=complex)
        if entries.ndim != 2:
            raise ConfigurationError("ObservationMatrix entries must be 2D")
        if entries.shape[0] != self.num_apertures * self.samples_per_pulse:
            raise ConfigurationError(
                "row count does not equal num_apertures * samples_per_pulse"
            )
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def n_pixels(self) -> int:
        return self.entries.shape[1]

    @property
    def image_shape(self) -> tuple[int, int]:
        """(rows, cols) of the image grid this operator was built for."""
        return (self.samples_per_pulse, self.num_apertures)

    def block(self, m: int) -> np.ndarray:
        """Rows of aperture position m (read-only view)."""
        k = self.samples_per_pulse
        return self.entries[m * k : (m + 1) * k]


@dataclass(frozen=True)
class PhaseErrorVector:
    """One real angle per aperture position, stored wrapped to [-pi, pi)."""

    angles: np.ndarray

    def __post_init__(self):
        angles = wrap_angle(np.atleast_1d(np.asarray(self.angles, dtype=float)))
        angles.flags.writeable = False
        object.__setattr__(self, "angles", angles)

    def __len__(self) -> int:
        return len(self.angles)


@dataclass(frozen=True)
class PhaseHistory:
    """Complex radar return samples, stacked aperture-block by aperture-block."""

    samples: np.ndarray = field(repr=False)
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.noise_sigma < 0.0:
            raise ConfigurationError("noise_sigma must be >= 0")
        samples = np.ascontiguousarray(self.samples, dtype=complex)
        if samples.ndim != 1:
            raise ConfigurationError("phase history samples must be a vector")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)


def look_angles(params: RadarParams, count: int) -> np.ndarray:
    """Uniform look angles spanning the angular range, centered on 0."""
    if count == 1:
        return np.zeros(1)
    half = params.angular_range_rad / 2.0
    return np.linspace(-half, half, count)


def radial_wavenumbers(params: RadarParams, count: int) -> np.ndarray:
    """U(t_k) for K fast-time samples uniform over [tau0, tau0 + T] (rad/m)."""
    t_rel = np.linspace(0.0, params.pulse_duration_s, count)
    return (2.0 / params.light_speed_m_s) * (
        params.carrier_freq_rad_s + 2.0 * params.chirp_rate_rad_s2 * t_rel
    )


def make_scene_grid(params: RadarParams, rows: int, cols: int) -> SceneGrid:
    """Uniform Cartesian grid matched to the sampling of the observation model.

    The range spacing dx makes U(t_k)*dx advance by 2*pi/K per fast-time
    sample; the cross-range spacing dy does the same per look angle at the
    mid-pulse wavenumber. The grid is centered on the patch center and must
    fit inside the patch radius.
    """
    if rows < 2 or cols < 2:
        raise ConfigurationError("make_scene_grid needs rows >= 2 and cols >= 2")
    u = radial_wavenumbers(params, rows)
    du = u[1] - u[0]
    dx = 2.0 * np.pi / (rows * du)
    u_mid = (2.0 / params.light_speed_m_s) * (
        params.carrier_freq_rad_s + params.chirp_rate_rad_s2 * params.pulse_duration_s
    )
    theta = look_angles(params, cols)
    dtheta = theta[1] - theta[0]
    dy = 2.0 * np.pi / (cols * u_mid * dtheta)
    x = (np.arange(rows) - (rows - 1) / 2.0) * dx
    y = (np.arange(cols) - (cols - 1) / 2.0) * dy
    xs = np.tile(x[:, None], (1, cols)).flatten(order="F")
    ys = np.tile(y[None, :], (rows, 1)).flatten(order="F")
    radius = np.sqrt(xs**2 + ys**2).max()
    if radius > params.patch_radius_m:
        raise ConfigurationError(
            f"{rows}x{cols} grid extends to radius {radius:.1f} m, outside the "
            f"{params.patch_radius_m:.1f} m patch; increase patch_radius_m"
        )
    return SceneGrid(rows=rows, cols=cols, pixel_coords=np.column_stack([xs, ys]))


def build_observation_matrix(params: RadarParams, grid: SceneGrid) -> ObservationMatrix:
    """Assemble the dense N x N observation matrix for a scene grid.

    Args:
        params: Radar constants; defines U(t_k) and the look-angle span.
        grid: Pixel grid; grid.cols aperture positions (M) and grid.rows
            fast-time samples (K). All pixels must lie inside the patch.

    Returns:
        ObservationMatrix with unit-modulus entries, row-ordered so block m
        holds the K fast-time samples of aperture position m.
    """
    n = grid.n_pixels
    if n < 1:
        raise ConfigurationError("cannot build an observation matrix for an empty grid")
    coords = grid.pixel_coords
    radius = np.sqrt((coords**2).sum(axis=1)).max() if n else 0.0
    if radius > params.patch_radius_m * (1.0 + 1e-12):
        raise ConfigurationError(
            f"grid radius {radius:.3f} m exceeds patch radius {params.patch_radius_m:.3f} m"
        )
    m_count, k_count = grid.cols, grid.rows
    u = radial_wavenumbers(params, k_count)
    theta = look_angles(params, m_count)
    # proj[m, i] = x_i cos(theta_m) + y_i sin(theta_m)
    proj = np.cos(theta)[:, None] * coords[:, 0][None, :] + np.sin(theta)[:, None] * coords[:, 1][None, :]
    entries = np.exp(-1j * u[None, :, None] * proj[:, None, :]).reshape(m_count * k_count, n)
    return ObservationMatrix(
        entries=entries, num_apertures=m_count, samples_per_pulse=k_count
    )


def apply_phase_error(C: ObservationMatrix, phi: PhaseErrorVector) -> ObservationMatrix:
    """Multiply aperture block m by exp(j*phi_m), preserving unit modulus."""
    if len(phi) != C.num_apertures:
        raise ConfigurationError(
            f"phase error has {len(phi)} angles for {C.num_apertures} aperture blocks"
        )
    m, k = C.num_apertures, C.samples_per_pulse
    scaled = C.entries.reshape(m, k, -1) * np.exp(1j * phi.angles)[:, None, None]
    return ObservationMatrix(
        entries=scaled.reshape(m * k, -1), num_apertures=m, samples_per_pulse=k
    )


def corrupted_matvec(C: ObservationMatrix, phi: PhaseErrorVector, f: np.ndarray) -> np.ndarray:
    """C(phi) @ f without materializing the corrupted matrix."""
    m, k = C.num_apertures, C.samples_per_pulse
    y = (C.entries @ f).reshape(m, k) * np.exp(1j * phi.angles)[:, None]
    return y.reshape(-1)


def corrupted_rmatvec(C: ObservationMatrix, phi: PhaseErrorVector, v: np.ndarray) -> np.ndarray:
    """C(phi)^H @ v without materializing the corrupted matrix."""
    m, k = C.num_apertures, C.samples_per_pulse
    w = v.reshape(m, k) * np.exp(-1j * phi.angles)[:, None]
    return C.entries.conj().T @ w.reshape(-1)


def simulate_phase_history(
    C: ObservationMatrix,
    f: np.ndarray,
    phi: PhaseErrorVector,
    noise_sigma: float,
    seed: int,
) -> PhaseHistory:
    """Simulate g = C(phi) f + n with circular complex Gaussian noise.

    ``noise_sigma`` is the standard deviation per real/imaginary component.
    The same seed always yields bit-identical output.
    """
    if noise_sigma < 0.0:
        raise ConfigurationError("noise_sigma must be >= 0")
    f = np.asarray(f, dtype=complex)
    if f.shape != (C.n_pixels,):
        raise ConfigurationError(
            f"scene has shape {f.shape}, expected ({C.n_pixels},)"
        )
    g = corrupted_matvec(C, phi, f)
    if noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        g = g + noise_sigma * (
            rng.standard_normal(len(g)) + 1j * rng.standard_normal(len(g))
        )
    return PhaseHistory(samples=g, noise_sigma=noise_sigma, seed=seed)


def adjoint_image(C: ObservationMatrix, g: PhaseHistory) -> np.ndarray:
    """C^H g: the matched-filter image, also the no-autofocus baseline."""
    samples = g.samples if isinstance(g, PhaseHistory) else np.asarray(g, dtype=complex)
    if samples.shape != (C.n_rows,):
        raise ConfigurationError(
            f"phase history has shape {samples.shape}, expected ({C.n_rows},)"
        )
    return C.entries.conj().T @ samples


def sigma_for_snr(C: ObservationMatrix, f: np.ndarray, phi: PhaseErrorVector, snr_db: float) -> float:
    """Per-component noise sigma achieving a target SNR(dB) on ||C(phi) f||."""
    g = corrupted_matvec(C, phi, np.asarray(f, dtype=complex))
    signal = np.linalg.norm(g)
    return float(signal / np.sqrt(2.0 * len(g) * 10.0 ** (snr_db / 10.0)))


def sample_phase_errors(
    num_apertures: int,
    dist: str = "uniform",
    seed: int = 0,
    max_abs_rad: float = np.pi / 2.0,
    degree: int = 3,
) -> PhaseErrorVector:
    """Draw a seedable 1D azimuth phase-error vector.

    ``uniform`` draws i.i.d. angles from [-max_abs_rad, max_abs_rad).
    ``polynomial`` draws a smooth error: random coefficients on the Chebyshev
    basis of the given degree (constant term excluded, it is pure gauge),
    rescaled so the largest magnitude equals max_abs_rad.
    """
    if not 0.0 < max_abs_rad <= np.pi:
        raise ConfigurationError("max_abs_rad must lie in (0, pi]")
    rng = np.random.default_rng(seed)
    if dist == "uniform":
        angles = rng.uniform(-max_abs_rad, max_abs_rad, num_apertures)
    elif dist == "polynomial":
        if degree < 1:
            raise ConfigurationError("polynomial phase error needs degree >= 1")
        u = np.linspace(-1.0, 1.0, num_apertures)
        coeffs = rng.standard_normal(degree)
        angles = np.zeros(num_apertures)
        for d, c in enumerate(coeffs, start=1):
            angles += c * np.cos(d * np.arccos(u))
        peak = np.abs(angles).max()
        if peak > 0.0:
            angles *= max_abs_rad / peak
    else:
        raise ConfigurationError(f"unknown phase error distribution {dist!r}")
    return PhaseErrorVector(angles=angles)
