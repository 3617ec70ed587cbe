"""Transverse-mode optics around the walk.

Fields carry exp(-i(2p+|m|+1) arctan(z/z_R)) Gouy factors and the matching
exp(+ikr^2/2R) wavefront curvature. Reduced coordinates are rho = r/w0 and
zeta = z/z_R.
"""
import logging
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import integrate, special

from simulations import lattice
from simulations.metrics import ProbDist
from util.errors import (AmplitudeRangeError, ParameterError, QuadratureError,
                         ZeroEfficiencyError)

QUAD_TOL = 1e-8
RHO_MAX = 8.0
BISECTION_TOL = 1e-10


def rayleigh_range(w0, wavelength):
    return np.pi * w0 ** 2 / wavelength


def lg_amplitude(p, m, r, phi, z, w0, wavelength):
    if p < 0:
        raise ParameterError(f"LG radial index must be >= 0, got {p}")
    r = np.asarray(r, dtype=float)
    am = abs(m)
    z_r = rayleigh_range(w0, wavelength)
    w = w0 * np.sqrt(1 + (z / z_r) ** 2)
    norm = np.sqrt(2 / np.pi * np.exp(special.gammaln(p + 1) - special.gammaln(p + am + 1)))
    x = 2 * r ** 2 / w ** 2
    amplitude = norm / w * (np.sqrt(2) * r / w) ** am * np.exp(-r ** 2 / w ** 2) * special.eval_genlaguerre(p, am, x)
    curvature = 0.0 if z == 0 else np.pi / wavelength * r ** 2 / (z * (1 + (z_r / z) ** 2))
    gouy = (2 * p + am + 1) * np.arctan(z / z_r)
    return amplitude * np.exp(1j * (m * np.asarray(phi) + curvature - gouy))


def lg_reduced(p, m, rho, zeta, phi=0.0):
    """LG mode in units of w0 (w0 = 1, z_R = pi)"""
    return lg_amplitude(p, m, rho, phi, zeta * np.pi, 1.0, 1.0)


def _hygg_norm(p, am):
    if p < -am:
        raise ParameterError(f"HyGG index p={p} must satisfy p >= -|m|")
    return np.sqrt(2.0 ** (p + am + 1) / (np.pi * special.gamma(p + am + 1)))


def hygg_amplitude(p, m, rho, zeta, phi=0.0):
    """Hypergeometric-Gaussian mode in units of w0; zeta = 0 is the pupil-plane limit"""
    am = abs(m)
    norm = _hygg_norm(p, am)
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    if zeta == 0:
        radial = norm * rho ** (p + am) * np.exp(-rho ** 2)
    else:
        ratio = special.gamma(1 + am + p / 2) / special.gamma(am + 1)
        z = mpmath.mpf(zeta)
        head = mpmath.mpc(0, 1) ** (am + 1) * z ** (p / 2) * mpmath.power(z + 1j, -(1 + am + p / 2))
        values = []
        for r in rho:
            x = mpmath.mpf(r) ** 2 / (z * (z + 1j))
            value = head * mpmath.mpf(r) ** am * mpmath.exp(-1j * mpmath.mpf(r) ** 2 / (z + 1j))
            values.append(complex(value * mpmath.hyp1f1(-p / 2, am + 1, x)))
        # conjugated to follow the exp(-i Gouy) convention of lg_amplitude
        radial = norm * ratio * np.conj(np.array(values))
    out = radial * np.exp(1j * m * phi)
    return out if np.ndim(out) and out.size > 1 else complex(out.reshape(-1)[0])


def _quad(func, a, b, what):
    value, error, info = integrate.quad(func, a, b, epsabs=QUAD_TOL * 1e-2, epsrel=1e-10,
                                        limit=400, full_output=1)[:3]
    if error > QUAD_TOL:
        raise QuadratureError(f"{what} did not converge (error estimate {error:.3g})")
    return value


def radial_overlap(f, g, rho_max=RHO_MAX, what="radial overlap"):
    """2 pi * integral of conj(f) g rho d rho for radial profiles f, g of rho"""
    def integrand(rho, part):
        value = np.conj(f(rho)) * g(rho) * rho
        return float(np.real(value) if part == 0 else np.imag(value))
    real = _quad(lambda r: integrand(r, 0), 0.0, rho_max, what)
    imag = _quad(lambda r: integrand(r, 1), 0.0, rho_max, what)
    return 2 * np.pi * complex(real, imag)


@dataclass(frozen=True)
class RadialMode:
    family: str
    p: int
    m: int
    w0: float = 1.0
    wavelength: float = 1.0

    def __post_init__(self):
        if self.family not in ("LG", "HyGG"):
            raise ParameterError(f"unknown mode family {self.family!r}")

    @property
    def z_r(self):
        return rayleigh_range(self.w0, self.wavelength)

    def amplitude(self, r, phi, z):
        if self.family == "LG":
            return lg_amplitude(self.p, self.m, r, phi, z, self.w0, self.wavelength)
        return hygg_amplitude(self.p, self.m, np.asarray(r) / self.w0, z / self.z_r, phi) / self.w0


@dataclass
class RadialExpansion:
    m_in: int
    coefficients: np.ndarray

    @property
    def powers(self):
        return np.abs(self.coefficients) ** 2

    @property
    def residual(self):
        return float(1 - np.sum(self.powers))

    def rows(self):
        for p, power in enumerate(self.powers):
            yield p, float(power)


def _pupil_output_index(m):
    """(p, m) of the HyGG mode leaving a tuned q = 1/2 plate for an LG_{0,m} input"""
    return abs(m) - abs(m + 1), m + 1


def qplate_radial_coefficients(m, p_max=3):
    """Projection of the pupil-plane q-plate output onto LG_{p,m+1}; c_p >= 0 in the chosen LG gauge"""
    if p_max < 0:
        raise ParameterError("p_max must be >= 0")
    p_h, m_out = _pupil_output_index(m)
    coefficients = []
    for p in range(p_max + 1):
        c = radial_overlap(lambda r: lg_reduced(p, m_out, r, 0.0), lambda r: hygg_amplitude(p_h, m_out, r, 0.0),
                           what=f"c_{p} for m={m}")
        coefficients.append(abs(c))
    logging.debug(f"radial coefficients for m={m}: {np.round(np.square(coefficients), 4)}")
    return RadialExpansion(m_in=m, coefficients=np.array(coefficients))


def pupil_overlap(m, zeta):
    """|<LG_{0,m}(waist)|HyGG(zeta)>| of radial profiles: the input Gaussian against the plate output observed at zeta"""
    if zeta < 0:
        raise ParameterError("zeta must be >= 0")
    p_h, m_out = _pupil_output_index(m)
    rho_max = RHO_MAX * np.sqrt(1 + zeta ** 2)
    value = radial_overlap(lambda r: lg_reduced(0, m, r, 0.0), lambda r: hygg_amplitude(p_h, m_out, r, zeta),
                           rho_max=rho_max, what=f"pupil overlap for m={m}")
    return float(abs(value))


@dataclass
class PupilReport:
    m: int
    overlap: float
    tolerance: float = 1e-8

    @property
    def holds(self):
        return abs(self.overlap - 1) <= self.tolerance


def pupil_plane_action(m):
    return PupilReport(m=m, overlap=pupil_overlap(m, 0.0))


def gouy_phases(ms, d_over_zR):
    if d_over_zR < 0:
        raise ParameterError("d/z_R must be >= 0")
    return np.exp(-2j * np.abs(ms) * np.arctan(d_over_zR))


def gouy_step_dephasing(state, d_over_zR):
    return state.with_amplitudes(state.amplitudes * gouy_phases(state.ms, d_over_zR)[None, :])


def gouy_walk(state, seq, n, d_over_zR):
    """Walk with free propagation over d between consecutive steps"""
    if d_over_zR < 0:
        raise ParameterError("d/z_R must be >= 0")
    return lattice.evolve(state, seq, n, between_steps=lambda s: gouy_step_dephasing(s, d_over_zR))


def efficiency_correction(dist, eta):
    """Undo an OAM-dependent detection efficiency; ``eta`` maps m to (0, 1]"""
    lookup = eta if callable(eta) else (lambda m: eta.get(m, eta.get(str(m))))
    corrected = {}
    for m, p in dist.items():
        e = lookup(m)
        if e is None or e <= 0:
            raise ZeroEfficiencyError(f"no positive efficiency for m={m}")
        if e > 1:
            raise ParameterError(f"efficiency {e!r} for m={m} exceeds 1")
        corrected[m] = p / e
    return ProbDist(corrected, subnormalized=True).normalized()


@dataclass(frozen=True)
class HologramGrid:
    width: int
    height: int
    pitch: float

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or self.pitch <= 0:
            raise ParameterError("hologram grid needs positive size and pitch")

    def coordinates(self):
        """Pixel centres; an even size leaves no pixel on the optical axis"""
        x = (np.arange(self.width) - (self.width - 1) / 2) * self.pitch
        y = (np.arange(self.height) - (self.height - 1) / 2) * self.pitch
        return np.meshgrid(x, y)


@dataclass
class HologramMap:
    phase: np.ndarray
    grid: HologramGrid
    carrier: float
    metadata: dict = field(default_factory=dict)

    def graylevels(self):
        levels = np.floor(self.phase / (2 * np.pi) * 256)
        return np.clip(levels, 0, 255).astype(np.uint8)

    def rows(self):
        for j, row in enumerate(self.phase):
            for i, value in enumerate(row):
                yield i, j, float(value)


def inverse_sinc(a):
    """Solve sin(x)/x = a on the branch [-pi, 0] by bisection"""
    a = np.asarray(a, dtype=float)
    if np.any(a < -1e-12) or np.any(a > 1 + 1e-12):
        raise AmplitudeRangeError("hologram amplitudes must lie in [0, 1]")
    a = np.clip(a, 0.0, 1.0)
    lo = np.full(a.shape, -np.pi)
    hi = np.zeros(a.shape)
    while np.max(hi - lo, initial=0.0) > BISECTION_TOL:
        mid = (lo + hi) / 2
        below = np.sinc(mid / np.pi) < a
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return (lo + hi) / 2


def make_hologram(amplitude, phase, grid, carrier=0.0):
    """Phase-only mask encoding amplitude and phase into the first diffraction order"""
    amplitude = np.asarray(amplitude, dtype=float)
    phase = np.asarray(phase, dtype=float)
    if amplitude.shape != (grid.height, grid.width) or phase.shape != amplitude.shape:
        raise ParameterError(f"fields must have shape {(grid.height, grid.width)}")
    x, _ = grid.coordinates()
    grating = np.mod(2 * np.pi * carrier * x, 2 * np.pi)
    modulation = 1 + inverse_sinc(amplitude) / np.pi
    mask = modulation * np.mod(phase + grating - np.pi * modulation, 2 * np.pi)
    return HologramMap(phase=mask, grid=grid, carrier=carrier)


def _field_from_modes(coefficients, grid, w0):
    x, y = grid.coordinates()
    r, phi = np.hypot(x, y), np.arctan2(y, x)
    total = np.zeros_like(r, dtype=complex)
    for m, c in coefficients.items():
        if c != 0:
            total += c * lg_amplitude(0, m, r, phi, 0.0, w0, 1.0)
    peak = np.max(np.abs(total))
    if peak == 0:
        raise AmplitudeRangeError("target field vanishes on the grid")
    return np.abs(total) / peak, np.angle(total)


def oam_field(m, grid, w0):
    """(amplitude, phase) of LG_{0,m} at the waist, amplitude scaled to a peak of 1"""
    return _field_from_modes({m: 1.0}, grid, w0)


def walker_amplitudes(state, pol=None):
    """OAM amplitudes of one polarization row, or of the walker factor of a product state"""
    if pol is not None:
        return state.amplitudes[lattice.POLARIZATIONS.index(pol)]
    _, singular, vh = np.linalg.svd(state.amplitudes, full_matrices=False)
    if singular[1] > 1e-8 * singular[0]:
        raise ParameterError("state is entangled; choose a polarization row")
    return singular[0] * vh[0]


def wavepacket_field(state, grid, w0, pol=None):
    amplitudes = walker_amplitudes(state, pol)
    return _field_from_modes(dict(zip((int(m) for m in state.ms), amplitudes)), grid, w0)


def dislocation_order(hologram, radius, samples=2048):
    """Net 2 pi windings of the mask phase on a circle of ``radius`` around the axis"""
    grid = hologram.grid
    t = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    i = np.rint(radius * np.cos(t) / grid.pitch + (grid.width - 1) / 2).astype(int)
    j = np.rint(radius * np.sin(t) / grid.pitch + (grid.height - 1) / 2).astype(int)
    if i.min() < 0 or j.min() < 0 or i.max() >= grid.width or j.max() >= grid.height:
        raise ParameterError(f"circle of radius {radius} leaves the hologram")
    values = hologram.phase[j, i]
    steps = np.diff(np.append(values, values[0]))
    steps = np.pi - np.mod(np.pi - steps, 2 * np.pi)
    return int(round(np.sum(steps) / (2 * np.pi)))
