"""Momentum-space picture of a translation-invariant step.

Momentum kets are |k> = sum_x exp(-ikx)|x>, x = m / |2q|. Shifting up one
lattice unit multiplies |k> by exp(+ik), so a q-plate becomes a 2x2 matrix per
k. Quasi-energies are defined through eigenvalues exp(-i omega).
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from simulations.lattice import PolState, QPlate, waveplate_matrix
from util.errors import DegenerateBandError, NotPlanarError, ParameterError

DEGENERACY_TOL = 1e-9
PLANARITY_TOL = 1e-6
FD_STEP = 1e-5
TRACKING_POINTS = 2049


def wrap_phase(x):
    """Map angles onto (-pi, pi]"""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2 * np.pi)


@dataclass(frozen=True)
class BlochOperator:
    k: float
    matrix: np.ndarray

    def unitarity_residual(self):
        return float(np.max(np.abs(self.matrix.conj().T @ self.matrix - np.eye(2))))

    @property
    def det(self):
        return complex(np.linalg.det(self.matrix))


@dataclass
class BandStructure:
    k_grid: np.ndarray
    omega: np.ndarray         # (2, N); row s-1 holds band s
    eigenstates: np.ndarray   # (2, N, 2) gauge-fixed coin vectors
    stokes: np.ndarray        # (2, N, 3)
    mirror: bool = False
    offset: float = 0.0       # global quasi-energy removed so that omega_2(0) = 0

    def eigenstate(self, band, index):
        return PolState.from_vector(self.eigenstates[band - 1, index])

    def eigenvalue_residual(self, seq):
        ks = -self.k_grid if self.mirror else self.k_grid
        stack = _bloch_stack(seq, ks)
        worst = 0.0
        for s in range(2):
            v = self.eigenstates[s]
            lhs = np.einsum("nij,nj->ni", stack, v)
            rhs = np.exp(-1j * (self.omega[s] + self.offset))[:, None] * v
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        return worst

    def band_gap(self):
        return float(np.min(np.abs(wrap_phase(self.omega[0] - self.omega[1]))))


def _element_stack(element, ks):
    n = ks.size
    if not isinstance(element, QPlate):
        return np.broadcast_to(waveplate_matrix(element.retardance, element.axis_angle), (n, 2, 2))
    c, s = np.cos(element.delta / 2), np.sin(element.delta / 2)
    sign = np.sign(element.shift)
    out = np.empty((n, 2, 2), dtype=complex)
    out[:, 0, 0] = c
    out[:, 1, 1] = c
    out[:, 0, 1] = -1j * s * np.exp(-2j * element.alpha0) * np.exp(-1j * ks * sign)
    out[:, 1, 0] = -1j * s * np.exp(2j * element.alpha0) * np.exp(1j * ks * sign)
    return out


def _bloch_stack(seq, ks):
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    total = np.broadcast_to(np.eye(2, dtype=complex), (ks.size, 2, 2))
    for element in seq.elements:
        total = _element_stack(element, ks) @ total
    return total


def bloch_operator(seq, k):
    return BlochOperator(float(k), _bloch_stack(seq, [k])[0])


def closed_form_bands(k):
    """Analytic (omega1, omega2) of the quarter-wave-plate + q-plate step at delta = pi"""
    omega2 = np.arcsin(np.sin(np.asarray(k, dtype=float)) / np.sqrt(2))
    return wrap_phase(np.pi - omega2), omega2


def closed_form_velocity(k):
    v2 = np.cos(k) / np.sqrt(1 + np.cos(k) ** 2)
    return -v2, v2


def _gauge(vectors):
    """Make <L|v> real >= 0, or <R|v> when <L|v> vanishes"""
    lead = np.where(np.abs(vectors[..., 0]) > 1e-12, vectors[..., 0], vectors[..., 1])
    phase = np.conj(lead) / np.abs(lead)
    fixed = vectors * phase[..., None]
    return fixed / np.linalg.norm(fixed, axis=-1, keepdims=True)


def stokes_vectors(vectors):
    a_l, a_r = vectors[..., 0], vectors[..., 1]
    cross = np.conj(a_l) * a_r
    return np.stack([2 * cross.real, 2 * cross.imag, np.abs(a_l) ** 2 - np.abs(a_r) ** 2], axis=-1)


def _check_grid(ks):
    if np.any(ks <= -np.pi - 1e-12) or np.any(ks > np.pi + 1e-12):
        raise ParameterError("k values must lie in (-pi, pi]")


def _tracked_bands(seq, ks):
    """Band-resolved (omega, vectors, offset) at ks, labelled by continuity from k = 0"""
    grid = np.unique(np.concatenate([np.linspace(-np.pi, np.pi, TRACKING_POINTS), ks, [0.0]]))
    eigenvalues, eigenvectors = np.linalg.eig(_bloch_stack(seq, grid))
    split = np.abs(eigenvalues[:, 0] - eigenvalues[:, 1])
    if np.min(split) < DEGENERACY_TOL:
        where = grid[int(np.argmin(split))]
        raise DegenerateBandError(f"bands touch at k={where:.6f}")

    zero = int(np.searchsorted(grid, 0.0))
    order = np.zeros((grid.size, 2), dtype=int)
    order[zero] = (0, 1)
    for direction in (1, -1):
        stop = grid.size if direction == 1 else -1
        for i in range(zero + direction, stop, direction):
            previous = eigenvalues[i - direction, order[i - direction]]
            straight = np.sum(np.abs(eigenvalues[i] - previous))
            swapped = np.sum(np.abs(eigenvalues[i, ::-1] - previous))
            order[i] = (0, 1) if straight <= swapped else (1, 0)

    rows = np.arange(grid.size)
    lam = np.stack([eigenvalues[rows, order[:, b]] for b in range(2)])
    vec = np.stack([eigenvectors[rows, :, order[:, b]] for b in range(2)])
    phase = np.unwrap(-np.angle(lam), axis=1)
    right = int(np.searchsorted(grid, 1e-3))
    left = int(np.searchsorted(grid, -1e-3, side="right")) - 1
    slope = (phase[:, right] - phase[:, left]) / (grid[right] - grid[left])
    if abs(slope[0] - slope[1]) > 1e-9:
        band2 = int(np.argmax(slope))
    else:
        band2 = int(np.argmin(wrap_phase(phase[:, zero])))
    labels = [1 - band2, band2]
    reference = phase[band2, zero]
    omega = wrap_phase(phase[labels] - reference)
    vectors = _gauge(vec[labels])

    index = np.searchsorted(grid, ks)
    return omega[:, index], vectors[:, index], float(reference)


def dispersion(seq, k_grid, mirror=False):
    ks = np.atleast_1d(np.asarray(k_grid, dtype=float))
    _check_grid(ks)
    logging.debug(f"dispersion of {seq.name} on {ks.size} k-points (mirror={mirror})")
    omega, vectors, offset = _tracked_bands(seq, -ks if mirror else ks)
    return BandStructure(k_grid=ks, omega=omega, eigenstates=vectors,
                         stokes=stokes_vectors(vectors), mirror=mirror, offset=offset)


@lru_cache(maxsize=64)
def matches_closed_form(seq):
    probe = np.linspace(-np.pi, np.pi, 65)[1:]
    try:
        omega, _, _ = _tracked_bands(seq, probe)
    except DegenerateBandError:
        return False
    expected = np.stack(closed_form_bands(probe))
    return bool(np.max(np.abs(wrap_phase(omega - expected))) < 1e-10)


def group_velocity(seq, k, mirror=False):
    """(V1, V2) in lattice sites per step; arrays when k is an array"""
    ks = np.atleast_1d(np.asarray(k, dtype=float))
    _check_grid(ks)
    if matches_closed_form(seq):
        v1, v2 = closed_form_velocity(-ks if mirror else ks)
        if mirror:
            v1, v2 = -v1, -v2
    else:
        upper = dispersion(seq, wrap_phase(ks + FD_STEP), mirror=mirror).omega
        lower = dispersion(seq, wrap_phase(ks - FD_STEP), mirror=mirror).omega
        v1, v2 = wrap_phase(upper - lower) / (2 * FD_STEP)
    if np.ndim(k) == 0:
        return float(v1[0]), float(v2[0])
    return v1, v2


@dataclass
class CircleFit:
    k_grid: np.ndarray
    stokes: np.ndarray
    normal: np.ndarray
    in_plane: np.ndarray
    residual: float


def eigenstate_circle(seq, k_grid, band=1, mirror=False):
    bands = dispersion(seq, k_grid, mirror=mirror)
    points = bands.stokes[band - 1]
    _, _, vt = np.linalg.svd(points)
    normal = vt[-1]
    for axis in (2, 1, 0):
        if abs(normal[axis]) > 1e-12:
            normal = normal * np.sign(normal[axis])
            break
    residual = float(np.max(np.abs(points @ normal)))
    if residual > PLANARITY_TOL:
        raise NotPlanarError(f"eigenstates leave the great circle by {residual:.3g}")
    return CircleFit(k_grid=bands.k_grid, stokes=points, normal=normal, in_plane=vt[0], residual=residual)


def winding_number(seq, n_points=4096, band=1, mirror=False):
    """Turns of the band eigenvector's Stokes vector around the normal of its fitted circle over the zone

    The sign follows the orientation of the fitted normal: the ``wavepacket`` preset winds +1 and the
    ``standard-paper`` preset winds -1.
    """
    ks = np.linspace(-np.pi, np.pi, n_points + 1)[1:]
    fit = eigenstate_circle(seq, ks, band=band, mirror=mirror)
    e1 = fit.in_plane
    e2 = np.cross(fit.normal, e1)
    angles = np.arctan2(fit.stokes @ e2, fit.stokes @ e1)
    increments = wrap_phase(np.diff(np.append(angles, angles[0])))
    turns = float(np.sum(increments) / (2 * np.pi))
    winding = int(round(turns))
    if abs(turns - winding) > PLANARITY_TOL:
        raise NotPlanarError(f"projected trajectory winds {turns:.6f} times")
    return winding
