import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np
from scipy.signal import find_peaks

from simulations import lattice, spectral
from simulations.lattice import PolState, SpinOrbitState, StepSequence
from simulations.metrics import ProbDist
from util.errors import ParameterError, WindowError

ENVELOPE_TAIL = 1e-14
EDGE_TOL = 1e-10
PEAK_PROMINENCE = 0.05


@dataclass(frozen=True)
class WavepacketSpec:
    sigma: float
    k0: float
    band: int = 1
    coin_override: Optional[PolState] = None
    window: Optional[tuple] = None

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParameterError(f"envelope width must be positive, got {self.sigma!r}")
        if self.band not in (1, 2):
            raise ParameterError(f"band must be 1 or 2, got {self.band!r}")


class SweepPoint(NamedTuple):
    k0: float
    mean_oam: float
    variance: float


@dataclass
class CatSplit:
    marginal: ProbDist
    entropy: float
    separation: int
    lower_mass: float
    upper_mass: float
    peaks: list


def _default_sequence(seq):
    return seq if seq is not None else StepSequence.preset("wavepacket")


def envelope_radius(sigma, tail=ENVELOPE_TAIL):
    return int(np.ceil(sigma * np.sqrt(2 * np.log(1 / tail))))


def wavepacket_window(sigma, n, seq=None):
    seq = _default_sequence(seq)
    reach = envelope_radius(sigma) * seq.spacing + (n + 2) * seq.reach
    return -reach, reach


def band_coin(seq, k0, band):
    k = float(spectral.wrap_phase(k0))
    return spectral.dispersion(seq, [k]).eigenstate(band, 0)


def make_wavepacket(spec, seq=None):
    seq = _default_sequence(seq)
    m_min, m_max = spec.window or wavepacket_window(spec.sigma, 0, seq)
    d = seq.spacing
    xs = np.arange(-(-m_min // d), m_max // d + 1)
    if xs.size == 0:
        raise WindowError(f"window ({m_min}, {m_max}) holds no lattice site")
    envelope = np.exp(-xs ** 2 / (2 * spec.sigma ** 2))
    envelope = envelope / np.sqrt(np.sum(envelope ** 2))
    edge = max(envelope[0], envelope[-1])
    if edge > EDGE_TOL:
        raise WindowError(f"envelope reaches {edge:.3g} at the edge of window ({m_min}, {m_max})")

    if spec.coin_override is not None:
        coin = PolState.from_any(spec.coin_override).normalized()
    else:
        coin = band_coin(seq, spec.k0, spec.band)
    amplitudes = np.zeros((2, m_max - m_min + 1), dtype=complex)
    amplitudes[:, xs * d - m_min] = coin.vector[:, None] * (envelope * np.exp(-1j * spec.k0 * xs))[None, :]
    return SpinOrbitState(m_min, m_max, amplitudes)


def _sublattice(state, spacing):
    columns = np.flatnonzero(state.ms % spacing == 0)
    return state.amplitudes[:, columns]


def momentum_amplitudes(state, spacing=1):
    """(k_j, psi_hat) with psi_hat[j] = sum_x exp(i k_j x) a_x for both coin components"""
    a = _sublattice(state, spacing)
    size = a.shape[1]
    psi_hat = np.fft.ifft(a, axis=1) * size
    ks = spectral.wrap_phase(2 * np.pi * np.arange(size) / size)
    return ks, psi_hat.T


def momentum_spectrum(state, spacing=1):
    ks, psi_hat = momentum_amplitudes(state, spacing)
    return ks, np.sum(np.abs(psi_hat) ** 2, axis=1)


def mean_quasi_momentum(state, spacing=1):
    """Circular mean of the k spectrum"""
    ks, weights = momentum_spectrum(state, spacing)
    return float(np.angle(np.sum(weights * np.exp(1j * ks))))


def mean_oam(dist):
    ms = np.array(dist.support, dtype=float)
    return float(np.sum(ms * dist.values) / dist.total)


def variance(dist):
    ms = np.array(dist.support, dtype=float)
    mean = mean_oam(dist)
    return float(np.sum((ms - mean) ** 2 * dist.values) / dist.total)


def mirrored(dist):
    return ProbDist({-m: p for m, p in dist.items()})


def propagate_states(spec, seq=None, n=0):
    seq = _default_sequence(seq)
    if spec.window is None:
        spec = replace(spec, window=wavepacket_window(spec.sigma, n, seq))
    state = make_wavepacket(spec, seq)
    logging.debug(f"wavepacket sigma={spec.sigma} k0={spec.k0:.4f} band={spec.band} on {state.window}")
    return lattice.evolve(state, seq, n)


def propagate(spec, seq=None, n=0, mirror=False):
    """Per-step OAM marginals (index 0 is the prepared packet)"""
    marginals = [lattice.oam_marginal(s) for s in propagate_states(spec, seq, n)]
    return [mirrored(p) for p in marginals] if mirror else marginals


def band_weights(state, seq, spacing=1):
    """Weight of the state on each band per Fourier component, shape (2, N)"""
    ks, psi_hat = momentum_amplitudes(state, spacing)
    bands = spectral.dispersion(seq, ks)
    overlaps = np.einsum("bki,ki->bk", bands.eigenstates.conj(), psi_hat)
    return ks, np.abs(overlaps) ** 2


def predicted_drift(spec, seq=None, n=1, mirror=False):
    """Mean-OAM displacement after n steps from band-resolved group velocities"""
    seq = _default_sequence(seq)
    if spec.window is None:
        spec = replace(spec, window=wavepacket_window(spec.sigma, n, seq))
    ks, weights = band_weights(make_wavepacket(spec, seq), seq, seq.spacing)
    v1, v2 = spectral.group_velocity(seq, ks)
    # a packet around k moves by -d(omega)/dk per step with |k> = sum exp(-ikx)|x>
    drift = -n * seq.spacing * float(weights[0] @ v1 + weights[1] @ v2) / float(weights.sum())
    return -drift if mirror else drift


def _sweep_point(sigma, band, k0, n, seq, mirror):
    final = propagate(WavepacketSpec(sigma, k0, band), seq, n, mirror=mirror)[-1]
    return SweepPoint(float(k0), mean_oam(final), variance(final))


def brillouin_sweep(sigma, band, k0s, n, seq=None, workers=1, mirror=False):
    seq = _default_sequence(seq)
    k0s = [float(k) for k in k0s]
    logging.info(f"Brillouin sweep over {len(k0s)} quasi-momenta with {workers} worker(s)")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda k: _sweep_point(sigma, band, k, n, seq, mirror), k0s))
    return [_sweep_point(sigma, band, k, n, seq, mirror) for k in k0s]


def superposition_coin(seq, k0):
    bands = spectral.dispersion(seq, [float(spectral.wrap_phase(k0))])
    return PolState.from_vector(bands.eigenstates[0, 0] + bands.eigenstates[1, 0]).normalized()


def lobe_separation(dist):
    """Distance between the two most prominent maxima after 3-point smoothing; 0 if unimodal"""
    ms = np.array(dist.support)
    smoothed = np.convolve(dist.values, np.ones(3) / 3, mode="same")
    padded = np.concatenate([[0.0], smoothed, [0.0]])
    peaks, props = find_peaks(padded, prominence=PEAK_PROMINENCE * smoothed.max())
    if len(peaks) < 2:
        return 0, [int(ms[p - 1]) for p in peaks]
    top = peaks[np.argsort(props["prominences"])[::-1][:2]] - 1
    lobes = sorted(int(ms[p]) for p in top)
    return lobes[1] - lobes[0], lobes


def half_line_masses(dist, centre=0):
    lower = sum(p for m, p in dist.items() if m < centre) + dist.get(centre) / 2
    upper = sum(p for m, p in dist.items() if m > centre) + dist.get(centre) / 2
    return float(lower), float(upper)


def cat_split(sigma, k0, n, seq=None):
    seq = _default_sequence(seq)
    spec = WavepacketSpec(sigma, k0, coin_override=superposition_coin(seq, k0))
    final = propagate_states(spec, seq, n)[-1]
    marginal = lattice.oam_marginal(final)
    separation, peaks = lobe_separation(marginal)
    lower, upper = half_line_masses(marginal)
    return CatSplit(marginal=marginal, entropy=lattice.coin_walker_entanglement(final),
                    separation=separation, lower_mass=lower, upper_mass=upper, peaks=peaks)
