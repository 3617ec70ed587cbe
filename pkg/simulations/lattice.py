"""Spin-orbit photon states on a truncated OAM lattice.

Coin basis index 0 is |L> (moves up in m under a q-plate with q > 0), index 1
is |R>. Amplitude arrays have shape (2, m_max - m_min + 1) with column
``m - m_min``.
"""
import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import entropy

from simulations.metrics import ProbDist
from util.errors import NormalizationError, ParameterError, TruncationError, WindowError

POLARIZATIONS = ("L", "R")
EPS_EDGE = 1e-10
NORM_TOL = 1e-12

_NAMED_COINS = {
    "L": (1, 0),
    "R": (0, 1),
    "H": (1 / np.sqrt(2), 1 / np.sqrt(2)),
    "V": (-1j / np.sqrt(2), 1j / np.sqrt(2)),
}


@dataclass(frozen=True)
class PolState:
    a_l: complex
    a_r: complex

    @classmethod
    def from_any(cls, value):
        """PolState, "L"/"R"/"H"/"V", or a pair of amplitudes (complex or [re, im])"""
        if isinstance(value, PolState):
            return value
        if isinstance(value, str):
            if value.upper() not in _NAMED_COINS:
                raise ParameterError(f"unknown polarization name {value!r}")
            a_l, a_r = _NAMED_COINS[value.upper()]
            return cls(complex(a_l), complex(a_r))
        values = list(value)
        if len(values) != 2:
            raise ParameterError(f"a coin needs two amplitudes, got {len(values)}")
        a_l, a_r = (complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v) for v in values)
        return cls(a_l, a_r)

    @classmethod
    def from_vector(cls, vector):
        return cls(complex(vector[0]), complex(vector[1]))

    @property
    def vector(self):
        return np.array([self.a_l, self.a_r], dtype=complex)

    @property
    def norm(self):
        return float(abs(self.a_l) ** 2 + abs(self.a_r) ** 2)

    def is_normalized(self, tol=NORM_TOL):
        return abs(self.norm - 1.0) <= tol

    def check_normalized(self, tol=NORM_TOL):
        if not self.is_normalized(tol):
            raise NormalizationError(f"coin norm is {self.norm!r}")
        return self

    def normalized(self):
        if self.norm == 0:
            raise NormalizationError("cannot normalize a zero coin")
        return PolState.from_vector(self.vector / np.sqrt(self.norm))


L = PolState(1 + 0j, 0j)
R = PolState(0j, 1 + 0j)


class SpinOrbitState:
    """Immutable coin-walker wavefunction on the window [m_min, m_max]"""

    __slots__ = ("m_min", "m_max", "_amplitudes")

    def __init__(self, m_min, m_max, amplitudes):
        m_min, m_max = int(m_min), int(m_max)
        if m_max < m_min:
            raise WindowError(f"empty window ({m_min}, {m_max})")
        amplitudes = np.array(amplitudes, dtype=complex)
        if amplitudes.shape != (2, m_max - m_min + 1):
            raise WindowError(f"amplitudes of shape {amplitudes.shape} do not fit window ({m_min}, {m_max})")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "m_min", m_min)
        object.__setattr__(self, "m_max", m_max)
        object.__setattr__(self, "_amplitudes", amplitudes)

    def __setattr__(self, key, value):
        raise AttributeError("SpinOrbitState is immutable")

    @property
    def amplitudes(self):
        return self._amplitudes

    @property
    def window(self):
        return self.m_min, self.m_max

    @property
    def size(self):
        return self.m_max - self.m_min + 1

    @property
    def ms(self):
        return np.arange(self.m_min, self.m_max + 1)

    @property
    def norm(self):
        return float(np.sum(np.abs(self._amplitudes) ** 2))

    def amplitude(self, pol, m):
        if not self.m_min <= m <= self.m_max:
            return 0j
        return complex(self._amplitudes[POLARIZATIONS.index(pol), m - self.m_min])

    def check_normalized(self, tol=NORM_TOL):
        if abs(self.norm - 1.0) > tol:
            raise NormalizationError(f"state norm is {self.norm!r}")
        return self

    def with_amplitudes(self, amplitudes):
        return SpinOrbitState(self.m_min, self.m_max, amplitudes)

    def embed(self, window):
        m_min, m_max = window
        out = np.zeros((2, m_max - m_min + 1), dtype=complex)
        lo, hi = max(m_min, self.m_min), min(m_max, self.m_max)
        if lo <= hi:
            out[:, lo - m_min:hi - m_min + 1] = self._amplitudes[:, lo - self.m_min:hi - self.m_min + 1]
        if np.sum(np.abs(out) ** 2) < self.norm - NORM_TOL:
            raise WindowError(f"window {window} cuts off amplitude of state on {self.window}")
        return SpinOrbitState(m_min, m_max, out)

    def flat(self):
        return self._amplitudes.reshape(-1)

    def to_json(self):
        return {
            "m_min": self.m_min,
            "m_max": self.m_max,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.flat()],
        }

    @classmethod
    def from_json(cls, doc):
        m_min, m_max = int(doc["m_min"]), int(doc["m_max"])
        flat = np.array([complex(re, im) for re, im in doc["amplitudes"]], dtype=complex)
        if flat.size != 2 * (m_max - m_min + 1):
            raise WindowError("amplitude list does not match the window")
        return cls(m_min, m_max, flat.reshape(2, -1))

    def __repr__(self):
        return f"SpinOrbitState(window=({self.m_min}, {self.m_max}), norm={self.norm:.15g})"


def waveplate_matrix(retardance, axis_angle):
    """Jones matrix in the circular basis; W(pi, 0)|L> = -i|R>"""
    c, s = np.cos(retardance / 2), np.sin(retardance / 2)
    return np.array([
        [c, -1j * s * np.exp(-2j * axis_angle)],
        [-1j * s * np.exp(2j * axis_angle), c],
    ], dtype=complex)


@dataclass(frozen=True)
class WavePlate:
    retardance: float
    axis_angle: float

    @classmethod
    def qwp(cls, axis_angle):
        return cls(np.pi / 2, axis_angle)

    @classmethod
    def hwp(cls, axis_angle):
        return cls(np.pi, axis_angle)

    def matrix(self):
        return waveplate_matrix(self.retardance, self.axis_angle)

    def to_json(self):
        return {"type": "waveplate", "retardance": self.retardance, "axis_angle": self.axis_angle}


@dataclass(frozen=True)
class QPlate:
    charge: float
    delta: float
    alpha0: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.delta <= np.pi:
            raise ParameterError(f"q-plate retardation {self.delta!r} outside [0, pi]")
        twice = 2 * self.charge
        if abs(twice - round(twice)) > 1e-12 or round(twice) == 0:
            raise ParameterError(f"q-plate charge {self.charge!r} must be a nonzero half-integer")

    @property
    def shift(self):
        return int(round(2 * self.charge))

    def to_json(self):
        return {"type": "qplate", "charge": self.charge, "delta": self.delta, "alpha0": self.alpha0}


@dataclass(frozen=True)
class StepSequence:
    elements: tuple
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.elements:
            raise ParameterError("a step needs at least one optical element")
        for element in self.elements:
            if not isinstance(element, (WavePlate, QPlate)):
                raise ParameterError(f"unsupported optical element {element!r}")
        spacings = {abs(e.shift) for e in self.qplates}
        if len(spacings) > 1:
            raise ParameterError(f"q-plates in one step must share |2q|, got {sorted(spacings)}")

    @property
    def qplates(self):
        return [e for e in self.elements if isinstance(e, QPlate)]

    @property
    def spacing(self):
        """Lattice spacing |2q|; 1 when the step has no q-plate"""
        plates = self.qplates
        return abs(plates[0].shift) if plates else 1

    @property
    def reach(self):
        """Largest OAM displacement a single step can produce"""
        return max(len(self.qplates), 1) * self.spacing

    @classmethod
    def preset(cls, name, delta=np.pi, alpha0=0.0, charge=0.5):
        plate = QPlate(charge, delta, alpha0)
        if name == "standard-paper":
            return cls((WavePlate.qwp(np.pi / 4), plate, WavePlate.hwp(0.0)), name)
        if name == "wavepacket":
            return cls((WavePlate.qwp(np.pi / 4), plate), name)
        raise ParameterError(f"unknown step preset {name!r}")

    def switched_off(self):
        return replace(self, elements=tuple(replace(e, delta=0.0) if isinstance(e, QPlate) else e
                                            for e in self.elements), name=f"{self.name}/off")

    def to_json(self):
        return {"name": self.name, "elements": [e.to_json() for e in self.elements]}


def default_window(n, seq=None):
    reach = (n + 2) * (seq.reach if seq else 1)
    return -reach, reach


def make_localized_state(m0, coin, window):
    m_min, m_max = window
    if m_max < m_min:
        raise WindowError(f"empty window {window}")
    if not m_min <= m0 <= m_max:
        raise WindowError(f"m0={m0} outside window {window}")
    coin = PolState.from_any(coin).check_normalized()
    amplitudes = np.zeros((2, m_max - m_min + 1), dtype=complex)
    amplitudes[:, m0 - m_min] = coin.vector
    return SpinOrbitState(m_min, m_max, amplitudes)


def apply_waveplate(state, retardance, axis_angle):
    state.check_normalized()
    return state.with_amplitudes(waveplate_matrix(retardance, axis_angle) @ state.amplitudes)


def _shifted(row, d):
    """out[m] = row[m - d], zero filled"""
    out = np.zeros_like(row)
    if d == 0:
        out[:] = row
    elif d > 0:
        out[d:] = row[:-d]
    else:
        out[:d] = row[-d:]
    return out


def apply_qplate(state, charge, delta, alpha0=0.0, eps_edge=EPS_EDGE):
    plate = QPlate(charge, delta, alpha0)
    state.check_normalized()
    c, s = np.cos(plate.delta / 2), np.sin(plate.delta / 2)
    d = plate.shift
    a = state.amplitudes
    if s > 0:
        width = min(abs(d), state.size)
        edge = max(np.max(np.abs(a[:, :width])), np.max(np.abs(a[:, -width:])))
        if edge > eps_edge:
            raise TruncationError(f"amplitude {edge:.3g} on the boundary of window {state.window} "
                                  f"would leave the lattice")
    up = -1j * s * np.exp(2j * plate.alpha0)
    down = -1j * s * np.exp(-2j * plate.alpha0)
    new_l = c * a[0] + down * _shifted(a[1], -d)
    new_r = c * a[1] + up * _shifted(a[0], d)
    return state.with_amplitudes(np.stack([new_l, new_r]))


def apply_element(state, element, eps_edge=EPS_EDGE):
    if isinstance(element, WavePlate):
        return apply_waveplate(state, element.retardance, element.axis_angle)
    return apply_qplate(state, element.charge, element.delta, element.alpha0, eps_edge=eps_edge)


def apply_step(state, seq, eps_edge=EPS_EDGE):
    for element in seq.elements:
        state = apply_element(state, element, eps_edge=eps_edge)
    return state


def check_boundary(state, eps_edge=EPS_EDGE):
    """Raise if amplitude sits on the first or last site of the window"""
    a = state.amplitudes
    edge = max(np.max(np.abs(a[:, 0])), np.max(np.abs(a[:, -1])))
    if edge > eps_edge:
        raise TruncationError(f"amplitude {edge:.3g} on the boundary of window {state.window}")
    return state


def evolve(state, seq, n, between_steps=None, eps_edge=EPS_EDGE):
    """States after steps 0..n; ``between_steps`` maps the state before steps 2..n

    Each q-plate refuses amplitude it would shift off the window, and the final
    state must leave the boundary sites empty.
    """
    if n < 0:
        raise ParameterError(f"number of steps must be >= 0, got {n}")
    states = [state]
    for step in range(1, n + 1):
        if between_steps is not None and step > 1:
            state = between_steps(state)
        state = apply_step(state, seq, eps_edge=eps_edge)
        logging.debug(f"step {step}/{n}: norm {state.norm:.15f}")
        states.append(state)
    if n:
        check_boundary(state, eps_edge)
    return states


def switched_off_walk(state, seq, n, active_steps, eps_edge=EPS_EDGE):
    """n-step walk whose q-plates are switched off (delta=0) after ``active_steps`` steps"""
    off = seq.switched_off()
    for step in range(n):
        state = apply_step(state, seq if step < active_steps else off, eps_edge=eps_edge)
    return check_boundary(state, eps_edge) if n else state


def oam_marginal(state):
    state.check_normalized()
    weights = np.sum(np.abs(state.amplitudes) ** 2, axis=0)
    return ProbDist.from_array([int(m) for m in state.ms], weights)


def full_distribution(state):
    state.check_normalized()
    weights = np.abs(state.amplitudes) ** 2
    keys = [(pol, int(m)) for pol in POLARIZATIONS for m in state.ms]
    return ProbDist.from_array(keys, weights.reshape(-1))


def coin_density_matrix(state):
    a = state.amplitudes
    return a @ a.conj().T


def coin_walker_entanglement(state):
    """Von Neumann entropy (bits) of the reduced coin state"""
    state.check_normalized()
    eigenvalues = np.clip(np.linalg.eigvalsh(coin_density_matrix(state)), 0.0, None)
    return float(entropy(eigenvalues, base=2))


def odd_parity_weight(dist, n, start=0):
    """Probability on sites that cannot be reached after n unit steps from ``start``"""
    return float(sum(p for m, p in dist.items() if (m - start + n) % 2))
