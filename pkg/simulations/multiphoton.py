"""Two photons on the spin-orbit lattice.

Joint mode probabilities P(p, q) are computed for unordered output mode pairs
and then sent through a 50:50 splitter (transmission 1/sqrt(2), reflection
i/sqrt(2)); coincidences are ordered pairs (mode at port A, mode at port B).
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from simulations import lattice
from simulations.metrics import CountRecord, ProbDist
from util.errors import ParameterError, ZeroCountError

BASES = {"LR": ("L", "R"), "HV": ("H", "V")}
OUTCOME_THRESHOLD = 1e-12
UNITARITY_TOL = 1e-12
# columns map (a_L, a_R) onto (a_H, a_V)
CIRCULAR_TO_LINEAR = np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2)
INEQUALITY_WEIGHTS = {"classical": 1 / 3, "photon": 1.0}


@dataclass(frozen=True, order=True)
class ModeIndex:
    pol: str
    m: int

    def __post_init__(self):
        if self.pol not in ("L", "R", "H", "V"):
            raise ParameterError(f"unknown polarization tag {self.pol!r}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def basis(self):
        return "LR" if self.pol in BASES["LR"] else "HV"

    @classmethod
    def from_any(cls, value):
        if isinstance(value, ModeIndex):
            return value
        if isinstance(value, dict):
            return cls(value["pol"], value["m"])
        pol, m = value
        return cls(pol, m)

    def to_json(self):
        return [self.pol, self.m]

    def __str__(self):
        return f"{self.pol}{self.m:+d}"


def modes_for_window(window, basis="LR"):
    m_min, m_max = window
    return tuple(ModeIndex(pol, m) for pol in BASES[basis] for m in range(m_min, m_max + 1))


class SingleParticleUnitary:
    """Transfer matrix of one photon, shape (len(modes_out), len(modes_in))"""

    def __init__(self, matrix, modes_in, modes_out=None):
        self.matrix = np.asarray(matrix, dtype=complex)
        self.modes_in = tuple(ModeIndex.from_any(m) for m in modes_in)
        self.modes_out = tuple(ModeIndex.from_any(m) for m in (modes_out or modes_in))
        if self.matrix.shape != (len(self.modes_out), len(self.modes_in)):
            raise ParameterError(f"matrix of shape {self.matrix.shape} does not match "
                                 f"{len(self.modes_out)} output and {len(self.modes_in)} input modes")
        for modes in (self.modes_in, self.modes_out):
            if len({m.basis for m in modes}) > 1:
                raise ParameterError("modes mix the LR and HV bases")
        self._in = {m: i for i, m in enumerate(self.modes_in)}
        self._out = {m: i for i, m in enumerate(self.modes_out)}

    @property
    def basis(self):
        return self.modes_out[0].basis

    def index_in(self, mode):
        mode = ModeIndex.from_any(mode)
        if mode not in self._in:
            raise ParameterError(f"input mode {mode} is not part of the transfer matrix")
        return self._in[mode]

    def index_out(self, mode):
        return self._out[ModeIndex.from_any(mode)]

    def column(self, mode):
        return self.matrix[:, self.index_in(mode)]

    def unitarity_residual(self):
        """Deviation of the columns from an orthonormal set"""
        gram = self.matrix.conj().T @ self.matrix
        return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))

    def measured_in(self, basis):
        """Same transfer matrix with the output analyzed in ``basis``"""
        if basis not in BASES:
            raise ParameterError(f"unknown measurement basis {basis!r}")
        if basis == self.basis:
            return self
        ms = sorted({m.m for m in self.modes_out})
        window = (ms[0], ms[-1])
        if self.modes_out != modes_for_window(window, self.basis):
            raise ParameterError("basis change needs a full pol-major output window")
        change = CIRCULAR_TO_LINEAR if basis == "HV" else CIRCULAR_TO_LINEAR.conj().T
        lift = np.kron(change, np.eye(len(ms)))
        return SingleParticleUnitary(lift @ self.matrix, self.modes_in, modes_for_window(window, basis))


def lift_walk_unitary(seq, n, window, out_window=None, basis="LR"):
    """Dense n-step walk; the output window is padded so no column leaks"""
    m_min, m_max = window
    if out_window is None:
        pad = (n + 1) * seq.reach
        out_window = (m_min - pad, m_max + pad)
    modes_in = modes_for_window(window)
    modes_out = modes_for_window(out_window)
    out_size = out_window[1] - out_window[0] + 1
    columns = []
    for mode in modes_in:
        start = lattice.make_localized_state(mode.m, mode.pol, out_window)
        columns.append(lattice.evolve(start, seq, n)[-1].flat())
    matrix = np.stack(columns, axis=1)
    unitary = SingleParticleUnitary(matrix, modes_in, modes_out)
    residual = unitary.unitarity_residual()
    logging.debug(f"{n}-step transfer matrix {matrix.shape} over {out_size} sites, residual {residual:.3g}")
    if residual > UNITARITY_TOL:
        logging.warning(f"transfer matrix columns drift from orthonormal by {residual:.3g}")
    return unitary.measured_in(basis)


@dataclass
class JointDistribution:
    modes: tuple
    pair_matrix: np.ndarray  # upper triangular, P(p, q) for mode indices p <= q
    model: str = "IPT"
    in_modes: tuple = ()

    def __post_init__(self):
        self._index = {m: i for i, m in enumerate(self.modes)}

    def mode_probability(self, p, q):
        i, j = sorted((self._index[ModeIndex.from_any(p)], self._index[ModeIndex.from_any(q)]))
        return float(self.pair_matrix[i, j])

    @property
    def total(self):
        return float(np.sum(self.pair_matrix))

    def mode_coincidence(self):
        """Probability that the photons leave in different modes"""
        return float(np.sum(np.triu(self.pair_matrix, 1)))

    @property
    def bunched(self):
        """Probability that both photons reach the same splitter port"""
        return self.total / 2

    def get(self, key, default=0.0):
        """Coincidence probability for (mode at port A, mode at port B)"""
        p, q = key
        if ModeIndex.from_any(p) not in self._index or ModeIndex.from_any(q) not in self._index:
            return default
        value = self.mode_probability(p, q)
        return value / 2 if ModeIndex.from_any(p) == ModeIndex.from_any(q) else value / 4

    def coincidences(self):
        rows, cols = np.nonzero(self.pair_matrix)
        probabilities = {}
        for i, j in zip(rows, cols):
            p, q = self.modes[i], self.modes[j]
            if i == j:
                probabilities[(p, p)] = float(self.pair_matrix[i, i]) / 2
            else:
                probabilities[(p, q)] = probabilities[(q, p)] = float(self.pair_matrix[i, j]) / 4
        return ProbDist(probabilities, subnormalized=True)

    def outcome_modes(self, threshold=OUTCOME_THRESHOLD):
        weights = self.pair_matrix.sum(axis=0) + self.pair_matrix.sum(axis=1)
        return [m for m, w in zip(self.modes, weights) if w > threshold]

    def oam_joint(self):
        """Coincidences summed over polarization, keyed (m at port A, m at port B)"""
        out = {}
        for (p, q), value in self.coincidences().items():
            out[(p.m, q.m)] = out.get((p.m, q.m), 0.0) + value
        return ProbDist(out, subnormalized=True)

    def rows(self):
        for (p, q), value in self.coincidences().items():
            yield p.pol, p.m, q.pol, q.m, value


def _check_inputs(unitary, in1, in2):
    in1, in2 = ModeIndex.from_any(in1), ModeIndex.from_any(in2)
    basis = unitary.modes_in[0].basis
    if in1.basis != basis or in2.basis != basis:
        raise ParameterError(f"input modes must be given in the {basis} basis")
    return in1, in2, unitary.column(in1), unitary.column(in2)


def _boson_pairs(a, b, same_input):
    amplitudes = np.outer(a, b) + np.outer(b, a)
    probabilities = np.abs(amplitudes) ** 2
    probabilities = probabilities / (1 + np.eye(len(a)))
    if same_input:
        probabilities = probabilities / 2
    return np.triu(probabilities)


def _distinguishable_pairs(a, b):
    crossed = np.abs(np.outer(a, b)) ** 2
    return np.triu(crossed + crossed.T, 1) + np.diag(np.diag(crossed))


def _labelled_pairs(a, b):
    """Boson statistics with photon 2 carrying an orthogonal ancillary label"""
    size = len(a)
    zeros = np.zeros(size, dtype=complex)
    extended = _boson_pairs(np.concatenate([a, zeros]), np.concatenate([zeros, b]), False)
    folded = np.zeros((size, size))
    for i, j in zip(*np.nonzero(extended)):
        p, q = sorted((i % size, j % size))
        folded[p, q] += extended[i, j]
    return folded


def ipt_joint(unitary, in1, in2, distinguishable=False):
    in1, in2, a, b = _check_inputs(unitary, in1, in2)
    if distinguishable:
        pairs = _labelled_pairs(a, b)
    else:
        pairs = _boson_pairs(a, b, in1 == in2)
    return JointDistribution(unitary.modes_out, pairs, "IPT", (in1, in2))


def dpt_joint(unitary, in1, in2):
    in1, in2, a, b = _check_inputs(unitary, in1, in2)
    return JointDistribution(unitary.modes_out, _distinguishable_pairs(a, b), "DPT", (in1, in2))


def partial_distinguishability(unitary, in1, in2, indistinguishability):
    """Mixture of the two models weighted by |<xi1|xi2>|^2"""
    if not 0.0 <= indistinguishability <= 1.0:
        raise ParameterError(f"indistinguishability {indistinguishability!r} outside [0, 1]")
    ipt = ipt_joint(unitary, in1, in2)
    dpt = dpt_joint(unitary, in1, in2)
    pairs = indistinguishability * ipt.pair_matrix + (1 - indistinguishability) * dpt.pair_matrix
    return JointDistribution(ipt.modes, pairs, f"mixed({indistinguishability:g})", ipt.in_modes)


def _inequality(P, p, q, weight):
    p, q = ModeIndex.from_any(p), ModeIndex.from_any(q)
    return weight * np.sqrt(P.get((p, p)) * P.get((q, q))) - P.get((p, q))


def classical_inequality_T(P, p, q):
    return float(_inequality(P, p, q, INEQUALITY_WEIGHTS["classical"]))


def photon_inequality_T(P, p, q):
    return float(_inequality(P, p, q, INEQUALITY_WEIGHTS["photon"]))


def _weight(which):
    if which not in INEQUALITY_WEIGHTS:
        raise ParameterError(f"unknown inequality {which!r}")
    return INEQUALITY_WEIGHTS[which]


def inequality_scan(P, which="photon", reference=None, threshold=OUTCOME_THRESHOLD):
    """T for every unordered pair of modes populated under P or ``reference``"""
    weight = _weight(which)
    outcome = set(P.outcome_modes(threshold))
    if reference is not None:
        outcome |= set(reference.outcome_modes(threshold))
    modes = sorted(outcome)
    return {(p, q): float(_inequality(P, p, q, weight))
            for i, p in enumerate(modes) for q in modes[i + 1:]}


class Significance(NamedTuple):
    T: float
    sigma: float
    significance: float


def violation_significance(counts: CountRecord, which="photon", pairs=None):
    """Violation of the chosen inequality in Poisson standard deviations per mode pair"""
    weight = _weight(which)
    total = counts.recorded
    if pairs is None:
        modes = sorted({mode for key in counts.counts for mode in key})
        pairs = [(p, q) for i, p in enumerate(modes) for q in modes[i + 1:]]
    result = {}
    for p, q in pairs:
        n_pp = counts.counts.get((p, p), 0)
        n_qq = counts.counts.get((q, q), 0)
        n_cross = counts.counts.get((p, q), 0) + counts.counts.get((q, p), 0)
        if n_pp + n_qq + n_cross == 0:
            raise ZeroCountError(f"no counts for the pair ({p}, {q})")
        excess = weight * np.sqrt(n_pp * n_qq) - n_cross / 2
        spread = np.sqrt(weight ** 2 * (n_pp + n_qq) / 4 + n_cross / 4)
        result[(p, q)] = Significance(T=float(excess / total), sigma=float(spread / total),
                                      significance=float(excess / spread))
    return result


def polarization_unitary(theta):
    """Half-wave plate at ``theta`` seen in the H/V basis, acting on m = 0"""
    plate = CIRCULAR_TO_LINEAR @ lattice.waveplate_matrix(np.pi, theta) @ CIRCULAR_TO_LINEAR.conj().T
    modes = (ModeIndex("H", 0), ModeIndex("V", 0))
    return SingleParticleUnitary(plate, modes)


def polarization_hom_scan(thetas, indistinguishability=1.0):
    """Coincidences behind a polarizing splitter for an H/V pair rotated by a half-wave plate"""
    scan = []
    for theta in np.atleast_1d(thetas):
        joint = partial_distinguishability(polarization_unitary(theta), ("H", 0), ("V", 0), indistinguishability)
        scan.append((float(theta), joint.mode_coincidence()))
    return scan


def hom_visibility(coincidences):
    values = np.array([c for _, c in coincidences]) if np.ndim(coincidences[0]) else np.asarray(coincidences)
    top = values.max()
    if top <= 0:
        raise ParameterError("visibility needs a nonzero coincidence rate")
    return float((top - values.min()) / top)

