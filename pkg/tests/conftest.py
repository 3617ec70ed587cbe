import numpy as np
import pytest

from simulations.lattice import QPlate, StepSequence, WavePlate
from util import util


def _dense_element(element, size):
    """Element acting on the flattened (pol-major) amplitudes of a window of ``size`` sites"""
    eye = np.eye(size)
    if isinstance(element, WavePlate):
        c, s = np.cos(element.retardance / 2), np.sin(element.retardance / 2)
        t = element.axis_angle
        coin = np.array([[c, -1j * s * np.exp(-2j * t)], [-1j * s * np.exp(2j * t), c]])
        return np.kron(coin, eye)
    c, s = np.cos(element.delta / 2), np.sin(element.delta / 2)
    d = element.shift
    up = np.eye(size, k=-d)      # (up @ a)[m] = a[m - d]
    down = np.eye(size, k=d)
    a0 = element.alpha0
    return np.block([
        [c * eye, -1j * s * np.exp(-2j * a0) * down],
        [-1j * s * np.exp(2j * a0) * up, c * eye],
    ])


def _dense_step(seq, window):
    size = window[1] - window[0] + 1
    step = np.eye(2 * size, dtype=complex)
    for element in seq.elements:
        step = _dense_element(element, size) @ step
    return step


def _linear_retarder(retardance, axis_angle):
    """Textbook H/V Jones matrix R(-t) diag(exp(-i d/2), exp(i d/2)) R(t)"""
    c, s = np.cos(axis_angle), np.sin(axis_angle)
    rot = np.array([[c, s], [-s, c]])
    core = np.diag([np.exp(-0.5j * retardance), np.exp(0.5j * retardance)])
    return rot.T @ core @ rot


@pytest.fixture
def dense_step():
    """Independent one-step walk operator built from Kronecker products"""
    return _dense_step


@pytest.fixture
def dense_walk():
    def walk(seq, window, n):
        return np.linalg.matrix_power(_dense_step(seq, window), n)
    return walk


@pytest.fixture
def linear_retarder():
    return _linear_retarder


@pytest.fixture
def standard_seq():
    return StepSequence.preset("standard-paper")


@pytest.fixture
def packet_seq():
    return StepSequence.preset("wavepacket")


@pytest.fixture
def hybrid_seq():
    return StepSequence.preset("standard-paper", delta=1.57)


@pytest.fixture
def generic_seq():
    return StepSequence((WavePlate(0.7, 0.3), QPlate(0.5, 2.1, 0.4), WavePlate.hwp(1.1)))


@pytest.fixture(autouse=True)
def output_dir(tmp_path):
    """Every test writes into its own directory"""
    previous = dict(util.options)
    util.update_options({"output": str(tmp_path / "dist"), "workers": 1})
    yield tmp_path / "dist"
    util.options.update(previous)
    util.Paths.OUTPUT = previous["output"] or None
