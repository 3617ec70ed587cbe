import numpy as np
import pytest
from scipy import integrate

from simulations import lattice, metrics, photonics, wavepacket
from simulations.metrics import ProbDist
from util.errors import AmplitudeRangeError, ParameterError, ZeroEfficiencyError

GRID = photonics.HologramGrid(width=256, height=256, pitch=8e-6)
W0 = 4e-4


def test_lg_radial_modes_are_orthonormal():
    for m in (0, 1, 3):
        gram = np.array([[photonics.radial_overlap(lambda r, p=p: photonics.lg_reduced(p, m, r, 0.0),
                                                   lambda r, q=q: photonics.lg_reduced(q, m, r, 0.0))
                          for q in range(6)] for p in range(6)])
        np.testing.assert_allclose(gram, np.eye(6), atol=1e-8)


def test_lg_mode_power_over_the_plane():
    w0, wavelength, z = 1e-3, 8e-7, 0.7
    w = w0 * np.sqrt(1 + (z / photonics.rayleigh_range(w0, wavelength)) ** 2)

    def density(phi, r):
        return abs(photonics.lg_amplitude(0, 1, r, phi, z, w0, wavelength)) ** 2 * r

    power, _ = integrate.dblquad(density, 0.0, 8 * w, 0.0, 2 * np.pi, epsabs=1e-11, epsrel=1e-10)
    assert power == pytest.approx(1.0, abs=1e-8)


def test_lg_parameter_check():
    with pytest.raises(ParameterError):
        photonics.lg_amplitude(-1, 0, 0.1, 0.0, 0.0, 1.0, 1.0)


@pytest.mark.parametrize("m, expected", [
    (0, [0.785, 0.098, 0.037, 0.019]),
    (1, [0.884, 0.074, 0.021, 0.009]),
    (2, [0.920, 0.058, 0.013, 0.004]),
    (3, [0.940, 0.047, 0.009, 0.003]),
])
def test_qplate_radial_coefficients(m, expected):
    expansion = photonics.qplate_radial_coefficients(m, 3)
    np.testing.assert_allclose(expansion.powers, expected, atol=0.005)
    assert expansion.residual >= -1e-9
    assert [p for p, _ in expansion.rows()] == [0, 1, 2, 3]


def test_lowest_coefficient_for_gaussian_input():
    assert photonics.qplate_radial_coefficients(0, 0).powers[0] == pytest.approx(np.pi / 4, abs=1e-8)


def test_qplate_coefficients_converge():
    residuals = [photonics.qplate_radial_coefficients(1, p_max).residual for p_max in (1, 4, 12)]
    assert residuals[0] > residuals[1] > residuals[2] >= -1e-9


def test_hygg_pupil_limit_is_normalized():
    for p, m in ((-1, 1), (-1, 2), (0, 3)):
        norm = photonics.radial_overlap(lambda r: photonics.hygg_amplitude(p, m, r, 0.0),
                                        lambda r: photonics.hygg_amplitude(p, m, r, 0.0))
        assert norm.real == pytest.approx(1.0, abs=1e-8)


def test_hygg_stays_normalized_while_propagating():
    zeta = 0.3
    rho_max = photonics.RHO_MAX * np.sqrt(1 + zeta ** 2)
    norm = photonics.radial_overlap(lambda r: photonics.hygg_amplitude(-1, 2, r, zeta),
                                    lambda r: photonics.hygg_amplitude(-1, 2, r, zeta), rho_max=rho_max)
    assert norm.real == pytest.approx(1.0, abs=1e-4)


def test_hygg_index_check():
    with pytest.raises(ParameterError):
        photonics.hygg_amplitude(-3, 1, 0.5, 0.0)


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_pupil_plane_keeps_input_profile(m):
    report = photonics.pupil_plane_action(m)
    assert report.holds
    assert report.overlap == pytest.approx(1.0, abs=1e-8)


def test_pupil_overlap_away_from_the_plate():
    assert photonics.pupil_overlap(0, 0.1) == pytest.approx(0.93, abs=0.01)
    overlaps = [photonics.pupil_overlap(0, zeta) for zeta in (0.0, 0.05, 0.1, 0.2, 0.3)]
    assert all(a > b for a, b in zip(overlaps, overlaps[1:]))
    with pytest.raises(ParameterError):
        photonics.pupil_overlap(0, -0.1)


def test_gouy_walk(standard_seq):
    state = lattice.make_localized_state(0, "R", lattice.default_window(4, standard_seq))
    plain = lattice.evolve(state, standard_seq, 4)
    flat = photonics.gouy_walk(state, standard_seq, 4, 0.0)
    np.testing.assert_allclose(flat[-1].amplitudes, plain[-1].amplitudes, atol=1e-15)

    dephased = photonics.gouy_walk(state, standard_seq, 4, 1.0)
    assert all(abs(s.norm - 1.0) < 1e-12 for s in dephased)
    assert metrics.tvd(lattice.oam_marginal(dephased[-1]), lattice.oam_marginal(plain[-1])) > 1e-6
    np.testing.assert_allclose(np.abs(photonics.gouy_phases(np.arange(-3, 4), 0.5)), 1.0, atol=1e-15)
    with pytest.raises(ParameterError):
        photonics.gouy_walk(state, standard_seq, 4, -0.1)


def test_gouy_phase_between_steps():
    phases = photonics.gouy_phases(np.array([-1, 0, 1]), 0.01)
    np.testing.assert_allclose(np.angle(phases), [-0.0200, 0.0, -0.0200], atol=1e-5)


def test_gouy_dephasing_grows_with_plate_distance(standard_seq):
    n = 10
    state = lattice.make_localized_state(0, "R", lattice.default_window(n, standard_seq))
    plain = lattice.oam_marginal(lattice.evolve(state, standard_seq, n)[-1])
    near, far = (metrics.similarity(lattice.oam_marginal(photonics.gouy_walk(state, standard_seq, n, d)[-1]), plain)
                 for d in (0.01, 0.5))
    assert near > 0.999
    assert near > far


def test_efficiency_correction_round_trip():
    truth = ProbDist({-2: 0.1, -1: 0.2, 0: 0.4, 1: 0.2, 2: 0.1})

    def eta(m):
        return 1 / (1 + abs(m))

    detected = ProbDist({m: p * eta(m) for m, p in truth.items()}, subnormalized=True).normalized()
    corrected = photonics.efficiency_correction(detected, eta)
    np.testing.assert_allclose(corrected.values, truth.values, atol=1e-12)
    assert corrected.total == pytest.approx(1.0, abs=1e-12)
    mapped = photonics.efficiency_correction(detected, {str(m): eta(m) for m in range(-2, 3)})
    np.testing.assert_allclose(mapped.values, truth.values, atol=1e-12)


def test_efficiency_errors():
    dist = ProbDist({0: 0.5, 1: 0.5})
    with pytest.raises(ZeroEfficiencyError):
        photonics.efficiency_correction(dist, {0: 1.0, 1: 0.0})
    with pytest.raises(ZeroEfficiencyError):
        photonics.efficiency_correction(dist, {0: 1.0})
    with pytest.raises(ParameterError):
        photonics.efficiency_correction(dist, lambda m: 1.5)


def test_inverse_sinc():
    a = np.array([0.0, 0.2, 0.5, 0.9, 1.0])
    x = photonics.inverse_sinc(a)
    np.testing.assert_allclose(np.sinc(x / np.pi), a, atol=1e-9)
    assert np.all((x >= -np.pi) & (x <= 0))
    assert x[0] == pytest.approx(-np.pi, abs=1e-9)
    with pytest.raises(AmplitudeRangeError):
        photonics.inverse_sinc([1.5])


def test_uniform_amplitude_gives_flat_mask():
    ones = np.ones((GRID.height, GRID.width))
    hologram = photonics.make_hologram(ones, np.zeros_like(ones), GRID)
    np.testing.assert_allclose(hologram.phase, np.pi, atol=1e-8)


def test_zero_amplitude_gives_zero_mask():
    zeros = np.zeros((GRID.height, GRID.width))
    hologram = photonics.make_hologram(zeros, np.full_like(zeros, 2.0), GRID, carrier=15625.0)
    np.testing.assert_allclose(hologram.phase, 0.0, atol=1e-8)


def test_first_order_carries_target_phase():
    grid = photonics.HologramGrid(width=256, height=2, pitch=8e-6)
    carrier = 16 / (grid.width * grid.pitch)
    ones = np.ones((grid.height, grid.width))
    orders = []
    for target in (0.0, 1.1):
        hologram = photonics.make_hologram(ones, np.full_like(ones, target), grid, carrier=carrier)
        orders.append(np.fft.fft(np.exp(1j * hologram.phase[0]))[16])
    assert abs(orders[0]) == pytest.approx(grid.width, rel=1e-6)
    assert np.angle(orders[1] / orders[0]) == pytest.approx(1.1, abs=1e-6)


@pytest.mark.parametrize("m", [3, -2, 1])
@pytest.mark.parametrize("carrier", [0.0, 15625.0])
def test_fork_dislocation(m, carrier):
    amplitude, phase = photonics.oam_field(m, GRID, W0)
    hologram = photonics.make_hologram(amplitude, phase, GRID, carrier=carrier)
    assert np.all((hologram.phase >= 0) & (hologram.phase < 2 * np.pi))
    assert photonics.dislocation_order(hologram, W0 * np.sqrt(abs(m) / 2)) == m
    levels = hologram.graylevels()
    assert levels.dtype == np.uint8 and levels.shape == (256, 256)


def test_dislocation_circle_must_fit():
    amplitude, phase = photonics.oam_field(1, GRID, W0)
    hologram = photonics.make_hologram(amplitude, phase, GRID)
    with pytest.raises(ParameterError):
        photonics.dislocation_order(hologram, 1.0)


def test_field_shape_checks():
    with pytest.raises(ParameterError):
        photonics.make_hologram(np.ones((4, 4)), np.zeros((4, 4)), GRID)
    with pytest.raises(ParameterError):
        photonics.HologramGrid(0, 10, 1e-5)


def test_wavepacket_field(packet_seq, standard_seq):
    state = wavepacket.make_wavepacket(wavepacket.WavepacketSpec(2.0, np.pi / 2), packet_seq)
    amplitude, phase = photonics.wavepacket_field(state, GRID, W0)
    assert amplitude.max() == pytest.approx(1.0)
    assert amplitude.min() >= 0
    walked = lattice.evolve(lattice.make_localized_state(0, "H", (-5, 5)), standard_seq, 3)[-1]
    with pytest.raises(ParameterError):
        photonics.wavepacket_field(walked, GRID, W0)
    amplitude, _ = photonics.wavepacket_field(walked, GRID, W0, pol="L")
    assert amplitude.max() == pytest.approx(1.0)
