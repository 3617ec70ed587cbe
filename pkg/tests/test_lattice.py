import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simulations import lattice
from simulations.lattice import PolState, QPlate, SpinOrbitState, StepSequence, WavePlate
from util.errors import NormalizationError, ParameterError, TruncationError, WindowError

HALF = 1 / np.sqrt(2)


def test_localized_state_from_pair_coin():
    state = lattice.make_localized_state(0, [HALF, [0.0, HALF]], (-4, 4))
    assert state.amplitude("L", 0) == pytest.approx(HALF)
    assert state.amplitude("R", 0) == pytest.approx(1j * HALF)
    assert state.norm == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("name, expected", [
    ("L", (1, 0)),
    ("R", (0, 1)),
    ("H", (HALF, HALF)),
    ("V", (-1j * HALF, 1j * HALF)),
])
def test_named_coins(name, expected):
    coin = PolState.from_any(name)
    np.testing.assert_allclose(coin.vector, expected, atol=1e-15)
    assert coin.is_normalized()


def test_coin_errors():
    with pytest.raises(ParameterError):
        PolState.from_any("X")
    with pytest.raises(ParameterError):
        PolState.from_any([1, 0, 0])
    with pytest.raises(NormalizationError):
        lattice.make_localized_state(0, [1, 1], (-2, 2))


def test_window_errors():
    with pytest.raises(WindowError):
        lattice.make_localized_state(5, "L", (-4, 4))
    with pytest.raises(WindowError):
        lattice.make_localized_state(0, "L", (2, 1))
    state = lattice.make_localized_state(3, "L", (-4, 4))
    with pytest.raises(WindowError):
        state.embed((-2, 2))


def test_state_is_immutable():
    state = lattice.make_localized_state(0, "L", (-2, 2))
    with pytest.raises(AttributeError):
        state.m_min = -5
    with pytest.raises(ValueError):
        state.amplitudes[0, 0] = 0


def test_state_json_document():
    state = lattice.make_localized_state(1, [HALF, [0.0, -HALF]], (-3, 3))
    doc = state.to_json()
    assert doc["m_min"] == -3 and doc["m_max"] == 3
    assert len(doc["amplitudes"]) == 14
    np.testing.assert_array_equal(SpinOrbitState.from_json(doc).amplitudes, state.amplitudes)


def test_quarter_wave_twice_is_half_wave():
    qwp = WavePlate.qwp(np.pi / 4).matrix()
    np.testing.assert_allclose(qwp @ qwp, WavePlate.hwp(np.pi / 4).matrix(), atol=1e-12)


def test_half_wave_flips_circular_polarization():
    np.testing.assert_allclose(lattice.waveplate_matrix(np.pi, 0.0) @ [1, 0], [0, -1j], atol=1e-15)


@pytest.mark.parametrize("retardance", [np.pi / 2, np.pi, 0.3, 2.5])
@pytest.mark.parametrize("axis", [0.0, np.pi / 8, np.pi / 4, 1.0])
def test_waveplate_matches_linear_jones_matrix(linear_retarder, retardance, axis):
    to_linear = np.array([[1, 1], [1j, -1j]]) / np.sqrt(2)
    expected = to_linear.conj().T @ linear_retarder(retardance, axis) @ to_linear
    circular = lattice.waveplate_matrix(retardance, axis)
    np.testing.assert_allclose(circular, expected, atol=1e-12)
    np.testing.assert_allclose(circular.conj().T @ circular, np.eye(2), atol=1e-12)


@pytest.mark.parametrize("kwargs", [
    {"charge": 0.5, "delta": 4.0},
    {"charge": 0.5, "delta": -0.1},
    {"charge": 0.3, "delta": np.pi},
    {"charge": 0.0, "delta": np.pi},
])
def test_qplate_validation(kwargs):
    with pytest.raises(ParameterError):
        QPlate(**kwargs)


def test_step_validation():
    with pytest.raises(ParameterError):
        StepSequence(())
    with pytest.raises(ParameterError):
        StepSequence((QPlate(0.5, np.pi), QPlate(1.0, np.pi)))
    with pytest.raises(ParameterError):
        StepSequence.preset("unknown")
    with pytest.raises(ParameterError):
        lattice.evolve(lattice.make_localized_state(0, "L", (-2, 2)), StepSequence.preset("wavepacket"), -1)


def test_qplate_moves_left_up_and_right_down():
    state = lattice.make_localized_state(0, "L", (-3, 3))
    out = lattice.apply_qplate(state, 0.5, np.pi)
    assert out.amplitude("R", 1) == pytest.approx(-1j)
    out = lattice.apply_qplate(lattice.make_localized_state(0, "R", (-3, 3)), 1.0, np.pi)
    assert out.amplitude("L", -2) == pytest.approx(-1j)


def test_qplate_with_zero_retardation_is_identity():
    state = lattice.make_localized_state(0, "H", (-3, 3))
    out = lattice.apply_qplate(state, 0.5, 0.0)
    np.testing.assert_array_equal(out.amplitudes, state.amplitudes)


def test_truncation_guard():
    state = lattice.make_localized_state(0, "R", (-1, 1))
    seq = StepSequence.preset("standard-paper")
    with pytest.raises(TruncationError):
        lattice.evolve(state, seq, 3)


def test_truncation_guard_covers_the_last_step(standard_seq):
    state = lattice.make_localized_state(0, "R", (-4, 4))
    assert lattice.evolve(state, standard_seq, 3)[-1].norm == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(TruncationError):
        lattice.evolve(state, standard_seq, 4)
    with pytest.raises(TruncationError):
        lattice.switched_off_walk(state, standard_seq, 6, 4)
    assert lattice.evolve(state, standard_seq, 0)[-1] is state


def test_first_standard_step(standard_seq):
    state = lattice.make_localized_state(0, "R", (-4, 4))
    dist = lattice.oam_marginal(lattice.apply_step(state, standard_seq))
    assert dist.get(-1) == pytest.approx(0.5, abs=1e-12)
    assert dist.get(1) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("coin", ["R", [HALF, [0.0, HALF]]])
@pytest.mark.parametrize("delta", [np.pi, 1.57])
def test_walk_matches_dense_oracle(dense_walk, coin, delta):
    seq = StepSequence.preset("standard-paper", delta=delta)
    window = (-8, 8)
    for n in range(7):
        state = lattice.make_localized_state(0, coin, window)
        final = lattice.evolve(state, seq, n)[-1]
        expected = dense_walk(seq, window, n) @ state.flat()
        np.testing.assert_allclose(final.flat(), expected, atol=1e-10)
    marginal = lattice.oam_marginal(lattice.evolve(lattice.make_localized_state(0, coin, window), seq, 4)[-1])
    assert marginal.total == pytest.approx(1.0, abs=1e-12)


def test_generic_step_matches_dense_oracle(dense_step, generic_seq):
    window = (-6, 6)
    state = lattice.make_localized_state(0, [0.6, [0.0, 0.8]], window)
    out = lattice.apply_step(state, generic_seq)
    np.testing.assert_allclose(out.flat(), dense_step(generic_seq, window) @ state.flat(), atol=1e-12)


def test_dense_step_is_unitary_away_from_edges(dense_step, standard_seq):
    window = (-6, 6)
    step = dense_step(standard_seq, window)
    inner = [i for i in range(2 * 13) if 1 <= i % 13 <= 11]
    block = step[:, inner]
    np.testing.assert_allclose(block.conj().T @ block, np.eye(len(inner)), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(theta=st.floats(0, np.pi), phi=st.floats(0, 2 * np.pi), delta=st.floats(0, np.pi))
def test_norm_is_conserved(theta, phi, delta):
    coin = [np.cos(theta / 2), [np.sin(theta / 2) * np.cos(phi), np.sin(theta / 2) * np.sin(phi)]]
    seq = StepSequence.preset("standard-paper", delta=delta)
    n = 20
    state = lattice.make_localized_state(0, coin, lattice.default_window(n, seq))
    for s in lattice.evolve(state, seq, n):
        assert abs(s.norm - 1.0) < 1e-12


@pytest.mark.parametrize("n", [1, 3, 4, 5, 7])
def test_unreachable_sites_stay_empty(standard_seq, n):
    state = lattice.make_localized_state(0, [HALF, [0.0, HALF]], lattice.default_window(n, standard_seq))
    dist = lattice.oam_marginal(lattice.evolve(state, standard_seq, n)[-1])
    assert lattice.odd_parity_weight(dist, n) < 1e-14


def test_hybrid_walk_can_stand_still(hybrid_seq):
    state = lattice.make_localized_state(0, "R", (-6, 6))
    dist = lattice.oam_marginal(lattice.apply_step(state, hybrid_seq))
    assert dist.get(0) > 0.1
    assert lattice.odd_parity_weight(dist, 1) > 0.1


@pytest.mark.parametrize("active", [0, 1, 2, 3])
def test_intermediate_distribution_is_switched_off_walk(standard_seq, active):
    n = 4
    state = lattice.make_localized_state(0, "R", lattice.default_window(n, standard_seq))
    intermediate = lattice.oam_marginal(lattice.evolve(state, standard_seq, active)[-1])
    switched = lattice.oam_marginal(lattice.switched_off_walk(state, standard_seq, n, active))
    np.testing.assert_allclose(switched.values, intermediate.values, atol=1e-12)
    assert standard_seq.switched_off().qplates[0].delta == 0.0


def test_full_distribution_sums_polarizations(standard_seq):
    state = lattice.evolve(lattice.make_localized_state(0, "R", (-6, 6)), standard_seq, 3)[-1]
    full = lattice.full_distribution(state)
    marginal = lattice.oam_marginal(state)
    for m, p in marginal.items():
        assert full.get(("L", m)) + full.get(("R", m)) == pytest.approx(p, abs=1e-15)


def test_coin_walker_entanglement(standard_seq):
    state = lattice.make_localized_state(0, "H", (-6, 6))
    assert lattice.coin_walker_entanglement(state) == pytest.approx(0.0, abs=1e-12)
    walked = lattice.evolve(state, standard_seq, 3)[-1]
    assert 0.0 < lattice.coin_walker_entanglement(walked) <= 1.0 + 1e-12
    np.testing.assert_allclose(np.trace(lattice.coin_density_matrix(walked)), 1.0, atol=1e-12)


def test_bell_state_is_maximally_entangled():
    amplitudes = np.zeros((2, 5), dtype=complex)
    amplitudes[0, 3] = amplitudes[1, 1] = HALF
    state = SpinOrbitState(-2, 2, amplitudes)
    assert state.amplitude("L", 1) == pytest.approx(HALF)
    assert lattice.coin_walker_entanglement(state) == pytest.approx(1.0, abs=1e-12)
    marginal = lattice.oam_marginal(state)
    assert marginal.get(-1) == pytest.approx(0.5, abs=1e-15)
    assert marginal.get(1) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("preset", ["standard-paper", "wavepacket"])
def test_switched_off_plate_keeps_walker_in_place(preset):
    seq = StepSequence.preset(preset, delta=0.0)
    state = lattice.make_localized_state(0, "R", lattice.default_window(6, seq))
    for s in lattice.evolve(state, seq, 6):
        assert lattice.oam_marginal(s).get(0) == pytest.approx(1.0, abs=1e-12)
