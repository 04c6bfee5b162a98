import json
import math
import pathlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import RWA_RATIOS, displacement_by_expm, max_unitarity_error, reduced_cn_numeric
from ion_gate_lab.coupling import CouplingContext, rabi_frequency
from ion_gate_lab.dynamics import (
    ConvergenceWarning,
    JointSpace,
    Propagator,
    Pulse,
    StateVector,
    carrier_block_unitary,
    default_oracle_cutoff,
    displacement_matrix,
    numeric_propagator,
    rwa_propagator,
    sideband_block_unitary,
)

GOLDEN = pathlib.Path(__file__).parent / "golden" / "rwa_validity.json"
ETA_MAGIC = math.sqrt(0.5)


def carrier(area, eta=ETA_MAGIC, phi=0.0, ion=0):
    return Pulse(ion, 0, phi, area, CouplingContext(eta))


# ---------------------------------------------------------------- spaces


def test_single_ion_basis_order():
    assert JointSpace(1, 2).labels() == ["0d", "0u", "1d", "1u"]


def test_multi_ion_basis_is_little_endian():
    sp = JointSpace(2, 2)
    assert sp.labels()[:4] == ["0dd", "0ud", "0du", "0uu"]
    assert sp.parse_label("1du") == 1 * 4 + 2
    assert sp.parse_label("1↓↑") == sp.parse_label("1du")
    for i in range(sp.dim):
        assert sp.parse_label(sp.label(i)) == i


@pytest.mark.parametrize("label", ["x", "0", "0ddd", "5dd", "d0", "0d"])
def test_bad_labels(label):
    with pytest.raises(ValueError):
        JointSpace(2, 3).parse_label(label)


def test_space_validation():
    with pytest.raises(ValueError):
        JointSpace(0, 2)
    with pytest.raises(ValueError):
        JointSpace(1, 0)


def test_state_vector_norm_enforced():
    sp = JointSpace(1, 2)
    with pytest.raises(ValueError):
        StateVector(sp, [1, 1, 0, 0])
    s = StateVector(sp, [1, 1, 0, 0], normalize=True)
    assert s.norm() == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        StateVector(sp, [1, 0, 0])


def test_pulse_phase_reduced():
    p = carrier(1.0, phi=5 * math.pi)
    assert p.phase == pytest.approx(math.pi)
    assert carrier(1.0, phi=-math.pi / 2).phase == pytest.approx(1.5 * math.pi)
    with pytest.raises(ValueError):
        carrier(-1.0)


# --------------------------------------------------------- displacement


def test_displacement_zero_eta_is_identity():
    assert np.array_equal(displacement_matrix(0.0, 7), np.eye(7))


def test_displacement_low_levels():
    d = displacement_matrix(0.707107, 2)
    assert abs(d[0, 0]) == pytest.approx(0.778801, abs=1e-6)
    assert abs(d[1, 1]) == pytest.approx(0.389400, abs=1e-6)


def test_displacement_against_expm():
    ref = displacement_by_expm(0.5, 12)
    assert np.max(np.abs(displacement_matrix(0.5, 12) - ref)) < 1e-10


def test_displacement_magnitudes_are_rabi_frequencies():
    for eta in (0.1, 0.5, 0.707, 0.913):
        d = displacement_matrix(eta, 11)
        ctx = CouplingContext(eta)
        for n in range(11):
            for n2 in range(11):
                assert abs(d[n2, n]) == pytest.approx(abs(rabi_frequency(n, n2, ctx)), abs=1e-10)


def test_displacement_phase_is_i_power():
    d = displacement_matrix(0.3, 6)
    for n in range(6):
        for n2 in range(6):
            expected = (1j) ** abs(n2 - n) * rabi_frequency(n, n2, CouplingContext(0.3))
            assert d[n2, n] == pytest.approx(expected, abs=1e-15)


# --------------------------------------------------------------- blocks


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_carrier_full_cycles_on_ground(m):
    u = carrier_block_unitary(0, carrier(m * math.pi))
    assert np.allclose(u, (-1) ** m * np.eye(2), atol=1e-14)


def test_carrier_half_flip_on_level_one():
    # choose the area so that Omega_11 tau = pi/2
    area = (math.pi / 2) * rabi_frequency(0, 0, CouplingContext(ETA_MAGIC)) / rabi_frequency(1, 1, CouplingContext(ETA_MAGIC))
    u = carrier_block_unitary(1, carrier(area))
    out = u @ np.array([1, 0])
    assert abs(out[1]) == pytest.approx(1.0, abs=1e-14)
    assert out[1] == pytest.approx(1j, abs=1e-14)


def test_carrier_zero_area_identity():
    for n in range(5):
        assert np.array_equal(carrier_block_unitary(n, carrier(0.0)), np.eye(2))


def test_carrier_rejects_sideband():
    with pytest.raises(ValueError):
        carrier_block_unitary(0, Pulse(0, 1, 0.0, 1.0, CouplingContext(0.1)))
    with pytest.raises(ValueError):
        sideband_block_unitary(0, carrier(1.0))


def test_red_sideband_mapping_pulse():
    p = Pulse(0, -1, 0.0, math.pi / 2, CouplingContext(ETA_MAGIC))
    u = sideband_block_unitary(1, p)
    out = u @ np.array([1, 0])  # |1, d> -> |0, u>
    assert abs(out[0]) == pytest.approx(0.0, abs=1e-15)
    assert abs(out[1]) == pytest.approx(1.0, abs=1e-15)
    assert sideband_block_unitary(0, p).shape == (1, 1)
    assert sideband_block_unitary(3, Pulse(0, 1, 0.0, 1.0, CouplingContext(0.2)), fock_cutoff=4).shape == (1, 1)
    assert np.array_equal(sideband_block_unitary(0, Pulse(0, 1, 0.0, 0.0, CouplingContext(0.2))), np.eye(2))


# -------------------------------------------------------- rwa propagator


def test_rwa_zero_area_identity():
    sp = JointSpace(2, 4)
    for s in (-1, 0, 1):
        u = rwa_propagator(Pulse(1, s, 0.3, 0.0, CouplingContext(0.4)), sp)
        assert np.array_equal(u.matrix, np.eye(sp.dim))


def test_rwa_single_pulse_cn_matrix():
    u = rwa_propagator(carrier(math.pi), JointSpace(1, 2)).matrix
    expected = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, -1j], [0, 0, -1j, 0]])
    assert np.max(np.abs(-u - expected)) < 1e-12


def test_rwa_carrier_never_changes_fock_level():
    sp = JointSpace(2, 6)
    u = rwa_propagator(carrier(2.3, eta=0.6, phi=1.1, ion=1), sp).matrix
    for i in range(sp.dim):
        for j in range(sp.dim):
            if i // sp.n_spin != j // sp.n_spin:
                assert u[i, j] == 0


def test_rwa_acts_only_on_target_ion():
    sp = JointSpace(2, 3)
    p = carrier(1.234, eta=0.4, phi=0.7, ion=1)
    u = rwa_propagator(p, sp).matrix
    # on a fixed Fock level the operator is (block on ion 1) x identity(ion 0)
    for n in range(3):
        blk = carrier_block_unitary(n, p)
        expected = np.kron(blk, np.eye(2))
        sl = slice(n * 4, (n + 1) * 4)
        assert np.allclose(u[sl, sl], expected, atol=1e-15)


def test_rwa_target_out_of_range():
    with pytest.raises(ValueError):
        rwa_propagator(carrier(1.0, ion=2), JointSpace(2, 2))


pulses = st.builds(
    lambda ion, s, phi, area, eta: Pulse(ion, s, phi, area, CouplingContext(eta)),
    ion=st.integers(0, 1),
    s=st.integers(-2, 2),
    phi=st.floats(-10, 10),
    area=st.floats(0, 20),
    eta=st.floats(0.01, 1.5),
)


@settings(max_examples=100, deadline=None)
@given(p=pulses)
def test_rwa_unitary(p):
    u = rwa_propagator(p, JointSpace(2, 5))
    assert u.unitarity_error() < 1e-12


@settings(max_examples=50, deadline=None)
@given(p=pulses, seed=st.integers(0, 2**32 - 1))
def test_norm_preserved(p, seed):
    sp = JointSpace(2, 5)
    rng = np.random.default_rng(seed)
    state = StateVector(sp, rng.normal(size=sp.dim) + 1j * rng.normal(size=sp.dim), normalize=True)
    out = rwa_propagator(p, sp).apply(state)
    assert abs(out.norm() - 1.0) < 1e-12


def test_propagator_composition_checks_space():
    a = Propagator.identity(JointSpace(1, 2))
    b = Propagator.identity(JointSpace(1, 3))
    with pytest.raises(ValueError):
        a @ b
    with pytest.raises(ValueError):
        a.apply(StateVector.basis(JointSpace(1, 3), "0d"))


# ----------------------------------------------------- numeric propagator


def test_default_cutoff():
    assert default_oracle_cutoff(1) == 12


def test_numeric_matches_rwa_without_motion():
    sp = JointSpace(1, 6)
    p = carrier(3.1, eta=1e-8, phi=0.4)
    num = numeric_propagator(p, sp, 1000.0, 128)
    assert np.max(np.abs(num.matrix - rwa_propagator(p, sp).matrix)) < 1e-9
    assert num.converged


def test_numeric_cross_checks_carrier_block():
    area = (math.pi / 2) / (1 - ETA_MAGIC**2)
    p = carrier(area)
    num = numeric_propagator(p, JointSpace(1, 12), 1e4, 256)
    amp = num.matrix[3, 2]  # |1, d> -> |1, u>
    assert abs(amp) == pytest.approx(1.0, abs=1e-3)
    assert amp == pytest.approx(carrier_block_unitary(1, p)[1, 0], abs=1e-3)


def test_numeric_cross_checks_mapping_pulse():
    p = Pulse(0, -1, 0.0, math.pi / 2, CouplingContext(ETA_MAGIC))
    num = numeric_propagator(p, JointSpace(1, 12), 1e4, 256)
    rwa = rwa_propagator(p, JointSpace(1, 12))
    assert abs(num.matrix[1, 2]) == pytest.approx(1.0, abs=1e-3)
    assert np.max(np.abs(num.matrix[:4, :4] - rwa.matrix[:4, :4])) < 5e-3


def test_numeric_reduced_cn_close_to_rwa():
    prop, report = reduced_cn_numeric(1e3)
    assert report.infidelity < 1e-4
    assert prop.unitarity_error() < 1e-12
    assert prop.leakage < 1e-10


def test_numeric_step_doubling_converged():
    prop, _ = reduced_cn_numeric(1e3)
    assert prop.step_change < 1e-9
    assert prop.converged


def test_numeric_flags_coarse_steps():
    with pytest.warns(ConvergenceWarning):
        prop = numeric_propagator(carrier(math.pi), JointSpace(1, 12), 100.0, 16)
    assert not prop.converged
    assert prop.step_change > 1e-8


def test_numeric_flags_small_cutoff():
    with pytest.warns(ConvergenceWarning):
        prop = numeric_propagator(carrier(math.pi), JointSpace(1, 3), 1000.0, 64)
    assert math.isnan(prop.leakage)


def test_numeric_argument_checks():
    with pytest.raises(ValueError):
        numeric_propagator(carrier(1.0), JointSpace(1, 4), 0.0)
    with pytest.raises(ValueError):
        numeric_propagator(carrier(1.0), JointSpace(1, 4), 10.0, 0)


def test_rwa_limit_golden():
    golden = json.loads(GOLDEN.read_text())
    infid = []
    for row, r in zip(golden["rows"], RWA_RATIOS):
        assert row["omega_over_g"] == r
        prop, report = reduced_cn_numeric(r)
        assert report.infidelity == pytest.approx(row["infidelity"], rel=1e-6)
        assert prop.step_change < 1e-9
        infid.append(report.infidelity)
    assert infid[0] > infid[1] > infid[2]


def test_numeric_propagators_unitary():
    for r in RWA_RATIOS:
        prop, _ = reduced_cn_numeric(r)
        assert max_unitarity_error(prop.matrix) < 1e-12
