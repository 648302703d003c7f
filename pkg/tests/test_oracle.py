import cmath
import math

import numpy as np
import pytest

from ftqm import analytics as an
from ftqm import oracle as sv

PI = math.pi


def wrap(a):
    return abs((a + PI) % (2 * PI) - PI)


def test_logical_zero_support():
    s = sv.prepare_logical(3, 0)
    assert len(s.amplitudes) == 8
    assert all(abs(a - 1 / math.sqrt(8)) < 1e-15 for a in s.amplitudes.values())
    one = sv.prepare_logical(3, 1)
    assert not set(s.amplitudes) & set(one.amplitudes)
    s4 = sv.prepare_logical(4, 0)
    assert len(s4.amplitudes) == 16 and s4.norm_sq() == pytest.approx(1.0)


def test_zero_codewords_have_expected_weights():
    weights = sorted(w.bit_count() for w in sv.prepare_logical(3, 0).amplitudes)
    assert weights == [0] + [4] * 7


def test_rotation_identity_cases():
    s = sv.prepare_plus(3)
    r0 = sv.apply_transversal_rz(s, 0.0)
    assert r0.amplitudes == s.amplitudes
    r2 = sv.apply_transversal_rz(s, 2 * PI)
    # global factor (-1)^n only
    for w, a in s.amplitudes.items():
        assert r2.amplitudes[w] == pytest.approx(-a, abs=1e-14)


def test_rotation_relative_phase_on_zero():
    r = sv.apply_transversal_rz(sv.prepare_logical(3, 0), PI / 4)
    a0 = r.amplitudes[0]
    heavy = next(w for w in r.amplitudes if w.bit_count() == 4)
    assert wrap(cmath.phase(r.amplitudes[heavy] / a0) - PI) < 1e-12


def test_projection_of_code_states():
    s, acc = sv.project_code_space(sv.prepare_logical(3, 0))
    assert acc == pytest.approx(1.0)
    assert s.amplitudes.keys() == sv.prepare_logical(3, 0).amplitudes.keys()
    bad = sv.apply_pauli_x(sv.prepare_logical(3, 0), 1)
    assert sv.project_code_space(bad)[1] == 0.0


def test_projection_idempotent():
    s = sv.apply_transversal_rz(sv.prepare_plus(4), 0.7)
    once, acc = sv.project_code_space(s)
    assert acc < 1
    assert sv.project_code_space(once)[1] == pytest.approx(1.0, abs=1e-12)


def test_relative_phase_examples():
    assert sv.measure_relative_phase(sv.prepare_plus(3)) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        sv.measure_relative_phase(sv.prepare_logical(3, 0))
    assert wrap(sv.postselected_phase(3, PI / 16) - an.logical_shift(PI / 16, 3)) < 1e-10
    assert wrap(sv.postselected_phase(6, PI / 32) - an.logical_shift(PI / 32, 6)) < 1e-10


def test_transversal_t_gives_logical_t_dagger():
    # T = diag(1, e^{i pi/4}) equals R_z(pi/4) up to a global phase
    s = sv.apply_transversal_rz(sv.prepare_plus(4), PI / 4)
    phase = sv.measure_relative_phase(sv.project_code_space(s)[0])
    assert wrap(phase + PI / 4) < 1e-12


@pytest.mark.parametrize("m", [3, 4])
def test_dense_and_sparse_agree(m):
    rng = np.random.default_rng(m)
    for phi in rng.uniform(0, 2 * PI, 20):
        assert wrap(sv.postselected_phase(m, phi) - sv.postselected_phase(m, phi, dense=True)) < 1e-12
        assert sv.rejection_probability(m, phi) == pytest.approx(
            sv.rejection_probability(m, phi, dense=True), abs=1e-12)


def test_dense_limit():
    with pytest.raises(ValueError):
        sv.prepare_plus(5, dense=True)


def test_rejection_examples():
    assert sv.rejection_probability(3, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert sv.rejection_probability(4, PI / 16) <= 1 - (7 / 8) ** 4
    assert sv.rejection_probability(3, 3 * PI / 2) > 0


@pytest.mark.parametrize("m", [3, 4, 5])
def test_each_syndrome_step_within_bound(m):
    state = sv.apply_transversal_rz(sv.prepare_plus(m), -1.1)
    _, _, steps = sv.project_code_space(state, return_steps=True)
    assert len(steps) == m
    assert min(steps) >= 1 - 1 / 2 ** (m - 1) - 1e-12
