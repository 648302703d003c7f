import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ftqm import analytics as an
from ftqm.channels import PauliChannel, make_rng
from ftqm.protocols import (DetectionTag, PhaseValue, ProtocolParams, decide_bit, decide_digit,
                            ideal_plus_prob, pauli_detection_stats, pauli_detection_trial,
                            reconstruct, run_protocol, run_protocol_ia, run_protocol_ib,
                            run_protocol_ic, run_protocol_ii)

PI = math.pi
NOISELESS = PauliChannel(0.0)


def test_binary_bits():
    assert PhaseValue(0.3 * PI).binary_bits(4) == [0, 1, 0, 0]
    assert PhaseValue(PI / 2 + PI / 8).binary_bits(3) == [1, 0, 1]
    with pytest.raises(ValueError):
        PhaseValue(7.0)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=12))
def test_bits_round_trip(bits):
    # middle of the cell, away from float rounding at the edges
    phi = reconstruct(bits, [2] * len(bits)) + PI / 2 ** (len(bits) + 1)
    assert PhaseValue(phi).binary_bits(len(bits)) == bits


def test_params_validation():
    with pytest.raises(ValueError):
        ProtocolParams(0.0, 4, 0.1)
    with pytest.raises(ValueError):
        ProtocolParams(0.1, 0, 0.1)
    with pytest.raises(ValueError):
        ProtocolParams(0.1, 4, 1.5)
    with pytest.raises(ValueError):
        ProtocolParams(0.1, 4, 0.1, radix_plan="decimal")


def test_decide_bit_examples():
    g = PI / 32
    assert decide_bit(0.0, 0, g) == 1
    assert decide_bit(1.0, 0, g) == 0
    assert decide_bit(0.5, 0, g) is None
    assert decide_bit(0.0, 1, g) == 0
    assert decide_bit(1.0, 1, g) == 1


def test_decide_bit_boundaries():
    g = 0.2
    p_edge = ideal_plus_prob(PI / 2 - g)
    # just inside the accepted region on each side
    assert decide_bit(p_edge + 1e-9, 0, g) == 0
    assert decide_bit(p_edge - 1e-6, 0, g) is None
    assert decide_bit(ideal_plus_prob(PI / 2 + g) - 1e-9, 0, g) == 1


def test_decide_digit_regions():
    assert decide_digit(ideal_plus_prob(0.3 * PI), 0) == (0, 2)
    assert decide_digit(ideal_plus_prob(0.5 * PI), 0) == (1, 3)
    assert decide_digit(ideal_plus_prob(0.8 * PI), 0) == (1, 2)


@pytest.mark.parametrize("runner", [run_protocol_ia, run_protocol_ib])
def test_zero_phase_noiseless(runner):
    params = ProtocolParams(PI / 32, 4, 1 / 16)
    for i in range(20):
        r = runner(0.0, params, NOISELESS, make_rng(1, i))
        assert r.correct and r.digits == (0, 0, 0, 0) and r.aborted_at is None


def test_runs_are_deterministic():
    params = ProtocolParams(PI / 32, 4, 1 / 16)
    ch = PauliChannel(0.004)
    for runner in (run_protocol_ia, run_protocol_ib):
        assert runner(0.3 * PI, params, ch, make_rng(3, 7)) == runner(0.3 * PI, params, ch, make_rng(3, 7))


def test_ib_matches_ia_without_noise():
    # bit 4 at gamma = pi/32 has an unshifted band, and this phase is far from every band
    params = ProtocolParams(PI / 32, 4, 1 / 16, M=500)
    for i in range(10):
        a = run_protocol_ia(0.3 * PI, params, NOISELESS, make_rng(2, i))
        b = run_protocol_ib(0.3 * PI, params, NOISELESS, make_rng(2, i))
        assert a.digits == b.digits


def test_ib_accounting():
    params = ProtocolParams(PI / 32, 3, 1 / 8, M=200)
    r = run_protocol_ib(0.3 * PI, params, PauliChannel(0.01), make_rng(4))
    assert r.retransmissions > 0
    assert r.interrogations_full_restart >= r.interrogations
    base = sum(200 * 2 ** (j - 1) * (2 ** (j + 2) - 1) for j in (1, 2, 3))
    assert r.interrogations >= base
    clean = run_protocol_ib(0.3 * PI, params, NOISELESS, make_rng(4), reject_nontransversal=False)
    assert clean.interrogations == base and clean.retransmissions == 0


def test_ib_retransmission_rate_matches_closed_form():
    # mean failures per accepted repetition = (1 - q) / q with q the repetition acceptance
    j, M = 2, 2000
    params = ProtocolParams(PI / 32, j, 1 / 4, M=M)
    p = 0.01
    counts = []
    for i in range(40):
        r = run_protocol_ib(0.0, params, PauliChannel(p), make_rng(8, i))
        counts.append(r.retransmissions)
    q1 = (an.x_pass(p, 3) * an.z_pass(p, 3) * (1 - an.rejection_bound(3))) ** 1
    q2 = (an.x_pass(p, 4) * an.z_pass(p, 4) * (1 - an.rejection_bound(4))) ** 2
    expected = M * ((1 - q1) / q1 + (1 - q2) / q2)
    assert np.mean(counts) == pytest.approx(expected, rel=0.05)


def test_ic_requires_device_noise():
    params = ProtocolParams(PI / 32, 2, 0.25, M=100)
    with pytest.raises(ValueError):
        run_protocol_ic(0.3 * PI, params, NOISELESS, make_rng(0), None)
    r = run_protocol_ic(0.3 * PI, params, NOISELESS, make_rng(0), 1e-6)
    assert r.protocol == "Ic"


def test_nonconvergent_default_m():
    with pytest.raises(an.NonConvergentError):
        run_protocol_ia(0.3 * PI, ProtocolParams(PI / 32, 4, 1 / 16), PauliChannel(0.01), make_rng(0))


def test_ia_success_rate_below_threshold():
    p = 0.5 * an.threshold_ia(PI / 32, 4)
    params = ProtocolParams(PI / 32, 4, 1 / 16)
    ok = sum(run_protocol_ia(0.3 * PI, params, PauliChannel(p), make_rng(11, i)).correct
             for i in range(300))
    assert ok / 300 >= 1 - 1 / 16


@settings(max_examples=60, deadline=None)
@given(st.floats(0, PI, exclude_max=True))
def test_ii_noiseless_reconstruction(phi):
    params = ProtocolParams(PI / 12, 6, 1 / 16, M=10 ** 9)
    r = run_protocol_ii(phi, params, NOISELESS, make_rng(0))
    scale = math.prod(r.radices)
    assert abs(r.phi_hat - phi) < PI / scale


def test_ii_example_phase():
    params = ProtocolParams(PI / 12, 4, 1 / 16)
    r = run_protocol_ii(0.29 * PI, params, NOISELESS, make_rng(3))
    assert r.correct and abs(r.phi_hat - 0.29 * PI) < PI / math.prod(r.radices)


def test_ii_previous_digit_rule_misplaces_phase():
    # after a radix-3 digit the half plane is the prefix parity, not the last digit
    digits, radices = PhaseValue(0.72 * PI).mixed_digits(6)
    assert 0 <= 0.72 * PI - reconstruct(digits, radices) < PI / math.prod(radices)
    params = ProtocolParams(PI / 12, 6, 1 / 16, M=10 ** 9)
    good = run_protocol_ii(0.72 * PI, params, NOISELESS, make_rng(0))
    literal = run_protocol_ii(0.72 * PI, params, NOISELESS, make_rng(0), literal_half_plane=True)
    assert good.correct and not literal.correct


def test_dispatch():
    params = ProtocolParams(PI / 32, 2, 0.25, M=50)
    assert run_protocol("Ia", 0.1, params, NOISELESS, make_rng(0)).protocol == "Ia"
    with pytest.raises(ValueError):
        run_protocol("III", 0.1, params, NOISELESS, make_rng(0))


# -------------------------------------------------------------- detection sampler


def test_noiseless_detection_is_clean():
    st_ = pauli_detection_stats(4, NOISELESS, 1000, make_rng(0))
    assert st_.tags[DetectionTag.PASSED_CLEAN] == 1000
    out = pauli_detection_trial(3, NOISELESS, make_rng(0))
    assert out.tag is DetectionTag.PASSED_CLEAN


def test_detection_tags_partition_trials():
    st_ = pauli_detection_stats(3, PauliChannel(0.2), 20_000, make_rng(1), chunk=3000)
    assert sum(st_.tags.values()) == 20_000
    assert st_.x_corrupt <= st_.x_pass


def test_single_and_batch_samplers_share_statistics():
    ch = PauliChannel(0.1)
    n = 4000
    single = [pauli_detection_trial(3, ch, make_rng(5, i)) for i in range(n)]
    batch = pauli_detection_stats(3, ch, 200_000, make_rng(6))
    for name, attr in (("x_pass", "x_pass"), ("z_pass", "z_pass")):
        rate = sum(getattr(o, attr) for o in single) / n
        ref = batch.rate(name)
        assert abs(rate - ref) < 4 * math.sqrt(ref * (1 - ref) / n)
