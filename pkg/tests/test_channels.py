import dataclasses
import json
import math

import numpy as np
import pytest

from alphaneg.channels import (
    Instrument,
    KrausChannel,
    SuperOperator,
    bosonic_value,
    channel_e_alpha,
    channel_from_json,
    channel_output_state,
    choi_is_tp,
    choi_of,
    instrument_outcomes,
    is_cpptp,
    is_cpptp_instrument,
    monotonicity_check,
    random_kraus_channel,
    random_local_instrument,
    superop_matrix,
    werner_holevo_channel,
    werner_holevo_value,
)
from alphaneg.errors import NotCpptpError, OutOfDomainError
from alphaneg.linalg import BipartitionDims, tensor
from alphaneg.solver import DEFAULT_CONFIG
from alphaneg.states import max_entangled, ppt_membership, random_state, swap_operator, werner_state

DIMS22 = BipartitionDims(2, 2)
FAST = dataclasses.replace(DEFAULT_CONFIG, with_bracket=False)


def identity_channel(d):
    return KrausChannel((np.eye(d, dtype=complex),), d, d)


def depolarizing_channel(d):
    """Completely depolarizing map via the normalized Heisenberg-Weyl set."""
    w = np.exp(2j * np.pi / d)
    shift = np.roll(np.eye(d), 1, axis=0).astype(complex)
    clock = np.diag([w**k for k in range(d)])
    ops = []
    for a in range(d):
        for b in range(d):
            ops.append(np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b) / d)
    return KrausChannel(tuple(ops), d, d)


class TestChoi:
    def test_identity_channel(self):
        for d in (2, 3):
            J = choi_of(identity_channel(d))
            np.testing.assert_allclose(J, d * max_entangled(d).matrix, atol=1e-12)

    def test_depolarizing_is_product(self):
        d = 2
        J = choi_of(depolarizing_channel(d))
        np.testing.assert_allclose(J, tensor(np.eye(d), np.eye(d) / d), atol=1e-12)

    def test_random_channel_psd_and_tp(self, rng):
        ch = random_kraus_channel(3, 2, 4, seed=5)
        J = choi_of(ch)
        assert np.linalg.eigvalsh(J)[0] > -1e-12
        assert choi_is_tp(ch)

    def test_superop_choi_matches_kraus_choi(self):
        ch = random_kraus_channel(2, 3, 3, seed=9)
        sup = SuperOperator(superop_matrix(ch), ch.dim_in, ch.dim_out)
        np.testing.assert_allclose(choi_of(sup), choi_of(ch), atol=1e-12)

    def test_apply_round_trip(self, rng):
        ch = random_kraus_channel(3, 3, 2, seed=13)
        sup = SuperOperator(superop_matrix(ch), 3, 3)
        rho = random_state(BipartitionDims(1, 3), 3, seed=1).matrix
        np.testing.assert_allclose(sup.apply(rho), ch.apply(rho), atol=1e-10)


class TestIsCpptp:
    def test_local_channel_passes(self):
        k = random_kraus_channel(2, 2, 3, seed=3)
        ops = tuple(np.kron(np.eye(2), op) for op in k.kraus_ops)
        ch = KrausChannel(ops, 4, 4, DIMS22, DIMS22)
        assert is_cpptp(ch)

    def test_swap_channel_fails_complete_positivity(self):
        # the swap maps the PPT set onto itself, but its partial-transpose
        # conjugate is F (.)^T F: positive, not completely positive, so the
        # complete-preservation test must reject it (direct Choi computation
        # gives eigenvalues -1)
        swap = swap_operator(2).astype(complex)
        ch = KrausChannel((swap,), 4, 4, DIMS22, DIMS22)
        assert not is_cpptp(ch)

    def test_partial_transpose_fails_cp(self):
        # the transpose on B wrapped as a superoperator: positive but not CP
        perm = np.zeros((16, 16))
        for a in range(2):
            for b in range(2):
                for a2 in range(2):
                    for b2 in range(2):
                        row = (2 * a + b) * 4 + (2 * a2 + b2)
                        col = (2 * a + b2) * 4 + (2 * a2 + b)
                        perm[row, col] = 1.0
        sup = SuperOperator(perm, 4, 4, DIMS22, DIMS22)
        assert not is_cpptp(sup)

    def test_needs_bipartitions(self):
        ch = random_kraus_channel(4, 4, 2, seed=4)
        with pytest.raises(ValueError):
            is_cpptp(ch)


class TestInstruments:
    def test_single_element_is_channel(self):
        ch = random_kraus_channel(4, 4, 3, seed=21)
        instr = Instrument((ch,), DIMS22, DIMS22)
        rho = random_state(DIMS22, 3, seed=2)
        outs = instrument_outcomes(instr, rho)
        assert len(outs) == 1
        p, post = outs[0]
        assert p == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(post.matrix, ch.apply(rho.matrix), atol=1e-12)

    def test_projective_measurement_on_bell(self):
        p0 = np.diag([1.0, 0.0]).astype(complex)
        p1 = np.diag([0.0, 1.0]).astype(complex)
        elements = tuple(
            KrausChannel((np.kron(np.eye(2), p),), 4, 4) for p in (p0, p1)
        )
        instr = Instrument(elements, DIMS22, DIMS22)
        outs = instrument_outcomes(instr, max_entangled(2))
        assert len(outs) == 2
        for p, post in outs:
            assert p == pytest.approx(0.5, abs=1e-12)
            assert ppt_membership(post)  # outcomes are product states

    def test_random_local_instrument_normalization(self):
        instr = random_local_instrument(DIMS22, 3, seed=6, kraus_per_element=2)
        assert is_cpptp_instrument(instr)
        rho = random_state(DIMS22, 4, seed=3)
        outs = instrument_outcomes(instr, rho)
        assert sum(p for p, _ in outs) == pytest.approx(1.0, abs=1e-9)

    def test_rejects_non_tp_sum(self):
        half = KrausChannel((np.eye(4, dtype=complex) / 2,), 4, 4)
        with pytest.raises(ValueError):
            Instrument((half,), DIMS22, DIMS22)


class TestMonotonicity:
    def test_local_unitary_invariance(self):
        rng = np.random.default_rng(7)
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        u, _ = np.linalg.qr(g)
        instr = Instrument(
            (KrausChannel((np.kron(np.eye(2), u),), 4, 4),), DIMS22, DIMS22
        )
        rho = random_state(DIMS22, 2, seed=momentum_seed(0))
        lhs, rhs, slack = monotonicity_check(instr, rho, 2.0, FAST)
        assert abs(slack) < 3e-4

    def test_measure_and_discard(self):
        p0 = np.diag([1.0, 0.0]).astype(complex)
        p1 = np.diag([0.0, 1.0]).astype(complex)
        elements = tuple(
            KrausChannel((np.kron(np.eye(2), p),), 4, 4) for p in (p0, p1)
        )
        instr = Instrument(elements, DIMS22, DIMS22)
        lhs, rhs, slack = monotonicity_check(instr, max_entangled(2), 2.0, FAST)
        assert rhs == pytest.approx(0.0, abs=1e-9)
        assert lhs == pytest.approx(1.0, abs=1e-4)
        assert slack > 0.9

    def test_random_two_outcome_instrument(self):
        instr = random_local_instrument(DIMS22, 2, seed=17)
        rho = random_state(DIMS22, 2, seed=momentum_seed(1))
        _, _, slack = monotonicity_check(instr, rho, 2.0, FAST)
        assert slack >= -3e-4

    def test_rejects_non_cpptp(self):
        # a projective measurement onto the Bell basis element is the
        # canonical non-PPT-preserving operation
        bell_proj = max_entangled(2).matrix
        rest = np.eye(4, dtype=complex) - bell_proj
        instr = Instrument(
            (KrausChannel((bell_proj,), 4, 4), KrausChannel((rest,), 4, 4)),
            DIMS22,
            DIMS22,
        )
        with pytest.raises(NotCpptpError):
            monotonicity_check(instr, max_entangled(2), 2.0, FAST)


def momentum_seed(i):
    # NPT two-qubit states for the monotonicity spot checks
    from alphaneg.states import ppt_membership as is_ppt

    s = 100 + i
    while True:
        if not is_ppt(random_state(DIMS22, 2, s)):
            return s
        s += 1


class TestChannelMeasure:
    def test_identity_qubit_channel(self):
        cfg = dataclasses.replace(FAST, restarts=2)
        value = channel_e_alpha(identity_channel(2), 1.0, cfg)
        assert abs(value - 1.0) < 1e-6

    def test_depolarizing_channel_zero(self):
        cfg = dataclasses.replace(FAST, restarts=2)
        value = channel_e_alpha(depolarizing_channel(2), 2.0, cfg)
        assert abs(value) < 1e-6

    def test_output_state_shape(self):
        ch = random_kraus_channel(2, 3, 2, seed=40)
        psi = np.eye(2) / math.sqrt(2)
        state = channel_output_state(ch, psi)
        assert state.dims == BipartitionDims(2, 3)

    def test_werner_holevo_extreme(self):
        cfg = dataclasses.replace(FAST, restarts=3)
        ch = werner_holevo_channel(1.0, 2)
        value, details = channel_e_alpha(ch, 1.0, cfg, with_details=True)
        assert abs(value - 1.0) < 5e-3
        assert len(details["restart_values"]) == 3

    def test_rejects_large_input(self):
        with pytest.raises(ValueError):
            channel_e_alpha(identity_channel(5), 2.0, FAST)


class TestWernerHolevo:
    def test_choi_is_werner_state(self):
        for d in (2, 3):
            for p in (0.0, 0.5, 1.0):
                ch = werner_holevo_channel(p, d)
                np.testing.assert_allclose(
                    choi_of(ch) / d, werner_state(d, p).matrix, atol=1e-12
                )

    def test_trace_preserving(self, rng):
        ch = werner_holevo_channel(0.7, 3)
        for _ in range(5):
            g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            assert abs(np.trace(ch.apply(g)) - np.trace(g)) < 1e-10

    def test_p_zero_output_ppt(self):
        ch = werner_holevo_channel(0.0, 2)
        out = channel_output_state(ch, np.eye(2) / math.sqrt(2))
        assert ppt_membership(out)
        assert werner_holevo_value(0.0, 2) == 0.0

    def test_closed_form_values(self):
        assert werner_holevo_value(0.5, 2) == 0.0
        assert werner_holevo_value(1.0, 2) == pytest.approx(1.0, abs=1e-12)
        assert werner_holevo_value(0.9, 3) == pytest.approx(math.log2(23 / 15), abs=1e-12)

    def test_rejects_out_of_domain(self):
        with pytest.raises(OutOfDomainError):
            werner_holevo_value(1.2, 2)
        with pytest.raises(OutOfDomainError):
            werner_holevo_channel(0.5, 1)


class TestBosonic:
    def test_thermal(self):
        assert bosonic_value("thermal", (0.5, 0.25)) == pytest.approx(1.0, abs=1e-12)

    def test_additive(self):
        assert bosonic_value("additive", (0.5,)) == pytest.approx(1.0, abs=1e-12)

    def test_amplifier(self):
        assert bosonic_value("amplifier", (2.0, 0.5)) == pytest.approx(
            math.log2(1.5), abs=1e-12
        )

    def test_domain_errors(self):
        with pytest.raises(OutOfDomainError):
            bosonic_value("thermal", (0.5, 2.0))  # photon number above eta/(1-eta)
        with pytest.raises(OutOfDomainError):
            bosonic_value("amplifier", (0.5, 0.1))
        with pytest.raises(OutOfDomainError):
            bosonic_value("additive", (1.5,))
        with pytest.raises(OutOfDomainError):
            bosonic_value("squeeze", (0.5,))


class TestChannelJson:
    def test_kraus_round_trip(self, tmp_path):
        ch = random_kraus_channel(2, 2, 2, seed=15)
        payload = {
            "kind": "kraus",
            "dims_in": [2],
            "dims_out": [2],
            "data": [
                [[[float(e.real), float(e.imag)] for e in row] for row in k]
                for k in ch.kraus_ops
            ],
        }
        path = tmp_path / "chan.json"
        path.write_text(json.dumps(payload))
        from alphaneg.channels import load_channel

        back = load_channel(path)
        assert isinstance(back, KrausChannel)
        for a, b in zip(back.kraus_ops, ch.kraus_ops):
            np.testing.assert_allclose(a, b, atol=1e-15)

    def test_superop_with_bipartitions(self):
        ch = werner_holevo_channel(0.5, 2)
        payload = {
            "kind": "superop",
            "dims_in": [1, 2],
            "dims_out": [1, 2],
            "data": [[[float(e.real), float(e.imag)] for e in row] for row in ch.matrix],
        }
        back = channel_from_json(payload)
        assert isinstance(back, SuperOperator)
        assert back.bipartition_in == BipartitionDims(1, 2)

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            channel_from_json({"kind": "mystery", "dims_in": [2], "dims_out": [2], "data": []})
