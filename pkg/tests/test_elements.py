import itertools
import pickle

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqed.composite import Act, BinarySystem, make_composite
from cqed.elements import (MODE_VARIANTS, QBIT_VARIANTS, JaynesCummings, ParsJC, ParsMode,
                           ParsQbit, Picture, coherent, fock, make_jaynes_cummings, make_mode,
                           make_qbit, make_ternary_demo, mode_init, qbit_init, state0, state1)
from cqed.qdata import QuantumDataError
from cqed.qop import apply_tridiagonal

from conftest import random_complex

EXPECTED_MODE_VARIANTS = {"Mode", "ModeSch", "PumpedMode", "PumpedModeSch", "LossyMode",
                       "LossyModeUIP", "LossyModeSch", "PumpedLossyMode", "PumpedLossyModeUIP",
                       "PumpedLossyModeSch"}


def test_exactly_ten_variants_per_family():
    assert set(MODE_VARIANTS) == EXPECTED_MODE_VARIANTS
    assert set(QBIT_VARIANTS) == {n.replace("Mode", "Qbit") for n in EXPECTED_MODE_VARIANTS}


@pytest.mark.parametrize("kappa,eta,picture,expected", [
    (0, 0, Picture.UIP, "Mode"), (0, 0, Picture.IP, "Mode"), (0, 0, Picture.Sch, "ModeSch"),
    (0, 1j, Picture.IP, "PumpedMode"), (0, 1j, Picture.Sch, "PumpedModeSch"),
    (0.1, 0, Picture.IP, "LossyMode"), (0.1, 0, Picture.UIP, "LossyModeUIP"),
    (0.1, 0, Picture.Sch, "LossyModeSch"), (0.1, 2, Picture.IP, "PumpedLossyMode"),
    (0.1, 2, Picture.UIP, "PumpedLossyModeUIP"), (0.1, 2, Picture.Sch, "PumpedLossyModeSch"),
])
def test_mode_dispatch(kappa, eta, picture, expected):
    mode = make_mode(ParsMode(kappa=kappa, eta=eta, cutoff=4), picture)
    assert type(mode).__name__ == expected
    assert make_mode(ParsMode(kappa=kappa, eta=eta, cutoff=4), picture.value).__class__ is type(mode)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([0.0, 0.3]), st.sampled_from([0j, 0.5 - 1j]), st.sampled_from(list(Picture)),
       st.floats(-2, 2), st.sampled_from(["mode", "qbit"]))
def test_dispatch_purity(loss, eta, picture, delta, family):
    if family == "mode":
        e = make_mode(ParsMode(delta=delta, kappa=loss, eta=eta, cutoff=3), picture)
    else:
        e = make_qbit(ParsQbit(delta=delta, gamma=loss, eta=eta), picture)
    assert (len(e.jumps) == 0) == (loss == 0)
    assert (e.propagator is None) == (picture is Picture.Sch)


def test_pumped_lossy_uip_keeps_loss_in_hamiltonian():
    mode = make_mode(ParsMode(delta=0.5, kappa=0.2, eta=1.0, cutoff=5), Picture.UIP)
    assert type(mode).__name__ == "PumpedLossyModeUIP"
    assert mode.propagator.unitary
    h = make_composite([mode]).dense_hamiltonian()
    np.testing.assert_allclose(np.diag(h), -1j * 0.2 * np.arange(5), atol=1e-15)


def test_qbit_dispatch():
    assert type(make_qbit(ParsQbit())).__name__ == "Qbit"
    lossy = make_qbit(ParsQbit(gamma=0.3))
    [ch] = lossy.jumps
    np.testing.assert_allclose(ch.operator.dense((2,)), np.sqrt(0.6) * np.array([[0, 1], [0, 0]]))
    assert make_qbit(ParsQbit(gamma=0.3), Picture.Sch).propagator is None


def test_parameter_validation():
    with pytest.raises(ValueError):
        ParsMode(cutoff=1)
    with pytest.raises(ValueError):
        ParsMode(kappa=-1)
    with pytest.raises(ValueError):
        ParsQbit(gamma=-0.1)


def test_variants_pickle():
    mode = make_mode(ParsMode(kappa=0.1, eta=1, cutoff=4), Picture.UIP)
    clone = pickle.loads(pickle.dumps(mode))
    assert type(clone) is type(mode)
    np.testing.assert_array_equal(clone.propagator.exponents, mode.propagator.exponents)


# --- states --------------------------------------------------------------------------

def test_coherent_states():
    np.testing.assert_array_equal(coherent(0, 5).data, [1, 0, 0, 0, 0])
    for alpha in (0.3, 1 + 1j, 2.5):
        assert np.linalg.norm(coherent(alpha, 12).data) == pytest.approx(1, abs=1e-14)
    c = coherent(1.0, 16).data
    assert c[1] / c[0] == pytest.approx(1.0)
    assert c[2] / c[0] == pytest.approx(1 / np.sqrt(2))


def test_mode_init_precedence():
    np.testing.assert_array_equal(mode_init(ParsMode(minit=2.0, minitFock=3, cutoff=10)).data,
                                  fock(3, 10).data)
    np.testing.assert_allclose(mode_init(ParsMode(minit=0.5, cutoff=10)).data,
                               coherent(0.5, 10).data)
    # Fock 0 given explicitly still overrides minit
    np.testing.assert_array_equal(
        mode_init(ParsMode(minit=2.0, minitFock=0, minitFock_set=True, cutoff=10)).data,
        fock(0, 10).data)
    with pytest.raises(QuantumDataError, match="Fock index exceeds cutoff"):
        mode_init(ParsMode(minitFock=12, cutoff=10))


def test_qbit_states():
    np.testing.assert_array_equal(state0().data, [1, 0])
    np.testing.assert_array_equal(state1().data, [0, 1])
    np.testing.assert_allclose(qbit_init(ParsQbit(qbitInit=(1, 1))).data, [2**-0.5, 2**-0.5])
    with pytest.raises(QuantumDataError):
        qbit_init(ParsQbit(qbitInit=(0, 0)))


# --- interactions ---------------------------------------------------------------------

def jc_dense(g, cutoff):
    a = np.diag(np.sqrt(np.arange(1, cutoff)), 1)
    sigma = np.array([[0, 1], [0, 0]])
    return 1j * (np.conj(g) * np.kron(sigma.T, a) - g * np.kron(sigma, a.T))


def test_jc_zero_coupling_has_no_terms():
    jc = JaynesCummings(make_qbit(ParsQbit()), make_mode(ParsMode(cutoff=3)), 0)
    assert jc.hamiltonian_terms == ()


def test_jc_couples_excited_vacuum_only_to_ground_one():
    g = 0.8
    qbit, mode = make_qbit(ParsQbit(), Picture.Sch), make_mode(ParsMode(cutoff=4), Picture.Sch)
    system = BinarySystem(make_jaynes_cummings(qbit, mode, ParsJC(g)))
    psi = np.zeros((2, 4), dtype=complex)
    psi[1, 0] = 1
    out = np.zeros_like(psi)
    system.add_hamiltonian(0.0, psi, out)
    expected = np.zeros_like(psi)
    expected[0, 1] = -1j * (-1j * g)
    np.testing.assert_allclose(out, expected, atol=1e-15)
    h = system.dense_hamiltonian()
    np.testing.assert_allclose(h, jc_dense(g, 4), atol=1e-13)
    np.testing.assert_allclose(h, h.conj().T, atol=0)


def test_jc_with_complex_coupling_is_hermitian():
    g = 0.3 - 1.1j
    jc = JaynesCummings(make_qbit(ParsQbit()), make_mode(ParsMode(cutoff=5)), g)
    h = sum(t.dense((2, 5)) for t in jc.hamiltonian_terms)
    np.testing.assert_allclose(h, jc_dense(g, 5), atol=1e-13)
    np.testing.assert_allclose(h, h.conj().T, atol=1e-15)


def test_ternary_demo():
    frees = [make_qbit(ParsQbit()), make_qbit(ParsQbit()), make_qbit(ParsQbit())]
    assert make_ternary_demo(*frees, 0).hamiltonian_terms == ()
    tern = make_ternary_demo(*frees, 0.4 + 0.1j)
    sys3 = make_composite(frees, Act(0, 1, 2, tern))
    psi = np.zeros((2, 2, 2), dtype=complex)
    psi[1, 1, 1] = 1
    out = np.zeros_like(psi)
    sys3.add_hamiltonian(0.0, psi, out)
    assert np.count_nonzero(out) == 1 and out[0, 0, 0] != 0


def test_ternary_dense_oracle(rng):
    dims = (2, 3, 2)
    frees = [make_qbit(ParsQbit()), make_mode(ParsMode(cutoff=3)), make_qbit(ParsQbit())]
    c = 0.7 - 0.2j
    tern = make_ternary_demo(*frees, c)
    ops = [np.diag(np.sqrt(np.arange(1, d)), 1) for d in dims]
    low = np.kron(np.kron(ops[0], ops[1]), ops[2])
    oracle = c * low + np.conj(c) * low.conj().T
    h = sum(t.dense(dims) for t in tern.hamiltonian_terms)
    np.testing.assert_allclose(h, oracle, atol=1e-13)
    system = make_composite(frees, Act(0, 1, 2, tern))
    x = random_complex(rng, dims)
    out = np.zeros_like(x)
    system.add_hamiltonian(0.0, x, out)
    np.testing.assert_allclose(out.reshape(-1), -1j * oracle @ x.reshape(-1), atol=1e-13)


@pytest.mark.parametrize("dim", range(2, 9))
def test_every_element_operator_matches_dense(rng, dim):
    pars = [ParsMode(delta=0.3, kappa=0.2, eta=0.5j, cutoff=dim)]
    elements = [make_mode(p, pic) for p, pic in itertools.product(pars, Picture)]
    if dim == 2:
        elements += [make_qbit(ParsQbit(0.1, 0.4, 1 - 1j), pic) for pic in Picture]
    for e in elements:
        ops = [f for term in e.hamiltonian_terms for f in term.factors.values()]
        ops += [f for ch in e.jumps for f in ch.operator.factors.values()]
        for op in ops:
            x = random_complex(rng, dim)
            acc = np.zeros(dim, dtype=complex)
            apply_tridiagonal(op, 0, x, acc)
            np.testing.assert_allclose(acc, op.dense() @ x, atol=1e-12)
