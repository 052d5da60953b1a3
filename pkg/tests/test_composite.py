import numpy as np
import pytest

from cqed.composite import (Act, BinarySystem, Composite, DuplicateLegError, LayoutError,
                            LegDimensionError, UnreferencedFreeError, as_system, make_binary,
                            make_composite)
from cqed.elements import (JaynesCummings, LoweringCoupling, ParsMode, ParsQbit, Picture, fock,
                           make_mode, make_qbit, make_ternary_demo, state0, state1)
from cqed.qdata import StateVector, dyad
from cqed.qop import DimensionMismatch, apply_propagator

from conftest import random_complex
from oracles import lift, lowering, random_model


def qbit(**kw):
    return make_qbit(ParsQbit(**kw))


def mode(cutoff=3, **kw):
    return make_mode(ParsMode(cutoff=cutoff, **kw))


# --- layout validation ----------------------------------------------------------------

def test_ring_wiring_succeeds():
    q, p, m = qbit(), mode(4), mode(3)
    system = make_composite([q, p, m], Act(1, 0, LoweringCoupling((p, q), 1.0)),
                            Act(2, 0, LoweringCoupling((m, q), 1.0)),
                            Act(1, 2, 0, make_ternary_demo(p, m, q, 0.5)))
    assert system.dims == (2, 4, 3)
    assert [a.legs for a in system.acts] == [(1, 0), (2, 0), (1, 2, 0)]


def test_duplicate_leg_is_rejected():
    q, m = qbit(), mode()
    with pytest.raises(DuplicateLegError, match="duplicate leg ordinal in act #0"):
        make_composite([q, m], Act(1, 1, LoweringCoupling((m, m), 1.0)))


def test_leg_dimension_mismatch_is_rejected():
    q, m = qbit(), mode(3)
    inter = LoweringCoupling((m, q), 1.0)  # leg 0 has dim 3
    with pytest.raises(LegDimensionError, match="layout inconsistency at act #0 leg #0"):
        make_composite([q, m], Act(0, 1, inter))


def test_unreferenced_free_is_rejected():
    q, m, extra = qbit(), mode(), mode()
    with pytest.raises(UnreferencedFreeError, match="free #2 is not referenced"):
        make_composite([q, m, extra], Act(0, 1, JaynesCummings(q, m, 1.0)))


def test_the_three_layout_errors_are_distinct():
    kinds = {DuplicateLegError, LegDimensionError, UnreferencedFreeError}
    assert len(kinds) == 3 and all(issubclass(k, LayoutError) for k in kinds)


def test_other_layout_errors():
    q, m = qbit(), mode()
    with pytest.raises(LayoutError, match="act #0 leg #1"):
        make_composite([q, m], Act(0, 5, JaynesCummings(q, m, 1.0)))
    with pytest.raises(LayoutError):
        make_composite([q, m], Act(0, 1, 1, make_ternary_demo(q, m, m, 1.0)))
    with pytest.raises(LayoutError):
        Composite([])
    with pytest.raises(LayoutError):
        BinarySystem(make_ternary_demo(q, m, m, 1.0))


# --- binary systems ---------------------------------------------------------------------

def test_binary_layout_and_display_key():
    q, m = qbit(), mode(10)
    system = make_binary(JaynesCummings(q, m, 1.0))
    assert system.dims == (2, 10) and system.total_dim == 20
    keys = [k for _, block in system.display_blocks for k in block]
    assert keys == list(q.display_key) + list(m.display_key)
    assert as_system(JaynesCummings(q, m, 1.0)).dims == (2, 10)
    assert as_system(m).dims == (10,)
    with pytest.raises(TypeError):
        as_system(3)


def test_binary_hamiltonian_matches_kron_oracle(rng):
    pq, pm = ParsQbit(0.3, 0, 0.2j), ParsMode(-0.4, 0, 0.5, cutoff=4)
    q, m = make_qbit(pq, Picture.Sch), make_mode(pm, Picture.Sch)
    g = 0.6 + 0.1j
    system = make_binary(JaynesCummings(q, m, g))
    sig, a = lowering(2), lowering(4)
    hq = -0.3 * sig.T @ sig + 1j * (0.2j * sig.T - np.conj(0.2j) * sig)
    hm = 0.4 * a.T @ a + 1j * (0.5 * a.T - 0.5 * a)
    oracle = (np.kron(hq, np.eye(4)) + np.kron(np.eye(2), hm)
              + 1j * (np.conj(g) * np.kron(sig.T, a) - g * np.kron(sig, a.T)))
    x = random_complex(rng, (2, 4))
    out = np.zeros_like(x)
    system.add_hamiltonian(0.0, x, out)
    np.testing.assert_allclose(out.reshape(-1), -1j * oracle @ x.reshape(-1), atol=1e-12)
    with pytest.raises(DimensionMismatch, match="state/system dimension mismatch"):
        system.add_hamiltonian(0.0, np.zeros((2, 5), complex), np.zeros((2, 5), complex))


# --- Hamiltonian aggregation ----------------------------------------------------------------

def test_zero_couplings_leave_only_free_parts(rng):
    fq, fm = make_qbit(ParsQbit(0.5, 0.1, 1j), Picture.Sch), make_mode(ParsMode(1, 0, 0.3, cutoff=3), Picture.Sch)
    system = make_composite([fq, fm], Act(0, 1, JaynesCummings(fq, fm, 0)))
    alone_q = make_composite([fq]).dense_hamiltonian()
    alone_m = make_composite([fm]).dense_hamiltonian()
    oracle = lift({0: alone_q}, (2, 3)) + lift({1: alone_m}, (2, 3))
    np.testing.assert_allclose(system.dense_hamiltonian(), oracle, atol=1e-14)


def test_reused_interaction_contributes_once_per_wiring():
    q, m = qbit(), mode(3)
    inter = LoweringCoupling((q, m), 0.7)
    one = make_composite([q, m], Act(0, 1, inter)).dense_hamiltonian()
    # the same instance wired twice onto the same pair doubles the coupling
    two = make_composite([q, m], Act(0, 1, inter), Act(0, 1, inter)).dense_hamiltonian()
    np.testing.assert_allclose(two, 2 * one, atol=1e-14)
    # and on distinct frees it acts on each wiring separately
    m2 = mode(3)
    three = make_composite([q, m, m2], Act(0, 1, inter), Act(0, 2, inter))
    low1 = lift({0: lowering(2), 1: lowering(3)}, (2, 3, 3))
    low2 = lift({0: lowering(2), 2: lowering(3)}, (2, 3, 3))
    oracle = 0.7 * (low1 + low2) + 0.7 * (low1 + low2).conj().T
    np.testing.assert_allclose(three.dense_hamiltonian(), oracle, atol=1e-14)


def test_ring_shaped_system_matches_dense_oracle(rng):
    # a four-level emitter slot is a mode of cutoff 4, giving dims (4, 3, 3)
    f0 = make_mode(ParsMode(0.3, 0.05, 0.2, cutoff=4), Picture.Sch)
    p = make_mode(ParsMode(0.5, 0.2, 0.4j, cutoff=3), Picture.Sch)
    m = make_mode(ParsMode(-0.5, 0.1, 0, cutoff=3), Picture.Sch)
    cP, cM, u = 0.4, 0.3j, 0.2 - 0.1j
    system = make_composite([f0, p, m], Act(1, 0, LoweringCoupling((p, f0), cP)),
                            Act(2, 0, LoweringCoupling((m, f0), cM)),
                            Act(1, 2, 0, make_ternary_demo(p, m, f0, u)))
    dims = (4, 3, 3)
    h = sum(lift({k: make_composite([f]).dense_hamiltonian()}, dims)
            for k, f in enumerate((f0, p, m)))
    for legs, c in (((1, 0), cP), ((2, 0), cM), ((1, 2, 0), u)):
        low = lift({k: lowering(dims[k]) for k in legs}, dims)
        h = h + c * low + np.conj(c) * low.conj().T
    assert system.total_dim == 36
    x = random_complex(rng, dims)
    out = np.zeros_like(x)
    system.add_hamiltonian(0.0, x, out)
    np.testing.assert_allclose(out.reshape(-1), -1j * h @ x.reshape(-1), atol=1e-11)


def test_act_order_does_not_matter(rng):
    model = random_model(np.random.default_rng(5), picture=Picture.Sch)
    while len(model.system.acts) < 2:
        model = random_model(rng, picture=Picture.Sch)
    sys_a = model.system
    sys_b = Composite(sys_a.frees, list(reversed(sys_a.acts)))
    x = random_complex(rng, model.dims)
    a, b = np.zeros_like(x), np.zeros_like(x)
    sys_a.add_hamiltonian(0.3, x, a)
    sys_b.add_hamiltonian(0.3, x, b)
    np.testing.assert_allclose(a, b, atol=1e-12)


@pytest.mark.parametrize("seed", range(12))
def test_random_systems_against_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    model = random_model(rng)
    x = random_complex(rng, model.dims)
    for t in (0.0, 0.37):
        out = np.zeros_like(x)
        model.system.add_hamiltonian(t, x, out)
        np.testing.assert_allclose(out.reshape(-1), -1j * model.hamiltonian(t) @ x.reshape(-1),
                                   atol=1e-11 * max(1, np.abs(x).max()))


def test_propagators_commute_and_match_dense(rng):
    model = random_model(np.random.default_rng(11), picture=Picture.IP)
    while len(model.system.propagators) < 2:
        model = random_model(rng, picture=Picture.IP)
    x = random_complex(rng, model.dims)
    y = x.copy()
    model.system.apply_propagators(0.8, x)
    for u in reversed(model.system.propagators):
        apply_propagator(u, 0.8, y)
    np.testing.assert_allclose(x, y, atol=1e-14)
    z = random_complex(rng, model.dims)
    expected = model.propagator(0.8) @ z.reshape(-1)
    np.testing.assert_allclose(model.system.apply_propagators(0.8, z).reshape(-1), expected,
                               atol=1e-13)


def test_anti_hermitian_defect_equals_jump_sum(rng):
    for seed in range(6):
        model = random_model(np.random.default_rng(100 + seed), picture=Picture.Sch)
        h = model.system.dense_hamiltonian()
        jj = sum((j.conj().T @ j for j in model.jumps), np.zeros_like(h))
        np.testing.assert_allclose(h - h.conj().T, -1j * jj, atol=1e-11)


# --- jumps --------------------------------------------------------------------------------

def test_jump_enumeration():
    assert make_binary(JaynesCummings(qbit(), mode(), 1)).jump_channels(0.0, np.ones((2, 3))) == []
    system = make_binary(JaynesCummings(qbit(gamma=0.2), mode(kappa=0.3), 1))
    chans = system.jump_channels(0.0, np.ones((2, 3), complex))
    assert [(c[0], c[1]) for c in chans] == [(0, "qbit:decay"), (1, "mode:photon loss")]


def test_jump_rates_match_dense_lift(rng):
    for seed in range(8):
        model = random_model(np.random.default_rng(200 + seed))
        x = random_complex(rng, model.dims)
        rates = model.system.jump_rates(x)
        v = x.reshape(-1)
        oracle = [np.linalg.norm(j @ v) ** 2 / np.linalg.norm(v) ** 2 for j in model.jumps]
        np.testing.assert_allclose(rates, oracle, rtol=1e-12, atol=1e-14)
        for m, j in enumerate(model.jumps):
            np.testing.assert_allclose(model.system.apply_jump(m, x).reshape(-1), j @ v,
                                       atol=1e-12)


# --- display --------------------------------------------------------------------------

def test_display_of_product_state(rng):
    q, m = qbit(), mode(5)
    system = make_binary(JaynesCummings(q, m, 1.0))
    phi = StateVector(random_complex(rng, 5))
    psi = state1() * phi
    blocks = system.display(0.0, psi)
    np.testing.assert_allclose(blocks[0], [1, 0, 0], atol=1e-14)
    single = make_composite([m]).display(0.0, phi)[0]
    np.testing.assert_allclose(blocks[1], single, atol=1e-12)


def test_display_of_bell_like_state(rng):
    system = make_binary(JaynesCummings(qbit(), mode(2), 1.0))
    psi = StateVector((state1() * fock(0, 2)).data + (state0() * fock(1, 2)).data) * (2**-0.5)
    blocks = system.display(0.0, psi)
    assert blocks[0][0] == pytest.approx(0.5, abs=1e-14)
    np.testing.assert_allclose(system.display(0.0, dyad(psi))[0], blocks[0], atol=1e-12)


def test_display_from_vector_and_dyad_agree(rng):
    model = random_model(np.random.default_rng(7))
    psi = StateVector(random_complex(rng, model.dims))
    a = model.system.display(0.0, psi)
    b = model.system.display(0.0, dyad(psi))
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, atol=1e-12)
