"""Map representations, conversions, built-ins, positivity criteria."""

import numpy as np
import pytest

from gruss_lab import (
    CERTIFIED_CP,
    CERTIFIED_NOT_N_POSITIVE,
    HEURISTICALLY_N_POSITIVE,
    ContractError,
    NotCompletelyPositiveError,
    UnitalizationError,
    amplify,
    apply,
    choi_map,
    choi_matrix,
    choi_to_kraus,
    compose,
    cp_test,
    dag,
    from_choi,
    from_kraus,
    ginibre,
    haar_unitary,
    identity_map,
    is_unital,
    map_from_json,
    map_to_json,
    n_positivity_search,
    normalized_choi_map,
    operator_norm,
    random_unital_cp,
    rayleigh_value,
    superop_matrix,
    to_choi,
    transpose_map,
    unitalize,
    unitary_conj,
    witness_vector,
)


def _basis_matrix(k, i, j):
    e = np.zeros((k, k), dtype=complex)
    e[i, j] = 1.0
    return e


def test_identity_map_choi_is_rank_one_projector():
    j = choi_matrix(identity_map(2))
    omega = np.eye(2, dtype=complex).reshape(-1)
    assert np.allclose(j, np.outer(omega, omega.conj()))


def test_transpose_choi_is_swap_with_spectrum():
    j = choi_matrix(transpose_map(2))
    # direct 4x4 swap construction
    swap = np.zeros((4, 4))
    for i in range(2):
        for a in range(2):
            swap[i * 2 + a, a * 2 + i] = 1.0
    assert np.allclose(j, swap)
    assert np.allclose(np.linalg.eigvalsh(j), [-1.0, 1.0, 1.0, 1.0], atol=1e-12)


def test_kraus_choi_kraus_roundtrip():
    phi = random_unital_cp(3, 4, seed=8)
    back = choi_to_kraus(to_choi(phi))
    for i in range(3):
        for j in range(3):
            e = _basis_matrix(3, i, j)
            assert operator_norm(apply(phi, e) - apply(back, e)) <= 1e-10


def test_choi_to_kraus_rejects_non_cp():
    with pytest.raises(NotCompletelyPositiveError):
        choi_to_kraus(transpose_map(2))


def test_apply_examples():
    t = transpose_map(2)
    x = np.array([[1, 8], [2, 16.0]])
    assert np.allclose(apply(t, x), x.T)

    phi = choi_map(3)
    assert np.allclose(apply(phi, np.eye(3)), (9 - 3 - 1) * np.eye(3))
    assert np.allclose(apply(phi, _basis_matrix(3, 0, 0)), np.diag([1.0, 2.0, 2.0]))

    u = haar_unitary(3, seed=4)
    conj = unitary_conj(np.eye(3))
    a = ginibre(3, seed=1)
    assert np.allclose(apply(conj, a), a)
    conj_u = unitary_conj(u)
    assert operator_norm(apply(conj_u, a) - u @ a @ dag(u)) <= 1e-12


def test_representation_consistency():
    phi = random_unital_cp(3, 2, seed=12)
    forms = [phi, to_choi(phi), from_choi(choi_matrix(phi), 3, 3)]
    superop = superop_matrix(phi)
    for trial in range(20):
        x = ginibre(3, seed=trial)
        ref = apply(forms[0], x)
        for alt in forms[1:]:
            assert operator_norm(apply(alt, x) - ref) <= 1e-10
        via_superop = (superop @ x.reshape(-1, order="F")).reshape(3, 3, order="F")
        assert operator_norm(via_superop - ref) <= 1e-10


def test_superop_layout_matches_kraus_formula():
    # column-major vectorization: S = sum conj(K) (x) K
    k_op = ginibre(2, seed=3)
    phi = from_kraus([k_op])
    assert np.allclose(superop_matrix(phi), np.kron(k_op.conj(), k_op))


def test_amplify_identity_and_order_one():
    phi = identity_map(2)
    amp = amplify(phi, 3)
    x = ginibre(6, seed=2)
    assert operator_norm(apply(amp, x) - x) <= 1e-12
    assert amplify(phi, 1) is phi


def test_amplify_partial_transpose_of_singlet():
    psi = np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2)
    proj = np.outer(psi, psi.conj())
    amp = amplify(transpose_map(2), 2)
    w = np.linalg.eigvalsh(apply(amp, proj))
    assert w[0] == pytest.approx(-0.5, abs=1e-12)


def test_amplify_blockwise_consistency():
    phi = random_unital_cp(2, 3, seed=21)
    amp = amplify(to_choi(phi), 2)  # force the non-Kraus path
    for i in range(2):
        for j in range(2):
            for a in range(2):
                for b in range(2):
                    x = np.kron(_basis_matrix(2, i, j), _basis_matrix(2, a, b))
                    got = apply(amp, x)
                    expected = np.kron(_basis_matrix(2, i, j), apply(phi, _basis_matrix(2, a, b)))
                    assert operator_norm(got - expected) <= 1e-12


def test_unitalize():
    phi = random_unital_cp(3, 4, seed=33)
    again = unitalize(phi)
    for trial in range(5):
        x = ginibre(3, seed=trial)
        assert operator_norm(apply(again, x) - apply(phi, x)) <= 1e-12

    k_op = 2.0 * haar_unitary(2, seed=6)  # K K* = 4 I
    scaled = unitalize(from_kraus([k_op]))
    assert operator_norm(scaled.kraus[0] - k_op / 2.0) <= 1e-12

    raw = from_kraus([ginibre(3, seed=14), ginibre(3, seed=15), ginibre(3, seed=16)])
    fixed = unitalize(raw)
    assert operator_norm(apply(fixed, np.eye(3)) - np.eye(3)) <= 1e-10

    zero = from_kraus([np.zeros((2, 2))])
    with pytest.raises(UnitalizationError):
        unitalize(zero)


def test_cp_test_verdicts():
    u = haar_unitary(3, seed=2)
    assert cp_test(unitary_conj(u)).status == CERTIFIED_CP

    v = cp_test(transpose_map(2))
    assert v.status == CERTIFIED_NOT_N_POSITIVE
    assert v.min_value_found == pytest.approx(-1.0, abs=1e-12)

    # J = (k-1) I - |omega><omega| evaluates to (k-1) - k = -1 on the
    # normalized maximally entangled vector
    phi3 = choi_map(3)
    v = cp_test(phi3)
    assert v.status == CERTIFIED_NOT_N_POSITIVE
    omega_hat = np.eye(3, dtype=complex).reshape(-1) / np.sqrt(3)
    assert rayleigh_value(phi3, omega_hat) == pytest.approx(-1.0, abs=1e-12)
    x = witness_vector(v.witness_a, v.witness_b)
    assert np.linalg.norm(x) == pytest.approx(1.0, abs=1e-10)
    assert rayleigh_value(phi3, x) <= -1e-8


def test_search_transpose():
    v = n_positivity_search(transpose_map(2), 2, starts=50, seed=0)
    assert v.status == CERTIFIED_NOT_N_POSITIVE
    assert v.min_value_found == pytest.approx(-1.0, abs=1e-9)
    x = witness_vector(v.witness_a, v.witness_b)
    assert np.linalg.norm(x) == pytest.approx(1.0, abs=1e-10)
    assert v.witness_a.shape[0] <= 2

    v1 = n_positivity_search(transpose_map(2), 1, starts=50, seed=0)
    assert v1.status == HEURISTICALLY_N_POSITIVE
    assert v1.min_value_found >= -1e-9


def test_search_brute_force_sphere_oracle():
    # independent check that -1 is the floor of the Rayleigh quotient of the
    # swap operator: no random unit vector goes below it, and the
    # antisymmetric singlet attains it exactly
    phi = transpose_map(2)
    singlet = np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2)
    assert rayleigh_value(phi, singlet) == pytest.approx(-1.0, abs=1e-12)
    rng = np.random.default_rng(99)
    samples = rng.standard_normal((5000, 4)) + 1j * rng.standard_normal((5000, 4))
    samples /= np.linalg.norm(samples, axis=1, keepdims=True)
    vals = [rayleigh_value(phi, s) for s in samples]
    assert min(vals) >= -1.0 - 1e-9


def test_search_choi_family():
    for k in (3, 4):
        refute = n_positivity_search(choi_map(k), k, starts=50, seed=1)
        assert refute.status == CERTIFIED_NOT_N_POSITIVE
        assert refute.min_value_found <= -0.9

        confirm = n_positivity_search(choi_map(k), k - 1, starts=50, seed=1)
        assert confirm.status == HEURISTICALLY_N_POSITIVE
        assert confirm.min_value_found >= -1e-7


def test_search_monotone_in_n():
    # a refutation at order n implies one at every higher order
    phi = choi_map(3)
    v3 = n_positivity_search(phi, 3, starts=30, seed=5)
    assert v3.status == CERTIFIED_NOT_N_POSITIVE
    for n in (4, 5):
        v = n_positivity_search(phi, n, starts=30, seed=5)
        assert v.status == CERTIFIED_NOT_N_POSITIVE
        assert v.min_value_found <= v3.min_value_found + 1e-9


def test_search_determinism():
    a = n_positivity_search(choi_map(3), 2, starts=20, seed=77)
    b = n_positivity_search(choi_map(3), 2, starts=20, seed=77)
    assert a.min_value_found == b.min_value_found
    assert np.array_equal(a.witness_a, b.witness_a)


def test_normalized_choi_map_is_unital():
    for k in (3, 4, 5):
        phi = normalized_choi_map(k)
        assert operator_norm(apply(phi, np.eye(k)) - np.eye(k)) <= 1e-12
    assert is_unital(normalized_choi_map(4))


def test_random_unital_cp_is_unital_cp():
    phi = random_unital_cp(3, 4, seed=101)
    assert operator_norm(apply(phi, np.eye(3)) - np.eye(3)) <= 1e-10
    assert cp_test(phi).status == CERTIFIED_CP


def test_positivity_preservation_on_psd_inputs():
    phi = random_unital_cp(3, 2, seed=55)
    rng = np.random.default_rng(4)
    for _ in range(100):
        g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        p = g @ dag(g)
        w = np.linalg.eigvalsh(apply(phi, p))
        assert w[0] >= -1e-9


def test_unital_cp_norm_one():
    phi = random_unital_cp(2, 3, seed=77)
    for trial in range(200):
        x = ginibre(2, seed=trial)
        x = x / operator_norm(x)
        assert operator_norm(apply(phi, x)) <= 1.0 + 1e-8
    assert operator_norm(apply(phi, np.eye(2))) == pytest.approx(1.0, abs=1e-10)


def test_adjoint_preservation_of_builtin_positive_maps():
    maps = [transpose_map(3), choi_map(3), normalized_choi_map(4),
            unitary_conj(haar_unitary(3, seed=8)), random_unital_cp(3, 3, seed=9)]
    for phi in maps:
        x = ginibre(phi.in_dim, seed=13)
        assert operator_norm(apply(phi, dag(x)) - dag(apply(phi, x))) <= 1e-10


def test_compose():
    t = transpose_map(2)
    double = compose(t, t)
    x = ginibre(2, seed=31)
    assert operator_norm(apply(double, x) - x) <= 1e-12


def test_map_json_roundtrip():
    phi = random_unital_cp(2, 2, seed=19)
    back = map_from_json(map_to_json(phi))
    x = ginibre(2, seed=3)
    assert operator_norm(apply(back, x) - apply(phi, x)) <= 1e-12

    t = map_from_json({"kind": "builtin", "name": "transpose", "dim": 2})
    assert np.allclose(apply(t, x), x.T)

    c = map_from_json(map_to_json(normalized_choi_map(4)))
    assert is_unital(c)

    with pytest.raises(ContractError):
        map_from_json({"kind": "wavelet"})
    with pytest.raises(ContractError):
        map_from_json({"kind": "kraus", "ops": []})
