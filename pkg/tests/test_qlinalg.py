"""State layer: validation, partial trace, dephasing, entropies, distances."""

from __future__ import annotations

import math

import numpy as np
import pytest

from secrecy_forge.errors import InvalidState, SecrecyForgeError
from secrecy_forge.qlinalg import (
    PureState,
    QState,
    cond_mutual_info_q,
    dephase,
    hermitian_eigs,
    partial_trace,
    tensor,
    trace_distance,
    von_neumann_entropy,
)

BELL = PureState(np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2.0), (2, 2))
GHZ = PureState(
    np.array([1.0, 0, 0, 0, 0, 0, 0, 1.0]) / math.sqrt(2.0), (2, 2, 2)
)


def partial_trace_oracle(
    rho: np.ndarray, dims: tuple[int, ...], keep: tuple[int, ...]
) -> np.ndarray:
    """Index-juggling reference implementation, kept independent of the library."""
    n = len(dims)
    t = rho.reshape(dims + dims)
    letters = "abcdefghijkl"
    in_idx = list(letters[:n])
    out_idx = [letters[n + i] if i in keep else letters[i] for i in range(n)]
    subs = "".join(in_idx) + "".join(out_idx)
    kept_in = "".join(letters[i] for i in keep)
    kept_out = "".join(letters[n + i] for i in keep)
    mat = np.einsum(f"{subs}->{kept_in}{kept_out}", t)
    d = int(np.prod([dims[i] for i in keep]))
    return mat.reshape(d, d)


# ---------------------------------------------------------------------------
# validation


def test_rejects_non_hermitian():
    m = np.array([[0.5, 0.5], [0.0, 0.5]])
    with pytest.raises(InvalidState):
        QState(m, (2,))


def test_rejects_wrong_trace():
    with pytest.raises(InvalidState):
        QState(np.eye(2), (2,))


def test_rejects_negative_eigenvalue():
    m = np.diag([1.5, -0.5])
    with pytest.raises(InvalidState):
        QState(m, (2,))


def test_rejects_dims_mismatch():
    with pytest.raises(InvalidState):
        QState(np.eye(4) / 4.0, (2, 3))


def test_pure_state_norm_check():
    with pytest.raises(InvalidState):
        PureState(np.array([1.0, 1.0]), (2,))


def test_state_matrix_frozen():
    st = QState(np.eye(2) / 2.0, (2,))
    with pytest.raises(ValueError):
        st.rho[0, 0] = 1.0


# ---------------------------------------------------------------------------
# tensor and partial trace


def test_tensor_orders_dims(make_density):
    a = make_density((2,))
    b = make_density((3,))
    t = tensor(a, b)
    assert t.dims == (2, 3)
    np.testing.assert_allclose(t.rho, np.kron(a.rho, b.rho), atol=1e-14)


def test_partial_trace_recovers_factors(make_density):
    a = make_density((2,))
    b = make_density((3,))
    t = tensor(a, b)
    np.testing.assert_allclose(partial_trace(t, (0,)).rho, a.rho, atol=1e-12)
    np.testing.assert_allclose(partial_trace(t, (1,)).rho, b.rho, atol=1e-12)


def test_partial_trace_reorders_as_listed(make_density):
    a = make_density((2,))
    b = make_density((3,))
    t = tensor(a, b)
    swapped = partial_trace(t, (1, 0))
    assert swapped.dims == (3, 2)
    np.testing.assert_allclose(swapped.rho, np.kron(b.rho, a.rho), atol=1e-12)


def test_partial_trace_matches_oracle(make_density):
    st = make_density((2, 3, 2))
    for keep in ((0,), (1,), (2,), (0, 1), (0, 2), (1, 2)):
        got = partial_trace(st, keep).rho
        want = partial_trace_oracle(st.rho, st.dims, keep)
        np.testing.assert_allclose(got, want, atol=1e-12)


# ---------------------------------------------------------------------------
# dephasing


def test_dephase_zeroes_cross_terms():
    st = BELL.density()
    out = dephase(st, 0)
    want = np.diag([0.5, 0, 0, 0.5])
    np.testing.assert_allclose(out.rho, want, atol=1e-14)


def test_dephase_keeps_within_block_coherence():
    # |0>(|0>+|1>)/sqrt(2): dephasing subsystem 0 must keep B's coherence
    amp = np.array([1.0, 1.0, 0.0, 0.0]) / math.sqrt(2.0)
    st = PureState(amp, (2, 2)).density()
    out = dephase(st, 0)
    np.testing.assert_allclose(out.rho, st.rho, atol=1e-14)


def test_dephase_idempotent(make_density):
    st = make_density((2, 3))
    once = dephase(st, 1)
    twice = dephase(once, 1)
    np.testing.assert_allclose(once.rho, twice.rho, atol=1e-14)


def test_dephase_preserves_diagonal(make_density):
    st = make_density((2, 2))
    for sub in (0, 1):
        np.testing.assert_allclose(
            np.diag(dephase(st, sub).rho), np.diag(st.rho), atol=1e-14
        )


# ---------------------------------------------------------------------------
# entropies, distances, conditional mutual information


def test_entropy_of_pure_state_is_zero(make_density):
    st = make_density((2, 2), rank=1)
    assert abs(von_neumann_entropy(st)) < 1e-9


def test_bell_reduced_entropy_is_one():
    red = partial_trace(BELL.density(), (0,))
    assert abs(von_neumann_entropy(red) - 1.0) < 1e-12


def test_hermitian_eigs_sorted_descending(make_density):
    st = make_density((2, 2))
    vals, vecs = hermitian_eigs(st.rho)
    assert np.all(np.diff(vals) <= 1e-12)
    np.testing.assert_allclose(
        (vecs * vals) @ vecs.conj().T, st.rho, atol=1e-12
    )


def test_trace_distance_extremes():
    zero = PureState(np.array([1.0, 0.0]), (2,)).density()
    one = PureState(np.array([0.0, 1.0]), (2,)).density()
    assert abs(trace_distance(zero, one) - 1.0) < 1e-12
    assert trace_distance(zero, zero) < 1e-14


def test_trace_distance_requires_matching_dims(make_density):
    with pytest.raises(SecrecyForgeError):
        trace_distance(make_density((2,)), make_density((3,)))


def test_ghz_conditional_mutual_information():
    # pure global state: I(A:B|E) = S(B) + S(A) - S(E) = 1 + 1 - 1
    assert abs(cond_mutual_info_q(GHZ.density(), (0,), (1,), (2,)) - 1.0) < 1e-9


def test_bell_mutual_information():
    assert abs(cond_mutual_info_q(BELL.density(), (0,), (1,)) - 2.0) < 1e-9


def test_strong_subadditivity(make_density):
    for _ in range(8):
        st = make_density((2, 2, 2))
        assert cond_mutual_info_q(st, (0,), (1,), (2,)) >= -1e-9
