"""Entanglement measures against closed-form oracles."""

import math

import numpy as np
import pytest

from secrecy_forge.entanglement import (
    concurrence_2q,
    eof_2q,
    eof_numeric,
    esq_classical_extension_bound,
    negativity_log,
    rel_ent_upper,
)
from secrecy_forge.errors import InvalidState, SecrecyForgeError
from secrecy_forge.qlinalg import PureState, QState

BELL = PureState(np.array([1, 0, 0, 1]) / math.sqrt(2), (2, 2)).density()
PRODUCT = PureState(np.array([1, 0, 0, 0]), (2, 2)).density()


def h2(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def werner(p: float) -> QState:
    rho = p * BELL.rho + (1 - p) * np.eye(4) / 4
    return QState(rho, (2, 2))


def werner_eof_oracle(p: float) -> float:
    # concurrence of the Werner state is max(0, (3p - 1) / 2)
    c = max(0.0, (3 * p - 1) / 2)
    return h2((1 + math.sqrt(1 - c * c)) / 2)


class TestTwoQubitFormation:
    def test_bell_is_one_ebit(self):
        assert eof_2q(BELL).value == pytest.approx(1.0, abs=1e-12)
        assert concurrence_2q(BELL).value == pytest.approx(1.0, abs=1e-12)

    def test_product_is_zero(self):
        assert eof_2q(PRODUCT).value == 0.0
        assert concurrence_2q(PRODUCT).value == 0.0

    @pytest.mark.parametrize("p", [0.0, 0.2, 1 / 3, 0.5, 0.75, 0.9, 1.0])
    def test_werner_matches_concurrence_formula(self, p):
        assert eof_2q(werner(p)).value == pytest.approx(
            werner_eof_oracle(p), abs=1e-12
        )

    def test_result_kinds(self):
        res = eof_2q(BELL)
        assert res.name == "E_F" and res.kind == "exact"
        assert res.method == "wootters"

    def test_value_never_negative(self, make_density):
        for _ in range(8):
            assert eof_2q(make_density((2, 2))).value >= 0.0

    def test_rejects_wrong_shape(self):
        with pytest.raises(SecrecyForgeError):
            eof_2q(QState(np.eye(9) / 9, (3, 3)))
        with pytest.raises(SecrecyForgeError):
            eof_2q(QState(np.eye(8) / 8, (2, 2, 2)))


class TestNumericFormation:
    def test_pure_state_shortcut(self):
        vec = np.array([math.sqrt(0.3), 0, 0, math.sqrt(0.7)])
        res = eof_numeric(PureState(vec, (2, 2)).density(), seed=0)
        assert res.method == "pure-state"
        assert res.value == pytest.approx(h2(0.3), abs=1e-12)

    def test_matches_wootters_on_random_states(self, make_density):
        # acceptance runs the wide sweep; three states here keep the suite fast
        for seed in range(3):
            rho = make_density((2, 2))
            num = eof_numeric(rho, seed=seed).value
            assert num == pytest.approx(eof_2q(rho).value, abs=1e-4)

    def test_upper_bounds_exact_value(self, make_density):
        # the ensemble search converges from above
        rho = make_density((2, 2))
        assert eof_numeric(rho, seed=1).value >= eof_2q(rho).value - 1e-7


class TestNegativity:
    def test_bell_is_one(self):
        assert negativity_log(BELL).value == pytest.approx(1.0, abs=1e-12)

    def test_product_is_zero(self):
        assert negativity_log(PRODUCT).value == 0.0

    def test_kind_is_lower_bound(self):
        assert negativity_log(BELL).kind == "lower_bound"

    def test_ppt_werner_has_zero_negativity(self):
        # Werner states are PPT exactly for p <= 1/3
        assert negativity_log(werner(1 / 3)).value == pytest.approx(0.0, abs=1e-9)
        assert negativity_log(werner(0.5)).value > 1e-3


class TestRelativeEntropyUpper:
    def test_bell_close_to_one(self):
        res = rel_ent_upper(BELL, seed=0)
        assert res.kind == "upper_bound"
        assert res.value == pytest.approx(1.0, abs=2e-2)
        assert res.value >= 1.0 - 1e-9

    def test_separable_state_close_to_zero(self):
        assert rel_ent_upper(PRODUCT, seed=0).value <= 1e-5


class TestSquashedBound:
    def test_classical_extension_oracle(self):
        # flag 0 carries a Bell pair, flag 1 a product: bound is 1/2 + 0 = 1/2
        r3 = 0.5 * np.einsum(
            "ab,cd->acbd", BELL.rho, np.diag([1.0, 0.0])
        ) + 0.5 * np.einsum("ab,cd->acbd", PRODUCT.rho, np.diag([0.0, 1.0]))
        res = esq_classical_extension_bound(QState(r3.reshape(8, 8), (2, 2, 2)))
        assert res.value == pytest.approx(0.5, abs=1e-12)
        assert res.kind == "upper_bound"
        assert res.diagnostics["block_weights"] == pytest.approx([0.5, 0.5])

    def test_rejects_coherent_third_register(self):
        vec = np.zeros(8, complex)
        vec[0b000] = vec[0b111] = 1 / math.sqrt(2)
        with pytest.raises(InvalidState):
            esq_classical_extension_bound(PureState(vec, (2, 2, 2)).density())

    def test_rejects_bipartite_input(self):
        with pytest.raises(SecrecyForgeError):
            esq_classical_extension_bound(QState(np.eye(4) / 4, (2, 2)))
