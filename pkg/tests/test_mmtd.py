import numpy as np
import pytest

from mtdbayes.mmtd import (
    MMTDParams,
    ZetaMap,
    enumerate_configs,
    matricize,
    mmtd_params_from_json,
    mmtd_params_to_json,
    mmtd_transition,
    param_count,
    rho_index,
    unmatricize,
)
from mtdbayes.mtd import MTDParams, mtd_transition
from mtdbayes.probcore import is_prob_vec

TABLE_ROWS = [
    # (K, L, R, n_order, n_config, n_tensor, total, unrestricted)
    (2, 5, 2, 2, 13, 7, 22, 32),
    (2, 5, 4, 4, 26, 31, 61, 32),
    (2, 10, 2, 2, 53, 7, 62, 1024),
    (2, 10, 4, 4, 381, 31, 416, 1024),
    (5, 5, 2, 2, 13, 124, 139, 12500),
    (5, 5, 4, 4, 26, 3124, 3154, 12500),
    (5, 10, 2, 2, 53, 124, 179, 39062500),
    (5, 10, 4, 4, 381, 3124, 3509, 39062500),
    (7, 5, 2, 2, 13, 342, 357, 100842),
    (7, 5, 4, 4, 26, 16806, 16836, 100842),
    (7, 10, 2, 2, 53, 342, 397, 1694851494),
    (7, 10, 4, 4, 381, 16806, 17191, 1694851494),
]


def random_tensor(rng, n_states, order):
    """Random transition tensor, stochastic along the outcome axis."""
    cols = rng.dirichlet(np.ones(n_states), size=n_states**order).T
    return unmatricize(cols, order)


def random_mmtd(rng, n_states, n_lags, max_order):
    from math import comb

    return MMTDParams(
        n_lags=n_lags,
        order_weights=rng.dirichlet(np.ones(max_order + 1)),
        config_weights=[rng.dirichlet(np.ones(comb(n_lags, r))) for r in range(1, max_order + 1)],
        q=[random_tensor(rng, n_states, r) for r in range(max_order + 1)],
    )


def brute_force_transition(params, lagged):
    """Direct expansion of the order mixture, one term per (order, lag tuple)."""
    out = params.order_weights[0] * np.asarray(params.q[0])
    for r in range(1, params.max_order + 1):
        for i, config in enumerate(enumerate_configs(params.n_lags, r)):
            term = params.q[r]
            for lag in config:  # consume one lag axis at a time
                term = np.take(term, lagged[lag - 1], axis=1)
            out = out + params.order_weights[r] * params.config_weights[r - 1][i] * term
    return out


class TestEnumerateConfigs:
    def test_lexicographic_pairs(self):
        assert enumerate_configs(3, 2) == [(1, 2), (1, 3), (2, 3)]

    def test_counts(self):
        assert len(enumerate_configs(6, 3)) == 20
        assert len(enumerate_configs(10, 4)) == 210

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            enumerate_configs(3, 4)


class TestZetaMap:
    def test_intercept_entry(self):
        zmap = ZetaMap(4, 2)
        assert zmap.decode(0) == (0, ())
        assert zmap.encode(0, ()) == 0

    def test_total_count(self):
        assert len(ZetaMap(6, 3)) == 1 + 6 + 15 + 20

    def test_round_trip_large(self):
        zmap = ZetaMap(10, 4)
        for i in range(len(zmap)):
            order, config = zmap.decode(i)
            assert zmap.encode(order, config) == i

    def test_bijection_all_small_maps(self):
        for n_lags in range(1, 13):
            for max_order in range(1, n_lags + 1):
                zmap = ZetaMap(n_lags, max_order)
                seen = set()
                for i in range(len(zmap)):
                    pair = zmap.decode(i)
                    assert pair not in seen
                    seen.add(pair)
                    assert zmap.encode(*pair) == i

    def test_grouped_by_order_then_lexicographic(self):
        zmap = ZetaMap(4, 3)
        orders = [zmap.decode(i)[0] for i in range(len(zmap))]
        assert orders == sorted(orders)
        for r in range(1, 4):
            sl = zmap.order_slice(r)
            configs = [zmap.decode(i)[1] for i in range(sl.start, sl.stop)]
            assert configs == sorted(configs)

    def test_out_of_range_index(self):
        with pytest.raises(ValueError):
            ZetaMap(3, 2).decode(99)


class TestMmtdTransition:
    def test_first_order_only_recovers_shared_matrix_mixture(self):
        rng = np.random.default_rng(0)
        q1 = rng.dirichlet(np.ones(3), size=3).T
        lam1 = rng.dirichlet(np.ones(4))
        params = MMTDParams(
            n_lags=4,
            order_weights=[0.0, 1.0],
            config_weights=[lam1],
            q=[np.full(3, 1 / 3), unmatricize(q1, 1)],
        )
        mtd = MTDParams(weights=lam1, q=q1)
        for _ in range(20):
            hist = rng.integers(0, 3, 4)
            np.testing.assert_array_equal(
                mmtd_transition(params, hist), mtd_transition(mtd, hist)
            )

    def test_pure_intercept(self):
        rng = np.random.default_rng(1)
        params = random_mmtd(rng, 2, 3, 2)
        q0 = rng.dirichlet(np.ones(2))
        params = MMTDParams(n_lags=3, order_weights=[1.0, 0.0, 0.0], config_weights=params.config_weights, q=[q0] + params.q[1:])
        for hist in np.ndindex(2, 2, 2):
            np.testing.assert_array_equal(mmtd_transition(params, np.array(hist)), q0)

    def test_matches_brute_force_expansion(self):
        rng = np.random.default_rng(2)
        params = random_mmtd(rng, 2, 2, 2)
        for hist in np.ndindex(2, 2):
            hist = np.array(hist)
            np.testing.assert_allclose(
                mmtd_transition(params, hist), brute_force_transition(params, hist), atol=1e-14
            )

    def test_output_on_simplex(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            params = random_mmtd(rng, 3, 4, 2)
            hist = rng.integers(0, 3, 4)
            assert is_prob_vec(mmtd_transition(params, hist))

    def test_state_out_of_range(self):
        rng = np.random.default_rng(4)
        params = random_mmtd(rng, 2, 2, 1)
        with pytest.raises(ValueError):
            mmtd_transition(params, [0, 5])


class TestParamCount:
    @pytest.mark.parametrize("row", TABLE_ROWS)
    def test_reference_rows(self, row):
        k, l, r, n_order, n_config, n_tensor, total, unrestricted = row
        got = param_count(k, l, r)
        assert got == (n_order, n_config, n_tensor, total, unrestricted)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            param_count(2, 3, 4)
        with pytest.raises(ValueError):
            param_count(1, 3, 2)


class TestMatricize:
    def test_order_one_identity(self):
        rng = np.random.default_rng(5)
        q = rng.dirichlet(np.ones(3), size=3).T
        np.testing.assert_array_equal(matricize(q), q)
        for k in range(3):
            assert rho_index(np.array([k]), 3) == k

    def test_most_recent_lag_fastest(self):
        # With K = 4 the (k1, k2) column is k1 + 4 * k2 in 0-based labels.
        k = 4
        tensor = np.arange(k**3, dtype=float).reshape(k, k, k)
        tensor = tensor / tensor.sum(axis=0)
        mat = matricize(tensor)
        for k1 in range(k):
            for k2 in range(k):
                col = rho_index(np.array([k1, k2]), k)
                assert col == k1 + 4 * k2
                np.testing.assert_array_equal(mat[:, col], tensor[:, k1, k2])

    def test_round_trip(self):
        rng = np.random.default_rng(6)
        for k in (2, 3, 5):
            for r in (1, 2, 3):
                t = random_tensor(rng, k, r)
                np.testing.assert_array_equal(unmatricize(matricize(t), r), t)


class TestJson:
    def test_round_trip_with_config_table(self):
        import json

        rng = np.random.default_rng(7)
        params = random_mmtd(rng, 2, 3, 2)
        text = mmtd_params_to_json(params)
        table = json.loads(text)["config_table"]
        assert table[0] == {"index": 0, "order": 0, "lags": []}
        back = mmtd_params_from_json(text)
        np.testing.assert_array_equal(back.order_weights, params.order_weights)
        for a, b in zip(back.config_weights, params.config_weights):
            np.testing.assert_array_equal(a, b)
        for a, b in zip(back.q, params.q):
            np.testing.assert_array_equal(a, b)
