import numpy as np
import pytest

from papcbeam import (
    LinkInstance,
    MultiCarrierLink,
    PowerConstraints,
    cyclic_multicarrier,
    dual_gradient,
    dual_value,
    gauss_seidel_mmse,
    lagrangian_minimizers,
    mmse_combiners,
    mse,
    multicarrier_margins,
    naive_scaled_precoders,
    p_projection,
    papc_mmse_precoder,
    per_carrier_mse,
    percarrier_cyclic_precoders,
    precoder_objective,
    projected_eigenvector_precoders,
    solve_papc_precoders,
    total_power_precoders,
    violation_stats,
    whitened_eigenpairs,
)
from papcbeam.multicarrier import stationarity_multipliers
from papcbeam.single_carrier import PrecoderSolution


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_feasible_Z(rng, pc, K, fill=None):
    """Random multicarrier precoders scaled per antenna to a budget fraction."""
    Z = random_complex(rng, K, pc.n)
    totals = np.sum(np.abs(Z) ** 2, axis=0)
    frac = rng.uniform(0.1, 1.0, pc.n) if fill is None else np.full(pc.n, fill)
    return Z * np.sqrt(frac * pc.p / totals)


def random_mc_link(rng, K, m, n, noise_lo=0.3, noise_hi=2.0):
    H = random_complex(rng, K, m, n)
    noise = rng.uniform(noise_lo, noise_hi, m)
    pc = PowerConstraints(rng.uniform(0.1, 1.0, n))
    return MultiCarrierLink(H, noise, pc)


# --- dual function --------------------------------------------------------


def test_dual_value_boundary_and_scalar():
    pc = PowerConstraints(np.array([1.0]))
    G = np.array([[1.0 + 0j]])
    assert dual_value(np.array([0.0]), G, pc) == -1.0
    assert dual_value(np.array([1.0]), G, pc) == pytest.approx(-1.5)
    K5 = np.ones((5, 1), dtype=complex)
    assert dual_value(np.array([0.0]), K5, pc) == -5.0
    with pytest.raises(ValueError):
        dual_value(np.array([-0.1]), G, pc)


def test_weak_duality_against_random_feasible_points():
    rng = np.random.default_rng(30)
    for _ in range(20):
        K, n = int(rng.integers(1, 6)), int(rng.integers(1, 5))
        G = random_complex(rng, K, n)
        pc = PowerConstraints(rng.uniform(0.1, 1.0, n))
        lam = rng.uniform(0.01, 3.0, n)
        d = dual_value(lam, G, pc)
        for _ in range(100):
            Z = random_feasible_Z(rng, pc, K)
            assert d <= precoder_objective(Z, G) + 1e-10


def test_dual_concavity_probe():
    rng = np.random.default_rng(31)
    G = random_complex(rng, 4, 3)
    pc = PowerConstraints(rng.uniform(0.2, 1.0, 3))
    for _ in range(100):
        l1 = rng.uniform(0.01, 5.0, 3)
        l2 = rng.uniform(0.01, 5.0, 3)
        mid = dual_value(0.5 * (l1 + l2), G, pc)
        assert mid >= 0.5 * (dual_value(l1, G, pc) + dual_value(l2, G, pc)) - 1e-10


# --- Lagrangian minimizers -------------------------------------------------


def test_minimizers_scalar_and_boundary():
    G = np.array([[1.0 + 0j]])
    np.testing.assert_allclose(lagrangian_minimizers(np.array([1.0]), G), [[0.5]])
    G2 = np.array([[0.0, 2.0 + 0j]])
    Z = lagrangian_minimizers(np.array([1.0, 0.0]), G2)
    np.testing.assert_allclose(Z, [[0.0, 0.5]])


def test_minimizers_satisfy_normal_equations():
    rng = np.random.default_rng(32)
    for _ in range(50):
        K, n = int(rng.integers(1, 7)), int(rng.integers(1, 6))
        G = random_complex(rng, K, n)
        lam = rng.uniform(0.05, 4.0, n)
        Z = lagrangian_minimizers(lam, G)
        for k in range(K):
            lhs = (np.outer(G[k], G[k].conj()) + np.diag(lam)) @ Z[k]
            assert np.abs(lhs - G[k]).max() < 1e-10


def test_minimizers_boundary_without_usable_antenna():
    G = np.array([[0.0, 1.0 + 0j]])
    with pytest.raises(ValueError):
        lagrangian_minimizers(np.array([0.0, 1.0]), G)


# --- dual gradient ----------------------------------------------------------


def test_dual_gradient_scalar_example_and_zero_at_stationarity():
    pc = PowerConstraints(np.array([1.0]))
    G = np.array([[1.0 + 0j]])
    np.testing.assert_allclose(dual_gradient(np.array([1.0]), G, pc), [-0.75])
    # rebudget so the current multiplier is stationary
    rng = np.random.default_rng(33)
    Gr = random_complex(rng, 3, 2)
    lam = rng.uniform(0.2, 2.0, 2)
    Z = lagrangian_minimizers(lam, Gr)
    pc_star = PowerConstraints(np.sum(np.abs(Z) ** 2, axis=0))
    np.testing.assert_allclose(dual_gradient(lam, Gr, pc_star), 0.0, atol=1e-14)
    with pytest.raises(ValueError):
        dual_gradient(np.array([0.0, 1.0]), Gr, pc)


def central_difference_gradient(lam, G, pc, h=1e-6):
    grad = np.zeros(lam.size)
    for i in range(lam.size):
        up, dn = lam.copy(), lam.copy()
        up[i] += h
        dn[i] -= h
        grad[i] = (dual_value(up, G, pc) - dual_value(dn, G, pc)) / (2 * h)
    return grad


def test_dual_gradient_matches_finite_differences():
    rng = np.random.default_rng(34)
    for _ in range(25):
        K, n = int(rng.integers(1, 9)), int(rng.integers(1, 7))
        G = random_complex(rng, K, n)
        pc = PowerConstraints(rng.uniform(0.1, 1.0, n))
        lam = rng.uniform(0.05, 3.0, n)
        grad = dual_gradient(lam, G, pc)
        fd = central_difference_gradient(lam, G, pc)
        assert np.abs(grad - fd).max() / max(np.abs(fd).max(), 1e-12) < 1e-4


# --- multicarrier transmit solver ------------------------------------------


def pgd_oracle(G, pc, iters=4000, starts=8, seed=99):
    """Independent global solver: projected gradient descent on the convex
    primal (per-antenna ball projection) from random starts."""
    rng = np.random.default_rng(seed)
    K, n = G.shape
    L = 2.0 * np.sum(np.abs(G) ** 2, axis=1).max()
    best = np.inf
    for _ in range(starts):
        Z = random_feasible_Z(rng, pc, K)
        for _ in range(iters):
            u = np.einsum("ki,ki->k", G.conj(), Z)
            Z = Z - (1.0 / L) * G * (u - 1.0)[:, None]
            totals = np.sum(np.abs(Z) ** 2, axis=0)
            over = totals > pc.p
            Z[:, over] *= np.sqrt(pc.p[over] / totals[over])
        best = min(best, precoder_objective(Z, G))
    return best


def test_solver_matches_pgd_oracle():
    rng = np.random.default_rng(35)
    for trial in range(5):
        G = random_complex(rng, 2, 2) * rng.uniform(0.5, 2.0)
        pc = PowerConstraints(rng.uniform(0.2, 1.0, 2))
        Z, state = solve_papc_precoders(G, pc, max_dual_iterations=3000)
        solver_obj = precoder_objective(Z, G)
        oracle = pgd_oracle(G, pc)
        assert solver_obj <= oracle + 1e-4
        assert oracle <= solver_obj + 1e-4


def test_solver_single_carrier_agrees_with_dispatch():
    rng = np.random.default_rng(36)
    for _ in range(20):
        n = int(rng.integers(2, 5))
        g = random_complex(rng, n)
        pc = PowerConstraints(rng.uniform(0.1, 1.0, n))
        Z, _ = solve_papc_precoders(g[None, :], pc, max_dual_iterations=2000)
        direct: PrecoderSolution = papc_mmse_precoder(g, pc)
        obj_solver = precoder_objective(Z, g[None, :])
        obj_direct = precoder_objective(direct.z[None, :], g[None, :])
        assert abs(obj_solver - obj_direct) < 1e-6


def test_solver_symmetric_instance_spreads_power_evenly():
    pc = PowerConstraints(np.full(3, 0.5))
    G = np.full((4, 3), 0.8 + 0.3j)
    Z, _ = solve_papc_precoders(G, pc, max_dual_iterations=2000)
    powers = np.abs(Z) ** 2
    assert np.ptp(powers) < 1e-8


def test_solver_reports_truncation():
    rng = np.random.default_rng(37)
    G = random_complex(rng, 16, 8)
    pc = PowerConstraints(rng.uniform(0.1, 1.0, 8))
    Z, state = solve_papc_precoders(G, pc, max_dual_iterations=3)
    assert not state.converged
    assert state.iterations == 3
    assert multicarrier_margins(Z, pc).min() >= -1e-9  # still feasible


def test_solver_rejects_zero_channels():
    with pytest.raises(ValueError):
        solve_papc_precoders(np.zeros((2, 2), complex), PowerConstraints(np.ones(2)))


def test_stationarity_multipliers_reduce_to_projection_formula():
    rng = np.random.default_rng(38)
    pc = PowerConstraints(rng.uniform(0.2, 1.0, 4))
    g = random_complex(rng, 4)
    g *= 0.7 / np.sum(pc.sqrt_p * np.abs(g))  # ||g||_P = 0.7
    z = p_projection(g, pc)
    lam = stationarity_multipliers(z[None, :], g[None, :], pc)
    np.testing.assert_allclose(lam, np.abs(g) / pc.sqrt_p * 0.3, atol=1e-12)


# --- cyclic designer --------------------------------------------------------


def test_cyclic_single_carrier_reduces_to_gauss_seidel():
    rng = np.random.default_rng(39)
    for _ in range(8):
        m, n = int(rng.integers(2, 6)), int(rng.integers(2, 8))
        link = random_mc_link(rng, 1, m, n)
        sol = cyclic_multicarrier(link, max_cyclic_iterations=50, max_dual_iterations=2000)
        pair = gauss_seidel_mmse(link.carrier(0))
        assert abs(sol.sum_mse - pair.mse) < 1e-6


def test_cyclic_identical_carriers_are_symmetric():
    rng = np.random.default_rng(40)
    H = np.broadcast_to(random_complex(rng, 3, 4), (5, 3, 4)).copy()
    link = MultiCarrierLink(H, rng.uniform(0.5, 1.5, 3), PowerConstraints(np.full(4, 0.6)))
    sol = cyclic_multicarrier(link, max_cyclic_iterations=10, max_dual_iterations=1000)
    for k in range(1, 5):
        np.testing.assert_allclose(sol.Z[k], sol.Z[0], atol=1e-9)


def test_cyclic_monotone_trace_with_converged_inner_solver():
    rng = np.random.default_rng(41)
    for _ in range(5):
        link = random_mc_link(rng, 6, 3, 4)
        sol = cyclic_multicarrier(
            link, max_cyclic_iterations=25, max_dual_iterations=5000,
            grad_tol=1e-13 * link.pc.p_total,
        )
        assert np.all(np.diff(sol.trace) <= 1e-8)
        assert multicarrier_margins(sol.Z, link.pc).min() >= -1e-9
        assert sol.dual_gap >= -1e-9


def test_cyclic_solution_mse_bookkeeping():
    rng = np.random.default_rng(42)
    link = random_mc_link(rng, 4, 3, 5)
    sol = cyclic_multicarrier(link, max_cyclic_iterations=8, max_dual_iterations=500)
    per_carrier = np.array(
        [mse(sol.Z[k], sol.W[k], link.carrier(k)) for k in range(link.K)]
    )
    assert abs(sol.sum_mse - per_carrier.sum()) < 1e-12
    np.testing.assert_allclose(sol.per_carrier_mse, per_carrier, atol=1e-12)
    assert sol.trace[0] >= sol.trace[-1] - 1e-8


# --- comparison precoders ---------------------------------------------------


def test_projected_eigenvector_single_carrier_and_margins():
    rng = np.random.default_rng(43)
    link = random_mc_link(rng, 1, 3, 4)
    Z = projected_eigenvector_precoders(link)
    _, vectors = whitened_eigenpairs(link)
    np.testing.assert_allclose(Z[0], p_projection(vectors[0], link.pc), atol=1e-12)

    link8 = random_mc_link(rng, 8, 3, 4)
    Z8 = projected_eigenvector_precoders(link8)
    np.testing.assert_allclose(multicarrier_margins(Z8, link8.pc), 0.0, atol=1e-12)

    sol = cyclic_multicarrier(link8, max_cyclic_iterations=1, max_dual_iterations=50)
    assert sol.trace[0] == pytest.approx(float(per_carrier_mse(link8, Z8).sum()), abs=1e-12)


def test_percarrier_cyclic_matches_gauss_seidel():
    rng = np.random.default_rng(44)
    link = random_mc_link(rng, 1, 3, 4)
    Z, W = percarrier_cyclic_precoders(link)
    pair = gauss_seidel_mmse(link.carrier(0))
    np.testing.assert_allclose(Z[0], pair.z, atol=1e-12)
    np.testing.assert_allclose(W[0], pair.w, atol=1e-12)

    link6 = random_mc_link(rng, 6, 3, 4)
    Z6, _ = percarrier_cyclic_precoders(link6)
    Zeig = projected_eigenvector_precoders(link6)
    assert per_carrier_mse(link6, Z6).sum() <= per_carrier_mse(link6, Zeig).sum() + 1e-12
    assert multicarrier_margins(Z6, link6.pc).min() >= -1e-9


def test_total_power_single_carrier_uses_all_power():
    rng = np.random.default_rng(45)
    link = random_mc_link(rng, 1, 3, 4)
    Z = total_power_precoders(link)
    assert np.sum(np.abs(Z) ** 2) == pytest.approx(link.pc.p_total, rel=1e-12)
    sigmas, vectors = whitened_eigenpairs(link)
    np.testing.assert_allclose(Z[0], np.sqrt(link.pc.p_total) * vectors[0], atol=1e-10)


def test_total_power_equal_gains_split_evenly():
    rng = np.random.default_rng(46)
    H1 = random_complex(rng, 3, 4)
    # same channel on every carrier: identical sigmas force an even split
    link = MultiCarrierLink(np.broadcast_to(H1, (5, 3, 4)).copy(), np.ones(3), PowerConstraints(np.full(4, 0.5)))
    Z = total_power_precoders(link)
    powers = np.sum(np.abs(Z) ** 2, axis=1)
    np.testing.assert_allclose(powers, link.pc.p_total / 5, rtol=1e-10)


def allocation_objective(q, sigmas):
    return np.sum(1.0 / (1.0 + q * sigmas))


def test_total_power_allocation_matches_grid_search():
    rng = np.random.default_rng(47)
    link = random_mc_link(rng, 4, 3, 4)
    sigmas, vectors = whitened_eigenpairs(link)
    p_T = link.pc.p_total
    Z = total_power_precoders(link)
    q_solver = np.sum(np.abs(Z) ** 2, axis=1)
    f_solver = allocation_objective(q_solver, sigmas)

    pts = np.linspace(0, p_T, 61)
    best = np.inf
    for q1 in pts:
        for q2 in pts:
            if q1 + q2 > p_T:
                continue
            rest = p_T - q1 - q2
            q3 = np.linspace(0, rest, 61)
            q4 = rest - q3
            vals = (
                1.0 / (1.0 + q1 * sigmas[0])
                + 1.0 / (1.0 + q2 * sigmas[1])
                + 1.0 / (1.0 + q3 * sigmas[2])
                + 1.0 / (1.0 + q4 * sigmas[3])
            )
            best = min(best, vals.min())
    assert f_solver <= best + 1e-6


def test_naive_scaling():
    rng = np.random.default_rng(48)
    link = random_mc_link(rng, 6, 3, 4)
    Z_tp = total_power_precoders(link)
    Z_naive = naive_scaled_precoders(link)
    totals_tp = np.sum(np.abs(Z_tp) ** 2, axis=0)
    totals_naive = np.sum(np.abs(Z_naive) ** 2, axis=0)
    for i in range(link.n):
        if totals_tp[i] > link.pc.p[i]:
            assert totals_naive[i] == pytest.approx(link.pc.p[i], rel=1e-12)
            factor = Z_naive[:, i] / Z_tp[:, i]
            np.testing.assert_allclose(factor, factor[0], atol=1e-12)  # equal across carriers
        else:
            np.testing.assert_array_equal(Z_naive[:, i], Z_tp[:, i])
    count, max_pct = violation_stats(Z_naive, link.pc)
    assert count == 0
    assert max_pct < 1e-9  # rescaled antennas sit on the budget to rounding


def test_violation_stats_examples():
    pc = PowerConstraints(np.array([1.0, 1.0]))
    assert violation_stats(np.zeros((2, 2), complex), pc) == (0, 0.0)
    Z = np.zeros((1, 2), complex)
    Z[0, 0] = np.sqrt(3.2)
    count, max_pct = violation_stats(Z, pc)
    assert count == 1
    assert max_pct == pytest.approx(220.0, rel=1e-9)
