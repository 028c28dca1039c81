from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from algmimo.channels import AR1, AgramWish, Atoms, CorrWish, MP, compile_channel, mean_of
from algmimo.montecarlo import (
    McConfig,
    _factor,
    ar1_covariance,
    atom_multiplicities,
    deterministic_matrix,
    estimate,
    gaussian_matrix,
    run_trials,
    sample_trial,
    write_fig_csv,
    write_table_csv,
    table_rows,
)
from algmimo.transforms import shannon_coefficients

TWO = Atoms(((F(1, 2), 1), (F(1, 2), 2)))


def test_multiplicities_examples():
    assert atom_multiplicities(TWO.atoms, 50) == [25, 25]
    assert atom_multiplicities(((F(1, 3), 1), (F(2, 3), 2)), 50) == [17, 33]
    assert np.array_equal(np.diag(deterministic_matrix(TWO, 50)), np.repeat([1.0, 2.0], 25))


@given(st.lists(st.integers(1, 9), min_size=1, max_size=5), st.integers(1, 200))
def test_multiplicities_sum(raw, N):
    tot = sum(raw)
    atoms = [(F(r, tot), i) for i, r in enumerate(raw)]
    mult = atom_multiplicities(atoms, N)
    assert sum(mult) == N
    assert all(abs(k - float(w) * N) < 1 for k, (w, _) in zip(mult, atoms))


def test_degenerate_multiplicity_warns():
    with pytest.warns(UserWarning):
        deterministic_matrix(Atoms(((F(1, 100), 5), (F(99, 100), 1))), 10)


def test_ar1_cholesky_by_hand():
    L = _factor(ar1_covariance(F(1, 2), 3))
    assert L[1, 0] == pytest.approx(0.5) and L[1, 1] == pytest.approx(np.sqrt(3) / 2)
    assert np.allclose(L @ L.T, [[1, .5, .25], [.5, 1, .5], [.25, .5, 1]])


def test_gaussian_stream_statistics():
    g = gaussian_matrix(7, 0, (400, 400))
    assert abs(np.mean(np.abs(g) ** 2) - 1) < 0.01
    assert abs(np.mean(g.real ** 2) - 0.5) < 0.01 and abs(np.mean(g.real * g.imag)) < 0.01


def test_scalar_case():
    cfg = McConfig(MP(1), 1, 1, 4000, 3, (1.0,), 1)
    tr, sh, _ = sample_trial(cfg, 0)
    assert tr[0] > 0 and sh[0] > 0
    est = estimate(cfg)
    m, se = est.nu_hat[0]
    assert abs(m - 1) < 4 * se


@pytest.mark.parametrize("expr,Nr,Nt", [
    (MP(F(1, 2)), 10, 20), (CorrWish(TWO, TWO, F(2)), 20, 10),
    (CorrWish(AR1(F(1, 2)), AR1(F(1, 2)), F(1, 2)), 8, 16), (AgramWish(TWO, F(1, 2), 1), 10, 20),
])
def test_determinant_identity(expr, Nr, Nt):
    cfg = McConfig(expr, Nr, Nt, 5, 11, (0.1, 1.0, 10.0), 2)
    for t in range(5):
        _, _, gap = sample_trial(cfg, t)
        assert gap < 1e-9


def test_seeded_reproducibility():
    cfg = McConfig(CorrWish(TWO, TWO, F(1, 2)), 10, 20, 6, 99, (1.0,), 3)
    a, b = sample_trial(cfg, 4), sample_trial(cfg, 4)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(sample_trial(cfg, 5)[0], a[0])


def test_worker_invariance_and_merge_order():
    cfg = McConfig(MP(F(1, 2)), 10, 20, 30, 5, (0.5, 2.0), 3)
    one = estimate(cfg, workers=1)
    three = estimate(cfg, workers=3)
    assert np.array_equal(one.traces, three.traces) and np.array_equal(one.shannon, three.shannon)
    left, right = run_trials(cfg, range(15)), run_trials(cfg, range(15, 30))
    merged = right.merge(left)
    assert np.array_equal(merged.traces, one.traces)
    assert merged.nu_hat == one.nu_hat


def test_zero_trials_rejected():
    with pytest.raises(ValueError):
        estimate(McConfig(MP(1), 2, 2, 0))


@pytest.mark.parametrize("expr,Nr,Nt", [
    (CorrWish(TWO, TWO, F(1, 2)), 10, 20), (AgramWish(Atoms(((1, 1),)), F(1, 2), 1), 10, 20),
    (CorrWish(AR1(F(1, 2)), AR1(F(1, 3)), 1), 12, 12),
])
def test_first_moment_unbiased(expr, Nr, Nt):
    est = estimate(McConfig(expr, Nr, Nt, 1500, 21, (), 1))
    m, se = est.moments_hat[0]
    assert abs(m - float(mean_of(expr))) < 4 * se + 1e-12


def test_finite_size_error_shrinks():
    c = F(1, 2)
    expr = CorrWish(TWO, TWO, c)
    nu = [float(x) for x in shannon_coefficients(compile_channel(expr).moments(3))]
    errs = {}
    for Nr in (10, 40):
        est = estimate(McConfig(expr, Nr, 2 * Nr, 5000, 8, (), 3))
        errs[Nr] = [abs(m - t) for (m, _), t in zip(est.nu_hat, nu)]
    assert all(errs[40][k] < errs[10][k] for k in (1, 2))
    assert errs[40][0] < 0.01


def test_shannon_means_monotone():
    est = estimate(McConfig(MP(F(1, 4)), 10, 40, 200, 1, (0.1, 0.5, 1.0, 5.0), 1))
    means = [m for m, _ in est.shannon_hat]
    assert all(np.diff(means) > 0) and all(se >= 0 for _, se in est.shannon_hat)


def test_csv_layouts():
    cfg = McConfig(MP(F(1, 2)), 4, 8, 10, 1, (1.0,), 2)
    est = estimate(cfg)
    text = write_table_csv(table_rows(est, [1, F(-3, 4)], cfg))
    assert text.splitlines()[0] == "Nr,Nt,c,k,nu_hat,nu_theory,stderr"
    assert write_fig_csv([1.0], est, [0.5]).splitlines()[0] == "gamma,V_hat,stderr,V_theory"
    assert est.metadata["rng"].startswith("numpy.random.Philox") and est.metadata["seed"] == 1
