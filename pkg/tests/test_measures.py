import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonexch.copulas import (
    C_MAX,
    FGM,
    PI,
    Clayton,
    Gaussian,
    M,
    MTheta,
    W,
    convex3,
    mix_symmetric,
    mix_transpose,
    perturbed_product,
    survival,
    transpose,
)
from nonexch.errors import DomainError
from nonexch.measures import (
    INF,
    GridSpec,
    bound_report,
    c_p,
    feasible_rho_range,
    k_mu,
    mu_p,
    mu_p_normalized,
    prescribe_alpha,
    prescribe_alpha_symmetric,
    rho_m_theta,
    sigma_p,
    spearman_rho,
    tau_m_theta,
)

G = 200
GRID = GridSpec(G)
SMALL = GridSpec(60)
PS = (1, 2, INF)

FAMILIES = [
    PI, M, W, Gaussian(0.5), Gaussian(-0.7), Clayton(2.0), FGM(0.5), FGM(-0.8),
    MTheta(0.0), MTheta(1 / 6), MTheta(1 / 4), MTheta(1 / 3),
    perturbed_product(C_MAX), perturbed_product(-0.5),
    mix_transpose(MTheta(1 / 3), 0.8), convex3(MTheta(1 / 4), 0.6, 0.1, Clayton(1.0)),
]


# --- constants --------------------------------------------------------------------

def test_c_p_examples():
    assert c_p(1) == 12
    assert c_p(2) == pytest.approx(math.sqrt(90), rel=1e-14)
    assert c_p(INF) == 4


def test_c_p_non_integer_agrees_with_gamma_formula():
    p = 1.5
    expected = (math.gamma(2 * p + 3) / (2 * math.gamma(p + 1) ** 2)) ** (1 / p)
    assert c_p(p) == pytest.approx(expected, rel=1e-12)


def test_k_mu_examples():
    assert k_mu(INF) == pytest.approx(1 / 3, abs=1e-15)
    assert k_mu(1) == pytest.approx(1 / 9, abs=1e-15)
    assert k_mu(2) == pytest.approx(math.sqrt(1 / 54), rel=1e-14)


@pytest.mark.parametrize("p", [0.5, 20.5, -1, float("nan")])
def test_bad_p(p):
    with pytest.raises(DomainError):
        c_p(p)
    with pytest.raises(DomainError):
        k_mu(p)


# --- mu_p / sigma_p / rho examples -----------------------------------------------------

@pytest.mark.parametrize("p", PS)
def test_mu_of_independence_is_zero(p):
    assert mu_p(PI, p, GRID) == 0.0
    assert sigma_p(PI, p, GRID) == 0.0
    assert mu_p_normalized(PI, p, GRID) == 0.0


def test_mu_inf_examples():
    assert abs(mu_p(MTheta(1 / 3), INF, GRID) - 1 / 3) <= 2 / G
    assert abs(mu_p(MTheta(1 / 6), INF, GRID) - 1 / 6) <= 2 / G
    assert abs(mu_p_normalized(MTheta(1 / 3), INF, GRID) - 1.0) <= 6 / G
    assert abs(mu_p_normalized(mix_transpose(MTheta(1 / 3), 0.75), INF, GRID) - 0.5) <= 6 / G


def test_mu_inf_of_m_theta_equals_theta_on_aligned_grid():
    # theta * G integral: the sup is attained at a node
    for th in (1 / 6, 1 / 4, 1 / 3):
        g = GridSpec(120)
        assert mu_p(MTheta(th), INF, g) == pytest.approx(th, abs=1e-12)


def test_sigma_examples():
    assert abs(sigma_p(M, 1, GRID) - 1.0) <= 2 / G
    assert abs(sigma_p(W, 1, GRID) - 1.0) <= 2 / G


def test_sigma_inf_uses_constant_four():
    s = sigma_p(M, INF, GRID)
    assert s == pytest.approx(4 * 0.25, abs=1e-12)


def test_spearman_examples():
    assert abs(spearman_rho(PI, GRID)) <= 2 / G
    assert abs(spearman_rho(MTheta(1 / 3), GRID) + 1 / 3) <= 3 / G
    assert abs(spearman_rho(M, GRID) - 1) <= 3 / G
    assert abs(spearman_rho(W, GRID) + 1) <= 3 / G


@pytest.mark.parametrize("th", [0.0, 1 / 6, 1 / 4, 1 / 3])
def test_spearman_matches_m_theta_closed_form(th):
    assert abs(spearman_rho(MTheta(th), GRID) - rho_m_theta(th)) <= 3 / G


def test_spearman_gaussian_closed_form():
    r = 0.5
    assert abs(spearman_rho(Gaussian(r), GRID) - 6 / math.pi * math.asin(r / 2)) <= 3 / G


def test_closed_form_examples():
    assert rho_m_theta(0) == 1
    assert rho_m_theta(1 / 3) == pytest.approx(-1 / 3, abs=1e-15)
    assert rho_m_theta(1 / 6) == pytest.approx(1 / 6, abs=1e-15)
    assert tau_m_theta(0) == 1
    assert tau_m_theta(1 / 3) == pytest.approx(1 / 9, abs=1e-15)
    assert tau_m_theta(1 / 4) == pytest.approx(1 / 4, abs=1e-15)
    with pytest.raises(DomainError):
        rho_m_theta(0.5)
    with pytest.raises(DomainError):
        tau_m_theta(-0.1)


def test_mu_1_m_third_matches_exact_integral():
    # exact integral of |M_{1/3} - M_{1/3}^t| is 2/27
    assert abs(mu_p(MTheta(1 / 3), 1, GridSpec(600)) - 2 / 27) <= 2 / 600


# --- bound report ----------------------------------------------------------------------

@pytest.mark.parametrize("c", [C_MAX, 0.5, -0.3])
def test_bound1_sharp_for_perturbation(c):
    rep = bound_report(perturbed_product(c), 1, GRID)
    assert abs(rep.bound1_slack) <= 1e-10


def test_bound_report_examples():
    rep = bound_report(M, 1, GRID)
    assert rep.mu_p == 0.0
    assert rep.bound1_slack >= 0
    # sigma_1(M) = rho(M) = 1, so (1 - |rho|)/3 - sigma_1/6 = -1/6: that chain link does not hold
    assert rep.bound2_slack == pytest.approx(-1 / 6, abs=2 / G)
    rep = bound_report(MTheta(1 / 3), 1, GRID)
    assert rep.bound1_slack >= -2 / G
    assert rep.bound2_slack >= -2 / G
    assert bound_report(MTheta(1 / 3), 2, GRID).bound2_slack is None


def test_bound_report_to_dict():
    d = bound_report(MTheta(0.25), INF, SMALL).to_dict()
    assert set(d) == {"mu_p", "sigma_p", "rho", "p", "G", "bound1_slack", "bound2_slack"}
    assert d["p"] == "inf"
    assert d["G"] == 60


@pytest.mark.parametrize("p", PS)
@pytest.mark.parametrize("C", FAMILIES, ids=str)
def test_bound_chain_over_sweep(C, p):
    rep = bound_report(C, p, SMALL)
    assert rep.bound1_slack >= -2 / SMALL.G
    if p == 1:
        # the valid form: sigma_1 <= 2 - |rho|
        assert rep.sigma_p <= 2 - abs(rep.rho) + 2 / SMALL.G


@pytest.mark.parametrize("C", FAMILIES, ids=str)
def test_normalized_is_bounded(C):
    for p in PS:
        v = mu_p_normalized(C, p, SMALL)
        assert 0.0 <= v <= 1 + 6 / SMALL.G


# --- feasibility and prescription -----------------------------------------------------

def test_feasible_range_examples():
    assert feasible_rho_range(0) == (-1, 1)
    lo, hi = feasible_rho_range(1 / 3)
    assert lo == pytest.approx(-1 / 3, abs=1e-15) and hi == pytest.approx(-1 / 3, abs=1e-15)
    lo, hi = feasible_rho_range(1 / 6)
    assert lo == pytest.approx(-2 / 3, abs=1e-15) and hi == pytest.approx(1 / 3, abs=1e-15)
    with pytest.raises(DomainError):
        feasible_rho_range(0.4)


def test_feasible_range_is_attained_by_symmetric_mixtures():
    mu0 = 1 / 6
    lo, hi = feasible_rho_range(mu0)
    a = 3 * mu0
    for S, target in ((W, lo), (M, hi)):
        D = mix_symmetric(MTheta(1 / 3), S, a)
        assert abs(mu_p(D, INF, GRID) - mu0) <= 2 / G
        assert abs(spearman_rho(D, GRID) - target) <= 3 / G


def test_prescribe_examples():
    assert prescribe_alpha(0.2, 0.2) == 1
    assert prescribe_alpha(0, 0.2) == 0.5
    assert prescribe_alpha(1 / 6, 1 / 3) == pytest.approx(0.75, abs=1e-15)
    assert prescribe_alpha_symmetric(0, 0.3) == 0
    assert prescribe_alpha_symmetric(0.3, 0.3) == 1
    assert prescribe_alpha_symmetric(1 / 12, 1 / 3) == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("mu0,muC", [(0.4, 0.3), (0.1, 0.0), (-0.1, 0.3)])
def test_prescribe_errors(mu0, muC):
    with pytest.raises(DomainError):
        prescribe_alpha(mu0, muC)
    with pytest.raises(DomainError):
        prescribe_alpha_symmetric(mu0, muC)


def test_prescription_round_trip():
    C = MTheta(1 / 3)
    muC = mu_p(C, INF, GRID)
    a = prescribe_alpha(0.1, muC)
    assert mu_p(mix_transpose(C, a), INF, GRID) == pytest.approx(0.1, abs=1e-12)
    a = prescribe_alpha_symmetric(0.1, muC)
    assert mu_p(mix_symmetric(C, PI, a), INF, GRID) == pytest.approx(0.1, abs=1e-12)


# --- algebraic laws ---------------------------------------------------------------------

BASES = [MTheta(1 / 3), MTheta(1 / 4), perturbed_product(C_MAX)]


@pytest.mark.parametrize("C", FAMILIES, ids=str)
@pytest.mark.parametrize("p", PS)
def test_transpose_invariance_is_exact(C, p):
    assert mu_p(transpose(C), p, SMALL) == mu_p(C, p, SMALL)


@pytest.mark.parametrize("C", FAMILIES, ids=str)
def test_survival_invariance(C):
    for p in PS:
        assert abs(mu_p(survival(C), p, SMALL) - mu_p(C, p, SMALL)) <= 2 / SMALL.G


@pytest.mark.parametrize("C", BASES, ids=str)
@pytest.mark.parametrize("p", PS)
def test_transpose_mixing_scaling_law(C, p):
    base = mu_p(C, p, SMALL)
    for a in np.round(np.arange(11) / 10, 10):
        got = mu_p(mix_transpose(C, a), p, SMALL)
        assert abs(got - abs(2 * a - 1) * base) <= 1e-12 * base


@pytest.mark.parametrize("C", BASES, ids=str)
@pytest.mark.parametrize("p", PS)
def test_symmetric_mixing_law(C, p):
    base = mu_p(C, p, SMALL)
    for a in np.round(np.arange(11) / 10, 10):
        got = mu_p(mix_symmetric(C, PI, a), p, SMALL)
        assert abs(got - a * base) <= 1e-12 * base


@settings(max_examples=40, deadline=None)
@given(beta=st.floats(0, 1), frac=st.floats(0, 1), p=st.sampled_from(PS))
def test_general_combination_law(beta, frac, p):
    gamma = frac * (1 - beta)
    C = MTheta(1 / 3)
    base = mu_p(C, p, SMALL)
    got = mu_p(convex3(C, beta, gamma, PI), p, SMALL)
    assert abs(got - abs(beta - gamma) * base) <= 1e-12 * base


@settings(max_examples=40, deadline=None)
@given(a1=st.floats(0, 1), a2=st.floats(0, 1), lam=st.floats(0, 1), p=st.sampled_from(PS))
def test_convexity_in_mixing_weight(a1, a2, lam, p):
    C = MTheta(1 / 4)
    mid = mu_p(mix_transpose(C, lam * a1 + (1 - lam) * a2), p, SMALL)
    ends = lam * mu_p(mix_transpose(C, a1), p, SMALL) + (1 - lam) * mu_p(mix_transpose(C, a2), p, SMALL)
    assert mid <= ends + 1e-12


@pytest.mark.parametrize(
    "C",
    [PI, M, W, Gaussian(0.4), Clayton(3.0), FGM(-0.5), mix_transpose(MTheta(1 / 3), 0.5),
     mix_symmetric(mix_transpose(MTheta(0.2), 0.5), FGM(0.3), 0.6), convex3(MTheta(1 / 6), 0.3, 0.3, M)],
    ids=str,
)
def test_symmetric_constructions_have_zero_measure(C):
    for p in PS:
        assert mu_p(C, p, SMALL) <= 1e-12


def test_grid_spec_validation():
    with pytest.raises(DomainError):
        GridSpec(1)
    with pytest.raises(DomainError):
        GridSpec(2.5)
    np.testing.assert_array_equal(GridSpec(4).nodes, [0.25, 0.5, 0.75, 1.0])
