#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include <scg/quadrature.hpp>

using scg::cplx;

namespace
{

constexpr double pi = 3.14159265358979323846;

// (1/2) Gamma(1/4) Gamma(1/2) / Gamma(3/4)
constexpr double half_beta_14 = 2.62205755429211981;
// (1/2) Gamma(3/4) Gamma(1/2) / Gamma(5/4)
constexpr double half_beta_34 = 1.19814023473559221;

scg::singular_integrand inv_sqrt_weight(std::function<cplx(double, double)> g)
{
    scg::singular_integrand s;
    s.f = std::move(g);
    s.left_exponent = -0.5;
    s.right_exponent = -0.5;
    return s;
}

} // namespace

TEST_CASE("tanh-sinh reproduces Beta(1/2,1/2) = pi", "[quadrature]")
{
    auto r = scg::integrate_singular(
        inv_sqrt_weight([](double t, double omt) { return cplx(1.0 / std::sqrt(t * omt), 0.0); }), 1e-13);
    CHECK_THAT(r.value.real(), Catch::Matchers::WithinAbs(pi, 1e-12));
    CHECK(std::abs(r.value.imag()) < 1e-14);
    CHECK(r.error < 1e-10);
    CHECK(r.evals > 0);
}

TEST_CASE("tanh-sinh reproduces the lemniscatic Beta values", "[quadrature]")
{
    auto r1 = scg::integrate_singular(
        inv_sqrt_weight([](double t, double omt) { return cplx(1.0 / std::sqrt(t * omt * (1.0 + t)), 0.0); }), 1e-13);
    CHECK_THAT(r1.value.real(), Catch::Matchers::WithinAbs(half_beta_14, 1e-11));

    auto r2 = scg::integrate_singular(
        inv_sqrt_weight([](double t, double omt) { return cplx(std::sqrt(t / (omt * (1.0 + t))), 0.0); }), 1e-13);
    CHECK_THAT(r2.value.real(), Catch::Matchers::WithinAbs(half_beta_34, 1e-11));
}

TEST_CASE("degree <= 6 polynomials against the Beta expansion", "[quadrature]")
{
    // int_0^1 t^k / sqrt(t(1-t)) dt = B(k+1/2, 1/2), assembled from gamma_fn.
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int rep = 0; rep < 4; ++rep) {
        std::array<double, 7> p{};
        for (auto &c : p) {
            c = coef(rng);
        }
        double expected = 0.0;
        for (int k = 0; k <= 6; ++k) {
            expected += p[static_cast<std::size_t>(k)] * scg::gamma_fn(k + 0.5) * scg::gamma_fn(0.5)
                        / scg::gamma_fn(k + 1.0);
        }
        auto r = scg::integrate_singular(inv_sqrt_weight([&](double t, double omt) {
                                             double v = 0.0, tk = 1.0;
                                             for (int k = 0; k <= 6; ++k) {
                                                 v += p[static_cast<std::size_t>(k)] * tk;
                                                 tk *= t;
                                             }
                                             return cplx(v / std::sqrt(t * omt), 0.0);
                                         }),
                                         1e-13);
        CHECK_THAT(r.value.real(), Catch::Matchers::WithinAbs(expected, 1e-11));
    }
}

TEST_CASE("splitting the interval is additive within the error estimates", "[quadrature]")
{
    auto whole = scg::integrate_singular(
        inv_sqrt_weight([](double t, double omt) { return cplx(std::cos(t) / std::sqrt(t * omt), 0.0); }), 1e-13);
    for (double c : {0.3, 0.5, 0.7}) {
        const double omc = 1.0 - c;
        scg::singular_integrand left;
        left.f = [&, c](double s, double oms) {
            const double t = c * s;
            const double omt = omc + c * oms;
            return cplx(c * std::cos(t) / std::sqrt(t * omt), 0.0);
        };
        left.left_exponent = -0.5;
        scg::singular_integrand right;
        right.f = [&, c](double s, double oms) {
            const double t = c + omc * s;
            const double omt = omc * oms;
            return cplx(omc * std::cos(t) / std::sqrt(t * omt), 0.0);
        };
        right.right_exponent = -0.5;
        auto a = scg::integrate_singular(left, 1e-13);
        auto b = scg::integrate_singular(right, 1e-13);
        const double gap = std::abs(whole.value - a.value - b.value);
        CHECK(gap <= 2.0 * (whole.error + a.error + b.error) + 1e-13);
    }
}

TEST_CASE("Gauss pair route agrees after the sin^2 substitution", "[quadrature]")
{
    // t = sin^2(u) turns the endpoint singularities into a smooth integrand,
    // giving an independent rule and an independent variable.
    auto smooth = scg::integrate_line(
        [](double u) {
            const double s = std::sin(u), t = s * s;
            return cplx(2.0 / std::sqrt(1.0 + t), 0.0);
        },
        0.0, pi / 2, 1e-13);
    CHECK_THAT(smooth.value.real(), Catch::Matchers::WithinAbs(half_beta_14, 1e-12));

    auto ts = scg::integrate_singular(
        inv_sqrt_weight([](double t, double omt) { return cplx(1.0 / std::sqrt(t * omt * (1.0 + t)), 0.0); }), 1e-13);
    CHECK_THAT(smooth.value.real(), Catch::Matchers::WithinAbs(ts.value.real(), 1e-11));
}

TEST_CASE("quadrature error paths", "[quadrature]")
{
    scg::singular_integrand bad;
    bad.f = [](double t, double) { return cplx(1.0 / t, 0.0); };
    bad.left_exponent = -1.0;
    CHECK_THROWS_AS(scg::integrate_singular(bad, 1e-10), scg::error);

    scg::singular_integrand mid;
    mid.f = [](double t, double) { return cplx(1.0 / (t - 0.5), 0.0); };
    CHECK_THROWS_AS(scg::integrate_singular(mid, 1e-10), scg::error);

    scg::singular_integrand wild;
    wild.f = [](double t, double) { return cplx(std::cos(1e8 * t), 0.0); };
    try {
        scg::integrate_singular(wild, 1e-15);
        FAIL("expected NonConvergence");
    } catch (const scg::non_convergence_error &e) {
        CHECK(std::abs(e.last() - e.previous()) > 0.0);
    }
}

TEST_CASE("Lanczos gamma", "[quadrature]")
{
    CHECK_THAT(scg::gamma_fn(0.25), Catch::Matchers::WithinRel(3.62560990822190831, 1e-13));
    CHECK_THAT(scg::gamma_fn(0.5), Catch::Matchers::WithinRel(std::sqrt(pi), 1e-13));
    CHECK_THAT(scg::gamma_fn(0.75), Catch::Matchers::WithinRel(1.22541670246517765, 1e-13));
    CHECK_THAT(scg::gamma_fn(5.0), Catch::Matchers::WithinRel(24.0, 1e-13));
    CHECK_THAT(scg::gamma_fn(-0.5), Catch::Matchers::WithinRel(-2.0 * std::sqrt(pi), 1e-12));

    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> xs(0.1, 9.0);
    for (int i = 0; i < 40; ++i) {
        const double x = xs(rng);
        CHECK_THAT(scg::gamma_fn(x + 1.0), Catch::Matchers::WithinRel(x * scg::gamma_fn(x), 1e-12));
    }
    CHECK_THROWS_AS(scg::gamma_fn(0.0), scg::error);
    CHECK_THROWS_AS(scg::gamma_fn(-3.0), scg::error);
}

TEST_CASE("AGM complete elliptic integral", "[quadrature]")
{
    CHECK_THAT(scg::agm_elliptic_k(cplx(0, 0)).real(), Catch::Matchers::WithinAbs(pi / 2, 1e-14));
    CHECK_THAT(scg::agm_elliptic_k(cplx(0.5, 0)).real(), Catch::Matchers::WithinAbs(1.85407467730137192, 1e-13));
    CHECK_THAT(scg::agm_elliptic_k(cplx(-1, 0)).real(), Catch::Matchers::WithinAbs(1.31102877714605991, 1e-13));
    CHECK_THROWS_AS(scg::agm_elliptic_k(cplx(1.5, 0)), scg::error);

    // Independent route: direct quadrature of the defining integral.
    const cplx m(0.3, 0.1);
    auto direct = scg::integrate_line(
        [&](double u) {
            const double s = std::sin(u);
            return 1.0 / std::sqrt(cplx(1, 0) - m * s * s);
        },
        0.0, pi / 2, 1e-13);
    const cplx k = scg::agm_elliptic_k(m);
    CHECK(std::abs(k - direct.value) < 1e-12);
}
