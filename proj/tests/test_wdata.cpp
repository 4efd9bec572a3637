#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include <scg/serialize.hpp>
#include <scg/sphere.hpp>
#include <scg/wdata.hpp>

using scg::cplx;

namespace
{

constexpr double pi = 3.14159265358979323846;
constexpr double rho_ref = 0.827900882694719343;

scg::case1_params generic_case1()
{
    scg::case1_params p;
    p.b = cplx(0.9, 0.0);
    p.c = cplx(0.1, 0.05);
    p.l = cplx(-0.8, 0.1);
    p.m = cplx(0.2, 0.0);
    p.y0 = cplx(0.1, 0.0);
    p.lambda = cplx(-1.1, 0.0);
    return p;
}

scg::case2_params generic_case2()
{
    scg::case2_params p;
    p.a = std::polar(1.0, 0.3);
    p.b = cplx(0.7, -0.2);
    p.c = cplx(0.05, 0.12);
    p.x0 = cplx(-0.3, 0.04);
    p.lambda = cplx(-1.0, 0.0);
    return p;
}

} // namespace

TEST_CASE("sphere points and distances", "[sphere]")
{
    const auto zero = scg::sphere_pt::from_value(cplx(0, 0));
    const auto one = scg::sphere_pt::from_value(cplx(1, 0));
    const auto inf = scg::sphere_pt::pole();
    CHECK_THAT(scg::sphere_distance(zero, inf), Catch::Matchers::WithinAbs(pi / 2, 1e-14));
    CHECK_THAT(scg::sphere_distance(zero, one), Catch::Matchers::WithinAbs(pi / 4, 1e-14));
    CHECK(scg::sphere_distance(one, one) < 1e-15);
    // w and -1/conj(w) are antipodal for any w.
    const cplx w(0.37, -1.21);
    const auto p = scg::sphere_pt::from_value(w);
    CHECK_THAT(scg::sphere_distance(p, scg::sphere_pt::from_value(-1.0 / std::conj(w))),
               Catch::Matchers::WithinAbs(pi / 2, 1e-13));
    CHECK_THAT(scg::sphere_distance(p, p.antipode()), Catch::Matchers::WithinAbs(pi / 2, 1e-13));
    CHECK(scg::sphere_pt(cplx(1e300, 0), cplx(2e300, 0)).is_pole() == false);
    CHECK_THROWS_AS(scg::sphere_pt(cplx(0, 0), cplx(0, 0)), scg::error);
}

TEST_CASE("implicit base point", "[wdata]")
{
    CHECK(scg::x0_implicit(cplx(0, 0), cplx(-1, 0)) == cplx(0, 0));
    const cplx x0 = scg::x0_implicit(cplx(1e-3, 0), cplx(-1, 0));
    CHECK(std::abs(x0 - cplx(-1e-6, 0)) < 1e-14);

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> un(-0.15, 0.15);
    for (int i = 0; i < 12; ++i) {
        const cplx y0(un(rng), un(rng));
        const cplx lam(-1.0 + un(rng), un(rng));
        const cplx x = scg::x0_implicit(y0, lam);
        CHECK(std::abs(x * (x - 1.0) * (x - lam) - y0 * y0) < 1e-12);
    }

    // The branch is stationary in y0 at y0 = 0.
    const double h = 1e-6;
    const cplx dd = (scg::x0_implicit(cplx(h, 0), cplx(-1, 0)) - scg::x0_implicit(cplx(-h, 0), cplx(-1, 0)))
                    / (2.0 * h);
    CHECK(std::abs(dd) < 1e-9);

    CHECK_THROWS_AS(scg::x0_implicit(cplx(5, 0), cplx(-1, 0)), scg::error);
}

TEST_CASE("scale constant from both routes", "[wdata]")
{
    const auto r = scg::cg_rho();
    CHECK_THAT(r.gamma_route, Catch::Matchers::WithinAbs(rho_ref, 1e-9));
    CHECK_THAT(r.period_route, Catch::Matchers::WithinAbs(rho_ref, 1e-9));
    CHECK(std::abs(r.gamma_route - r.period_route) < 1e-8);
}

TEST_CASE("residue coefficients at the distinguished datum", "[wdata]")
{
    const auto p = scg::vstar();
    const auto [A, B] = scg::coeffs_AB(p, scg::x0_implicit(p.y0, p.lambda));
    CHECK(std::abs(A) < 1e-12);
    CHECK(std::abs(B - cplx(0.456946581044464, 0)) < 1e-9);
}

TEST_CASE("component differentials are mutually consistent", "[wdata]")
{
    // phi dh * psi dh = dh * (phi psi dh) holds identically on the curve;
    // it ties all four polynomial forms together and checks the implicit
    // base point at once.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> un(-0.45, 0.45);
    for (const scg::w_data d :
         {scg::w_data(scg::vstar()), scg::w_data(generic_case1()), scg::w_data(generic_case2()),
          scg::w_data(scg::deformed_r3{rho_ref, cplx(-1, 0), std::polar(1.0, 0.6)})}) {
        const scg::data_eval ev(d);
        const scg::torus_map tm(ev.lambda());
        for (int i = 0; i < 10; ++i) {
            const cplx z = un(rng) * tm.omega1() + un(rng) * tm.omega2();
            if (std::abs(tm.reduce(z)) < 0.05 * tm.lattice_scale()) {
                continue;
            }
            const auto f = ev.forms(tm.map(z));
            const cplx lhs = f.phi_dh * f.psi_dh;
            const cplx rhs = f.dh * f.phi_psi_dh;
            CHECK(std::abs(lhs - rhs) < 1e-9 * (1.0 + std::abs(lhs)));
        }
        scg::curve_pt end;
        end.at_end = true;
        CHECK_THROWS_AS(ev.forms(end), scg::error);
    }
}

TEST_CASE("constant-product data keep phi*psi fixed", "[wdata]")
{
    const auto p = scg::vstar();
    const scg::data_eval ev{scg::w_data(p)};
    const scg::torus_map tm(p.lambda);
    const cplx expect = p.l / p.b;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> un(-0.45, 0.45);
    for (int i = 0; i < 20; ++i) {
        const cplx z = un(rng) * tm.omega1() + un(rng) * tm.omega2();
        if (std::abs(tm.reduce(z)) < 0.05 * tm.lattice_scale()) {
            continue;
        }
        const auto f = ev.forms(tm.map(z));
        if (std::abs(f.dh) < 1e-6) {
            continue;
        }
        CHECK(std::abs(f.phi_psi_dh / f.dh - expect) < 1e-10);
    }
}

TEST_CASE("zeros and poles of the forms balance on the torus", "[wdata]")
{
    // Each component differential is meromorphic on the torus, so the
    // winding of its argument around a (generic) fundamental cell is zero.
    for (const scg::w_data d : {scg::w_data(scg::vstar()), scg::w_data(generic_case1())}) {
        const scg::data_eval ev(d);
        const scg::torus_map tm(ev.lambda());
        const cplx base = 0.246 * tm.omega1() + 0.317 * tm.omega2();
        const int M = 700;
        for (int which = 0; which < 4; ++which) {
            auto value = [&](cplx z) {
                const auto f = ev.forms(tm.map(z));
                return which == 0 ? f.phi_dh : which == 1 ? f.psi_dh : which == 2 ? f.dh : f.phi_psi_dh;
            };
            const cplx corners[5] = {base, base + tm.omega1(), base + tm.omega1() + tm.omega2(),
                                     base + tm.omega2(), base};
            double total = 0.0;
            cplx prev = value(base);
            for (int e = 0; e < 4; ++e) {
                for (int k = 1; k <= M; ++k) {
                    const cplx z = corners[e] + (corners[e + 1] - corners[e]) * (double(k) / M);
                    const cplx cur = value(z);
                    total += std::arg(cur / prev);
                    prev = cur;
                }
            }
            CAPTURE(which);
            CHECK(std::abs(total) < 0.05);
        }
    }
}

TEST_CASE("metric density is pole-safe", "[wdata]")
{
    const auto p = generic_case1();
    const scg::data_eval ev{scg::w_data(p)};
    const cplx x0 = ev.x0();

    // Generic point: agree with the direct (division-full) formula.
    const scg::torus_map tm(p.lambda);
    const auto pt = tm.map(0.31 * tm.omega1() + 0.22 * tm.omega2());
    const cplx phi = (pt.x - x0) / (p.b * (pt.y - p.y0) + p.c * (pt.x - x0));
    const cplx psi = (p.l * (pt.y + p.y0) + p.m * (pt.x - x0)) / (pt.x - x0);
    const cplx dhc = p.b * (pt.y - p.y0) + p.c * (pt.x - x0);
    const double direct = std::norm(phi - std::conj(psi)) * std::norm(dhc);
    CHECK_THAT(ev.metric_density(pt), Catch::Matchers::WithinRel(direct, 1e-9));

    // At the base point where dh vanishes, the limit is |psi dh|^2, and the
    // uniform formula must connect continuously to nearby curve points.
    const scg::curve_pt c1{x0, p.y0, false};
    const double at_c1 = ev.metric_density(c1);
    const auto fc1 = ev.forms(c1);
    CHECK(fc1.dh == cplx(0, 0));
    CHECK_THAT(at_c1, Catch::Matchers::WithinRel(std::norm(fc1.psi_dh), 1e-12));
    const cplx xn = x0 + cplx(1e-6, 0);
    cplx yn = std::sqrt(xn * (xn - 1.0) * (xn - p.lambda));
    if (std::abs(yn - p.y0) > std::abs(yn + p.y0)) {
        yn = -yn;
    }
    CHECK_THAT(ev.metric_density(scg::curve_pt{xn, yn, false}), Catch::Matchers::WithinRel(at_c1, 1e-3));

    scg::curve_pt end;
    end.at_end = true;
    CHECK_THROWS_AS(ev.metric_density(end), scg::error);
}

TEST_CASE("sphere-valued functions take their limits", "[wdata]")
{
    const auto p = scg::vstar();
    const scg::data_eval ev{scg::w_data(p)};
    scg::curve_pt end;
    end.at_end = true;
    CHECK(scg::sphere_distance(ev.phi(end), scg::sphere_pt::from_value(cplx(0, 0))) < 1e-14);
    CHECK(ev.psi(end).is_pole());
    // At the branch point over x0 = 0, phi vanishes and psi poles.
    const scg::curve_pt origin{cplx(0, 0), cplx(0, 0), false};
    CHECK(scg::sphere_distance(ev.phi(origin), scg::sphere_pt::from_value(cplx(0, 0))) < 1e-14);
    CHECK(ev.psi(origin).is_pole());

    const auto g = generic_case1();
    const scg::data_eval gev{scg::w_data(g)};
    const cplx x0 = gev.x0();
    const cplx qp = scg::cubic_deriv(x0, g.lambda);
    // 0/0 points: phi has the l'Hopital value at (x0, y0), psi at (x0, -y0).
    const auto phi_c1 = gev.phi(scg::curve_pt{x0, g.y0, false});
    CHECK(std::abs(phi_c1.value() - 2.0 * g.y0 / (g.b * qp + 2.0 * g.c * g.y0)) < 1e-12);
    CHECK(gev.psi(scg::curve_pt{x0, g.y0, false}).is_pole());
    const auto psi_c2 = gev.psi(scg::curve_pt{x0, -g.y0, false});
    CHECK(std::abs(psi_c2.value() - (g.m - g.l * qp / (2.0 * g.y0))) < 1e-12);
}

TEST_CASE("shear family construction and guards", "[wdata]")
{
    const auto d = scg::lorentz_deform(scg::w_data(scg::vstar()), std::polar(1.0, pi / 4));
    CHECK_THAT(d.rho, Catch::Matchers::WithinAbs(rho_ref, 1e-9));
    CHECK(std::abs(d.zeta - std::polar(1.0, pi / 4)) < 1e-12);
    CHECK(std::abs(d.lambda - cplx(-1, 0)) < 1e-15);

    // Composition multiplies the parameters.
    const auto dd = scg::lorentz_deform(scg::w_data(d), cplx(2.0, 0.5));
    CHECK(std::abs(dd.zeta - d.zeta * cplx(2.0, 0.5)) < 1e-14);

    CHECK_THROWS_AS(scg::lorentz_deform(scg::w_data(scg::vstar()), cplx(0, 1)), scg::error);
    CHECK_THROWS_AS(scg::lorentz_deform(scg::w_data(scg::vstar()), cplx(0, 0)), scg::error);
    CHECK_THROWS_AS(scg::lorentz_deform(scg::w_data(generic_case1()), cplx(1, 0)), scg::error);
    CHECK_THROWS_AS(scg::lorentz_deform(scg::w_data(generic_case2()), cplx(1, 0)), scg::error);
}

TEST_CASE("shear normalization is a congruence", "[wdata]")
{
    scg::deformed_r3 d{rho_ref, cplx(-1, 0), 2.0 * std::polar(1.0, 0.5)};
    const auto n = scg::normalize_lorentz(d);
    CHECK_THAT(n.t, Catch::Matchers::WithinAbs(2.0, 1e-12));
    CHECK(std::abs(std::abs(n.data.zeta) - 1.0) < 1e-12);

    // The boost congruence leaves the induced metric untouched pointwise.
    const scg::data_eval before{scg::w_data(d)};
    const scg::data_eval after{scg::w_data(n.data)};
    const scg::torus_map tm(d.lambda);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> un(-0.45, 0.45);
    for (int i = 0; i < 10; ++i) {
        const cplx z = un(rng) * tm.omega1() + un(rng) * tm.omega2();
        if (std::abs(tm.reduce(z)) < 0.05 * tm.lattice_scale()) {
            continue;
        }
        const auto pt = tm.map(z);
        CHECK_THAT(after.metric_density(pt), Catch::Matchers::WithinRel(before.metric_density(pt), 1e-10));
    }

    // phi * psi is pinned to -1/zeta^2.
    const auto f = before.forms(tm.map(cplx(0.4, 0.3) * tm.omega1()));
    CHECK(std::abs(f.phi_psi_dh / f.dh + 1.0 / (d.zeta * d.zeta)) < 1e-12);
}

TEST_CASE("regularity margin", "[wdata]")
{
    // The distinguished datum has phi and conj(psi) antipodal everywhere.
    CHECK_THAT(scg::regularity_margin(scg::w_data(scg::vstar()), 32), Catch::Matchers::WithinAbs(pi / 2, 1e-6));

    // A sheared member stays regular but is no longer extremal.
    const scg::deformed_r3 d{rho_ref, cplx(-1, 0), std::polar(1.0, pi / 4)};
    const double m = scg::regularity_margin(scg::w_data(d), 32);
    CHECK(m > 0.0);
    CHECK(m < pi / 2 - 0.01);
}

TEST_CASE("data serialize to JSON and back bit-exactly", "[serialize]")
{
    const scg::w_data items[] = {scg::w_data(scg::vstar()), scg::w_data(generic_case1()),
                                 scg::w_data(generic_case2()),
                                 scg::w_data(scg::deformed_r3{rho_ref, cplx(-1, 0.2), cplx(0.3, -0.7)})};
    for (const auto &d : items) {
        const std::string text = scg::serialize(d).dump();
        const scg::w_data back = scg::deserialize(scg::json::parse(text));
        REQUIRE(back.index() == d.index());
        CHECK(scg::serialize(back).dump() == text);
        if (const auto *c1 = std::get_if<scg::case1_params>(&d)) {
            const auto &r = std::get<scg::case1_params>(back);
            CHECK(r.b == c1->b);
            CHECK(r.c == c1->c);
            CHECK(r.l == c1->l);
            CHECK(r.m == c1->m);
            CHECK(r.y0 == c1->y0);
            CHECK(r.lambda == c1->lambda);
        }
    }
    CHECK_THROWS_AS(scg::deserialize(scg::json::parse("{\"case\":7}")), scg::error);
    CHECK_THROWS_AS(scg::deserialize(scg::json::parse("{\"case\":1,\"b\":[0,0]}")), scg::error);
}

TEST_CASE("square-torus obstruction constants", "[wdata]")
{
    const auto o = scg::square_torus_obstruction();
    CHECK_THAT(o.k, Catch::Matchers::WithinAbs(0.456946581044464, 1e-9));
    CHECK_THAT(o.rho_fourth, Catch::Matchers::WithinAbs(0.469800400338505269, 1e-9));
    const double rho = scg::cg_rho_gamma();
    CHECK_THAT(o.rho_fourth, Catch::Matchers::WithinAbs(std::pow(rho, 4), 1e-10));
    CHECK(o.gap > 0.12);
    CHECK(o.bound_coeff > 0.6);
}
