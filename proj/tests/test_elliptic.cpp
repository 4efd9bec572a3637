#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include <scg/elliptic.hpp>

using scg::cplx;

namespace
{

constexpr double w1_ref = 5.24411510858423962;  // omega_1 at lambda = -1
constexpr double f1_ref = -2.39628046947118441; // Phi_1 at lambda = -1

bool close(cplx a, cplx b, double tol)
{
    return std::abs(a - b) <= tol;
}

} // namespace

TEST_CASE("periods at pinned real parameters", "[elliptic]")
{
    auto P = scg::periods(cplx(-1, 0));
    CHECK(close(P.omega1, cplx(w1_ref, 0), 1e-10));
    CHECK(close(P.phi1, cplx(f1_ref, 0), 1e-10));
    CHECK(close(P.omega2, cplx(0, w1_ref), 1e-10));
    CHECK(close(P.phi2, cplx(0, -f1_ref), 1e-10));

    auto Q = scg::periods(cplx(-0.5, 0));
    CHECK(close(Q.omega1, cplx(5.66294883370382, 0), 1e-9));
    CHECK(close(Q.phi1, cplx(-1.34413626907545, 0), 1e-9));
    CHECK(close(Q.omega2, cplx(0, 6.62655268094638), 1e-9));
    CHECK(close(Q.phi2, cplx(0, 2.86524775480036), 1e-9));

    auto R = scg::periods(cplx(-2, 0));
    CHECK(close(R.omega1, cplx(4.68568033658708, 0), 1e-9));
    CHECK(close(R.phi1, cplx(-4.05207223439773, 0), 1e-9));
    CHECK(close(R.omega2, cplx(0, 4.00430952182442), 1e-9));
    CHECK(close(R.phi2, cplx(0, 1.90089574140407), 1e-9));
}

TEST_CASE("contour continuation matches the branch-cut kernels", "[elliptic]")
{
    // A vanishing imaginary part forces the continuation route; the result
    // must agree with the direct real-axis kernels.
    for (double l : {-0.7, -1.0, -1.6}) {
        auto K = scg::periods(cplx(l, 0));
        auto C = scg::periods(cplx(l, 1e-12));
        CHECK(close(K.omega1, C.omega1, 1e-8));
        CHECK(close(K.omega2, C.omega2, 1e-8));
        CHECK(close(K.phi1, C.phi1, 1e-8));
        CHECK(close(K.phi2, C.phi2, 1e-8));
    }
}

TEST_CASE("bilinear period relation holds across the parameter region", "[elliptic]")
{
    for (cplx l : {cplx(-1, 0), cplx(-0.5, 0), cplx(-2, 0), cplx(-1, 0.2),
                   cplx(0.5, 0.86602540378443865), cplx(-0.3, -0.4)}) {
        CAPTURE(l.real(), l.imag());
        CHECK(std::abs(scg::bilinear_residual(l)) < 1e-8);
    }
}

TEST_CASE("cycle integrals of named forms match the period set", "[elliptic]")
{
    for (cplx l : {cplx(-1, 0), cplx(-1, 0.2)}) {
        auto P = scg::periods(l);
        CHECK(close(scg::alpha_period(0, 0, 0, l, 1), P.omega1, 1e-9));
        CHECK(close(scg::alpha_period(0, 0, 0, l, 2), P.omega2, 1e-9));
        CHECK(close(scg::alpha_period(1, 0, 0, l, 1), P.phi1, 1e-9));
        CHECK(close(scg::alpha_period(1, 0, 0, l, 2), P.phi2, 1e-9));
    }
    CHECK_THROWS_AS(scg::alpha_period(0, 0, 0, cplx(-1, 0), 3), scg::error);
}

TEST_CASE("exact forms reduce the higher periods", "[elliptic]")
{
    // x^2 dx/y = (2(lambda+1)/3) Phi - (lambda/3) omega periodwise, and
    // (x-1)(x-lambda) dx/y = -((lambda+1)/3) Phi + (2 lambda/3) omega.
    for (cplx l : {cplx(-1, 0), cplx(-0.5, 0), cplx(-1, 0.2)}) {
        CAPTURE(l.real(), l.imag());
        auto P = scg::periods(l);
        const cplx om[2] = {P.omega1, P.omega2};
        const cplx ph[2] = {P.phi1, P.phi2};
        for (int cyc = 1; cyc <= 2; ++cyc) {
            const cplx a2 = scg::alpha_period(2, 0, 0, l, cyc);
            const cplx a11 = scg::alpha_period(0, 1, 1, l, cyc);
            CHECK(close(a2, (2.0 * (l + 1.0) / 3.0) * ph[cyc - 1] - (l / 3.0) * om[cyc - 1], 1e-8));
            CHECK(close(a11, -((l + 1.0) / 3.0) * ph[cyc - 1] + (2.0 * l / 3.0) * om[cyc - 1], 1e-8));
        }
    }
    CHECK(close(scg::alpha_period(2, 0, 0, cplx(-1, 0), 1), cplx(w1_ref / 3.0, 0), 1e-9));
}

TEST_CASE("period ratios at the symmetric parameter", "[elliptic]")
{
    const cplx l(-1, 0);
    CHECK(close(scg::sigma(0, 0, 0, l), cplx(0, 1), 1e-9));
    CHECK(close(scg::sigma(1, 0, 0, l), cplx(0, -1), 1e-9));
    CHECK(close(scg::sigma(0, 1, 1, l), cplx(0, 1), 1e-9));
    CHECK(std::abs(scg::conjugate_ratio_residual(l)) < 1e-9);
}

TEST_CASE("conjugate-ratio root sits at -1 from every seed", "[elliptic]")
{
    CHECK(close(scg::weber_root(cplx(-1.2, 0)), cplx(-1, 0), 1e-8));
    CHECK(close(scg::weber_root(cplx(-0.8, 0)), cplx(-1, 0), 1e-8));
    CHECK(close(scg::weber_root(cplx(-1, 0.1)), cplx(-1, 0), 1e-7));
}

TEST_CASE("period derivatives against pinned values and differences", "[elliptic]")
{
    auto D = scg::period_derivatives(cplx(-1, 0));
    CHECK(close(D.domega1, cplx(0.711958659778263797, 0), 1e-10));
    CHECK(close(D.dphi1, cplx(1.91009889451385599, 0), 1e-10));
    CHECK(close(D.domega2, cplx(0, 1.91009889451385599), 1e-10));
    CHECK(close(D.dphi2, cplx(0, 0.711958659778263797), 1e-10));

    // The finite-difference route (exercised by a complex displacement that
    // keeps the value effectively real) must agree with the kernels.
    auto F = scg::period_derivatives(cplx(-1, 1e-9));
    CHECK(close(F.domega1, D.domega1, 1e-5));
    CHECK(close(F.dphi1, D.dphi1, 1e-5));
    CHECK(close(F.domega2, D.domega2, 1e-5));
    CHECK(close(F.dphi2, D.dphi2, 1e-5));
}

TEST_CASE("lattice ratio reduction", "[elliptic]")
{
    const cplx tau = scg::sigma(0, 0, 0, cplx(-1, 0));
    CHECK(close(scg::reduce_tau(tau), cplx(0, 1), 1e-9));
    CHECK(close(scg::reduce_tau(tau + 5.0), scg::reduce_tau(tau), 1e-12));
    CHECK(close(scg::reduce_tau(-1.0 / (tau + 1.0)), scg::reduce_tau(tau + 1.0), 1e-9));

    // The parameter value with extra symmetry lands on a corner of the
    // fundamental domain.
    const cplx corner = scg::reduce_tau(scg::sigma(0, 0, 0, cplx(0.5, 0.86602540378443865)));
    const cplx rho1(0.5, 0.86602540378443865), rho2(-0.5, 0.86602540378443865);
    CHECK((close(corner, rho1, 1e-7) || close(corner, rho2, 1e-7)));

    CHECK_THROWS_AS(scg::reduce_tau(cplx(0.3, -2)), scg::error);
}

TEST_CASE("parameters near the degenerations are rejected", "[elliptic]")
{
    CHECK_THROWS_AS(scg::periods(cplx(0.02, 0)), scg::error);
    CHECK_THROWS_AS(scg::periods(cplx(1.01, 0.01)), scg::error);
    // Admissible endpoint but inadmissible straight path from -1.
    CHECK_THROWS_AS(scg::periods(cplx(0.5, 0.01)), scg::error);
}

TEST_CASE("torus uniformization", "[elliptic]")
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> un(-0.45, 0.45);
    for (cplx l : {cplx(-1, 0), cplx(-1, 0.2)}) {
        CAPTURE(l.real(), l.imag());
        scg::torus_map tm(l);
        const cplx w1 = tm.omega1(), w2 = tm.omega2();

        for (int i = 0; i < 20; ++i) {
            const cplx z = un(rng) * w1 + un(rng) * w2;
            if (std::abs(tm.reduce(z)) < 0.05 * tm.lattice_scale()) {
                continue;
            }
            auto p = tm.map(z);
            REQUIRE(!p.at_end);
            // (x, y) lies on the curve.
            CHECK(std::abs(p.y * p.y - p.x * (p.x - 1.0) * (p.x - l)) < 1e-8 * (1.0 + std::norm(p.x)));
            // Lattice periodicity.
            auto q = tm.map(z + w1);
            auto r = tm.map(z - w2);
            CHECK(close(q.x, p.x, 1e-9 * (1.0 + std::abs(p.x))));
            CHECK(close(r.x, p.x, 1e-9 * (1.0 + std::abs(p.x))));
            // The sheet involution is z -> -z.
            auto m = tm.map(-z);
            CHECK(close(m.x, p.x, 1e-9 * (1.0 + std::abs(p.x))));
            CHECK(close(m.y, -p.y, 1e-9 * (1.0 + std::abs(p.y))));
        }

        // Half-lattice points carry the finite branch points {0, 1, lambda}.
        std::vector<cplx> branch = {cplx(0, 0), cplx(1, 0), l};
        for (cplx h : {0.5 * w1, 0.5 * w2, 0.5 * (w1 + w2)}) {
            auto p = tm.map(h);
            REQUIRE(!p.at_end);
            CHECK(std::abs(p.y) < 1e-7);
            double best = 1e9;
            for (cplx b : branch) {
                best = std::min(best, std::abs(p.x - b));
            }
            CHECK(best < 1e-8);
        }

        // Near the lattice, x blows up like 4 / z^2.
        const cplx ztiny(1e-4, 3e-5);
        auto p0 = tm.map(ztiny);
        CHECK(std::abs(p0.x * ztiny * ztiny / 4.0 - 1.0) < 1e-6);
        CHECK(tm.map(cplx(0, 0)).at_end);
        CHECK(tm.map(w1 + w2).at_end);
    }
}
