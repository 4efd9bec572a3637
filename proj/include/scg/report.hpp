#ifndef SCG_REPORT_HPP
#define SCG_REPORT_HPP

// End-to-end acceptance survey. Twelve numbered criteria exercise the whole
// pipeline -- period integrals, the square-modulus root, the period mapping
// and its Jacobian, family tracing, the deformed immersions, and the
// hyperelliptic pullback -- each with pinned tolerances and a wall-clock
// budget. Every criterion reports its measured quantities so a failure
// says how far off the build is, not just that it is off.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <scg/elliptic.hpp>
#include <scg/errors.hpp>
#include <scg/solver.hpp>
#include <scg/surface.hpp>
#include <scg/wdata.hpp>

namespace scg
{

struct criterion_metric
{
    std::string name;
    double value = 0;
};

struct criterion_result
{
    int number = 0;
    std::string name;    ///< short slug, stable across runs
    std::string summary; ///< one-phrase statement of what is checked
    bool passed = false;
    double seconds = 0;        ///< measured wall-clock time
    double budget_seconds = 0; ///< 0 when the criterion carries no budget
    std::vector<criterion_metric> metrics;
    std::string note; ///< failure reasons, semicolon-separated
};

inline constexpr int acceptance_count = 12;

namespace detail
{

inline case2_params involution_sample_case2()
{
    case2_params p;
    p.a = std::polar(1.0, 0.3);
    p.b = cplx(0.7, -0.2);
    p.c = cplx(0.05, 0.12);
    p.x0 = cplx(-0.3, 0.04);
    p.lambda = cplx(-1.0, 0.0);
    return p;
}

inline case1_params involution_control_case1()
{
    case1_params p;
    p.b = cplx(0.9, 0.0);
    p.c = cplx(0.1, 0.05);
    p.l = cplx(-0.8, 0.1);
    p.m = cplx(0.2, 0.0);
    p.y0 = cplx(0.1, 0.0);
    p.lambda = cplx(-1.1, 0.0);
    return p;
}

/// Moduli probed by the identity criteria: two on the trusted real ray,
/// one past the square point, one pushed off the axis.
inline std::vector<cplx> acceptance_moduli()
{
    return {cplx(-1, 0), cplx(-0.5, 0), cplx(-2, 0), cplx(-1, 0.2)};
}

} // namespace detail

/// Evaluate one acceptance criterion (1-based). Throws std::domain_error for
/// an out-of-range number; numeric failures inside a criterion are caught and
/// reported as a failed result rather than propagated.
inline criterion_result acceptance_criterion(int number)
{
    if (number < 1 || number > acceptance_count) {
        throw std::domain_error("acceptance criterion number out of range");
    }

    criterion_result r;
    r.number = number;
    bool ok = true;
    auto metric = [&r](const char *name, double v) { r.metrics.push_back({name, v}); };
    auto require = [&ok, &r](bool cond, const std::string &what) {
        if (!cond) {
            ok = false;
            if (!r.note.empty()) {
                r.note += "; ";
            }
            r.note += what;
        }
    };

    const auto t0 = std::chrono::steady_clock::now();
    try {
        switch (number) {
        case 1: {
            r.name = "density-ratio";
            r.summary = "gamma-function and period routes to the scaling ratio agree";
            r.budget_seconds = 1.0;
            const auto routes = cg_rho();
            metric("rho_gamma", routes.gamma_route);
            metric("rho_period", routes.period_route);
            metric("route_difference", std::abs(routes.gamma_route - routes.period_route));
            require(std::abs(routes.gamma_route - 0.8279) <= 5e-4, "gamma route outside 0.8279 +/- 5e-4");
            require(std::abs(routes.period_route - 0.8279) <= 5e-4, "period route outside 0.8279 +/- 5e-4");
            require(std::abs(routes.gamma_route - routes.period_route) <= 1e-6,
                    "routes differ by more than 1e-6");
            break;
        }
        case 2: {
            r.name = "bilinear-identity";
            r.summary = "omega1*phi2 - omega2*phi1 equals 8*pi*i at four moduli";
            r.budget_seconds = 5.0;
            double worst = 0;
            for (const cplx lam : detail::acceptance_moduli()) {
                worst = std::max(worst, std::abs(bilinear_residual(lam)));
            }
            metric("worst_residual", worst);
            require(worst <= 1e-8, "bilinear identity residual above 1e-8");
            break;
        }
        case 3: {
            r.name = "weight-reduction";
            r.summary = "x^2 dx/y period reduces to the pinned omega/phi combination";
            r.budget_seconds = 30.0;
            double worst = 0;
            for (const cplx lam : detail::acceptance_moduli()) {
                const auto P = periods(lam);
                const cplx co_phi = 2.0 * (lam + 1.0) / 3.0;
                const cplx co_omega = -lam / 3.0;
                const cplx want1 = co_phi * P.phi1 + co_omega * P.omega1;
                const cplx want2 = co_phi * P.phi2 + co_omega * P.omega2;
                worst = std::max(worst, std::abs(alpha_period(2, 0, 0, lam, 1) - want1));
                worst = std::max(worst, std::abs(alpha_period(2, 0, 0, lam, 2) - want2));
            }
            metric("worst_residual", worst);
            require(worst <= 1e-8, "degree-two period reduction off by more than 1e-8");
            break;
        }
        case 4: {
            r.name = "square-modulus-root";
            r.summary = "conjugate-ratio residual vanishes at -1 and nowhere else scanned";
            r.budget_seconds = 60.0;
            const double at_root = std::abs(conjugate_ratio_residual(cplx(-1, 0)));
            metric("residual_at_root", at_root);
            require(at_root <= 1e-9, "residual at -1 above 1e-9");

            double worst_newton = 0;
            for (const cplx start : {cplx(-1.2, 0), cplx(-0.8, 0), cplx(-1, 0.1)}) {
                const cplx found = weber_root(start);
                worst_newton = std::max(worst_newton, std::abs(found - cplx(-1, 0)));
            }
            metric("worst_newton_error", worst_newton);
            require(worst_newton <= 1e-7, "Newton iterate further than 1e-7 from -1");

            std::vector<cplx> grid;
            grid.reserve(200);
            for (int k = 0; k < 180; ++k) {
                grid.emplace_back(-3.5 + 3.38 * k / 179.0, 0.0);
            }
            for (int k = 0; k < 20; ++k) {
                grid.emplace_back(-1.4 + 0.8 * (k % 10) / 9.0, k < 10 ? 0.2 : -0.2);
            }
            const auto scan = prop52_check(grid);
            double min_scan = 1e300;
            int stray = 0;
            for (const auto &e : scan) {
                min_scan = std::min(min_scan, e.weber_residual);
                if (e.flagged && std::abs(e.lambda - cplx(-1, 0)) > 0.02) {
                    ++stray;
                }
            }
            metric("scan_points", static_cast<double>(scan.size()));
            metric("min_scan_residual", min_scan);
            metric("stray_zeros", static_cast<double>(stray));
            require(stray == 0, "scan found a residual below 1e-3 away from -1");
            break;
        }
        case 5: {
            r.name = "distinguished-root";
            r.summary = "the distinguished datum annihilates the period mapping";
            r.budget_seconds = 5.0;
            const double norm = period_map(vstar_vec()).lpNorm<Eigen::Infinity>();
            metric("residual_inf_norm", norm);
            require(norm <= 1e-8, "period-map residual above 1e-8");
            break;
        }
        case 6: {
            r.name = "jacobian-structure";
            r.summary = "analytic and finite-difference Jacobians agree with the sparsity pattern";
            r.budget_seconds = 60.0;
            const auto an = jacobian(vstar_vec(), jac_mode::analytic_at_vstar);
            const auto fd = jacobian(vstar_vec(), jac_mode::finite_difference);

            double worst_entry = 0;
            for (int i = 0; i < 8; ++i) {
                for (int j = 0; j < 12; ++j) {
                    worst_entry = std::max(worst_entry, std::abs(an.J(i, j) - fd.J(i, j)));
                }
            }
            metric("worst_entry_diff", worst_entry);
            require(worst_entry <= 1e-4, "analytic/FD entry mismatch above 1e-4");

            static const std::set<std::pair<int, int>> nonzero = {
                {0, 2}, {0, 8}, {1, 3}, {1, 9},  {2, 6}, {2, 8}, {3, 7},  {3, 9},  {4, 0},  {4, 4},
                {4, 10}, {5, 1}, {5, 5}, {5, 11}, {6, 1}, {6, 5}, {6, 11}, {7, 0}, {7, 4}, {7, 10}};
            int zero_slots = 0;
            double worst_zero = 0;
            for (int i = 0; i < 8; ++i) {
                for (int j = 0; j < 12; ++j) {
                    if (nonzero.count({i, j})) {
                        continue;
                    }
                    ++zero_slots;
                    worst_zero = std::max({worst_zero, std::abs(an.J(i, j)), std::abs(fd.J(i, j))});
                }
            }
            metric("zero_slots_checked", static_cast<double>(zero_slots));
            metric("worst_zero_slot", worst_zero);
            require(zero_slots >= 48, "fewer than 48 vanishing slots checked");
            require(worst_zero <= 1e-6, "a structurally vanishing entry exceeds 1e-6");

            const double ratio = an.sigma(7) / an.sigma(0);
            metric("sigma_ratio", ratio);
            require(ratio > 1e-4, "singular-value ratio sigma8/sigma1 at or below 1e-4");
            break;
        }
        case 7: {
            r.name = "rank-inequality";
            r.summary = "the strict inequality securing rank 8 holds with positive margin";
            r.budget_seconds = 30.0;
            const auto iq = inequality_check();
            metric("D1", iq.D1);
            metric("C2", iq.C2);
            metric("lhs", iq.lhs);
            metric("rhs", iq.rhs);
            metric("margin", iq.margin);
            require(std::abs(iq.D1) <= 1e-9, "|D1| above 1e-9");
            require(std::abs(iq.C2) <= 1e-9, "|C2| above 1e-9");
            require(iq.lhs < iq.rhs, "|C1 + D2| not below |e1 + f2|");
            require(iq.margin > 0, "reported margin not positive");
            break;
        }
        case 8: {
            r.name = "family-tracing";
            r.summary = "forty traced data stay on the zero set with positive margin";
            r.budget_seconds = 600.0;
            const auto an = jacobian(vstar_vec(), jac_mode::analytic_at_vstar);
            const auto dirs = kernel_directions(an.J);
            const auto fams = trace_family(dirs, 10, 0.02);
            int nodes = 0;
            double worst_res = 0, min_margin = 1e300, max_var = 0;
            for (const auto &fam : fams) {
                for (const auto &nd : fam) {
                    ++nodes;
                    worst_res = std::max(worst_res, nd.residual);
                    min_margin = std::min(min_margin, nd.margin);
                    max_var = std::max(max_var, nd.phi_psi_var);
                }
            }
            metric("nodes", static_cast<double>(nodes));
            metric("worst_residual", worst_res);
            metric("min_margin", min_margin);
            metric("max_product_variance", max_var);
            require(nodes == 40, "expected 40 traced data");
            require(worst_res <= 1e-9, "a traced datum has residual above 1e-9");
            require(min_margin > 0, "a traced datum lost its regularity margin");
            require(max_var > 1e-4, "no traced datum moves the form product by more than 1e-4");
            break;
        }
        case 9: {
            r.name = "deformed-immersions";
            r.summary = "three deformed data give closed, regular, symmetric surfaces with two self-crossings";
            r.budget_seconds = 300.0;
            const double rho = cg_rho_gamma();
            double worst_loop = 0, min_margin = 1e300, worst_sym = 0, worst_curv = 0;
            int bad_degree = 0, bad_count = 0;
            double worst_xres = 0;
            for (const double theta : {detail::pi_c / 6.0, detail::pi_c / 4.0, detail::pi_c / 3.0}) {
                const deformed_r3 dd{rho, cplx(-1, 0), std::polar(1.0, theta)};
                worst_loop = std::max(worst_loop, closed_loop_residual(dd));
                min_margin = std::min(min_margin, regularity_margin(dd));
                const auto curv = total_curvature(dd);
                if (curv.deg_phi != 2) {
                    ++bad_degree;
                }
                worst_curv = std::max(worst_curv,
                                      std::abs(curv.integral_estimate - 8.0 * detail::pi_c));
                worst_sym = std::max(worst_sym, symmetry_check(dd).max_deviation);
                const auto xs = find_self_intersections(theta);
                if (xs.size() != 2) {
                    ++bad_count;
                }
                for (const auto &x : xs) {
                    worst_xres = std::max(worst_xres, x.residual);
                }
            }
            metric("worst_loop_residual", worst_loop);
            metric("min_margin", min_margin);
            metric("worst_curvature_diff", worst_curv);
            metric("worst_symmetry_deviation", worst_sym);
            metric("worst_crossing_residual", worst_xres);
            require(worst_loop <= 1e-7, "a closed loop fails to close within 1e-7");
            require(min_margin > 0, "a deformed datum is not regular");
            require(bad_degree == 0, "a deformed datum has first-form degree != 2");
            require(worst_curv <= 0.5, "total-curvature estimate further than 0.5 from 8*pi");
            require(worst_sym <= 1e-6, "an order-8 symmetry deviates by more than 1e-6");
            require(bad_count == 0, "a deformed datum does not show exactly 2 self-crossings");
            require(worst_xres <= 1e-7, "a located self-crossing has residual above 1e-7");
            break;
        }
        case 10: {
            r.name = "distinguished-margin";
            r.summary = "the distinguished datum has regularity margin pi/2";
            r.budget_seconds = 30.0;
            const double margin = regularity_margin(vstar());
            metric("margin", margin);
            metric("deviation_from_half_pi", std::abs(margin - detail::pi_c / 2.0));
            require(std::abs(margin - detail::pi_c / 2.0) <= 1e-6,
                    "margin differs from pi/2 by more than 1e-6");
            break;
        }
        case 11: {
            r.name = "square-torus-obstruction";
            r.summary = "no second-case datum exists on the square torus";
            r.budget_seconds = 60.0;
            const auto ob = square_torus_obstruction();
            metric("rho_fourth", ob.rho_fourth);
            metric("gap", ob.gap);
            metric("bound_coeff", ob.bound_coeff);
            require(std::abs(ob.rho_fourth - 0.4699) <= 1e-3, "rho^4 not near 0.4699");
            require(std::abs(ob.rho_fourth - 0.75) >= 0.25, "rho^4 not separated from 3/4");

            double worst_vertical = 0, min_horizontal = 1e300;
            for (int i = 0; i < 20; ++i) {
                for (int j = 0; j < 20; ++j) {
                    case2_params p;
                    p.a = std::polar(1.0, 2.0 * detail::pi_c * i / 20.0);
                    p.b = std::polar(1.0, 2.0 * detail::pi_c * j / 20.0);
                    p.c = ob.k * std::conj(p.b);
                    p.x0 = -ob.k * std::conj(p.a) / p.a;
                    p.lambda = cplx(-1, 0);
                    const auto res = case2_residual(p);
                    worst_vertical =
                        std::max(worst_vertical, res.head<4>().lpNorm<Eigen::Infinity>());
                    const double h1 = std::hypot(res(4), res(6));
                    const double h2 = std::hypot(res(5), res(7));
                    min_horizontal = std::min(min_horizontal, std::max(h1, h2));
                }
            }
            metric("worst_vertical_residual", worst_vertical);
            metric("min_horizontal_residual", min_horizontal);
            require(worst_vertical <= 1e-10, "vertical closure rows not solved to 1e-10");
            require(min_horizontal >= ob.bound_coeff * (1.0 - 1e-6) - 1e-8,
                    "horizontal rows dip below the predicted bound");
            require(min_horizontal > 0.5, "horizontal rows not bounded away from zero");
            break;
        }
        case 12: {
            r.name = "pullback-involution";
            r.summary = "the sheet involution pulls the second-case forms back onto themselves";
            r.budget_seconds = 30.0;
            const auto kept = involution_pullback_check(detail::involution_sample_case2(), 50);
            metric("case2_max_residual", kept.max_residual);
            require(kept.max_residual <= 1e-12, "second-case pullback residual above 1e-12");
            const auto moved = involution_pullback_check(detail::involution_control_case1(), 50);
            metric("case1_control_residual", moved.max_residual);
            require(moved.max_residual > 1e-3, "first-case control not rejected");
            break;
        }
        default:
            break;
        }
    } catch (const std::exception &ex) {
        ok = false;
        if (!r.note.empty()) {
            r.note += "; ";
        }
        r.note += "exception: ";
        r.note += ex.what();
    }

    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ok && r.budget_seconds > 0 && r.seconds > r.budget_seconds) {
        ok = false;
        r.note = "exceeded time budget";
    }
    r.passed = ok;
    return r;
}

/// Run all criteria in order. The callback, when given, fires after each
/// criterion so callers can stream progress.
inline std::vector<criterion_result>
run_acceptance(const std::function<void(const criterion_result &)> &on_done = {})
{
    std::vector<criterion_result> out;
    out.reserve(acceptance_count);
    for (int k = 1; k <= acceptance_count; ++k) {
        out.push_back(acceptance_criterion(k));
        if (on_done) {
            on_done(out.back());
        }
    }
    return out;
}

} // namespace scg

#endif // SCG_REPORT_HPP
