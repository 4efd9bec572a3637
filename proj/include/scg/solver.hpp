#ifndef SCG_SOLVER_HPP
#define SCG_SOLVER_HPP

// The period mapping P: R^12 -> R^8 for case-1 data, its Jacobian, the
// rank-8 structure at the distinguished datum v*, Gauss-Newton correction,
// predictor-corrector tracing of the 4-parameter solution family, and the
// case-2 period residual.
//
// Parameter packing: v = (Re b, Im b, Re c, Im c, Re l, Im l, Re m, Im m,
// Re y0, Im y0, Re lambda, Im lambda). Residual ordering: the two vertical
// closure rows of dh on cycles 1, 2; the two vertical closure rows of
// phi*psi*dh; then Re, Re, Im, Im of the horizontal closure
//   G_i = per_i(psi dh) + conj(per_i(phi dh))
// on cycles 1, 2. All rows are stated without any overall normalizing
// factor, so the Jacobian below is scaled accordingly.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include <scg/elliptic.hpp>
#include <scg/errors.hpp>
#include <scg/wdata.hpp>

namespace scg
{

using param_vec = Eigen::Matrix<double, 12, 1>;
using residual_vec = Eigen::Matrix<double, 8, 1>;
using jac_mat = Eigen::Matrix<double, 8, 12>;

inline case1_params params_from_vec(const param_vec &v)
{
    case1_params p;
    p.b = cplx(v(0), v(1));
    p.c = cplx(v(2), v(3));
    p.l = cplx(v(4), v(5));
    p.m = cplx(v(6), v(7));
    p.y0 = cplx(v(8), v(9));
    p.lambda = cplx(v(10), v(11));
    return p;
}

inline param_vec vec_from_params(const case1_params &p)
{
    param_vec v;
    v << p.b.real(), p.b.imag(), p.c.real(), p.c.imag(), p.l.real(), p.l.imag(), p.m.real(),
        p.m.imag(), p.y0.real(), p.y0.imag(), p.lambda.real(), p.lambda.imag();
    return v;
}

/// The distinguished datum as a parameter vector.
inline param_vec vstar_vec()
{
    return vec_from_params(vstar());
}

namespace detail
{

/// One-slot memo for the period set: finite-difference sweeps move every
/// parameter but lambda most of the time, so the quadrature is shared.
class period_cache
{
public:
    const period_set &get(cplx lambda, double tol)
    {
        if (!have_ || lambda != key_ || tol != tol_) {
            val_ = periods(lambda, tol);
            key_ = lambda;
            tol_ = tol;
            have_ = true;
        }
        return val_;
    }

private:
    bool have_ = false;
    cplx key_{};
    double tol_ = 0;
    period_set val_{};
};

inline void check_param_invariants(const case1_params &p)
{
    if (std::abs(p.b) <= 1e-6 || std::abs(p.l) <= 1e-6) {
        throw error(errc::domain_error, "parameters b and l must stay away from zero");
    }
    if (std::abs(p.lambda) <= 1e-6 || std::abs(p.lambda - 1.0) <= 1e-6) {
        throw error(errc::domain_error, "lambda is too close to a degenerate modulus");
    }
}

inline residual_vec period_map_cached(const param_vec &v, period_cache &pc, double tol)
{
    const case1_params p = params_from_vec(v);
    check_param_invariants(p);
    const cplx x0 = x0_implicit(p.y0, p.lambda);
    const period_set &P = pc.get(p.lambda, tol);
    const auto [A, B] = coeffs_AB(p, x0);

    const cplx om[2] = {P.omega1, P.omega2};
    const cplx ph[2] = {P.phi1, P.phi2};
    residual_vec r;
    for (int i = 0; i < 2; ++i) {
        const cplx vert_dh = p.c * ph[i] - (p.c * x0 + p.b * p.y0) * om[i];
        const cplx vert_pp = p.m * ph[i] - (p.m * x0 - p.l * p.y0) * om[i];
        const cplx horiz = A * ph[i] + B * om[i] + std::conj(ph[i]) - std::conj(x0 * om[i]);
        r(i) = vert_dh.real();
        r(2 + i) = vert_pp.real();
        r(4 + i) = horiz.real();
        r(6 + i) = horiz.imag();
    }
    return r;
}

} // namespace detail

/// The eight period-closure residuals of a case-1 datum.
inline residual_vec period_map(const param_vec &v, double tol = 1e-11)
{
    detail::period_cache pc;
    return detail::period_map_cached(v, pc, tol);
}

enum class jac_mode
{
    analytic_at_vstar,
    finite_difference,
};

struct jacobian_result
{
    jac_mat J = jac_mat::Zero();
    Eigen::Matrix<double, 8, 1> sigma = Eigen::Matrix<double, 8, 1>::Zero(); ///< descending
};

namespace detail
{

inline void fill_singular_values(jacobian_result &out)
{
    Eigen::JacobiSVD<jac_mat> svd(out.J);
    out.sigma = svd.singularValues();
}

inline jacobian_result jacobian_fd(const param_vec &v, double tol)
{
    jacobian_result out;
    period_cache pc;
    const double h = 1e-6;
    for (int j = 0; j < 12; ++j) {
        auto central = [&](double step) -> residual_vec {
            param_vec vp = v, vm = v;
            vp(j) += step;
            vm(j) -= step;
            return (period_map_cached(vp, pc, tol) - period_map_cached(vm, pc, tol)) / (2.0 * step);
        };
        residual_vec col = central(h);
        if (j >= 10) {
            // The periods are the only transcendental ingredient, and only
            // the lambda columns move them; one Richardson pass there keeps
            // the whole matrix at comparable accuracy.
            col = (4.0 * central(h / 2) - col) / 3.0;
        }
        out.J.col(j) = col;
    }
    fill_singular_values(out);
    return out;
}

inline jacobian_result jacobian_analytic_vstar(double tol)
{
    const double rho = cg_rho_gamma();
    const period_set P = periods(cplx(-1, 0), tol);
    const period_derivs D = period_derivatives(cplx(-1, 0), std::max(tol, 1e-10));
    const cplx om[2] = {P.omega1, P.omega2};
    const cplx ph[2] = {P.phi1, P.phi2};
    const cplx dom[2] = {D.domega1, D.domega2};
    const cplx dph[2] = {D.dphi1, D.dphi2};

    jacobian_result out;
    jac_mat &J = out.J;
    const double r2 = rho * rho;
    for (int i = 0; i < 2; ++i) {
        // Vertical rows: only c (resp. m) and y0 survive at v*.
        J(i, 2) = ph[i].real();
        J(i, 3) = -ph[i].imag();
        J(i, 8) = -rho * om[i].real();
        J(i, 9) = rho * om[i].imag();
        J(2 + i, 6) = ph[i].real();
        J(2 + i, 7) = -ph[i].imag();
        J(2 + i, 8) = -rho * om[i].real();
        J(2 + i, 9) = rho * om[i].imag();

        // Horizontal rows: b and l enter through the exact-part coefficient,
        // lambda through both the coefficients and the periods themselves.
        const cplx dGdb = (2.0 * rho / 3.0) * om[i];
        const cplx W = (r2 / 3.0) * ph[i] - (2.0 * r2 / 3.0) * om[i] + (2.0 * r2 / 3.0) * dom[i];
        const cplx dGdl1 = W + std::conj(dph[i]);
        const cplx dGdl2 = cplx(0, 1) * (W - std::conj(dph[i]));
        J(4 + i, 0) = dGdb.real();
        J(4 + i, 1) = -dGdb.imag();
        J(4 + i, 4) = -dGdb.real();
        J(4 + i, 5) = dGdb.imag();
        J(4 + i, 10) = dGdl1.real();
        J(4 + i, 11) = dGdl2.real();
        J(6 + i, 0) = dGdb.imag();
        J(6 + i, 1) = dGdb.real();
        J(6 + i, 4) = -dGdb.imag();
        J(6 + i, 5) = -dGdb.real();
        J(6 + i, 10) = dGdl1.imag();
        J(6 + i, 11) = dGdl2.imag();
    }
    fill_singular_values(out);
    return out;
}

} // namespace detail

/// Jacobian of the period mapping. The analytic mode evaluates the
/// closed-form matrix valid at the distinguished datum only; the
/// finite-difference mode (central, h = 1e-6, Richardson on the lambda
/// columns) works anywhere the map does.
inline jacobian_result jacobian(const param_vec &v, jac_mode mode, double tol = 1e-12)
{
    if (mode == jac_mode::analytic_at_vstar) {
        if ((v - vstar_vec()).lpNorm<Eigen::Infinity>() > 1e-9) {
            throw error(errc::domain_error, "analytic Jacobian is available at the distinguished datum only");
        }
        return detail::jacobian_analytic_vstar(tol);
    }
    return detail::jacobian_fd(v, tol);
}

/// The eight real quantities of the rank argument at lambda = -1 and the
/// strict inequality |C1 + D2| < |e1 + f2| between them.
struct inequality_report
{
    double C1 = 0, C2 = 0, D1 = 0, D2 = 0;
    double e1 = 0, e2 = 0, f1 = 0, f2 = 0;
    double lhs = 0;    ///< |C1 + D2|
    double rhs = 0;    ///< |e1 + f2|
    double margin = 0; ///< rhs - lhs, positive iff full rank
};

inline inequality_report inequality_check(double tol = 1e-11)
{
    const period_set P = periods(cplx(-1, 0), tol);
    const period_derivs D = period_derivatives(cplx(-1, 0), std::max(tol, 1e-10));
    const double r2 = cg_rho_gamma() * cg_rho_gamma();
    const cplx om[2] = {P.omega1, P.omega2};
    const cplx ph[2] = {P.phi1, P.phi2};
    const cplx dom[2] = {D.domega1, D.domega2};
    const cplx dph[2] = {D.dphi1, D.dphi2};

    inequality_report rep;
    double C[2], Dd[2], e[2], f[2];
    for (int i = 0; i < 2; ++i) {
        const cplx W = (r2 / 3.0) * ph[i] - (2.0 * r2 / 3.0) * om[i] + (2.0 * r2 / 3.0) * dom[i];
        C[i] = W.real();
        Dd[i] = -W.imag();
        e[i] = dph[i].real();
        f[i] = dph[i].imag();
    }
    rep.C1 = C[0];
    rep.C2 = C[1];
    rep.D1 = Dd[0];
    rep.D2 = Dd[1];
    rep.e1 = e[0];
    rep.e2 = e[1];
    rep.f1 = f[0];
    rep.f2 = f[1];
    rep.lhs = std::abs(rep.C1 + rep.D2);
    rep.rhs = std::abs(rep.e1 + rep.f2);
    rep.margin = rep.rhs - rep.lhs;
    return rep;
}

/// Minimum-norm Gauss-Newton correction onto the solution set. Residuals
/// are re-evaluated after every step; the returned vector satisfies
/// ||P||_inf <= tol or NonConvergence is thrown. RankDeficient signals a
/// collapse of the smallest singular value during the iteration.
inline param_vec correct(const param_vec &v0, double tol = 1e-10, int max_iter = 8)
{
    const double quad_tol = 1e-12;
    detail::period_cache pc;
    param_vec v = v0;
    double last = 0, prev = 0;
    for (int it = 0; it <= max_iter; ++it) {
        const residual_vec r = detail::period_map_cached(v, pc, quad_tol);
        prev = last;
        last = r.lpNorm<Eigen::Infinity>();
        if (last <= tol) {
            return v;
        }
        if (it == max_iter) {
            break;
        }
        const jacobian_result ja = detail::jacobian_fd(v, quad_tol);
        if (ja.sigma(7) < 1e-6 * ja.sigma(0)) {
            throw error(errc::rank_deficient, "period Jacobian lost rank during correction");
        }
        Eigen::JacobiSVD<jac_mat> svd(ja.J, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto &s = svd.singularValues();
        Eigen::Matrix<double, 8, 1> scaled = svd.matrixU().transpose() * r;
        for (int k = 0; k < 8; ++k) {
            scaled(k) /= s(k);
        }
        v -= svd.matrixV().leftCols<8>() * scaled;
    }
    throw non_convergence_error("Gauss-Newton correction did not reach the requested residual", last,
                                prev);
}

/// Orthonormal basis of the null space of an 8x12 Jacobian, ordered as the
/// trailing right singular vectors, each sign-fixed so its largest-magnitude
/// component is positive.
inline std::array<param_vec, 4> kernel_directions(const jac_mat &J)
{
    Eigen::JacobiSVD<jac_mat> svd(J, Eigen::ComputeFullV);
    std::array<param_vec, 4> dirs;
    for (int k = 0; k < 4; ++k) {
        param_vec d = svd.matrixV().col(8 + k);
        int imax = 0;
        for (int j = 1; j < 12; ++j) {
            if (std::abs(d(j)) > std::abs(d(imax))) {
                imax = j;
            }
        }
        if (d(imax) < 0) {
            d = -d;
        }
        dirs[k] = d;
    }
    return dirs;
}

/// Sample variance of phi*psi over the torus; zero exactly for the
/// constant-product (shear) members of the family.
inline double phi_psi_variance(const case1_params &p, int samples = 50)
{
    const data_eval ev{w_data(p)};
    const torus_map tm(p.lambda);
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> un(0.0, 1.0);
    std::vector<cplx> vals;
    vals.reserve(samples);
    for (int draws = 0; draws < 40 * samples && int(vals.size()) < samples; ++draws) {
        const cplx z = un(rng) * tm.omega1() + un(rng) * tm.omega2();
        if (std::abs(tm.reduce(z)) < 0.05 * tm.lattice_scale()) {
            continue;
        }
        const auto f = ev.forms(tm.map(z));
        if (std::abs(f.dh) < 1e-9) {
            continue;
        }
        vals.push_back(f.phi_psi_dh / f.dh);
    }
    if (vals.empty()) {
        throw error(errc::non_convergence, "no usable sample points for the product scan");
    }
    cplx mean(0, 0);
    for (const cplx &w : vals) {
        mean += w;
    }
    mean /= double(vals.size());
    double var = 0;
    for (const cplx &w : vals) {
        var += std::norm(w - mean);
    }
    return var / double(vals.size());
}

/// One accepted node of a traced family.
struct family_node
{
    param_vec v = param_vec::Zero();
    double residual = 0;     ///< ||P(v)||_inf, re-evaluated
    double sigma8 = 0;       ///< smallest singular value at v
    double sigma_ratio = 0;  ///< sigma8 / sigma1
    double margin = 0;       ///< regularity margin of the datum
    double phi_psi_var = 0;  ///< constancy score of phi*psi
    bool regular = true;     ///< margin > 0
};

/// Predictor-corrector continuation from the distinguished datum along the
/// four tangent directions. Nodes are appended until the corrector fails,
/// the Jacobian collapses, or lambda drifts within 0.05 of a degenerate
/// modulus; an irregular node is flagged but kept.
inline std::array<std::vector<family_node>, 4> trace_family(const std::array<param_vec, 4> &directions,
                                                            int steps, double step_size,
                                                            double tol = 1e-10, int margin_grid = 32)
{
    if (!(step_size > 0) || step_size > 0.05) {
        throw error(errc::domain_error, "continuation step size must lie in (0, 0.05]");
    }
    std::array<std::vector<family_node>, 4> out;
    for (int k = 0; k < 4; ++k) {
        param_vec v = vstar_vec();
        for (int s = 0; s < steps; ++s) {
            param_vec pred = v + step_size * directions[k];
            param_vec corrected;
            try {
                corrected = correct(pred, tol, 8);
            } catch (const error &) {
                break; // family boundary: keep the nodes gathered so far
            }
            const cplx lam(corrected(10), corrected(11));
            if (std::abs(lam) < 0.05 || std::abs(lam - 1.0) < 0.05) {
                break;
            }
            v = corrected;

            family_node node;
            node.v = v;
            node.residual = period_map(v, 1e-12).lpNorm<Eigen::Infinity>();
            const jacobian_result ja = detail::jacobian_fd(v, 1e-12);
            node.sigma8 = ja.sigma(7);
            node.sigma_ratio = ja.sigma(7) / ja.sigma(0);
            const case1_params p = params_from_vec(v);
            node.margin = regularity_margin(w_data(p), margin_grid);
            node.regular = node.margin > 0;
            node.phi_psi_var = phi_psi_variance(p);
            out[k].push_back(node);
            if (node.sigma_ratio < 1e-5) {
                break;
            }
        }
    }
    return out;
}

/// The eight real period-closure residuals of a case-2 datum: vertical dh
/// rows on cycles 1, 2; vertical phi*psi*dh rows; then Re, Re, Im, Im of
/// the horizontal closure. Evaluation only -- no root claim is attached.
inline residual_vec case2_residual(const case2_params &p, double tol = 1e-11)
{
    if (std::abs(std::abs(p.a) - 1.0) > 1e-9) {
        throw error(errc::domain_error, "case-2 factor a must have unit modulus");
    }
    const period_set P = periods(p.lambda, tol);
    const cplx om[2] = {P.omega1, P.omega2};
    const cplx ph[2] = {P.phi1, P.phi2};
    residual_vec r;
    for (int i = 0; i < 2; ++i) {
        const cplx vert_dh = p.a * (ph[i] - p.x0 * om[i]);
        const cplx vert_pp = p.b * ph[i] + p.c * om[i];
        // psi dh = a (b x + c)(x - x0) dx/y, reduced by the exact form for
        // x^2 dx/y to a combination of the two primitive periods.
        const cplx coef_phi = 2.0 * p.b * (p.lambda + 1.0) / 3.0 + p.c - p.b * p.x0;
        const cplx coef_om = p.b * p.lambda / 3.0 + p.c * p.x0;
        const cplx horiz = p.a * (coef_phi * ph[i] - coef_om * om[i]) + std::conj(om[i]);
        r(i) = vert_dh.real();
        r(2 + i) = vert_pp.real();
        r(4 + i) = horiz.real();
        r(6 + i) = horiz.imag();
    }
    return r;
}

/// Scan report for the ratio condition: the unique admissible root of the
/// conjugate-ratio residual and the Legendre determinant that powers the
/// elimination argument.
struct ratio_scan_entry
{
    cplx lambda{};
    double weber_residual = 0;     ///< |conj(sigma(1,0,0)) - sigma(0,1,1)|
    double legendre_deviation = 0; ///< ||omega1 phi2 - omega2 phi1| - 8 pi|
    bool flagged = false;          ///< residual below the near-zero threshold
};

inline std::vector<ratio_scan_entry> prop52_check(const std::vector<cplx> &lam_grid, double tol = 1e-10)
{
    std::vector<ratio_scan_entry> out;
    out.reserve(lam_grid.size());
    for (const cplx &lam : lam_grid) {
        ratio_scan_entry e;
        e.lambda = lam;
        e.weber_residual = std::abs(conjugate_ratio_residual(lam, tol));
        const period_set P = periods(lam, tol);
        e.legendre_deviation =
            std::abs(std::abs(P.omega1 * P.phi2 - P.omega2 * P.phi1) - 8.0 * detail::pi_c);
        e.flagged = e.weber_residual < 1e-3;
        out.push_back(e);
    }
    return out;
}

} // namespace scg

#endif
