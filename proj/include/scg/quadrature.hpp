#ifndef SCG_QUADRATURE_HPP
#define SCG_QUADRATURE_HPP

/// Quadrature and special-function kernels used by the period computations:
///  - tanh-sinh (double-exponential) rule on (0,1) for integrands with
///    endpoint singularities of power type,
///  - adaptive Gauss-Legendre 7/15 pair on a real interval (independent
///    cross-check route, also used for smooth path integrals),
///  - Lanczos gamma,
///  - AGM and the complete elliptic integral K(m).

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include <scg/errors.hpp>

namespace scg
{

using cplx = std::complex<double>;

struct quad_result {
    cplx value;
    /// Difference of the last two refinement estimates.
    double error = 0.0;
    /// Levels (tanh-sinh) or maximum bisection depth reached (Gauss pair).
    int levels = 0;
    std::size_t evals = 0;
};

/// Integrand on (0,1). The callable receives both t and 1-t so that factors
/// like (1-t)^(-1/2) can be formed without cancellation at nodes
/// double-exponentially close to the right endpoint. The exponents declare
/// the power behaviour at the endpoints (0 for a regular endpoint); they are
/// metadata used for the integrability check.
struct singular_integrand {
    std::function<cplx(double, double)> f;
    double left_exponent = 0.0;
    double right_exponent = 0.0;
};

namespace detail
{

struct ts_node {
    double t, omt, w; // abscissa, 1-abscissa, weight
};

// Nodes of level k have spacing 2^-k; level 0 holds all integer abscissas,
// deeper levels only the odd multiples (the new points of the refinement).
inline const std::vector<std::vector<ts_node>> &ts_levels()
{
    static const std::vector<std::vector<ts_node>> levels = [] {
        constexpr double u_max = 4.8;
        constexpr int k_max = 12;
        std::vector<std::vector<ts_node>> out(k_max + 1);
        for (int k = 0; k <= k_max; ++k) {
            const double h = std::ldexp(1.0, -k);
            for (int j = -static_cast<int>(u_max / h); j * h <= u_max; ++j) {
                if (k > 0 && j % 2 == 0) {
                    continue;
                }
                const double u = j * h;
                const double s = 3.14159265358979323846 * std::sinh(u);
                const double t = 1.0 / (1.0 + std::exp(-s));
                const double omt = 1.0 / (1.0 + std::exp(s));
                const double w = 3.14159265358979323846 * std::cosh(u) * t * omt;
                if (w == 0.0 || t == 0.0 || omt == 0.0) {
                    continue;
                }
                out[static_cast<std::size_t>(k)].push_back({t, omt, w});
            }
        }
        return out;
    }();
    return levels;
}

template <typename F>
quad_result tanh_sinh(const F &f, double tol, int max_levels)
{
    const auto &levels = ts_levels();
    const int k_cap = std::min<int>(max_levels, static_cast<int>(levels.size()) - 1);
    cplx cur(0.0, 0.0), prev(0.0, 0.0);
    std::size_t evals = 0;
    for (int k = 0; k <= k_cap; ++k) {
        const double h = std::ldexp(1.0, -k);
        cplx part(0.0, 0.0);
        for (const auto &nd : levels[static_cast<std::size_t>(k)]) {
            const cplx fv = f(nd.t, nd.omt);
            ++evals;
            if (!std::isfinite(fv.real()) || !std::isfinite(fv.imag())) {
                throw error(errc::interior_singularity,
                            "integrand not finite at t=" + std::to_string(nd.t));
            }
            part += fv * nd.w;
        }
        prev = cur;
        cur = (k == 0) ? part * h : cur * 0.5 + part * h;
        if (k >= 2) {
            const double err = std::abs(cur - prev);
            if (err <= tol * std::max(1.0, std::abs(cur))) {
                return {cur, err, k, evals};
            }
        }
    }
    throw non_convergence_error("tanh-sinh level cap reached", cur, prev);
}

// Gauss-Legendre nodes on (-1,1) by Newton iteration on P_n.
inline void gl_rule(int n, std::vector<double> &x, std::vector<double> &w)
{
    x.assign(static_cast<std::size_t>(n), 0.0);
    w.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double xi = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = xi;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * xi * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
            const double dx = p1 / dp;
            xi -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        double p0 = 1.0, p1 = xi;
        for (int j = 2; j <= n; ++j) {
            const double p2 = ((2.0 * j - 1.0) * xi * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
        x[static_cast<std::size_t>(i)] = -xi;
        w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
}

struct gl_pair {
    std::vector<double> x7, w7, x15, w15;
};

inline const gl_pair &gl_tables()
{
    static const gl_pair p = [] {
        gl_pair q;
        gl_rule(7, q.x7, q.w7);
        gl_rule(15, q.x15, q.w15);
        return q;
    }();
    return p;
}

template <typename F>
void gauss_pair(const F &f, double a, double b, cplx &coarse, cplx &fine, std::size_t &evals)
{
    const auto &tb = gl_tables();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    coarse = cplx(0, 0);
    fine = cplx(0, 0);
    for (std::size_t i = 0; i < tb.x7.size(); ++i) {
        coarse += f(mid + half * tb.x7[i]) * tb.w7[i];
    }
    for (std::size_t i = 0; i < tb.x15.size(); ++i) {
        fine += f(mid + half * tb.x15[i]) * tb.w15[i];
    }
    coarse *= half;
    fine *= half;
    evals += 22;
}

template <typename F>
cplx gauss_adaptive(const F &f, double a, double b, double tol, int depth, int max_depth, double &err_acc,
                    std::size_t &evals, int &depth_seen)
{
    cplx coarse, fine;
    gauss_pair(f, a, b, coarse, fine, evals);
    const double err = std::abs(fine - coarse);
    depth_seen = std::max(depth_seen, depth);
    if (err <= tol || depth >= max_depth) {
        if (depth >= max_depth && err > tol * 16) {
            throw non_convergence_error("adaptive Gauss pair depth cap", fine, coarse);
        }
        err_acc += err;
        return fine;
    }
    const double mid = 0.5 * (a + b);
    return gauss_adaptive(f, a, mid, 0.5 * tol, depth + 1, max_depth, err_acc, evals, depth_seen)
           + gauss_adaptive(f, mid, b, 0.5 * tol, depth + 1, max_depth, err_acc, evals, depth_seen);
}

} // namespace detail

/// Tanh-sinh integration of f over (0,1). Error estimate is the difference
/// of the last two refinement levels; throws NonConvergence (with both
/// estimates) if max_levels halvings do not reach tol, and
/// InteriorSingularity if the integrand is non-finite at a node.
inline quad_result integrate_singular(const singular_integrand &g, double tol, int max_levels = 12)
{
    if (g.left_exponent <= -1.0 || g.right_exponent <= -1.0) {
        throw error(errc::non_integrable, "endpoint exponent <= -1");
    }
    if (!g.f) {
        throw error(errc::domain_error, "empty integrand");
    }
    return detail::tanh_sinh(g.f, tol, max_levels);
}

/// Same rule for a plain callable f(t, 1-t); used by the period kernels.
template <typename F>
quad_result integrate_singular_fn(const F &f, double tol, int max_levels = 12)
{
    return detail::tanh_sinh(f, tol, max_levels);
}

/// Adaptive Gauss-Legendre 7/15 on [a,b] for a smooth complex-valued f.
/// Serves as the independent cross-check for the tanh-sinh route and as the
/// panel rule for path integrals.
template <typename F>
quad_result integrate_line(const F &f, double a, double b, double tol, int max_depth = 24)
{
    double err = 0.0;
    std::size_t evals = 0;
    int depth_seen = 0;
    const cplx v = detail::gauss_adaptive(f, a, b, tol, 0, max_depth, err, evals, depth_seen);
    return {v, err, depth_seen, evals};
}

/// Gamma by the Lanczos approximation (g = 7, 9 coefficients), reflection
/// formula for x < 0.5. Poles at the non-positive integers raise DomainError.
inline double gamma_fn(double x)
{
    static const double lc[9] = {0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
                                 771.32342877765313,      -176.61502916214059,   12.507343278686905,
                                 -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
    if (!std::isfinite(x)) {
        throw error(errc::domain_error, "gamma of non-finite argument");
    }
    if (x < 0.5) {
        if (x == std::floor(x)) {
            throw error(errc::domain_error, "gamma pole at non-positive integer");
        }
        const double pi = 3.14159265358979323846;
        return pi / (std::sin(pi * x) * gamma_fn(1.0 - x));
    }
    const double z = x - 1.0;
    double acc = lc[0];
    for (int i = 1; i < 9; ++i) {
        acc += lc[i] / (z + i);
    }
    const double t = z + 7.5;
    const double sqrt2pi = 2.50662827463100050241;
    return sqrt2pi * std::pow(t, z + 0.5) * std::exp(-t) * acc;
}

/// Arithmetic-geometric mean with the principal square-root choice
/// (Re(b/a) >= 0 at every step).
inline cplx agm(cplx a, cplx b)
{
    if (a == cplx(0, 0) || b == cplx(0, 0)) {
        return {0, 0};
    }
    for (int it = 0; it < 64; ++it) {
        const cplx a1 = 0.5 * (a + b);
        cplx b1 = std::sqrt(a * b);
        if (std::abs(a1 - b1) > std::abs(a1 + b1)) {
            b1 = -b1;
        }
        a = a1;
        b = b1;
        if (std::abs(a - b) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(a)) {
            return 0.5 * (a + b);
        }
    }
    throw non_convergence_error("AGM did not settle", a, b);
}

/// Complete elliptic integral K(m) (parameter m, not modulus k) through the
/// AGM: K = pi / (2 agm(1, sqrt(1-m))). The branch cut m in [1,inf) on the
/// real axis is rejected.
inline cplx agm_elliptic_k(cplx m)
{
    if (m.imag() == 0.0 && m.real() >= 1.0) {
        throw error(errc::branch_cut, "K(m) on the cut m >= 1");
    }
    const cplx pi(3.14159265358979323846, 0.0);
    return pi / (2.0 * agm(cplx(1, 0), std::sqrt(cplx(1, 0) - m)));
}

} // namespace scg

#endif
