#ifndef SCG_ELLIPTIC_HPP
#define SCG_ELLIPTIC_HPP

// Periods and period derivatives of the genus-one curve
//
//     y^2 = x (x - 1) (x - lambda),
//
// for the differentials omega = dx/y and Phi = x dx/y, plus the inverse of
// the Abel map z -> (x, y) realized through the Weierstrass p-function, and
// a root finder for the parameter where the two period ratios of Phi and of
// the reduced form x(x-1)(x-lambda) dx / y conjugate-match.
//
// Cycle conventions, anchored at lambda = -1 and carried by continuity:
//  * cycle 1 encircles {lambda, 0}; on the segment (lambda, 0) the branch
//    y = +sqrt(x(x-1)(x-lambda)) is used, so omega_1 > 0 for real lambda < 0;
//  * cycle 2 encircles {0, 1}; on (0, 1) the branch y = -i sqrt(x(1-x)(x-lambda))
//    is used, so omega_2 is positive imaginary for real lambda < 0.
// With these choices omega_1 Phi_2 - omega_2 Phi_1 = 8 pi i for every
// admissible lambda, which pins the orientation of both cycles.
//
// Parameters within distance 0.05 of the degenerations lambda in {0, 1} are
// rejected uniformly (BranchCut), as are continuation paths passing that
// close to them.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include <scg/errors.hpp>
#include <scg/quadrature.hpp>

namespace scg
{

struct period_set
{
    cplx omega1{}, omega2{}; ///< periods of dx/y over cycles 1, 2
    cplx phi1{}, phi2{};     ///< periods of x dx/y over cycles 1, 2
};

struct period_derivs
{
    cplx domega1{}, domega2{}; ///< d/dlambda of the omega periods
    cplx dphi1{}, dphi2{};     ///< d/dlambda of the Phi periods
};

namespace detail
{

constexpr double pi_c = 3.14159265358979323846;

inline double dist_point_segment(cplx pt, cplx a, cplx b)
{
    const cplx d = b - a;
    const double L2 = std::norm(d);
    if (L2 == 0.0) {
        return std::abs(pt - a);
    }
    double t = ((pt - a) * std::conj(d)).real() / L2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(pt - (a + t * d));
}

inline double dist_to_degenerate(cplx lambda)
{
    return std::min(std::abs(lambda), std::abs(lambda - 1.0));
}

inline void require_admissible(cplx lambda)
{
    if (dist_to_degenerate(lambda) < 0.05) {
        throw error(errc::branch_cut, "parameter within 0.05 of a degenerate value (0 or 1)");
    }
}

inline cplx ipow(cplx x, int n)
{
    if (n < 0) {
        return 1.0 / ipow(x, -n);
    }
    cplx r(1, 0);
    while (n > 0) {
        if (n & 1) {
            r *= x;
        }
        x *= x;
        n >>= 1;
    }
    return r;
}

/// Periods for real lambda < 0 from one-dimensional integrals along the two
/// branch cuts [lambda, 0] and [0, 1], with the branch conventions above.
inline period_set periods_real(double lambda, double tol)
{
    const double t_in = 0.5 * tol;
    auto cyc1 = [&](auto f) {
        return integrate_singular_fn(f, t_in).value.real();
    };
    // x = lambda t maps cycle 1 onto t in (0,1); u = 1 - t lambda > 0 there.
    const double w1 = 2.0 * cyc1([&](double t, double omt) {
        return cplx(1.0 / std::sqrt(t * omt * (1.0 - t * lambda)), 0);
    });
    const double f1 = 2.0 * lambda * cyc1([&](double t, double omt) {
        return cplx(std::sqrt(t / (omt * (1.0 - t * lambda))), 0);
    });
    // Cycle 2 runs over x in (0,1) directly; x - lambda > 0 there.
    const double w2 = 2.0 * cyc1([&](double x, double omx) {
        return cplx(1.0 / std::sqrt(x * omx * (x - lambda)), 0);
    });
    const double f2 = 2.0 * cyc1([&](double x, double omx) {
        return cplx(std::sqrt(x / (omx * (x - lambda))), 0);
    });
    period_set P;
    P.omega1 = cplx(w1, 0);
    P.phi1 = cplx(f1, 0);
    P.omega2 = cplx(0, w2);
    P.phi2 = cplx(0, f2);
    return P;
}

/// Monomial exponents of one differential x^r (x-1)^s (x-lambda)^t dx / y.
struct form_pows
{
    int r = 0, s = 0, t = 0;
};

struct cycle_geometry
{
    cplx center, axis; ///< ellipse center and unit major-axis direction
    double a = 0, b = 0;
};

inline cycle_geometry contour_geometry(cplx lambda, int cycle)
{
    cplx p, q, excl;
    if (cycle == 1) {
        p = lambda;
        q = cplx(0, 0);
        excl = cplx(1, 0);
    } else if (cycle == 2) {
        p = cplx(0, 0);
        q = cplx(1, 0);
        excl = lambda;
    } else {
        throw error(errc::domain_error, "cycle index must be 1 or 2");
    }
    const double L = std::abs(q - p);
    if (L < 1e-12) {
        throw error(errc::branch_cut, "branch points collide");
    }
    const double clearance = dist_point_segment(excl, p, q);
    const double r = std::min(0.6 * L, 0.4 * clearance);
    if (r < 1e-6 * L) {
        throw error(errc::branch_cut, "cycle contour pinched by the excluded branch point");
    }
    cycle_geometry g;
    g.center = 0.5 * (p + q);
    g.axis = (q - p) / L;
    g.a = 0.5 * L + r;
    g.b = r;
    return g;
}

/// Integrate the given differentials over one cycle along an ellipse
/// enclosing exactly its two branch points, tracking a continuous branch of
/// y around the loop. The overall sign of the shared branch is arbitrary;
/// callers anchor it against a known period. All returned values share one
/// branch, so their relative signs are meaningful.
inline std::vector<cplx> cycle_contour_raw(cplx lambda, int cycle, const std::vector<form_pows> &forms,
                                           double tol)
{
    const cycle_geometry g = contour_geometry(lambda, cycle);
    const cplx iaxis = g.axis * cplx(0, 1);
    std::vector<cplx> prev;
    bool prev_ok = false;
    for (int N = 64; N <= (1 << 15); N *= 2) {
        std::vector<cplx> acc(forms.size(), cplx(0, 0));
        cplx y_first(0, 0), y_prev(0, 0);
        bool closed = true;
        for (int j = 0; j <= N; ++j) {
            const double th = 2.0 * pi_c * j / N;
            const cplx x = g.center + g.axis * (g.a * std::cos(th)) + iaxis * (g.b * std::sin(th));
            cplx y = std::sqrt(x * (x - 1.0) * (x - lambda));
            if (j == 0) {
                y_first = y;
            } else if (std::abs(y - y_prev) > std::abs(y + y_prev)) {
                y = -y;
            }
            y_prev = y;
            if (j == N) {
                closed = std::abs(y - y_first) < std::abs(y + y_first);
                break;
            }
            const cplx dx = g.axis * (-g.a * std::sin(th)) + iaxis * (g.b * std::cos(th));
            for (std::size_t k = 0; k < forms.size(); ++k) {
                acc[k] += ipow(x, forms[k].r) * ipow(x - 1.0, forms[k].s) * ipow(x - lambda, forms[k].t)
                          / y * dx;
            }
        }
        for (auto &v : acc) {
            v *= 2.0 * pi_c / N;
        }
        if (closed && prev_ok) {
            bool settled = true;
            for (std::size_t k = 0; k < forms.size(); ++k) {
                if (std::abs(acc[k] - prev[k]) > tol * std::max(1.0, std::abs(acc[k]))) {
                    settled = false;
                }
            }
            if (settled) {
                return acc;
            }
        }
        prev = acc;
        prev_ok = closed;
    }
    if (!prev_ok) {
        throw error(errc::branch_lost, "branch of y failed to close around the cycle contour");
    }
    throw non_convergence_error("cycle contour integral did not settle", prev.empty() ? cplx(0, 0) : prev[0],
                                cplx(0, 0));
}

/// Flip the shared branch of raw cycle integrals so that entry `which`
/// matches a reference value.
inline void anchor_sign(std::vector<cplx> &vals, std::size_t which, cplx ref)
{
    if (std::abs(vals[which] - ref) > std::abs(vals[which] + ref)) {
        for (auto &v : vals) {
            v = -v;
        }
    }
}

/// One continuity-matched continuation step of the full period set.
inline period_set continue_step(cplx lam_from, const period_set &from, cplx lam_to, double tol, int depth)
{
    auto v1 = cycle_contour_raw(lam_to, 1, {{0, 0, 0}, {1, 0, 0}}, tol);
    anchor_sign(v1, 0, from.omega1);
    auto v2 = cycle_contour_raw(lam_to, 2, {{0, 0, 0}, {1, 0, 0}}, tol);
    anchor_sign(v2, 0, from.omega2);
    const bool jumped = std::abs(v1[0] - from.omega1) > 0.3 * std::abs(from.omega1)
                        || std::abs(v2[0] - from.omega2) > 0.3 * std::abs(from.omega2);
    if (jumped) {
        if (depth >= 12) {
            throw non_convergence_error("period continuation step failed to stabilize", v1[0], from.omega1);
        }
        const cplx mid = 0.5 * (lam_from + lam_to);
        const period_set Pm = continue_step(lam_from, from, mid, tol, depth + 1);
        return continue_step(mid, Pm, lam_to, tol, depth + 1);
    }
    period_set P;
    P.omega1 = v1[0];
    P.phi1 = v1[1];
    P.omega2 = v2[0];
    P.phi2 = v2[1];
    return P;
}

/// Periods at complex lambda by continuation from lambda = -1 along the
/// straight segment, which must stay clear of the degenerate values.
inline period_set periods_contour(cplx lambda, double tol)
{
    const cplx start(-1, 0);
    if (dist_point_segment(cplx(0, 0), start, lambda) < 0.05
        || dist_point_segment(cplx(1, 0), start, lambda) < 0.05) {
        throw error(errc::branch_cut, "continuation path passes within 0.05 of a degenerate value");
    }
    period_set P = periods_real(-1.0, tol);
    const double len = std::abs(lambda - start);
    const int n = std::max(1, static_cast<int>(std::ceil(len / 0.15)));
    cplx cur = start;
    for (int k = 1; k <= n; ++k) {
        const cplx next = start + (lambda - start) * (static_cast<double>(k) / n);
        P = continue_step(cur, P, next, tol, 0);
        cur = next;
    }
    return P;
}

} // namespace detail

/// Periods of dx/y and x dx/y over both cycles.
inline period_set periods(cplx lambda, double tol = 1e-11)
{
    detail::require_admissible(lambda);
    if (lambda.imag() == 0.0 && lambda.real() < 0.0) {
        return detail::periods_real(lambda.real(), tol);
    }
    return detail::periods_contour(lambda, tol);
}

/// Period of x^r (x-1)^s (x-lambda)^t dx / y over the given cycle, with the
/// branch anchored through the omega period of the same cycle.
inline cplx alpha_period(int r, int s, int t, cplx lambda, int cycle, double tol = 1e-11)
{
    const period_set P = periods(lambda, tol);
    const cplx ref = (cycle == 1) ? P.omega1 : P.omega2;
    auto v = detail::cycle_contour_raw(lambda, cycle, {{0, 0, 0}, {r, s, t}}, tol);
    detail::anchor_sign(v, 0, ref);
    return v[1];
}

/// Ratio of the cycle-2 to the cycle-1 period of one differential.
inline cplx sigma(int r, int s, int t, cplx lambda, double tol = 1e-11)
{
    const period_set P = periods(lambda, tol);
    auto v1 = detail::cycle_contour_raw(lambda, 1, {{0, 0, 0}, {r, s, t}}, tol);
    detail::anchor_sign(v1, 0, P.omega1);
    auto v2 = detail::cycle_contour_raw(lambda, 2, {{0, 0, 0}, {r, s, t}}, tol);
    detail::anchor_sign(v2, 0, P.omega2);
    return v2[1] / v1[1];
}

/// conj(sigma(1,0,0)) - sigma(0,1,1): zero exactly at parameters admitting
/// the symmetric closed-period configuration. Vanishes at lambda = -1.
inline cplx conjugate_ratio_residual(cplx lambda, double tol = 1e-11)
{
    const period_set P = periods(lambda, tol);
    auto v1 = detail::cycle_contour_raw(lambda, 1, {{0, 0, 0}, {1, 0, 0}, {0, 1, 1}}, tol);
    detail::anchor_sign(v1, 0, P.omega1);
    auto v2 = detail::cycle_contour_raw(lambda, 2, {{0, 0, 0}, {1, 0, 0}, {0, 1, 1}}, tol);
    detail::anchor_sign(v2, 0, P.omega2);
    return std::conj(v2[1] / v1[1]) - v2[2] / v1[2];
}

/// Newton iteration for a zero of conjugate_ratio_residual. Real negative
/// seeds stay on the real axis (the residual is purely imaginary there);
/// complex seeds run a full two-dimensional Newton step. Iterates leaving
/// the admissible region abort with LeftRegion.
inline cplx weber_root(cplx lambda0, double tol = 1e-12)
{
    detail::require_admissible(lambda0);
    const double in_tol = std::min(1e-11, tol);
    cplx lam = lambda0;
    const bool real_mode = (lambda0.imag() == 0.0 && lambda0.real() < 0.0);
    auto check_region = [&](cplx l) {
        if (detail::dist_to_degenerate(l) < 0.05 || std::abs(l) > 50.0
            || (real_mode && l.real() >= -0.05)) {
            throw error(errc::left_region, "root iteration left the admissible parameter region");
        }
    };
    for (int it = 0; it < 40; ++it) {
        check_region(lam);
        const cplx R = conjugate_ratio_residual(lam, in_tol);
        const double h = 1e-6 * (1.0 + std::abs(lam));
        cplx step;
        if (real_mode) {
            const double g = R.imag();
            const double gp = (conjugate_ratio_residual(lam + h, in_tol).imag()
                               - conjugate_ratio_residual(lam - h, in_tol).imag())
                              / (2.0 * h);
            if (gp == 0.0) {
                throw non_convergence_error("flat residual derivative in root search", lam, lam);
            }
            step = cplx(g / gp, 0.0);
        } else {
            const cplx Rx = (conjugate_ratio_residual(lam + h, in_tol)
                             - conjugate_ratio_residual(lam - h, in_tol))
                            / (2.0 * h);
            const cplx Ry = (conjugate_ratio_residual(lam + cplx(0, h), in_tol)
                             - conjugate_ratio_residual(lam - cplx(0, h), in_tol))
                            / (2.0 * h);
            const double a = Rx.real(), c = Rx.imag();
            const double b = Ry.real(), d = Ry.imag();
            const double det = a * d - b * c;
            if (std::abs(det) < 1e-300) {
                throw non_convergence_error("singular Jacobian in root search", lam, lam);
            }
            step = cplx((d * R.real() - b * R.imag()) / det, (a * R.imag() - c * R.real()) / det);
        }
        lam -= step;
        if (std::abs(step) <= tol * (1.0 + std::abs(lam))) {
            check_region(lam);
            const cplx Rf = conjugate_ratio_residual(lam, in_tol);
            if (std::abs(Rf) > 1e-8) {
                throw non_convergence_error("root candidate has large residual", lam, lam + step);
            }
            return lam;
        }
    }
    throw non_convergence_error("root iteration exhausted its budget", lam, lam);
}

/// d/dlambda of all four periods. For real lambda < 0 the derivatives come
/// from differentiated branch-cut kernels; otherwise from Richardson-refined
/// central differences of the (holomorphic) periods.
inline period_derivs period_derivatives(cplx lambda, double tol = 1e-10)
{
    detail::require_admissible(lambda);
    period_derivs D;
    if (lambda.imag() == 0.0 && lambda.real() < 0.0) {
        const double l = lambda.real();
        const double t_in = 0.5 * tol;
        auto cyc = [&](auto f) {
            return integrate_singular_fn(f, t_in).value.real();
        };
        D.domega1 = cplx(cyc([&](double t, double omt) {
                             const double u = 1.0 - t * l;
                             return cplx(t / (u * std::sqrt(t * omt * u)), 0);
                         }),
                         0);
        D.dphi1 = cplx(cyc([&](double t, double omt) {
                           const double u = 1.0 - t * l;
                           return cplx(std::sqrt(t / (omt * u)) * (2.0 + l * t / u), 0);
                       }),
                       0);
        D.domega2 = cplx(0, cyc([&](double x, double omx) {
                             const double u = x - l;
                             return cplx(1.0 / (u * std::sqrt(x * omx * u)), 0);
                         }));
        D.dphi2 = cplx(0, cyc([&](double x, double omx) {
                           const double u = x - l;
                           return cplx(std::sqrt(x / (omx * u)) / u, 0);
                       }));
        return D;
    }
    const double h = 1e-5 * (1.0 + std::abs(lambda));
    auto central = [&](double hh) {
        const period_set a = periods(lambda + hh, tol);
        const period_set b = periods(lambda - hh, tol);
        period_derivs d;
        d.domega1 = (a.omega1 - b.omega1) / (2.0 * hh);
        d.domega2 = (a.omega2 - b.omega2) / (2.0 * hh);
        d.dphi1 = (a.phi1 - b.phi1) / (2.0 * hh);
        d.dphi2 = (a.phi2 - b.phi2) / (2.0 * hh);
        return d;
    };
    const period_derivs dh = central(h);
    const period_derivs dh2 = central(0.5 * h);
    D.domega1 = (4.0 * dh2.domega1 - dh.domega1) / 3.0;
    D.domega2 = (4.0 * dh2.domega2 - dh.domega2) / 3.0;
    D.dphi1 = (4.0 * dh2.dphi1 - dh.dphi1) / 3.0;
    D.dphi2 = (4.0 * dh2.dphi2 - dh.dphi2) / 3.0;
    return D;
}

/// omega_1 Phi_2 - omega_2 Phi_1 - 8 pi i; vanishes for every admissible
/// lambda and certifies both quadrature accuracy and cycle orientation.
inline cplx bilinear_residual(cplx lambda, double tol = 1e-11)
{
    const period_set P = periods(lambda, tol);
    return P.omega1 * P.phi2 - P.omega2 * P.phi1 - cplx(0, 8.0 * detail::pi_c);
}

/// Reduce a lattice ratio to the standard fundamental domain
/// |Re tau| <= 1/2, |tau| >= 1, Im tau > 0.
inline cplx reduce_tau(cplx tau)
{
    if (!(tau.imag() > 0)) {
        throw error(errc::domain_error, "lattice ratio must have positive imaginary part");
    }
    for (int i = 0; i < 200; ++i) {
        tau = cplx(tau.real() - std::round(tau.real()), tau.imag());
        if (std::norm(tau) < 1.0 - 1e-15) {
            tau = -1.0 / tau;
        } else {
            return tau;
        }
    }
    throw non_convergence_error("lattice reduction did not settle", tau, tau);
}

/// A point of the curve; at_end marks the single point over x = infinity
/// (the puncture of the surface), where x and y are not finite.
struct curve_pt
{
    cplx x{}, y{};
    bool at_end = false;
};

/// The uniformization z -> (x(z), y(z)) of the curve by its period lattice:
/// x = 4 p(z) + (lambda+1)/3 and y = 4 p'(z) with p the Weierstrass function
/// of the lattice spanned by the omega periods, so that dz = dx / y exactly.
class torus_map
{
public:
    explicit torus_map(cplx lambda, double tol = 1e-11) : lambda_(lambda)
    {
        const period_set P = periods(lambda, tol);
        w1_ = P.omega1;
        w2_ = P.omega2;
        const cplx s = (lambda + 1.0) / 3.0;
        g2_ = -(lambda - 3.0 * s * s) / 4.0;
        g3_ = -(lambda * s - 2.0 * s * s * s) / 16.0;
        shortest_ = std::numeric_limits<double>::infinity();
        for (int m = -2; m <= 2; ++m) {
            for (int n = -2; n <= 2; ++n) {
                if (m == 0 && n == 0) {
                    continue;
                }
                shortest_ = std::min(shortest_, std::abs(double(m) * w1_ + double(n) * w2_));
            }
        }
        // Laurent coefficients of p(z) = z^-2 + sum c_k z^(2k-2).
        c_[2] = g2_ / 20.0;
        c_[3] = g3_ / 28.0;
        for (int k = 4; k < coeff_count; ++k) {
            cplx acc(0, 0);
            for (int m = 2; m <= k - 2; ++m) {
                acc += c_[m] * c_[k - m];
            }
            c_[k] = 3.0 * acc / ((2.0 * k + 1.0) * (k - 3.0));
        }
    }

    cplx lambda() const { return lambda_; }
    cplx omega1() const { return w1_; }
    cplx omega2() const { return w2_; }
    double lattice_scale() const { return shortest_; }

    /// Reduce z modulo the lattice to the centered fundamental cell.
    cplx reduce(cplx z) const
    {
        const double det = w1_.real() * w2_.imag() - w1_.imag() * w2_.real();
        double a = (z.real() * w2_.imag() - z.imag() * w2_.real()) / det;
        double b = (w1_.real() * z.imag() - w1_.imag() * z.real()) / det;
        a -= std::round(a);
        b -= std::round(b);
        cplx best = a * w1_ + b * w2_;
        for (int m = -1; m <= 1; ++m) {
            for (int n = -1; n <= 1; ++n) {
                const cplx cand = best + double(m) * w1_ + double(n) * w2_;
                if (std::abs(cand) < std::abs(best) - 0.0) {
                    best = cand;
                }
            }
        }
        return best;
    }

    curve_pt map(cplx z) const
    {
        cplx zr = reduce(z);
        if (std::abs(zr) < 1e-10 * shortest_) {
            const double inf = std::numeric_limits<double>::infinity();
            return {cplx(inf, 0), cplx(inf, 0), true};
        }
        int halvings = 0;
        while (std::abs(zr) > 0.3 * shortest_) {
            zr *= 0.5;
            ++halvings;
        }
        const cplx z2 = zr * zr;
        cplx p = 1.0 / z2;
        cplx dp = -2.0 / (z2 * zr);
        cplx zpow = z2; // z^(2k-2) for k = 2
        for (int k = 2; k < coeff_count; ++k) {
            p += c_[k] * zpow;
            dp += (2.0 * k - 2.0) * c_[k] * zpow / zr;
            zpow *= z2;
        }
        for (int i = 0; i < halvings; ++i) {
            const cplx pp = 6.0 * p * p - 0.5 * g2_;
            const cplx q = pp / (2.0 * dp);
            const cplx p_next = q * q - 2.0 * p;
            dp = q * (6.0 * p - 2.0 * q * q) - dp;
            p = p_next;
        }
        return {4.0 * p + (lambda_ + 1.0) / 3.0, 4.0 * dp, false};
    }

private:
    static constexpr int coeff_count = 22;
    cplx lambda_, w1_, w2_, g2_, g3_;
    double shortest_ = 0;
    std::array<cplx, coeff_count> c_{};
};

} // namespace scg

#endif
