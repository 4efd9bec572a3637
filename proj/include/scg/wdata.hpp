#ifndef SCG_WDATA_HPP
#define SCG_WDATA_HPP

// Representation data of spacelike zero-mean-curvature immersions built on
// the curve y^2 = x(x-1)(x-lambda). A datum supplies two meromorphic
// functions phi, psi and a differential dh = (dh/dz) dz; the immersion is
//
//   X(z) = 2 Re Int ( phi+psi, -i(phi-psi), 1-phi*psi, 1+phi*psi ) dh
//
// into R^4 with signature (+,+,+,-), and the induced metric density is
// |phi - conj(psi)|^2 |dh/dz|^2. Three families are supported:
//
//  * case 1: phi = (x-x0)/(b(y-y0)+c(x-x0)), psi = (l(y+y0)+m(x-x0))/(x-x0),
//    dh = (b(y-y0)+c(x-x0)) dz, with x0 implicit in y0^2 = x0(x0-1)(x0-lambda);
//  * case 2: phi = 1/(a(x-x0)), psi = b x + c, dh = a(x-x0) dz, |a| = 1;
//  * the shear family of the genus-one R^3 surface with Gauss map
//    G = x/(rho y) and height differential rho dx: phi = G/zeta,
//    psi = -1/(zeta G), dh = zeta rho y dz, regular exactly for zeta off the
//    imaginary axis.
//
// All four component differentials (phi dh, psi dh, dh, phi psi dh) reduce
// to polynomials in (x, y), so evaluation needs no divisions and is exact
// at the branch points; the only excluded point is the end over x = inf.

#include <cmath>
#include <complex>
#include <utility>
#include <variant>

#include <scg/elliptic.hpp>
#include <scg/errors.hpp>
#include <scg/quadrature.hpp>
#include <scg/sphere.hpp>

namespace scg
{

struct case1_params
{
    cplx b{}, c{}, l{}, m{}, y0{}, lambda{};
};

struct case2_params
{
    cplx a{}, b{}, c{}, x0{}, lambda{};
};

/// One member of the shear family over the rho-scaled genus-one surface.
struct deformed_r3
{
    double rho = 0; ///< scale of the underlying R^3 datum
    cplx lambda{};
    cplx zeta{}; ///< family parameter; must stay off the imaginary axis
};

using w_data = std::variant<case1_params, case2_params, deformed_r3>;

/// Derivative of the defining cubic x(x-1)(x-lambda).
inline cplx cubic_deriv(cplx x, cplx lambda)
{
    return 3.0 * x * x - 2.0 * (lambda + 1.0) * x + lambda;
}

/// The branch of x0 through x0(0) = 0 solving y0^2 = x0(x0-1)(x0-lambda),
/// by Newton iteration from 0. Iterates wandering toward the other sheet
/// roots abort with BranchLost.
inline cplx x0_implicit(cplx y0, cplx lambda)
{
    if (y0 == cplx(0, 0)) {
        return {0, 0};
    }
    const cplx target = y0 * y0;
    const double fence = 0.45 * std::min(1.0, std::abs(lambda));
    cplx x(0, 0);
    for (int it = 0; it < 60; ++it) {
        const cplx f = x * (x - 1.0) * (x - lambda) - target;
        const cplx fp = cubic_deriv(x, lambda);
        if (std::abs(fp) < 1e-300) {
            throw error(errc::branch_lost, "implicit base point hit a critical value");
        }
        const cplx step = f / fp;
        x -= step;
        if (std::abs(x) > fence) {
            throw error(errc::branch_lost, "implicit base point left its branch");
        }
        if (std::abs(step) <= 1e-13 * (1.0 + std::abs(x))) {
            return x;
        }
    }
    throw error(errc::non_convergence, "implicit base point iteration stalled");
}

/// The two residue-matching coefficients of a case-1 datum:
///   A = b l (x0 - (lambda+1)/3) + c m,
///   B = y0 (c l - b m) + b l (x0^2 - (lambda+1) x0 + 2 lambda/3) - c m x0.
inline std::pair<cplx, cplx> coeffs_AB(const case1_params &p, cplx x0)
{
    const cplx A = p.b * p.l * (x0 - (p.lambda + 1.0) / 3.0) + p.c * p.m;
    const cplx B = p.y0 * (p.c * p.l - p.b * p.m)
                   + p.b * p.l * (x0 * x0 - (p.lambda + 1.0) * x0 + 2.0 * p.lambda / 3.0)
                   - p.c * p.m * x0;
    return {A, B};
}

/// rho = sqrt(6) Gamma(3/4) / Gamma(1/4), the scale of the distinguished
/// genus-one datum.
inline double cg_rho_gamma()
{
    return std::sqrt(6.0) * gamma_fn(0.75) / gamma_fn(0.25);
}

/// Both routes to rho: the gamma-function closed form and the period ratio
/// rho^2 = |Phi_1| / |alpha_1(0,1,1)| at lambda = -1.
struct rho_routes
{
    double gamma_route = 0, period_route = 0;
};

inline rho_routes cg_rho(double tol = 1e-11)
{
    rho_routes r;
    r.gamma_route = cg_rho_gamma();
    const period_set P = periods(cplx(-1, 0), tol);
    const cplx a11 = alpha_period(0, 1, 1, cplx(-1, 0), 1, tol);
    r.period_route = std::sqrt(std::abs(P.phi1) / std::abs(a11));
    return r;
}

/// The distinguished case-1 datum: b = rho, l = -rho, c = m = y0 = 0,
/// lambda = -1.
inline case1_params vstar()
{
    const double rho = cg_rho_gamma();
    case1_params p;
    p.b = cplx(rho, 0);
    p.c = cplx(0, 0);
    p.l = cplx(-rho, 0);
    p.m = cplx(0, 0);
    p.y0 = cplx(0, 0);
    p.lambda = cplx(-1, 0);
    return p;
}

/// Constants of the square-torus obstruction for case-2 data at lambda = -1:
/// with k = -Phi_1/omega_1 = 2 rho^2 / 3, the residual rows that remain after
/// the exact cancellation carry the factor (1/3 - k^2), which is positive
/// because rho^4 = (9/4) k^2 differs from 3/4.
struct torus_obstruction
{
    double k = 0;           ///< -Phi_1/omega_1 at lambda = -1
    double k_squared = 0;   ///< k^2, compared against 1/3
    double rho_fourth = 0;  ///< (9/4) k^2 = rho^4
    double gap = 0;         ///< 1/3 - k^2 > 0
    double bound_coeff = 0; ///< omega_1 * gap, lower-bound scale for the residual
};

inline torus_obstruction square_torus_obstruction(double tol = 1e-11)
{
    const period_set P = periods(cplx(-1, 0), tol);
    torus_obstruction o;
    o.k = (-P.phi1 / P.omega1).real();
    o.k_squared = o.k * o.k;
    o.rho_fourth = 2.25 * o.k_squared;
    o.gap = 1.0 / 3.0 - o.k_squared;
    o.bound_coeff = P.omega1.real() * o.gap;
    return o;
}

/// Values of the four component differentials at one curve point,
/// as coefficients of dz.
struct form_values
{
    cplx phi_dh{}, psi_dh{}, dh{}, phi_psi_dh{};
};

/// Evaluator for one datum: component differentials, the two sphere-valued
/// meromorphic functions with their removable-singularity limits, and the
/// metric density.
class data_eval
{
public:
    explicit data_eval(w_data d) : d_(std::move(d))
    {
        if (const auto *c1 = std::get_if<case1_params>(&d_)) {
            lambda_ = c1->lambda;
            x0_ = x0_implicit(c1->y0, c1->lambda);
        } else if (const auto *c2 = std::get_if<case2_params>(&d_)) {
            lambda_ = c2->lambda;
            x0_ = c2->x0;
            if (std::abs(std::abs(c2->a) - 1.0) > 1e-9) {
                throw error(errc::domain_error, "case-2 factor a must have unit modulus");
            }
        } else {
            const auto &dr = std::get<deformed_r3>(d_);
            lambda_ = dr.lambda;
            x0_ = cplx(0, 0);
            if (!(dr.rho > 0)) {
                throw error(errc::domain_error, "base scale rho must be positive");
            }
            if (dr.zeta.real() == 0.0) {
                throw error(errc::imaginary_zeta, "family parameter on the imaginary axis is degenerate");
            }
        }
    }

    const w_data &data() const { return d_; }
    cplx lambda() const { return lambda_; }
    cplx x0() const { return x0_; }

    form_values forms(const curve_pt &p) const
    {
        if (p.at_end) {
            throw error(errc::at_end, "component differentials are singular at the end");
        }
        form_values f;
        if (const auto *c1 = std::get_if<case1_params>(&d_)) {
            const cplx x = p.x, y = p.y;
            const cplx S = x * x + x * x0_ + x0_ * x0_ - (c1->lambda + 1.0) * (x + x0_) + c1->lambda;
            f.phi_dh = x - x0_;
            f.psi_dh = c1->b * c1->l * S + c1->c * c1->l * (y + c1->y0) + c1->b * c1->m * (y - c1->y0)
                       + c1->c * c1->m * (x - x0_);
            f.dh = c1->b * (y - c1->y0) + c1->c * (x - x0_);
            f.phi_psi_dh = c1->l * (y + c1->y0) + c1->m * (x - x0_);
        } else if (const auto *c2 = std::get_if<case2_params>(&d_)) {
            f.phi_dh = cplx(1, 0);
            f.psi_dh = (c2->b * p.x + c2->c) * c2->a * (p.x - c2->x0);
            f.dh = c2->a * (p.x - c2->x0);
            f.phi_psi_dh = c2->b * p.x + c2->c;
        } else {
            const auto &dr = std::get<deformed_r3>(d_);
            const double r2 = dr.rho * dr.rho;
            f.phi_dh = p.x;
            f.psi_dh = -r2 * (p.x - 1.0) * (p.x - dr.lambda);
            f.dh = dr.zeta * dr.rho * p.y;
            f.phi_psi_dh = -dr.rho * p.y / dr.zeta;
        }
        return f;
    }

    /// First sphere-valued function, with its limits at the end and at the
    /// base points where numerator and denominator vanish together.
    sphere_pt phi(const curve_pt &p) const
    {
        if (const auto *c1 = std::get_if<case1_params>(&d_)) {
            if (p.at_end) {
                return (c1->b != cplx(0, 0)) ? sphere_pt(cplx(0, 0), cplx(1, 0))
                                             : sphere_pt(cplx(1, 0), c1->c);
            }
            const cplx num = p.x - x0_;
            const cplx den = c1->b * (p.y - c1->y0) + c1->c * (p.x - x0_);
            if (num == cplx(0, 0) && den == cplx(0, 0)) {
                if (c1->y0 == cplx(0, 0)) {
                    return sphere_pt(cplx(0, 0), cplx(1, 0));
                }
                return sphere_pt(2.0 * c1->y0, c1->b * cubic_deriv(x0_, c1->lambda) + 2.0 * c1->c * c1->y0);
            }
            return sphere_pt(num, den);
        }
        if (const auto *c2 = std::get_if<case2_params>(&d_)) {
            if (p.at_end) {
                return sphere_pt(cplx(0, 0), cplx(1, 0));
            }
            return sphere_pt(cplx(1, 0), c2->a * (p.x - c2->x0));
        }
        const auto &dr = std::get<deformed_r3>(d_);
        if (p.at_end) {
            return sphere_pt(cplx(0, 0), cplx(1, 0));
        }
        const cplx den = dr.zeta * dr.rho * p.y;
        if (p.x == cplx(0, 0) && den == cplx(0, 0)) {
            return sphere_pt(cplx(0, 0), cplx(1, 0));
        }
        return sphere_pt(p.x, den);
    }

    /// Second sphere-valued function, with matching limit handling.
    sphere_pt psi(const curve_pt &p) const
    {
        if (const auto *c1 = std::get_if<case1_params>(&d_)) {
            if (p.at_end) {
                return (c1->l != cplx(0, 0)) ? sphere_pt(cplx(1, 0), cplx(0, 0))
                                             : sphere_pt(c1->m, cplx(1, 0));
            }
            const cplx num = c1->l * (p.y + c1->y0) + c1->m * (p.x - x0_);
            const cplx den = p.x - x0_;
            if (num == cplx(0, 0) && den == cplx(0, 0)) {
                if (c1->y0 == cplx(0, 0)) {
                    return sphere_pt(cplx(1, 0), cplx(0, 0));
                }
                return sphere_pt(2.0 * c1->y0 * c1->m - c1->l * cubic_deriv(x0_, c1->lambda), 2.0 * c1->y0);
            }
            return sphere_pt(num, den);
        }
        if (const auto *c2 = std::get_if<case2_params>(&d_)) {
            if (p.at_end) {
                return (c2->b != cplx(0, 0)) ? sphere_pt(cplx(1, 0), cplx(0, 0))
                                             : sphere_pt(c2->c, cplx(1, 0));
            }
            return sphere_pt(c2->b * p.x + c2->c, cplx(1, 0));
        }
        const auto &dr = std::get<deformed_r3>(d_);
        if (p.at_end) {
            return sphere_pt(cplx(1, 0), cplx(0, 0));
        }
        const cplx num = -dr.rho * p.y;
        const cplx den = dr.zeta * p.x;
        if (num == cplx(0, 0) && den == cplx(0, 0)) {
            return sphere_pt(cplx(1, 0), cplx(0, 0));
        }
        return sphere_pt(num, den);
    }

    /// Metric density |phi - conj(psi)|^2 |dh/dz|^2, through the polynomial
    /// forms so that zeros of dh/dz cancel against the poles of phi or psi.
    double metric_density(const curve_pt &p) const
    {
        if (p.at_end) {
            throw error(errc::at_end, "metric density diverges at the end");
        }
        const form_values f = forms(p);
        if (f.dh == cplx(0, 0)) {
            return std::norm(f.phi_dh) + std::norm(f.psi_dh);
        }
        const cplx unit = f.dh / std::conj(f.dh);
        return std::norm(f.phi_dh - std::conj(f.psi_dh) * unit);
    }

private:
    w_data d_;
    cplx lambda_{}, x0_{};
};

/// Shear the datum by an extra factor zeta. Case-1 data qualify only in
/// their constant-product form (c = m = y0 = 0); a deformed datum composes
/// multiplicatively. The resulting parameter must stay off the imaginary
/// axis.
inline deformed_r3 lorentz_deform(const w_data &d, cplx zeta)
{
    deformed_r3 out;
    if (const auto *dr = std::get_if<deformed_r3>(&d)) {
        out = *dr;
        out.zeta *= zeta;
    } else if (const auto *c1 = std::get_if<case1_params>(&d)) {
        if (c1->y0 != cplx(0, 0) || c1->c != cplx(0, 0) || c1->m != cplx(0, 0) || c1->b == cplx(0, 0)
            || c1->l == cplx(0, 0)) {
            throw error(errc::domain_error, "datum is outside the constant-product family");
        }
        cplx zc = std::sqrt(-c1->b / c1->l);
        if (zc.real() < 0) {
            zc = -zc;
        }
        const cplx rho_b = (zc == cplx(0, 0)) ? cplx(0, 0) : c1->b / zc;
        if (!(rho_b.real() > 0) || std::abs(rho_b.imag()) > 1e-9 * rho_b.real()) {
            throw error(errc::domain_error, "base scale of the family member is not a positive real");
        }
        out.rho = rho_b.real();
        out.lambda = c1->lambda;
        out.zeta = zc * zeta;
    } else {
        throw error(errc::domain_error, "case-2 data have a non-constant product and do not shear");
    }
    if (out.zeta.real() == 0.0) {
        throw error(errc::imaginary_zeta, "shear parameter landed on the imaginary axis");
    }
    return out;
}

/// Normalize the shear parameter to unit modulus by the boost congruence
/// that maps zeta to zeta / t; returns the normalized datum and t.
struct lorentz_normalized
{
    deformed_r3 data;
    double t = 1;
};

inline lorentz_normalized normalize_lorentz(const deformed_r3 &d)
{
    if (d.zeta.real() == 0.0) {
        throw error(errc::imaginary_zeta, "cannot normalize a degenerate shear parameter");
    }
    lorentz_normalized n;
    n.t = std::abs(d.zeta);
    n.data = d;
    n.data.zeta = d.zeta / n.t;
    return n;
}

/// Minimum over the surface of the spherical distance between phi and
/// conj(psi): positive exactly when the immersion is regular and spacelike,
/// and at most pi/2 (attained when the two functions are antipodal
/// everywhere). Sampled on an offset lattice grid with the end and the base
/// points adjoined through their limit values.
inline double regularity_margin(const w_data &d, int grid_n = 48, double tol = 1e-11)
{
    const data_eval ev(d);
    const torus_map tm(ev.lambda(), tol);
    const cplx w1 = tm.omega1(), w2 = tm.omega2();
    const double puncture = 0.02 * std::abs(w1);

    double margin = std::asin(1.0);
    auto take = [&](const curve_pt &p) {
        margin = std::min(margin, sphere_distance(ev.phi(p), ev.psi(p).conj()));
    };

    for (int i = 0; i < grid_n; ++i) {
        for (int j = 0; j < grid_n; ++j) {
            const cplx z = ((i + 0.5) / grid_n) * w1 + ((j + 0.5) / grid_n) * w2;
            if (std::abs(tm.reduce(z)) < puncture) {
                continue;
            }
            take(tm.map(z));
        }
    }

    curve_pt end;
    end.at_end = true;
    take(end);

    if (const auto *c1 = std::get_if<case1_params>(&d)) {
        take(curve_pt{ev.x0(), c1->y0, false});
        take(curve_pt{ev.x0(), -c1->y0, false});
    } else if (const auto *c2 = std::get_if<case2_params>(&d)) {
        const cplx yc = std::sqrt(c2->x0 * (c2->x0 - 1.0) * (c2->x0 - c2->lambda));
        take(curve_pt{c2->x0, yc, false});
        take(curve_pt{c2->x0, -yc, false});
    } else {
        take(curve_pt{cplx(0, 0), cplx(0, 0), false});
        take(curve_pt{cplx(1, 0), cplx(0, 0), false});
        take(curve_pt{ev.lambda(), cplx(0, 0), false});
    }
    return margin;
}

} // namespace scg

#endif
