#ifndef SCG_SPHERE_HPP
#define SCG_SPHERE_HPP

// Points of the Riemann sphere held as normalized projective pairs, with
// the geodesic distance of the radius-1/2 round metric. The projective
// representation keeps values near poles as well-conditioned as values
// near zero, which matters when meromorphic data are evaluated close to
// their poles.

#include <algorithm>
#include <cmath>
#include <complex>

#include <scg/errors.hpp>
#include <scg/quadrature.hpp>

namespace scg
{

struct sphere_pt
{
    cplx u{0, 0}, v{1, 0}; ///< the point u : v, kept with |u|^2 + |v|^2 = 1

    sphere_pt() = default;

    /// From homogeneous components; (0 : 0) is rejected.
    sphere_pt(cplx uu, cplx vv)
    {
        double m = std::max({std::abs(uu.real()), std::abs(uu.imag()), std::abs(vv.real()),
                             std::abs(vv.imag())});
        if (!(m > 0.0) || !std::isfinite(m)) {
            throw error(errc::domain_error, "projective pair must be finite and nonzero");
        }
        uu /= m;
        vv /= m;
        const double s = std::sqrt(std::norm(uu) + std::norm(vv));
        u = uu / s;
        v = vv / s;
    }

    /// From a finite complex value w = u / v.
    static sphere_pt from_value(cplx w) { return sphere_pt(w, cplx(1, 0)); }

    /// The point at infinity.
    static sphere_pt pole() { return sphere_pt(cplx(1, 0), cplx(0, 0)); }

    bool is_pole(double tol = 1e-14) const { return std::abs(v) <= tol; }

    /// Finite value u / v; throws at the pole.
    cplx value() const
    {
        if (std::abs(v) == 0.0) {
            throw error(errc::at_pole, "projective point at infinity has no finite value");
        }
        return u / v;
    }

    /// Complex conjugation of the underlying value.
    sphere_pt conj() const
    {
        sphere_pt p;
        p.u = std::conj(u);
        p.v = std::conj(v);
        return p;
    }

    /// The antipodal point of the round sphere.
    sphere_pt antipode() const
    {
        sphere_pt p;
        p.u = -std::conj(v);
        p.v = std::conj(u);
        return p;
    }
};

/// Chordal separation sin(angle/2 scaled): |u_p v_q - u_q v_p| in [0, 1]
/// for normalized pairs; 0 at equal points, 1 at antipodal ones.
inline double sphere_chi(const sphere_pt &p, const sphere_pt &q)
{
    return std::clamp(std::abs(p.u * q.v - q.u * p.v), 0.0, 1.0);
}

/// Geodesic distance on the radius-1/2 sphere: asin(chi), at most pi/2.
inline double sphere_distance(const sphere_pt &p, const sphere_pt &q)
{
    return std::asin(sphere_chi(p, q));
}

} // namespace scg

#endif
