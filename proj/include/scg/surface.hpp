#pragma once

// Discrete geometry of the immersed surfaces. The representation map
//   X(z) = 2 Re Int_base^z (phi+psi, -i(phi-psi), 1-phi*psi, 1+phi*psi) dh
// is integrated along explicit paths on the torus; on top of that sit mesh
// sampling over a fundamental cell, total-curvature estimates, a symmetric
// self-intersection search, ambient symmetry verification, a sheet-swap
// pullback diagnostic, and OBJ/CSV export.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <scg/elliptic.hpp>
#include <scg/errors.hpp>
#include <scg/quadrature.hpp>
#include <scg/wdata.hpp>

namespace scg
{

/// Ambient coordinates, signature (+, +, +, -).
using coords4 = std::array<double, 4>;

namespace detail
{

inline coords4 c4_add(const coords4 &a, const coords4 &b)
{
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}

inline coords4 c4_sub(const coords4 &a, const coords4 &b)
{
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}

inline double c4_max(const coords4 &a)
{
    return std::max(std::max(std::abs(a[0]), std::abs(a[1])), std::max(std::abs(a[2]), std::abs(a[3])));
}

/// Lorentz inner product with signature (+, +, +, -).
inline double lorentz_dot(const coords4 &a, const coords4 &b)
{
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - a[3] * b[3];
}

using form4 = std::array<cplx, 4>;

template <typename F>
void gauss_pair4(const F &f, double a, double b, form4 &coarse, form4 &fine, double &l1)
{
    const auto &tb = gl_tables();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    coarse = {};
    fine = {};
    l1 = 0.0;
    for (std::size_t i = 0; i < tb.x7.size(); ++i) {
        const form4 v = f(mid + half * tb.x7[i]);
        for (int k = 0; k < 4; ++k) {
            coarse[k] += v[k] * tb.w7[i];
        }
    }
    for (std::size_t i = 0; i < tb.x15.size(); ++i) {
        const form4 v = f(mid + half * tb.x15[i]);
        for (int k = 0; k < 4; ++k) {
            fine[k] += v[k] * tb.w15[i];
            l1 += std::abs(v[k]) * tb.w15[i];
        }
    }
    for (int k = 0; k < 4; ++k) {
        coarse[k] *= half;
        fine[k] *= half;
    }
    l1 *= std::abs(half);
}

template <typename F>
form4 gauss_adaptive4(const F &f, double a, double b, double tol, int depth, int max_depth)
{
    form4 coarse, fine;
    double l1 = 0.0;
    gauss_pair4(f, a, b, coarse, fine, l1);
    double err = 0.0;
    for (int k = 0; k < 4; ++k) {
        err = std::max(err, std::abs(fine[k] - coarse[k]));
    }
    // Below the rounding mass of the panel there is nothing left to resolve.
    const double accept = std::max(tol, 32.0 * std::numeric_limits<double>::epsilon() * l1);
    if (err <= accept || depth >= max_depth) {
        if (depth >= max_depth && err > accept * 16) {
            throw non_convergence_error("path integral depth cap", fine[0], coarse[0]);
        }
        return fine;
    }
    const double mid = 0.5 * (a + b);
    const form4 lo = gauss_adaptive4(f, a, mid, 0.5 * tol, depth + 1, max_depth);
    const form4 hi = gauss_adaptive4(f, mid, b, 0.5 * tol, depth + 1, max_depth);
    form4 out;
    for (int k = 0; k < 4; ++k) {
        out[k] = lo[k] + hi[k];
    }
    return out;
}

/// One piece of an integration path: a straight segment, or a circular arc
/// z = center + r exp(i(t0 + s (t1 - t0))) used to detour around a pole.
struct path_piece
{
    bool arc = false;
    cplx a{}, b{};   // segment endpoints
    cplx center{};   // arc data
    double r = 0, t0 = 0, t1 = 0;
};

/// Split [z0, z1] into straight runs and semicircular detours around every
/// lattice point whose pole disk of radius `r` the segment would cross.
inline std::vector<path_piece> route_segment(cplx z0, cplx z1, cplx w1, cplx w2, double r)
{
    std::vector<path_piece> out;
    const cplx dir = z1 - z0;
    const double len = std::abs(dir);
    if (len == 0.0) {
        return out;
    }
    const double det = w1.real() * w2.imag() - w1.imag() * w2.real();
    auto lat_a = [&](cplx z) { return (z.real() * w2.imag() - z.imag() * w2.real()) / det; };
    auto lat_b = [&](cplx z) { return (w1.real() * z.imag() - w1.imag() * z.real()) / det; };
    const double pad = 2.0 * r / std::min(std::abs(w1), std::abs(w2)) + 1.0;
    const int m_lo = int(std::floor(std::min(lat_a(z0), lat_a(z1)) - pad));
    const int m_hi = int(std::ceil(std::max(lat_a(z0), lat_a(z1)) + pad));
    const int n_lo = int(std::floor(std::min(lat_b(z0), lat_b(z1)) - pad));
    const int n_hi = int(std::ceil(std::max(lat_b(z0), lat_b(z1)) + pad));

    struct crossing
    {
        double t_in, t_out;
        cplx center;
    };
    std::vector<crossing> hits;
    for (int m = m_lo; m <= m_hi; ++m) {
        for (int n = n_lo; n <= n_hi; ++n) {
            const cplx w = double(m) * w1 + double(n) * w2;
            // Foot of the perpendicular from w onto the full line.
            const double tf = ((w - z0) * std::conj(dir)).real() / (len * len);
            const cplx foot = z0 + tf * dir;
            const double d = std::abs(w - foot);
            if (d >= r * (1.0 - 1e-12)) {
                continue;
            }
            const double half = std::sqrt(std::max(r * r - d * d, 0.0)) / len;
            double t_in = std::clamp(tf - half, 0.0, 1.0);
            double t_out = std::clamp(tf + half, 0.0, 1.0);
            if (t_out - t_in < 1e-15) {
                continue; // incursion does not meet the [z0, z1] range
            }
            hits.push_back({t_in, t_out, w});
        }
    }
    std::sort(hits.begin(), hits.end(), [](const crossing &x, const crossing &y) { return x.t_in < y.t_in; });

    double t_prev = 0.0;
    for (const crossing &h : hits) {
        if (h.t_in > t_prev + 1e-15) {
            path_piece seg;
            seg.a = z0 + t_prev * dir;
            seg.b = z0 + h.t_in * dir;
            out.push_back(seg);
        }
        const cplx pin = z0 + h.t_in * dir, pout = z0 + h.t_out * dir;
        path_piece arc;
        arc.arc = true;
        arc.center = h.center;
        arc.r = r;
        arc.t0 = std::arg(pin - h.center);
        double dtheta = std::remainder(std::arg(pout - h.center) - arc.t0, 2.0 * pi_c);
        if (dtheta < -pi_c + 1e-9) {
            dtheta += 2.0 * pi_c; // pass through the center: detour counterclockwise
        }
        arc.t1 = arc.t0 + dtheta;
        out.push_back(arc);
        t_prev = h.t_out;
    }
    if (t_prev < 1.0 - 1e-15) {
        path_piece seg;
        seg.a = z0 + t_prev * dir;
        seg.b = z1;
        out.push_back(seg);
    }
    return out;
}

} // namespace detail

/// Integrator for one datum: holds the evaluator and the uniformization and
/// produces ambient coordinates by path integration from a base point at the
/// half-period omega1/2 (a branch point where the component forms stay
/// finite). Straight paths acquire semicircular detours of the puncture
/// radius around lattice points, where the pulled-back forms have poles.
class immersion
{
public:
    explicit immersion(w_data d, double tol = 1e-9)
        : ev_(std::move(d)), tm_(ev_.lambda(), std::min(tol, 1e-11)), tol_(tol)
    {
        base_ = 0.5 * tm_.omega1();
        puncture_ = 0.02 * std::abs(tm_.omega1());
    }

    const data_eval &eval() const { return ev_; }
    const torus_map &torus() const { return tm_; }
    cplx base() const { return base_; }
    double puncture_radius() const { return puncture_; }

    /// dz-coefficients of the four integrand forms at z.
    detail::form4 forms_at(cplx z) const
    {
        const form_values f = ev_.forms(tm_.map(z));
        return {f.phi_dh + f.psi_dh, cplx(0, -1) * (f.phi_dh - f.psi_dh), f.dh - f.phi_psi_dh,
                f.dh + f.phi_psi_dh};
    }

    /// Complex path integrals of the four forms along [z0, z1] with detours.
    detail::form4 integrate(cplx z0, cplx z1) const
    {
        check_endpoint(z0);
        check_endpoint(z1);
        const auto pieces = detail::route_segment(z0, z1, tm_.omega1(), tm_.omega2(), puncture_);
        detail::form4 acc{};
        if (pieces.empty()) {
            return acc;
        }
        const double piece_tol = tol_ / double(pieces.size());
        for (const auto &p : pieces) {
            detail::form4 part;
            if (!p.arc) {
                const cplx d = p.b - p.a;
                part = detail::gauss_adaptive4(
                    [&](double t) {
                        detail::form4 v = forms_at(p.a + t * d);
                        for (auto &c : v) {
                            c *= d;
                        }
                        return v;
                    },
                    0.0, 1.0, piece_tol, 0, 24);
            } else {
                const double dt = p.t1 - p.t0;
                part = detail::gauss_adaptive4(
                    [&](double s) {
                        const cplx e = std::polar(p.r, p.t0 + s * dt);
                        detail::form4 v = forms_at(p.center + e);
                        const cplx dz = cplx(0, 1) * e * dt;
                        for (auto &c : v) {
                            c *= dz;
                        }
                        return v;
                    },
                    0.0, 1.0, piece_tol, 0, 24);
            }
            for (int k = 0; k < 4; ++k) {
                acc[k] += part[k];
            }
        }
        return acc;
    }

    /// Ambient displacement 2 Re Int over [z0, z1].
    coords4 delta(cplx z0, cplx z1) const
    {
        const detail::form4 v = integrate(z0, z1);
        return {2.0 * v[0].real(), 2.0 * v[1].real(), 2.0 * v[2].real(), 2.0 * v[3].real()};
    }

    /// Ambient coordinates of z, integrated from the base point.
    coords4 at(cplx z) const { return delta(base_, z); }

    /// Same with an explicit base point.
    coords4 at(cplx z, cplx from) const { return delta(from, z); }

    /// Displacement around the translation loop z -> z + omega_cycle; all four
    /// components vanish exactly when the closing conditions hold.
    coords4 loop_delta(int cycle) const
    {
        const cplx w = (cycle == 1) ? tm_.omega1() : tm_.omega2();
        return delta(base_, base_ + w);
    }

private:
    void check_endpoint(cplx z) const
    {
        if (std::abs(tm_.reduce(z)) < puncture_ * (1.0 - 1e-9)) {
            throw error(errc::path_through_pole, "path endpoint inside the puncture disk");
        }
    }

    data_eval ev_;
    torus_map tm_;
    double tol_;
    cplx base_{};
    double puncture_ = 0;
};

/// One-off evaluation of the representation map at z (base defaults to the
/// half-period omega1/2).
inline coords4 immerse(const w_data &d, cplx z, std::optional<cplx> base = {}, double tol = 1e-9)
{
    immersion im(d, tol);
    return base ? im.at(z, *base) : im.at(z);
}

/// Largest component of either translation-loop displacement; vanishes (to
/// quadrature accuracy) exactly when the datum satisfies the period
/// conditions.
inline double closed_loop_residual(const w_data &d, double tol = 1e-10)
{
    immersion im(d, tol);
    return std::max(detail::c4_max(im.loop_delta(1)), detail::c4_max(im.loop_delta(2)));
}

struct mesh_vertex
{
    cplx z{};
    coords4 X{};
    bool valid = false;
};

/// Sampled immersion over one fundamental cell. Vertices sit on the corner
/// grid z = (i/n) omega1 + (j/n) omega2 (so grids at n and 2n share points);
/// vertices inside the puncture disk around a lattice point are flagged
/// invalid and take part in no face. Faces are the grid quads with four
/// valid corners, listed counterclockwise.
struct surface_mesh
{
    int n = 0;
    cplx omega1{}, omega2{};
    double puncture_radius = 0;
    std::vector<mesh_vertex> vertices;        // i + n*j
    std::vector<std::array<int, 4>> faces;

    int index(int i, int j) const { return i + n * j; }
};

/// Integrate the immersion over the corner grid: one anchor evaluation from
/// the base point, then incremental displacements along grid edges (skipped
/// vertices are bridged by one longer edge, which detours the pole disk).
/// `tol` is the accumulated-drift budget for a whole chain of edges.
inline surface_mesh sample_mesh(const w_data &d, int n, double puncture_radius = -1.0, double tol = 1e-9)
{
    if (n < 16) {
        throw error(errc::domain_error, "mesh resolution below 16");
    }
    immersion im(d, tol / double(2 * n));
    const torus_map &tm = im.torus();
    surface_mesh m;
    m.n = n;
    m.omega1 = tm.omega1();
    m.omega2 = tm.omega2();
    m.puncture_radius = puncture_radius > 0 ? puncture_radius : im.puncture_radius();
    if (m.puncture_radius >= 0.45 * tm.lattice_scale()) {
        throw error(errc::domain_error, "puncture radius too large for the lattice");
    }
    m.vertices.resize(std::size_t(n) * std::size_t(n));

    auto grid_z = [&](int i, int j) {
        return (double(i) / n) * m.omega1 + (double(j) / n) * m.omega2;
    };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            mesh_vertex &v = m.vertices[std::size_t(m.index(i, j))];
            v.z = grid_z(i, j);
            v.valid = std::abs(tm.reduce(v.z)) >= m.puncture_radius;
        }
    }

    // Anchor at the cell center (a half-period, never near the puncture).
    const int ic = n / 2, jc = n / 2;
    {
        mesh_vertex &anchor = m.vertices[std::size_t(m.index(ic, jc))];
        anchor.X = im.at(anchor.z);
    }
    // Fill the anchor row, then every column from that row, bridging gaps.
    auto chain = [&](int fixed, bool row, int from, int step) {
        int prev = from;
        for (int k = from + step; k >= 0 && k < n; k += step) {
            const int idx = row ? m.index(k, fixed) : m.index(fixed, k);
            const int pidx = row ? m.index(prev, fixed) : m.index(fixed, prev);
            mesh_vertex &v = m.vertices[std::size_t(idx)];
            if (!v.valid) {
                continue;
            }
            const mesh_vertex &p = m.vertices[std::size_t(pidx)];
            v.X = detail::c4_add(p.X, im.delta(p.z, v.z));
            prev = k;
        }
    };
    chain(jc, true, ic, +1);
    chain(jc, true, ic, -1);
    for (int i = 0; i < n; ++i) {
        if (!m.vertices[std::size_t(m.index(i, jc))].valid) {
            continue; // cannot happen for admissible punctures, kept for safety
        }
        chain(i, false, jc, +1);
        chain(i, false, jc, -1);
    }

    for (int j = 0; j + 1 < n; ++j) {
        for (int i = 0; i + 1 < n; ++i) {
            const std::array<int, 4> q = {m.index(i, j), m.index(i + 1, j), m.index(i + 1, j + 1),
                                          m.index(i, j + 1)};
            if (m.vertices[std::size_t(q[0])].valid && m.vertices[std::size_t(q[1])].valid
                && m.vertices[std::size_t(q[2])].valid && m.vertices[std::size_t(q[3])].valid) {
                m.faces.push_back(q);
            }
        }
    }
    return m;
}

/// Degree of the first sphere-valued function together with a discrete
/// estimate of the total absolute curvature (the Laplacian of half the log
/// metric density, summed over the punctured cell).
struct curvature_report
{
    int deg_phi = 0;
    double integral_estimate = 0;
};

namespace detail
{

/// Preimages of phi = w on the curve, for data whose first function has the
/// shape (x - x0) / (b (y - y0) + c (x - x0)) (or the x-only shape of the
/// two-function family). Returns the number of distinct curve points.
inline int phi_preimage_count(const data_eval &ev, cplx w)
{
    const cplx lam = ev.lambda();
    cplx x0c(0, 0), y0c(0, 0), u;
    if (const auto *c1 = std::get_if<case1_params>(&ev.data())) {
        x0c = ev.x0();
        y0c = c1->y0;
        const cplx den = c1->b * w;
        if (std::abs(den) < 1e-14) {
            throw error(errc::domain_error, "degree probe hit a degenerate target");
        }
        u = (1.0 - c1->c * w) / den;
    } else if (const auto *dm = std::get_if<deformed_r3>(&ev.data())) {
        const cplx den = dm->rho * dm->zeta * w;
        if (std::abs(den) < 1e-14) {
            throw error(errc::domain_error, "degree probe hit a degenerate target");
        }
        u = 1.0 / den;
    } else {
        // x-only first function 1/(a(x - x0)): one x preimage on two sheets.
        const auto &c2 = std::get<case2_params>(ev.data());
        const cplx x = c2.x0 + 1.0 / (c2.a * w);
        const cplx q = x * (x - 1.0) * (x - lam);
        return std::abs(q) < 1e-12 ? 1 : 2;
    }
    // Substituting y = y0 + u (x - x0) into y^2 = x(x-1)(x-lambda) gives a
    // cubic in x; the curve point (x0, y0) is always a (spurious) root.
    const cplx c2 = -(lam + 1.0 + u * u);
    const cplx c1 = lam + 2.0 * u * u * x0c - 2.0 * y0c * u;
    const cplx c0 = -(u * u * x0c * x0c - 2.0 * y0c * u * x0c + y0c * y0c);
    Eigen::Matrix3cd comp = Eigen::Matrix3cd::Zero();
    comp(0, 2) = -c0;
    comp(1, 2) = -c1;
    comp(2, 2) = -c2;
    comp(1, 0) = 1.0;
    comp(2, 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(comp, false);
    std::vector<std::pair<cplx, cplx>> pts;
    for (int k = 0; k < 3; ++k) {
        const cplx x = es.eigenvalues()(k);
        const cplx y = y0c + u * (x - x0c);
        const cplx res = y * y - x * (x - 1.0) * (x - lam);
        if (std::abs(res) > 1e-6 * (1.0 + std::abs(x) * std::abs(x) * std::abs(x))) {
            continue;
        }
        if (std::abs(x - x0c) < 1e-7 && std::abs(y - y0c) < 1e-7) {
            continue; // the removable point of the ratio, not a preimage
        }
        bool dup = false;
        for (const auto &p : pts) {
            if (std::abs(p.first - x) < 1e-7 && std::abs(p.second - y) < 1e-7) {
                dup = true;
            }
        }
        if (!dup) {
            pts.emplace_back(x, y);
        }
    }
    return int(pts.size());
}

} // namespace detail

/// Count preimages of three seeded generic sphere targets (they must agree,
/// otherwise DegreeAmbiguous) and integrate the curvature density over the
/// punctured cell by a five-point Laplacian of half the log metric density.
inline curvature_report total_curvature(const w_data &d, int grid_n = 48, double tol = 1e-11,
                                        std::uint64_t seed = 12345)
{
    const data_eval ev(d);
    const torus_map tm(ev.lambda(), tol);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> rad(0.4, 1.4), ang(0.0, 2.0 * detail::pi_c);
    curvature_report rep;
    int counts[3];
    for (int t = 0; t < 3; ++t) {
        const cplx w = std::polar(rad(rng), ang(rng));
        counts[t] = detail::phi_preimage_count(ev, w);
    }
    if (counts[0] != counts[1] || counts[1] != counts[2]) {
        throw error(errc::degree_ambiguous, "sphere-target preimage counts disagree");
    }
    rep.deg_phi = counts[0];

    const cplx w1 = tm.omega1(), w2 = tm.omega2();
    const double puncture = 0.02 * std::abs(w1);
    const double h = 1e-3 * std::abs(w1);
    const double cell_area = std::abs((std::conj(w1) * w2).imag()) / double(grid_n * grid_n);
    auto logdens = [&](cplx z) { return std::log(ev.metric_density(tm.map(z))); };
    double acc = 0.0;
    for (int j = 0; j < grid_n; ++j) {
        for (int i = 0; i < grid_n; ++i) {
            const cplx z = ((i + 0.5) / grid_n) * w1 + ((j + 0.5) / grid_n) * w2;
            if (std::abs(tm.reduce(z)) < puncture) {
                continue;
            }
            const double lap = (logdens(z + h) + logdens(z - h) + logdens(z + cplx(0, h))
                                + logdens(z - cplx(0, h)) - 4.0 * logdens(z))
                               / (h * h);
            acc += 0.5 * lap;
        }
    }
    rep.integral_estimate = acc * cell_area;
    return rep;
}

/// A transversal double point of the immersion: the two torus parameters
/// (negatives of each other modulo the lattice), the common image, and the
/// disagreement between the two image evaluations.
struct intersection_point
{
    cplx z_plus{}, z_minus{};
    coords4 X{};
    double residual = 0;
};

namespace detail
{

/// Incrementally integrated grid of ambient values over the centered cell,
/// on the offset lattice z = ((i+1/2)/n - 1/2) w1 + ((j+1/2)/n - 1/2) w2, so
/// that the lattice axes run through cell interiors rather than along cell
/// edges. Points inside the puncture disk are flagged invalid.
struct scan_grid
{
    int n = 0;
    std::vector<cplx> z;
    std::vector<coords4> X;
    std::vector<char> valid;

    int index(int i, int j) const { return i + n * j; }
};

inline scan_grid scan_values(const immersion &im, int n)
{
    const torus_map &tm = im.torus();
    scan_grid g;
    g.n = n;
    g.z.resize(std::size_t(n) * std::size_t(n));
    g.X.resize(g.z.size());
    g.valid.resize(g.z.size());
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double ui = (i + 0.5) / n - 0.5, uj = (j + 0.5) / n - 0.5;
            const std::size_t k = std::size_t(g.index(i, j));
            g.z[k] = ui * tm.omega1() + uj * tm.omega2();
            g.valid[k] = std::abs(tm.reduce(g.z[k])) >= im.puncture_radius() ? 1 : 0;
        }
    }
    g.X[std::size_t(g.index(0, 0))] = im.at(g.z[std::size_t(g.index(0, 0))]);
    auto chain = [&](int fixed, bool row) {
        int prev = 0;
        for (int k = 1; k < n; ++k) {
            const std::size_t idx = std::size_t(row ? g.index(k, fixed) : g.index(fixed, k));
            if (!g.valid[idx]) {
                continue;
            }
            const std::size_t pidx = std::size_t(row ? g.index(prev, fixed) : g.index(fixed, prev));
            g.X[idx] = c4_add(g.X[pidx], im.delta(g.z[pidx], g.z[idx]));
            prev = k;
        }
    };
    chain(0, true);
    for (int i = 0; i < n; ++i) {
        chain(i, false);
    }
    return g;
}

} // namespace detail

/// Locate the self-intersections of the deformed family member at
/// zeta = exp(i theta). The first two coordinates are odd under z -> -z
/// while the last two are even, so double points are the pairs (z, -z) with
/// X1(z) = X2(z) = 0 and 2z not a lattice point. A sign-change scan over an
/// offset grid seeds a two-variable Newton polish.
inline std::vector<intersection_point> find_self_intersections(double theta, double tol = 1e-10,
                                                               int scan_n = 48)
{
    if (!(theta >= 0.0 && theta < 0.5 * detail::pi_c)) {
        throw error(errc::domain_error, "deformation angle outside [0, pi/2)");
    }
    const deformed_r3 dd{cg_rho_gamma(), cplx(-1, 0), std::polar(1.0, theta)};
    const w_data d = dd;
    immersion im(d, std::min(tol, 1e-10));
    const torus_map &tm = im.torus();
    const double scale = std::abs(tm.omega1());

    const detail::scan_grid grid = detail::scan_values(im, scan_n);

    // Newton candidates: cell centers where both X1 and X2 change sign.
    std::vector<cplx> starts;
    for (int j = 0; j + 1 < scan_n; ++j) {
        for (int i = 0; i + 1 < scan_n; ++i) {
            const std::size_t q[4] = {std::size_t(grid.index(i, j)), std::size_t(grid.index(i + 1, j)),
                                      std::size_t(grid.index(i + 1, j + 1)),
                                      std::size_t(grid.index(i, j + 1))};
            bool all_valid = true;
            bool pos1 = false, neg1 = false, pos2 = false, neg2 = false;
            for (std::size_t k : q) {
                all_valid = all_valid && grid.valid[k] != 0;
                (grid.X[k][0] > 0 ? pos1 : neg1) = true;
                (grid.X[k][1] > 0 ? pos2 : neg2) = true;
            }
            if (all_valid && pos1 && neg1 && pos2 && neg2) {
                starts.push_back(0.25 * (grid.z[q[0]] + grid.z[q[1]] + grid.z[q[2]] + grid.z[q[3]]));
            }
        }
    }
    if (starts.empty()) {
        throw error(errc::search_inconclusive, "no sign-change cells in the intersection scan");
    }

    std::vector<cplx> roots;
    for (cplx z : starts) {
        bool ok = false;
        for (int it = 0; it < 40; ++it) {
            const coords4 X = im.at(z);
            if (std::max(std::abs(X[0]), std::abs(X[1])) <= tol) {
                ok = true;
                break;
            }
            const detail::form4 th = im.forms_at(z);
            const double a11 = 2.0 * th[0].real(), a12 = -2.0 * th[0].imag();
            const double a21 = 2.0 * th[1].real(), a22 = -2.0 * th[1].imag();
            const double det = a11 * a22 - a12 * a21;
            if (std::abs(det) < 1e-14) {
                break;
            }
            double dx = (-X[0] * a22 + X[1] * a12) / det;
            double dy = (-X[1] * a11 + X[0] * a21) / det;
            const double step = std::hypot(dx, dy), cap = 0.2 * scale;
            if (step > cap) {
                dx *= cap / step;
                dy *= cap / step;
            }
            z += cplx(dx, dy);
            if (std::abs(tm.reduce(z)) < im.puncture_radius() * 1.05) {
                break; // wandered into the puncture disk
            }
        }
        if (!ok) {
            continue;
        }
        const cplx zr = tm.reduce(z);
        if (std::abs(tm.reduce(2.0 * zr)) < 1e-5 * scale) {
            continue; // fixed point of the symmetry, not a double point
        }
        // Canonical representative of the pair {z, -z}: larger imaginary
        // part, ties (roots on the real axis) broken toward positive real.
        cplx rep = zr;
        const cplx alt = tm.reduce(-zr);
        const double tie = 1e-8 * scale;
        if (alt.imag() > rep.imag() + tie
            || (std::abs(alt.imag() - rep.imag()) <= tie && alt.real() > rep.real() + tie)) {
            rep = alt;
        }
        bool dup = false;
        for (const cplx &r : roots) {
            if (std::abs(r - rep) < 1e-6 * scale || std::abs(tm.reduce(r + rep)) < 1e-6 * scale) {
                dup = true; // same point, or the partner of a recorded pair
            }
        }
        if (!dup) {
            roots.push_back(rep);
        }
    }
    if (roots.empty()) {
        throw error(errc::search_inconclusive, "no intersection candidate survived polishing");
    }
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });

    std::vector<intersection_point> out;
    for (const cplx &z : roots) {
        intersection_point p;
        p.z_plus = z;
        p.z_minus = tm.reduce(-z);
        const coords4 Xp = im.at(p.z_plus), Xm = im.at(p.z_minus);
        p.X = Xp;
        p.residual = detail::c4_max(detail::c4_sub(Xp, Xm));
        out.push_back(p);
    }
    return out;
}

/// Deviation of the immersion from each of the eight parameter symmetries
/// realized as ambient isometries (the dihedral symmetries of the square
/// lattice at lambda = -1): for each pair (z-map, 4x4 isometry) a translation
/// is fitted at one probe point and the worst grid deviation is reported.
struct symmetry_report
{
    std::array<double, 8> per_element{};
    double max_deviation = 0;
};

inline symmetry_report symmetry_check(const w_data &d, int n = 12, double tol = 1e-9)
{
    immersion im(d, tol);
    const torus_map &tm = im.torus();
    const cplx w1 = tm.omega1(), w2 = tm.omega2();

    using zmap = cplx (*)(cplx);
    struct element
    {
        zmap g;
        std::array<std::array<double, 4>, 4> M;
    };
    static const std::array<element, 8> elements = {{
        {[](cplx z) { return z; }, {{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}}},
        {[](cplx z) { return -z; }, {{{-1, 0, 0, 0}, {0, -1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}}},
        {[](cplx z) { return std::conj(z); }, {{{1, 0, 0, 0}, {0, -1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, -1}}}},
        {[](cplx z) { return -std::conj(z); }, {{{-1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, -1}}}},
        {[](cplx z) { return cplx(0, 1) * std::conj(z); },
         {{{0, -1, 0, 0}, {-1, 0, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, 1}}}},
        {[](cplx z) { return cplx(0, -1) * std::conj(z); },
         {{{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, 1}}}},
        {[](cplx z) { return cplx(0, 1) * z; },
         {{{0, 1, 0, 0}, {-1, 0, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}}}},
        {[](cplx z) { return cplx(0, -1) * z; },
         {{{0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}}}},
    }};

    auto apply = [](const std::array<std::array<double, 4>, 4> &M, const coords4 &x) {
        coords4 y{};
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                y[r] += M[r][c] * x[c];
            }
        }
        return y;
    };

    // Grid values of X, reused across all elements.
    std::vector<cplx> zs;
    std::vector<coords4> Xs;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const cplx z = ((i + 0.5) / n) * w1 + ((j + 0.5) / n) * w2;
            if (std::abs(tm.reduce(z)) < im.puncture_radius()) {
                continue;
            }
            zs.push_back(z);
            Xs.push_back(im.at(z));
        }
    }
    const cplx probe = 0.27 * w1 + 0.19 * w2;
    const coords4 Xprobe = im.at(probe);

    symmetry_report rep;
    for (std::size_t e = 0; e < elements.size(); ++e) {
        const auto &el = elements[e];
        const coords4 t = detail::c4_sub(im.at(el.g(probe)), apply(el.M, Xprobe));
        double worst = 0.0;
        for (std::size_t k = 0; k < zs.size(); ++k) {
            const cplx gz = el.g(zs[k]);
            if (std::abs(tm.reduce(gz)) < im.puncture_radius()) {
                continue;
            }
            const coords4 want = detail::c4_add(apply(el.M, Xs[k]), t);
            worst = std::max(worst, detail::c4_max(detail::c4_sub(im.at(gz), want)));
        }
        rep.per_element[e] = worst;
        rep.max_deviation = std::max(rep.max_deviation, worst);
    }
    return rep;
}

/// Residual of the sheet-swap pullback identity: under (x, y) -> (x, -y)
/// each component form must pull back to its negative, i.e. the
/// dz-coefficients must be invariant. Exactly satisfied when every
/// coefficient depends on x alone. Also reports the finite fixed points of
/// the involution (the three branch points).
struct involution_report
{
    double max_residual = 0;
    std::array<curve_pt, 3> fixed_points{};
};

inline involution_report involution_pullback_check(const w_data &d, int n = 50, std::uint64_t seed = 12345)
{
    const data_eval ev(d);
    const torus_map tm(ev.lambda());
    involution_report rep;
    rep.fixed_points = {curve_pt{cplx(0, 0), cplx(0, 0), false}, curve_pt{cplx(1, 0), cplx(0, 0), false},
                        curve_pt{ev.lambda(), cplx(0, 0), false}};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.05, 0.95);
    int taken = 0;
    while (taken < n) {
        const cplx z = uni(rng) * tm.omega1() + uni(rng) * tm.omega2();
        if (std::abs(tm.reduce(z)) < 0.05 * tm.lattice_scale()) {
            continue;
        }
        const curve_pt p = tm.map(z);
        const form_values f = ev.forms(p);
        const form_values g = ev.forms(curve_pt{p.x, -p.y, false});
        const cplx diffs[4] = {f.phi_dh - g.phi_dh, f.psi_dh - g.psi_dh, f.dh - g.dh,
                               f.phi_psi_dh - g.phi_psi_dh};
        const cplx vals[4] = {f.phi_dh, f.psi_dh, f.dh, f.phi_psi_dh};
        for (int k = 0; k < 4; ++k) {
            rep.max_residual = std::max(rep.max_residual, std::abs(diffs[k]) / std::max(1.0, std::abs(vals[k])));
        }
        ++taken;
    }
    return rep;
}

/// Mesh export: OBJ (projected three-coordinates, quad faces) or CSV (all
/// four coordinates plus the parameter). Numbers print with the shortest
/// representation that round-trips.
enum class mesh_format
{
    obj,
    csv,
};

struct mesh_projection
{
    std::array<std::array<double, 4>, 3> rows{};

    static mesh_projection drop_x4()
    {
        return {{{{{1, 0, 0, 0}}, {{0, 1, 0, 0}}, {{0, 0, 1, 0}}}}};
    }
    static mesh_projection drop_x3()
    {
        return {{{{{1, 0, 0, 0}}, {{0, 1, 0, 0}}, {{0, 0, 0, 1}}}}};
    }
};

namespace detail
{

inline void append_number(std::string &s, double v)
{
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    s.append(buf, r.ptr);
}

} // namespace detail

inline void export_mesh(const surface_mesh &m, std::ostream &os, mesh_format fmt,
                        const mesh_projection &proj = mesh_projection::drop_x4())
{
    std::string out;
    if (fmt == mesh_format::obj) {
        std::vector<int> remap(m.vertices.size(), 0);
        int next = 1;
        for (std::size_t k = 0; k < m.vertices.size(); ++k) {
            const mesh_vertex &v = m.vertices[k];
            if (!v.valid) {
                continue;
            }
            remap[k] = next++;
            out += "v";
            for (int r = 0; r < 3; ++r) {
                double c = 0;
                for (int j = 0; j < 4; ++j) {
                    c += proj.rows[r][j] * v.X[j];
                }
                out += ' ';
                detail::append_number(out, c);
            }
            out += '\n';
        }
        for (const auto &f : m.faces) {
            out += "f";
            for (int idx : f) {
                out += ' ';
                out += std::to_string(remap[std::size_t(idx)]);
            }
            out += '\n';
        }
    } else {
        out += "re_z,im_z,x1,x2,x3,x4\n";
        for (const mesh_vertex &v : m.vertices) {
            if (!v.valid) {
                continue;
            }
            detail::append_number(out, v.z.real());
            out += ',';
            detail::append_number(out, v.z.imag());
            for (double c : v.X) {
                out += ',';
                detail::append_number(out, c);
            }
            out += '\n';
        }
    }
    os.write(out.data(), std::streamsize(out.size()));
    if (!os) {
        throw error(errc::io_error, "mesh export stream write failed");
    }
}

inline void export_mesh_file(const surface_mesh &m, const std::string &path, mesh_format fmt,
                             const mesh_projection &proj = mesh_projection::drop_x4())
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw error(errc::io_error, "cannot open mesh export file: " + path);
    }
    export_mesh(m, os, fmt, proj);
}

} // namespace scg
