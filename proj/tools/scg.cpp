// Command-line driver. Every pipeline in the library is exposed as a
// subcommand with machine-readable output: JSON documents on stdout (or at
// --out), OBJ/CSV for meshes. Identical argv and seed give byte-identical
// output. Exit codes: 0 success, 1 usage error, 2 numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <scg/elliptic.hpp>
#include <scg/errors.hpp>
#include <scg/report.hpp>
#include <scg/solver.hpp>
#include <scg/surface.hpp>
#include <scg/wdata.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

namespace
{

using ojson = nlohmann::ordered_json;
using scg::cplx;

struct run_config
{
    std::string lambda_text = "-1";
    double tol = 1e-10;
    int grid = 64;
    bool grid_set = false;
    double theta = scg::detail::pi_c / 4.0;
    bool theta_set = false;
    int steps = 10;
    double step_size = 0.02;
    std::uint64_t seed = 12345;
    std::string out;
    std::string format = "json";
};

struct usage_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Accepts "RE" or "RE,IM" with nothing left over.
cplx parse_complex(const std::string &text, const char *flag)
{
    try {
        std::size_t pos = 0;
        const double re = std::stod(text, &pos);
        double im = 0;
        if (pos < text.size()) {
            if (text[pos] != ',') {
                throw usage_error(std::string(flag) + ": expected RE or RE,IM, got '" + text + "'");
            }
            std::size_t pos2 = 0;
            const std::string rest = text.substr(pos + 1);
            im = std::stod(rest, &pos2);
            if (pos2 != rest.size()) {
                throw usage_error(std::string(flag) + ": trailing characters in '" + text + "'");
            }
        }
        return {re, im};
    } catch (const std::logic_error &) {
        throw usage_error(std::string(flag) + ": cannot parse '" + text + "' as RE[,IM]");
    }
}

ojson jc(cplx z)
{
    return ojson::array({z.real(), z.imag()});
}

ojson jc4(const scg::coords4 &x)
{
    return ojson::array({x[0], x[1], x[2], x[3]});
}

ojson jvec(const scg::param_vec &v)
{
    ojson a = ojson::array();
    for (int i = 0; i < v.size(); ++i) {
        a.push_back(v(i));
    }
    return a;
}

ojson jmat(const scg::jac_mat &J)
{
    ojson rows = ojson::array();
    for (int i = 0; i < J.rows(); ++i) {
        ojson row = ojson::array();
        for (int j = 0; j < J.cols(); ++j) {
            row.push_back(J(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void emit_json(const ojson &doc, const std::string &out)
{
    const std::string text = doc.dump(2) + "\n";
    if (out.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) {
        throw scg::error(scg::errc::io_error, "cannot open output file " + out);
    }
    f << text;
    if (!f) {
        throw scg::error(scg::errc::io_error, "write failed for " + out);
    }
}

/// The datum a surface subcommand works on: the distinguished first-case
/// datum by default, or the unit-circle family member when --theta is given.
scg::w_data surface_datum(const run_config &cfg)
{
    if (cfg.theta_set) {
        return scg::deformed_r3{scg::cg_rho_gamma(), cplx(-1, 0), std::polar(1.0, cfg.theta)};
    }
    return scg::vstar();
}

int run_periods(const run_config &cfg)
{
    const cplx lam = parse_complex(cfg.lambda_text, "--lambda");
    const auto P = scg::periods(lam, cfg.tol);
    ojson doc;
    doc["lambda"] = jc(lam);
    doc["omega1"] = jc(P.omega1);
    doc["omega2"] = jc(P.omega2);
    doc["phi1"] = jc(P.phi1);
    doc["phi2"] = jc(P.phi2);
    doc["legendre_residual"] = std::abs(scg::bilinear_residual(lam, cfg.tol));
    emit_json(doc, cfg.out);
    return 0;
}

int run_weber_root(const run_config &cfg)
{
    const cplx start = parse_complex(cfg.lambda_text, "--lambda");
    const double tol = std::min(cfg.tol, 1e-12);
    const cplx root = scg::weber_root(start, tol);
    ojson doc;
    doc["start"] = jc(start);
    doc["root"] = jc(root);
    doc["residual"] = std::abs(scg::conjugate_ratio_residual(root, cfg.tol));
    emit_json(doc, cfg.out);
    return 0;
}

int run_rho(const run_config &cfg)
{
    const auto routes = scg::cg_rho(cfg.tol);
    ojson doc;
    doc["rho_gamma"] = routes.gamma_route;
    doc["rho_period"] = routes.period_route;
    emit_json(doc, cfg.out);
    return 0;
}

int run_verify_cg(const run_config &cfg)
{
    const int grid = cfg.grid_set ? cfg.grid : 48;
    const double inner = std::min(cfg.tol, 1e-11);
    const double margin = scg::regularity_margin(scg::vstar(), grid, inner);
    const auto curv = scg::total_curvature(scg::vstar(), grid, inner, cfg.seed);
    ojson doc;
    doc["period_residual"] = scg::period_map(scg::vstar_vec(), inner).lpNorm<Eigen::Infinity>();
    doc["regularity_margin"] = margin;
    doc["margin_deviation"] = std::abs(margin - scg::detail::pi_c / 2.0);
    doc["loop_residual"] = scg::closed_loop_residual(scg::vstar(), cfg.tol);
    doc["first_form_degree"] = curv.deg_phi;
    doc["curvature_integral"] = curv.integral_estimate;
    doc["curvature_target"] = 8.0 * scg::detail::pi_c;
    doc["symmetry_max_deviation"] = scg::symmetry_check(scg::vstar(), 12, cfg.tol).max_deviation;
    emit_json(doc, cfg.out);
    return 0;
}

int run_deform(const run_config &cfg)
{
    const scg::deformed_r3 dd{scg::cg_rho_gamma(), cplx(-1, 0), std::polar(1.0, cfg.theta)};
    const auto norm = scg::normalize_lorentz(dd);
    const int grid = cfg.grid_set ? cfg.grid : 48;
    ojson doc;
    doc["theta"] = cfg.theta;
    doc["zeta"] = jc(dd.zeta);
    doc["rho"] = dd.rho;
    doc["lambda"] = jc(dd.lambda);
    doc["loop_residual"] = scg::closed_loop_residual(dd, cfg.tol);
    doc["regularity_margin"] = scg::regularity_margin(dd, grid, std::min(cfg.tol, 1e-11));
    doc["normalized_zeta"] = jc(norm.data.zeta);
    doc["time_scale"] = norm.t;
    emit_json(doc, cfg.out);
    return 0;
}

int run_jacobian(const run_config &cfg)
{
    const double tol = std::min(cfg.tol, 1e-12);
    const auto an = scg::jacobian(scg::vstar_vec(), scg::jac_mode::analytic_at_vstar, tol);
    const auto fd = scg::jacobian(scg::vstar_vec(), scg::jac_mode::finite_difference, tol);
    double worst = 0;
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 12; ++j) {
            worst = std::max(worst, std::abs(an.J(i, j) - fd.J(i, j)));
        }
    }
    ojson doc;
    ojson sig = ojson::array();
    for (int i = 0; i < 8; ++i) {
        sig.push_back(an.sigma(i));
    }
    doc["sigma"] = std::move(sig);
    doc["sigma_ratio"] = an.sigma(7) / an.sigma(0);
    doc["max_entry_difference"] = worst;
    doc["analytic"] = jmat(an.J);
    emit_json(doc, cfg.out);
    return 0;
}

int run_inequality(const run_config &cfg)
{
    const auto iq = scg::inequality_check(std::min(cfg.tol, 1e-11));
    ojson doc;
    doc["C1"] = iq.C1;
    doc["C2"] = iq.C2;
    doc["D1"] = iq.D1;
    doc["D2"] = iq.D2;
    doc["e1"] = iq.e1;
    doc["e2"] = iq.e2;
    doc["f1"] = iq.f1;
    doc["f2"] = iq.f2;
    doc["lhs"] = iq.lhs;
    doc["rhs"] = iq.rhs;
    doc["margin"] = iq.margin;
    emit_json(doc, cfg.out);
    return 0;
}

int run_solve(const run_config &cfg)
{
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    scg::param_vec start = scg::vstar_vec();
    for (int i = 0; i < start.size(); ++i) {
        start(i) += 1e-3 * uni(rng);
    }
    const double r0 = scg::period_map(start, std::min(cfg.tol, 1e-11)).lpNorm<Eigen::Infinity>();
    const scg::param_vec v = scg::correct(start, cfg.tol);
    const double r1 = scg::period_map(v, std::min(cfg.tol, 1e-11)).lpNorm<Eigen::Infinity>();
    ojson doc;
    doc["seed"] = cfg.seed;
    doc["start_residual"] = r0;
    doc["corrected_residual"] = r1;
    doc["distance_moved"] = (v - start).norm();
    doc["v"] = jvec(v);
    emit_json(doc, cfg.out);
    return 0;
}

int run_trace(const run_config &cfg)
{
    const auto an = scg::jacobian(scg::vstar_vec(), scg::jac_mode::analytic_at_vstar);
    const auto dirs = scg::kernel_directions(an.J);
    const int margin_grid = cfg.grid_set ? cfg.grid : 32;
    const auto fams = scg::trace_family(dirs, cfg.steps, cfg.step_size, cfg.tol, margin_grid);
    ojson doc;
    doc["steps"] = cfg.steps;
    doc["step_size"] = cfg.step_size;
    ojson families = ojson::array();
    for (const auto &fam : fams) {
        ojson nodes = ojson::array();
        for (const auto &nd : fam) {
            ojson n;
            n["v"] = jvec(nd.v);
            n["residual"] = nd.residual;
            n["sigma8"] = nd.sigma8;
            n["sigma_ratio"] = nd.sigma_ratio;
            n["margin"] = nd.margin;
            n["product_variance"] = nd.phi_psi_var;
            nodes.push_back(std::move(n));
        }
        families.push_back(std::move(nodes));
    }
    doc["families"] = std::move(families);
    emit_json(doc, cfg.out);
    return 0;
}

int run_case2_scan(const run_config &cfg)
{
    const auto ob = scg::square_torus_obstruction(std::min(cfg.tol, 1e-11));
    const int n = cfg.grid_set ? cfg.grid : 20;
    double worst_vertical = 0, min_horizontal = 1e300;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            scg::case2_params p;
            p.a = std::polar(1.0, 2.0 * scg::detail::pi_c * i / n);
            p.b = std::polar(1.0, 2.0 * scg::detail::pi_c * j / n);
            p.c = ob.k * std::conj(p.b);
            p.x0 = -ob.k * std::conj(p.a) / p.a;
            p.lambda = cplx(-1, 0);
            const auto res = scg::case2_residual(p, std::min(cfg.tol, 1e-11));
            worst_vertical = std::max(worst_vertical, res.head<4>().lpNorm<Eigen::Infinity>());
            const double h1 = std::hypot(res(4), res(6));
            const double h2 = std::hypot(res(5), res(7));
            min_horizontal = std::min(min_horizontal, std::max(h1, h2));
        }
    }
    ojson doc;
    doc["k"] = ob.k;
    doc["rho_fourth"] = ob.rho_fourth;
    doc["gap"] = ob.gap;
    doc["bound_coeff"] = ob.bound_coeff;
    doc["scan_n"] = n;
    doc["worst_vertical_residual"] = worst_vertical;
    doc["min_horizontal_residual"] = min_horizontal;
    doc["bounded_below"] = min_horizontal >= ob.bound_coeff * (1.0 - 1e-6) - 1e-8;
    emit_json(doc, cfg.out);
    return 0;
}

int run_mesh(const run_config &cfg)
{
    const auto m = scg::sample_mesh(surface_datum(cfg), cfg.grid, -1.0, cfg.tol);
    if (cfg.format == "obj" || cfg.format == "csv") {
        const auto fmt = cfg.format == "obj" ? scg::mesh_format::obj : scg::mesh_format::csv;
        if (cfg.out.empty()) {
            scg::export_mesh(m, std::cout, fmt);
        } else {
            scg::export_mesh_file(m, cfg.out, fmt);
        }
        return 0;
    }
    std::vector<int> remap(m.vertices.size(), -1);
    ojson verts = ojson::array();
    int nv = 0;
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        const auto &vx = m.vertices[i];
        if (!vx.valid) {
            continue;
        }
        remap[i] = nv++;
        verts.push_back(ojson::array(
            {vx.z.real(), vx.z.imag(), vx.X[0], vx.X[1], vx.X[2], vx.X[3]}));
    }
    ojson faces = ojson::array();
    for (const auto &f : m.faces) {
        faces.push_back(ojson::array({remap[f[0]], remap[f[1]], remap[f[2]], remap[f[3]]}));
    }
    ojson doc;
    doc["n"] = m.n;
    doc["omega1"] = jc(m.omega1);
    doc["omega2"] = jc(m.omega2);
    doc["puncture_radius"] = m.puncture_radius;
    doc["vertices"] = std::move(verts);
    doc["faces"] = std::move(faces);
    emit_json(doc, cfg.out);
    return 0;
}

int run_selfint(const run_config &cfg)
{
    const int scan_n = cfg.grid_set ? cfg.grid : 48;
    const auto pts = scg::find_self_intersections(cfg.theta, cfg.tol, scan_n);
    ojson doc;
    doc["theta"] = cfg.theta;
    doc["count"] = pts.size();
    ojson arr = ojson::array();
    for (const auto &p : pts) {
        ojson e;
        e["z_plus"] = jc(p.z_plus);
        e["z_minus"] = jc(p.z_minus);
        e["position"] = jc4(p.X);
        e["residual"] = p.residual;
        arr.push_back(std::move(e));
    }
    doc["points"] = std::move(arr);
    emit_json(doc, cfg.out);
    return 0;
}

int run_symmetry(const run_config &cfg)
{
    const int n = cfg.grid_set ? cfg.grid : 12;
    const auto rep = scg::symmetry_check(surface_datum(cfg), n, cfg.tol);
    ojson doc;
    ojson per = ojson::array();
    for (const double d : rep.per_element) {
        per.push_back(d);
    }
    doc["per_element"] = std::move(per);
    doc["max_deviation"] = rep.max_deviation;
    emit_json(doc, cfg.out);
    return 0;
}

int run_report(const run_config &cfg)
{
    int failures = 0;
    ojson criteria = ojson::array();
    scg::run_acceptance([&](const scg::criterion_result &r) {
        std::fprintf(stderr, "[%2d] %s  %-26s %6.2fs\n", r.number, r.passed ? "PASS" : "FAIL",
                     r.name.c_str(), r.seconds);
        if (!r.passed) {
            ++failures;
        }
        ojson c;
        c["number"] = r.number;
        c["name"] = r.name;
        c["summary"] = r.summary;
        c["passed"] = r.passed;
        ojson metrics;
        for (const auto &m : r.metrics) {
            metrics[m.name] = m.value;
        }
        c["metrics"] = std::move(metrics);
        if (!r.note.empty()) {
            c["note"] = r.note;
        }
        criteria.push_back(std::move(c));
    });
    ojson doc;
    doc["criteria_total"] = scg::acceptance_count;
    doc["criteria_failed"] = failures;
    doc["passed"] = failures == 0;
    doc["criteria"] = std::move(criteria);
    emit_json(doc, cfg.out);
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Periods, period-mapping roots, and deformed zero-mean-curvature "
                 "immersions over a punctured genus-one domain"};
    app.require_subcommand(1);

    run_config cfg;

    const auto tol_check = CLI::Validator(
        [](std::string &s) -> std::string {
            const double v = std::strtod(s.c_str(), nullptr);
            if (!(v > 1e-14 && v < 1e-2)) {
                return "tolerance must lie strictly between 1e-14 and 1e-2";
            }
            return {};
        },
        "TOL");

    auto add_common = [&](CLI::App *sub, bool with_theta, bool with_trace) {
        sub->add_option("--lambda", cfg.lambda_text, "modulus as RE or RE,IM");
        sub->add_option("--tol", cfg.tol, "target tolerance")->check(tol_check);
        sub->add_option("--grid", cfg.grid, "grid resolution")->check(CLI::Range(16, 2048));
        sub->add_option("--seed", cfg.seed, "seed for sampled checks");
        sub->add_option("--out", cfg.out, "write output to this path instead of stdout");
        sub->add_option("--format", cfg.format, "output format")
            ->check(CLI::IsMember({"json", "csv", "obj"}));
        if (with_theta) {
            sub->add_option("--theta", cfg.theta, "family angle; zeta = exp(i theta)");
        }
        if (with_trace) {
            sub->add_option("--steps", cfg.steps, "trace steps per direction")
                ->check(CLI::Range(1, 1000));
            sub->add_option("--step-size", cfg.step_size, "trace step length")
                ->check(CLI::Range(1e-6, 0.5));
        }
        return sub;
    };

    struct entry
    {
        CLI::App *sub;
        int (*fn)(const run_config &);
    };
    std::vector<entry> table = {
        {add_common(app.add_subcommand("periods", "periods of dx/y and x dx/y on both cycles, "
                                                  "with the bilinear identity residual"),
                    false, false),
         run_periods},
        {add_common(app.add_subcommand("weber-root", "Newton search for the modulus where the "
                                                     "conjugate period ratio closes"),
                    false, false),
         run_weber_root},
        {add_common(app.add_subcommand("rho", "the scaling ratio by its gamma-function and "
                                              "period-quotient routes"),
                    false, false),
         run_rho},
        {add_common(app.add_subcommand("verify-cg", "full check of the distinguished datum: root "
                                                    "residual, margin, curvature, symmetry"),
                    false, false),
         run_verify_cg},
        {add_common(app.add_subcommand("deform", "one member of the unit-circle family, with "
                                                 "closure residual and regularity margin"),
                    true, false),
         run_deform},
        {add_common(app.add_subcommand("jacobian", "period-mapping Jacobian at the distinguished "
                                                   "datum with finite-difference agreement"),
                    false, false),
         run_jacobian},
        {add_common(app.add_subcommand("inequality", "constants and strict margin securing full "
                                                     "rank of the period mapping"),
                    false, false),
         run_inequality},
        {add_common(app.add_subcommand("solve", "Gauss-Newton correction onto the zero set from "
                                                "a seeded perturbation"),
                    false, false),
         run_solve},
        {add_common(app.add_subcommand("trace", "predictor-corrector tracing of the family along "
                                                "the four kernel directions"),
                    false, true),
         run_trace},
        {add_common(app.add_subcommand("case2-scan", "second-case closure residual scan on the "
                                                     "square torus"),
                    false, false),
         run_case2_scan},
        {add_common(app.add_subcommand("mesh", "sample the immersion on a fundamental-domain "
                                               "grid; export JSON, OBJ, or CSV"),
                    true, false),
         run_mesh},
        {add_common(app.add_subcommand("selfint", "locate the self-crossings of a deformed "
                                                  "immersion"),
                    true, false),
         run_selfint},
        {add_common(app.add_subcommand("symmetry", "deviation from the order-8 symmetry group "
                                                   "for a sampled immersion"),
                    true, false),
         run_symmetry},
        {add_common(app.add_subcommand("report", "run the acceptance survey; emit one JSON "
                                                 "document with pass/fail per criterion"),
                    false, false),
         run_report},
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        for (const auto &ent : table) {
            if (ent.sub->parsed()) {
                const auto *grid_opt = ent.sub->get_option_no_throw("--grid");
                const auto *theta_opt = ent.sub->get_option_no_throw("--theta");
                cfg.grid_set = grid_opt != nullptr && grid_opt->count() > 0;
                cfg.theta_set = theta_opt != nullptr && theta_opt->count() > 0;
                return ent.fn(cfg);
            }
        }
        std::fprintf(stderr, "scg: no subcommand given\n");
        return 1;
    } catch (const usage_error &e) {
        std::fprintf(stderr, "scg: %s\n", e.what());
        return 1;
    } catch (const std::domain_error &e) {
        std::fprintf(stderr, "scg: %s\n", e.what());
        return 1;
    } catch (const scg::error &e) {
        std::fprintf(stderr, "scg: %s\n", e.what());
        // A domain failure means an argument reached the library out of
        // range -- a usage mistake, not a numeric breakdown.
        return e.code() == scg::errc::domain_error ? 1 : 2;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "scg: %s\n", e.what());
        return 2;
    }
}
