// specvar: second variation of normalized Laplace / Steklov eigenvalue
// functionals at flat critical metrics, with an independent Galerkin check.
//
// Exit codes: 0 success; 2 invalid input (moduli, guards, spec files);
// 3 computation errors (admissibility, incomplete spectrum, solver failures).

#include <atomic>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specvar/omega_io.hpp"
#include "specvar/specvar.hpp"

using nlohmann::ordered_json;
using namespace specvar;

namespace {

constexpr int kSchemaVersion = 1;
constexpr const char* kToolVersion = "specvar 1.0.0";

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string join(const std::vector<double>& v, const char* sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += fmt(v[i]);
    }
    return s;
}

template <class Dom>
std::string describe_poly(const TrigPoly<Dom>& p) {
    if (p.is_zero()) return "0";
    std::string s;
    for (const auto& [f, c] : p.terms()) {
        if (!s.empty()) s += c < 0 ? " - " : " + ";
        else if (c < 0) s += "-";
        s += fmt(std::abs(c)) + "*" + describe(f);
    }
    return s;
}

// ---------------------------------------------------------------------------
// engine rows shared by the point commands and sweeps

struct EngineRow {
    double alpha_raw = 0.0;
    double alpha_normalized = 0.0; // computed through the unit-area / unit-length metric
    double mu = 0.0;
    double admissibility = 0.0;
    double eigenvalue = 0.0;
    double normalized_eigenvalue = 0.0;
    double omega_norm_sq = 0.0;
    double normalizer = 0.0;
    std::vector<double> branch_curvatures;
    std::vector<double> normalized_branch_curvatures;
    QFormResult qform;
    std::optional<VariationReport> verification;
};

void check_convention_bridge(double raw, double normalized) {
    if (std::abs(raw - normalized) > 1e-10 * std::max(std::abs(raw), 1.0))
        throw Error("unit-normalization bridge violated: alpha " + fmt(raw) + " vs " + fmt(normalized));
}

template <class Dom, class MakeData>
EngineRow engine_row(const Dom& domain, const Dom& unit_domain, const TrigPoly<Dom>& omega,
                     MakeData make_data, bool run_verify, const VerificationConfig& cfg) {
    auto data = make_data(domain, omega);
    auto sv = second_variation(omega, data);

    const auto omega_unit = with_domain(omega, unit_domain);
    auto sv_unit = second_variation(omega_unit, make_data(unit_domain, omega_unit));
    check_convention_bridge(sv.alpha, sv_unit.alpha);

    EngineRow row;
    row.alpha_raw = sv.alpha;
    row.alpha_normalized = sv_unit.alpha;
    row.mu = sv.mu;
    row.admissibility = sv.qform.admissibility_residual;
    row.eigenvalue = data.eigenvalue;
    row.normalized_eigenvalue = data.eigenvalue * data.normalizer;
    row.omega_norm_sq = sv.omega_norm_sq;
    row.normalizer = sv.normalizer;
    row.branch_curvatures = sv.branch_curvatures;
    row.normalized_branch_curvatures = sv.normalized_branch_curvatures;
    row.qform = sv.qform;
    if (run_verify) row.verification = verify(data, omega, cfg);
    return row;
}

EngineRow torus_row(const TorusDomain& d, const TorusPoly& omega, bool run_verify,
                    const VerificationConfig& cfg) {
    const TorusDomain unit{d.a, d.b, d.metric_scale / torus_area(d)};
    return engine_row(d, unit, omega,
                      [](const TorusDomain& dom, const TorusPoly& om) {
                          return torus_lambda1_critical_data(dom, om);
                      },
                      run_verify, cfg);
}

EngineRow cylinder_row(const CylinderDomain& d, const BoundaryPoly& omega, bool run_verify,
                       const VerificationConfig& cfg) {
    const double len = boundary_length(d);
    const CylinderDomain unit{d.half_length, d.metric_scale / (len * len)};
    return engine_row(d, unit, omega,
                      [](const CylinderDomain& dom, const BoundaryPoly& om) {
                          return cylinder_sigma1_critical_data(dom, om);
                      },
                      run_verify, cfg);
}

// Closed-form route for the sin(theta) - a sin(3 theta) family; asserted
// against the engine on every cylinder invocation.
struct ClosedForms {
    double b2 = 0.0, b4 = 0.0, mu1 = 0.0, mu2 = 0.0, alpha = 0.0;
};

ClosedForms cylinder_closed_forms(double a, double T, const EngineRow& row) {
    ClosedForms cf{specvar::b2(T), specvar::b4(T), specvar::mu1(a, T), specvar::mu2(a, T),
                   alpha_of_a(a, T)};
    if (std::abs(cf.alpha - row.alpha_raw) > 1e-10 * std::max(std::abs(cf.alpha), 1.0))
        throw Error("closed-form vs engine disagreement: alpha " + fmt(cf.alpha) + " vs " +
                    fmt(row.alpha_raw));
    return cf;
}

// ---------------------------------------------------------------------------
// output helpers

ordered_json verification_json(const VariationReport& r) {
    ordered_json j;
    j["measured_second_derivative"] = r.measured;
    j["predicted_alpha"] = r.prediction.alpha;
    j["relative_error"] = r.relative_error;
    j["first_derivative_residual"] = r.first_derivative_residual;
    j["branch_predicted"] = r.branch_predicted;
    j["branch_measured"] = r.branch_measured;
    j["normalized_branch_predicted"] = r.normalized_branch_predicted;
    j["normalized_branch_measured"] = r.normalized_branch_measured;
    ordered_json samples = ordered_json::array();
    for (const auto& s : r.samples)
        samples.push_back({{"t", s.t},
                           {"eigenvalue", s.eigenvalue},
                           {"normalizer", s.normalizer},
                           {"normalized", s.normalized}});
    j["samples"] = samples;
    return j;
}

ordered_json row_json(const EngineRow& row) {
    ordered_json j;
    j["eigenvalue"] = row.eigenvalue;
    j["normalized_eigenvalue"] = row.normalized_eigenvalue;
    j["omega_norm_sq"] = row.omega_norm_sq;
    j["normalizer"] = row.normalizer;
    j["admissibility_residual"] = row.admissibility;
    ordered_json q = ordered_json::array();
    for (int r = 0; r < row.qform.matrix.order(); ++r) {
        ordered_json line = ordered_json::array();
        for (int c = 0; c < row.qform.matrix.order(); ++c) line.push_back(row.qform.matrix(r, c));
        q.push_back(line);
    }
    j["Q"] = q;
    j["mu"] = row.mu;
    j["minimizer"] = row.qform.minimizer;
    j["branch_curvatures"] = row.branch_curvatures;
    j["normalized_branch_curvatures"] = row.normalized_branch_curvatures;
    j["alpha_raw"] = row.alpha_raw;
    j["alpha_normalized"] = row.alpha_normalized;
    if (row.verification) j["verify"] = verification_json(*row.verification);
    return j;
}

void print_row_text(const EngineRow& row, const std::string& basis_note) {
    std::cout << "eigenvalue            = " << fmt(row.eigenvalue) << "\n";
    std::cout << "normalized eigenvalue = " << fmt(row.normalized_eigenvalue) << "\n";
    std::cout << "|omega|^2             = " << fmt(row.omega_norm_sq) << "\n";
    std::cout << "admissibility residual= " << fmt(row.admissibility) << "\n";
    std::cout << "Q matrix on " << basis_note << ":\n";
    for (int r = 0; r < row.qform.matrix.order(); ++r) {
        std::cout << "  [";
        for (int c = 0; c < row.qform.matrix.order(); ++c)
            std::cout << (c ? ", " : " ") << fmt(row.qform.matrix(r, c));
        std::cout << " ]\n";
    }
    std::cout << "mu (smallest eigenvalue of Q) = " << fmt(row.mu) << "\n";
    std::cout << "minimizer in eigenspace coords = [" << join(row.qform.minimizer, ", ") << "]\n";
    std::cout << "branch curvatures            = [" << join(row.branch_curvatures, ", ") << "]\n";
    std::cout << "normalized branch curvatures = [" << join(row.normalized_branch_curvatures, ", ")
              << "]\n";
    std::cout << "alpha (raw metric)        = " << fmt(row.alpha_raw) << "\n";
    std::cout << "alpha (unit normalization)= " << fmt(row.alpha_normalized) << "\n";
}

void print_verification_text(const VariationReport& r) {
    std::cout << "verification:\n";
    std::cout << "  predicted alpha      = " << fmt(r.prediction.alpha) << "\n";
    std::cout << "  measured d2/dt2      = " << fmt(r.measured) << "\n";
    std::cout << "  relative error       = " << fmt(r.relative_error) << "\n";
    std::cout << "  first-deriv residual = " << fmt(r.first_derivative_residual) << "\n";
    std::cout << "  branch predicted     = [" << join(r.branch_predicted, ", ") << "]\n";
    std::cout << "  branch measured      = [" << join(r.branch_measured, ", ") << "]\n";
}

void write_samples_csv(const std::string& path, const VariationReport& r) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open csv output " + path);
    out << "t,lambda_k,normalizer,normalized\n";
    for (const auto& s : r.samples)
        out << fmt(s.t) << "," << fmt(s.eigenvalue) << "," << fmt(s.normalizer) << ","
            << fmt(s.normalized) << "\n";
}

ordered_json report_header(const std::string& problem) {
    ordered_json j;
    j["schema"] = kSchemaVersion;
    j["tool"] = kToolVersion;
    j["problem"] = problem;
    return j;
}

// ---------------------------------------------------------------------------
// subcommand bodies

struct PointOptions {
    bool json = false;
    bool run_verify = false;
    std::string omega_file;
    std::string csv_path;
    int cutoff = 0;
    double step = 0.05;
};

VerificationConfig make_config(const PointOptions& opt) {
    VerificationConfig cfg;
    cfg.cutoff = opt.cutoff;
    cfg.step = opt.step;
    return cfg;
}

int cmd_torus(double a, double b, const PointOptions& opt) {
    const TorusDomain d{a, b, 1.0};
    validate_moduli(d);
    TorusPoly omega = opt.omega_file.empty() ? axial_perturbation(d)
                                             : instantiate(load_omega_spec(opt.omega_file), d);
    const EngineRow row = torus_row(d, omega, opt.run_verify, make_config(opt));

    if (opt.json) {
        ordered_json j = report_header("torus");
        j["a"] = a;
        j["b"] = b;
        j["area"] = torus_area(d);
        j["omega"] = describe_poly(omega);
        ordered_json body = row_json(row);
        j.insert(body.begin(), body.end());
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "problem: torus, a = " << fmt(a) << ", b = " << fmt(b)
                  << " (area = " << fmt(torus_area(d)) << ")\n";
        std::cout << "omega: " << describe_poly(omega)
                  << (opt.omega_file.empty() ? "  [default sqrt(2) sin(2 pi y / b)]" : "") << "\n";
        print_row_text(row, "E_1 basis [sin, cos]");
        if (row.verification) print_verification_text(*row.verification);
    }
    if (!opt.csv_path.empty() && row.verification) write_samples_csv(opt.csv_path, *row.verification);
    return 0;
}

int cmd_cylinder(double T, double a, const PointOptions& opt) {
    const CylinderDomain d{T, 1.0};
    validate_moduli(d);
    const bool family = opt.omega_file.empty();
    BoundaryPoly omega = family ? sin_family_perturbation(d, a)
                                : instantiate(load_omega_spec(opt.omega_file), d);
    const EngineRow row = cylinder_row(d, omega, opt.run_verify, make_config(opt));
    std::optional<ClosedForms> cf;
    if (family) cf = cylinder_closed_forms(a, T, row);

    if (opt.json) {
        ordered_json j = report_header("annulus");
        j["T"] = T;
        if (family) j["a"] = a;
        j["boundary_length"] = boundary_length(d);
        j["omega"] = describe_poly(omega);
        ordered_json body = row_json(row);
        j.insert(body.begin(), body.end());
        if (cf) {
            j["closed_form"] = {{"b2", cf->b2},   {"b4", cf->b4},       {"mu1", cf->mu1},
                                {"mu2", cf->mu2}, {"alpha", cf->alpha}, {"engine_agreement", std::abs(cf->alpha - row.alpha_raw)}};
        }
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "problem: annulus (flat cylinder), T = " << fmt(T)
                  << " (boundary length = " << fmt(boundary_length(d)) << ")\n";
        std::cout << "omega: " << describe_poly(omega)
                  << (family ? "  [family sin(theta) - a sin(3 theta), a = " + fmt(a) + "]" : "")
                  << "\n";
        print_row_text(row, "E_1 basis [sin, cos]");
        if (cf) {
            std::cout << "closed forms: b2(T) = " << fmt(cf->b2) << ", b4(T) = " << fmt(cf->b4)
                      << ", mu1 = " << fmt(cf->mu1) << ", mu2 = " << fmt(cf->mu2) << "\n";
            std::cout << "closed-form alpha = " << fmt(cf->alpha)
                      << " (engine agreement = " << fmt(std::abs(cf->alpha - row.alpha_raw)) << ")\n";
        }
        std::cout << "alpha " << (row.alpha_raw > 0.0 ? "> 0" : "<= 0")
                  << (row.alpha_raw > 0.0 ? ": the flat metric is not a local maximizer along omega\n"
                                          : "\n");
        if (row.verification) print_verification_text(*row.verification);
    }
    if (!opt.csv_path.empty() && row.verification) write_samples_csv(opt.csv_path, *row.verification);
    return 0;
}

int cmd_t1(double tol, bool json) {
    const double t1 = find_T1(tol);
    if (json) {
        ordered_json j = report_header("t1");
        j["T1"] = t1;
        j["tanh_T1_times_T1"] = std::tanh(t1) * t1;
        j["tol"] = tol;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "T1 = " << fmt(t1) << "\n";
        std::cout << "tanh(T1) * T1 = " << fmt(std::tanh(t1) * t1) << "\n";
    }
    return 0;
}

int cmd_verify(const std::string& problem, double a, double b, double T, const PointOptions& opt) {
    VariationReport report;
    if (problem == "torus") {
        const TorusDomain d{a, b, 1.0};
        TorusPoly omega = opt.omega_file.empty() ? axial_perturbation(d)
                                                 : instantiate(load_omega_spec(opt.omega_file), d);
        report = verify(torus_lambda1_critical_data(d, omega), omega, make_config(opt));
    } else {
        const CylinderDomain d{T, 1.0};
        BoundaryPoly omega = opt.omega_file.empty() ? sin_family_perturbation(d, a)
                                                    : instantiate(load_omega_spec(opt.omega_file), d);
        report = verify(cylinder_sigma1_critical_data(d, omega), omega, make_config(opt));
    }
    if (opt.json) {
        ordered_json j = report_header(problem == "torus" ? "verify-torus" : "verify-annulus");
        j["report"] = verification_json(report);
        std::cout << j.dump(2) << "\n";
    } else {
        print_verification_text(report);
        std::cout << "  normalized branch measured = [" << join(report.normalized_branch_measured, ", ")
                  << "]\n";
    }
    if (!opt.csv_path.empty()) write_samples_csv(opt.csv_path, report);
    return 0;
}

// ---------------------------------------------------------------------------
// sweeps

struct SweepSpecFile {
    std::string problem; // "torus" | "annulus"
    std::vector<std::pair<double, double>> torus_grid;
    std::vector<double> T_grid;
    std::vector<double> a_grid;
    std::optional<OmegaSpec> omega;
    bool verify = false;
    int cutoff = 0;
    double step = 0.05;
    std::string csv;
};

SweepSpecFile parse_sweep_spec(const nlohmann::json& j) {
    if (!j.is_object()) throw SpecParseError("sweep spec: expected a JSON object");
    SweepSpecFile s;
    if (!j.contains("problem") || !j["problem"].is_string())
        throw SpecParseError("sweep spec: missing \"problem\" (\"torus\" or \"annulus\")");
    s.problem = j["problem"].get<std::string>();
    if (s.problem != "torus" && s.problem != "annulus")
        throw SpecParseError("sweep spec: problem must be \"torus\" or \"annulus\"");

    if (s.problem == "torus") {
        if (!j.contains("grid") || !j["grid"].is_array() || j["grid"].empty())
            throw SpecParseError("sweep spec: torus sweeps need a non-empty \"grid\" of [a, b] pairs");
        int idx = 0;
        for (const auto& p : j["grid"]) {
            const std::string where = "grid[" + std::to_string(idx++) + "]";
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                throw SpecParseError("sweep spec: " + where + " must be an [a, b] pair");
            s.torus_grid.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
    } else {
        if (!j.contains("T_grid") || !j["T_grid"].is_array() || j["T_grid"].empty())
            throw SpecParseError("sweep spec: annulus sweeps need a non-empty \"T_grid\"");
        for (const auto& v : j["T_grid"]) {
            if (!v.is_number()) throw SpecParseError("sweep spec: T_grid entries must be numbers");
            s.T_grid.push_back(v.get<double>());
        }
        if (j.contains("a_grid")) {
            if (!j["a_grid"].is_array())
                throw SpecParseError("sweep spec: a_grid must be an array of numbers");
            for (const auto& v : j["a_grid"]) {
                if (!v.is_number()) throw SpecParseError("sweep spec: a_grid entries must be numbers");
                s.a_grid.push_back(v.get<double>());
            }
        }
    }
    if (j.contains("omega")) s.omega = parse_omega_spec(j["omega"]);
    if (s.problem == "annulus" && !s.omega && s.a_grid.empty())
        throw SpecParseError("sweep spec: annulus sweeps need an \"a_grid\" or a fixed \"omega\"");
    if (j.contains("verify")) {
        if (!j["verify"].is_boolean()) throw SpecParseError("sweep spec: verify must be a boolean");
        s.verify = j["verify"].get<bool>();
    }
    if (j.contains("cutoff")) {
        if (!j["cutoff"].is_number_integer()) throw SpecParseError("sweep spec: cutoff must be an integer");
        s.cutoff = j["cutoff"].get<int>();
    }
    if (j.contains("step")) {
        if (!j["step"].is_number()) throw SpecParseError("sweep spec: step must be a number");
        s.step = j["step"].get<double>();
    }
    if (j.contains("csv")) {
        if (!j["csv"].is_string()) throw SpecParseError("sweep spec: csv must be a path string");
        s.csv = j["csv"].get<std::string>();
    }
    return s;
}

template <class F>
void parallel_for(int jobs, int n, F f) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            int i;
            while ((i = next.fetch_add(1)) < n && !failed.load()) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true);
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct SweepRow {
    std::vector<std::pair<std::string, double>> params; // grid coordinates in order
    EngineRow engine;
};

int cmd_sweep(const std::string& spec_path, const std::string& csv_override, bool json, int jobs) {
    std::ifstream in(spec_path);
    if (!in) throw SpecParseError("sweep spec: cannot open " + spec_path);
    nlohmann::json raw;
    try {
        in >> raw;
    } catch (const nlohmann::json::exception& e) {
        throw SpecParseError("sweep spec " + spec_path + ": " + e.what());
    }
    const SweepSpecFile spec = parse_sweep_spec(raw);

    VerificationConfig cfg;
    cfg.cutoff = spec.cutoff;
    cfg.step = spec.step;

    // Materialize the grid up front and validate every point before any work:
    // invalid grids are input errors, not computation errors.
    std::vector<SweepRow> rows;
    if (spec.problem == "torus") {
        for (auto [a, b] : spec.torus_grid) {
            const TorusDomain d{a, b, 1.0};
            validate_moduli(d);
            lambda1_eigenspace(d); // enforces the multiplicity-2 workflow guard
            rows.push_back({{{"a", a}, {"b", b}}, {}});
        }
    } else {
        const double t1 = find_T1();
        for (double T : spec.T_grid) {
            if (!(T > 0.0)) throw InvalidModuli("sweep spec: T = " + fmt(T) + " must be positive");
            if (!(T < t1))
                throw NotBelowT1("sweep spec: T = " + fmt(T) + " is not below T1 = " + fmt(t1));
            if (spec.omega) {
                rows.push_back({{{"T", T}}, {}});
            } else {
                for (double a : spec.a_grid) rows.push_back({{{"T", T}, {"a", a}}, {}});
            }
        }
    }

    const bool torus_problem = spec.problem == "torus";
    parallel_for(jobs, static_cast<int>(rows.size()), [&](int i) {
        SweepRow& row = rows[static_cast<std::size_t>(i)];
        if (torus_problem) {
            const TorusDomain d{row.params[0].second, row.params[1].second, 1.0};
            TorusPoly omega = spec.omega ? instantiate(*spec.omega, d) : axial_perturbation(d);
            row.engine = torus_row(d, omega, spec.verify, cfg);
        } else {
            const CylinderDomain d{row.params[0].second, 1.0};
            BoundaryPoly omega = spec.omega ? instantiate(*spec.omega, d)
                                            : sin_family_perturbation(d, row.params[1].second);
            row.engine = cylinder_row(d, omega, spec.verify, cfg);
            if (!spec.omega) cylinder_closed_forms(row.params[1].second, d.half_length, row.engine);
        }
    });

    // Summary.
    int positive = 0;
    std::size_t argmin = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].engine.alpha_raw > 0.0) ++positive;
        if (rows[i].engine.alpha_raw < rows[argmin].engine.alpha_raw) argmin = i;
    }
    auto point_label = [](const SweepRow& r) {
        std::string s;
        for (const auto& [k, v] : r.params) s += (s.empty() ? "" : ", ") + k + " = " + fmt(v);
        return s;
    };

    const std::string csv_path = !csv_override.empty() ? csv_override : spec.csv;
    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        if (!out) throw Error("cannot open csv output " + csv_path);
        for (const auto& [k, v] : rows.front().params) out << k << ",";
        out << "alpha_raw,alpha_normalized,mu,branch_curvatures,admissibility_residual,verify_rel_error\n";
        for (const auto& r : rows) {
            for (const auto& [k, v] : r.params) out << fmt(v) << ",";
            out << fmt(r.engine.alpha_raw) << "," << fmt(r.engine.alpha_normalized) << ","
                << fmt(r.engine.mu) << "," << join(r.engine.branch_curvatures, ";") << ","
                << fmt(r.engine.admissibility);
            out << ",";
            if (r.engine.verification) out << fmt(r.engine.verification->relative_error);
            out << "\n";
        }
    }

    if (json) {
        ordered_json j = report_header(spec.problem);
        j["config"] = {{"spec", spec_path},      {"points", rows.size()}, {"verify", spec.verify},
                       {"cutoff", spec.cutoff},  {"step", spec.step},     {"jobs", jobs}};
        ordered_json points = ordered_json::array();
        for (const auto& r : rows) {
            ordered_json p;
            for (const auto& [k, v] : r.params) p[k] = v;
            p["alpha_raw"] = r.engine.alpha_raw;
            p["alpha_normalized"] = r.engine.alpha_normalized;
            p["mu"] = r.engine.mu;
            p["branch_curvatures"] = r.engine.branch_curvatures;
            p["admissibility_residual"] = r.engine.admissibility;
            if (r.engine.verification) p["verify_rel_error"] = r.engine.verification->relative_error;
            points.push_back(p);
        }
        j["points"] = points;
        j["summary"] = {{"count", rows.size()},
                        {"alpha_positive_count", positive},
                        {"min_alpha", rows[argmin].engine.alpha_raw},
                        {"min_alpha_at", point_label(rows[argmin])}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "sweep: " << spec.problem << ", " << rows.size() << " points\n";
        std::cout << "alpha > 0 at " << positive << "/" << rows.size() << " points\n";
        std::cout << "min alpha = " << fmt(rows[argmin].engine.alpha_raw) << " at "
                  << point_label(rows[argmin]) << "\n";
        if (!csv_path.empty()) std::cout << "csv written to " << csv_path << "\n";
    }
    return 0;
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const InvalidModuli& e) {
        std::cerr << "error (invalid moduli): " << e.what() << "\n";
        return 2;
    } catch (const MultiplicityNotTwo& e) {
        std::cerr << "error (multiplicity guard): " << e.what() << "\n";
        return 2;
    } catch (const NotBelowT1& e) {
        std::cerr << "error (T1 guard): " << e.what() << "\n";
        return 2;
    } catch (const SpecParseError& e) {
        std::cerr << "error (spec file): " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"second variation of normalized Laplace/Steklov eigenvalues at flat critical metrics"};
    app.require_subcommand(1);
    int exit_code = 0;

    // torus ------------------------------------------------------------------
    double t_a = 0.0, t_b = 1.0;
    PointOptions t_opt;
    auto* torus = app.add_subcommand("torus", "second variation at one flat torus");
    torus->add_option("--a", t_a, "moduli a in [0, 1/2]")->required();
    torus->add_option("--b", t_b, "moduli b > 0")->required();
    torus->add_option("--omega", t_opt.omega_file, "perturbation spec file (JSON)");
    torus->add_flag("--verify", t_opt.run_verify, "run the Galerkin verification");
    torus->add_flag("--json", t_opt.json, "machine-readable output");
    torus->add_option("--csv", t_opt.csv_path, "write verification samples as CSV");
    torus->add_option("--cutoff", t_opt.cutoff, "Galerkin cutoff (default 8)");
    torus->add_option("--step", t_opt.step, "finite-difference step h (default 0.05)");
    torus->callback([&] { exit_code = run_guarded([&] { return cmd_torus(t_a, t_b, t_opt); }); });

    // cylinder ----------------------------------------------------------------
    double c_T = 1.0, c_a = 0.2;
    PointOptions c_opt;
    auto* cyl = app.add_subcommand("cylinder", "second variation at one flat cylinder (annulus)");
    cyl->add_option("--T", c_T, "half-length T in (0, T1)")->required();
    cyl->add_option("--a", c_a, "family parameter in omega = sin(theta) - a sin(3 theta)");
    cyl->add_option("--omega", c_opt.omega_file, "perturbation spec file (JSON, overrides --a)");
    cyl->add_flag("--verify", c_opt.run_verify, "run the Galerkin verification");
    cyl->add_flag("--json", c_opt.json, "machine-readable output");
    cyl->add_option("--csv", c_opt.csv_path, "write verification samples as CSV");
    cyl->add_option("--cutoff", c_opt.cutoff, "angular cutoff (default 24)");
    cyl->add_option("--step", c_opt.step, "finite-difference step h (default 0.05)");
    cyl->callback([&] { exit_code = run_guarded([&] { return cmd_cylinder(c_T, c_a, c_opt); }); });

    // sweep --------------------------------------------------------------------
    std::string sweep_spec, sweep_csv;
    bool sweep_json = false;
    int sweep_jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "evaluate a moduli/perturbation grid from a spec file");
    sweep->add_option("--spec", sweep_spec, "sweep spec file (JSON)")->required();
    sweep->add_option("--csv", sweep_csv, "CSV output path (overrides the spec file)");
    sweep->add_flag("--json", sweep_json, "machine-readable report");
    sweep->add_option("--jobs", sweep_jobs, "worker threads (default 1)");
    sweep->callback(
        [&] { exit_code = run_guarded([&] { return cmd_sweep(sweep_spec, sweep_csv, sweep_json, sweep_jobs); }); });

    // t1 -----------------------------------------------------------------------
    double t1_tol = 1e-10;
    bool t1_json = false;
    auto* t1 = app.add_subcommand("t1", "the threshold half-length: root of coth T = T");
    t1->add_option("--tol", t1_tol, "bisection tolerance (default 1e-10)");
    t1->add_flag("--json", t1_json, "machine-readable output");
    t1->callback([&] { exit_code = run_guarded([&] { return cmd_t1(t1_tol, t1_json); }); });

    // verify ----------------------------------------------------------------
    std::string v_problem;
    double v_a = 0.2, v_b = 1.0, v_T = 1.0;
    PointOptions v_opt;
    auto* ver = app.add_subcommand("verify", "Galerkin verification only");
    ver->add_option("--problem", v_problem, "torus | annulus")
        ->required()
        ->check(CLI::IsMember({"torus", "annulus"}));
    ver->add_option("--a", v_a, "torus moduli a / annulus family parameter");
    ver->add_option("--b", v_b, "torus moduli b");
    ver->add_option("--T", v_T, "annulus half-length");
    ver->add_option("--omega", v_opt.omega_file, "perturbation spec file (JSON)");
    ver->add_flag("--json", v_opt.json, "machine-readable output");
    ver->add_option("--csv", v_opt.csv_path, "write (t, eigenvalue, normalizer, normalized) samples");
    ver->add_option("--cutoff", v_opt.cutoff, "Galerkin cutoff (0 = auto)");
    ver->add_option("--step", v_opt.step, "finite-difference step h (default 0.05)");
    ver->callback(
        [&] { exit_code = run_guarded([&] { return cmd_verify(v_problem, v_a, v_b, v_T, v_opt); }); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // usage problems are input errors
    }
    return exit_code;
}
