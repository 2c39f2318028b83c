#pragma once

// Perturbation spec files: a small JSON format describing a trigonometric
// polynomial independently of the concrete moduli, so the same file works for
// every (a, b) or T.
//
//   {"domain": "torus",
//    "terms": [{"freq": [m, n], "kind": "cos"|"sin", "coeff": x}, ...]}
//
//   {"domain": "annulus",
//    "terms": [{"freq": n, "kind": "cos"|"sin", "parity": "even"|"odd",
//               "coeff": x}, ...]}

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "specvar/errors.hpp"
#include "specvar/trigpoly.hpp"

namespace specvar {

struct OmegaSpec {
    enum class Kind { torus, annulus };

    struct TorusTerm {
        int m = 0, n = 0;
        Wave wave = Wave::cos;
        double coeff = 0.0;
    };
    struct AnnulusTerm {
        int n = 0;
        Wave wave = Wave::cos;
        Sym sym = Sym::even;
        double coeff = 0.0;
    };

    Kind kind = Kind::torus;
    std::vector<TorusTerm> torus_terms;
    std::vector<AnnulusTerm> annulus_terms;
};

namespace detail {

inline Wave parse_wave(const nlohmann::json& j, const std::string& where) {
    if (!j.is_string() || (j != "cos" && j != "sin"))
        throw SpecParseError(where + ".kind: expected \"cos\" or \"sin\"");
    return j == "cos" ? Wave::cos : Wave::sin;
}

inline double parse_coeff(const nlohmann::json& term, const std::string& where) {
    if (!term.contains("coeff") || !term["coeff"].is_number())
        throw SpecParseError(where + ".coeff: expected a number");
    return term["coeff"].get<double>();
}

} // namespace detail

inline OmegaSpec parse_omega_spec(const nlohmann::json& j) {
    if (!j.is_object()) throw SpecParseError("perturbation spec: expected a JSON object");
    if (!j.contains("domain") || !j["domain"].is_string())
        throw SpecParseError("perturbation spec: missing \"domain\" (\"torus\" or \"annulus\")");
    const std::string domain = j["domain"].get<std::string>();
    if (domain != "torus" && domain != "annulus")
        throw SpecParseError("perturbation spec: domain must be \"torus\" or \"annulus\", got \"" +
                             domain + "\"");
    if (!j.contains("terms") || !j["terms"].is_array())
        throw SpecParseError("perturbation spec: missing \"terms\" array");

    OmegaSpec spec;
    spec.kind = domain == "torus" ? OmegaSpec::Kind::torus : OmegaSpec::Kind::annulus;
    int idx = 0;
    for (const auto& term : j["terms"]) {
        const std::string where = "terms[" + std::to_string(idx++) + "]";
        if (!term.is_object()) throw SpecParseError(where + ": expected an object");
        if (!term.contains("kind")) throw SpecParseError(where + ".kind: missing");
        if (!term.contains("freq")) throw SpecParseError(where + ".freq: missing");
        if (spec.kind == OmegaSpec::Kind::torus) {
            const auto& f = term["freq"];
            if (!f.is_array() || f.size() != 2 || !f[0].is_number_integer() || !f[1].is_number_integer())
                throw SpecParseError(where + ".freq: expected an [m, n] integer pair");
            OmegaSpec::TorusTerm t;
            t.m = f[0].get<int>();
            t.n = f[1].get<int>();
            t.wave = detail::parse_wave(term["kind"], where);
            t.coeff = detail::parse_coeff(term, where);
            spec.torus_terms.push_back(t);
        } else {
            const auto& f = term["freq"];
            if (!f.is_number_integer())
                throw SpecParseError(where + ".freq: expected an integer angular frequency");
            if (!term.contains("parity") || !term["parity"].is_string() ||
                (term["parity"] != "even" && term["parity"] != "odd"))
                throw SpecParseError(where + ".parity: expected \"even\" or \"odd\"");
            OmegaSpec::AnnulusTerm t;
            t.n = f.get<int>();
            t.wave = detail::parse_wave(term["kind"], where);
            t.sym = term["parity"] == "even" ? Sym::even : Sym::odd;
            t.coeff = detail::parse_coeff(term, where);
            spec.annulus_terms.push_back(t);
        }
    }
    return spec;
}

inline OmegaSpec load_omega_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecParseError("perturbation spec: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SpecParseError("perturbation spec " + path + ": " + e.what());
    }
    return parse_omega_spec(j);
}

inline TorusPoly instantiate(const OmegaSpec& spec, const TorusDomain& d) {
    if (spec.kind != OmegaSpec::Kind::torus)
        throw SpecParseError("perturbation spec: expected domain \"torus\"");
    TorusPoly p(d);
    for (const auto& t : spec.torus_terms) p.add_term(TorusFreq{t.m, t.n, t.wave}, t.coeff);
    return p;
}

inline BoundaryPoly instantiate(const OmegaSpec& spec, const CylinderDomain& d) {
    if (spec.kind != OmegaSpec::Kind::annulus)
        throw SpecParseError("perturbation spec: expected domain \"annulus\"");
    BoundaryPoly p(d);
    for (const auto& t : spec.annulus_terms) p.add_term(BoundaryFreq{t.n, t.wave, t.sym}, t.coeff);
    return p;
}

} // namespace specvar
