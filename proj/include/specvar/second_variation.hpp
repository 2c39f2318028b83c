#pragma once

// Second variation of the normalized eigenvalue functionals at a critical
// flat metric.
//
// Given a critical eigenspace E_k with eigenvalue lambda_k and a conformal
// direction omega with  integral(omega * u * v) = 0  for all u, v in E_k, the
// normalized eigenvalue t -> lambda_k(t) * normalizer(t) has vanishing first
// derivative and second derivative
//
//   alpha = lambda_k * (|omega|^2 + mu * normalizer),
//
// where mu is the smallest eigenvalue of the quadratic form on E_k
//
//   Q(u, u) = - sum over distinct eigenvalues lambda_i != lambda_k of
//             (lambda_i + lambda_k) / (lambda_i - lambda_k) * |P_i(omega u)|^2,
//
// P_i the orthogonal projection onto the lambda_i eigenspace. The same formula
// covers the Laplace problem on the torus (normalizer = area) and the Steklov
// problem on the cylinder boundary (normalizer = boundary length).
//
// Because omega and the eigenfunctions are finite trigonometric polynomials,
// omega * u has finitely many frequencies and the spectral sum is finite and
// exact: the ambient spectrum handed over in CriticalData must cover precisely
// those frequencies, and a zero-residual check certifies that it does.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "specvar/cylinder.hpp"
#include "specvar/eigenspace.hpp"
#include "specvar/errors.hpp"
#include "specvar/linalg.hpp"
#include "specvar/torus.hpp"

namespace specvar {

enum class ProblemKind { laplace_torus, steklov_cylinder };

inline constexpr double admissibility_tol = 1e-10;

// Critical eigenvalue, its eigenspace, and every ambient eigenspace that can
// receive a projection of omega * u for u in the critical space.
template <class Dom>
struct CriticalData {
    ProblemKind kind = ProblemKind::laplace_torus;
    double eigenvalue = 0.0;
    std::vector<Eigenspace<Dom>> spectrum; // ascending; contains the critical space once
    int critical_index = 0;
    double normalizer = 0.0; // area(M, g) or length(boundary, g)

    const Eigenspace<Dom>& critical_space() const {
        return spectrum[static_cast<std::size_t>(critical_index)];
    }
};

// Max over basis pairs (u, v) of |<omega u, v>|; exact zero for admissible
// perturbations up to coefficient rounding. Thresholding is the caller's
// business, the engine operations below demand <= 1e-10.
template <class Dom>
double check_admissibility(const TrigPoly<Dom>& omega, const Eigenspace<Dom>& ek) {
    double worst = 0.0;
    for (const auto& u : ek.basis) {
        const TrigPoly<Dom> p = multiply(omega, u);
        for (const auto& v : ek.basis) worst = std::max(worst, std::abs(inner(p, v)));
    }
    return worst;
}

struct QLedgerEntry {
    double eigenvalue = 0.0; // ambient lambda_i
    double weight = 0.0;     // (lambda_i + lambda_k) / (lambda_i - lambda_k)
    SymMatrix gram{1};       // <P_i(omega u_r), P_i(omega u_s)>
};

struct QFormResult {
    SymMatrix matrix{1};
    double mu = 0.0;
    std::vector<double> minimizer;
    std::vector<double> form_spectrum; // all eigenvalues of the form, ascending
    std::vector<QLedgerEntry> ledger;
    double admissibility_residual = 0.0;
};

template <class Dom>
QFormResult assemble_quadratic_form(const TrigPoly<Dom>& omega, const CriticalData<Dom>& data) {
    const auto& ek = data.critical_space();
    const int dim = ek.dimension();
    const double lambda_k = data.eigenvalue;

    QFormResult out;
    out.admissibility_residual = check_admissibility(omega, ek);
    if (out.admissibility_residual > admissibility_tol)
        throw NotAdmissible("assemble_quadratic_form: integral(omega u v) residual " +
                            std::to_string(out.admissibility_residual) + " exceeds 1e-10");

    for (std::size_t i = 0; i < data.spectrum.size(); ++i) {
        if (static_cast<int>(i) == data.critical_index) continue;
        if (detail::nearly_equal_eigenvalue(data.spectrum[i].eigenvalue, lambda_k))
            throw DegenerateGap("assemble_quadratic_form: ambient eigenvalue " +
                                std::to_string(data.spectrum[i].eigenvalue) +
                                " coincides with the critical eigenvalue within tolerance");
    }

    // Exact decomposition of omega * u_j over the ambient eigenspaces.
    std::vector<std::vector<std::vector<double>>> coeffs(data.spectrum.size());
    for (auto& c : coeffs) c.resize(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) {
        TrigPoly<Dom> p = multiply(omega, ek.basis[static_cast<std::size_t>(j)]);
        for (std::size_t i = 0; i < data.spectrum.size(); ++i) {
            auto pr = project(p, data.spectrum[i].basis);
            coeffs[i][static_cast<std::size_t>(j)] = std::move(pr.coefficients);
            p = std::move(pr.residual);
        }
        if (!p.is_zero()) {
            std::string leftover;
            for (const auto& [f, c] : p.terms()) leftover += " " + describe(f);
            throw IncompleteSpectrum(
                "assemble_quadratic_form: no eigenspace covers frequencies" + leftover);
        }
    }

    SymMatrix q(dim);
    for (std::size_t i = 0; i < data.spectrum.size(); ++i) {
        if (static_cast<int>(i) == data.critical_index) continue;
        const double lambda_i = data.spectrum[i].eigenvalue;
        const double weight = (lambda_i + lambda_k) / (lambda_i - lambda_k);
        SymMatrix gram(dim);
        for (int r = 0; r < dim; ++r)
            for (int s = r; s < dim; ++s) {
                double dot = 0.0;
                const auto& cr = coeffs[i][static_cast<std::size_t>(r)];
                const auto& cs = coeffs[i][static_cast<std::size_t>(s)];
                for (std::size_t beta = 0; beta < cr.size(); ++beta) dot += cr[beta] * cs[beta];
                gram.set(r, s, dot);
                q.add(r, s, -weight * dot);
            }
        out.ledger.push_back({lambda_i, weight, std::move(gram)});
    }

    auto eig = sym_eigen(q);
    out.matrix = std::move(q);
    out.mu = eig.front().value;
    out.minimizer = eig.front().vector;
    out.form_spectrum.reserve(eig.size());
    for (const auto& p : eig) out.form_spectrum.push_back(p.value);
    return out;
}

struct SecondVariation {
    double alpha = 0.0;
    double mu = 0.0;
    double omega_norm_sq = 0.0;
    double normalizer = 0.0;
    // d^2/dt^2 of the split eigenvalue branches: lambda_k * spec(Q), ascending.
    std::vector<double> branch_curvatures;
    // Same branches after multiplying by the normalizer: lambda_k * (q_j * normalizer + |omega|^2).
    std::vector<double> normalized_branch_curvatures;
    QFormResult qform;
};

template <class Dom>
SecondVariation second_variation(const TrigPoly<Dom>& omega, const CriticalData<Dom>& data) {
    SecondVariation sv;
    sv.qform = assemble_quadratic_form(omega, data);
    sv.mu = sv.qform.mu;
    sv.omega_norm_sq = norm_sq(omega);
    sv.normalizer = data.normalizer;
    sv.alpha = data.eigenvalue * (sv.omega_norm_sq + sv.mu * sv.normalizer);
    for (double qj : sv.qform.form_spectrum) {
        sv.branch_curvatures.push_back(data.eigenvalue * qj);
        sv.normalized_branch_curvatures.push_back(data.eigenvalue * (qj * sv.normalizer + sv.omega_norm_sq));
    }
    return sv;
}

// First variation of an eigenfunction u in E_k along omega:
//   du = sum over lambda_i != lambda_k of lambda_k / (lambda_i - lambda_k) * P_i(omega u).
template <class Dom>
TrigPoly<Dom> eigenfunction_first_variation(const TrigPoly<Dom>& omega, const TrigPoly<Dom>& u,
                                            const CriticalData<Dom>& data) {
    const auto& ek = data.critical_space();
    {
        auto in_space = project(u, ek.basis);
        if (norm_sq(in_space.residual) > 1e-20)
            throw Error("eigenfunction_first_variation: u is not in the critical eigenspace");
    }
    if (check_admissibility(omega, ek) > admissibility_tol)
        throw NotAdmissible("eigenfunction_first_variation: omega is not admissible");

    const double lambda_k = data.eigenvalue;
    TrigPoly<Dom> p = multiply(omega, u);
    TrigPoly<Dom> result(u.domain());
    for (std::size_t i = 0; i < data.spectrum.size(); ++i) {
        auto pr = project(p, data.spectrum[i].basis);
        p = std::move(pr.residual);
        if (static_cast<int>(i) == data.critical_index) continue;
        const double w = lambda_k / (data.spectrum[i].eigenvalue - lambda_k);
        for (std::size_t beta = 0; beta < pr.coefficients.size(); ++beta)
            result += (w * pr.coefficients[beta]) * data.spectrum[i].basis[beta];
    }
    if (!p.is_zero())
        throw IncompleteSpectrum("eigenfunction_first_variation: spectrum does not cover omega * u");
    return result;
}

// --- critical data construction ---------------------------------------------

// Assemble the ambient spectrum needed for omega against a given critical
// space: every frequency of omega * u gets an eigenvalue from eig_of; groups
// matching the critical eigenvalue are folded into E_k only when E_k's own
// frequencies cover them, otherwise they surface later as DegenerateGap.
template <class Dom, class EigOf>
CriticalData<Dom> make_critical_data(ProblemKind kind, Eigenspace<Dom> ek, const TrigPoly<Dom>& omega,
                                     double normalizer, EigOf eig_of) {
    using Freq = typename Dom::Freq;
    const Dom domain = omega.domain();

    std::vector<Freq> ek_freqs;
    for (const auto& u : ek.basis)
        for (const auto& [f, c] : u.terms()) ek_freqs.push_back(f);

    std::vector<std::pair<double, Freq>> needed;
    for (const auto& u : ek.basis) {
        const TrigPoly<Dom> p = multiply(omega, u);
        for (const auto& [f, c] : p.terms()) {
            if (detail::nearly_equal_eigenvalue(eig_of(f), ek.eigenvalue) &&
                std::find(ek_freqs.begin(), ek_freqs.end(), f) != ek_freqs.end())
                continue; // lives inside E_k
            needed.emplace_back(eig_of(f), f);
        }
    }
    std::sort(needed.begin(), needed.end());
    needed.erase(std::unique(needed.begin(), needed.end(),
                             [](const auto& x, const auto& y) { return x.second == y.second; }),
                 needed.end());

    CriticalData<Dom> data;
    data.kind = kind;
    data.eigenvalue = ek.eigenvalue;
    data.normalizer = normalizer;

    std::vector<Eigenspace<Dom>> spaces;
    for (const auto& [ev, f] : needed) {
        if (!spaces.empty() && detail::nearly_equal_eigenvalue(ev, spaces.back().eigenvalue)) {
            spaces.back().basis.push_back(detail::unit_basis_function(domain, f));
        } else {
            Eigenspace<Dom> s;
            s.eigenvalue = ev;
            s.basis.push_back(detail::unit_basis_function(domain, f));
            spaces.push_back(std::move(s));
        }
    }

    // Merge the critical space in, ascending by eigenvalue.
    const double ek_eigenvalue = ek.eigenvalue;
    data.spectrum.reserve(spaces.size() + 1);
    bool placed = false;
    for (auto& s : spaces) {
        if (!placed && ek_eigenvalue < s.eigenvalue) {
            data.critical_index = static_cast<int>(data.spectrum.size());
            data.spectrum.push_back(std::move(ek));
            placed = true;
        }
        data.spectrum.push_back(std::move(s));
    }
    if (!placed) {
        data.critical_index = static_cast<int>(data.spectrum.size());
        data.spectrum.push_back(std::move(ek));
    }
    for (std::size_t i = 0; i < data.spectrum.size(); ++i)
        data.spectrum[i].label = static_cast<int>(i);
    return data;
}

inline CriticalData<TorusDomain> torus_lambda1_critical_data(const TorusDomain& d,
                                                             const TorusPoly& omega) {
    if (!(omega.domain() == d))
        throw DomainMismatch("torus_lambda1_critical_data: omega lives on a different domain");
    return make_critical_data(ProblemKind::laplace_torus, lambda1_eigenspace(d), omega, torus_area(d),
                              [&d](const TorusFreq& f) { return laplace_eigenvalue(d, f); });
}

inline CriticalData<CylinderDomain> cylinder_sigma1_critical_data(const CylinderDomain& d,
                                                                  const BoundaryPoly& omega) {
    if (!(omega.domain() == d))
        throw DomainMismatch("cylinder_sigma1_critical_data: omega lives on a different domain");
    return make_critical_data(ProblemKind::steklov_cylinder, sigma1_eigenspace(d), omega,
                              boundary_length(d),
                              [&d](const BoundaryFreq& f) { return steklov_eigenvalue(d, f); });
}

} // namespace specvar
