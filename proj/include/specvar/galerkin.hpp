#pragma once

// Independent numerical check of the predicted second variation.
//
// Conformal covariance converts each perturbed problem into a weighted
// eigenproblem on the unperturbed domain:
//
//   torus:    laplacian u = lambda e^{t omega} u   (metric e^{t omega} g),
//   cylinder: DtN u       = sigma  e^{t omega} u   (metric e^{2 t omega} g),
//
// both discretized in the exact Fourier eigenbasis: the stiffness matrix is
// diagonal (the unperturbed eigenvalues), the mass matrix collects L^2
// pairings against the weight e^{t omega}, computed by periodic quadrature on
// enough samples to make the band-limited part exact. Sampling over t and
// fitting a quadratic with Richardson refinement yields a measured second
// derivative of the normalized eigenvalue to compare against the engine.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "specvar/second_variation.hpp"

namespace specvar {

struct VerificationConfig {
    int cutoff = 0;             // torus: max |m|,|n|; cylinder: max angular mode. 0 = auto.
    int quadrature_samples = 0; // grid points per period; 0 = auto from bandwidths
    double step = 0.05;         // h
    std::vector<double> steps;  // t samples; empty = {-h, -h/2, 0, h/2, h}
    int branch_index = 1;       // ordered index of the tracked eigenvalue
};

namespace detail {

struct ResolvedConfig {
    int cutoff = 0;
    int quad = 0;
    double step = 0.0;
    std::vector<double> steps;
    int branch_index = 1;
};

template <class Dom>
ResolvedConfig resolve_config(const VerificationConfig& cfg, const TrigPoly<Dom>& omega,
                              int default_cutoff) {
    ResolvedConfig rc;
    const int bw = omega.bandwidth();
    rc.cutoff = cfg.cutoff > 0 ? cfg.cutoff : default_cutoff;
    if (rc.cutoff < 3 * bw)
        throw Error("verification config: cutoff " + std::to_string(rc.cutoff) +
                    " is below 3x the perturbation bandwidth " + std::to_string(bw));
    const int min_quad = 4 * (2 * rc.cutoff + bw);
    rc.quad = cfg.quadrature_samples > 0 ? cfg.quadrature_samples : min_quad;
    if (rc.quad < min_quad)
        throw Error("verification config: quadrature sample count " + std::to_string(rc.quad) +
                    " is below 4x the total bandwidth " + std::to_string(2 * rc.cutoff + bw));
    if (!(cfg.step > 0.0)) throw Error("verification config: step must be positive");
    rc.step = cfg.step;
    if (cfg.branch_index < 0) throw Error("verification config: branch index must be >= 0");
    rc.branch_index = cfg.branch_index;
    rc.steps = cfg.steps;
    if (rc.steps.empty())
        rc.steps = {-rc.step, -0.5 * rc.step, 0.0, 0.5 * rc.step, rc.step};
    std::sort(rc.steps.begin(), rc.steps.end());
    return rc;
}

} // namespace detail

struct WeightedSpectrum {
    std::vector<double> eigenvalues; // ascending
    double normalizer = 0.0;         // area or boundary length of the perturbed metric
};

// Assembled discretization: diagonal stiffness (unperturbed eigenvalues of the
// normalized Fourier basis listed in `basis`) against the e^{t omega}-weighted
// mass matrix. Exposed so callers can work with eigenvectors too.
template <class FreqT>
struct GalerkinSystem {
    std::vector<FreqT> basis;
    GeneralizedPencil pencil;
    double normalizer = 0.0;
};

// --- torus -------------------------------------------------------------------

namespace detail {

// Fourier coefficients A(p,q) = integral of w(s,r) e^{2 pi i (p s + q r)} over
// the unit square in lattice coordinates, |p|, |q| <= max_freq. Rectangle-rule
// sums over an N x N grid, factorized by axis.
class WeightTable2D {
public:
    WeightTable2D(const std::vector<double>& w, int n, int max_freq) : p_(max_freq) {
        const int rows = max_freq + 1;                  // p >= 0; negatives by conjugation
        const int cols = 2 * max_freq + 1;              // q in [-max_freq, max_freq]
        std::vector<std::complex<double>> stage(static_cast<std::size_t>(rows) * n);
        for (int p = 0; p <= max_freq; ++p)
            for (int j = 0; j < n; ++j) {
                std::complex<double> acc = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double phase = two_pi * p * i / n;
                    acc += w[static_cast<std::size_t>(i) * n + j] *
                           std::complex<double>(std::cos(phase), std::sin(phase));
                }
                stage[static_cast<std::size_t>(p) * n + j] = acc;
            }
        a_.resize(static_cast<std::size_t>(rows) * cols);
        const double inv = 1.0 / (static_cast<double>(n) * n);
        for (int p = 0; p <= max_freq; ++p)
            for (int q = -max_freq; q <= max_freq; ++q) {
                std::complex<double> acc = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double phase = two_pi * q * j / n;
                    acc += stage[static_cast<std::size_t>(p) * n + j] *
                           std::complex<double>(std::cos(phase), std::sin(phase));
                }
                a_[static_cast<std::size_t>(p) * cols + (q + max_freq)] = acc * inv;
            }
    }

    std::complex<double> at(int p, int q) const {
        if (p < 0 || (p == 0 && q < 0)) return std::conj(at(-p, -q));
        return a_[static_cast<std::size_t>(p) * (2 * p_ + 1) + (q + p_)];
    }

private:
    int p_;
    std::vector<std::complex<double>> a_;
};

struct TorusBasisEntry {
    TorusFreq freq;
    double eigenvalue = 0.0;
    double inv_norm = 0.0;
};

inline std::vector<TorusBasisEntry> torus_galerkin_basis(const TorusDomain& d, int cutoff) {
    std::vector<TorusBasisEntry> basis;
    for (int m = 0; m <= cutoff; ++m) {
        const int n_lo = (m == 0) ? 0 : -cutoff;
        for (int n = n_lo; n <= cutoff; ++n) {
            if (m == 0 && n == 0) {
                TorusFreq f{0, 0, Wave::cos};
                basis.push_back({f, 0.0, 1.0 / std::sqrt(term_norm_sq(d, f))});
                continue;
            }
            for (Wave w : {Wave::cos, Wave::sin}) {
                TorusFreq f{m, n, w};
                basis.push_back({f, laplace_eigenvalue(d, f), 1.0 / std::sqrt(term_norm_sq(d, f))});
            }
        }
    }
    return basis;
}

// integral of w * phi_f * phi_g over the fundamental domain (unnormalized
// basis functions, measure of the scaled metric).
inline double weighted_pairing(const WeightTable2D& table, const TorusFreq& f, const TorusFreq& g,
                               double area_element) {
    const int dm = f.m - g.m, dn = f.n - g.n;
    const int sm = f.m + g.m, sn = f.n + g.n;
    const auto ad = table.at(dm, dn);
    const auto as = table.at(sm, sn);
    double v;
    if (f.w == Wave::cos && g.w == Wave::cos) {
        v = 0.5 * (ad.real() + as.real());
    } else if (f.w == Wave::sin && g.w == Wave::sin) {
        v = 0.5 * (ad.real() - as.real());
    } else if (f.w == Wave::sin && g.w == Wave::cos) {
        v = 0.5 * (as.imag() + ad.imag());
    } else {
        v = 0.5 * (as.imag() - ad.imag());
    }
    return v * area_element;
}

} // namespace detail

// Discretization of the t-perturbed torus metric below the Galerkin cutoff:
// diagonal stiffness, e^{t omega}-weighted mass, and the perturbed area.
inline GalerkinSystem<TorusFreq> torus_galerkin_system(const TorusDomain& d, const TorusPoly& omega,
                                                       double t, const VerificationConfig& cfg) {
    validate_moduli(d);
    if (!(omega.domain() == d)) throw DomainMismatch("torus_galerkin_system: omega domain mismatch");
    const auto rc = detail::resolve_config(cfg, omega, 8);
    const int n = rc.quad;

    std::vector<double> w(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            w[static_cast<std::size_t>(i) * n + j] =
                std::exp(t * evaluate_lattice(omega, static_cast<double>(i) / n, static_cast<double>(j) / n));

    const int max_freq = 2 * rc.cutoff + omega.bandwidth();
    const detail::WeightTable2D table(w, n, max_freq);
    const double area_element = d.metric_scale * d.b;

    const auto basis = detail::torus_galerkin_basis(d, rc.cutoff);
    const int dim = static_cast<int>(basis.size());
    SymMatrix stiffness(dim), mass(dim);
    for (int i = 0; i < dim; ++i) {
        stiffness.set(i, i, basis[static_cast<std::size_t>(i)].eigenvalue);
        for (int j = i; j < dim; ++j) {
            const auto& bi = basis[static_cast<std::size_t>(i)];
            const auto& bj = basis[static_cast<std::size_t>(j)];
            const double pairing = detail::weighted_pairing(table, bi.freq, bj.freq, area_element);
            mass.set(i, j, pairing * bi.inv_norm * bj.inv_norm);
        }
    }

    std::vector<TorusFreq> freqs;
    freqs.reserve(basis.size());
    for (const auto& b : basis) freqs.push_back(b.freq);
    return {std::move(freqs), GeneralizedPencil(std::move(stiffness), std::move(mass)),
            area_element * table.at(0, 0).real()};
}

inline WeightedSpectrum torus_weighted_spectrum(const TorusDomain& d, const TorusPoly& omega,
                                                double t, const VerificationConfig& cfg) {
    auto system = torus_galerkin_system(d, omega, t, cfg);
    WeightedSpectrum out;
    out.normalizer = system.normalizer;
    auto pairs = gen_eigen(system.pencil);
    out.eigenvalues.reserve(pairs.size());
    for (const auto& p : pairs) out.eigenvalues.push_back(p.value);
    return out;
}

inline std::vector<double> torus_perturbed_spectrum(const TorusDomain& d, const TorusPoly& omega,
                                                    double t, const VerificationConfig& cfg) {
    return torus_weighted_spectrum(d, omega, t, cfg).eigenvalues;
}

// --- cylinder ------------------------------------------------------------------

namespace detail {

struct CircleTables {
    std::vector<double> cosine; // integral of w cos(k theta), k = 0..max
    std::vector<double> sine;   // integral of w sin(k theta)
};

inline CircleTables circle_tables(const BoundaryPoly& omega, double t, BoundaryCircle circle, int n,
                                  int max_freq) {
    CircleTables tb;
    tb.cosine.assign(static_cast<std::size_t>(max_freq) + 1, 0.0);
    tb.sine.assign(static_cast<std::size_t>(max_freq) + 1, 0.0);
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        w[static_cast<std::size_t>(i)] = std::exp(t * evaluate_circle(omega, two_pi * i / n, circle));
    const double h = two_pi / n;
    for (int k = 0; k <= max_freq; ++k) {
        double c = 0.0, s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double phase = two_pi * k * i / n;
            c += w[static_cast<std::size_t>(i)] * std::cos(phase);
            s += w[static_cast<std::size_t>(i)] * std::sin(phase);
        }
        tb.cosine[static_cast<std::size_t>(k)] = c * h;
        tb.sine[static_cast<std::size_t>(k)] = s * h;
    }
    return tb;
}

// integral of w * trig_{f}(n1 theta) * trig_{g}(n2 theta) on one circle.
inline double circle_pairing(const CircleTables& tb, int n1, Wave w1, int n2, Wave w2) {
    const int s = n1 + n2;
    const int dmag = std::abs(n1 - n2);
    const double dsgn = (n1 > n2) ? 1.0 : (n1 < n2 ? -1.0 : 0.0);
    const double cs = tb.cosine[static_cast<std::size_t>(s)];
    const double cd = tb.cosine[static_cast<std::size_t>(dmag)];
    const double ss = tb.sine[static_cast<std::size_t>(s)];
    const double sd = tb.sine[static_cast<std::size_t>(dmag)];
    if (w1 == Wave::cos && w2 == Wave::cos) return 0.5 * (cd + cs);
    if (w1 == Wave::sin && w2 == Wave::sin) return 0.5 * (cd - cs);
    if (w1 == Wave::sin && w2 == Wave::cos) return 0.5 * (ss + dsgn * sd);
    return 0.5 * (ss - dsgn * sd);
}

struct BoundaryBasisEntry {
    BoundaryFreq freq;
    double eigenvalue = 0.0;
    double inv_norm = 0.0;
};

inline std::vector<BoundaryBasisEntry> cylinder_galerkin_basis(const CylinderDomain& d, int n_max) {
    std::vector<BoundaryBasisEntry> basis;
    auto push = [&](BoundaryFreq f) {
        basis.push_back({f, steklov_eigenvalue(d, f), 1.0 / std::sqrt(term_norm_sq(d, f))});
    };
    for (Sym s : {Sym::even, Sym::odd}) {
        push(BoundaryFreq{0, Wave::cos, s});
        for (int n = 1; n <= n_max; ++n)
            for (Wave w : {Wave::cos, Wave::sin}) push(BoundaryFreq{n, w, s});
    }
    return basis;
}

} // namespace detail

// Discretization of the Dirichlet-to-Neumann map of the metric e^{2 t omega}
// g_T up to the angular cutoff, plus the perturbed boundary length.
inline GalerkinSystem<BoundaryFreq> cylinder_galerkin_system(const CylinderDomain& d,
                                                             const BoundaryPoly& omega, double t,
                                                             const VerificationConfig& cfg) {
    validate_moduli(d);
    if (!(omega.domain() == d))
        throw DomainMismatch("cylinder_galerkin_system: omega domain mismatch");
    const auto rc = detail::resolve_config(cfg, omega, 24);
    const int n = rc.quad;
    const int max_freq = 2 * rc.cutoff + omega.bandwidth();

    const auto upper = detail::circle_tables(omega, t, BoundaryCircle::upper, n, max_freq);
    const auto lower = detail::circle_tables(omega, t, BoundaryCircle::lower, n, max_freq);
    const double len_scale = std::sqrt(d.metric_scale);

    const auto basis = detail::cylinder_galerkin_basis(d, rc.cutoff);
    const int dim = static_cast<int>(basis.size());
    SymMatrix stiffness(dim), mass(dim);
    for (int i = 0; i < dim; ++i) {
        stiffness.set(i, i, basis[static_cast<std::size_t>(i)].eigenvalue);
        for (int j = i; j < dim; ++j) {
            const auto& bi = basis[static_cast<std::size_t>(i)];
            const auto& bj = basis[static_cast<std::size_t>(j)];
            const double up = detail::circle_pairing(upper, bi.freq.n, bi.freq.w, bj.freq.n, bj.freq.w);
            const double lo = detail::circle_pairing(lower, bi.freq.n, bi.freq.w, bj.freq.n, bj.freq.w);
            const double sign =
                ((bi.freq.s == Sym::odd) ? -1.0 : 1.0) * ((bj.freq.s == Sym::odd) ? -1.0 : 1.0);
            const double pairing = len_scale * (up + sign * lo);
            mass.set(i, j, pairing * bi.inv_norm * bj.inv_norm);
        }
    }

    std::vector<BoundaryFreq> freqs;
    freqs.reserve(basis.size());
    for (const auto& b : basis) freqs.push_back(b.freq);
    return {std::move(freqs), GeneralizedPencil(std::move(stiffness), std::move(mass)),
            len_scale * (upper.cosine[0] + lower.cosine[0])};
}

inline WeightedSpectrum cylinder_weighted_spectrum(const CylinderDomain& d, const BoundaryPoly& omega,
                                                   double t, const VerificationConfig& cfg) {
    auto system = cylinder_galerkin_system(d, omega, t, cfg);
    WeightedSpectrum out;
    out.normalizer = system.normalizer;
    auto pairs = gen_eigen(system.pencil);
    out.eigenvalues.reserve(pairs.size());
    for (const auto& p : pairs) out.eigenvalues.push_back(p.value);
    return out;
}

inline std::vector<double> cylinder_perturbed_spectrum(const CylinderDomain& d,
                                                       const BoundaryPoly& omega, double t,
                                                       const VerificationConfig& cfg) {
    return cylinder_weighted_spectrum(d, omega, t, cfg).eigenvalues;
}

inline WeightedSpectrum weighted_spectrum(const TorusDomain& d, const TorusPoly& omega, double t,
                                          const VerificationConfig& cfg) {
    return torus_weighted_spectrum(d, omega, t, cfg);
}

inline WeightedSpectrum weighted_spectrum(const CylinderDomain& d, const BoundaryPoly& omega,
                                          double t, const VerificationConfig& cfg) {
    return cylinder_weighted_spectrum(d, omega, t, cfg);
}

// --- derivative extraction ---------------------------------------------------

struct DerivativeFit {
    double second_derivative = 0.0;        // Richardson-refined 2 c2
    double first_derivative_residual = 0.0; // c1 of the least-squares fit
};

// Fits value(t) = c0 + c1 t + c2 t^2 over a symmetric sample set containing
// t = 0 and the levels +-h, +-h/2; returns the Richardson extrapolation of the
// second derivative together with the linear residual.
inline DerivativeFit measure_second_derivative(const std::vector<std::pair<double, double>>& samples) {
    if (samples.size() < 5)
        throw InsufficientSamples("measure_second_derivative: need at least 5 samples");
    double h = 0.0;
    for (const auto& [t, v] : samples) h = std::max(h, std::abs(t));
    if (!(h > 0.0)) throw InsufficientSamples("measure_second_derivative: all samples at t = 0");
    const double tol = 1e-9 * h;

    auto lookup = [&](double t, double& out) {
        for (const auto& [ti, vi] : samples)
            if (std::abs(ti - t) <= tol) {
                out = vi;
                return true;
            }
        return false;
    };
    for (const auto& [t, v] : samples) {
        double dummy;
        if (!lookup(-t, dummy))
            throw InsufficientSamples("measure_second_derivative: samples are not symmetric around 0");
    }
    double v0, vp, vm, vph, vmh;
    if (!lookup(0.0, v0)) throw InsufficientSamples("measure_second_derivative: missing t = 0 sample");
    if (!lookup(h, vp) || !lookup(-h, vm) || !lookup(0.5 * h, vph) || !lookup(-0.5 * h, vmh))
        throw InsufficientSamples("measure_second_derivative: need samples at +-h and +-h/2");

    const double coarse = (vp - 2.0 * v0 + vm) / (h * h);
    const double fine = (vph - 2.0 * v0 + vmh) / (0.25 * h * h);
    DerivativeFit fit;
    fit.second_derivative = (4.0 * fine - coarse) / 3.0;

    // First derivative from central differences, Richardson-refined as well:
    // without the refinement a cubic term in the samples leaks into the linear
    // coefficient at O(h^2), masking the criticality check for perturbations
    // without odd symmetry. A genuine linear term passes through unchanged.
    const double d_coarse = (vp - vm) / (2.0 * h);
    const double d_fine = (vph - vmh) / h;
    fit.first_derivative_residual = (4.0 * d_fine - d_coarse) / 3.0;
    return fit;
}

// --- end-to-end verification --------------------------------------------------

struct VariationSample {
    double t = 0.0;
    double eigenvalue = 0.0; // ordered branch_index-th eigenvalue
    double normalizer = 0.0;
    double normalized = 0.0;
};

struct VariationReport {
    SecondVariation prediction;
    double measured = 0.0; // d^2/dt^2 of the normalized eigenvalue
    double relative_error = 0.0;
    double first_derivative_residual = 0.0;
    std::vector<double> branch_predicted;            // lambda_k * q_j, ascending
    std::vector<double> branch_measured;             // fits of the split cluster branches
    std::vector<double> normalized_branch_predicted; // lambda_k (q_j normalizer + |omega|^2)
    std::vector<double> normalized_branch_measured;
    std::vector<VariationSample> samples;
};

template <class Dom>
VariationReport verify(const CriticalData<Dom>& data, const TrigPoly<Dom>& omega,
                       const VerificationConfig& cfg) {
    VariationReport report;
    report.prediction = second_variation(omega, data);
    report.branch_predicted = report.prediction.branch_curvatures;
    report.normalized_branch_predicted = report.prediction.normalized_branch_curvatures;

    const int default_cutoff = std::is_same_v<Dom, TorusDomain> ? 8 : 24;
    const auto rc = detail::resolve_config(cfg, omega, default_cutoff);
    const int k = rc.branch_index;
    const int dim = data.critical_space().dimension();

    std::vector<std::vector<double>> branch_values(static_cast<std::size_t>(dim));
    std::vector<std::pair<double, double>> normalized_samples;
    for (double t : rc.steps) {
        const WeightedSpectrum ws = weighted_spectrum(omega.domain(), omega, t, cfg);
        if (static_cast<int>(ws.eigenvalues.size()) < k + dim)
            throw Error("verify: Galerkin problem too small for the tracked cluster");
        const double ev = ws.eigenvalues[static_cast<std::size_t>(k)];
        if (t == 0.0 && std::abs(ev - data.eigenvalue) > 1e-6 * std::max(std::abs(data.eigenvalue), 1.0))
            throw Error("verify: discretized spectrum disagrees with the critical eigenvalue at t = 0");
        report.samples.push_back({t, ev, ws.normalizer, ev * ws.normalizer});
        normalized_samples.emplace_back(t, ev * ws.normalizer);
        for (int j = 0; j < dim; ++j)
            branch_values[static_cast<std::size_t>(j)].push_back(
                ws.eigenvalues[static_cast<std::size_t>(k + j)]);
    }

    const DerivativeFit fit = measure_second_derivative(normalized_samples);
    report.measured = fit.second_derivative;
    report.first_derivative_residual = fit.first_derivative_residual;
    report.relative_error = std::abs(report.measured - report.prediction.alpha) /
                            std::max(std::abs(report.prediction.alpha), 1e-12);

    for (int j = 0; j < dim; ++j) {
        std::vector<std::pair<double, double>> branch_samples, normalized_branch;
        for (std::size_t s = 0; s < rc.steps.size(); ++s) {
            branch_samples.emplace_back(rc.steps[s], branch_values[static_cast<std::size_t>(j)][s]);
            normalized_branch.emplace_back(rc.steps[s], branch_values[static_cast<std::size_t>(j)][s] *
                                                            report.samples[s].normalizer);
        }
        report.branch_measured.push_back(measure_second_derivative(branch_samples).second_derivative);
        report.normalized_branch_measured.push_back(
            measure_second_derivative(normalized_branch).second_derivative);
    }
    return report;
}

} // namespace specvar
