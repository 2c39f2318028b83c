#pragma once

// Steklov (Dirichlet-to-Neumann) spectrum of the flat cylinder
// S^1 x [-T, T] with circle length 2*pi.
//
// Harmonic extensions separate into angular modes times cosh/sinh profiles in
// the longitudinal variable. Traces that agree on the two boundary circles
// (even) come from the cosh profile, traces that flip sign (odd) from sinh:
//
//   even: sigma = n tanh(nT) for n >= 1, sigma = 0 for n = 0;
//   odd:  sigma = n coth(nT) for n >= 1, sigma = 1/T for n = 0.
//
// For T below the root T1 of coth T = T the first nonzero eigenvalue is
// tanh(T) with multiplicity two (cos theta and sin theta, even profile).

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "specvar/eigenspace.hpp"
#include "specvar/errors.hpp"
#include "specvar/linalg.hpp"
#include "specvar/trigpoly.hpp"

namespace specvar {

inline void validate_moduli(const CylinderDomain& d) {
    if (!(d.half_length > 0.0)) throw InvalidModuli("cylinder moduli: T must be positive");
    if (!(d.metric_scale > 0.0)) throw InvalidModuli("cylinder moduli: metric scale must be positive");
}

inline double boundary_length(const CylinderDomain& d) {
    return std::sqrt(d.metric_scale) * 2.0 * two_pi;
}

// Closed-form branch eigenvalue for angular mode n and longitudinal parity.
inline double steklov_branch_eigenvalue(const CylinderDomain& d, int n, Sym s) {
    const double T = d.half_length;
    double flat;
    if (s == Sym::even) {
        flat = (n == 0) ? 0.0 : n * std::tanh(n * T);
    } else {
        flat = (n == 0) ? 1.0 / T : n / std::tanh(n * T);
    }
    return flat / std::sqrt(d.metric_scale);
}

inline double steklov_eigenvalue(const CylinderDomain& d, const BoundaryFreq& f) {
    return steklov_branch_eigenvalue(d, f.n, f.s);
}

struct SteklovBranch {
    BoundaryFreq freq;
    double eigenvalue = 0.0;
};

// All branches with angular frequency <= n_max, both longitudinal parities,
// cos and sin counted separately for n >= 1. Ascending by eigenvalue.
inline std::vector<SteklovBranch> steklov_spectrum(const CylinderDomain& d, int n_max) {
    validate_moduli(d);
    if (n_max < 1) throw Error("steklov_spectrum: n_max must be >= 1");
    std::vector<SteklovBranch> out;
    for (Sym s : {Sym::even, Sym::odd}) {
        out.push_back({BoundaryFreq{0, Wave::cos, s}, steklov_branch_eigenvalue(d, 0, s)});
        for (int n = 1; n <= n_max; ++n) {
            const double sigma = steklov_branch_eigenvalue(d, n, s);
            out.push_back({BoundaryFreq{n, Wave::cos, s}, sigma});
            out.push_back({BoundaryFreq{n, Wave::sin, s}, sigma});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const SteklovBranch& x, const SteklovBranch& y) {
        if (x.eigenvalue != y.eigenvalue) return x.eigenvalue < y.eigenvalue;
        return std::tie(x.freq.n, x.freq.s, x.freq.w) < std::tie(y.freq.n, y.freq.s, y.freq.w);
    });
    return out;
}

// Unique positive root of coth T = T, bracketed in [1/2, 2].
inline double find_T1(double tol = 1e-10) {
    return find_root([](double t) { return 1.0 / std::tanh(t) - t; }, 0.5, 2.0, tol);
}

// Spectral-gap weights of the second and fourth angular modes against the
// first: b2 = (2 tanh 2T + tanh T) / (2 tanh 2T - tanh T), b4 alike with the
// fourth mode. Both increase in T.
inline double b2(double T) {
    const double s1 = std::tanh(T);
    const double s2 = 2.0 * std::tanh(2.0 * T);
    return (s2 + s1) / (s2 - s1);
}

inline double b4(double T) {
    const double s1 = std::tanh(T);
    const double s4 = 4.0 * std::tanh(4.0 * T);
    return (s4 + s1) / (s4 - s1);
}

// Diagonal entries of the quadratic form for omega = sin(theta) - a sin(3 theta)
// on the sigma_1 eigenspace, divided by 2*pi.
inline double mu1(double a, double T) {
    return 0.5 - 0.25 * (1.0 + a) * (1.0 + a) * b2(T) - 0.25 * a * a * b4(T);
}

inline double mu2(double a, double T) {
    return -0.25 * ((1.0 - a) * (1.0 - a) * b2(T) + a * a * b4(T));
}

// Closed-form second variation of the normalized first Steklov eigenvalue
// along omega = sin(theta) - a sin(3 theta):
//   alpha(a) = 2 pi sigma_1 ((1 + a^2) + 2 min(mu1, mu2)).
inline double alpha_of_a(double a, double T) {
    const double mu = std::min(mu1(a, T), mu2(a, T));
    return two_pi * std::tanh(T) * ((1.0 + a * a) + 2.0 * mu);
}

// sigma_1 eigenspace for T < T1: eigenvalue tanh(T), even traces sin theta and
// cos theta, orthonormalized over the two boundary circles.
inline Eigenspace<CylinderDomain> sigma1_eigenspace(const CylinderDomain& d) {
    validate_moduli(d);
    if (!(d.half_length < find_T1()))
        throw NotBelowT1("sigma1_eigenspace: requires T < T1 (multiplicity-2 window)");
    Eigenspace<CylinderDomain> space;
    space.label = 1;
    space.eigenvalue = steklov_branch_eigenvalue(d, 1, Sym::even);
    space.basis.push_back(detail::unit_basis_function(d, BoundaryFreq{1, Wave::sin, Sym::even}));
    space.basis.push_back(detail::unit_basis_function(d, BoundaryFreq{1, Wave::cos, Sym::even}));
    return space;
}

// The one-parameter perturbation family sin(theta) - a sin(3 theta), even
// traces on both circles.
inline BoundaryPoly sin_family_perturbation(const CylinderDomain& d, double a) {
    BoundaryPoly p(d);
    p.add_term(BoundaryFreq{1, Wave::sin, Sym::even}, 1.0);
    p.add_term(BoundaryFreq{3, Wave::sin, Sym::even}, -a);
    return p;
}

} // namespace specvar
