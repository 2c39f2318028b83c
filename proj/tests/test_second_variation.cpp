#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "specvar/second_variation.hpp"

using namespace specvar;

namespace {

constexpr double four_pi_sq = two_pi * two_pi;

TorusPoly torus_term(const TorusDomain& d, int m, int n, Wave w, double c) {
    TorusPoly p(d);
    p.add_term(TorusFreq{m, n, w}, c);
    return p;
}

} // namespace

TEST_CASE("check_admissibility: transverse sine is admissible, constants are not") {
    const TorusDomain d{0.5, 1.0, 1.0};
    auto ek = lambda1_eigenspace(d);
    CHECK(check_admissibility(axial_perturbation(d), ek) == 0.0);

    auto one = TorusPoly::constant(d, 1.0);
    CHECK(check_admissibility(one, ek) == doctest::Approx(1.0).epsilon(1e-14));

    const CylinderDomain c{1.0, 1.0};
    CHECK(check_admissibility(sin_family_perturbation(c, 0.2), sigma1_eigenspace(c)) == 0.0);
}

TEST_CASE("assemble_quadratic_form: torus (0.5, 1.0) gives diag(1/6, -5/6)") {
    const TorusDomain d{0.5, 1.0, 1.0};
    auto omega = axial_perturbation(d);
    auto data = torus_lambda1_critical_data(d, omega);

    CHECK(data.spectrum.size() == 3); // eigenvalues 0, lambda_1, 4 lambda_1
    CHECK(data.critical_index == 1);
    CHECK(data.spectrum[0].eigenvalue == doctest::Approx(0.0));
    CHECK(data.spectrum[2].eigenvalue == doctest::Approx(4.0 * four_pi_sq).epsilon(1e-13));

    auto q = assemble_quadratic_form(omega, data);
    CHECK(std::abs(q.matrix(0, 0) - 1.0 / 6.0) <= 1e-12);
    CHECK(std::abs(q.matrix(1, 1) + 5.0 / 6.0) <= 1e-12);
    CHECK(std::abs(q.matrix(0, 1)) <= 1e-12);
    CHECK(q.mu == doctest::Approx(-5.0 / 6.0).epsilon(1e-13));
    // Minimizer is the cos direction (second basis vector), up to sign.
    CHECK(std::abs(std::abs(q.minimizer[1]) - 1.0) <= 1e-10);
    CHECK(std::abs(q.minimizer[0]) <= 1e-10);

    // Ledger: weight -1 on the zero eigenvalue, 5/3 on 4 lambda_1.
    REQUIRE(q.ledger.size() == 2);
    CHECK(q.ledger[0].eigenvalue == doctest::Approx(0.0));
    CHECK(q.ledger[0].weight == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(q.ledger[1].weight == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
    // Ledger sums reproduce the matrix.
    for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s) {
            double sum = 0.0;
            for (const auto& entry : q.ledger) sum -= entry.weight * entry.gram(r, s);
            CHECK(std::abs(sum - q.matrix(r, s)) <= 1e-12);
        }
}

TEST_CASE("quadratic form sign structure and mu bound from the ledger") {
    const TorusDomain d{0.3, 1.2, 1.0};
    auto omega = axial_perturbation(d);
    auto data = torus_lambda1_critical_data(d, omega);
    auto q = assemble_quadratic_form(omega, data);
    for (const auto& entry : q.ledger) {
        if (entry.eigenvalue > data.eigenvalue) {
            CHECK(entry.weight > 0.0); // contributes non-positively
        } else {
            CHECK(entry.weight < 0.0); // below lambda_k: non-negative contribution
        }
    }
    for (int i = 0; i < q.matrix.order(); ++i) CHECK(q.mu <= q.matrix(i, i) + 1e-14);
}

TEST_CASE("assemble_quadratic_form: cylinder matches the closed-form mu1, mu2") {
    const CylinderDomain d{1.0, 1.0};
    const double a = 0.2;
    auto omega = sin_family_perturbation(d, a);
    auto data = cylinder_sigma1_critical_data(d, omega);
    auto q = assemble_quadratic_form(omega, data);

    // Orthonormal basis [sin, cos]: diagonal entries are mu1 and mu2.
    CHECK(q.matrix(0, 0) == doctest::Approx(mu1(a, 1.0)).epsilon(1e-12));
    CHECK(q.matrix(1, 1) == doctest::Approx(mu2(a, 1.0)).epsilon(1e-12));
    CHECK(std::abs(q.matrix(0, 1)) <= 1e-13);

    // On the unnormalized traces (norm^2 = 2 pi) the form evaluates to
    // 2 pi mu_i: quadratic scaling of the form.
    CHECK(two_pi * q.matrix(0, 0) == doctest::Approx(two_pi * mu1(a, 1.0)).epsilon(1e-12));

    // A couple more grid points against the closed forms.
    for (double aa : {0.0, 0.35}) {
        for (double T : {0.6, 1.1}) {
            const CylinderDomain dd{T, 1.0};
            auto om = sin_family_perturbation(dd, aa);
            auto qq = assemble_quadratic_form(om, cylinder_sigma1_critical_data(dd, om));
            CHECK(qq.matrix(0, 0) == doctest::Approx(mu1(aa, T)).epsilon(1e-11));
            CHECK(qq.matrix(1, 1) == doctest::Approx(mu2(aa, T)).epsilon(1e-11));
            CHECK(std::abs(qq.matrix(0, 1)) <= 1e-12);
        }
    }
}

TEST_CASE("assemble_quadratic_form: zero perturbation gives the zero form") {
    const TorusDomain d{0.5, 1.0, 1.0};
    TorusPoly zero(d);
    auto data = torus_lambda1_critical_data(d, zero);
    auto q = assemble_quadratic_form(zero, data);
    CHECK(q.matrix.frobenius_norm() == 0.0);
    CHECK(q.mu == 0.0);
}

TEST_CASE("second_variation: torus alpha = lambda_1 * area / 6 across moduli") {
    for (auto [a, b] : std::vector<std::pair<double, double>>{{0.5, 1.0}, {0.3, 1.2}, {0.0, 1.4}}) {
        const TorusDomain d{a, b, 1.0};
        auto omega = axial_perturbation(d);
        auto sv = second_variation(omega, torus_lambda1_critical_data(d, omega));
        const double lambda1 = four_pi_sq / (b * b);
        CHECK(sv.alpha == doctest::Approx(lambda1 * b / 6.0).epsilon(1e-12));
        CHECK(sv.mu == doctest::Approx(-5.0 / 6.0).epsilon(1e-12));
        CHECK(sv.omega_norm_sq == doctest::Approx(b).epsilon(1e-13));
        // Branch curvatures lambda_1 * {-5/6, 1/6}; normalized branches
        // lambda_1 * b * {1/6, 7/6}.
        REQUIRE(sv.branch_curvatures.size() == 2);
        CHECK(sv.branch_curvatures[0] == doctest::Approx(-lambda1 * 5.0 / 6.0).epsilon(1e-12));
        CHECK(sv.branch_curvatures[1] == doctest::Approx(lambda1 / 6.0).epsilon(1e-12));
        CHECK(sv.normalized_branch_curvatures[0] == doctest::Approx(lambda1 * b / 6.0).epsilon(1e-12));
        CHECK(sv.normalized_branch_curvatures[1] == doctest::Approx(lambda1 * b * 7.0 / 6.0).epsilon(1e-12));
        // alpha is the smallest normalized branch curvature.
        CHECK(sv.alpha == doctest::Approx(sv.normalized_branch_curvatures[0]).epsilon(1e-13));
    }
}

TEST_CASE("second_variation: cylinder alpha matches the closed form and is positive at a = 0.2") {
    for (double T : {0.5, 1.0, 1.15}) {
        const CylinderDomain d{T, 1.0};
        auto omega = sin_family_perturbation(d, 0.2);
        auto sv = second_variation(omega, cylinder_sigma1_critical_data(d, omega));
        CHECK(sv.alpha == doctest::Approx(alpha_of_a(0.2, T)).epsilon(1e-11));
        CHECK(sv.alpha > 0.0);
    }
    // T = 1, a = 0.2 headline value: 2 pi tanh(1) ((1 + 0.04) + 2 min(mu1, mu2)).
    const CylinderDomain d{1.0, 1.0};
    auto omega = sin_family_perturbation(d, 0.2);
    auto sv = second_variation(omega, cylinder_sigma1_critical_data(d, omega));
    const double expected = two_pi * std::tanh(1.0) * (1.04 + 2.0 * std::min(mu1(0.2, 1.0), mu2(0.2, 1.0)));
    CHECK(sv.alpha == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("second_variation: zero perturbation gives alpha = 0") {
    const TorusDomain d{0.5, 1.0, 1.0};
    TorusPoly zero(d);
    auto sv = second_variation(zero, torus_lambda1_critical_data(d, zero));
    CHECK(sv.alpha == 0.0);
}

TEST_CASE("alpha is invariant under metric rescaling (unit-area bridge)") {
    for (double scale : {1.0, 2.7}) {
        // Torus: raw metric vs rescaled metric, same perturbation function.
        const TorusDomain raw{0.3, 1.2, 1.0};
        const TorusDomain scaled{0.3, 1.2, scale / 1.2}; // scale = 1/b is the unit-area metric
        auto sv_raw = second_variation(axial_perturbation(raw), torus_lambda1_critical_data(raw, axial_perturbation(raw)));
        auto sv_scaled = second_variation(axial_perturbation(scaled),
                                          torus_lambda1_critical_data(scaled, axial_perturbation(scaled)));
        CHECK(sv_scaled.alpha == doctest::Approx(sv_raw.alpha).epsilon(1e-10));
        CHECK(sv_scaled.mu == doctest::Approx(sv_raw.mu).epsilon(1e-10));
    }
    // Cylinder: raw vs unit boundary length (sqrt(scale) * 4 pi = 1).
    const CylinderDomain raw{1.0, 1.0};
    const CylinderDomain scaled{1.0, 1.0 / (16.0 * std::numbers::pi * std::numbers::pi)};
    CHECK(boundary_length(scaled) == doctest::Approx(1.0).epsilon(1e-13));
    auto sv_raw = second_variation(sin_family_perturbation(raw, 0.2),
                                   cylinder_sigma1_critical_data(raw, sin_family_perturbation(raw, 0.2)));
    auto sv_scaled = second_variation(sin_family_perturbation(scaled, 0.2),
                                      cylinder_sigma1_critical_data(scaled, sin_family_perturbation(scaled, 0.2)));
    CHECK(sv_scaled.alpha == doctest::Approx(sv_raw.alpha).epsilon(1e-10));
}

TEST_CASE("quadratic homogeneity: Q_{s omega} = s^2 Q_omega") {
    const TorusDomain d{0.5, 1.0, 1.0};
    auto omega = axial_perturbation(d);
    const double s = 0.37;
    auto q1 = assemble_quadratic_form(omega, torus_lambda1_critical_data(d, omega));
    auto omega_s = s * omega;
    auto qs = assemble_quadratic_form(omega_s, torus_lambda1_critical_data(d, omega_s));
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            CHECK(std::abs(qs.matrix(r, c) - s * s * q1.matrix(r, c)) <= 1e-12);
}

TEST_CASE("parallelogram law: Q is exactly quadratic in omega") {
    // Q_{w1 + w2} + Q_{w1 - w2} == 2 Q_{w1} + 2 Q_{w2} entrywise, provided all
    // four directions are admissible (the condition is linear in omega).
    const TorusDomain d{0.5, 1.0, 1.0};
    auto w1 = axial_perturbation(d);
    TorusPoly w2(d);
    w2.add_term(TorusFreq{1, 0, Wave::cos}, 0.7);
    w2.add_term(TorusFreq{1, 2, Wave::sin}, 0.3);

    auto q_of = [&](const TorusPoly& w) {
        return assemble_quadratic_form(w, torus_lambda1_critical_data(d, w));
    };
    auto q1 = q_of(w1);
    auto q2 = q_of(w2);
    auto qp = q_of(w1 + w2);
    auto qm = q_of(w1 - w2);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            const double lhs = qp.matrix(r, c) + qm.matrix(r, c);
            const double rhs = 2.0 * (q1.matrix(r, c) + q2.matrix(r, c));
            CHECK(std::abs(lhs - rhs) <= 1e-12);
        }
}

TEST_CASE("branch consistency: curvatures sum to lambda_k * trace(Q)") {
    const CylinderDomain d{0.9, 1.0};
    auto omega = sin_family_perturbation(d, 0.25);
    auto data = cylinder_sigma1_critical_data(d, omega);
    auto sv = second_variation(omega, data);
    double sum = 0.0;
    for (double c : sv.branch_curvatures) sum += c;
    CHECK(sum == doctest::Approx(data.eigenvalue * sv.qform.matrix.trace()).epsilon(1e-12));
}

TEST_CASE("eigenfunction_first_variation: transverse sine expansion") {
    for (double b : {1.0, 1.2}) {
        const TorusDomain d{0.5, b, 1.0};
        auto omega = axial_perturbation(d);
        auto data = torus_lambda1_critical_data(d, omega);
        const auto& u1 = data.critical_space().basis[0]; // sqrt(2/b) sin
        auto du = eigenfunction_first_variation(omega, u1, data);

        // Expected: -(1/sqrt(b)) * (1 + (1/3) cos(4 pi y / b)).
        CHECK(du.coefficient({0, 0, Wave::cos}) == doctest::Approx(-1.0 / std::sqrt(b)).epsilon(1e-13));
        CHECK(du.coefficient({0, 2, Wave::cos}) == doctest::Approx(-1.0 / (3.0 * std::sqrt(b))).epsilon(1e-13));
        CHECK(du.terms().size() == 2);

        // du is orthogonal to the critical space.
        for (const auto& v : data.critical_space().basis) CHECK(std::abs(inner(du, v)) <= 1e-14);
    }
}

TEST_CASE("eigenfunction_first_variation: zero perturbation, wrong space, admissibility") {
    const TorusDomain d{0.5, 1.0, 1.0};
    TorusPoly zero(d);
    auto data0 = torus_lambda1_critical_data(d, zero);
    auto du = eigenfunction_first_variation(zero, data0.critical_space().basis[0], data0);
    CHECK(du.is_zero());

    auto omega = axial_perturbation(d);
    auto data = torus_lambda1_critical_data(d, omega);
    auto stranger = torus_term(d, 1, 0, Wave::cos, 1.0);
    CHECK_THROWS_AS(eigenfunction_first_variation(omega, stranger, data), Error);

    auto one = TorusPoly::constant(d, 1.0);
    CHECK_THROWS_AS(eigenfunction_first_variation(one, data.critical_space().basis[0], data),
                    NotAdmissible);
}

TEST_CASE("engine errors: NotAdmissible, IncompleteSpectrum, DegenerateGap") {
    const TorusDomain d{0.5, 1.0, 1.0};
    auto omega = axial_perturbation(d);
    auto data = torus_lambda1_critical_data(d, omega);

    // Constants violate the admissibility integral.
    auto one = TorusPoly::constant(d, 1.0);
    CHECK_THROWS_AS(assemble_quadratic_form(one, data), NotAdmissible);

    // Drop the top eigenspace: omega * u has nowhere to project.
    auto truncated = data;
    truncated.spectrum.pop_back();
    CHECK_THROWS_AS(assemble_quadratic_form(omega, truncated), IncompleteSpectrum);

    // A distinct ambient label within the merge tolerance of lambda_k blows up
    // the spectral-gap weight and must abort.
    auto degenerate = data;
    Eigenspace<TorusDomain> bogus;
    bogus.eigenvalue = data.eigenvalue * (1.0 + 1e-12);
    bogus.label = 99;
    bogus.basis.push_back(detail::unit_basis_function(d, TorusFreq{2, 0, Wave::cos}));
    degenerate.spectrum.push_back(bogus);
    CHECK_THROWS_AS(assemble_quadratic_form(omega, degenerate), DegenerateGap);
}
