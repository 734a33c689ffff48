// Copyright 2026 The seqmeas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Closed-form statistics of a measure-A-then-measure-B experiment with
// Gaussian pointers of strengths lambda_A and lambda_B.
//
// Notation used throughout: c_n = <a_n|psi>, O(m, n) = <b_m|a_n>. The joint
// outcome density is
//
//   P(a, b) = p_A p_B sum_{n,n'} conj(c_n') c_n exp(-lambda_A [(a-a_n)^2 + (a-a_n')^2])
//             * sum_m exp(-2 lambda_B (b-b_m)^2) O(m,n) conj(O(m,n'))
//
// with p_X = sqrt(2 lambda_X / pi). Every outcome integral below is done with
// the Gaussian identities rather than quadrature. Complex sums are carried to
// the end and their realness is asserted, not forced.

#include "seqmeas/core.hpp"
#include "seqmeas/kraus.hpp"

#include <numbers>
#include <optional>
#include <vector>

namespace seqmeas {

/// Imaginary residue allowed on a quantity that is real by construction.
inline constexpr double kRealnessTolerance = 1e-10;

/// A pre-selected state, two observables (as spectra) and the strength pair.
class SequentialSetup {
   public:
    SequentialSetup(QuantumState state, Spectrum spec_a, Spectrum spec_b, double lambda_a, double lambda_b)
        : state_(std::move(state)),
          spec_a_(std::move(spec_a)),
          spec_b_(std::move(spec_b)),
          lambda_a_(lambda_a),
          lambda_b_(lambda_b) {
        detail::require_same_dim(state_.dim(), spec_a_.dim(), "SequentialSetup (state vs A)");
        detail::require_same_dim(spec_a_.dim(), spec_b_.dim(), "SequentialSetup (A vs B)");
        validate_strength(lambda_a_, "lambda_a");
        validate_strength(lambda_b_, "lambda_b");
        overlap_ = overlap_matrix(spec_a_, spec_b_);
        coefficients_ = spec_a_.coefficients(state_.amplitudes());
    }

    SequentialSetup with_strengths(double lambda_a, double lambda_b) const {
        return SequentialSetup(state_, spec_a_, spec_b_, lambda_a, lambda_b);
    }

    const QuantumState &state() const { return state_; }
    const Spectrum &spec_a() const { return spec_a_; }
    const Spectrum &spec_b() const { return spec_b_; }
    double lambda_a() const { return lambda_a_; }
    double lambda_b() const { return lambda_b_; }
    std::ptrdiff_t dim() const { return state_.dim(); }

    const OverlapMatrix &overlap() const { return overlap_; }
    /// <a_n|psi>.
    const CVector &coefficients() const { return coefficients_; }

   private:
    QuantumState state_;
    Spectrum spec_a_;
    Spectrum spec_b_;
    double lambda_a_;
    double lambda_b_;
    OverlapMatrix overlap_;
    CVector coefficients_;
};

namespace detail {

/// sum_{n,n'} conj(u_n') K(n', n) v_n, asserted real.
inline double real_form(const CVector &u, const CMatrix &kernel, const CVector &v, const char *what) {
    return assert_real(u.dot(kernel * v), kRealnessTolerance, what);
}

/// O^dagger diag(weights) O, i.e. sum_m w_m conj(O(m,n')) O(m,n) at (n', n).
inline CMatrix weighted_overlap(const OverlapMatrix &overlap, const RVector &weights) {
    return overlap.entries.adjoint() * weights.cast<Complex>().asDiagonal() * overlap.entries;
}

/// Integral of sqrt(2 lambda/pi) exp(-2 lambda (x - center)^2) over [lo, hi].
inline double gaussian_interval_mass(double lambda, double center, double lo, double hi) {
    double s = std::sqrt(2.0 * lambda);
    double x0 = s * (lo - center);
    double x1 = s * (hi - center);
    if (x0 > 0.0) {
        return 0.5 * (std::erfc(x0) - std::erfc(x1));
    }
    if (x1 < 0.0) {
        return 0.5 * (std::erfc(-x1) - std::erfc(-x0));
    }
    return 0.5 * (std::erf(x1) - std::erf(x0));
}

/// exp(-lambda (a_n - a_n')^2 / 2), the coherence factor left after the A
/// outcome is integrated out.
inline CMatrix decoherence_kernel(const RVector &eigenvalues, double lambda) {
    std::ptrdiff_t d = eigenvalues.size();
    CMatrix k(d, d);
    for (std::ptrdiff_t j = 0; j < d; ++j) {
        for (std::ptrdiff_t i = 0; i < d; ++i) {
            double gap = eigenvalues(i) - eigenvalues(j);
            k(i, j) = std::exp(-0.5 * lambda * gap * gap);
        }
    }
    return k;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Single measurement
// ---------------------------------------------------------------------------

/// Mean of a^k over the pointer distribution of one measurement, k in {1, 2}.
/// k = 1 is independent of lambda; k = 2 picks up the pointer width 1/(2 lambda).
inline double moment_single(const QuantumState &state, const Spectrum &spec, double lambda, int k) {
    validate_strength(lambda);
    detail::require_same_dim(state.dim(), spec.dim(), "moment_single");
    RVector weights = spec.coefficients(state.amplitudes()).cwiseAbs2();
    switch (k) {
        case 1:
            return weights.dot(spec.eigenvalues);
        case 2:
            return weights.dot(spec.eigenvalues.cwiseAbs2()) + 1.0 / (4.0 * lambda);
        default:
            throw ValidationError(detail::concat("moment_single supports k in {1, 2}, got ", k));
    }
}

/// sqrt(Var_psi(A) + 1/(4 lambda)); the pointer variance of the outcome
/// density sqrt(2 lambda/pi) exp(-2 lambda (a - a_n)^2).
inline double std_single(const QuantumState &state, const Spectrum &spec, double lambda) {
    validate_strength(lambda);
    detail::require_same_dim(state.dim(), spec.dim(), "std_single");
    RVector weights = spec.coefficients(state.amplitudes()).cwiseAbs2();
    double mean = weights.dot(spec.eigenvalues);
    double variance = weights.dot((spec.eigenvalues.array() - mean).square().matrix());
    return std::sqrt(variance + 1.0 / (4.0 * lambda));
}

// ---------------------------------------------------------------------------
// Joint outcome density
// ---------------------------------------------------------------------------

inline double joint_density(const SequentialSetup &setup, double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw ValidationError("joint_density outcomes must be finite");
    }
    const RVector &an = setup.spec_a().eigenvalues;
    const RVector &bm = setup.spec_b().eigenvalues;
    RVector ga = (-setup.lambda_a() * (an.array() - a).square()).exp().matrix();
    RVector gb = (-2.0 * setup.lambda_b() * (bm.array() - b).square()).exp().matrix();
    CVector u = ga.cast<Complex>().cwiseProduct(setup.coefficients());
    CMatrix kernel = detail::weighted_overlap(setup.overlap(), gb);
    double prefactor = pointer_peak(setup.lambda_a()) * pointer_peak(setup.lambda_b());
    return prefactor * detail::real_form(u, kernel, u, "joint_density");
}

/// Probability that (a, b) lands in [a_lo, a_hi] x [b_lo, b_hi], exact.
inline double joint_bin_mass(const SequentialSetup &setup, double a_lo, double a_hi, double b_lo, double b_hi) {
    const RVector &an = setup.spec_a().eigenvalues;
    const RVector &bm = setup.spec_b().eigenvalues;
    std::ptrdiff_t d = setup.dim();
    RVector mass_b(d);
    for (std::ptrdiff_t m = 0; m < d; ++m) {
        mass_b(m) = detail::gaussian_interval_mass(setup.lambda_b(), bm(m), b_lo, b_hi);
    }
    CMatrix kernel = detail::weighted_overlap(setup.overlap(), mass_b);
    for (std::ptrdiff_t n = 0; n < d; ++n) {
        for (std::ptrdiff_t np = 0; np < d; ++np) {
            double gap = an(n) - an(np);
            double center = 0.5 * (an(n) + an(np));
            kernel(np, n) *= std::exp(-0.5 * setup.lambda_a() * gap * gap) *
                             detail::gaussian_interval_mass(setup.lambda_a(), center, a_lo, a_hi);
        }
    }
    const CVector &c = setup.coefficients();
    return detail::real_form(c, kernel, c, "joint_bin_mass");
}

/// Density of the first pointer alone, with the b outcome integrated out.
inline double marginal_a_density(const SequentialSetup &setup, double a) {
    const RVector &an = setup.spec_a().eigenvalues;
    RVector ga = (-setup.lambda_a() * (an.array() - a).square()).exp().matrix();
    CVector u = ga.cast<Complex>().cwiseProduct(setup.coefficients());
    // integral over b of p_B exp(-2 lambda_B (b - b_m)^2) is 1 for every m
    CMatrix kernel = detail::weighted_overlap(setup.overlap(), RVector::Ones(setup.dim()));
    return pointer_peak(setup.lambda_a()) * detail::real_form(u, kernel, u, "marginal_a_density");
}

/// Density of the second pointer alone, with the a outcome integrated out.
inline double marginal_b_density(const SequentialSetup &setup, double b) {
    const RVector &bm = setup.spec_b().eigenvalues;
    RVector gb = (-2.0 * setup.lambda_b() * (bm.array() - b).square()).exp().matrix();
    CMatrix kernel = detail::weighted_overlap(setup.overlap(), gb)
                         .cwiseProduct(detail::decoherence_kernel(setup.spec_a().eigenvalues, setup.lambda_a()));
    const CVector &c = setup.coefficients();
    return pointer_peak(setup.lambda_b()) * detail::real_form(c, kernel, c, "marginal_b_density");
}

/// Two projective measurements: |<a_n0|psi>|^2 |<a_n0|b_m0>|^2.
inline double joint_density_strong(const QuantumState &state, const Spectrum &spec_a, const Spectrum &spec_b,
                                   std::ptrdiff_t n0, std::ptrdiff_t m0) {
    detail::require_same_dim(state.dim(), spec_a.dim(), "joint_density_strong");
    detail::require_same_dim(spec_a.dim(), spec_b.dim(), "joint_density_strong");
    if (n0 < 0 || n0 >= spec_a.dim() || m0 < 0 || m0 >= spec_b.dim()) {
        throw ValidationError(detail::concat("eigen-index out of range: n0 = ", n0, ", m0 = ", m0));
    }
    Complex cn = spec_a.eigenvectors.col(n0).dot(state.amplitudes());
    Complex overlap = spec_b.eigenvectors.col(m0).dot(spec_a.eigenvectors.col(n0));
    return std::norm(cn) * std::norm(overlap);
}

/// First-order expansion of P(a, b) in both strengths:
///
///   P ~ (2/pi) sqrt(lambda_A lambda_B) (1 - lambda_A S_A - lambda_B S_B)
///
/// For equal strengths the bracket is lambda - lambda^2 C with C = S_A + S_B,
/// whose vertex sits at lambda = 1/(2C).
struct WeakExpansionReport {
    double c_coefficient;
    /// 1/(2C); empty when C <= 0.
    std::optional<double> optimal_lambda;
    /// (2/pi) sqrt(lambda_A lambda_B) at the setup's strengths.
    double leading_density;
    /// Coefficients of lambda_A and lambda_B inside the bracket.
    double a_coefficient;
    double b_coefficient;

    double truncated_density(double lambda_a, double lambda_b) const {
        double lead = (2.0 / std::numbers::pi) * std::sqrt(lambda_a * lambda_b);
        return lead * (1.0 - lambda_a * a_coefficient - lambda_b * b_coefficient);
    }
};

inline WeakExpansionReport weak_expansion(const SequentialSetup &setup, double a, double b) {
    const RVector &an = setup.spec_a().eigenvalues;
    const RVector &bm = setup.spec_b().eigenvalues;
    std::ptrdiff_t d = setup.dim();
    RVector da = (an.array() - a).square().matrix();
    RVector db = (2.0 * (bm.array() - b).square()).matrix();

    CMatrix a_kernel = detail::weighted_overlap(setup.overlap(), RVector::Ones(d));
    for (std::ptrdiff_t n = 0; n < d; ++n) {
        for (std::ptrdiff_t np = 0; np < d; ++np) {
            a_kernel(np, n) *= da(n) + da(np);
        }
    }
    CMatrix b_kernel = detail::weighted_overlap(setup.overlap(), db);
    const CVector &c = setup.coefficients();

    WeakExpansionReport report{};
    report.a_coefficient = detail::real_form(c, a_kernel, c, "weak_expansion (a)");
    report.b_coefficient = detail::real_form(c, b_kernel, c, "weak_expansion (b)");
    report.c_coefficient = report.a_coefficient + report.b_coefficient;
    if (report.c_coefficient > 0.0) {
        report.optimal_lambda = 1.0 / (2.0 * report.c_coefficient);
    }
    report.leading_density = (2.0 / std::numbers::pi) * std::sqrt(setup.lambda_a() * setup.lambda_b());
    return report;
}

/// Integral of P(a, b) over both outcomes. Both pointer integrals are done in
/// closed form; the remaining sum collapses to <psi|psi> by completeness.
inline double total_probability(const SequentialSetup &setup) {
    double la = setup.lambda_a();
    double lb = setup.lambda_b();
    // p_X * integral exp(-2 lambda_X xi^2) d xi, both equal to 1
    double a_integral = pointer_peak(la) * std::sqrt(std::numbers::pi / (2.0 * la));
    double b_integral = pointer_peak(lb) * std::sqrt(std::numbers::pi / (2.0 * lb));
    CMatrix kernel = detail::weighted_overlap(setup.overlap(), RVector::Constant(setup.dim(), b_integral))
                         .cwiseProduct(detail::decoherence_kernel(setup.spec_a().eigenvalues, la));
    const CVector &c = setup.coefficients();
    return a_integral * detail::real_form(c, kernel, c, "total_probability");
}

// ---------------------------------------------------------------------------
// Sequential means
// ---------------------------------------------------------------------------

/// Mean of the first pointer after both measurements. Integrating b first
/// leaves <a_n'|a_n> = delta, so the result is sum_n a_n |c_n|^2 for any
/// strengths.
inline double mean_a_sequential(const SequentialSetup &setup) {
    const RVector &an = setup.spec_a().eigenvalues;
    std::ptrdiff_t d = setup.dim();
    // integral a p_A exp(-lambda_A[(a-a_n)^2 + (a-a_n')^2]) da
    //   = exp(-lambda_A (a_n-a_n')^2/2) (a_n + a_n')/2
    CMatrix kernel = detail::weighted_overlap(setup.overlap(), RVector::Ones(d))
                         .cwiseProduct(detail::decoherence_kernel(an, setup.lambda_a()));
    for (std::ptrdiff_t n = 0; n < d; ++n) {
        for (std::ptrdiff_t np = 0; np < d; ++np) {
            kernel(np, n) *= 0.5 * (an(n) + an(np));
        }
    }
    const CVector &c = setup.coefficients();
    return detail::real_form(c, kernel, c, "mean_a_sequential");
}

/// Mean of the second pointer:
///   sum_{n,n'} exp(-lambda_A (a_n - a_n')^2 / 2) conj(c_n') <a_n'|B|a_n> c_n.
/// Depends on lambda_A only.
inline double mean_b_sequential(const QuantumState &state, const Spectrum &spec_a, const Spectrum &spec_b,
                                double lambda_a) {
    validate_strength(lambda_a, "lambda_a");
    detail::require_same_dim(state.dim(), spec_a.dim(), "mean_b_sequential");
    OverlapMatrix overlap = overlap_matrix(spec_a, spec_b);
    CMatrix b_in_a = detail::weighted_overlap(overlap, spec_b.eigenvalues);
    CMatrix kernel = b_in_a.cwiseProduct(detail::decoherence_kernel(spec_a.eigenvalues, lambda_a));
    CVector c = spec_a.coefficients(state.amplitudes());
    return detail::real_form(c, kernel, c, "mean_b_sequential");
}

inline double mean_b_sequential(const SequentialSetup &setup) {
    return mean_b_sequential(setup.state(), setup.spec_a(), setup.spec_b(), setup.lambda_a());
}

/// lambda_A -> infinity: sum_n |c_n|^2 <a_n|B|a_n>.
inline double mean_b_strong_limit(const QuantumState &state, const Spectrum &spec_a, const Observable &observable_b) {
    detail::require_same_dim(state.dim(), spec_a.dim(), "mean_b_strong_limit");
    detail::require_same_dim(spec_a.dim(), observable_b.dim(), "mean_b_strong_limit");
    RVector weights = spec_a.coefficients(state.amplitudes()).cwiseAbs2();
    CVector diag = spec_a.in_basis(observable_b.matrix()).diagonal();
    Complex sum = weights.cast<Complex>().dot(diag);
    return detail::assert_real(sum, kRealnessTolerance, "mean_b_strong_limit");
}

/// Coefficient of lambda_A in mean_b_sequential - <B> as lambda_A -> 0,
/// from the commutator form
///   (1/2) sum_n <psi| [B, A^2] + 2 a_n [A, B] |a_n> <a_n|psi>.
inline double weak_slope(const QuantumState &state, const Spectrum &spec_a, const Observable &observable_b) {
    detail::require_same_dim(state.dim(), spec_a.dim(), "weak_slope");
    detail::require_same_dim(spec_a.dim(), observable_b.dim(), "weak_slope");
    CMatrix a = spec_a.reconstruct();
    const CMatrix &b = observable_b.matrix();
    CMatrix b_a2 = commutator(b, a * a);
    CMatrix a_b = commutator(a, b);
    const CVector &psi = state.amplitudes();
    CVector c = spec_a.coefficients(psi);
    CVector bra = (psi.adjoint() * b_a2 * spec_a.eigenvectors).transpose();
    CVector bra_ab = (psi.adjoint() * a_b * spec_a.eigenvectors).transpose();
    Complex sum = 0.0;
    double magnitude = 0.0;
    for (std::ptrdiff_t n = 0; n < spec_a.dim(); ++n) {
        Complex term = (bra(n) + 2.0 * spec_a.eigenvalues(n) * bra_ab(n)) * c(n);
        sum += term;
        magnitude += std::abs(term);
    }
    return 0.5 * detail::assert_real(sum, kRealnessTolerance * std::max(1.0, magnitude), "weak_slope");
}

/// The same coefficient read off the Taylor expansion of mean_b_sequential:
///   -(1/2) sum_{n,n'} (a_n - a_n')^2 conj(c_n') <a_n'|B|a_n> c_n.
inline double weak_slope_taylor(const QuantumState &state, const Spectrum &spec_a, const Observable &observable_b) {
    detail::require_same_dim(state.dim(), spec_a.dim(), "weak_slope_taylor");
    detail::require_same_dim(spec_a.dim(), observable_b.dim(), "weak_slope_taylor");
    CMatrix kernel = spec_a.in_basis(observable_b.matrix());
    const RVector &an = spec_a.eigenvalues;
    for (std::ptrdiff_t n = 0; n < an.size(); ++n) {
        for (std::ptrdiff_t np = 0; np < an.size(); ++np) {
            double gap = an(n) - an(np);
            kernel(np, n) *= gap * gap;
        }
    }
    CVector c = spec_a.coefficients(state.amplitudes());
    return -0.5 * detail::real_form(c, kernel, c, "weak_slope_taylor");
}

/// Per eigenstate n: || [exp(-(lambda_A/2)(a_n - A)^2), B] |a_n> ||.
inline std::vector<double> condition4_check(const Spectrum &spec_a, const Observable &observable_b, double lambda_a) {
    validate_strength(lambda_a, "lambda_a");
    detail::require_same_dim(spec_a.dim(), observable_b.dim(), "condition4_check");
    CMatrix b_in_a = spec_a.in_basis(observable_b.matrix());
    const RVector &an = spec_a.eigenvalues;
    std::vector<double> norms(static_cast<std::size_t>(an.size()));
    for (std::ptrdiff_t n = 0; n < an.size(); ++n) {
        double sq = 0.0;
        for (std::ptrdiff_t k = 0; k < an.size(); ++k) {
            double gap = an(k) - an(n);
            // the Gaussian is 1 on |a_n> itself
            double g = std::expm1(-0.5 * lambda_a * gap * gap);
            sq += std::norm(g * b_in_a(k, n));
        }
        norms[static_cast<std::size_t>(n)] = std::sqrt(sq);
    }
    return norms;
}

inline bool condition4_holds(const std::vector<double> &norms, double threshold = 1e-10) {
    return std::any_of(norms.begin(), norms.end(), [&](double v) { return v > threshold; });
}

}  // namespace seqmeas
