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

// Gaussian-pointer Kraus operators
//
//     K_a = (2 lambda / pi)^{1/4} exp(-lambda (a - A)^2)
//
// applied in the eigenbasis of A, where the operator is diagonal.

#include "seqmeas/core.hpp"

#include <numbers>

namespace seqmeas {

/// Densities below this are treated as unreachable outcomes by collapse().
inline constexpr double kDensityFloor = 1e-300;

inline void validate_strength(double lambda, const char *what = "lambda") {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ValidationError(detail::concat(what, " must be strictly positive and finite, got ", lambda));
    }
}

struct KrausParams {
    double lambda;
    double outcome;

    void validate() const {
        validate_strength(lambda);
        if (!std::isfinite(outcome)) {
            throw ValidationError(detail::concat("pointer outcome must be finite, got ", outcome));
        }
    }
};

/// (2 lambda / pi)^{1/2}, the peak height of a unit-weight pointer density.
inline double pointer_peak(double lambda) { return std::sqrt(2.0 * lambda / std::numbers::pi); }

namespace detail {

/// Eigenbasis coefficients of K_a|psi>, rescaled by exp(lambda * shift) where
/// shift = min_n (a - a_n)^2 so the largest Gaussian factor is exactly 1.
struct ShiftedKraus {
    CVector coefficients;
    double shift;
};

inline ShiftedKraus shifted_kraus(const CVector &eigen_coefficients, const RVector &eigenvalues,
                                  const KrausParams &params) {
    RVector sq = (eigenvalues.array() - params.outcome).square().matrix();
    double shift = sq.minCoeff();
    RVector gauss = (-params.lambda * (sq.array() - shift)).exp().matrix();
    return ShiftedKraus{gauss.cast<Complex>().cwiseProduct(eigen_coefficients), shift};
}

}  // namespace detail

/// K_a|psi>, unnormalized, in the original basis.
inline CVector kraus_apply(const QuantumState &state, const Spectrum &spec, const KrausParams &params) {
    params.validate();
    detail::require_same_dim(state.dim(), spec.dim(), "kraus_apply");
    RVector gauss = (-params.lambda * (spec.eigenvalues.array() - params.outcome).square()).exp().matrix();
    CVector coeff = spec.coefficients(state.amplitudes());
    return std::pow(2.0 * params.lambda / std::numbers::pi, 0.25) *
           (spec.eigenvectors * gauss.cast<Complex>().cwiseProduct(coeff));
}

/// <Psi_A(a)|Psi_A(a)> = sqrt(2 lambda / pi) sum_n exp(-2 lambda (a - a_n)^2) |<a_n|psi>|^2.
inline double outcome_density(const QuantumState &state, const Spectrum &spec, double lambda, double a) {
    KrausParams{lambda, a}.validate();
    detail::require_same_dim(state.dim(), spec.dim(), "outcome_density");
    RVector weights = spec.coefficients(state.amplitudes()).cwiseAbs2();
    RVector gauss = (-2.0 * lambda * (spec.eigenvalues.array() - a).square()).exp().matrix();
    return pointer_peak(lambda) * weights.dot(gauss);
}

struct CollapseResult {
    QuantumState state;
    /// || K_a |psi> ||; its square equals outcome_density at the same point.
    double norm;
};

/// Post-measurement state K_a|psi> / ||K_a|psi>||.
inline CollapseResult collapse(const QuantumState &state, const Spectrum &spec, const KrausParams &params) {
    params.validate();
    detail::require_same_dim(state.dim(), spec.dim(), "collapse");
    auto shifted = detail::shifted_kraus(spec.coefficients(state.amplitudes()), spec.eigenvalues, params);
    double shifted_norm = shifted.coefficients.norm();
    double log_norm = 0.25 * std::log(2.0 * params.lambda / std::numbers::pi) - params.lambda * shifted.shift +
                      std::log(shifted_norm);
    double density = std::exp(2.0 * log_norm);
    if (!(density > kDensityFloor)) {
        throw ValidationError(detail::concat("outcome in exponentially suppressed tail: density ", density,
                                             " at a = ", params.outcome, ", lambda = ", params.lambda));
    }
    double direct = outcome_density(state, spec, params.lambda, params.outcome);
    if (std::abs(direct - density) > 1e-12 * std::max(1.0, direct)) {
        throw ConsistencyError(detail::concat("collapse norm^2 ", density, " != outcome_density ", direct));
    }
    CVector collapsed = spec.eigenvectors * (shifted.coefficients / shifted_norm);
    return CollapseResult{QuantumState::normalized(collapsed), std::exp(log_norm)};
}

}  // namespace seqmeas
