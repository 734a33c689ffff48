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

#include "seqmeas/kraus.hpp"

#include "gtest/gtest.h"

#include "test_util.hpp"

#include <unsupported/Eigen/MatrixFunctions>

using namespace seqmeas;
using namespace seqmeas::testing;

namespace {

/// (2 lambda/pi)^{1/4} exp(-lambda (a - A)^2) built as a dense matrix
/// exponential, without going through the eigenbasis.
CMatrix dense_kraus(const CMatrix &a_matrix, double lambda, double a) {
    CMatrix shifted = a * CMatrix::Identity(a_matrix.rows(), a_matrix.cols()) - a_matrix;
    CMatrix exponent = -lambda * shifted * shifted;
    return std::pow(2.0 * lambda / std::numbers::pi, 0.25) * exponent.exp();
}

}  // namespace

TEST(kraus_apply, eigenstate_at_own_eigenvalue) {
    Rng rng(10);
    Observable h = random_hermitian(4, rng);
    Spectrum s = spectral_decompose(h);
    QuantumState eig(s.eigenvectors.col(1));
    double lambda = 0.7;
    CVector out = kraus_apply(eig, s, {lambda, s.eigenvalues(1)});
    CVector expected = std::pow(2.0 * lambda / std::numbers::pi, 0.25) * s.eigenvectors.col(1);
    EXPECT_LT((out - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(kraus_apply, strong_limit_projects) {
    Spectrum s = spectral_decompose(Observable(pauli_z()));
    QuantumState plus = QuantumState::normalized(CVector::Ones(2));
    double lambda = 20.0;
    CVector out = kraus_apply(plus, s, {lambda, 1.0});
    // eigenvalue gap 2: the |1> component is suppressed by exp(-4 lambda)
    EXPECT_LT(std::abs(out(1)) / std::abs(out(0)), std::exp(-lambda * 4.0) * 1.0001);
    EXPECT_GT(std::abs(out(0)), 0.0);
}

TEST(kraus_apply, matches_dense_matrix_exponential) {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        std::ptrdiff_t d = trial < 5 ? 2 : 5;
        Observable h = random_hermitian(d, rng);
        QuantumState psi = random_state(d, rng);
        Spectrum s = spectral_decompose(h);
        CVector out = kraus_apply(psi, s, {1.0, 0.3});
        CVector oracle = dense_kraus(h.matrix(), 1.0, 0.3) * psi.amplitudes();
        EXPECT_LT((out - oracle).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE(out.norm(), std::pow(2.0 / std::numbers::pi, 0.25) + 1e-15);
    }
}

TEST(kraus_apply, rejects_bad_parameters) {
    Spectrum s = spectral_decompose(Observable(pauli_z()));
    QuantumState psi = QuantumState::basis(2, 0);
    EXPECT_THROW(kraus_apply(psi, s, {0.0, 0.0}), ValidationError);
    EXPECT_THROW(kraus_apply(psi, s, {-1.0, 0.0}), ValidationError);
    EXPECT_THROW(kraus_apply(psi, s, {1.0, std::numeric_limits<double>::quiet_NaN()}), ValidationError);
    EXPECT_THROW(kraus_apply(psi, s, {std::numeric_limits<double>::infinity(), 0.0}), ValidationError);
    EXPECT_THROW(outcome_density(psi, s, 0.0, 0.0), ValidationError);
}

TEST(outcome_density, single_component_peak) {
    Spectrum s = spectral_decompose(Observable(pauli_z()));
    QuantumState up = QuantumState::basis(2, 0);  // eigenvalue +1
    double lambda = 3.0;
    EXPECT_NEAR(outcome_density(up, s, lambda, 1.0), std::sqrt(2.0 * lambda / std::numbers::pi), 1e-15);
    EXPECT_NEAR(outcome_density(up, s, lambda, 1.5),
                std::sqrt(2.0 * lambda / std::numbers::pi) * std::exp(-2.0 * lambda * 0.25), 1e-15);
}

TEST(outcome_density, qubit_hand_value) {
    Spectrum s = spectral_decompose(Observable(pauli_z()));
    QuantumState plus = QuantumState::normalized(CVector::Ones(2));
    // sqrt(2/pi) * (1/2) (e^{-2} + e^{-2})
    EXPECT_NEAR(outcome_density(plus, s, 1.0, 0.0), std::sqrt(2.0 / std::numbers::pi) * std::exp(-2.0), 1e-15);
}

TEST(outcome_density, integrates_to_one) {
    Rng rng(12);
    std::uniform_real_distribution<double> log_lambda(std::log(0.01), std::log(100.0));
    for (int trial = 0; trial < 100; ++trial) {
        std::ptrdiff_t d = 2 + trial % 5;
        Observable h = random_hermitian(d, rng);
        QuantumState psi = random_state(d, rng);
        Spectrum s = spectral_decompose(h);
        double lambda = std::exp(log_lambda(rng));
        auto [lo, hi] = pointer_support(s.eigenvalues, lambda);
        double total = integrate([&](double a) { return outcome_density(psi, s, lambda, a); }, lo, hi);
        EXPECT_NEAR(total, 1.0, 1e-10) << "lambda = " << lambda << ", d = " << d;
    }
}

TEST(outcome_density, first_moment_by_quadrature) {
    Rng rng(13);
    Observable h = random_hermitian(5, rng);
    QuantumState psi = random_state(5, rng);
    Spectrum s = spectral_decompose(h);
    auto [lo, hi] = pointer_support(s.eigenvalues, 2.0);
    double mean = integrate([&](double a) { return a * outcome_density(psi, s, 2.0, a); }, lo, hi);
    EXPECT_NEAR(mean, expectation(psi, h), 1e-12);
}

TEST(collapse, eigenstate_is_fixed_point) {
    Rng rng(14);
    Spectrum s = spectral_decompose(random_hermitian(3, rng));
    QuantumState eig(s.eigenvectors.col(2));
    for (double a : {-1.0, 0.0, 0.4, 2.5}) {
        auto r = collapse(eig, s, {0.8, a});
        // roundoff in the other components is amplified by the Gaussian ratio
        EXPECT_LT((r.state.amplitudes() - eig.amplitudes()).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(collapse, strong_limit) {
    Spectrum s = spectral_decompose(Observable(pauli_z()));
    QuantumState plus = QuantumState::normalized(CVector::Ones(2));
    for (double lambda : {5.0, 10.0, 50.0}) {
        auto r = collapse(plus, s, {lambda, 0.9});
        // the off component carries exp(-lambda[(0.9+1)^2 - (0.9-1)^2]) relative weight
        double leak = std::exp(-lambda * (1.9 * 1.9 - 0.01));
        EXPECT_NEAR(std::abs(r.state.amplitudes()(0)), 1.0, leak);
        EXPECT_LE(std::abs(r.state.amplitudes()(1)), leak * 1.0001);
    }
}

TEST(collapse, weak_limit_first_order) {
    Rng rng(15);
    Spectrum s = spectral_decompose(Observable(pauli_z()));
    QuantumState psi = random_state(2, rng);
    double lambda = 0.01, a = 5.0;
    auto r = collapse(psi, s, {lambda, a});
    // oracle: exp(-lambda (a - A)^2) ~ I - lambda (a - A)^2, then normalize
    CMatrix shifted = a * CMatrix::Identity(2, 2) - pauli_z();
    CVector first_order = (CMatrix::Identity(2, 2) - lambda * shifted * shifted) * psi.amplitudes();
    first_order.normalize();
    double gap = 2.0;
    EXPECT_LT((r.state.amplitudes() - psi.amplitudes()).norm(), 2.0 * lambda * std::abs(a) * gap);
    EXPECT_LT((r.state.amplitudes() - first_order).norm(), 10.0 * std::pow(lambda * a * gap, 2));
}

TEST(collapse, norm_squared_matches_density) {
    Rng rng(16);
    for (int trial = 0; trial < 50; ++trial) {
        std::ptrdiff_t d = 2 + trial % 4;
        Spectrum s = spectral_decompose(random_hermitian(d, rng));
        QuantumState psi = random_state(d, rng);
        double lambda = std::exp(std::uniform_real_distribution<double>(-3, 3)(rng));
        double a = std::uniform_real_distribution<double>(-2, 2)(rng);
        auto r = collapse(psi, s, {lambda, a});
        EXPECT_NEAR(r.norm * r.norm, outcome_density(psi, s, lambda, a), 1e-12);
        EXPECT_NEAR(r.state.amplitudes().norm(), 1.0, 1e-14);
    }
}

TEST(collapse, rejects_exponentially_suppressed_tail) {
    Spectrum s = spectral_decompose(Observable(pauli_z()));
    QuantumState psi = QuantumState::normalized(CVector::Ones(2));
    try {
        collapse(psi, s, {100.0, 10.0});
        FAIL() << "expected ValidationError";
    } catch (const ValidationError &e) {
        EXPECT_NE(std::string(e.what()).find("exponentially suppressed tail"), std::string::npos);
    }
}

TEST(collapse, large_lambda_uses_shifted_exponents) {
    // exp(-lambda (a - a_n)^2) underflows for both components, the ratio does not
    Spectrum s = spectral_decompose(Observable(pauli_z()));
    QuantumState psi = QuantumState::normalized(CVector::Ones(2));
    double lambda = 1e4;
    double a = 1.0 + 0.1;  // density ~ exp(-2e4 * 0.01) = exp(-200), well above the floor
    auto r = collapse(psi, s, {lambda, a});
    EXPECT_NEAR(std::abs(r.state.amplitudes()(0)), 1.0, 1e-15);
}

TEST(collapse, strong_repeat_is_idempotent) {
    Rng rng(17);
    Spectrum s = spectral_decompose(random_hermitian(4, rng));
    QuantumState psi = random_state(4, rng);
    double lambda = 200.0;
    double a = s.eigenvalues(2) + 0.01;
    auto once = collapse(psi, s, {lambda, a});
    auto twice = collapse(once.state, s, {lambda, a});
    Complex phase = twice.state.amplitudes().dot(once.state.amplitudes());
    EXPECT_NEAR(std::abs(phase), 1.0, 1e-10);
}

TEST(kraus_family, completeness_by_quadrature) {
    // integral of K_a^dagger K_a da = I, checked entrywise in the eigenbasis
    Rng rng(18);
    Observable h = random_hermitian(3, rng);
    Spectrum s = spectral_decompose(h);
    double lambda = 0.6;
    auto [lo, hi] = pointer_support(s.eigenvalues, lambda);
    CMatrix total = CMatrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            total(i, j) = integrate(
                [&](double a) {
                    CMatrix k = dense_kraus(h.matrix(), lambda, a);
                    return (k.adjoint() * k)(i, j).real();
                },
                lo, hi, 1e-11);
        }
    }
    EXPECT_LT((total.real() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-9);
}
