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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace seqmeas {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

/// Raised when an input violates a documented invariant (non-Hermitian
/// matrix, unnormalized state, dimension mismatch, non-positive strength...).
class ValidationError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a computed quantity that must be real carries an imaginary
/// part above tolerance. Indicates an algebra bug, never an input problem.
class ConsistencyError : public std::logic_error {
   public:
    using std::logic_error::logic_error;
};

namespace detail {

template <typename... Parts>
std::string concat(Parts &&...parts) {
    std::ostringstream out;
    out.precision(17);
    (out << ... << std::forward<Parts>(parts));
    return out.str();
}

inline void require_same_dim(std::ptrdiff_t lhs, std::ptrdiff_t rhs, const char *what) {
    if (lhs != rhs) {
        throw ValidationError(concat("dimension mismatch in ", what, ": ", lhs, " vs ", rhs));
    }
}

/// Returns the real part of `value`, throwing if the imaginary residue
/// exceeds `tol` (absolute) scaled by max(1, |value|).
inline double assert_real(Complex value, double tol, const char *what) {
    double scale = std::max(1.0, std::abs(value.real()));
    if (!(std::abs(value.imag()) <= tol * scale)) {
        throw ConsistencyError(concat(what, ": imaginary residue ", value.imag(), " exceeds ", tol * scale));
    }
    return value.real();
}

}  // namespace detail

/// Normalized pure state |psi> of a d-level system (d >= 2).
class QuantumState {
   public:
    static constexpr double kNormTolerance = 1e-12;

    explicit QuantumState(CVector amplitudes) : amplitudes_(std::move(amplitudes)) {
        if (amplitudes_.size() < 2) {
            throw ValidationError(detail::concat("state dimension must be >= 2, got ", amplitudes_.size()));
        }
        if (!amplitudes_.allFinite()) {
            throw ValidationError("state has non-finite amplitudes");
        }
        double norm = amplitudes_.norm();
        if (std::abs(norm - 1.0) > kNormTolerance) {
            throw ValidationError(detail::concat("state norm ", norm, " differs from 1 by more than ", kNormTolerance));
        }
    }

    /// Rescales `amplitudes` to unit norm before validating.
    static QuantumState normalized(const CVector &amplitudes) {
        double norm = amplitudes.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            throw ValidationError("cannot normalize a zero or non-finite vector");
        }
        return QuantumState(amplitudes / norm);
    }

    static QuantumState basis(std::ptrdiff_t dim, std::ptrdiff_t index) {
        CVector v = CVector::Zero(dim);
        if (index < 0 || index >= dim) {
            throw ValidationError(detail::concat("basis index ", index, " out of range for dimension ", dim));
        }
        v(index) = 1.0;
        return QuantumState(std::move(v));
    }

    const CVector &amplitudes() const { return amplitudes_; }
    std::ptrdiff_t dim() const { return amplitudes_.size(); }

   private:
    CVector amplitudes_;
};

/// Hermitian d x d matrix representing a measured quantity.
class Observable {
   public:
    static constexpr double kHermiticityTolerance = 1e-12;

    explicit Observable(CMatrix matrix) : matrix_(std::move(matrix)) {
        if (matrix_.rows() != matrix_.cols()) {
            throw ValidationError(detail::concat("observable must be square, got ", matrix_.rows(), "x", matrix_.cols()));
        }
        if (matrix_.rows() < 2) {
            throw ValidationError("observable dimension must be >= 2");
        }
        if (!matrix_.allFinite()) {
            throw ValidationError("observable has non-finite entries");
        }
        double asym = max_asymmetry(matrix_);
        double scale = matrix_.cwiseAbs().maxCoeff();
        if (asym > kHermiticityTolerance * scale) {
            throw ValidationError(detail::concat("observable is not Hermitian: max |H[i][j] - conj(H[j][i])| = ", asym));
        }
    }

    static Observable diagonal(const RVector &values) {
        return Observable(values.cast<Complex>().asDiagonal().toDenseMatrix());
    }

    static double max_asymmetry(const CMatrix &m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

    const CMatrix &matrix() const { return matrix_; }
    std::ptrdiff_t dim() const { return matrix_.rows(); }

   private:
    CMatrix matrix_;
};

/// Eigen-decomposition of an observable: ascending eigenvalues, column n of
/// `eigenvectors` is |a_n>.
struct Spectrum {
    RVector eigenvalues;
    CMatrix eigenvectors;

    std::ptrdiff_t dim() const { return eigenvalues.size(); }

    /// V diag(eigenvalues) V^dagger.
    CMatrix reconstruct() const {
        return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
    }

    /// Coefficients <a_n|psi> of a vector in this eigenbasis.
    CVector coefficients(const CVector &psi) const { return eigenvectors.adjoint() * psi; }

    /// Matrix elements <a_n'|M|a_n> of an operator in this eigenbasis.
    CMatrix in_basis(const CMatrix &op) const { return eigenvectors.adjoint() * op * eigenvectors; }
};

/// entries(m, n) = <b_m|a_n>.
struct OverlapMatrix {
    CMatrix entries;

    std::ptrdiff_t dim() const { return entries.rows(); }
    double unitarity_residual() const {
        return (entries.adjoint() * entries - CMatrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
    }
};

namespace detail {

/// Scales column `col` so its largest-magnitude component is real positive.
/// Ties within a relative 1e-9 resolve to the lowest index.
inline void fix_phase(CMatrix &v, std::ptrdiff_t col) {
    auto column = v.col(col);
    double best = column.cwiseAbs().maxCoeff();
    std::ptrdiff_t pivot = 0;
    for (std::ptrdiff_t i = 0; i < column.size(); ++i) {
        if (std::abs(column(i)) >= best * (1.0 - 1e-9)) {
            pivot = i;
            break;
        }
    }
    Complex z = column(pivot);
    column *= std::conj(z) / std::abs(z);
    column(pivot) = std::abs(z);
}

/// Modified Gram-Schmidt over columns [begin, end).
inline void orthonormalize(CMatrix &v, std::ptrdiff_t begin, std::ptrdiff_t end) {
    for (std::ptrdiff_t j = begin; j < end; ++j) {
        for (std::ptrdiff_t k = begin; k < j; ++k) {
            v.col(j) -= v.col(k).dot(v.col(j)) * v.col(k);
        }
        v.col(j).normalize();
    }
}

}  // namespace detail

/// Diagonalizes `observable`. Eigenvalues closer than tol * (spectral range)
/// form one degenerate cluster; each cluster is re-orthonormalized in index
/// order before phases are fixed. Output is deterministic for a given input.
inline Spectrum spectral_decompose(const Observable &observable, double tol = 1e-10) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(observable.matrix());
    if (solver.info() != Eigen::Success) {
        throw ValidationError("eigendecomposition did not converge");
    }
    Spectrum out{solver.eigenvalues(), solver.eigenvectors()};
    std::ptrdiff_t d = out.dim();
    double range = out.eigenvalues(d - 1) - out.eigenvalues(0);
    double threshold = tol * std::max(range, out.eigenvalues.cwiseAbs().maxCoeff());

    std::ptrdiff_t begin = 0;
    while (begin < d) {
        std::ptrdiff_t end = begin + 1;
        while (end < d && out.eigenvalues(end) - out.eigenvalues(end - 1) <= threshold) {
            ++end;
        }
        if (end - begin > 1) {
            detail::orthonormalize(out.eigenvectors, begin, end);
        }
        begin = end;
    }
    for (std::ptrdiff_t n = 0; n < d; ++n) {
        detail::fix_phase(out.eigenvectors, n);
    }
    return out;
}

inline OverlapMatrix overlap_matrix(const Spectrum &spec_a, const Spectrum &spec_b) {
    detail::require_same_dim(spec_a.dim(), spec_b.dim(), "overlap_matrix");
    return OverlapMatrix{spec_b.eigenvectors.adjoint() * spec_a.eigenvectors};
}

/// <psi|H|psi>; the imaginary residue must be below 1e-12.
inline double expectation(const QuantumState &state, const Observable &observable) {
    detail::require_same_dim(state.dim(), observable.dim(), "expectation");
    const CVector &psi = state.amplitudes();
    Complex value = psi.dot(observable.matrix() * psi);
    double scale = std::max(1.0, observable.matrix().cwiseAbs().maxCoeff());
    return detail::assert_real(value, 1e-12 * scale, "expectation");
}

/// Commutator [X, Y] = XY - YX.
inline CMatrix commutator(const CMatrix &x, const CMatrix &y) { return x * y - y * x; }

}  // namespace seqmeas
