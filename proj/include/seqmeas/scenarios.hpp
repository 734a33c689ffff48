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

// Built-in systems: a qubit measured along z then along a configurable axis,
// a commuting control B = f(A), and a position grid with a finite-difference
// momentum operator.

#include "seqmeas/analytic.hpp"
#include "seqmeas/core.hpp"

#include <numbers>
#include <string>
#include <variant>
#include <vector>

namespace seqmeas {

struct QubitScenario {
    // Bloch angles of the pre-selected state; defaults give |+x>.
    double state_theta = std::numbers::pi / 2;
    double state_phi = 0.0;
    // Bloch angles of the second measurement axis; defaults give sigma_x.
    double b_theta = std::numbers::pi / 2;
    double b_phi = 0.0;
};

struct CommutingScenario {
    std::vector<double> a_eigenvalues{-1.0, 0.5, 2.0};
    /// B = f(A) with f one of "square", "cube", "identity", "exp".
    std::string function = "square";
};

struct SincGridScenario {
    std::size_t n_points = 201;
    double delta_x = 0.1;
    double hbar = 1.0;
    /// Wavepacket width sigma (|psi|^2 has standard deviation sigma);
    /// 0 selects 5 * delta_x.
    double width = 0.0;
    /// Momentum boost, psi_n ~ exp(i k0 x_n).
    double k0 = 0.0;
    double center = 0.0;
    /// Second observable: "p" or "p2".
    std::string observable_b = "p";

    double effective_width() const { return width > 0.0 ? width : 5.0 * delta_x; }
};

using ScenarioSpec = std::variant<QubitScenario, CommutingScenario, SincGridScenario>;

struct Scenario {
    QuantumState state;
    Observable a;
    Observable b;
};

inline const char *scenario_kind(const ScenarioSpec &spec) {
    static constexpr const char *names[] = {"qubit", "commuting", "sinc_grid"};
    return names[spec.index()];
}

/// Central-difference momentum -i hbar d/dx on a uniform grid, zero outside.
inline CMatrix momentum_matrix(std::size_t n_points, double delta_x, double hbar) {
    auto d = static_cast<std::ptrdiff_t>(n_points);
    CMatrix p = CMatrix::Zero(d, d);
    Complex hop(0.0, hbar / (2.0 * delta_x));
    for (std::ptrdiff_t j = 0; j + 1 < d; ++j) {
        p(j, j + 1) = -hop;
        p(j + 1, j) = hop;
    }
    return p;
}

inline RVector grid_positions(std::size_t n_points, double delta_x) {
    auto d = static_cast<std::ptrdiff_t>(n_points);
    RVector x(d);
    std::ptrdiff_t half = d / 2;
    for (std::ptrdiff_t j = 0; j < d; ++j) {
        x(j) = delta_x * static_cast<double>(j - half);
    }
    return x;
}

inline CVector gaussian_wavepacket(const RVector &x, double center, double width, double k0) {
    CVector psi(x.size());
    for (std::ptrdiff_t j = 0; j < x.size(); ++j) {
        double u = (x(j) - center) / width;
        psi(j) = std::exp(-0.25 * u * u) * std::polar(1.0, k0 * x(j));
    }
    return psi;
}

namespace detail {

inline Scenario build(const QubitScenario &q) {
    CMatrix sz(2, 2), sx(2, 2), sy(2, 2);
    sz << 1, 0, 0, -1;
    sx << 0, 1, 1, 0;
    sy << 0, Complex(0, -1), Complex(0, 1), 0;
    CMatrix b = std::sin(q.b_theta) * std::cos(q.b_phi) * sx + std::sin(q.b_theta) * std::sin(q.b_phi) * sy +
                std::cos(q.b_theta) * sz;
    CVector psi(2);
    psi << std::cos(q.state_theta / 2), std::polar(std::sin(q.state_theta / 2), q.state_phi);
    return Scenario{QuantumState::normalized(psi), Observable(sz), Observable(b)};
}

inline Scenario build(const CommutingScenario &c) {
    if (c.a_eigenvalues.size() < 2) {
        throw ValidationError("commuting scenario needs at least two eigenvalues");
    }
    auto d = static_cast<std::ptrdiff_t>(c.a_eigenvalues.size());
    RVector a = Eigen::Map<const RVector>(c.a_eigenvalues.data(), d);
    RVector b;
    if (c.function == "square") {
        b = a.cwiseAbs2();
    } else if (c.function == "cube") {
        b = a.array().cube().matrix();
    } else if (c.function == "identity") {
        b = a;
    } else if (c.function == "exp") {
        b = a.array().exp().matrix();
    } else {
        throw ValidationError("unknown commuting function '" + c.function + "'");
    }
    CVector psi = CVector::Ones(d);
    return Scenario{QuantumState::normalized(psi), Observable::diagonal(a), Observable::diagonal(b)};
}

inline Scenario build(const SincGridScenario &g) {
    if (g.n_points % 2 == 0 || g.n_points < 3) {
        throw ValidationError(concat("sinc_grid n_points must be odd and >= 3, got ", g.n_points));
    }
    if (!(g.delta_x > 0.0) || !(g.hbar > 0.0)) {
        throw ValidationError("sinc_grid delta_x and hbar must be positive");
    }
    RVector x = grid_positions(g.n_points, g.delta_x);
    CMatrix p = momentum_matrix(g.n_points, g.delta_x, g.hbar);
    CMatrix b;
    if (g.observable_b == "p") {
        b = p;
    } else if (g.observable_b == "p2") {
        b = p * p;
    } else {
        throw ValidationError("sinc_grid observable_b must be 'p' or 'p2', got '" + g.observable_b + "'");
    }
    CVector psi = gaussian_wavepacket(x, g.center, g.effective_width(), g.k0);
    return Scenario{QuantumState::normalized(psi), Observable::diagonal(x), Observable(b)};
}

}  // namespace detail

inline Scenario build_scenario(const ScenarioSpec &spec) {
    return std::visit([](const auto &s) { return detail::build(s); }, spec);
}

struct WashoutOptions {
    /// Wavepacket width in physical units, held fixed under refinement.
    double width = 1.0;
    double k0 = 0.5;
    double hbar = 1.0;
};

struct WashoutRow {
    double delta_x;
    std::size_t n_points;
    double slope_p;
    double slope_p2;
};

inline constexpr std::size_t kMinWashoutPoints = 51;

/// weak_slope for B = p and B = p^2 on successively halved grids:
/// refinement k uses delta_x = base_delta_x / 2^k and grid_sizes[k] points.
inline std::vector<WashoutRow> washout_study(const std::vector<std::size_t> &grid_sizes, double base_delta_x,
                                             const WashoutOptions &options = {}) {
    if (grid_sizes.empty()) {
        throw ValidationError("washout_study needs at least one grid size");
    }
    std::vector<WashoutRow> rows;
    double dx = base_delta_x;
    for (std::size_t n : grid_sizes) {
        if (n < kMinWashoutPoints) {
            throw ValidationError(detail::concat("washout grid too small: ", n, " < ", kMinWashoutPoints, " points"));
        }
        SincGridScenario grid{n, dx, options.hbar, options.width, options.k0, 0.0, "p"};
        Scenario sp = build_scenario(grid);
        Spectrum spec_x = spectral_decompose(sp.a);
        Observable p2(sp.b.matrix() * sp.b.matrix());
        rows.push_back(WashoutRow{dx, n, weak_slope(sp.state, spec_x, sp.b), weak_slope(sp.state, spec_x, p2)});
        dx *= 0.5;
    }
    return rows;
}

}  // namespace seqmeas
