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

// Sampling oracle. Each (a, b) pair is produced by simulating the experiment:
// draw a from the first pointer, collapse, draw b from the collapsed state in
// the B eigenbasis. Nothing here calls into analytic.hpp's closed forms.
//
// Reproducibility contract: sample i always uses the RNG stream (seed, i);
// samples are reduced in fixed-size chunks and chunk results are merged in
// index order, so the output does not depend on the number of threads.

#include "seqmeas/analytic.hpp"
#include "seqmeas/core.hpp"
#include "seqmeas/kraus.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <limits>
#include <random>
#include <thread>
#include <utility>
#include <vector>

namespace seqmeas {

/// splitmix64 stream keyed by (seed, stream index).
class CounterRng {
   public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream) : state_(mix(seed ^ mix(stream + kGolden))) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += kGolden;
        return mix(state_);
    }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

   private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
    std::uint64_t state_;
};

/// Derives an independent seed for sub-experiment `index` of a run.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return CounterRng::mix(CounterRng::mix(seed) + index);
}

struct OutcomeSample {
    double a;
    double b;
};

namespace detail {

/// Inverse-CDF pick of a component index from unnormalized weights.
template <typename Rng>
std::ptrdiff_t pick_component(const RVector &weights, Rng &rng) {
    double total = weights.sum();
    double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    double acc = 0.0;
    for (std::ptrdiff_t i = 0; i + 1 < weights.size(); ++i) {
        acc += weights(i);
        if (u < acc) {
            return i;
        }
    }
    return weights.size() - 1;
}

template <typename Rng>
double draw_pointer(double center, double lambda, Rng &rng) {
    // exp(-2 lambda (x - center)^2) has variance 1/(4 lambda)
    return std::normal_distribution<double>(center, 0.5 / std::sqrt(lambda))(rng);
}

}  // namespace detail

struct FirstOutcome {
    double a;
    QuantumState collapsed;
};

/// Draws the first pointer reading and the state it leaves behind.
template <typename Rng>
FirstOutcome sample_first(const QuantumState &state, const Spectrum &spec, double lambda, Rng &rng) {
    validate_strength(lambda);
    detail::require_same_dim(state.dim(), spec.dim(), "sample_first");
    RVector weights = spec.coefficients(state.amplitudes()).cwiseAbs2();
    std::ptrdiff_t n = detail::pick_component(weights, rng);
    double a = detail::draw_pointer(spec.eigenvalues(n), lambda, rng);
    return FirstOutcome{a, collapse(state, spec, KrausParams{lambda, a}).state};
}

/// Per-setup sampler with the basis changes precomputed. Works on eigenbasis
/// coefficients: collapse under K_a is diagonal there, and the collapsed
/// state is carried to the B eigenbasis through <b_m|a_n>.
class PairSampler {
   public:
    explicit PairSampler(const SequentialSetup &setup)
        : eigen_a_(setup.spec_a().eigenvalues),
          eigen_b_(setup.spec_b().eigenvalues),
          overlap_(setup.overlap().entries),
          coefficients_(setup.coefficients()),
          weights_a_(setup.coefficients().cwiseAbs2()),
          lambda_a_(setup.lambda_a()),
          lambda_b_(setup.lambda_b()) {}

    template <typename Rng>
    OutcomeSample draw(Rng &rng) const {
        std::ptrdiff_t n = detail::pick_component(weights_a_, rng);
        double a = detail::draw_pointer(eigen_a_(n), lambda_a_, rng);
        auto shifted = detail::shifted_kraus(coefficients_, eigen_a_, KrausParams{lambda_a_, a});
        RVector weights_b = (overlap_ * shifted.coefficients).cwiseAbs2();
        std::ptrdiff_t m = detail::pick_component(weights_b, rng);
        double b = detail::draw_pointer(eigen_b_(m), lambda_b_, rng);
        return OutcomeSample{a, b};
    }

    OutcomeSample draw_indexed(std::uint64_t seed, std::uint64_t index) const {
        CounterRng rng(seed, index);
        return draw(rng);
    }

   private:
    RVector eigen_a_;
    RVector eigen_b_;
    CMatrix overlap_;
    CVector coefficients_;
    RVector weights_a_;
    double lambda_a_;
    double lambda_b_;
};

template <typename Rng>
OutcomeSample sample_pair(const SequentialSetup &setup, Rng &rng) {
    return PairSampler(setup).draw(rng);
}

// ---------------------------------------------------------------------------
// Reduction
// ---------------------------------------------------------------------------

/// Compensated (Neumaier) running sum.
struct CompensatedSum {
    double sum = 0.0;
    double compensation = 0.0;

    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            compensation += (sum - t) + x;
        } else {
            compensation += (x - t) + sum;
        }
        sum = t;
    }

    void merge(const CompensatedSum &other) {
        add(other.sum);
        compensation += other.compensation;
    }

    double value() const { return sum + compensation; }
};

struct RunStatistics {
    std::uint64_t n_samples = 0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double mean_a2 = 0.0;
    double mean_b2 = 0.0;
    double stderr_a = 0.0;
    double stderr_b = 0.0;
    /// Standard errors of mean_a2 / mean_b2.
    double stderr_a2 = 0.0;
    double stderr_b2 = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const RunStatistics &) const = default;
};

/// Streaming sums of x, x^2, x^4 for both pointers.
class MomentAccumulator {
   public:
    void add(const OutcomeSample &s) {
        ++count_;
        accumulate(a_, s.a);
        accumulate(b_, s.b);
    }

    void merge(const MomentAccumulator &other) {
        count_ += other.count_;
        for (std::size_t k = 0; k < 3; ++k) {
            a_[k].merge(other.a_[k]);
            b_[k].merge(other.b_[k]);
        }
    }

    std::uint64_t count() const { return count_; }

    RunStatistics finish(std::uint64_t seed) const {
        RunStatistics out;
        out.n_samples = count_;
        out.seed = seed;
        if (count_ == 0) {
            return out;
        }
        double n = static_cast<double>(count_);
        out.mean_a = a_[0].value() / n;
        out.mean_a2 = a_[1].value() / n;
        out.mean_b = b_[0].value() / n;
        out.mean_b2 = b_[1].value() / n;
        out.stderr_a = standard_error(a_[1].value(), out.mean_a, n);
        out.stderr_b = standard_error(b_[1].value(), out.mean_b, n);
        out.stderr_a2 = standard_error(a_[2].value(), out.mean_a2, n);
        out.stderr_b2 = standard_error(b_[2].value(), out.mean_b2, n);
        return out;
    }

   private:
    using Sums = std::array<CompensatedSum, 3>;

    static void accumulate(Sums &sums, double x) {
        double x2 = x * x;
        sums[0].add(x);
        sums[1].add(x2);
        sums[2].add(x2 * x2);
    }

    static double standard_error(double sum_sq, double mean, double n) {
        if (n < 2.0) {
            return 0.0;
        }
        double variance = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
        return std::sqrt(variance / n);
    }

    std::uint64_t count_ = 0;
    Sums a_{};
    Sums b_{};
};

/// Counts on a regular 2D grid over [a_lo, a_hi) x [b_lo, b_hi).
class JointHistogram {
   public:
    JointHistogram(double a_lo, double a_hi, std::size_t a_bins, double b_lo, double b_hi, std::size_t b_bins)
        : a_lo_(a_lo), a_hi_(a_hi), b_lo_(b_lo), b_hi_(b_hi), a_bins_(a_bins), b_bins_(b_bins),
          counts_(a_bins * b_bins, 0) {
        if (a_bins == 0 || b_bins == 0 || !(a_hi > a_lo) || !(b_hi > b_lo)) {
            throw ValidationError("histogram needs at least one bin and a non-empty range on each axis");
        }
    }

    void add(const OutcomeSample &s) {
        ++total_;
        double fa = (s.a - a_lo_) / (a_hi_ - a_lo_) * static_cast<double>(a_bins_);
        double fb = (s.b - b_lo_) / (b_hi_ - b_lo_) * static_cast<double>(b_bins_);
        if (!(fa >= 0.0) || !(fb >= 0.0) || fa >= static_cast<double>(a_bins_) || fb >= static_cast<double>(b_bins_)) {
            ++outside_;
            return;
        }
        ++counts_[static_cast<std::size_t>(fa) * b_bins_ + static_cast<std::size_t>(fb)];
    }

    void merge(const JointHistogram &other) {
        for (std::size_t i = 0; i < counts_.size(); ++i) {
            counts_[i] += other.counts_[i];
        }
        outside_ += other.outside_;
        total_ += other.total_;
    }

    JointHistogram empty_like() const { return JointHistogram(a_lo_, a_hi_, a_bins_, b_lo_, b_hi_, b_bins_); }

    std::uint64_t count(std::size_t ia, std::size_t ib) const { return counts_[ia * b_bins_ + ib]; }
    std::uint64_t outside() const { return outside_; }
    std::uint64_t total() const { return total_; }
    std::size_t a_bins() const { return a_bins_; }
    std::size_t b_bins() const { return b_bins_; }
    double a_width() const { return (a_hi_ - a_lo_) / static_cast<double>(a_bins_); }
    double b_width() const { return (b_hi_ - b_lo_) / static_cast<double>(b_bins_); }
    double a_edge(std::size_t i) const { return a_lo_ + a_width() * static_cast<double>(i); }
    double b_edge(std::size_t i) const { return b_lo_ + b_width() * static_cast<double>(i); }

   private:
    double a_lo_, a_hi_, b_lo_, b_hi_;
    std::size_t a_bins_, b_bins_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t outside_ = 0;
    std::uint64_t total_ = 0;
};

/// Keeps every sample in index order.
struct SampleList {
    std::vector<OutcomeSample> samples;
    void add(const OutcomeSample &s) { samples.push_back(s); }
    void merge(const SampleList &other) { samples.insert(samples.end(), other.samples.begin(), other.samples.end()); }
};

inline constexpr std::uint64_t kChunkSize = 16384;

inline unsigned resolve_threads(unsigned threads) {
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    return threads;
}

/// Draws samples 0..n-1 of (setup, seed) and folds them into copies of
/// `empty` (any type with add(OutcomeSample) and merge(const T&)).
template <typename Accumulator>
Accumulator reduce_samples(const SequentialSetup &setup, std::uint64_t n, std::uint64_t seed, unsigned threads,
                           const Accumulator &empty) {
    if (n == 0) {
        throw ValidationError("sample count must be positive");
    }
    PairSampler sampler(setup);
    std::uint64_t chunks = (n + kChunkSize - 1) / kChunkSize;
    std::vector<Accumulator> partial(chunks, empty);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (std::uint64_t c = next++; c < chunks; c = next++) {
            std::uint64_t end = std::min(n, (c + 1) * kChunkSize);
            for (std::uint64_t i = c * kChunkSize; i < end; ++i) {
                partial[c].add(sampler.draw_indexed(seed, i));
            }
        }
    };
    unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(threads), chunks));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) {
            pool.emplace_back(worker);
        }
        for (auto &th : pool) {
            th.join();
        }
    }
    Accumulator out = empty;
    for (const auto &p : partial) {
        out.merge(p);
    }
    return out;
}

/// Repeats the A-then-B experiment n times.
inline RunStatistics run_experiment(const SequentialSetup &setup, std::uint64_t n, std::uint64_t seed,
                                    unsigned threads = 0) {
    return reduce_samples(setup, n, seed, threads, MomentAccumulator{}).finish(seed);
}

}  // namespace seqmeas
