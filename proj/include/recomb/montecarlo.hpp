#pragma once

// Seeded trajectory sampling of the partition chain.
//
// Each step draws one 64-bit output u of the trajectory's CounterRng stream
// and selects the k-th partition of rho (entries in canonical order) for the
// smallest k with u < floor(2^64 · (rho_1 + ... + rho_k)); the last entry
// takes whatever remains. Thresholds are computed in exact rational
// arithmetic, so sampling never touches floating point.
//
// In estimate_survival, trajectory j (0-based) uses the seed
// CounterRng(base_seed).at(j).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "recomb/chain.hpp"
#include "recomb/random.hpp"
#include "recomb/scalar.hpp"
#include "recomb/weights.hpp"

namespace recomb {

/// Maps a uniform 64-bit integer to an index of rho's entries.
class WeightSampler {
public:
    template <Scalar S>
    explicit WeightSampler(const PartitionWeights<S>& rho) {
        const BigInt two64 = BigInt(1) << 64;
        Rational cumulative(0);
        for (std::size_t k = 0; k + 1 < rho.size(); ++k) {
            cumulative += to_rational(rho.entries()[k].second);
            BigInt t = numerator(cumulative) * two64 / denominator(cumulative);
            thresholds_.push_back(t >= two64 ? UINT64_MAX : t.convert_to<std::uint64_t>());
        }
    }

    std::size_t operator()(std::uint64_t u) const noexcept {
        auto it = std::upper_bound(thresholds_.begin(), thresholds_.end(), u);
        return static_cast<std::size_t>(it - thresholds_.begin());
    }

    const std::vector<std::uint64_t>& thresholds() const noexcept { return thresholds_; }

private:
    // thresholds_[k] = floor(2^64 · cumulative weight through entry k), all but the last entry.
    std::vector<std::uint64_t> thresholds_;
};

struct Trajectory {
    std::uint64_t seed = 0;
    /// Y_0, Y_1, ..., stopped at absorption or at the horizon.
    std::vector<Partition> states;
    /// First n with Y_n = D^ρ, if reached within the horizon.
    std::optional<std::size_t> absorption_step;
};

/// Walks the chain over precomputed successor indices.
class TrajectorySampler {
public:
    template <Scalar S>
    TrajectorySampler(const PartitionWeights<S>& rho, StateSpace space)
        : space_(std::move(space)), draw_(rho) {
        successor_.resize(space_.size() * rho.size());
        for (StateIndex i = 0; i < space_.size(); ++i)
            for (std::size_t d = 0; d < rho.size(); ++d)
                successor_[i * rho.size() + d] = space_.index_of(join(space_[i], rho.entries()[d].first));
        width_ = rho.size();
    }

    const StateSpace& space() const noexcept { return space_; }

    /// State indices of one trajectory.
    std::vector<StateIndex> walk(std::uint64_t seed, std::size_t horizon) const {
        CounterRng rng(seed);
        std::vector<StateIndex> path{space_.start()};
        for (std::size_t n = 0; n < horizon && path.back() != space_.absorbing(); ++n)
            path.push_back(successor_[path.back() * width_ + draw_(rng())]);
        return path;
    }

    /// Absorption step, or nullopt if not absorbed within the horizon.
    std::optional<std::size_t> absorption_time(std::uint64_t seed, std::size_t horizon) const {
        CounterRng rng(seed);
        StateIndex s = space_.start();
        for (std::size_t n = 0;; ++n) {
            if (s == space_.absorbing()) return n;
            if (n == horizon) return std::nullopt;
            s = successor_[s * width_ + draw_(rng())];
        }
    }

private:
    StateSpace space_;
    WeightSampler draw_;
    std::vector<StateIndex> successor_;
    std::size_t width_ = 0;
};

template <Scalar S>
Trajectory sample_trajectory(const PartitionWeights<S>& rho, std::uint64_t seed, std::size_t horizon,
                             std::size_t state_cap = default_state_cap) {
    TrajectorySampler sampler(rho, build_state_space(rho, state_cap));
    Trajectory t;
    t.seed = seed;
    const auto path = sampler.walk(seed, horizon);
    for (std::size_t n = 0; n < path.size(); ++n) {
        t.states.push_back(sampler.space()[path[n]]);
        if (!t.absorption_step && path[n] == sampler.space().absorbing()) t.absorption_step = n;
    }
    return t;
}

struct SurvivalEstimate {
    std::size_t n = 0;
    std::uint64_t survivors = 0;
    double estimate = 0;
    /// sqrt(p(1-p)/N) at the estimate p.
    double standard_error = 0;
};

/// Empirical P(ζ > n) for n = 0..horizon over `seeds` trajectories.
template <Scalar S>
std::vector<SurvivalEstimate> estimate_survival(const PartitionWeights<S>& rho, std::uint64_t seeds,
                                                std::size_t horizon, std::uint64_t base_seed,
                                                std::size_t state_cap = default_state_cap,
                                                unsigned threads = 1) {
    if (seeds == 0) throw ValidationError("at least one seed is required");
    const TrajectorySampler sampler(rho, build_state_space(rho, state_cap));
    const CounterRng base(base_seed);
    // absorbed_at[n] counts trajectories with ζ = n; integer counts make the
    // reduction independent of the thread split.
    auto run = [&](std::uint64_t lo, std::uint64_t hi, std::vector<std::uint64_t>& absorbed_at) {
        absorbed_at.assign(horizon + 1, 0);
        for (std::uint64_t j = lo; j < hi; ++j)
            if (auto z = sampler.absorption_time(base.at(j), horizon)) ++absorbed_at[*z];
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::uint64_t>(seeds, 256))));
    std::vector<std::vector<std::uint64_t>> partial(threads);
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t)
            pool.emplace_back(run, seeds * t / threads, seeds * (t + 1) / threads, std::ref(partial[t]));
        run(0, seeds / threads, partial[0]);
    }
    std::vector<SurvivalEstimate> out;
    std::uint64_t absorbed = 0;
    for (std::size_t n = 0; n <= horizon; ++n) {
        for (const auto& p : partial) absorbed += p[n];
        SurvivalEstimate e;
        e.n = n;
        e.survivors = seeds - absorbed;
        e.estimate = static_cast<double>(e.survivors) / static_cast<double>(seeds);
        e.standard_error = std::sqrt(e.estimate * (1 - e.estimate) / static_cast<double>(seeds));
        out.push_back(e);
    }
    return out;
}

}  // namespace recomb
