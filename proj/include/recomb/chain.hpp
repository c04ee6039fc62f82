#pragma once

// The Markov chain (Y_n) on partitions: Y_{n+1} = Y_n ∨ D with D drawn from
// rho, started at the coarsest partition {I}. States are ordered by number of
// atoms and then by label array, a linear extension of the refinement order,
// so the transition matrix is upper triangular.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recomb/error.hpp"
#include "recomb/partition.hpp"
#include "recomb/scalar.hpp"
#include "recomb/weights.hpp"

namespace recomb {

using StateIndex = std::size_t;
using StateSet = std::vector<StateIndex>;

/// {I} together with the closure of supp rho, in topological order.
class StateSpace {
public:
    StateSpace(std::vector<Partition> states, const Partition& absorbing) : states_(std::move(states)) {
        std::sort(states_.begin(), states_.end(), [](const Partition& a, const Partition& b) {
            if (a.num_blocks() != b.num_blocks()) return a.num_blocks() < b.num_blocks();
            return a < b;
        });
        for (std::size_t k = 0; k < states_.size(); ++k) {
            if (!index_.emplace(states_[k], k).second) throw ValidationError("duplicate state " + to_string(states_[k]));
        }
        absorbing_ = index_of(absorbing);
    }

    std::size_t size() const noexcept { return states_.size(); }
    const std::vector<Partition>& states() const noexcept { return states_; }
    const Partition& operator[](StateIndex k) const { return states_.at(k); }

    /// The coarsest partition, always first.
    StateIndex start() const noexcept { return 0; }
    StateIndex absorbing() const noexcept { return absorbing_; }

    std::optional<StateIndex> find(const Partition& p) const {
        auto it = index_.find(p);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    StateIndex index_of(const Partition& p) const {
        auto k = find(p);
        if (!k) throw ValidationError("partition " + to_string(p) + " is not a state of the chain");
        return *k;
    }

    /// Every state except the absorbing one, ascending.
    StateSet transient() const {
        StateSet out;
        for (StateIndex k = 0; k < size(); ++k)
            if (k != absorbing_) out.push_back(k);
        return out;
    }

private:
    std::vector<Partition> states_;
    std::map<Partition, StateIndex> index_;
    StateIndex absorbing_ = 0;
};

inline StateSpace build_state_space(const PartitionFamily& support, std::size_t cap = default_state_cap) {
    PartitionFamily states = closure(support, cap);
    states.insert(Partition::coarsest(support.sites()));
    if (states.size() > cap)
        throw ResourceError("state space exceeds the cap of " + std::to_string(cap) + " partitions", states.size());
    return StateSpace(std::vector<Partition>(states.begin(), states.end()), common_refinement(support));
}

template <Scalar S>
StateSpace build_state_space(const PartitionWeights<S>& rho, std::size_t cap = default_state_cap) {
    return build_state_space(rho.support(), cap);
}

/// Dense row-stochastic matrix over a StateSpace.
template <Scalar S>
class TransitionMatrix {
public:
    TransitionMatrix(std::size_t n, StateIndex absorbing) : n_(n), absorbing_(absorbing), data_(n * n, S(0)) {}

    std::size_t size() const noexcept { return n_; }
    StateIndex start() const noexcept { return 0; }
    StateIndex absorbing() const noexcept { return absorbing_; }

    const S& operator()(StateIndex i, StateIndex j) const { return data_[i * n_ + j]; }
    S& operator()(StateIndex i, StateIndex j) { return data_[i * n_ + j]; }

    std::span<const S> row(StateIndex i) const { return {data_.data() + i * n_, n_}; }

    template <Scalar T>
    TransitionMatrix<T> as() const {
        TransitionMatrix<T> out(n_, absorbing_);
        for (StateIndex i = 0; i < n_; ++i)
            for (StateIndex j = 0; j < n_; ++j) {
                if constexpr (is_exact_v<T>)
                    out(i, j) = to_rational((*this)(i, j));
                else
                    out(i, j) = to_double((*this)(i, j));
            }
        return out;
    }

private:
    std::size_t n_;
    StateIndex absorbing_;
    std::vector<S> data_;
};

/// P(δ, δ') = Σ_{D: δ ∨ D = δ'} rho_D.
template <Scalar S>
TransitionMatrix<S> build_transition_matrix(const PartitionWeights<S>& rho, const StateSpace& space) {
    TransitionMatrix<S> P(space.size(), space.absorbing());
    for (StateIndex i = 0; i < space.size(); ++i)
        for (const auto& [D, w] : rho) P(i, space.index_of(join(space[i], D))) += w;
    return P;
}

/// Everything the analyses need about one model.
template <Scalar S>
struct Chain {
    PartitionWeights<S> rho;
    StateSpace space;
    TransitionMatrix<S> P;
};

template <Scalar S>
Chain<S> build_chain(PartitionWeights<S> rho, std::size_t cap = default_state_cap) {
    StateSpace space = build_state_space(rho, cap);
    TransitionMatrix<S> P = build_transition_matrix(rho, space);
    return Chain<S>{std::move(rho), std::move(space), std::move(P)};
}

// ---------------------------------------------------------------------------
// Distribution evolution

template <Scalar S>
std::vector<S> unit_vector(std::size_t n, StateIndex k) {
    std::vector<S> v(n, S(0));
    v.at(k) = S(1);
    return v;
}

/// One step b ↦ b P.
template <Scalar S>
std::vector<S> step(const TransitionMatrix<S>& P, std::span<const S> b) {
    std::vector<S> next(P.size(), S(0));
    for (StateIndex i = 0; i < P.size(); ++i) {
        if (b[i] == 0) continue;
        for (StateIndex j = i; j < P.size(); ++j)
            if (P(i, j) != 0) next[j] += b[i] * P(i, j);
    }
    return next;
}

template <Scalar S>
std::vector<S> evolve(const TransitionMatrix<S>& P, std::vector<S> b, std::size_t steps) {
    for (std::size_t k = 0; k < steps; ++k) b = step<S>(P, b);
    return b;
}

/// b_n(δ) = P(Y_n = δ) from Y_0 = {I}.
template <Scalar S>
std::vector<S> distribution_at(const TransitionMatrix<S>& P, std::size_t n) {
    return evolve(P, unit_vector<S>(P.size(), P.start()), n);
}

/// b_0, ..., b_n.
template <Scalar S>
std::vector<std::vector<S>> distribution_series(const TransitionMatrix<S>& P, std::size_t n) {
    std::vector<std::vector<S>> out;
    out.reserve(n + 1);
    out.push_back(unit_vector<S>(P.size(), P.start()));
    for (std::size_t k = 0; k < n; ++k) out.push_back(step<S>(P, out.back()));
    return out;
}

/// P_start(ζ > n).
template <Scalar S>
S survival_from(const TransitionMatrix<S>& P, StateIndex start, std::size_t n) {
    auto b = evolve(P, unit_vector<S>(P.size(), start), n);
    return S(1) - b[P.absorbing()];
}

/// P(ζ > n) = 1 - b_n(D^ρ).
template <Scalar S>
S survival(const TransitionMatrix<S>& P, std::size_t n) {
    return survival_from(P, P.start(), n);
}

/// scale^{-n} P_start(ζ > n), evolved with per-step rescaling so that float
/// mode neither underflows nor loses the tail.
template <Scalar S>
S scaled_survival(const TransitionMatrix<S>& P, StateIndex start, std::size_t n, const S& scale) {
    std::vector<S> v = unit_vector<S>(P.size(), start);
    v[P.absorbing()] = S(0);
    for (std::size_t k = 0; k < n; ++k) {
        // Mass sent to the absorbing state is dropped: only survivors matter.
        v = step<S>(P, v);
        v[P.absorbing()] = S(0);
        for (auto& x : v) x /= scale;
    }
    S total(0);
    for (const auto& x : v) total += x;
    return total;
}

// ---------------------------------------------------------------------------
// Reachability and hitting functionals

/// reach[k] is true iff B can be hit from state k with positive probability.
template <Scalar S>
std::vector<bool> can_reach(const TransitionMatrix<S>& P, std::span<const StateIndex> B) {
    std::vector<bool> reach(P.size(), false);
    for (StateIndex b : B) reach.at(b) = true;
    for (StateIndex i = P.size(); i-- > 0;) {
        if (reach[i]) continue;
        for (StateIndex j = i + 1; j < P.size() && !reach[i]; ++j)
            if (P(i, j) != 0 && reach[j]) reach[i] = true;
    }
    return reach;
}

template <Scalar S>
bool reachable(const TransitionMatrix<S>& P, StateIndex from, std::span<const StateIndex> B) {
    if (from >= P.size()) throw ValidationError("state index out of range");
    return can_reach(P, B)[from];
}

/// g(δ) = E_δ(z^{ζ_B}; ζ_B < ∞) for every state, by back-substitution:
/// g = 1 on B, g = 0 where B is unreachable, else
/// g(δ) (1 - z P_δδ) = z Σ_{δ' ≠ δ} P_δδ' g(δ').
template <Scalar S>
std::vector<S> hitting_functionals(const TransitionMatrix<S>& P, std::span<const StateIndex> B, const S& z) {
    if (!(z > 0)) throw ValidationError("hitting functional needs z > 0");
    const auto reach = can_reach(P, B);
    std::vector<bool> in_B(P.size(), false);
    for (StateIndex b : B) in_B[b] = true;
    std::vector<S> g(P.size(), S(0));
    for (StateIndex i = P.size(); i-- > 0;) {
        if (in_B[i]) {
            g[i] = S(1);
            continue;
        }
        if (!reach[i]) continue;
        const S pivot = S(1) - z * P(i, i);
        if (!(pivot > 0))
            throw DivergenceError("hitting functional diverges: z * P(" + std::to_string(i) + "," + std::to_string(i) +
                                  ") = " + format_scalar(S(z * P(i, i))) + " is not below 1");
        S acc(0);
        for (StateIndex j = i + 1; j < P.size(); ++j)
            if (P(i, j) != 0 && g[j] != 0) acc += P(i, j) * g[j];
        g[i] = z * acc / pivot;
    }
    return g;
}

template <Scalar S>
S hitting_functional(const TransitionMatrix<S>& P, std::span<const StateIndex> B, const S& z, StateIndex start) {
    if (start >= P.size()) throw ValidationError("state index out of range");
    return hitting_functionals(P, B, z)[start];
}

}  // namespace recomb
