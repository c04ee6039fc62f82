#pragma once

// Quasi-stationary analysis of the partition chain before absorption at D^ρ.
//
//   Δ   transient states with a direct arc to D^ρ
//   η   max_{δ∈Δ} P_δδ, the geometric decay rate of P(ζ > n)
//   F   argmax of the above; each member only moves to itself or D^ρ
//   β₀  largest holding probability among transient states outside F (< η)
//   φ   φ_δ = E_δ(η^{-ζ_F}; ζ_F < ∞), a right η-eigenvector of P restricted
//       to the transient states
//
// Vectors indexed by state are full length; the absorbing entry is zero and
// carries no meaning for quantities defined on the transient states.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recomb/chain.hpp"
#include "recomb/error.hpp"
#include "recomb/scalar.hpp"

namespace recomb {

/// Float-mode tolerance for ties in holding probabilities and for identities.
inline constexpr double float_identity_tolerance = 1e-9;
inline constexpr double float_tie_tolerance = 1e-12;

/// Δ. Throws DegenerateModelError when rho({I}) = 1 (then D^ρ = {I}).
template <Scalar S>
StateSet delta_set(const TransitionMatrix<S>& P) {
    if (P.absorbing() == P.start())
        throw DegenerateModelError("rho puts all mass on the coarsest partition; the chain never moves");
    StateSet out;
    for (StateIndex i = 0; i < P.size(); ++i)
        if (i != P.absorbing() && P(i, P.absorbing()) != 0) out.push_back(i);
    return out;
}

template <Scalar S>
struct DecayRate {
    S eta;
    StateSet F;
    /// η = 0: every Δ state has zero holding probability.
    bool degenerate = false;
};

/// η and the full argmax set F over Δ. Checks P_δδ + P_δ,D^ρ = 1 on F.
template <Scalar S>
DecayRate<S> eta_and_F(const TransitionMatrix<S>& P, std::span<const StateIndex> delta) {
    if (delta.empty()) throw ValidationError("eta needs a nonempty Δ");
    DecayRate<S> out{P(delta.front(), delta.front()), {}, false};
    for (StateIndex d : delta)
        if (P(d, d) > out.eta) out.eta = P(d, d);
    for (StateIndex d : delta)
        if (approx_equal<S>(P(d, d), out.eta, float_tie_tolerance)) out.F.push_back(d);
    if (out.eta == 0) {
        out.degenerate = true;
        return out;
    }
    for (StateIndex d : out.F) {
        if (!approx_equal<S>(S(P(d, d) + P(d, P.absorbing())), S(1), float_identity_tolerance))
            throw ConsistencyError("state " + std::to_string(d) + " in F has mass " +
                                   format_scalar(S(S(1) - P(d, d) - P(d, P.absorbing()))) +
                                   " leaving to states other than itself and D^rho");
    }
    return out;
}

/// max P_δδ over transient δ ∉ F, or 0 when that range is empty.
template <Scalar S>
S beta0(const TransitionMatrix<S>& P, std::span<const StateIndex> F) {
    S best(0);
    for (StateIndex i = 0; i < P.size(); ++i) {
        if (i == P.absorbing() || std::find(F.begin(), F.end(), i) != F.end()) continue;
        if (P(i, i) > best) best = P(i, i);
    }
    return best;
}

/// Same, and checks β₀ < η.
template <Scalar S>
S beta0(const TransitionMatrix<S>& P, std::span<const StateIndex> F, const S& eta) {
    S b = beta0(P, F);
    if (!(b < eta))
        throw ConsistencyError("beta0 = " + format_scalar(b) + " is not below eta = " + format_scalar(eta));
    return b;
}

/// True iff P* v = λ v on the transient states.
template <Scalar S>
bool is_right_eigenvector(const TransitionMatrix<S>& P, std::span<const S> v, const S& lambda) {
    for (StateIndex i = 0; i < P.size(); ++i) {
        if (i == P.absorbing()) continue;
        S acc(0);
        for (StateIndex j = 0; j < P.size(); ++j)
            if (j != P.absorbing() && P(i, j) != 0) acc += P(i, j) * v[j];
        if (!approx_equal<S>(acc, S(lambda * v[i]), float_identity_tolerance)) return false;
    }
    return true;
}

/// True iff ν' P* = λ ν' on the transient states.
template <Scalar S>
bool is_left_eigenvector(const TransitionMatrix<S>& P, std::span<const S> nu, const S& lambda) {
    for (StateIndex j = 0; j < P.size(); ++j) {
        if (j == P.absorbing()) continue;
        S acc(0);
        for (StateIndex i = 0; i < P.size(); ++i)
            if (i != P.absorbing() && P(i, j) != 0) acc += nu[i] * P(i, j);
        if (!approx_equal<S>(acc, S(lambda * nu[j]), float_identity_tolerance)) return false;
    }
    return true;
}

/// φ by exact back-substitution; checks the eigen-identity P* φ = η φ.
template <Scalar S>
std::vector<S> phi_vector(const TransitionMatrix<S>& P, std::span<const StateIndex> F, const S& eta) {
    if (!(eta > 0)) throw ValidationError("phi needs eta > 0");
    std::vector<S> phi = hitting_functionals(P, F, S(S(1) / eta));
    if (!is_right_eigenvector<S>(P, phi, eta)) throw ConsistencyError("phi is not a right eigenvector of P* for eta");
    return phi;
}

/// E(η^{-ζ_F}; ζ_F < ∞) from {I}, the limit of η^{-n} P(ζ > n).
template <Scalar S>
S limit_constant(const TransitionMatrix<S>& P, std::span<const StateIndex> F, const S& eta) {
    S c = phi_vector(P, F, eta)[P.start()];
    if (!(c > 0)) throw ConsistencyError("F is unreachable from the coarsest partition");
    return c;
}

/// lim P(Y_n = δ | ζ > n): the per-target hitting functionals on F over the limit constant.
template <Scalar S>
std::vector<S> quasi_limiting(const TransitionMatrix<S>& P, std::span<const StateIndex> F, const S& eta) {
    const S c = limit_constant(P, F, eta);
    const S z = S(1) / eta;
    std::vector<S> out(P.size(), S(0));
    S total(0);
    for (StateIndex d : F) {
        const StateIndex target[] = {d};
        out[d] = hitting_functional<S>(P, target, z, P.start()) / c;
        total += out[d];
    }
    if (!approx_equal<S>(total, S(1), float_identity_tolerance))
        throw ConsistencyError("quasi-limiting distribution sums to " + format_scalar(total));
    return out;
}

/// lim P_δ(ζ > n) / P(ζ > n) = φ_δ / φ_{I}.
template <Scalar S>
S ratio_limit(const TransitionMatrix<S>& P, std::span<const StateIndex> F, const S& eta, StateIndex start) {
    if (start >= P.size() || start == P.absorbing())
        throw ValidationError("ratio limit needs a transient start state");
    const auto phi = phi_vector(P, F, eta);
    return phi[start] / phi[P.start()];
}

/// A square matrix over a subset of the chain's states.
template <Scalar S>
struct SubMatrix {
    StateSet states;
    std::vector<S> values;

    std::size_t size() const noexcept { return states.size(); }
    const S& at(std::size_t r, std::size_t c) const { return values[r * states.size() + c]; }
    S& at(std::size_t r, std::size_t c) { return values[r * states.size() + c]; }

    std::optional<std::size_t> position(StateIndex k) const {
        auto it = std::find(states.begin(), states.end(), k);
        if (it == states.end()) return std::nullopt;
        return static_cast<std::size_t>(it - states.begin());
    }

    /// Entry by chain state index; zero off the subset.
    S operator()(StateIndex i, StateIndex j) const {
        auto r = position(i), c = position(j);
        if (!r || !c) return S(0);
        return at(*r, *c);
    }
};

/// The h-transform η^{-1} P_δδ' h_δ'/h_δ over the transient states where h > 0.
template <Scalar S>
SubMatrix<S> h_transform(const TransitionMatrix<S>& P, std::span<const S> h, const S& eta) {
    SubMatrix<S> Q;
    for (StateIndex i = 0; i < P.size(); ++i)
        if (i != P.absorbing() && h[i] > 0) Q.states.push_back(i);
    const std::size_t m = Q.states.size();
    Q.values.assign(m * m, S(0));
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) {
            const StateIndex i = Q.states[r], j = Q.states[c];
            if (P(i, j) != 0) Q.at(r, c) = P(i, j) * h[j] / (eta * h[i]);
        }
    return Q;
}

/// The Q-process matrix on ∂(ζ_F) = {δ transient : F reachable from δ}.
template <Scalar S>
SubMatrix<S> q_matrix(const TransitionMatrix<S>& P, std::span<const StateIndex> F, const S& eta,
                      std::span<const S> phi) {
    (void)F;
    return h_transform(P, phi, eta);
}

template <Scalar S>
bool rows_sum_to_one(const SubMatrix<S>& Q) {
    for (std::size_t r = 0; r < Q.size(); ++r) {
        S total(0);
        for (std::size_t c = 0; c < Q.size(); ++c) total += Q.at(r, c);
        if (!approx_equal<S>(total, S(1), float_identity_tolerance)) return false;
    }
    return true;
}

template <Scalar S>
bool absorbing_under(const SubMatrix<S>& Q, std::span<const StateIndex> F) {
    for (StateIndex d : F)
        if (!approx_equal<S>(Q(d, d), S(1), float_identity_tolerance)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Finite-n quantities used to check the limits

/// η^{-n} P_start(ζ > n) for n = 0..horizon.
template <Scalar S>
std::vector<S> scaled_survival_series(const TransitionMatrix<S>& P, StateIndex start, std::size_t horizon,
                                      const S& scale) {
    std::vector<S> v = unit_vector<S>(P.size(), start);
    v[P.absorbing()] = S(0);
    std::vector<S> out;
    out.reserve(horizon + 1);
    for (std::size_t n = 0;; ++n) {
        S total(0);
        for (const auto& x : v) total += x;
        out.push_back(total);
        if (n == horizon) break;
        v = step<S>(P, v);
        v[P.absorbing()] = S(0);
        for (auto& x : v) x /= scale;
    }
    return out;
}

/// P_ν(Y_n = · | ζ > n), full length with zero at D^ρ.
template <Scalar S>
std::vector<S> conditional_distribution(const TransitionMatrix<S>& P, std::vector<S> nu, std::size_t n,
                                        const S& scale) {
    nu[P.absorbing()] = S(0);
    for (std::size_t k = 0; k < n; ++k) {
        nu = step<S>(P, nu);
        nu[P.absorbing()] = S(0);
        for (auto& x : nu) x /= scale;
    }
    S total(0);
    for (const auto& x : nu) total += x;
    if (!(total > 0)) throw ValidationError("the chain is absorbed by step " + std::to_string(n) + " almost surely");
    for (auto& x : nu) x /= total;
    return nu;
}

/// P_start(Y_1 = path[0], ..., Y_j = path[j-1] | ζ > n) for n ≥ j.
template <Scalar S>
S conditioned_path_probability(const TransitionMatrix<S>& P, StateIndex start, std::span<const StateIndex> path,
                               std::size_t n, const S& scale) {
    const std::size_t j = path.size();
    if (n < j) throw ValidationError("conditioning horizon shorter than the path");
    S prob(1);
    StateIndex prev = start;
    for (StateIndex s : path) {
        prob *= P(prev, s);
        prev = s;
    }
    if (prob == 0) return S(0);
    // scale^{-(n-j)} P_{δ_j}(ζ > n-j) / (scale^{-n} P_start(ζ > n)) / scale^j
    const S tail = scaled_survival(P, prev, n - j, scale);
    const S whole = scaled_survival(P, start, n, scale);
    return prob * tail / (whole * pow_int(scale, static_cast<unsigned>(j)));
}

/// ∏ Q along start → path; zero once the path leaves the matrix's states.
template <Scalar S>
S path_product(const SubMatrix<S>& Q, StateIndex start, std::span<const StateIndex> path) {
    S prob(1);
    StateIndex prev = start;
    for (StateIndex s : path) {
        prob *= Q(prev, s);
        prev = s;
    }
    return prob;
}

struct PathComparison {
    StateSet path;
    double conditioned = 0;
    double product = 0;
};

/// Compares P(Y_1..Y_j = path | ζ > n) with the Q-path product for every
/// positive-probability path of transient states of length 1..max_length
/// from {I}. Returns the comparisons; the caller picks the tolerance.
template <Scalar S>
std::vector<PathComparison> compare_conditioned_paths(const TransitionMatrix<S>& P, const SubMatrix<S>& Q,
                                                      const S& eta, std::size_t n, std::size_t max_length) {
    std::vector<PathComparison> out;
    std::vector<StateSet> frontier{{}};
    for (std::size_t len = 1; len <= max_length; ++len) {
        std::vector<StateSet> next;
        for (const auto& prefix : frontier) {
            const StateIndex last = prefix.empty() ? P.start() : prefix.back();
            for (StateIndex s = last; s < P.size(); ++s) {
                if (s == P.absorbing() || P(last, s) == 0) continue;
                StateSet path = prefix;
                path.push_back(s);
                PathComparison c;
                c.path = path;
                c.conditioned = to_double(conditioned_path_probability<S>(P, P.start(), path, n, eta));
                c.product = to_double(path_product<S>(Q, P.start(), path));
                out.push_back(c);
                next.push_back(std::move(path));
            }
        }
        frontier = std::move(next);
    }
    return out;
}

inline double max_path_error(const std::vector<PathComparison>& cs) {
    double worst = 0;
    for (const auto& c : cs) worst = std::max(worst, std::abs(c.conditioned - c.product));
    return worst;
}

// ---------------------------------------------------------------------------
// Quasi-stationary distributions

inline constexpr std::size_t qsd_check_horizon = 50;

struct QsdCheck {
    bool supported_on_F = false;
    bool left_eigenvector = false;
    /// P_ν(Y_n = δ | ζ > n) = ν_δ for 1 ≤ n ≤ horizon.
    bool conditional_invariance = false;
    /// 1_∂' P* = η 1_∂' for every nonempty ∂ ⊆ F.
    bool indicator_left_eigen = false;
    /// (P* 1_∂)_δ = η 1_∂(δ) for every δ ∈ F and nonempty ∂ ⊆ F.
    bool indicator_right_eigen_on_F = false;
    std::size_t horizon = qsd_check_horizon;

    bool is_qsd() const noexcept {
        return supported_on_F && left_eigenvector && conditional_invariance && indicator_left_eigen &&
               indicator_right_eigen_on_F;
    }
};

namespace detail {

// Nonempty subsets of F; all of them up to |F| = 10, otherwise singletons and F.
inline std::vector<StateSet> indicator_subsets(std::span<const StateIndex> F) {
    std::vector<StateSet> out;
    if (F.size() <= 10) {
        for (std::size_t mask = 1; mask < (std::size_t{1} << F.size()); ++mask) {
            StateSet s;
            for (std::size_t k = 0; k < F.size(); ++k)
                if (mask >> k & 1u) s.push_back(F[k]);
            out.push_back(std::move(s));
        }
    } else {
        for (StateIndex d : F) out.push_back({d});
        out.emplace_back(F.begin(), F.end());
    }
    return out;
}

}  // namespace detail

/// ν is a full-length vector over the states with ν(D^ρ) = 0, summing to 1.
template <Scalar S>
QsdCheck qsd_check(std::span<const S> nu, const TransitionMatrix<S>& P, std::span<const StateIndex> F,
                   const S& eta, std::size_t horizon = qsd_check_horizon) {
    if (nu.size() != P.size()) throw ValidationError("distribution length does not match the state space");
    S total(0);
    for (const auto& x : nu) {
        if (x < 0) throw ValidationError("distribution has a negative entry");
        total += x;
    }
    if (nu[P.absorbing()] != 0) throw ValidationError("distribution puts mass on the absorbing state");
    if (!approx_equal<S>(total, S(1), float_identity_tolerance))
        throw ValidationError("distribution sums to " + format_scalar(total) + ", expected 1");

    QsdCheck out;
    out.horizon = horizon;
    out.supported_on_F = true;
    for (StateIndex i = 0; i < P.size(); ++i)
        if (nu[i] != 0 && std::find(F.begin(), F.end(), i) == F.end()) out.supported_on_F = false;
    if (!out.supported_on_F) return out;

    out.left_eigenvector = is_left_eigenvector<S>(P, nu, eta);

    out.conditional_invariance = true;
    std::vector<S> v(nu.begin(), nu.end());
    for (std::size_t n = 1; n <= horizon && out.conditional_invariance; ++n) {
        v = step<S>(P, v);
        v[P.absorbing()] = S(0);
        S alive(0);
        for (const auto& x : v) alive += x;
        for (StateIndex i = 0; i < P.size(); ++i) {
            if (i == P.absorbing()) continue;
            if (!approx_equal<S>(S(v[i] / alive), nu[i], float_identity_tolerance)) {
                out.conditional_invariance = false;
                break;
            }
        }
        // Renormalize to keep exact numbers small; the conditional law is unchanged.
        for (auto& x : v) x /= alive;
    }

    out.indicator_left_eigen = true;
    out.indicator_right_eigen_on_F = true;
    for (const auto& subset : detail::indicator_subsets(F)) {
        std::vector<S> indicator(P.size(), S(0));
        for (StateIndex d : subset) indicator[d] = S(1);
        if (!is_left_eigenvector<S>(P, indicator, eta)) out.indicator_left_eigen = false;
        for (StateIndex d : F) {
            S acc(0);
            for (StateIndex j = 0; j < P.size(); ++j)
                if (j != P.absorbing()) acc += P(d, j) * indicator[j];
            if (!approx_equal<S>(acc, S(eta * indicator[d]), float_identity_tolerance))
                out.indicator_right_eigen_on_F = false;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Full report

template <Scalar S>
struct QuasiStationaryReport {
    /// True when the analysis does not apply: rho({I}) = 1, or η = 0.
    bool degenerate = false;
    std::string degenerate_reason;
    /// With η = 0 absorption happens within this many steps.
    std::size_t absorption_bound = 0;

    StateSet delta;
    S eta{0};
    StateSet F;
    S beta0{0};
    std::vector<S> phi;
    SubMatrix<S> Q;
    std::vector<S> quasi_limiting;
    S limit_constant{0};

    /// (β₀ + θ)/η with θ = (η - β₀)/2: the geometric rate of the approach to the limits.
    S convergence_ratio() const { return (beta0 + (eta - beta0) / 2) / eta; }
};

template <Scalar S>
QuasiStationaryReport<S> analyze(const TransitionMatrix<S>& P) {
    QuasiStationaryReport<S> r;
    r.absorption_bound = P.size();
    if (P.absorbing() == P.start()) {
        r.degenerate = true;
        r.degenerate_reason = "rho({I}) = 1: the recombination map is the identity";
        r.absorption_bound = 0;
        return r;
    }
    r.delta = delta_set(P);
    auto rate = eta_and_F<S>(P, r.delta);
    r.eta = rate.eta;
    r.F = rate.F;
    if (rate.degenerate) {
        r.degenerate = true;
        r.degenerate_reason = "eta = 0: absorption within " + std::to_string(P.size()) + " steps";
        return r;
    }
    r.beta0 = beta0<S>(P, r.F, r.eta);
    r.phi = phi_vector<S>(P, r.F, r.eta);
    r.limit_constant = r.phi[P.start()];
    if (!(r.limit_constant > 0)) throw ConsistencyError("F is unreachable from the coarsest partition");
    r.quasi_limiting = quasi_limiting<S>(P, r.F, r.eta);
    r.Q = q_matrix<S>(P, r.F, r.eta, r.phi);
    if (!rows_sum_to_one(r.Q)) throw ConsistencyError("Q is not stochastic");
    if (!absorbing_under<S>(r.Q, r.F)) throw ConsistencyError("an F state is not absorbing under Q");
    return r;
}

}  // namespace recomb
