#pragma once

// Runs every exact invariant of a model and reports one result per check.
// Nothing here throws on a failed identity; failures become results.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "recomb/chain.hpp"
#include "recomb/measure.hpp"
#include "recomb/quasistationary.hpp"
#include "recomb/random.hpp"

namespace recomb {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyOptions {
    /// Steps of the xi_iterate / chain-mixture comparison.
    std::size_t steps = 8;
    /// Random mixtures on F tested as quasi-stationary distributions.
    std::size_t random_qsd_samples = 5;
    std::uint64_t seed = 1;
    /// Entrywise tolerance for measure comparisons in float mode.
    double float_tolerance = 1e-10;
};

inline bool all_passed(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.passed) return false;
    return true;
}

namespace detail {

inline void record(std::vector<CheckResult>& out, std::string name, const std::function<std::string()>& body) {
    // Body returns an empty string on success, otherwise the failure detail.
    try {
        std::string failure = body();
        out.push_back({std::move(name), failure.empty(), std::move(failure)});
    } catch (const std::exception& e) {
        out.push_back({std::move(name), false, e.what()});
    }
}

/// Random probability vector on F (full length), positive on every member.
template <Scalar S>
std::vector<S> random_mixture_on(std::span<const StateIndex> F, std::size_t n, CounterRng& rng) {
    std::vector<S> nu(n, S(0));
    S total(0);
    for (StateIndex d : F) {
        if constexpr (is_exact_v<S>)
            nu[d] = S(static_cast<long>(rng() % 97 + 1));
        else
            nu[d] = to_unit_interval(rng());
        total += nu[d];
    }
    for (auto& x : nu) x /= total;
    return nu;
}

}  // namespace detail

template <Scalar S>
std::vector<CheckResult> verify_model(const Chain<S>& chain, const ProductMeasure<S>* measure = nullptr,
                                      const VerifyOptions& options = {}) {
    std::vector<CheckResult> out;
    const auto& P = chain.P;
    const auto& space = chain.space;
    const PartitionFamily support = chain.rho.support();
    const double tol = float_identity_tolerance;

    detail::record(out, "closure.fixpoint", [&]() -> std::string {
        PartitionFamily closed = closure(support, space.size() + 1);
        for (const auto& x : closed)
            for (const auto& g : support)
                if (!closed.contains(join(x, g))) return to_string(x) + " v " + to_string(g) + " escapes the closure";
        return {};
    });
    detail::record(out, "closure.common_refinement_dominates", [&]() -> std::string {
        const Partition top = common_refinement(support);
        if (space[space.absorbing()] != top) return "absorbing state differs from the common refinement";
        for (const auto& x : space.states())
            if (!finer_eq(x, top)) return to_string(top) + " is not finer than " + to_string(x);
        return {};
    });
    detail::record(out, "partition.round_trip", [&]() -> std::string {
        for (const auto& x : space.states())
            if (parse_partition(to_string(x)) != x) return to_string(x) + " does not re-parse";
        return {};
    });
    detail::record(out, "matrix.row_sums", [&]() -> std::string {
        for (StateIndex i = 0; i < P.size(); ++i) {
            S total(0);
            for (const auto& v : P.row(i)) total += v;
            if (!approx_equal<S>(total, S(1), tol)) return "row " + to_string(space[i]) + " sums to " + format_scalar(total);
        }
        return {};
    });
    detail::record(out, "matrix.refinement_order", [&]() -> std::string {
        for (StateIndex i = 0; i < P.size(); ++i)
            for (StateIndex j = 0; j < P.size(); ++j)
                if (P(i, j) != 0 && (j < i || !finer_eq(space[i], space[j])))
                    return "arc " + to_string(space[i]) + " -> " + to_string(space[j]) + " goes against the order";
        return {};
    });
    detail::record(out, "matrix.positive_diagonal", [&]() -> std::string {
        const PartitionFamily closed = closure(support, space.size() + 1);
        for (StateIndex i = 0; i < P.size(); ++i)
            if (closed.contains(space[i]) && !(P(i, i) > 0)) return "zero holding probability at " + to_string(space[i]);
        return {};
    });
    detail::record(out, "matrix.absorbing_unit_row", [&]() -> std::string {
        const StateIndex a = space.absorbing();
        for (StateIndex j = 0; j < P.size(); ++j)
            if (P(a, j) != (j == a ? S(1) : S(0))) return "absorbing row is not a unit row";
        return {};
    });
    detail::record(out, "matrix.diagonal_increases", [&]() -> std::string {
        for (StateIndex i = 0; i < P.size(); ++i)
            for (StateIndex j = i + 1; j < P.size(); ++j)
                if (P(i, j) != 0 && !(P(i, i) < P(j, j)))
                    return "P at " + to_string(space[i]) + " is not below P at " + to_string(space[j]);
        return {};
    });

    if (measure) {
        const double mtol = is_exact_v<S> ? 0.0 : options.float_tolerance;
        detail::record(out, "measure.chain_mixture", [&]() -> std::string {
            ProductMeasure<S> iterated = *measure;
            for (std::size_t k = 0; k <= options.steps; ++k) {
                if (k) iterated = xi_apply(iterated, chain.rho);
                auto b = distribution_at(P, k);
                auto mixed = mixture_of_factorizations<S>(space.states(), b, *measure);
                double diff = max_abs_difference(iterated, mixed);
                if (diff > mtol) return "step " + std::to_string(k) + " differs by " + std::to_string(diff);
            }
            return {};
        });
        detail::record(out, "measure.fixed_point", [&]() -> std::string {
            auto fixed = tensor(factorize(*measure, space[space.absorbing()]));
            double diff = max_abs_difference(xi_apply(fixed, chain.rho), fixed);
            if (diff > mtol) return "recombination moves the product of D^rho marginals by " + std::to_string(diff);
            return {};
        });
    }

    if (P.absorbing() == P.start()) {
        out.push_back({"qsd.applicable", true, "degenerate: rho({I}) = 1"});
        return out;
    }
    StateSet delta = delta_set(P);
    DecayRate<S> rate{S(0), {}, false};
    try {
        rate = eta_and_F<S>(P, delta);
    } catch (const std::exception& e) {
        out.push_back({"qsd.holding_or_absorb", false, e.what()});
        return out;
    }
    if (rate.degenerate) {
        out.push_back({"qsd.applicable", true, "degenerate: eta = 0"});
        return out;
    }
    const S eta = rate.eta;
    const StateSet& F = rate.F;

    detail::record(out, "qsd.holding_or_absorb", [&]() -> std::string {
        for (StateIndex d : F)
            if (!approx_equal<S>(S(P(d, d) + P(d, P.absorbing())), S(1), tol))
                return to_string(space[d]) + " leaks to other states";
        return {};
    });
    detail::record(out, "qsd.beta0_below_eta", [&]() -> std::string {
        S b = beta0(P, std::span<const StateIndex>(F));
        if (!(b < eta)) return "beta0 " + format_scalar(b) + " >= eta " + format_scalar(eta);
        return {};
    });
    std::vector<S> phi;
    detail::record(out, "qsd.phi_right_eigenvector", [&]() -> std::string {
        phi = hitting_functionals(P, F, S(S(1) / eta));
        if (!is_right_eigenvector<S>(P, phi, eta)) return "P* phi != eta phi";
        if (!(phi[P.start()] > 0)) return "phi vanishes at the coarsest partition";
        return {};
    });
    detail::record(out, "qsd.quasi_stationary_distributions", [&]() -> std::string {
        CounterRng rng(options.seed);
        std::vector<std::vector<S>> candidates;
        for (StateIndex d : F) candidates.push_back(unit_vector<S>(P.size(), d));
        for (std::size_t k = 0; k < options.random_qsd_samples; ++k)
            candidates.push_back(detail::random_mixture_on<S>(F, P.size(), rng));
        for (const auto& nu : candidates) {
            auto check = qsd_check<S>(nu, P, F, eta);
            if (!check.is_qsd()) return "a distribution supported on F fails the quasi-stationary identities";
        }
        return {};
    });
    detail::record(out, "qsd.quasi_limiting", [&]() -> std::string {
        auto q = quasi_limiting<S>(P, F, eta);
        for (StateIndex i = 0; i < P.size(); ++i)
            if (q[i] != 0 && std::find(F.begin(), F.end(), i) == F.end()) return "mass off F";
        return {};
    });
    detail::record(out, "qprocess.stochastic", [&]() -> std::string {
        if (phi.empty()) return "phi unavailable";
        if (!rows_sum_to_one(q_matrix<S>(P, F, eta, phi))) return "a row of Q does not sum to 1";
        return {};
    });
    detail::record(out, "qprocess.F_absorbing", [&]() -> std::string {
        if (phi.empty()) return "phi unavailable";
        if (!absorbing_under<S>(q_matrix<S>(P, F, eta, phi), F)) return "an F state leaves itself under Q";
        return {};
    });
    return out;
}

}  // namespace recomb
