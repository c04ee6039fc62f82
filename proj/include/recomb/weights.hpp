#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "recomb/partition.hpp"
#include "recomb/scalar.hpp"

namespace recomb {

/// Tolerance on the total of float-mode weights before it is rejected.
inline constexpr double float_weight_tolerance = 1e-9;

/// The probability vector rho over partitions. Zero weights are dropped, so
/// the stored entries are exactly the support.
template <Scalar S>
class PartitionWeights {
public:
    using Entry = std::pair<Partition, S>;

    PartitionWeights() = default;

    /// Entries must be nonnegative, share one site count, contain no
    /// duplicate partitions, and total 1 (exactly, or within 1e-9 for doubles).
    explicit PartitionWeights(std::vector<Entry> entries) {
        S total(0);
        for (auto& [p, w] : entries) {
            if (w < 0) throw ValidationError("negative weight on " + to_string(p));
            if (!entries_.empty() && entries_.front().first.size() != p.size())
                throw ValidationError("weights mix partitions of different site counts");
            for (const auto& existing : entries_)
                if (existing.first == p) throw ValidationError("duplicate weight for " + to_string(p));
            total += w;
            if (w > 0) entries_.emplace_back(std::move(p), std::move(w));
        }
        if (entries_.empty()) throw ValidationError("weights have empty support");
        if (!approx_equal<S>(total, S(1), float_weight_tolerance))
            throw ValidationError("weights total " + format_scalar(total) + ", expected 1");
        std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
    }

    /// Scales positive weights to total exactly 1 (float mode accepts small drift).
    static PartitionWeights normalized(std::vector<Entry> entries) {
        S total(0);
        for (const auto& e : entries) total += e.second;
        if (!(total > 0)) throw ValidationError("weights have zero total");
        for (auto& e : entries) e.second /= total;
        if constexpr (!is_exact_v<S>) {
            // Absorb rounding residue in the largest entry.
            S sum(0);
            std::size_t big = 0;
            for (std::size_t k = 0; k < entries.size(); ++k) {
                sum += entries[k].second;
                if (entries[k].second > entries[big].second) big = k;
            }
            entries[big].second += S(1) - sum;
        }
        return PartitionWeights(std::move(entries));
    }

    std::size_t sites() const noexcept { return entries_.front().first.size(); }
    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<Entry>& entries() const noexcept { return entries_; }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    S weight(const Partition& p) const {
        for (const auto& [q, w] : entries_)
            if (q == p) return w;
        return S(0);
    }

    PartitionFamily support() const {
        PartitionFamily f;
        for (const auto& e : entries_) f.insert(e.first);
        return f;
    }

    /// rho({I}) == 1: the recombination map is the identity.
    bool is_identity() const { return entries_.size() == 1 && entries_.front().first.is_coarsest(); }

    template <Scalar T>
    PartitionWeights<T> as() const {
        std::vector<typename PartitionWeights<T>::Entry> out;
        for (const auto& [p, w] : entries_) {
            if constexpr (std::same_as<S, T>)
                out.emplace_back(p, w);
            else if constexpr (is_exact_v<T>)
                out.emplace_back(p, to_rational(w));
            else
                out.emplace_back(p, to_double(w));
        }
        if constexpr (is_exact_v<T> && !is_exact_v<S>)
            return PartitionWeights<T>::normalized(std::move(out));
        else
            return PartitionWeights<T>(std::move(out));
    }

private:
    std::vector<Entry> entries_;
};

}  // namespace recomb
