#pragma once

// Set partitions of the index set I = {1,...,n} in restricted-growth form,
// the common refinement (join), the refinement order, and the closure of a
// family of partitions under joins.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "recomb/error.hpp"

namespace recomb {

/// Sites are 0-based internally; text forms use 1-based labels.
using Site = std::size_t;
using SiteSet = std::vector<Site>;

inline constexpr std::size_t default_state_cap = 50'000;

/// A canonical set partition: label[i] is the block of site i, labels in
/// restricted-growth form (label[0] == 0, each label at most one above the
/// running maximum). Equal partitions have equal label arrays.
class Partition {
public:
    Partition() = default;

    /// Validates restricted-growth form.
    explicit Partition(std::vector<std::uint32_t> rgs) : labels_(std::move(rgs)) {
        std::uint32_t next = 0;
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (labels_[i] > next)
                throw ValidationError("label " + std::to_string(labels_[i]) + " at site " +
                                      std::to_string(i + 1) + " breaks restricted-growth form");
            if (labels_[i] == next) ++next;
        }
        blocks_ = next;
    }

    static Partition coarsest(std::size_t n) { return Partition(std::vector<std::uint32_t>(n, 0)); }

    static Partition finest(std::size_t n) {
        std::vector<std::uint32_t> rgs(n);
        for (std::size_t i = 0; i < n; ++i) rgs[i] = static_cast<std::uint32_t>(i);
        return Partition(std::move(rgs));
    }

    /// Relabels arbitrary block ids by first occurrence.
    static Partition from_labels(std::span<const std::size_t> ids) {
        std::unordered_map<std::size_t, std::uint32_t> relabel;
        std::vector<std::uint32_t> rgs(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) {
            auto [it, inserted] = relabel.try_emplace(ids[i], static_cast<std::uint32_t>(relabel.size()));
            rgs[i] = it->second;
        }
        return Partition(std::move(rgs));
    }

    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t num_blocks() const noexcept { return blocks_; }
    std::uint32_t label(Site i) const { return labels_.at(i); }
    const std::vector<std::uint32_t>& rgs() const noexcept { return labels_; }

    bool is_coarsest() const noexcept { return blocks_ <= 1; }
    bool is_finest() const noexcept { return blocks_ == labels_.size(); }

    /// Atoms in label order (sorted by least element), sites ascending.
    std::vector<SiteSet> blocks() const {
        std::vector<SiteSet> out(blocks_);
        for (std::size_t i = 0; i < labels_.size(); ++i) out[labels_[i]].push_back(i);
        return out;
    }

    friend bool operator==(const Partition&, const Partition&) = default;
    friend auto operator<=>(const Partition& a, const Partition& b) { return a.labels_ <=> b.labels_; }

private:
    std::vector<std::uint32_t> labels_;
    std::size_t blocks_ = 0;
};

/// Builds the canonical partition from explicit 0-based blocks over n sites.
inline Partition canonicalize(std::span<const SiteSet> blocks, std::size_t n) {
    constexpr std::size_t unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> owner(n, unset);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].empty()) throw ValidationError("empty block in partition");
        for (Site s : blocks[b]) {
            if (s >= n) throw ValidationError("site " + std::to_string(s + 1) + " outside 1.." + std::to_string(n));
            if (owner[s] != unset)
                throw ValidationError("site " + std::to_string(s + 1) + " appears in more than one block");
            owner[s] = b;
        }
    }
    for (Site s = 0; s < n; ++s)
        if (owner[s] == unset) throw ValidationError("site " + std::to_string(s + 1) + " is not covered");
    return Partition::from_labels(owner);
}

/// Same, with n taken as the largest site present.
inline Partition canonicalize(std::span<const SiteSet> blocks) {
    std::size_t n = 0;
    for (const auto& b : blocks)
        for (Site s : b) n = std::max(n, s + 1);
    return canonicalize(blocks, n);
}

namespace detail {
inline void require_same_size(const Partition& d, const Partition& e) {
    if (d.size() != e.size())
        throw ValidationError("partitions over different index sets (" + std::to_string(d.size()) + " vs " +
                              std::to_string(e.size()) + " sites)");
}
}  // namespace detail

/// Common refinement: atoms are the nonempty intersections K ∩ K'.
inline Partition join(const Partition& d, const Partition& e) {
    detail::require_same_size(d, e);
    const std::size_t n = d.size();
    const std::size_t width = e.num_blocks();
    std::vector<std::uint32_t> pair_label(d.num_blocks() * width, UINT32_MAX);
    std::vector<std::uint32_t> rgs(n);
    std::uint32_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto& slot = pair_label[d.label(i) * width + e.label(i)];
        if (slot == UINT32_MAX) slot = next++;
        rgs[i] = slot;
    }
    return Partition(std::move(rgs));
}

/// True iff d ⪯ e, i.e. e is finer than (or equal to) d.
inline bool finer_eq(const Partition& d, const Partition& e) {
    detail::require_same_size(d, e);
    std::vector<std::uint32_t> image(e.num_blocks(), UINT32_MAX);
    for (std::size_t i = 0; i < e.size(); ++i) {
        auto& slot = image[e.label(i)];
        if (slot == UINT32_MAX)
            slot = d.label(i);
        else if (slot != d.label(i))
            return false;
    }
    return true;
}

/// A duplicate-free set of partitions over a common index set.
class PartitionFamily {
public:
    PartitionFamily() = default;

    explicit PartitionFamily(std::span<const Partition> members) {
        for (const auto& p : members) insert(p);
    }

    /// Returns false if p was already present.
    bool insert(const Partition& p) {
        if (!members_.empty() && members_.begin()->size() != p.size())
            throw ValidationError("family members must share the index set size");
        return members_.insert(p).second;
    }

    bool contains(const Partition& p) const { return members_.count(p) != 0; }
    bool empty() const noexcept { return members_.empty(); }
    std::size_t size() const noexcept { return members_.size(); }
    std::size_t sites() const noexcept { return members_.empty() ? 0 : members_.begin()->size(); }

    auto begin() const { return members_.begin(); }
    auto end() const { return members_.end(); }

    friend bool operator==(const PartitionFamily&, const PartitionFamily&) = default;

private:
    std::set<Partition> members_;
};

/// The join of every member; the finest partition of the closure.
inline Partition common_refinement(const PartitionFamily& family) {
    if (family.empty()) throw ValidationError("common refinement of an empty family");
    auto it = family.begin();
    Partition acc = *it;
    for (++it; it != family.end(); ++it) acc = join(acc, *it);
    return acc;
}

/// Smallest family containing G and closed under δ ↦ δ ∨ D for D ∈ G.
/// Worklist fixpoint; throws ResourceError once more than `cap` partitions are found.
inline PartitionFamily closure(const PartitionFamily& generators, std::size_t cap = default_state_cap) {
    if (generators.empty()) throw ValidationError("closure of an empty family");
    PartitionFamily out;
    std::deque<Partition> work;
    auto visit = [&](const Partition& p) {
        if (out.insert(p)) {
            if (out.size() > cap)
                throw ResourceError("closure exceeds the state cap of " + std::to_string(cap) + " partitions",
                                    out.size());
            work.push_back(p);
        }
    };
    for (const auto& g : generators) visit(g);
    while (!work.empty()) {
        Partition current = std::move(work.front());
        work.pop_front();
        for (const auto& g : generators) visit(join(current, g));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Text syntax: block form `{1,3}{2}` and rgs form `0,1,0`.

/// Block form: blocks sorted by least element, elements ascending, 1-based.
inline std::string to_string(const Partition& p) {
    std::string out;
    for (const auto& block : p.blocks()) {
        out += '{';
        for (std::size_t k = 0; k < block.size(); ++k) {
            if (k) out += ',';
            out += std::to_string(block[k] + 1);
        }
        out += '}';
    }
    return out;
}

inline std::string to_rgs_string(const Partition& p) {
    std::string out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(p.label(i));
    }
    return out;
}

namespace detail {

inline std::size_t parse_index(std::string_view tok, std::string_view whole) {
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    if (tok.empty() || tok.size() > 9 || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw ValidationError("malformed partition '" + std::string(whole) + "'");
    return static_cast<std::size_t>(std::stoul(std::string(tok)));
}

}  // namespace detail

/// Accepts either text form. `expected_sites`, when nonzero, must match.
inline Partition parse_partition(std::string_view text, std::size_t expected_sites = 0) {
    const std::string_view whole = text;
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    if (text.empty()) throw ValidationError("empty partition text");

    Partition result;
    if (text.front() == '{') {
        std::vector<SiteSet> blocks;
        std::size_t pos = 0;
        while (pos < text.size()) {
            if (text[pos] == ' ') {
                ++pos;
                continue;
            }
            if (text[pos] != '{') throw ValidationError("malformed partition '" + std::string(whole) + "'");
            auto close = text.find('}', pos);
            if (close == std::string_view::npos)
                throw ValidationError("unterminated block in '" + std::string(whole) + "'");
            std::string_view body = text.substr(pos + 1, close - pos - 1);
            SiteSet block;
            std::size_t start = 0;
            while (start <= body.size()) {
                auto comma = body.find(',', start);
                if (comma == std::string_view::npos) comma = body.size();
                std::size_t site = detail::parse_index(body.substr(start, comma - start), whole);
                if (site == 0) throw ValidationError("site labels are 1-based in '" + std::string(whole) + "'");
                block.push_back(site - 1);
                start = comma + 1;
            }
            blocks.push_back(std::move(block));
            pos = close + 1;
        }
        std::size_t n = expected_sites;
        if (n == 0)
            for (const auto& b : blocks)
                for (Site s : b) n = std::max(n, s + 1);
        result = canonicalize(blocks, n);
    } else {
        std::vector<std::uint32_t> rgs;
        std::size_t start = 0;
        while (start <= text.size()) {
            auto comma = text.find(',', start);
            if (comma == std::string_view::npos) comma = text.size();
            rgs.push_back(static_cast<std::uint32_t>(detail::parse_index(text.substr(start, comma - start), whole)));
            start = comma + 1;
        }
        result = Partition(std::move(rgs));
    }
    if (expected_sites != 0 && result.size() != expected_sites)
        throw ValidationError("partition '" + std::string(whole) + "' has " + std::to_string(result.size()) +
                              " sites, expected " + std::to_string(expected_sites));
    return result;
}

}  // namespace recomb

template <>
struct std::hash<recomb::Partition> {
    std::size_t operator()(const recomb::Partition& p) const noexcept {
        std::size_t h = 0xcbf29ce484222325ull;
        for (auto v : p.rgs()) h = (h ^ v) * 0x100000001b3ull;
        return h;
    }
};
