#pragma once

// Finite product probability measures as dense joint tables, marginals,
// products of marginals, and the recombination map
//
//     Ξ[μ] = Σ_{D ∈ supp ρ} ρ_D ⊗_{J ∈ D} μ_J .
//
// Tables are row-major over sites in ascending order (the last site varies
// fastest). A measure on zero sites is the scalar 1.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "recomb/error.hpp"
#include "recomb/partition.hpp"
#include "recomb/random.hpp"
#include "recomb/scalar.hpp"
#include "recomb/weights.hpp"

namespace recomb {

inline constexpr std::size_t default_table_cap = std::size_t{1} << 20;
inline constexpr double float_mass_tolerance = 1e-12;

/// Number of cells of ∏ k_i; throws ResourceError above `cap`.
inline std::size_t table_cells(std::span<const std::size_t> alphabet_sizes, std::size_t cap = default_table_cap) {
    std::size_t cells = 1;
    for (std::size_t k : alphabet_sizes) {
        if (k == 0) throw ValidationError("alphabet sizes must be at least 1");
        if (cells > cap / k)
            throw ResourceError("joint table exceeds the cap of " + std::to_string(cap) + " entries", cells);
        cells *= k;
    }
    return cells;
}

template <Scalar S>
class ProductMeasure {
public:
    struct unchecked_t {};
    static constexpr unchecked_t unchecked{};

    /// Validates shape, nonnegativity and unit mass.
    ProductMeasure(std::vector<std::size_t> alphabet_sizes, std::vector<S> table)
        : ProductMeasure(unchecked, std::move(alphabet_sizes), std::move(table)) {
        if (table_.size() != table_cells(sizes_, std::numeric_limits<std::size_t>::max()))
            throw ValidationError("table has " + std::to_string(table_.size()) + " entries, expected " +
                                  std::to_string(table_cells(sizes_, std::numeric_limits<std::size_t>::max())));
        S total(0);
        for (std::size_t x = 0; x < table_.size(); ++x) {
            if (table_[x] < 0) throw ValidationError("negative probability at cell " + std::to_string(x));
            total += table_[x];
        }
        if (!approx_equal<S>(total, S(1), float_mass_tolerance))
            throw ValidationError("table mass is " + format_scalar(total) + ", expected 1");
    }

    /// For results of operations that preserve the invariants by construction.
    ProductMeasure(unchecked_t, std::vector<std::size_t> alphabet_sizes, std::vector<S> table)
        : sizes_(std::move(alphabet_sizes)), table_(std::move(table)) {
        strides_.assign(sizes_.size(), 1);
        for (std::size_t i = sizes_.size(); i-- > 1;) strides_[i - 1] = strides_[i] * sizes_[i];
    }

    static ProductMeasure uniform(std::vector<std::size_t> alphabet_sizes, std::size_t cap = default_table_cap) {
        const std::size_t cells = table_cells(alphabet_sizes, cap);
        return ProductMeasure(unchecked, std::move(alphabet_sizes), std::vector<S>(cells, S(1) / S(cells)));
    }

    /// Normalized seeded positive draws. Exact mode draws integers in
    /// [1, 1000]; float mode draws uniforms in (0, 1].
    static ProductMeasure random(std::vector<std::size_t> alphabet_sizes, std::uint64_t seed,
                                 std::size_t cap = default_table_cap) {
        const std::size_t cells = table_cells(alphabet_sizes, cap);
        CounterRng rng(seed);
        std::vector<S> table(cells);
        S total(0);
        for (auto& v : table) {
            if constexpr (is_exact_v<S>)
                v = S(static_cast<long>(rng() % 1000 + 1));
            else
                v = to_unit_interval(rng());
            total += v;
        }
        for (auto& v : table) v /= total;
        return ProductMeasure(unchecked, std::move(alphabet_sizes), std::move(table));
    }

    std::size_t sites() const noexcept { return sizes_.size(); }
    const std::vector<std::size_t>& alphabet_sizes() const noexcept { return sizes_; }
    const std::vector<S>& table() const noexcept { return table_; }
    std::size_t cells() const noexcept { return table_.size(); }

    /// Letter of site i in flat cell x.
    std::size_t letter(std::size_t x, Site i) const { return (x / strides_[i]) % sizes_[i]; }

    const S& operator[](std::size_t x) const { return table_[x]; }

    S total_mass() const {
        S total(0);
        for (const auto& v : table_) total += v;
        return total;
    }

    friend bool operator==(const ProductMeasure&, const ProductMeasure&) = default;

private:
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> strides_;
    std::vector<S> table_;
};

namespace detail {

// Flat index into the sub-table over `sites` (ascending) of flat cell x of m.
template <Scalar S>
std::size_t sub_index(const ProductMeasure<S>& m, std::size_t x, std::span<const Site> sites) {
    std::size_t y = 0;
    for (Site s : sites) y = y * m.alphabet_sizes()[s] + m.letter(x, s);
    return y;
}

inline SiteSet checked_site_set(SiteSet J, std::size_t n) {
    std::sort(J.begin(), J.end());
    for (std::size_t k = 0; k < J.size(); ++k) {
        if (J[k] >= n) throw ValidationError("unknown site " + std::to_string(J[k] + 1));
        if (k && J[k] == J[k - 1]) throw ValidationError("site " + std::to_string(J[k] + 1) + " repeated");
    }
    return J;
}

}  // namespace detail

/// μ_J: the marginal on sites J (0-based). J = ∅ gives the scalar 1, J = I gives μ.
template <Scalar S>
ProductMeasure<S> marginal(const ProductMeasure<S>& m, SiteSet J) {
    J = detail::checked_site_set(std::move(J), m.sites());
    std::vector<std::size_t> sizes;
    for (Site s : J) sizes.push_back(m.alphabet_sizes()[s]);
    const std::size_t cells = table_cells(sizes, std::numeric_limits<std::size_t>::max());
    std::vector<S> table(cells, S(0));
    for (std::size_t x = 0; x < m.cells(); ++x) table[detail::sub_index(m, x, J)] += m[x];
    return ProductMeasure<S>(ProductMeasure<S>::unchecked, std::move(sizes), std::move(table));
}

/// A partition together with one probability table per atom (atoms in
/// block order, each table over the atom's sites in ascending order).
template <Scalar S>
class FactorizedMeasure {
public:
    FactorizedMeasure(Partition partition, std::vector<ProductMeasure<S>> block_marginals)
        : partition_(std::move(partition)), blocks_(std::move(block_marginals)) {
        const auto atoms = partition_.blocks();
        if (atoms.size() != blocks_.size())
            throw ValidationError("factorization has " + std::to_string(blocks_.size()) + " tables for " +
                                  std::to_string(atoms.size()) + " atoms");
        sizes_.assign(partition_.size(), 0);
        for (std::size_t b = 0; b < atoms.size(); ++b) {
            if (blocks_[b].sites() != atoms[b].size())
                throw ValidationError("table for atom " + std::to_string(b + 1) + " has the wrong number of sites");
            for (std::size_t t = 0; t < atoms[b].size(); ++t) sizes_[atoms[b][t]] = blocks_[b].alphabet_sizes()[t];
            if (!approx_equal<S>(blocks_[b].total_mass(), S(1), float_mass_tolerance))
                throw ValidationError("table for atom " + std::to_string(b + 1) + " does not sum to 1");
        }
    }

    const Partition& partition() const noexcept { return partition_; }
    const std::vector<ProductMeasure<S>>& block_marginals() const noexcept { return blocks_; }
    const std::vector<std::size_t>& alphabet_sizes() const noexcept { return sizes_; }

private:
    Partition partition_;
    std::vector<ProductMeasure<S>> blocks_;
    std::vector<std::size_t> sizes_;
};

/// The marginals of m on the atoms of δ.
template <Scalar S>
FactorizedMeasure<S> factorize(const ProductMeasure<S>& m, const Partition& delta) {
    if (delta.size() != m.sites())
        throw ValidationError("partition over " + std::to_string(delta.size()) + " sites applied to a measure over " +
                              std::to_string(m.sites()));
    std::vector<ProductMeasure<S>> blocks;
    for (auto& atom : delta.blocks()) blocks.push_back(marginal(m, std::move(atom)));
    if constexpr (!is_exact_v<S>) {
        // Rescale to unit mass; otherwise rounding in the total compounds
        // geometrically under repeated Ξ (the product of |δ| masses).
        for (auto& b : blocks) {
            const S mass = b.total_mass();
            std::vector<S> t = b.table();
            for (auto& v : t) v /= mass;
            b = ProductMeasure<S>(ProductMeasure<S>::unchecked, b.alphabet_sizes(), std::move(t));
        }
    }
    return FactorizedMeasure<S>(delta, std::move(blocks));
}

/// ⊗_{J ∈ δ} μ_J as a dense table.
template <Scalar S>
ProductMeasure<S> tensor(const FactorizedMeasure<S>& f) {
    const auto atoms = f.partition().blocks();
    std::vector<std::size_t> sizes = f.alphabet_sizes();
    const std::size_t cells = table_cells(sizes, std::numeric_limits<std::size_t>::max());
    ProductMeasure<S> shape(ProductMeasure<S>::unchecked, sizes, {});
    std::vector<S> table(cells);
    for (std::size_t x = 0; x < cells; ++x) {
        S value(1);
        for (std::size_t b = 0; b < atoms.size(); ++b) {
            std::size_t y = 0;
            for (Site s : atoms[b]) y = y * sizes[s] + shape.letter(x, s);
            value *= f.block_marginals()[b][y];
        }
        table[x] = std::move(value);
    }
    return ProductMeasure<S>(ProductMeasure<S>::unchecked, std::move(sizes), std::move(table));
}

/// The factorization restricted to sites M: atoms J ∩ M (nonempty ones) with
/// marginals μ_{J∩M}. Sites of the result are M in ascending order.
template <Scalar S>
FactorizedMeasure<S> restrict_to(const FactorizedMeasure<S>& f, SiteSet M) {
    M = detail::checked_site_set(std::move(M), f.partition().size());
    std::vector<std::size_t> ids;
    std::vector<ProductMeasure<S>> tables;
    const auto atoms = f.partition().blocks();
    for (Site s : M) ids.push_back(f.partition().label(s));
    Partition restricted = Partition::from_labels(ids);
    // New blocks appear in order of their least element in M, which is the
    // order of the original atoms' first surviving site.
    std::vector<std::uint32_t> seen;
    for (Site s : M) {
        std::uint32_t b = f.partition().label(s);
        if (std::find(seen.begin(), seen.end(), b) != seen.end()) continue;
        seen.push_back(b);
        SiteSet local;
        for (std::size_t t = 0; t < atoms[b].size(); ++t)
            if (std::binary_search(M.begin(), M.end(), atoms[b][t])) local.push_back(t);
        tables.push_back(marginal(f.block_marginals()[b], std::move(local)));
    }
    return FactorizedMeasure<S>(std::move(restricted), std::move(tables));
}

namespace detail {
template <Scalar S>
void add_scaled(std::vector<S>& acc, const S& w, const std::vector<S>& v) {
    for (std::size_t x = 0; x < acc.size(); ++x) acc[x] += w * v[x];
}
}  // namespace detail

/// One step of the recombination map.
template <Scalar S>
ProductMeasure<S> xi_apply(const ProductMeasure<S>& m, const PartitionWeights<S>& rho) {
    if (rho.sites() != m.sites())
        throw ValidationError("weights over " + std::to_string(rho.sites()) + " sites applied to a measure over " +
                              std::to_string(m.sites()));
    std::vector<S> acc(m.cells(), S(0));
    for (const auto& [D, w] : rho) detail::add_scaled(acc, w, tensor(factorize(m, D)).table());
    return ProductMeasure<S>(ProductMeasure<S>::unchecked, m.alphabet_sizes(), std::move(acc));
}

template <Scalar S>
ProductMeasure<S> xi_iterate(ProductMeasure<S> m, const PartitionWeights<S>& rho, std::size_t steps) {
    for (std::size_t k = 0; k < steps; ++k) m = xi_apply(m, rho);
    return m;
}

/// Σ_δ b(δ) ⊗_{K ∈ δ} μ_K over the given states. b must sum to 1.
template <Scalar S>
ProductMeasure<S> mixture_of_factorizations(std::span<const Partition> states, std::span<const S> b,
                                            const ProductMeasure<S>& m) {
    if (states.size() != b.size()) throw ValidationError("coefficient vector does not match the state list");
    S total(0);
    for (const auto& v : b) {
        if (v < 0) throw ValidationError("negative mixture coefficient");
        total += v;
    }
    if (!approx_equal<S>(total, S(1), float_weight_tolerance))
        throw ValidationError("mixture coefficients total " + format_scalar(total) + ", expected 1");
    std::vector<S> acc(m.cells(), S(0));
    for (std::size_t k = 0; k < states.size(); ++k)
        if (b[k] != 0) detail::add_scaled(acc, b[k], tensor(factorize(m, states[k])).table());
    return ProductMeasure<S>(ProductMeasure<S>::unchecked, m.alphabet_sizes(), std::move(acc));
}

/// Largest entrywise difference, as a double (0 means identical in exact mode).
template <Scalar S>
double max_abs_difference(const ProductMeasure<S>& a, const ProductMeasure<S>& b) {
    if (a.alphabet_sizes() != b.alphabet_sizes()) throw ValidationError("measures over different spaces");
    double worst = 0;
    for (std::size_t x = 0; x < a.cells(); ++x) {
        S d = a[x] - b[x];
        if (d < 0) d = -d;
        worst = std::max(worst, to_double(d));
    }
    return worst;
}

/// Total-variation distance.
template <Scalar S>
S total_variation(const ProductMeasure<S>& a, const ProductMeasure<S>& b) {
    if (a.alphabet_sizes() != b.alphabet_sizes()) throw ValidationError("measures over different spaces");
    S sum(0);
    for (std::size_t x = 0; x < a.cells(); ++x) {
        S d = a[x] - b[x];
        sum += d < 0 ? S(-d) : d;
    }
    return sum / 2;
}

template <Scalar T, Scalar S>
ProductMeasure<T> convert_measure(const ProductMeasure<S>& m) {
    std::vector<T> table;
    table.reserve(m.cells());
    for (const auto& v : m.table()) {
        if constexpr (is_exact_v<T>)
            table.push_back(to_rational(v));
        else
            table.push_back(to_double(v));
    }
    return ProductMeasure<T>(ProductMeasure<T>::unchecked, m.alphabet_sizes(), std::move(table));
}

}  // namespace recomb
