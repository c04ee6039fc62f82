#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace recomb;
using namespace recomb::testing;

namespace {

ProductMeasure<Q> exact_table(std::vector<std::size_t> sizes, std::initializer_list<const char*> values) {
    std::vector<Q> t;
    for (const char* v : values) t.push_back(q(v));
    return ProductMeasure<Q>(std::move(sizes), std::move(t));
}

SiteSet random_subset(std::size_t n, std::mt19937_64& rng) {
    SiteSet out;
    for (Site s = 0; s < n; ++s)
        if (rng() & 1u) out.push_back(s);
    return out;
}

}  // namespace

TEST(Measure, ValidatesTables) {
    EXPECT_THROW(exact_table({2, 2}, {"1/4", "1/4", "1/4"}), ValidationError);
    EXPECT_THROW(exact_table({2}, {"1/2", "1/4"}), ValidationError);
    EXPECT_THROW(exact_table({2}, {"3/2", "-1/2"}), ValidationError);
    EXPECT_NO_THROW(exact_table({2, 3}, {"1/6", "1/6", "1/6", "1/6", "1/6", "1/6"}));
}

TEST(Measure, TableCapIsEnforced) {
    EXPECT_THROW(ProductMeasure<Q>::uniform({4, 4, 4}, 63), ResourceError);
    EXPECT_NO_THROW(ProductMeasure<Q>::uniform({4, 4, 4}, 64));
}

TEST(Measure, LastSiteVariesFastest) {
    const auto m = exact_table({2, 3}, {"0", "1/6", "1/6", "1/6", "1/6", "1/3"});
    EXPECT_EQ(m.letter(4, 0), 1u);
    EXPECT_EQ(m.letter(4, 1), 1u);
    EXPECT_EQ(m.letter(2, 1), 2u);
}

TEST(Marginal, Examples) {
    const auto m = exact_table({2, 2}, {"1/2", "0", "1/4", "1/4"});
    EXPECT_EQ(marginal(m, {0}).table(), (std::vector<Q>{q("1/2"), q("1/2")}));
    EXPECT_EQ(marginal(m, {1}).table(), (std::vector<Q>{q("3/4"), q("1/4")}));
    EXPECT_EQ(marginal(m, {0, 1}), m);
    EXPECT_EQ(marginal(m, {1, 0}), m);
    const auto empty = marginal(m, {});
    EXPECT_EQ(empty.cells(), 1u);
    EXPECT_EQ(empty[0], 1);
    EXPECT_THROW(marginal(m, {2}), ValidationError);
    EXPECT_THROW(marginal(m, {0, 0}), ValidationError);
}

TEST(Marginal, MatchesEnumerationOracleAndTowerProperty) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 4;
        std::vector<std::size_t> sizes;
        for (std::size_t i = 0; i < n; ++i) sizes.push_back(2 + rng() % 2);
        const auto m = random_measure(sizes, rng);
        const SiteSet J = random_subset(n, rng);
        const auto got = marginal(m, J);
        const auto oracle = brute_force_marginal(m, J);
        ASSERT_EQ(got.cells(), oracle.size());
        for (std::size_t y = 0; y < got.cells(); ++y) {
            std::vector<std::size_t> key;
            for (std::size_t t = 0; t < J.size(); ++t) key.push_back(got.letter(y, t));
            EXPECT_EQ(got[y], oracle.at(key));
        }
        // (μ_J)_K = μ_K for K ⊆ J, K given as positions within J.
        SiteSet local, global;
        for (std::size_t t = 0; t < J.size(); ++t)
            if (rng() & 1u) {
                local.push_back(t);
                global.push_back(J[t]);
            }
        EXPECT_EQ(marginal(got, local), marginal(m, global));
        EXPECT_EQ(got.total_mass(), 1);
    }
}

TEST(Tensor, Examples) {
    // Product of marginals of the diagonal measure on {0,1}^2 is uniform.
    const auto diag = exact_table({2, 2}, {"1/2", "0", "0", "1/2"});
    EXPECT_EQ(tensor(factorize(diag, part("{1}{2}"))), ProductMeasure<Q>::uniform({2, 2}));
    EXPECT_EQ(tensor(factorize(diag, part("{1,2}"))), diag);

    // Explicit tables: sites 1 and 3 coupled, site 2 independent.
    const auto pair = exact_table({2, 2}, {"1/2", "0", "1/4", "1/4"});
    const auto single = exact_table({2}, {"1/3", "2/3"});
    const auto joint = tensor(FactorizedMeasure<Q>(part("{1,3}{2}"), {pair, single}));
    // x = (x1, x2, x3); value = pair(x1, x3) · single(x2).
    EXPECT_EQ(joint[0b000], q("1/6"));
    EXPECT_EQ(joint[0b010], q("1/3"));
    EXPECT_EQ(joint[0b001], 0);
    EXPECT_EQ(joint[0b111], q("1/6"));
    EXPECT_EQ(joint.total_mass(), 1);
}

TEST(Tensor, RejectsShapeMismatch) {
    const auto single = exact_table({2}, {"1/3", "2/3"});
    EXPECT_THROW(FactorizedMeasure<Q>(part("{1}{2}"), {single}), ValidationError);
    EXPECT_THROW(FactorizedMeasure<Q>(part("{1,2}"), {single}), ValidationError);
    const auto m = ProductMeasure<Q>::uniform({2, 2});
    EXPECT_THROW(factorize(m, part("{1}{2}{3}")), ValidationError);
}

TEST(Restriction, CommutesWithMarginalization) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 4;
        std::vector<std::size_t> sizes;
        for (std::size_t i = 0; i < n; ++i) sizes.push_back(2 + rng() % 2);
        const auto m = random_measure(sizes, rng);
        const Partition delta = random_partition(n, rng);
        const SiteSet M = random_subset(n, rng);
        const auto f = factorize(m, delta);
        const auto restricted = tensor(restrict_to(f, M));
        // Restricting the factorization equals marginalizing its tensor ...
        EXPECT_EQ(restricted, marginal(tensor(f), M));
        // ... and factorizing μ_M along the trace of δ on M.
        std::vector<std::size_t> ids;
        for (Site s : M) ids.push_back(delta.label(s));
        if (!M.empty()) { EXPECT_EQ(restricted, tensor(factorize(marginal(m, M), Partition::from_labels(ids)))); }
    }
}

TEST(Xi, IdentityWeightsFixEveryMeasure) {
    std::mt19937_64 rng(23);
    const auto m = random_measure({2, 3, 2}, rng);
    EXPECT_EQ(xi_apply(m, weights({{"{1,2,3}", "1"}})), m);
}

TEST(Xi, DiagonalTwoSiteExample) {
    const auto diag = exact_table({2, 2}, {"1/2", "0", "0", "1/2"});
    const auto once = xi_apply(diag, model_dyadic());
    EXPECT_EQ(once, exact_table({2, 2}, {"3/8", "1/8", "1/8", "3/8"}));
}

TEST(Xi, DyadicClosedForm) {
    // ρ = ½δ_{I} + ½δ_{finest} on two sites:
    // Ξⁿμ = 2⁻ⁿ μ + (1 - 2⁻ⁿ) μ_1 ⊗ μ_2.
    std::mt19937_64 rng(24);
    const auto m = random_measure({3, 2}, rng);
    const auto product = tensor(factorize(m, Partition::finest(2)));
    ProductMeasure<Q> it = m;
    for (unsigned n = 0; n <= 12; ++n) {
        const Q a = pow_int(q("1/2"), n);
        std::vector<Q> expect(m.cells());
        for (std::size_t x = 0; x < m.cells(); ++x) expect[x] = a * m[x] + (1 - a) * product[x];
        EXPECT_EQ(it.table(), expect) << n;
        EXPECT_EQ(xi_iterate(m, model_dyadic(), n), it);
        it = xi_apply(it, model_dyadic());
    }
}

TEST(Xi, ProductOfAbsorbingMarginalsIsFixed) {
    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng() % 3;
        const auto rho = random_weights(n, 4, rng);
        const Partition absorbing = common_refinement(rho.support());
        const auto m = random_measure(std::vector<std::size_t>(n, 2), rng);
        const auto fixed = tensor(factorize(m, absorbing));
        EXPECT_EQ(xi_apply(fixed, rho), fixed);
    }
}

TEST(Xi, PreservesSingleSiteMarginals) {
    std::mt19937_64 rng(26);
    const auto rho = random_weights(3, 4, rng);
    const auto m = random_measure({2, 3, 2}, rng);
    const auto next = xi_iterate(m, rho, 3);
    for (Site s = 0; s < 3; ++s) EXPECT_EQ(marginal(next, {s}), marginal(m, {s}));
}

TEST(Xi, DistanceToLimitNeverIncreases) {
    std::mt19937_64 rng(27);
    for (int trial = 0; trial < 5; ++trial) {
        const auto rho = random_weights(3, 4, rng).as<double>();
        const auto m = convert_measure<double>(random_measure({2, 2, 3}, rng));
        const auto limit = tensor(factorize(m, common_refinement(rho.support())));
        ProductMeasure<double> it = m;
        double prev = total_variation(it, limit);
        for (int n = 1; n <= 64; ++n) {
            it = xi_apply(it, rho);
            const double tv = total_variation(it, limit);
            EXPECT_LE(tv, prev + 1e-15) << n;
            prev = tv;
        }
        EXPECT_LT(total_variation(xi_iterate(it, rho, 2000), limit), 1e-9);
    }
}

TEST(Mixture, Examples) {
    std::mt19937_64 rng(28);
    const auto m = random_measure({2, 2, 2}, rng);
    const std::vector<Partition> states{part("{1,2,3}"), part("{1}{2,3}"), part("{1}{2}{3}")};
    EXPECT_EQ(mixture_of_factorizations<Q>(states, std::vector<Q>{1, 0, 0}, m), m);
    EXPECT_EQ(mixture_of_factorizations<Q>(states, std::vector<Q>{0, 1, 0}, m),
              tensor(factorize(m, part("{1}{2,3}"))));
    EXPECT_THROW(mixture_of_factorizations<Q>(states, std::vector<Q>{q("1/2"), 0, 0}, m), ValidationError);
    EXPECT_THROW(mixture_of_factorizations<Q>(states, std::vector<Q>{1, 0}, m), ValidationError);
}

// With at most three sites every state has at most one non-singleton atom,
// so the marginals of a mixture never produce cross terms.
TEST(Mixture, ChainDistributionReproducesIteratesUpToThreeSites) {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng() % 2;
        const auto chain = build_chain(random_weights(n, 5, rng));
        const auto m = random_measure(std::vector<std::size_t>(n, 2), rng);
        ProductMeasure<Q> it = m;
        for (std::size_t k = 0; k <= 6; ++k) {
            const auto b = distribution_at(chain.P, k);
            EXPECT_EQ(mixture_of_factorizations<Q>(chain.space.states(), b, m), it) << k;
            it = xi_apply(it, chain.rho);
        }
    }
}

// Four sites, ρ uniform on {I}, {1,2}{3,4} and the finest partition. After
// two steps Ξ²μ carries μ_{12}⊗μ_3⊗μ_4, which no chain state produces.
TEST(Mixture, ChainDistributionMissesCrossTermsOnFourSites) {
    const auto rho = weights({{"{1,2,3,4}", "1/3"}, {"{1,2}{3,4}", "1/3"}, {"{1}{2}{3}{4}", "1/3"}});
    const auto chain = build_chain(rho);
    EXPECT_EQ(chain.space.size(), 3u);
    std::mt19937_64 rng(41);
    const auto m = random_measure({2, 2, 2, 2}, rng);
    ProductMeasure<Q> it = m;
    for (std::size_t k = 0; k <= 3; ++k) {
        const auto mixed = mixture_of_factorizations<Q>(chain.space.states(), distribution_at(chain.P, k), m);
        if (k <= 1) {
            EXPECT_EQ(mixed, it) << k;
        } else {
            EXPECT_NE(mixed, it) << k;
        }
        it = xi_apply(it, chain.rho);
    }
    // Ξ²μ is exactly the chain mixture plus the per-atom cross terms.
    const auto one = xi_apply(m, rho);
    const auto paired = tensor(factorize(m, part("{1,2}{3,4}")));
    const auto finest = tensor(factorize(m, Partition::finest(4)));
    const auto cross = tensor(factorize(m, part("{1,2}{3}{4}")));
    const auto cross2 = tensor(factorize(m, part("{1}{2}{3,4}")));
    std::vector<Q> expected(m.cells(), Q(0));
    const auto b2 = distribution_at(chain.P, 2);
    for (std::size_t x = 0; x < m.cells(); ++x) {
        for (StateIndex s = 0; s < chain.space.size(); ++s)
            expected[x] += b2[s] * tensor(factorize(m, chain.space[s]))[x];
        // The {1,2}{3,4} term of Ξ acting on Ξμ splits each atom independently,
        // (2/3 μ12 + 1/3 μ1μ2)⊗(2/3 μ34 + 1/3 μ3μ4), while the chain moves to
        // μ12⊗μ34 or the finest product with weights 2/3 and 1/3.
        expected[x] += q("2/27") * (cross[x] + cross2[x] - paired[x] - finest[x]);
    }
    EXPECT_EQ(xi_apply(one, rho), ProductMeasure<Q>(m.alphabet_sizes(), expected));
}

TEST(Measure, FloatModeAgreesWithExact) {
    std::mt19937_64 rng(30);
    const auto rho = random_weights(3, 4, rng);
    const auto m = random_measure({2, 3, 2}, rng);
    const auto exact = xi_iterate(m, rho, 5);
    const auto approx = xi_iterate(convert_measure<double>(m), rho.as<double>(), 5);
    EXPECT_LE(max_abs_difference(convert_measure<double>(exact), approx), 1e-12);
}

TEST(Measure, RandomIsSeededAndNormalized) {
    const auto a = ProductMeasure<Q>::random({2, 3}, 5);
    const auto b = ProductMeasure<Q>::random({2, 3}, 5);
    const auto c = ProductMeasure<Q>::random({2, 3}, 6);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    EXPECT_EQ(a.total_mass(), 1);
    const auto f = ProductMeasure<double>::random({2, 3}, 5);
    EXPECT_NEAR(f.total_mass(), 1.0, 1e-12);
}
