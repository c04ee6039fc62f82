#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "test_support.hpp"

using namespace recomb;
using namespace recomb::testing;

namespace {

void extend(std::vector<std::uint32_t>& rgs, std::size_t n, std::uint32_t blocks, std::vector<Partition>& out) {
    if (rgs.size() == n) {
        out.emplace_back(rgs);
        return;
    }
    for (std::uint32_t b = 0; b <= blocks; ++b) {
        rgs.push_back(b);
        extend(rgs, n, std::max(blocks, b + 1), out);
        rgs.pop_back();
    }
}

// Every restricted-growth string of length n.
std::vector<Partition> all_partitions(std::size_t n) {
    std::vector<Partition> out;
    std::vector<std::uint32_t> rgs{0};
    extend(rgs, n, 1, out);
    return out;
}

}  // namespace

TEST(Partition, CanonicalizeOrdersBlocksByLeastElement) {
    std::vector<SiteSet> blocks{{2}, {1, 3}, {0}};
    const Partition p = canonicalize(blocks, 4);
    EXPECT_EQ(to_string(p), "{1}{2,4}{3}");
    EXPECT_EQ(p.rgs(), (std::vector<std::uint32_t>{0, 1, 2, 1}));
    EXPECT_EQ(p.num_blocks(), 3u);
}

TEST(Partition, CanonicalizeRejectsBadInput) {
    std::vector<SiteSet> overlap{{0, 1}, {1, 2}};
    std::vector<SiteSet> uncovered{{0}, {2}};
    std::vector<SiteSet> empty{{0, 1, 2}, {}};
    std::vector<SiteSet> outside{{0, 1, 2, 5}};
    EXPECT_THROW(canonicalize(overlap, 3), ValidationError);
    EXPECT_THROW(canonicalize(uncovered, 3), ValidationError);
    EXPECT_THROW(canonicalize(empty, 3), ValidationError);
    EXPECT_THROW(canonicalize(outside, 3), ValidationError);
    try {
        canonicalize(overlap, 3);
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("site 2"), std::string::npos);
    }
}

TEST(Partition, RestrictedGrowthValidation) {
    EXPECT_THROW(Partition(std::vector<std::uint32_t>{1, 0}), ValidationError);
    EXPECT_THROW(Partition(std::vector<std::uint32_t>{0, 2}), ValidationError);
    EXPECT_NO_THROW(Partition(std::vector<std::uint32_t>{0, 1, 0, 2}));
}

TEST(Partition, CountsMatchBellNumbers) {
    const std::size_t bell[] = {1, 1, 2, 5, 15, 52, 203};
    for (std::size_t n = 1; n <= 6; ++n) {
        auto ps = all_partitions(n);
        std::set<Partition> unique(ps.begin(), ps.end());
        EXPECT_EQ(unique.size(), bell[n]) << n;
    }
}

TEST(Join, Examples) {
    EXPECT_EQ(join(part("{1,2,3}"), part("{1}{2,3}")), part("{1}{2,3}"));
    EXPECT_EQ(join(part("{1,2}{3}"), part("{1}{2,3}")), part("{1}{2}{3}"));
    EXPECT_EQ(join(part("{1,2}{3,4}"), part("{1,3}{2,4}")), part("{1}{2}{3}{4}"));
    EXPECT_EQ(join(part("{1,2,3}{4}"), part("{1}{2,3,4}")), part("{1}{2,3}{4}"));
    EXPECT_THROW(join(part("{1,2}"), part("{1,2,3}")), ValidationError);
}

TEST(Join, MatchesIntersectionOracleOnRandomPairs) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 1 + rng() % 8;
        const Partition d = random_partition(n, rng), e = random_partition(n, rng);
        EXPECT_EQ(atom_sets(join(d, e)), naive_join_atoms(d, e));
    }
}

TEST(Join, LatticeLaws) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 1 + rng() % 8;
        const Partition a = random_partition(n, rng), b = random_partition(n, rng), c = random_partition(n, rng);
        EXPECT_EQ(join(a, b), join(b, a));
        EXPECT_EQ(join(join(a, b), c), join(a, join(b, c)));
        EXPECT_EQ(join(a, a), a);
        EXPECT_EQ(join(a, Partition::coarsest(n)), a);
        EXPECT_EQ(join(a, Partition::finest(n)), Partition::finest(n));
        EXPECT_TRUE(finer_eq(a, join(a, b)));
        EXPECT_TRUE(finer_eq(b, join(a, b)));
    }
}

TEST(FinerEq, Examples) {
    EXPECT_TRUE(finer_eq(part("{1,2,3}"), part("{1}{2,3}")));
    EXPECT_FALSE(finer_eq(part("{1}{2,3}"), part("{1,2,3}")));
    EXPECT_FALSE(finer_eq(part("{1,2}{3}"), part("{1}{2,3}")));
    EXPECT_TRUE(finer_eq(part("{1}{2,3}"), part("{1}{2}{3}")));
    EXPECT_TRUE(finer_eq(part("{1,3}{2}"), part("{1,3}{2}")));
}

TEST(FinerEq, IsAPartialOrderAgreeingWithJoin) {
    const auto ps = all_partitions(4);
    for (const auto& a : ps)
        for (const auto& b : ps) {
            // d ⪯ e iff d ∨ e = e
            EXPECT_EQ(finer_eq(a, b), join(a, b) == b);
            if (finer_eq(a, b) && finer_eq(b, a)) { EXPECT_EQ(a, b); }
            for (const auto& c : ps)
                if (finer_eq(a, b) && finer_eq(b, c)) { EXPECT_TRUE(finer_eq(a, c)); }
            if (finer_eq(a, b)) { EXPECT_LE(a.num_blocks(), b.num_blocks()); }
        }
}

TEST(CommonRefinement, ExamplesAndPermutationInvariance) {
    PartitionFamily e1;
    e1.insert(part("{1,2,3}"));
    e1.insert(part("{1}{2,3}"));
    e1.insert(part("{1,2}{3}"));
    EXPECT_EQ(common_refinement(e1), part("{1}{2}{3}"));

    PartitionFamily single;
    single.insert(part("{1,2,3}"));
    EXPECT_EQ(common_refinement(single), part("{1,2,3}"));

    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng() % 6;
        std::vector<Partition> members;
        for (int k = 0; k < 5; ++k) members.push_back(random_partition(n, rng));
        const Partition reference = common_refinement(PartitionFamily(members));
        std::shuffle(members.begin(), members.end(), rng);
        Partition folded = members.front();
        for (const auto& m : members) folded = join(folded, m);
        EXPECT_EQ(common_refinement(PartitionFamily(members)), reference);
        EXPECT_EQ(folded, reference);
        for (const auto& m : members) EXPECT_TRUE(finer_eq(m, reference));
    }
}

TEST(Closure, ExampleModels) {
    // E1: the splits join to the finest partition; {I} is a generator.
    PartitionFamily e1;
    for (const char* p : {"{1,2,3}", "{1}{2,3}", "{1,2}{3}"}) e1.insert(part(p));
    const auto c = closure(e1);
    EXPECT_EQ(c.size(), 4u);
    EXPECT_TRUE(c.contains(part("{1}{2}{3}")));

    // Single-crossover splits on 4 sites generate every interval partition except {I}.
    PartitionFamily dyadic;
    for (const char* p : {"{1}{2,3,4}", "{1,2}{3,4}", "{1,2,3}{4}"}) dyadic.insert(part(p));
    const auto d = closure(dyadic);
    EXPECT_EQ(d.size(), 7u);
    EXPECT_FALSE(d.contains(Partition::coarsest(4)));
    const StateSpace space = build_state_space(dyadic);
    EXPECT_EQ(space.size(), 8u);
    EXPECT_EQ(space[space.start()], Partition::coarsest(4));
    EXPECT_EQ(space[space.absorbing()], Partition::finest(4));
}

TEST(Closure, MatchesBruteForceOracle) {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng() % 6;
        std::vector<Partition> G;
        const std::size_t k = 1 + rng() % 6;
        for (std::size_t j = 0; j < k; ++j) G.push_back(random_partition(n, rng));
        const auto c = closure(PartitionFamily(G));
        const auto oracle = brute_force_closure(G);
        std::set<Partition> got(c.begin(), c.end());
        EXPECT_EQ(got, oracle);
        // Fixpoint, and the common refinement is its finest member.
        for (const auto& a : c) {
            EXPECT_TRUE(finer_eq(a, common_refinement(PartitionFamily(G))));
            for (const auto& b : c) EXPECT_TRUE(c.contains(join(a, b)));
        }
        EXPECT_TRUE(c.contains(common_refinement(PartitionFamily(G))));
    }
}

TEST(Closure, CapReportsPartialCount) {
    // All two-block splits {i}{rest} of 7 sites close to every partition with
    // at most one non-singleton block: 1 + Σ_{k<7} C(7,k) - ... many states.
    PartitionFamily g;
    for (std::size_t i = 0; i < 7; ++i) {
        std::vector<std::size_t> ids(7, 0);
        ids[i] = 1;
        g.insert(Partition::from_labels(ids));
    }
    try {
        closure(g, 10);
        FAIL() << "expected ResourceError";
    } catch (const ResourceError& e) {
        EXPECT_GE(e.partial_count(), 10u);
        EXPECT_STREQ(e.kind(), "resource");
    }
    EXPECT_NO_THROW(closure(g, 1000));
}

TEST(Text, BlockAndRgsForms) {
    EXPECT_EQ(to_string(part("{1,3}{2}")), "{1,3}{2}");
    EXPECT_EQ(to_string(part("{2}{3,1}")), "{1,3}{2}");
    EXPECT_EQ(to_rgs_string(part("{1,3}{2}")), "0,1,0");
    EXPECT_EQ(parse_partition("0,1,0"), part("{1,3}{2}"));
    EXPECT_EQ(parse_partition(" { 1 , 2 } { 3 } "), part("{1,2}{3}"));
    EXPECT_EQ(to_string(Partition::coarsest(3)), "{1,2,3}");
    EXPECT_EQ(to_string(Partition::finest(3)), "{1}{2}{3}");
}

TEST(Text, RoundTripOnRandomPartitions) {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 1000; ++trial) {
        const Partition p = random_partition(1 + rng() % 10, rng);
        EXPECT_EQ(parse_partition(to_string(p)), p);
        EXPECT_EQ(parse_partition(to_rgs_string(p)), p);
    }
}

TEST(Text, RejectsMalformedInput) {
    for (const char* bad : {"", "{}", "{1,2", "{1}{1,2}", "{0,1}", "{1}{3}", "{a}", "1,0", "{1}x", "{1,,2}"})
        EXPECT_THROW(parse_partition(bad), ValidationError) << bad;
    EXPECT_THROW(parse_partition("{1,2}", 3), ValidationError);
    EXPECT_NO_THROW(parse_partition("{1,2}{3}", 3));
}

TEST(Family, InsertIgnoresDuplicatesAndChecksSites) {
    PartitionFamily f;
    EXPECT_TRUE(f.insert(part("{1,2}")));
    EXPECT_FALSE(f.insert(part("{1,2}")));
    EXPECT_EQ(f.size(), 1u);
    EXPECT_THROW(f.insert(part("{1,2,3}")), ValidationError);
}
