#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "hce/hce.hpp"
#include "oracles.hpp"

using namespace hce;

TEST(Spearman, HandExample) {
    std::vector<double> x{1, 2, 3}, y{2, 1, 3};
    EXPECT_NEAR(spearman(x, y), 0.5, 1e-12);
}

TEST(Spearman, PerfectAndReversed) {
    std::vector<double> x{1, 2, 3, 4}, y{10, 20, 30, 40}, r{4, 3, 2, 1};
    EXPECT_DOUBLE_EQ(spearman(x, y), 1.0);
    EXPECT_DOUBLE_EQ(spearman(x, r), -1.0);
}

TEST(Spearman, TieFreeMatchesClosedForm) {
    std::mt19937_64 gen(1);
    for (int t = 0; t < 300; ++t) {
        std::size_t n = 2 + gen() % 30;
        std::vector<double> a(n), b(n);
        std::iota(a.begin(), a.end(), 1.0);
        std::iota(b.begin(), b.end(), 1.0);
        std::shuffle(b.begin(), b.end(), gen);
        ASSERT_NEAR(spearman(a, b), oracle::spearman_closed_form(a, b), 1e-12);
    }
}

TEST(Spearman, TiesUsePearsonOfAverageRanks) {
    std::mt19937_64 gen(2);
    for (int t = 0; t < 200; ++t) {
        std::size_t n = 3 + gen() % 20;
        std::vector<double> a(n), b(n);
        for (auto& x : a) x = static_cast<double>(gen() % 4);
        for (auto& x : b) x = static_cast<double>(gen() % 5);
        if (!has_ties(a) && !has_ties(b)) continue;
        auto constant = [](const std::vector<double>& v) {
            return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
        };
        if (constant(a) || constant(b)) {
            EXPECT_THROW(spearman(a, b), Error);
            continue;
        }
        EXPECT_NEAR(spearman(a, b), oracle::pearson(oracle::naive_ranks(a), oracle::naive_ranks(b)), 1e-12);
    }
}

TEST(Spearman, InvariantUnderMonotoneTransform) {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 100; ++t) {
        std::vector<double> a(15), b(15), fa(15);
        for (auto& x : a) x = nd(gen);
        for (auto& x : b) x = nd(gen);
        for (std::size_t i = 0; i < a.size(); ++i) fa[i] = std::exp(a[i]) * 3.0 + 1.0;
        EXPECT_EQ(spearman(a, b), spearman(fa, b));
    }
}

TEST(Spearman, RejectsDegenerateInput) {
    std::vector<double> one{1}, two{1, 2}, flat{3, 3};
    EXPECT_THROW(spearman(one, one), Error);
    EXPECT_THROW(spearman(one, two), Error);
    EXPECT_THROW(spearman(two, flat), Error);
}

TEST(AverageRanks, TiedValuesShareMeanRank) {
    std::vector<double> x{10, 20, 10, 30};
    EXPECT_EQ(average_ranks(x), (std::vector<double>{1.5, 3, 1.5, 4}));
}

TEST(RelatednessParse, ValidatesRangeAndDuplicates) {
    std::istringstream ok("tiger\tcat\t7.35\ncar\tauto\t9\n");
    auto ds = parse_relatedness(ok, "ws");
    ASSERT_EQ(ds.pairs.size(), 2u);
    EXPECT_DOUBLE_EQ(ds.pairs[0].score, 7.35);
    std::istringstream range("a\tb\t11\n");
    EXPECT_THROW(parse_relatedness(range), Error);
    std::istringstream dup("a\tb\t1\nb\ta\t2\n");
    EXPECT_THROW(parse_relatedness(dup), Error);
    std::istringstream bad("a\tb\tx\n");
    EXPECT_THROW(parse_relatedness(bad), Error);
}

TEST(RunRelatedness, MapsWordsAndDropsUnknownPairs) {
    VectorStore store(2);
    std::vector<double> a{1, 0}, b{1, 1}, c{-0.5, 1}, d{-1, 0};
    store.add_entity("Tiger", a);
    store.add_entity("cat", b);
    store.add_entity("car", c);
    store.add_category("Animals", d);
    RelatednessDataset ds{"toy",
                          {{"tiger", "cat", 9}, {"cat", "car", 5}, {"tiger", "animals", 1}, {"tiger", "zebra", 4}}};
    auto r = run_relatedness(store, ds);
    EXPECT_EQ(r.mapping.total, 4u);
    EXPECT_EQ(r.mapping.mapped, 3u);
    EXPECT_EQ(r.mapping.unmapped, 1u);
    EXPECT_EQ(r.mapping.pairs[2].second, Resolution::Category);
    EXPECT_EQ(r.mapping.pairs[3].second, Resolution::Unmapped);
    EXPECT_NEAR(*r.mapping.pairs[0].model_score, 1 / std::sqrt(2.0), 1e-12);
    EXPECT_DOUBLE_EQ(r.rho, 1.0);
    auto j = to_json(r);
    EXPECT_EQ(j["unmapped"], 1);
    RelatednessDataset tiny{"tiny", {{"tiger", "cat", 1}, {"x", "y", 2}}};
    EXPECT_THROW(run_relatedness(store, tiny), Error);
}
