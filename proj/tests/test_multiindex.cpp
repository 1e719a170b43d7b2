#include "oracles.hpp"

#include <sgkron/multiindex.hpp>

#include <gtest/gtest.h>

using namespace sgkron;

namespace {

std::vector<std::vector<int>> entries_of(const MultiIndexSet& s)
{
    std::vector<std::vector<int>> out;
    for (const auto& a : s) out.push_back(a.entries());
    return out;
}

} // namespace

TEST(MultiIndexSet, SingleParameterIsDegreeSequence)
{
    const MultiIndexSet s(1, 3);
    ASSERT_EQ(s.size(), 4u);
    for (int j = 0; j < 4; ++j) EXPECT_EQ(s[static_cast<std::size_t>(j)].entries(), std::vector<int>{j});
}

TEST(MultiIndexSet, TwoParametersDegreeTwoOrder)
{
    const std::vector<std::vector<int>> expected{{0, 0}, {0, 1}, {1, 0}, {0, 2}, {1, 1}, {2, 0}};
    EXPECT_EQ(entries_of(MultiIndexSet(2, 2)), expected);
}

TEST(MultiIndexSet, MatchesBruteForceEnumeration)
{
    for (int M = 1; M <= 5; ++M)
        for (int k = 0; k <= 5; ++k) EXPECT_EQ(entries_of(MultiIndexSet(M, k)), oracle::index_set(M, k)) << M << ' ' << k;
}

TEST(MultiIndexSet, FirstEntryIsZeroAndDegreesAreMonotone)
{
    const MultiIndexSet s(4, 4);
    EXPECT_TRUE(s[0].is_zero());
    for (std::size_t j = 1; j < s.size(); ++j) EXPECT_LE(s[j - 1].total_degree(), s[j].total_degree());
}

TEST(MultiIndexSet, PositionInvertsIndexing)
{
    const MultiIndexSet s(3, 4);
    for (std::size_t j = 0; j < s.size(); ++j) EXPECT_EQ(s.position(s[j]), j);
    EXPECT_FALSE(s.position(std::vector<int>{5, 0, 0}).has_value());
}

TEST(Dimension, BinomialValues)
{
    EXPECT_EQ(dimension(8, 4), 495u);
    EXPECT_EQ(dimension(8, 3), 165u);
    EXPECT_EQ(dimension(6, 6), 924u);
    EXPECT_EQ(dimension(1, 0), 1u);
    EXPECT_EQ(MultiIndexSet(8, 4).size(), 495u);
}

TEST(Dimension, AgreesWithEnumeratedCardinality)
{
    for (int M = 1; M <= 6; ++M)
        for (int k = 0; k <= 6; ++k) EXPECT_EQ(dimension(M, k), MultiIndexSet(M, k).size());
}

TEST(MultiIndex, RejectsNegativeEntries)
{
    EXPECT_THROW(MultiIndex(std::vector<int>{1, -1}), InvalidArgument);
}

TEST(EvenSubset, DegreeTwoInTwoParameters)
{
    const MultiIndexSet s(2, 2);
    std::vector<std::vector<int>> got;
    for (auto j : build_even_subset(s)) got.push_back(s[j].entries());
    const std::vector<std::vector<int>> expected{{0, 0}, {0, 2}, {2, 0}};
    EXPECT_EQ(got, expected);
}

TEST(EvenSubset, DegreeOneHasOnlyZero)
{
    for (int M = 1; M <= 6; ++M) {
        const MultiIndexSet s(M, 1);
        const auto even = build_even_subset(s);
        ASSERT_EQ(even.size(), 1u);
        EXPECT_TRUE(s[even[0]].is_zero());
    }
}

TEST(EvenSubset, MatchesParityFilter)
{
    const MultiIndexSet s(2, 4);
    ASSERT_EQ(s.size(), 15u);
    std::size_t count = 0;
    for (const auto& e : oracle::index_set(2, 4)) count += (e[0] % 2 == 0 && e[1] % 2 == 0);
    EXPECT_EQ(build_even_subset(s).size(), count);
    EXPECT_EQ(count, 6u);
}
