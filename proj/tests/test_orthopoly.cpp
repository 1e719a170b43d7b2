#include "oracles.hpp"

#include <sgkron/orthopoly.hpp>
#include <sgkron/quadrature.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace sgkron;

namespace {

double quad_inner(oracle::Family fam, int a, int b, int weight_power)
{
    const auto rule = oracle::gauss(fam, 30);
    long double s = 0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const long double y = rule.nodes[q];
        s += rule.weights[q] * oracle::poly(fam, a, y) * oracle::poly(fam, b, y) * std::pow(y, weight_power);
    }
    return static_cast<double>(s);
}

} // namespace

TEST(Recurrence, LegendreAndHermiteConstants)
{
    EXPECT_NEAR(recurrence_c(PolyFamily::LegendreUniform, 1), 0.5773502692, 1e-10);
    EXPECT_NEAR(recurrence_c(PolyFamily::LegendreUniform, 2), 0.5163977795, 1e-10);
    EXPECT_NEAR(recurrence_c(PolyFamily::HermiteGaussian, 2), 1.4142135624, 1e-10);
    EXPECT_THROW((void)recurrence_c(PolyFamily::HermiteGaussian, 0), InvalidArgument);
}

TEST(Recurrence, EqualsQuadratureOfFirstMoment)
{
    for (int j = 1; j <= 10; ++j) {
        EXPECT_NEAR(recurrence_c(PolyFamily::LegendreUniform, j), quad_inner(oracle::Family::Legendre, j, j - 1, 1), 1e-13);
        EXPECT_NEAR(recurrence_c(PolyFamily::HermiteGaussian, j), quad_inner(oracle::Family::Hermite, j, j - 1, 1), 1e-11);
    }
}

TEST(Evaluate, KnownValues)
{
    EXPECT_DOUBLE_EQ(evaluate(PolyFamily::LegendreUniform, 0, 0.3), 1.0);
    EXPECT_NEAR(evaluate(PolyFamily::LegendreUniform, 1, 0.5), 0.8660254038, 1e-10);
    EXPECT_NEAR(evaluate(PolyFamily::HermiteGaussian, 2, 0.0), -0.7071067812, 1e-10);
}

TEST(Evaluate, MatchesClosedForms)
{
    for (int n = 0; n <= 10; ++n)
        for (double y : {-0.9, -0.31, 0.0, 0.47, 1.0}) {
            EXPECT_NEAR(evaluate(PolyFamily::LegendreUniform, n, y), static_cast<double>(oracle::legendre(n, y)), 1e-11);
            EXPECT_NEAR(evaluate(PolyFamily::HermiteGaussian, n, 2.5 * y),
                        static_cast<double>(oracle::hermite(n, 2.5 * y)), 1e-10);
        }
}

TEST(Evaluate, OrthonormalUnderOracleQuadrature)
{
    const auto leg = oracle::gauss(oracle::Family::Legendre, 20);
    const auto her = oracle::gauss(oracle::Family::Hermite, 20);
    for (int a = 0; a <= 8; ++a)
        for (int b = 0; b <= 8; ++b) {
            double sl = 0, sh = 0;
            for (std::size_t q = 0; q < 20; ++q) {
                sl += leg.weights[q] * evaluate(PolyFamily::LegendreUniform, a, leg.nodes[q]) *
                      evaluate(PolyFamily::LegendreUniform, b, leg.nodes[q]);
                sh += her.weights[q] * evaluate(PolyFamily::HermiteGaussian, a, her.nodes[q]) *
                      evaluate(PolyFamily::HermiteGaussian, b, her.nodes[q]);
            }
            EXPECT_NEAR(sl, a == b ? 1.0 : 0.0, 1e-12);
            EXPECT_NEAR(sh, a == b ? 1.0 : 0.0, 1e-12);
        }
}

TEST(HermiteTriple, ParityAndOrthonormality)
{
    EXPECT_EQ(hermite_triple(1, 1, 1), 0.0);
    for (int j = 0; j <= 8; ++j) EXPECT_NEAR(hermite_triple(0, j, j), 1.0, 1e-14);
    EXPECT_NEAR(hermite_triple(1, 1, 2), std::sqrt(2.0), 1e-12);
}

TEST(HermiteTriple, MatchesQuadrature)
{
    const auto rule = oracle::gauss(oracle::Family::Hermite, 24);
    for (int i = 0; i <= 6; ++i)
        for (int j = 0; j <= 6; ++j)
            for (int l = 0; l <= 6; ++l) {
                long double s = 0;
                for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                    const long double y = rule.nodes[q];
                    s += rule.weights[q] * oracle::hermite(i, y) * oracle::hermite(j, y) * oracle::hermite(l, y);
                }
                EXPECT_NEAR(hermite_triple(i, j, l), static_cast<double>(s), 1e-11) << i << j << l;
            }
}

namespace {

std::vector<std::pair<double, double>> sorted_rule(const std::vector<double>& x, const std::vector<double>& w)
{
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < x.size(); ++i) out.emplace_back(x[i], w[i]);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST(LibraryQuadrature, AgreesWithGolubWelsch)
{
    for (int n : {1, 2, 5, 12, 30}) {
        const auto lib_l = gauss_legendre(n);
        const auto lib_h = gauss_hermite(n);
        const auto ref_l = oracle::gauss(oracle::Family::Legendre, n);
        const auto ref_h = oracle::gauss(oracle::Family::Hermite, n);
        const auto a = sorted_rule(lib_l.nodes, lib_l.weights);
        const auto b = sorted_rule(ref_l.nodes, ref_l.weights);
        const auto c = sorted_rule(lib_h.nodes, lib_h.weights);
        const auto d = sorted_rule(ref_h.nodes, ref_h.weights);
        ASSERT_EQ(a.size(), b.size());
        ASSERT_EQ(c.size(), d.size());
        for (std::size_t q = 0; q < a.size(); ++q) {
            EXPECT_NEAR(a[q].first, b[q].first, 1e-12);
            EXPECT_NEAR(a[q].second, b[q].second, 1e-12);
            EXPECT_NEAR(c[q].first, d[q].first, 1e-10 * std::max(1.0, std::abs(d[q].first)));
            EXPECT_NEAR(c[q].second, d[q].second, 1e-12);
        }
    }
}
