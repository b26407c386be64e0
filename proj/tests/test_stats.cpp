#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cryptospan/stats.hpp"

using namespace cryptospan;

namespace {

ReturnPanel panel_from(const std::vector<std::vector<double>>& cols,
                       const std::vector<std::string>& names) {
    ReturnPanel p;
    p.assets = names;
    std::size_t n = cols.front().size();
    Date d{2020, 1, 10};
    for (std::size_t t = 0; t < n; ++t) {
        p.dates.push_back(d);
        d = d.plus_days(7);
    }
    p.values.resize(static_cast<Eigen::Index>(n),
                    static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (std::size_t t = 0; t < n; ++t)
            p.values(static_cast<Eigen::Index>(t),
                     static_cast<Eigen::Index>(c)) = cols[c][t];
    return p;
}

}  // namespace

TEST_CASE("describe on a hand-checked series") {
    std::vector<double> r{0.02, -0.01, 0.03, -0.02, 0.04, 0.0};
    StatBlock s = describe(r);
    CHECK(s.mean == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(s.min == doctest::Approx(-0.02));
    CHECK(s.max == doctest::Approx(0.04));
    CHECK(s.median == doctest::Approx(0.01));
    // sample std with n-1
    double ss = 0.0;
    for (double x : r) ss += (x - 0.01) * (x - 0.01);
    CHECK(s.std_dev == doctest::Approx(std::sqrt(ss / 5.0)).epsilon(1e-12));
    REQUIRE(s.sharpe.has_value());
    CHECK(*s.sharpe == doctest::Approx(0.01 / s.std_dev));
    CHECK(s.min <= s.median);
    CHECK(s.median <= s.max);
    CHECK(s.max_drawdown >= 0.0);
    CHECK(s.max_drawdown <= 1.0);
}

TEST_CASE("describe flags undefined ratios on zero variance") {
    std::vector<double> r(10, 0.0);
    StatBlock s = describe(r);
    CHECK(s.mean == doctest::Approx(0.0));
    CHECK(s.std_dev == doctest::Approx(0.0));
    CHECK(!s.sharpe.has_value());
    CHECK(!s.sortino.has_value());
    CHECK(!s.jb_stat.has_value());
    CHECK(s.max_drawdown == doctest::Approx(0.0));
}

TEST_CASE("max drawdown hand trace") {
    CHECK(max_drawdown_of_wealth({100, 50, 75}) == doctest::Approx(0.5));
    CHECK(max_drawdown_of_wealth({1, 2, 3, 4}) == doctest::Approx(0.0));
    CHECK(max_drawdown_of_wealth({100, 120, 60, 90, 130}) ==
          doctest::Approx(0.5));
}

TEST_CASE("cvar is the mean of the worst tail") {
    // 20 observations at 95% -> worst single observation
    std::vector<double> r(20, 0.01);
    r[3] = -0.30;
    StatBlock s = describe(r);
    CHECK(s.cvar == doctest::Approx(0.30));
    // 40 observations -> worst two
    std::vector<double> r2(40, 0.01);
    r2[0] = -0.30;
    r2[1] = -0.10;
    StatBlock s2 = describe(r2);
    CHECK(s2.cvar == doctest::Approx(0.20));
}

TEST_CASE("t test of zero mean") {
    auto [t, p] = t_test_mean_zero({-0.01, 0.01, -0.01, 0.01});
    CHECK(t == doctest::Approx(0.0));
    CHECK(p == doctest::Approx(1.0));
    CHECK_THROWS(t_test_mean_zero({0.01}));
    CHECK_THROWS(t_test_mean_zero({0.01, 0.01, 0.01}));
    auto [t2, p2] = t_test_mean_zero(
        {1.0, 1.0001, 0.9999, 1.0002, 0.9998, 1.0, 1.0001, 0.9999});
    CHECK(t2 > 10.0);
    CHECK(p2 < 0.01);
}

TEST_CASE("jarque-bera definition and null behaviour") {
    CHECK_THROWS(jarque_bera({1.0, 1.0, 1.0, 1.0}));
    std::mt19937_64 rng(123);
    std::normal_distribution<double> nd(0.0, 1.0);
    int passes = 0;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x(5000);
        for (auto& v : x) v = nd(rng);
        auto [jb, p] = jarque_bera(x);
        CHECK(jb >= 0.0);
        CHECK(p > 0.0);
        CHECK(p <= 1.0);
        if (p > 0.05) ++passes;
    }
    CHECK(passes >= 85);  // ~95% expected under the null
}

TEST_CASE("correlation matrix basics") {
    std::vector<double> x{0.01, -0.02, 0.03, 0.005, -0.01, 0.02};
    std::vector<double> neg(x.size());
    std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
    auto p = panel_from({x, neg}, {"a", "b"});
    for (auto method :
         {CorrMethod::pearson, CorrMethod::spearman, CorrMethod::kendall}) {
        auto m = correlation_matrix(p, method);
        CHECK(m.coefficients(0, 0) == 1.0);
        CHECK(m.coefficients(1, 1) == 1.0);
        CHECK(m.coefficients(0, 1) == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(m.coefficients(0, 1) == m.coefficients(1, 0));
    }
}

TEST_CASE("constant column yields undefined markers") {
    std::vector<double> x{0.01, -0.02, 0.03, 0.005};
    std::vector<double> c(4, 0.02);
    auto m = correlation_matrix(panel_from({x, c}, {"a", "b"}),
                                CorrMethod::pearson);
    CHECK(std::isnan(m.coefficients(0, 1)));
    CHECK(m.coefficients(0, 0) == 1.0);
}

TEST_CASE("rank correlations invariant under increasing transforms") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> x(40), y(40), fx(40), gy(40);
    for (std::size_t i = 0; i < 40; ++i) {
        x[i] = nd(rng);
        y[i] = 0.5 * x[i] + nd(rng);
        fx[i] = std::exp(2.0 * x[i] + 1.0);       // strictly increasing
        gy[i] = 3.0 * y[i] - 7.0;                 // increasing affine
    }
    auto base = correlation_matrix(panel_from({x, y}, {"a", "b"}),
                                   CorrMethod::spearman);
    auto xf = correlation_matrix(panel_from({fx, gy}, {"a", "b"}),
                                 CorrMethod::spearman);
    CHECK(base.coefficients(0, 1) ==
          doctest::Approx(xf.coefficients(0, 1)).epsilon(1e-12));
    auto basek = correlation_matrix(panel_from({x, y}, {"a", "b"}),
                                    CorrMethod::kendall);
    auto xk = correlation_matrix(panel_from({fx, gy}, {"a", "b"}),
                                 CorrMethod::kendall);
    CHECK(basek.coefficients(0, 1) ==
          doctest::Approx(xk.coefficients(0, 1)).epsilon(1e-12));
}

TEST_CASE("kendall exact p-value for small tie-free samples") {
    // n = 3, perfect concordance: discordance count 0, two-sided p = 2/6
    std::vector<double> x{1.0, 2.0, 3.0};
    std::vector<double> y{10.0, 20.0, 30.0};
    auto m = correlation_matrix(panel_from({x, y}, {"a", "b"}),
                                CorrMethod::kendall);
    CHECK(m.coefficients(0, 1) == doctest::Approx(1.0));
    CHECK(m.p_values(0, 1) == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("independent noise stays weakly correlated") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> x(283), y(283);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = nd(rng);
        y[i] = nd(rng);
    }
    auto m = correlation_matrix(panel_from({x, y}, {"a", "b"}),
                                CorrMethod::pearson);
    CHECK(std::fabs(m.coefficients(0, 1)) < 0.12);
    CHECK(m.p_values(0, 1) > 0.05);
}

TEST_CASE("rolling correlation window semantics and band") {
    std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<Date> dates;
    Date d{2020, 1, 10};
    for (std::size_t i = 0; i < x.size(); ++i) {
        dates.push_back(d);
        d = d.plus_days(7);
    }
    auto rc = rolling_correlation(x, x, dates, 10);
    CHECK(rc.band_sigma == doctest::Approx(1.0 / 3.0));
    REQUIRE(rc.rho.size() == 1);
    REQUIRE(rc.rho[0].has_value());
    CHECK(*rc.rho[0] == doctest::Approx(1.0));

    // window = length equals static pearson
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> a(30), b(30);
    for (std::size_t i = 0; i < 30; ++i) {
        a[i] = nd(rng);
        b[i] = 0.3 * a[i] + nd(rng);
    }
    std::vector<Date> ds;
    for (std::size_t i = 0; i < 30; ++i) ds.push_back(d.plus_days(7 * static_cast<int>(i)));
    auto rc2 = rolling_correlation(a, b, ds, 30);
    REQUIRE(rc2.rho.size() == 1);
    CHECK(*rc2.rho[0] == doctest::Approx(pearson(a, b)).epsilon(1e-12));

    // zero-variance window yields an unset marker
    std::vector<double> flat(5, 1.0), vary{1, 2, 3, 4, 5};
    std::vector<Date> d5(ds.begin(), ds.begin() + 5);
    auto rc3 = rolling_correlation(flat, vary, d5, 3);
    for (const auto& v : rc3.rho) CHECK(!v.has_value());
    CHECK_THROWS(rolling_correlation(flat, vary, d5, 1));
}

TEST_CASE("sharpe and sortino share the sign of the mean") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> nd(0.0, 0.02);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> r(50);
        for (auto& v : r) v = nd(rng) + (rep % 2 ? 0.01 : -0.01);
        StatBlock s = describe(r);
        if (s.sharpe && s.sortino && s.mean != 0.0) {
            CHECK(std::signbit(*s.sharpe) == std::signbit(s.mean));
            CHECK(std::signbit(*s.sortino) == std::signbit(s.mean));
        }
    }
}
