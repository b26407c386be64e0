#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cryptospan/frontier.hpp"
#include "cryptospan/spanning.hpp"

using namespace cryptospan;

namespace {

struct Sim {
    Eigen::MatrixXd r1, r2;
};

// benchmark returns plus test assets R2 = alpha + R1 beta' + noise
Sim simulate(std::mt19937_64& rng, int T, int K, int N, double alpha,
             bool spanned_beta, double noise_sd = 0.01) {
    std::normal_distribution<double> nd(0.0, 0.02);
    std::normal_distribution<double> eps(0.0, noise_sd);
    Sim s;
    s.r1.resize(T, K);
    s.r2.resize(T, N);
    Eigen::MatrixXd beta(N, K);
    std::uniform_real_distribution<double> ud(0.1, 1.0);
    for (int j = 0; j < N; ++j) {
        double sum = 0.0;
        for (int i = 0; i < K; ++i) {
            beta(j, i) = ud(rng);
            sum += beta(j, i);
        }
        if (spanned_beta) beta.row(j) /= sum;  // rows sum to one -> delta = 0
    }
    for (int t = 0; t < T; ++t) {
        for (int i = 0; i < K; ++i) s.r1(t, i) = nd(rng);
        for (int j = 0; j < N; ++j)
            s.r2(t, j) = alpha + s.r1.row(t).dot(beta.row(j)) + eps(rng);
    }
    return s;
}

}  // namespace

TEST_CASE("regression recovers a constructed model") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> nd(0.0, 0.02);
    std::normal_distribution<double> eps(0.0, 0.001);
    const int T = 5000;
    Eigen::MatrixXd r1(T, 2), r2(T, 1);
    for (int t = 0; t < T; ++t) {
        r1(t, 0) = nd(rng);
        r1(t, 1) = nd(rng);
        r2(t, 0) = 0.003 + 0.5 * r1(t, 0) + 0.5 * r1(t, 1) + eps(rng);
    }
    SpanningRegression reg = fit_spanning_regression(r1, r2);
    CHECK(reg.alpha_hat(0) == doctest::Approx(0.003).epsilon(0.05));
    CHECK(reg.beta_hat(0, 0) == doctest::Approx(0.5).epsilon(0.01));
    CHECK(reg.beta_hat(0, 1) == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::fabs(reg.delta_hat(0)) < 0.01);
    CHECK(!reg.exact_spanning);
}

TEST_CASE("identical test and benchmark asset is exact spanning") {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> nd(0.0, 0.02);
    Eigen::MatrixXd r1(50, 1);
    for (int t = 0; t < 50; ++t) r1(t, 0) = nd(rng);
    SpanningRegression reg = fit_spanning_regression(r1, r1);
    CHECK(reg.exact_spanning);
    CHECK(reg.alpha_hat(0) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(reg.beta_hat(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    auto tests = mv_spanning_tests(reg);
    for (const auto& r : tests) {
        CHECK(r.statistic == doctest::Approx(0.0));
        CHECK(r.p_value == doctest::Approx(1.0));
    }
    auto sd = stepdown_tests(reg);
    CHECK(sd.f1.statistic == doctest::Approx(0.0));
    CHECK(sd.f1.p_value == doctest::Approx(1.0));
    auto g = gmm_wald(r1, r1);
    CHECK(g.statistic == doctest::Approx(0.0));
    CHECK(g.p_value == doctest::Approx(1.0));
}

TEST_CASE("sigma determinants are ordered and matrices are PSD") {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 50; ++rep) {
        auto s = simulate(rng, 60 + static_cast<int>(rng() % 100),
                          1 + static_cast<int>(rng() % 4),
                          1 + static_cast<int>(rng() % 3), 0.001, false);
        SpanningRegression reg = fit_spanning_regression(s.r1, s.r2);
        double dh = reg.sigma_hat.determinant();
        double db = reg.sigma_bar.determinant();
        double dt = reg.sigma_tilde.determinant();
        CHECK(db >= dh - 1e-10 * std::fabs(dh));
        CHECK(dt >= db - 1e-10 * std::fabs(db));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reg.sigma_hat);
        CHECK(es.eigenvalues().minCoeff() > -1e-12);
    }
}

TEST_CASE("sigma_hat equals the Schur complement of the joint covariance") {
    std::mt19937_64 rng(43);
    auto s = simulate(rng, 120, 3, 2, 0.002, false);
    Eigen::MatrixXd all(120, 5);
    all << s.r1, s.r2;
    MarketMoments m = estimate_moments(all, 3);
    Eigen::MatrixXd v11 = m.V.topLeftCorner(3, 3);
    Eigen::MatrixXd v12 = m.V.topRightCorner(3, 2);
    Eigen::MatrixXd v22 = m.V.bottomRightCorner(2, 2);
    Eigen::MatrixXd schur = v22 - v12.transpose() * v11.llt().solve(v12);
    SpanningRegression reg = fit_spanning_regression(s.r1, s.r2);
    CHECK((reg.sigma_hat - schur).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("W >= LR >= LM and eigenvalues ordered") {
    std::mt19937_64 rng(47);
    for (int rep = 0; rep < 300; ++rep) {
        auto s = simulate(rng, 40 + static_cast<int>(rng() % 200),
                          1 + static_cast<int>(rng() % 5),
                          1 + static_cast<int>(rng() % 3),
                          0.002 * static_cast<double>(rng() % 3), false);
        auto tests = mv_spanning_tests(fit_spanning_regression(s.r1, s.r2));
        CHECK(ordering_check(tests));
        REQUIRE(tests[0].eigenvalues.has_value());
        auto [l1, l2] = *tests[0].eigenvalues;
        CHECK(l1 >= l2);
        CHECK(l2 >= 0.0);
        for (const auto& r : tests) {
            CHECK(r.statistic >= 0.0);
            CHECK(r.p_value >= 0.0);
            CHECK(r.p_value <= 1.0);
            CHECK(r.dof1 == doctest::Approx(2.0 * static_cast<double>(s.r2.cols())));
        }
    }
}

TEST_CASE("LR matches the determinant-ratio form") {
    std::mt19937_64 rng(53);
    for (int rep = 0; rep < 100; ++rep) {
        auto s = simulate(rng, 50 + static_cast<int>(rng() % 150),
                          1 + static_cast<int>(rng() % 5),
                          1 + static_cast<int>(rng() % 3), 0.001, false);
        SpanningRegression reg = fit_spanning_regression(s.r1, s.r2);
        auto tests = mv_spanning_tests(reg);
        double lr_det =
            static_cast<double>(reg.T) *
            (std::log(reg.sigma_tilde.determinant()) -
             std::log(reg.sigma_hat.determinant()));
        CHECK(tests[1].statistic ==
              doctest::Approx(lr_det).epsilon(1e-8));
    }
}

TEST_CASE("direct statistic evaluation at given eigenvalues") {
    // lambda = (0.5, 0.1), T = 100
    double T = 100.0, l1 = 0.5, l2 = 0.1;
    CHECK(T * (l1 + l2) == doctest::Approx(60.0));
    CHECK(T * (std::log1p(l1) + std::log1p(l2)) ==
          doctest::Approx(50.0779).epsilon(1e-4));
    CHECK(T * (l1 / (1 + l1) + l2 / (1 + l2)) ==
          doctest::Approx(42.4242).epsilon(1e-4));
}

TEST_CASE("strongly non-spanned data rejects everywhere") {
    std::mt19937_64 rng(59);
    auto s = simulate(rng, 400, 3, 2, 0.02, false, 0.005);
    SpanningRegression reg = fit_spanning_regression(s.r1, s.r2);
    auto tests = mv_spanning_tests(reg);
    for (const auto& r : tests) CHECK(r.p_value < 0.01);
    auto sd = stepdown_tests(reg);
    CHECK(sd.f1.p_value < 0.01);
    CHECK(gmm_wald(s.r1, s.r2).p_value < 0.01);
}

TEST_CASE("stepdown joint level arithmetic") {
    std::mt19937_64 rng(61);
    auto s = simulate(rng, 80, 2, 1, 0.0, true);
    SpanningRegression reg = fit_spanning_regression(s.r1, s.r2);
    auto sd = stepdown_tests(reg, 0.10, 0.05);
    CHECK(sd.xi_joint == doctest::Approx(0.145).epsilon(1e-15));
    CHECK(sd.f1.dof1 == doctest::Approx(1.0));
    CHECK(sd.f1.dof2 == doctest::Approx(80.0 - 2.0 - 1.0));
    CHECK(sd.f2.dof2 == doctest::Approx(80.0 - 2.0 - 1.0 + 1.0));
    auto sd2 = stepdown_tests(reg, 0.05, 0.05);
    CHECK(sd2.xi_joint == doctest::Approx(0.05 + 0.05 - 0.0025));
}

TEST_CASE("gmm wald close to MV wald under homoscedasticity") {
    std::mt19937_64 rng(67);
    auto s = simulate(rng, 500, 2, 1, 0.004, false);
    auto tests = mv_spanning_tests(fit_spanning_regression(s.r1, s.r2));
    // no serial correlation in the data, so the lag-0 weighting is tight
    auto g0 = gmm_wald(s.r1, s.r2, 0);
    CHECK(g0.statistic == doctest::Approx(tests[0].statistic).epsilon(0.15));
    CHECK(g0.dof1 == doctest::Approx(2.0));
    // automatic lag selection stays in the same ballpark
    auto g = gmm_wald(s.r1, s.r2);
    CHECK(g.statistic == doctest::Approx(tests[0].statistic).epsilon(0.5));
}

TEST_CASE("test-asset weights of joint portfolios follow the regression") {
    // GMVP tail proportional to sigma^-1 delta, TP tail to sigma^-1 alpha
    std::mt19937_64 rng(71);
    for (int rep = 0; rep < 30; ++rep) {
        int K = 2 + static_cast<int>(rng() % 3);
        int N = 1 + static_cast<int>(rng() % 3);
        auto s = simulate(rng, 150, K, N, 0.002, false);
        Eigen::MatrixXd all(150, K + N);
        all << s.r1, s.r2;
        MarketMoments m = estimate_moments(all, static_cast<std::size_t>(K));
        SpanningRegression reg = fit_spanning_regression(s.r1, s.r2);
        Eigen::VectorXd d_gmvp = reg.sigma_hat.llt().solve(reg.delta_hat);
        Eigen::VectorXd d_tp = reg.sigma_hat.llt().solve(reg.alpha_hat);
        Eigen::VectorXd w_gmvp = gmvp(m).weights.tail(N);
        Eigen::VectorXd w_tp = tangency(m).weights.tail(N);
        auto aligned = [](Eigen::VectorXd a, Eigen::VectorXd b) {
            a /= a.norm();
            b /= b.norm();
            if (a.dot(b) < 0.0) b = -b;
            return (a - b).lpNorm<Eigen::Infinity>();
        };
        CHECK(aligned(w_gmvp, d_gmvp) < 1e-8);
        CHECK(aligned(w_tp, d_tp) < 1e-8);
    }
}

TEST_CASE("input validation") {
    Eigen::MatrixXd r1(10, 2), r2(9, 1);
    CHECK_THROWS(fit_spanning_regression(r1, r2));
    Eigen::MatrixXd small1(3, 2), small2(3, 2);
    small1.setRandom();
    small2.setRandom();
    CHECK_THROWS_AS(fit_spanning_regression(small1, small2), EstimationError);
    // collinear benchmarks
    std::mt19937_64 rng(73);
    std::normal_distribution<double> nd(0.0, 0.02);
    Eigen::MatrixXd c1(40, 2), c2(40, 1);
    for (int t = 0; t < 40; ++t) {
        c1(t, 0) = nd(rng);
        c1(t, 1) = 2.0 * c1(t, 0);
        c2(t, 0) = nd(rng);
    }
    CHECK_THROWS_AS(fit_spanning_regression(c1, c2), EstimationError);
}
