#include "cryptospan/spanning.hpp"

#include <cmath>
#include <stdexcept>

#include "cryptospan/csv.hpp"
#include "cryptospan/distributions.hpp"
#include "cryptospan/frontier.hpp"

namespace cryptospan {

namespace {

// Least squares restricted by Ar * B + Cr = 0 (constraints act on the left,
// i.e. on the coefficient rows). Returns the restricted coefficient matrix.
Eigen::MatrixXd restricted_ls(const Eigen::MatrixXd& b_hat,
                              const Eigen::MatrixXd& xtx_inv,
                              const Eigen::MatrixXd& ar,
                              const Eigen::MatrixXd& cr) {
    Eigen::MatrixXd axa = ar * xtx_inv * ar.transpose();
    Eigen::MatrixXd corr = xtx_inv * ar.transpose() *
                           axa.ldlt().solve(ar * b_hat + cr);
    return b_hat - corr;
}

Eigen::MatrixXd residual_cov(const Eigen::MatrixXd& y,
                             const Eigen::MatrixXd& x,
                             const Eigen::MatrixXd& b) {
    Eigen::MatrixXd e = y - x * b;
    Eigen::MatrixXd s = e.transpose() * e / static_cast<double>(y.rows());
    return (s + s.transpose()) / 2.0;
}

double safe_logdet(const Eigen::MatrixXd& s) {
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

SpanningRegression fit_spanning_regression(const Eigen::MatrixXd& r1,
                                           const Eigen::MatrixXd& r2) {
    if (r1.rows() != r2.rows())
        throw std::invalid_argument("benchmark and test panels differ in length");
    const auto T = r1.rows();
    const auto K = r1.cols();
    const auto N = r2.cols();
    if (T < K + N + 1)
        throw EstimationError("too few observations: need T >= K+N+1");

    Eigen::MatrixXd x(T, K + 1);
    x.col(0).setOnes();
    x.rightCols(K) = r1;

    Eigen::MatrixXd xtx = x.transpose() * x;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> xes(xtx);
    if (xes.eigenvalues().minCoeff() <=
        1e-12 * std::max(1e-300, xes.eigenvalues().maxCoeff()))
        throw EstimationError("benchmark design matrix is rank deficient");
    Eigen::LDLT<Eigen::MatrixXd> xtx_f(xtx);

    SpanningRegression reg;
    reg.T = static_cast<std::size_t>(T);
    reg.K = static_cast<std::size_t>(K);
    reg.N = static_cast<std::size_t>(N);
    reg.xtx_inv = xtx_f.solve(Eigen::MatrixXd::Identity(K + 1, K + 1));

    Eigen::MatrixXd b_hat = xtx_f.solve(x.transpose() * r2);  // (K+1) x N
    reg.alpha_hat = b_hat.row(0).transpose();
    reg.beta_hat = b_hat.bottomRows(K).transpose();  // N x K
    reg.delta_hat =
        Eigen::VectorXd::Ones(N) - reg.beta_hat * Eigen::VectorXd::Ones(K);
    reg.sigma_hat = residual_cov(r2, x, b_hat);

    // alpha = 0: select the intercept row
    Eigen::MatrixXd a1 = Eigen::MatrixXd::Zero(1, K + 1);
    a1(0, 0) = 1.0;
    Eigen::MatrixXd c1 = Eigen::MatrixXd::Zero(1, N);
    reg.sigma_bar = residual_cov(r2, x, restricted_ls(b_hat, reg.xtx_inv, a1, c1));

    // alpha = 0 and beta rows summing to one
    Eigen::MatrixXd a2 = Eigen::MatrixXd::Zero(2, K + 1);
    a2(0, 0) = 1.0;
    a2.row(1).tail(K).setConstant(-1.0);
    Eigen::MatrixXd c2(2, N);
    c2.row(0).setZero();
    c2.row(1).setOnes();
    reg.sigma_tilde =
        residual_cov(r2, x, restricted_ls(b_hat, reg.xtx_inv, a2, c2));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reg.sigma_hat);
    reg.exact_spanning = es.eigenvalues().minCoeff() <=
                         1e-14 * std::max(1.0, es.eigenvalues().maxCoeff());
    return reg;
}

std::array<SpanningResult, 3> mv_spanning_tests(const SpanningRegression& reg) {
    const double T = static_cast<double>(reg.T);
    const auto K = static_cast<Eigen::Index>(reg.K);
    const auto N = static_cast<Eigen::Index>(reg.N);
    const double dof = 2.0 * static_cast<double>(N);

    std::array<SpanningResult, 3> out;
    out[0].test = SpanningTest::W;
    out[1].test = SpanningTest::LR;
    out[2].test = SpanningTest::LM;
    for (auto& r : out) r.dof1 = dof;

    double l1 = 0.0, l2 = 0.0;
    if (!reg.exact_spanning) {
        // Theta = [alpha'; delta'], G = T * A (X'X)^-1 A', H = Theta S^-1 Theta'
        Eigen::MatrixXd theta(2, N);
        theta.row(0) = reg.alpha_hat.transpose();
        theta.row(1) = reg.delta_hat.transpose();
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, K + 1);
        a(0, 0) = 1.0;
        a.row(1).tail(K).setConstant(-1.0);
        Eigen::MatrixXd g = T * a * reg.xtx_inv * a.transpose();
        Eigen::MatrixXd h =
            theta * reg.sigma_hat.llt().solve(theta.transpose());
        // eigenvalues of H G^-1 via the symmetric congruent form
        Eigen::LLT<Eigen::MatrixXd> gl(g);
        Eigen::MatrixXd li = gl.matrixL()
                                 .toDenseMatrix()
                                 .triangularView<Eigen::Lower>()
                                 .solve(Eigen::MatrixXd::Identity(2, 2));
        Eigen::MatrixXd sym = li * h * li.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            (sym + sym.transpose()) / 2.0);
        l1 = std::max(0.0, es.eigenvalues()(1));
        l2 = std::max(0.0, es.eigenvalues()(0));
    }
    out[0].statistic = T * (l1 + l2);
    out[1].statistic = T * (std::log1p(l1) + std::log1p(l2));
    out[2].statistic = T * (l1 / (1.0 + l1) + l2 / (1.0 + l2));
    for (auto& r : out) {
        r.eigenvalues = {l1, l2};
        r.p_value = dist::chi2_sf(r.statistic, dof);
    }
    return out;
}

StepdownResult stepdown_tests(const SpanningRegression& reg, double xi1,
                              double xi2) {
    const double T = static_cast<double>(reg.T);
    const double K = static_cast<double>(reg.K);
    const double N = static_cast<double>(reg.N);
    if (T - K - N < 1.0)
        throw EstimationError("too few observations for the stepdown F tests");

    StepdownResult out;
    out.xi1 = xi1;
    out.xi2 = xi2;
    out.xi_joint = xi1 + xi2 - xi1 * xi2;

    double ld_hat = safe_logdet(reg.sigma_hat);
    double ld_bar = safe_logdet(reg.sigma_bar);
    double ld_tilde = safe_logdet(reg.sigma_tilde);

    out.f1.test = SpanningTest::F1;
    out.f1.dof1 = N;
    out.f1.dof2 = T - K - N;
    double u1 = reg.exact_spanning ? 0.0 : std::expm1(ld_bar - ld_hat);
    out.f1.statistic = (T - K - N) / N * std::max(0.0, u1);
    out.f1.p_value = dist::f_sf(out.f1.statistic, out.f1.dof1, out.f1.dof2);

    out.f2.test = SpanningTest::F2;
    out.f2.dof1 = N;
    out.f2.dof2 = T - K - N + 1.0;
    double u2 = reg.exact_spanning ? 0.0 : std::expm1(ld_tilde - ld_bar);
    out.f2.statistic = (T - K - N + 1.0) / N * std::max(0.0, u2);
    out.f2.p_value = dist::f_sf(out.f2.statistic, out.f2.dof1, out.f2.dof2);

    out.reject_joint = out.f1.p_value < xi1 && out.f2.p_value < xi2;
    return out;
}

SpanningResult gmm_wald(const Eigen::MatrixXd& r1, const Eigen::MatrixXd& r2,
                        int hac_lags) {
    const auto T = r1.rows();
    const auto K = r1.cols();
    const auto N = r2.cols();
    SpanningRegression reg = fit_spanning_regression(r1, r2);

    SpanningResult out;
    out.test = SpanningTest::GMM_WALD;
    out.dof1 = 2.0 * static_cast<double>(N);
    if (reg.exact_spanning) {
        out.statistic = 0.0;
        out.p_value = 1.0;
        return out;
    }

    Eigen::MatrixXd x(T, K + 1);
    x.col(0).setOnes();
    x.rightCols(K) = r1;
    Eigen::MatrixXd b(K + 1, N);
    b.row(0) = reg.alpha_hat.transpose();
    b.bottomRows(K) = reg.beta_hat.transpose();
    Eigen::MatrixXd resid = r2 - x * b;  // T x N

    // moment vector g_t = eps_t kron x_t, stacked column-major over theta =
    // vec(B)
    const Eigen::Index m = (K + 1) * N;
    Eigen::MatrixXd gm(T, m);
    for (Eigen::Index t = 0; t < T; ++t)
        for (Eigen::Index j = 0; j < N; ++j)
            gm.row(t).segment(j * (K + 1), K + 1) =
                resid(t, j) * x.row(t);

    int lags = hac_lags >= 0
                   ? hac_lags
                   : static_cast<int>(std::floor(std::pow(
                         static_cast<double>(T), 0.25)));
    Eigen::MatrixXd s = gm.transpose() * gm / static_cast<double>(T);
    for (int l = 1; l <= lags; ++l) {
        double w = 1.0 - static_cast<double>(l) / (lags + 1.0);  // Bartlett
        Eigen::MatrixXd gl = gm.topRows(T - l).transpose() * gm.bottomRows(T - l) /
                             static_cast<double>(T);
        s += w * (gl + gl.transpose());
    }
    s = ((s + s.transpose()) / 2.0).eval();

    // exactly identified: V_theta = D^-1 S D^-1' with D = -I_N kron (X'X/T)
    Eigen::MatrixXd xtx_t = x.transpose() * x / static_cast<double>(T);
    Eigen::LDLT<Eigen::MatrixXd> xf(xtx_t);
    Eigen::MatrixXd dinv_s(m, m);
    for (Eigen::Index j = 0; j < N; ++j)
        dinv_s.middleRows(j * (K + 1), K + 1) =
            -xf.solve(s.middleRows(j * (K + 1), K + 1));
    Eigen::MatrixXd v_theta(m, m);
    for (Eigen::Index j = 0; j < N; ++j)
        v_theta.middleCols(j * (K + 1), K + 1) =
            -xf.solve(dinv_s.middleCols(j * (K + 1), K + 1).transpose())
                 .transpose();

    // restrictions: alpha_j = 0 and 1 - beta_j 1 = 0 for each test asset
    Eigen::MatrixXd rmat = Eigen::MatrixXd::Zero(2 * N, m);
    Eigen::VectorXd avec(2 * N);
    for (Eigen::Index j = 0; j < N; ++j) {
        rmat(2 * j, j * (K + 1)) = 1.0;
        rmat.row(2 * j + 1).segment(j * (K + 1) + 1, K).setConstant(-1.0);
        avec(2 * j) = reg.alpha_hat(j);
        avec(2 * j + 1) = reg.delta_hat(j);
    }
    Eigen::MatrixXd rvr = rmat * v_theta * rmat.transpose();
    out.statistic = static_cast<double>(T) *
                    avec.dot(rvr.ldlt().solve(avec));
    out.statistic = std::max(0.0, out.statistic);
    out.p_value = dist::chi2_sf(out.statistic, out.dof1);
    return out;
}

bool ordering_check(const std::array<SpanningResult, 3>& wlrlm, double slack) {
    return wlrlm[0].statistic + slack >= wlrlm[1].statistic &&
           wlrlm[1].statistic + slack >= wlrlm[2].statistic;
}

std::string spanning_test_name(SpanningTest t) {
    switch (t) {
        case SpanningTest::W: return "W";
        case SpanningTest::LR: return "LR";
        case SpanningTest::LM: return "LM";
        case SpanningTest::GMM_WALD: return "GMM_Wald";
        case SpanningTest::F1: return "F1";
        case SpanningTest::F2: return "F2";
    }
    return "?";
}

void write_spanning_csv(const std::filesystem::path& path,
                        const std::vector<SpanningResult>& results) {
    csv::Writer out(path);
    out.header({"test", "statistic", "dof1", "dof2", "p_value"});
    for (const auto& r : results) {
        out.cell(spanning_test_name(r.test));
        out.cell(r.statistic);
        out.cell(r.dof1);
        out.cell(r.dof2);
        out.cell(r.p_value);
        out.end_row();
    }
}

}  // namespace cryptospan
