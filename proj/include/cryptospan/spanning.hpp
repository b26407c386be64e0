#pragma once

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cryptospan {

/// Multivariate regression of N test-asset return series on K benchmark
/// series, plus the constrained residual covariances the spanning statistics
/// are built from. All covariance estimates use the 1/T denominator.
struct SpanningRegression {
    Eigen::VectorXd alpha_hat;  // N
    Eigen::MatrixXd beta_hat;   // N x K
    Eigen::VectorXd delta_hat;  // N, = 1_N - beta 1_K
    Eigen::MatrixXd sigma_hat;    // unconstrained residual covariance
    Eigen::MatrixXd sigma_bar;    // constrained under alpha = 0
    Eigen::MatrixXd sigma_tilde;  // constrained under alpha = 0, delta = 0
    Eigen::MatrixXd xtx_inv;      // (X'X)^-1, X rows = [1, R1']
    std::size_t T = 0, K = 0, N = 0;
    bool exact_spanning = false;  // sigma_hat singular: spanning holds exactly
};

enum class SpanningTest { W, LR, LM, GMM_WALD, F1, F2 };

struct SpanningResult {
    SpanningTest test;
    double statistic = 0.0;
    double dof1 = 0.0;  // chi-square dof, or F numerator dof
    double dof2 = 0.0;  // F denominator dof (0 for chi-square family)
    double p_value = 1.0;
    std::optional<std::pair<double, double>> eigenvalues;  // (l1, l2), l1>=l2
};

struct StepdownResult {
    SpanningResult f1;
    SpanningResult f2;
    double xi1 = 0.10, xi2 = 0.05;
    double xi_joint = 0.0;  // xi1 + xi2 - xi1*xi2
    bool reject_joint = false;
};

SpanningRegression fit_spanning_regression(const Eigen::MatrixXd& r1,
                                           const Eigen::MatrixXd& r2);

/// Wald, likelihood-ratio and Lagrange-multiplier statistics from the
/// eigenvalues of H G^-1; chi-square with 2N dof.
std::array<SpanningResult, 3> mv_spanning_tests(const SpanningRegression& reg);

StepdownResult stepdown_tests(const SpanningRegression& reg, double xi1 = 0.10,
                              double xi2 = 0.05);

/// Heteroscedasticity-robust Wald test of [alpha; delta] = 0 from the
/// regression moment conditions with Newey-West weighting. hac_lags < 0
/// selects the floor(T^(1/4)) default.
SpanningResult gmm_wald(const Eigen::MatrixXd& r1, const Eigen::MatrixXd& r2,
                        int hac_lags = -1);

/// W >= LR >= LM up to slack; holds by construction, exposed as a self-test.
bool ordering_check(const std::array<SpanningResult, 3>& wlrlm,
                    double slack = 1e-10);

std::string spanning_test_name(SpanningTest t);

void write_spanning_csv(const std::filesystem::path& path,
                        const std::vector<SpanningResult>& results);

}  // namespace cryptospan
