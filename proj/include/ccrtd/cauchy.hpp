#pragma once

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ccrtd {

/// One-dimensional Cauchy law. `scale` is the half-width at half-maximum
/// (not its square), so the density, CDF and quantile read literally.
class UnivariateCauchy {
 public:
  UnivariateCauchy(double location, double scale);

  double location() const noexcept { return location_; }
  double scale() const noexcept { return scale_; }

 private:
  double location_;
  double scale_;
};

/// K-variate Cauchy law (multivariate t with one degree of freedom).
/// The scale matrix is in squared-scale units; its Cholesky factor is cached.
class MultivariateCauchy {
 public:
  MultivariateCauchy(Eigen::VectorXd location, Eigen::MatrixXd scale_matrix);

  Eigen::Index dimension() const noexcept { return location_.size(); }
  const Eigen::VectorXd& location() const noexcept { return location_; }
  const Eigen::MatrixXd& scale_matrix() const noexcept { return scale_matrix_; }
  /// Lower-triangular L with L L^T equal to the (possibly jittered) scale matrix.
  const Eigen::MatrixXd& cholesky_factor() const noexcept { return chol_; }
  double log_determinant() const noexcept { return log_det_; }

  /// Marginal law of component k.
  UnivariateCauchy marginal(Eigen::Index k) const;

 private:
  Eigen::VectorXd location_;
  Eigen::MatrixXd scale_matrix_;
  Eigen::MatrixXd chol_;
  double log_det_ = 0.0;
};

struct FitResult {
  MultivariateCauchy distribution;
  double log_likelihood;
  int iterations;
  bool converged;
  std::vector<double> trace;  // log-likelihood at the start and after each iteration
};

/// Cholesky factor of an SPD matrix. On failure a single jitter of
/// 1e-10 * max(trace/K, 1) is added to the diagonal before retrying; the
/// returned matrix is the factor of the jittered matrix. Throws
/// NotPositiveDefiniteError if the retry also fails.
Eigen::MatrixXd robust_cholesky(Eigen::MatrixXd& matrix);

double pdf(const UnivariateCauchy& dist, double x);
double pdf(const MultivariateCauchy& dist, const Eigen::Ref<const Eigen::VectorXd>& x);
double log_pdf(const MultivariateCauchy& dist, const Eigen::Ref<const Eigen::VectorXd>& x);

double cdf(const UnivariateCauchy& dist, double x);

/// Inverse CDF; throws DomainError unless 0 < probability < 1.
double quantile(const UnivariateCauchy& dist, double probability);

/// Law of a^T x for x ~ dist (stable property). Throws
/// DegenerateDistributionError when a^T Sigma a is not positive.
UnivariateCauchy linear_combination(const MultivariateCauchy& dist,
                                    const Eigen::Ref<const Eigen::VectorXd>& weights);

/// Antiderivative of x * pdf(x) with zero integration constant.
double antiderivative_x_pdf(const UnivariateCauchy& dist, double x);

/// Antiderivative of x^2 * pdf(x) with zero integration constant.
double antiderivative_x2_pdf(const UnivariateCauchy& dist, double x);

/// n x K matrix of i.i.d. draws x = mu + L z / |g|. Row i depends only on
/// (seed, i).
Eigen::MatrixXd sample(const MultivariateCauchy& dist, Eigen::Index n, std::uint64_t seed);

/// EM estimate of a multivariate Cauchy from the rows of `samples`.
/// Reaching `max_iter` is reported through FitResult::converged, not thrown.
FitResult fit_mv_cauchy(const Eigen::Ref<const Eigen::MatrixXd>& samples, double tol = 1e-8,
                        int max_iter = 500);

/// Root-mean-square gap between a density-normalized histogram of `samples`
/// (over [min, max]) and `density` evaluated at the bin centres.
double histogram_rmse(const std::function<double(double)>& density,
                      std::span<const double> samples, int bins);

}  // namespace ccrtd
