#include "ccrtd/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "ccrtd/errors.hpp"
#include "ccrtd/random.hpp"

namespace ccrtd {

using std::numbers::pi;

UnivariateCauchy::UnivariateCauchy(double location, double scale)
    : location_(location), scale_(scale) {
  if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(location)) {
    throw InvalidInputError("Cauchy scale must be positive and finite");
  }
}

Eigen::MatrixXd robust_cholesky(Eigen::MatrixXd& matrix) {
  Eigen::LLT<Eigen::MatrixXd> llt(matrix);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  const double k = static_cast<double>(matrix.rows());
  const double jitter = 1e-10 * std::max(matrix.trace() / k, 1.0);
  matrix.diagonal().array() += jitter;
  llt.compute(matrix);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefiniteError("scale matrix is not positive definite");
  }
  return llt.matrixL();
}

MultivariateCauchy::MultivariateCauchy(Eigen::VectorXd location, Eigen::MatrixXd scale_matrix)
    : location_(std::move(location)), scale_matrix_(std::move(scale_matrix)) {
  const auto k = location_.size();
  if (k == 0 || scale_matrix_.rows() != k || scale_matrix_.cols() != k) {
    throw InvalidInputError("scale matrix must be K x K with K = dim(location) >= 1");
  }
  if (!location_.allFinite() || !scale_matrix_.allFinite()) {
    throw InvalidInputError("Cauchy parameters must be finite");
  }
  const double asym = (scale_matrix_ - scale_matrix_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, scale_matrix_.cwiseAbs().maxCoeff())) {
    throw InvalidInputError("scale matrix is not symmetric");
  }
  chol_ = robust_cholesky(scale_matrix_);
  log_det_ = 2.0 * chol_.diagonal().array().log().sum();
}

UnivariateCauchy MultivariateCauchy::marginal(Eigen::Index k) const {
  return UnivariateCauchy(location_[k], std::sqrt(scale_matrix_(k, k)));
}

double pdf(const UnivariateCauchy& dist, double x) {
  const double d = x - dist.location();
  const double s = dist.scale();
  return s / (pi * (d * d + s * s));
}

double log_pdf(const MultivariateCauchy& dist, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto p = dist.dimension();
  if (x.size() != p) throw InvalidInputError("pdf: dimension mismatch");
  const Eigen::VectorXd y =
      dist.cholesky_factor().triangularView<Eigen::Lower>().solve(x - dist.location());
  const double half = 0.5 * static_cast<double>(1 + p);
  return std::lgamma(half) - std::lgamma(0.5) - 0.5 * static_cast<double>(p) * std::log(pi) -
         0.5 * dist.log_determinant() - half * std::log1p(y.squaredNorm());
}

double pdf(const MultivariateCauchy& dist, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return std::exp(log_pdf(dist, x));
}

double cdf(const UnivariateCauchy& dist, double x) {
  return std::atan((x - dist.location()) / dist.scale()) / pi + 0.5;
}

double quantile(const UnivariateCauchy& dist, double probability) {
  if (!(probability > 0.0 && probability < 1.0)) {
    throw DomainError("quantile: probability must lie strictly inside (0, 1)");
  }
  return dist.location() + dist.scale() * std::tan(pi * (probability - 0.5));
}

UnivariateCauchy linear_combination(const MultivariateCauchy& dist,
                                    const Eigen::Ref<const Eigen::VectorXd>& weights) {
  if (weights.size() != dist.dimension()) {
    throw InvalidInputError("linear_combination: dimension mismatch");
  }
  const double variance_like = weights.dot(dist.scale_matrix() * weights);
  if (!(variance_like > 0.0)) {
    throw DegenerateDistributionError("linear_combination: a^T Sigma a must be positive");
  }
  return UnivariateCauchy(weights.dot(dist.location()), std::sqrt(variance_like));
}

double antiderivative_x_pdf(const UnivariateCauchy& dist, double x) {
  const double mu = dist.location();
  const double s = dist.scale();
  const double u = (x - mu) / s;
  return s / (2.0 * pi) * std::log1p(u * u) + mu / pi * std::atan(u);
}

double antiderivative_x2_pdf(const UnivariateCauchy& dist, double x) {
  const double mu = dist.location();
  const double s = dist.scale();
  const double u = (x - mu) / s;
  return s / pi * (x - mu) + (mu * mu - s * s) / pi * std::atan(u) +
         mu * s / pi * std::log1p(u * u);
}

Eigen::MatrixXd sample(const MultivariateCauchy& dist, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw InvalidInputError("sample: n must be at least 1");
  const auto k = dist.dimension();
  Eigen::MatrixXd out(n, k);
  Eigen::VectorXd z(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    RowStream rng(seed, static_cast<std::uint64_t>(i));
    const double g = std::abs(rng.normal());
    for (Eigen::Index c = 0; c < k; ++c) z[c] = rng.normal();
    out.row(i) = (dist.location() + dist.cholesky_factor() * z / g).transpose();
  }
  return out;
}

namespace {

double median(std::vector<double> values) {
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<long>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(values.begin(), values.begin() + static_cast<long>(mid)));
  }
  return m;
}

double total_log_likelihood(const MultivariateCauchy& dist,
                            const Eigen::Ref<const Eigen::MatrixXd>& samples) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    ll += log_pdf(dist, samples.row(i).transpose());
  }
  return ll;
}

}  // namespace

FitResult fit_mv_cauchy(const Eigen::Ref<const Eigen::MatrixXd>& samples, double tol,
                        int max_iter) {
  const auto n = samples.rows();
  const auto k = samples.cols();
  if (k < 1 || n <= k + 1) throw InvalidInputError("fit: need more than K+1 samples");
  if (!samples.allFinite()) throw InvalidInputError("fit: samples must be finite");

  Eigen::VectorXd mu(k);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    std::vector<double> col(samples.col(c).data(), samples.col(c).data() + n);
    mu[c] = median(col);
    for (auto& v : col) v = std::abs(v - mu[c]);
    const double mad = 1.4826 * median(std::move(col));
    sigma(c, c) = mad * mad;
  }

  MultivariateCauchy current(mu, sigma);
  double ll = total_log_likelihood(current, samples);
  std::vector<double> trace{ll};
  const double kd = static_cast<double>(k);

  Eigen::VectorXd weights(n);
  for (int iter = 1; iter <= max_iter; ++iter) {
    const Eigen::MatrixXd& chol = current.cholesky_factor();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd y = chol.triangularView<Eigen::Lower>().solve(
          samples.row(i).transpose() - current.location());
      weights[i] = (1.0 + kd) / (1.0 + y.squaredNorm());
    }
    mu = (samples.transpose() * weights) / weights.sum();
    const Eigen::MatrixXd centered = samples.rowwise() - mu.transpose();
    sigma = (centered.transpose() * weights.asDiagonal() * centered) / static_cast<double>(n);
    sigma = 0.5 * (sigma + sigma.transpose());

    current = MultivariateCauchy(mu, sigma);
    const double next_ll = total_log_likelihood(current, samples);
    const double change = std::abs(next_ll - ll) / std::max(1.0, std::abs(ll));
    ll = next_ll;
    trace.push_back(ll);
    if (change < tol) return FitResult{current, ll, iter, true, std::move(trace)};
  }
  return FitResult{current, ll, max_iter, false, std::move(trace)};
}

double histogram_rmse(const std::function<double(double)>& density,
                      std::span<const double> samples, int bins) {
  if (bins < 2) throw InvalidInputError("histogram_rmse: need at least 2 bins");
  if (samples.size() < 10) throw InvalidInputError("histogram_rmse: need at least 10 samples");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw InvalidInputError("histogram_rmse: samples span a zero-width range");

  const double width = (hi - lo) / bins;
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (double v : samples) {
    auto b = static_cast<int>((v - lo) / width);
    counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))] += 1.0;
  }
  const double norm = 1.0 / (static_cast<double>(samples.size()) * width);
  double sum_sq = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double centre = lo + (b + 0.5) * width;
    const double diff = counts[static_cast<std::size_t>(b)] * norm - density(centre);
    sum_sq += diff * diff;
  }
  return std::sqrt(sum_sq / bins);
}

}  // namespace ccrtd
