#pragma once

#include <Eigen/Core>

#include <limits>
#include <string>
#include <vector>

namespace ccrtd {

inline constexpr double kUnlimited = std::numeric_limits<double>::infinity();

struct Line {
  int from_bus = 0;
  int to_bus = 0;
  double reactance = 0.0;  // p.u., > 0
  double limit = kUnlimited;  // MW, applies to |flow|
  std::string name;
};

/// Lossless DC network. Buses are 0-based; flows are positive from
/// `from_bus` to `to_bus`.
struct GridModel {
  int bus_count = 0;
  std::vector<Line> lines;
  int slack_bus = 0;

  /// Throws InvalidInputError on bad indices/reactances and IslandingError
  /// when the graph is not a single island.
  void validate() const;
};

/// Line-by-bus sensitivity matrix. Column `slack_bus` is identically zero.
class PtdfMatrix {
 public:
  PtdfMatrix(Eigen::MatrixXd factors, int slack_bus)
      : factors_(std::move(factors)), slack_bus_(slack_bus) {}

  const Eigen::MatrixXd& factors() const noexcept { return factors_; }
  double operator()(Eigen::Index line, Eigen::Index bus) const { return factors_(line, bus); }
  Eigen::Index line_count() const noexcept { return factors_.rows(); }
  Eigen::Index bus_count() const noexcept { return factors_.cols(); }
  int slack_bus() const noexcept { return slack_bus_; }

 private:
  Eigen::MatrixXd factors_;
  int slack_bus_;
};

PtdfMatrix build_ptdf(const GridModel& grid);

/// Flows for a balanced injection vector (generation positive, load
/// negative). Throws BalanceError if |sum(injections)| > 1e-6 MW.
Eigen::VectorXd line_flows(const PtdfMatrix& ptdf,
                           const Eigen::Ref<const Eigen::VectorXd>& injections);

}  // namespace ccrtd
