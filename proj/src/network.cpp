#include "ccrtd/network.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numeric>

#include "ccrtd/errors.hpp"

namespace ccrtd {

void GridModel::validate() const {
  if (bus_count < 1) throw InvalidInputError("grid needs at least one bus");
  if (slack_bus < 0 || slack_bus >= bus_count) throw InvalidInputError("slack bus out of range");

  // Union-find over buses to detect islands.
  std::vector<int> parent(static_cast<std::size_t>(bus_count));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int b) {
    while (parent[b] != b) b = parent[b] = parent[parent[b]];
    return b;
  };
  for (const auto& line : lines) {
    if (line.from_bus < 0 || line.from_bus >= bus_count || line.to_bus < 0 ||
        line.to_bus >= bus_count) {
      throw InvalidInputError("line '" + line.name + "' references an unknown bus");
    }
    if (line.from_bus == line.to_bus) {
      throw InvalidInputError("line '" + line.name + "' is a self-loop");
    }
    if (!(line.reactance > 0.0) || !std::isfinite(line.reactance)) {
      throw InvalidInputError("line '" + line.name + "' must have positive reactance");
    }
    if (!(line.limit > 0.0)) {
      throw InvalidInputError("line '" + line.name + "' must have a positive limit");
    }
    parent[find(line.from_bus)] = find(line.to_bus);
  }
  const int root = find(0);
  for (int b = 1; b < bus_count; ++b) {
    if (find(b) != root) {
      throw IslandingError("bus " + std::to_string(b) + " is not connected to bus 0");
    }
  }
}

PtdfMatrix build_ptdf(const GridModel& grid) {
  grid.validate();
  const int n = grid.bus_count;
  const auto l = static_cast<Eigen::Index>(grid.lines.size());
  const int slack = grid.slack_bus;

  // Map buses to reduced indices with the slack removed.
  std::vector<int> reduced(static_cast<std::size_t>(n), -1);
  for (int b = 0, r = 0; b < n; ++b) {
    if (b != slack) reduced[b] = r++;
  }

  Eigen::MatrixXd b_bus = Eigen::MatrixXd::Zero(n - 1, n - 1);
  Eigen::MatrixXd b_f = Eigen::MatrixXd::Zero(l, n - 1);
  for (Eigen::Index k = 0; k < l; ++k) {
    const auto& line = grid.lines[static_cast<std::size_t>(k)];
    const double y = 1.0 / line.reactance;
    const int f = reduced[line.from_bus];
    const int t = reduced[line.to_bus];
    if (f >= 0) {
      b_bus(f, f) += y;
      b_f(k, f) = y;
    }
    if (t >= 0) {
      b_bus(t, t) += y;
      b_f(k, t) = -y;
    }
    if (f >= 0 && t >= 0) {
      b_bus(f, t) -= y;
      b_bus(t, f) -= y;
    }
  }

  Eigen::MatrixXd factors = Eigen::MatrixXd::Zero(l, n);
  if (n > 1) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b_bus);
    if (!lu.isInvertible()) throw SingularMatrixError("reduced susceptance matrix is singular");
    const Eigen::MatrixXd reduced_factors = b_f * lu.inverse();
    for (int b = 0; b < n; ++b) {
      if (reduced[b] >= 0) factors.col(b) = reduced_factors.col(reduced[b]);
    }
  }
  return PtdfMatrix(std::move(factors), slack);
}

Eigen::VectorXd line_flows(const PtdfMatrix& ptdf,
                           const Eigen::Ref<const Eigen::VectorXd>& injections) {
  if (injections.size() != ptdf.bus_count()) {
    throw InvalidInputError("line_flows: injection vector has wrong length");
  }
  const double imbalance = injections.sum();
  if (std::abs(imbalance) > 1e-6) {
    throw BalanceError("line_flows: injections are unbalanced by " + std::to_string(imbalance) +
                       " MW");
  }
  return ptdf.factors() * injections;
}

}  // namespace ccrtd
