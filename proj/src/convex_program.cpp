#include "ccrtd/convex_program.hpp"

#include <cmath>

#include "ccrtd/errors.hpp"

namespace ccrtd {

double LinearRow::activity(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double sum = 0.0;
  for (const auto& [var, coef] : terms) sum += coef * x[var];
  return sum;
}

double QuadraticObjective::value(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(q_ * x) + c_.dot(x) + constant_;
}

Eigen::VectorXd QuadraticObjective::gradient(const Eigen::VectorXd& x) const { return q_ * x + c_; }

Eigen::MatrixXd QuadraticObjective::hessian(const Eigen::VectorXd&) const { return q_; }

double SeparableObjective::value(const Eigen::VectorXd& x) const {
  double sum = constant_;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (terms_[i]) sum += terms_[i](x[static_cast<Eigen::Index>(i)]).value;
  }
  return sum;
}

Eigen::VectorXd SeparableObjective::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (terms_[i]) g[k] = terms_[i](x[k]).first;
  }
  return g;
}

Eigen::MatrixXd SeparableObjective::hessian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(x.size(), x.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (terms_[i]) h(k, k) = terms_[i](x[k]).second;
  }
  return h;
}

int ConvexProgram::add_variable(std::string name, double lower, double upper) {
  const int index = variable_count();
  if (!index_.emplace(name, index).second) {
    throw InvalidInputError("duplicate variable name '" + name + "'");
  }
  names_.push_back(std::move(name));
  lower_.conservativeResize(index + 1);
  upper_.conservativeResize(index + 1);
  lower_[index] = lower;
  upper_[index] = upper;
  return index;
}

void ConvexProgram::set_bounds(int variable, double lower, double upper) {
  lower_[variable] = lower;
  upper_[variable] = upper;
}

int ConvexProgram::find_variable(const std::string& name) const {
  const auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

void ConvexProgram::validate() const {
  if (!objective_) throw InvalidInputError("program has no objective");
  for (int i = 0; i < variable_count(); ++i) {
    if (lower_[i] > upper_[i]) {
      throw InvalidInputError("variable '" + names_[static_cast<std::size_t>(i)] +
                              "' has lower bound above upper bound");
    }
  }
  for (const auto& row : rows_) {
    if (!std::isfinite(row.bound)) {
      throw InvalidInputError("row '" + row.name + "' has a non-finite bound");
    }
    for (const auto& [var, coef] : row.terms) {
      if (var < 0 || var >= variable_count() || !std::isfinite(coef)) {
        throw InvalidInputError("row '" + row.name + "' has an invalid term");
      }
    }
  }
}

}  // namespace ccrtd
