#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ccrtd {

enum class RowSense { Equal, LessEqual };

/// sum(coef * x[var]) (= or <=) bound.
struct LinearRow {
  std::vector<std::pair<int, double>> terms;
  double bound = 0.0;
  RowSense sense = RowSense::LessEqual;
  std::string name;

  double activity(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Smooth objective with callbacks for value, gradient and (dense) Hessian.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double value(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const = 0;
};

/// 0.5 x^T Q x + c^T x + constant.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(Eigen::MatrixXd q, Eigen::VectorXd c, double constant = 0.0)
      : q_(std::move(q)), c_(std::move(c)), constant_(constant) {}

  double value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override;

 private:
  Eigen::MatrixXd q_;
  Eigen::VectorXd c_;
  double constant_;
};

/// Value and first two derivatives of a univariate function.
struct ScalarDerivatives {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};

/// Sum of univariate terms, one optional term per variable. The Hessian is
/// diagonal.
class SeparableObjective final : public Objective {
 public:
  using Term = std::function<ScalarDerivatives(double)>;

  explicit SeparableObjective(int variable_count) : terms_(static_cast<std::size_t>(variable_count)) {}

  void set_term(int variable, Term term) { terms_.at(static_cast<std::size_t>(variable)) = std::move(term); }
  void add_constant(double c) { constant_ += c; }

  double value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override;

 private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

/// Smooth convex objective over box-bounded variables with linear equality
/// and inequality rows.
class ConvexProgram {
 public:
  ConvexProgram() = default;

  /// Returns the index of the new variable.
  int add_variable(std::string name, double lower, double upper);
  void add_row(LinearRow row) { rows_.push_back(std::move(row)); }
  void set_objective(std::shared_ptr<const Objective> objective) { objective_ = std::move(objective); }
  void set_bounds(int variable, double lower, double upper);

  int variable_count() const noexcept { return static_cast<int>(names_.size()); }
  int row_count() const noexcept { return static_cast<int>(rows_.size()); }
  const std::vector<std::string>& variable_names() const noexcept { return names_; }
  const std::vector<LinearRow>& rows() const noexcept { return rows_; }
  const Eigen::VectorXd& lower() const noexcept { return lower_; }
  const Eigen::VectorXd& upper() const noexcept { return upper_; }
  const Objective& objective() const { return *objective_; }
  bool has_objective() const noexcept { return static_cast<bool>(objective_); }

  /// Index of the named variable, or -1.
  int find_variable(const std::string& name) const;

  /// Throws InvalidInputError on out-of-range indices, crossed bounds or
  /// a missing objective.
  void validate() const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  std::vector<LinearRow> rows_;
  std::shared_ptr<const Objective> objective_;
};

}  // namespace ccrtd
