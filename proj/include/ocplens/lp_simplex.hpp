#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ocplens/dynamics.hpp"

namespace ocplens {

enum class RowSense { kEqual, kLessEqual };

/// min c'y  s.t.  A y (= or <=) b,  0 <= y <= upper.  Columns are sparse;
/// an infinite upper bound leaves the column unbounded above.
class LinearProgram {
 public:
  explicit LinearProgram(int num_rows = 0);

  int num_rows() const { return static_cast<int>(rhs_.size()); }
  int num_columns() const { return static_cast<int>(cost_.size()); }

  void set_row(int i, RowSense sense, double rhs);
  int add_row(RowSense sense, double rhs);
  /// Returns the column index.
  int add_column(double cost, double upper,
                 std::vector<std::pair<int, double>> entries);
  /// Appends a coefficient to an existing column.
  void add_entry(int column, int row, double value);

  RowSense sense(int i) const { return sense_[i]; }
  double rhs(int i) const { return rhs_[i]; }
  double cost(int j) const { return cost_[j]; }
  double upper(int j) const { return upper_[j]; }
  const std::vector<std::pair<int, double>>& column(int j) const { return columns_[j]; }

  /// Row activities A y.
  Vector activity(const Vector& y) const;

 private:
  std::vector<RowSense> sense_;
  std::vector<double> rhs_;
  std::vector<double> cost_;
  std::vector<double> upper_;
  std::vector<std::vector<std::pair<int, double>>> columns_;
};

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-10;
  double pivot_tol = 1e-9;
  int max_iterations = 500000;
  int refactor_interval = 50;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

std::string lp_status_name(LpStatus s);

struct LpResult {
  LpStatus status = LpStatus::kIterationLimit;
  Vector x;               // structural columns only
  Vector reduced_costs;   // c_j - pi' A_j at the final basis, structural columns
  double objective = 0.0;
  int iterations = 0;
  double max_row_violation = 0.0;
};

/// Two-phase bounded-variable revised simplex with an explicit dense basis
/// inverse (product-form updates, periodic refactorization), Dantzig pricing
/// with a Bland fallback on degenerate stalls, and a two-pass Harris ratio
/// test.
LpResult solve_lp(const LinearProgram& lp, const LpOptions& opts = {});

}  // namespace ocplens
