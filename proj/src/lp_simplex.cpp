#include "ocplens/lp_simplex.hpp"

#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "ocplens/errors.hpp"

namespace ocplens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kStallLimit = 50;

enum class VarStatus : unsigned char { kBasic, kLower, kUpper };

class Simplex {
 public:
  Simplex(const LinearProgram& lp, const LpOptions& opts) : lp_(lp), opts_(opts) {
    m_ = lp.num_rows();
    n_struct_ = lp.num_columns();
    for (int j = 0; j < n_struct_; ++j) {
      cols_.push_back(lp.column(j));
      cost_.push_back(lp.cost(j));
      upper_.push_back(lp.upper(j));
    }
    basis_.assign(m_, -1);
    for (int i = 0; i < m_; ++i) {
      const double b = lp.rhs(i);
      if (lp.sense(i) == RowSense::kLessEqual) {
        const int s = add_internal_column({{i, 1.0}}, kInf);
        if (b >= 0.0) basis_[i] = s;
      }
      if (basis_[i] < 0) {
        const int a = add_internal_column({{i, b >= 0.0 ? 1.0 : -1.0}}, kInf);
        artificials_.push_back(a);
        basis_[i] = a;
      }
    }
    const int n = static_cast<int>(cols_.size());
    status_.assign(n, VarStatus::kLower);
    x_ = Vector::Zero(n);
    for (int i = 0; i < m_; ++i) {
      status_[basis_[i]] = VarStatus::kBasic;
      x_[basis_[i]] = std::abs(lp.rhs(i));
    }
    binv_ = Matrix::Identity(m_, m_);
    for (int i = 0; i < m_; ++i) {
      // Artificials for negative right-hand sides carry a -1 coefficient.
      binv_(i, i) = cols_[basis_[i]].front().second;
    }
  }

  LpResult run() {
    LpResult result;
    if (!artificials_.empty()) {
      std::vector<double> phase1(cols_.size(), 0.0);
      for (int a : artificials_) phase1[a] = 1.0;
      const LpStatus s1 = iterate(phase1, result.iterations);
      if (s1 == LpStatus::kIterationLimit) {
        result.status = s1;
        return finish(result);
      }
      double infeasibility = 0.0;
      for (int a : artificials_) infeasibility += x_[a];
      double scale = 1.0;
      for (int i = 0; i < m_; ++i) scale = std::max(scale, std::abs(lp_.rhs(i)));
      if (infeasibility > opts_.feasibility_tol * scale * std::max(1, m_)) {
        result.status = LpStatus::kInfeasible;
        return finish(result);
      }
      for (int a : artificials_) upper_[a] = 0.0;
    }
    result.status = iterate(cost_, result.iterations);
    if (result.status == LpStatus::kOptimal) {
      Vector cb(m_);
      for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
      const Vector pi = binv_.transpose() * cb;
      result.reduced_costs.resize(n_struct_);
      for (int j = 0; j < n_struct_; ++j) {
        double d = cost_[j];
        for (const auto& [row, v] : cols_[j]) d -= pi[row] * v;
        result.reduced_costs[j] = status_[j] == VarStatus::kBasic ? 0.0 : d;
      }
    }
    return finish(result);
  }

 private:
  int add_internal_column(std::vector<std::pair<int, double>> entries, double upper) {
    cols_.push_back(std::move(entries));
    cost_.push_back(0.0);
    upper_.push_back(upper);
    return static_cast<int>(cols_.size()) - 1;
  }

  void refactor() {
    Matrix B = Matrix::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
      for (const auto& [row, v] : cols_[basis_[i]]) B(row, i) = v;
    }
    const Eigen::PartialPivLU<Matrix> lu(B);
    binv_ = lu.inverse();
    if (!binv_.allFinite()) throw NumericalError("simplex basis became singular");
    Vector rhs(m_);
    for (int i = 0; i < m_; ++i) rhs[i] = lp_.rhs(i);
    for (int j = 0; j < static_cast<int>(cols_.size()); ++j) {
      if (status_[j] == VarStatus::kBasic || x_[j] == 0.0) continue;
      for (const auto& [row, v] : cols_[j]) rhs[row] -= v * x_[j];
    }
    const Vector xb = binv_ * rhs;
    for (int i = 0; i < m_; ++i) x_[basis_[i]] = xb[i];
  }

  LpStatus iterate(const std::vector<double>& cost, int& iterations) {
    const int n = static_cast<int>(cols_.size());
    int since_refactor = 0;
    int stall = 0;
    bool fresh = false;
    Vector cb(m_), alpha(m_);
    while (true) {
      if (since_refactor >= opts_.refactor_interval) {
        refactor();
        since_refactor = 0;
        fresh = true;
      }
      if (iterations >= opts_.max_iterations) return LpStatus::kIterationLimit;

      for (int i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
      const Vector pi = binv_.transpose() * cb;

      const bool bland = stall > kStallLimit;
      int q = -1;
      double best = 0.0;
      for (int j = 0; j < n; ++j) {
        if (status_[j] == VarStatus::kBasic || upper_[j] <= 0.0) continue;
        double d = cost[j];
        for (const auto& [row, v] : cols_[j]) d -= pi[row] * v;
        double score = 0.0;
        if (status_[j] == VarStatus::kLower && d < -opts_.optimality_tol) score = -d;
        if (status_[j] == VarStatus::kUpper && d > opts_.optimality_tol) score = d;
        if (score <= 0.0) continue;
        if (bland) {
          q = j;
          break;
        }
        if (score > best) {
          best = score;
          q = j;
        }
      }
      if (q < 0) {
        if (fresh) return LpStatus::kOptimal;
        // Confirm optimality on a freshly factored basis.
        since_refactor = opts_.refactor_interval;
        continue;
      }
      fresh = false;

      alpha.setZero();
      for (const auto& [row, v] : cols_[q]) alpha += v * binv_.col(row);
      const double dir = status_[q] == VarStatus::kLower ? 1.0 : -1.0;

      // Harris pass 1: largest step with bounds relaxed by the tolerance.
      const double tol = opts_.feasibility_tol;
      double theta_relaxed = kInf;
      for (int i = 0; i < m_; ++i) {
        const double rate = -dir * alpha[i];
        const int b = basis_[i];
        if (rate < -opts_.pivot_tol) {
          theta_relaxed = std::min(theta_relaxed, (x_[b] + tol) / -rate);
        } else if (rate > opts_.pivot_tol && std::isfinite(upper_[b])) {
          theta_relaxed = std::min(theta_relaxed, (upper_[b] - x_[b] + tol) / rate);
        }
      }
      // Pass 2: among rows blocking within that step, the largest pivot.
      int leave = -1;
      double theta = kInf;
      bool to_upper = false;
      double best_pivot = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double rate = -dir * alpha[i];
        const int b = basis_[i];
        double ratio = kInf;
        bool hits_upper = false;
        if (rate < -opts_.pivot_tol) {
          ratio = x_[b] / -rate;
        } else if (rate > opts_.pivot_tol && std::isfinite(upper_[b])) {
          ratio = (upper_[b] - x_[b]) / rate;
          hits_upper = true;
        } else {
          continue;
        }
        if (ratio <= theta_relaxed && std::abs(alpha[i]) > best_pivot) {
          best_pivot = std::abs(alpha[i]);
          leave = i;
          theta = std::max(ratio, 0.0);
          to_upper = hits_upper;
        }
      }

      const double range = upper_[q];
      if (leave < 0 && !std::isfinite(range)) return LpStatus::kUnbounded;
      ++iterations;
      ++since_refactor;

      if (leave < 0 || range <= theta) {
        // Bound flip: the entering column crosses to its other bound.
        for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * alpha[i] * range;
        status_[q] = status_[q] == VarStatus::kLower ? VarStatus::kUpper : VarStatus::kLower;
        x_[q] = status_[q] == VarStatus::kUpper ? range : 0.0;
        stall = 0;
        continue;
      }

      for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * alpha[i] * theta;
      x_[q] += dir * theta;
      const int out = basis_[leave];
      status_[out] = to_upper ? VarStatus::kUpper : VarStatus::kLower;
      x_[out] = to_upper ? upper_[out] : 0.0;
      status_[q] = VarStatus::kBasic;
      basis_[leave] = q;

      const Eigen::RowVectorXd pivot_row = binv_.row(leave) / alpha[leave];
      binv_.noalias() -= alpha * pivot_row;
      binv_.row(leave) = pivot_row;

      stall = theta <= 1e-12 ? stall + 1 : 0;
    }
  }

  LpResult& finish(LpResult& result) {
    result.x = x_.head(n_struct_).cwiseMax(0.0);
    for (int j = 0; j < n_struct_; ++j) result.x[j] = std::min(result.x[j], upper_[j]);
    result.objective = 0.0;
    for (int j = 0; j < n_struct_; ++j) result.objective += cost_[j] * result.x[j];
    const Vector act = lp_.activity(result.x);
    result.max_row_violation = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double r = act[i] - lp_.rhs(i);
      const double v = lp_.sense(i) == RowSense::kEqual ? std::abs(r) : std::max(r, 0.0);
      result.max_row_violation = std::max(result.max_row_violation, v);
    }
    return result;
  }

  const LinearProgram& lp_;
  const LpOptions& opts_;
  int m_ = 0;
  int n_struct_ = 0;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> cost_;
  std::vector<double> upper_;
  std::vector<int> artificials_;
  std::vector<int> basis_;
  std::vector<VarStatus> status_;
  Vector x_;
  Matrix binv_;
};

}  // namespace

LinearProgram::LinearProgram(int num_rows)
    : sense_(num_rows, RowSense::kEqual), rhs_(num_rows, 0.0) {
  if (num_rows < 0) throw InputError("row count must be nonnegative");
}

void LinearProgram::set_row(int i, RowSense sense, double rhs) {
  if (i < 0 || i >= num_rows()) throw InputError("row index out of range");
  if (!std::isfinite(rhs)) throw InputError("row bound must be finite");
  sense_[i] = sense;
  rhs_[i] = rhs;
}

int LinearProgram::add_row(RowSense sense, double rhs) {
  sense_.push_back(sense);
  rhs_.push_back(0.0);
  set_row(num_rows() - 1, sense, rhs);
  return num_rows() - 1;
}

int LinearProgram::add_column(double cost, double upper,
                              std::vector<std::pair<int, double>> entries) {
  if (!std::isfinite(cost)) throw InputError("column cost must be finite");
  if (!(upper >= 0.0)) throw InputError("column upper bound must be nonnegative");
  for (const auto& [row, v] : entries) {
    if (row < 0 || row >= num_rows()) throw InputError("row index out of range");
    if (!std::isfinite(v)) throw InputError("coefficient must be finite");
  }
  cost_.push_back(cost);
  upper_.push_back(upper);
  columns_.push_back(std::move(entries));
  return num_columns() - 1;
}

void LinearProgram::add_entry(int column, int row, double value) {
  if (column < 0 || column >= num_columns()) throw InputError("column index out of range");
  if (row < 0 || row >= num_rows()) throw InputError("row index out of range");
  if (!std::isfinite(value)) throw InputError("coefficient must be finite");
  columns_[column].emplace_back(row, value);
}

Vector LinearProgram::activity(const Vector& y) const {
  if (y.size() != num_columns()) throw InputError("point has wrong size");
  Vector out = Vector::Zero(num_rows());
  for (int j = 0; j < num_columns(); ++j) {
    if (y[j] == 0.0) continue;
    for (const auto& [row, v] : columns_[j]) out[row] += v * y[j];
  }
  return out;
}

std::string lp_status_name(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kIterationLimit: return "iteration limit";
  }
  return "unknown";
}

LpResult solve_lp(const LinearProgram& lp, const LpOptions& opts) {
  if (lp.num_rows() == 0) {
    LpResult r;
    r.x = Vector::Zero(lp.num_columns());
    for (int j = 0; j < lp.num_columns(); ++j) {
      if (lp.cost(j) < 0.0) {
        if (!std::isfinite(lp.upper(j))) {
          r.status = LpStatus::kUnbounded;
          return r;
        }
        r.x[j] = lp.upper(j);
        r.objective += lp.cost(j) * lp.upper(j);
      }
    }
    r.status = LpStatus::kOptimal;
    return r;
  }
  Simplex simplex(lp, opts);
  return simplex.run();
}

}  // namespace ocplens
