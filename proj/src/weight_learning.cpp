#include "ocplens/weight_learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ocplens/errors.hpp"
#include "ocplens/sensitivity.hpp"

namespace ocplens {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Free entries, normalization groups and monotonicity pairs of a problem.
struct Layout {
  int rows = 0;  // N + 1
  int cols = 0;  // R
  std::vector<bool> free;
  std::vector<int> group;  // normalization group per free entry, -1 otherwise
  int num_groups = 0;

  int index(int k, int r) const { return k * cols + r; }
};

Layout make_layout(const LearningProblem& p) {
  Layout L;
  L.rows = p.horizon + 1;
  L.cols = p.components;
  L.free.assign(static_cast<std::size_t>(L.rows) * L.cols, false);
  L.group.assign(L.free.size(), -1);
  std::vector<int> component_group(L.cols, -1);
  for (int r = 0; r < L.cols; ++r) {
    for (int k = 0; k < L.rows; ++k) {
      if (p.initial(k, r) <= 0.0) continue;
      L.free[L.index(k, r)] = true;
      if (component_group[r] < 0) {
        component_group[r] = p.per_component_normalization ? L.num_groups++ : 0;
      }
      L.group[L.index(k, r)] = component_group[r];
    }
  }
  if (!p.per_component_normalization) L.num_groups = 1;
  return L;
}

/// Linear pieces of phi_e(w) = sum_j max(m + c_j w, 0) on [0, cap].
struct Pieces {
  std::vector<double> lengths;  // last one infinite
  std::vector<double> slopes;   // strictly increasing
};

Pieces entry_pieces(const std::vector<double>& c, double m, double cap) {
  std::vector<std::pair<double, double>> kinks;  // (breakpoint, |c|)
  double slope = 0.0;
  for (double cj : c) {
    slope += cj;
    if (cj < 0.0) kinks.emplace_back(m / -cj, -cj);
  }
  std::sort(kinks.begin(), kinks.end());
  Pieces out;
  double start = 0.0;
  std::size_t i = 0;
  while (i < kinks.size() && kinks[i].first < cap) {
    const double b = kinks[i].first;
    out.lengths.push_back(b - start);
    out.slopes.push_back(slope);
    while (i < kinks.size() && kinks[i].first == b) slope += kinks[i++].second;
    start = b;
  }
  out.lengths.push_back(kInf);
  out.slopes.push_back(slope);
  return out;
}

std::vector<double> entry_coefficients(const LearningProblem& p, int k, int r) {
  std::vector<double> c;
  c.reserve(p.samples.size());
  for (const auto& s : p.samples) c.push_back(s.coefficients(k, r));
  return c;
}

/// Equality/monotonicity rows shared by the LP formulations. Returns per-entry
/// row entries to append to every column that contributes to w_e.
struct ConstraintRows {
  std::vector<std::vector<std::pair<int, double>>> entry_rows;
};

ConstraintRows add_constraint_rows(LinearProgram& lp, const LearningProblem& p,
                                   const Layout& L) {
  ConstraintRows out;
  out.entry_rows.resize(L.free.size());
  std::vector<int> norm_row(L.num_groups);
  for (int g = 0; g < L.num_groups; ++g) {
    norm_row[g] = lp.add_row(RowSense::kEqual, p.normalization_total());
  }
  for (int r = 0; r < L.cols; ++r) {
    for (int k = 0; k < L.rows; ++k) {
      const int e = L.index(k, r);
      if (!L.free[e]) continue;
      out.entry_rows[e].emplace_back(norm_row[L.group[e]], 1.0);
      if (k + 1 < L.rows && L.free[L.index(k + 1, r)]) {
        // w_{k+1} - w_k <= 0
        const int row = lp.add_row(RowSense::kLessEqual, 0.0);
        out.entry_rows[e].emplace_back(row, -1.0);
        out.entry_rows[L.index(k + 1, r)].emplace_back(row, 1.0);
      }
    }
  }
  return out;
}

/// Clips to the feasible set: exact nonnegativity, monotone per component,
/// and each normalization group rescaled to its total.
Matrix polish(const LearningProblem& p, const Layout& L, Matrix w) {
  for (int r = 0; r < L.cols; ++r) {
    for (int k = 0; k < L.rows; ++k) {
      if (!L.free[L.index(k, r)]) {
        w(k, r) = 0.0;
        continue;
      }
      w(k, r) = std::max(w(k, r), 0.0);
      if (k > 0) w(k, r) = std::min(w(k, r), w(k - 1, r));
    }
  }
  for (int g = 0; g < L.num_groups; ++g) {
    double sum = 0.0;
    for (std::size_t e = 0; e < L.free.size(); ++e) {
      if (L.group[e] == g) sum += w(static_cast<int>(e) / L.cols, static_cast<int>(e) % L.cols);
    }
    if (!(sum > 0.0)) {
      // Degenerate group: fall back to the initial shape.
      for (std::size_t e = 0; e < L.free.size(); ++e) {
        if (L.group[e] != g) continue;
        const int k = static_cast<int>(e) / L.cols, r = static_cast<int>(e) % L.cols;
        w(k, r) = p.initial(k, r);
        sum += w(k, r);
      }
    }
    const double scale = p.normalization_total() / sum;
    for (std::size_t e = 0; e < L.free.size(); ++e) {
      if (L.group[e] != g) continue;
      w(static_cast<int>(e) / L.cols, static_cast<int>(e) % L.cols) *= scale;
    }
  }
  return w;
}

Matrix feasible_start(const LearningProblem& p, const Layout& L) {
  return polish(p, L, p.initial);
}

struct SegmentModel {
  LinearProgram lp;
  std::vector<int> column_entry;  // entry index per structural column
  std::vector<double> column_slope;
};

SegmentModel build_segment_lp(const LearningProblem& p, const Layout& L) {
  SegmentModel M;
  const ConstraintRows rows = add_constraint_rows(M.lp, p, L);
  const double cap = p.normalization_total();
  for (int k = 0; k < L.rows; ++k) {
    for (int r = 0; r < L.cols; ++r) {
      const int e = L.index(k, r);
      if (!L.free[e]) continue;
      const Pieces pieces = entry_pieces(entry_coefficients(p, k, r), p.margin, cap);
      for (std::size_t s = 0; s < pieces.lengths.size(); ++s) {
        M.lp.add_column(pieces.slopes[s], pieces.lengths[s], rows.entry_rows[e]);
        M.column_entry.push_back(e);
        M.column_slope.push_back(pieces.slopes[s]);
      }
    }
  }
  return M;
}

Matrix entries_from_columns(const Layout& L, const std::vector<int>& column_entry,
                            const Vector& y) {
  Matrix w = Matrix::Zero(L.rows, L.cols);
  for (std::size_t j = 0; j < column_entry.size(); ++j) {
    const int e = column_entry[j];
    w(e / L.cols, e % L.cols) += y[static_cast<Eigen::Index>(j)];
  }
  return w;
}

WeightSolveResult finish(const LearningProblem& p, const Layout& L, const Matrix& raw,
                         bool optimal, int iterations, std::string message) {
  WeightSolveResult out;
  out.weights = polish(p, L, raw);
  out.objective = hinge_objective(p, out.weights);
  out.optimal = optimal;
  out.iterations = iterations;
  out.message = std::move(message);
  return out;
}

WeightSolveResult solve_segment(const LearningProblem& p, const Layout& L,
                                const WeightSolveOptions& opts) {
  SegmentModel M = build_segment_lp(p, L);
  const LpResult first = solve_lp(M.lp, opts.lp);
  if (first.status != LpStatus::kOptimal) {
    return finish(p, L, feasible_start(p, L), false, first.iterations,
                  "simplex: " + lp_status_name(first.status));
  }
  const Matrix w_first = entries_from_columns(L, M.column_entry, first.x);
  WeightSolveResult best = finish(p, L, w_first, true, first.iterations, "optimal");
  if (!opts.tie_break) return best;

  // Second stage over the optimal face: columns with a strictly positive
  // reduced cost stay at zero, strictly negative ones at their upper bound.
  // Among the remaining schedules minimize the largest ratio w_e / w_init_e.
  const double tol = 1e-9;
  LinearProgram tie(M.lp.num_rows());
  Vector fixed_rhs(M.lp.num_rows());
  for (int i = 0; i < M.lp.num_rows(); ++i) fixed_rhs[i] = M.lp.rhs(i);
  Matrix fixed = Matrix::Zero(L.rows, L.cols);
  std::vector<int> free_columns;
  for (int j = 0; j < M.lp.num_columns(); ++j) {
    const double d = first.reduced_costs[j];
    if (d > tol) continue;
    if (d < -tol && std::isfinite(M.lp.upper(j))) {
      const int e = M.column_entry[j];
      fixed(e / L.cols, e % L.cols) += M.lp.upper(j);
      for (const auto& [row, v] : M.lp.column(j)) fixed_rhs[row] -= v * M.lp.upper(j);
      continue;
    }
    free_columns.push_back(j);
  }
  std::vector<int> ratio_row(L.free.size(), -1);
  std::vector<std::pair<int, double>> s_entries;
  for (std::size_t e = 0; e < L.free.size(); ++e) {
    if (!L.free[e]) continue;
    const int k = static_cast<int>(e) / L.cols, r = static_cast<int>(e) % L.cols;
    ratio_row[e] = tie.add_row(RowSense::kLessEqual, -fixed(k, r));
    s_entries.emplace_back(ratio_row[e], -p.initial(k, r));
  }
  for (int i = 0; i < M.lp.num_rows(); ++i) tie.set_row(i, M.lp.sense(i), fixed_rhs[i]);
  std::vector<int> tie_entry;
  for (int j : free_columns) {
    auto entries = M.lp.column(j);
    entries.emplace_back(ratio_row[M.column_entry[j]], 1.0);
    tie.add_column(0.0, M.lp.upper(j), std::move(entries));
    tie_entry.push_back(M.column_entry[j]);
  }
  tie.add_column(1.0, kInf, s_entries);

  const LpResult second = solve_lp(tie, opts.lp);
  if (second.status != LpStatus::kOptimal) return best;
  const Matrix w_tied =
      fixed + entries_from_columns(L, tie_entry, second.x.head(tie.num_columns() - 1));
  WeightSolveResult tied =
      finish(p, L, w_tied, true, first.iterations + second.iterations, "optimal");
  // The tie-break must not give up optimality beyond round-off.
  if (tied.objective <= best.objective + 1e-9 * std::max(1.0, std::abs(best.objective))) {
    return tied;
  }
  return best;
}

WeightSolveResult solve_epigraph(const LearningProblem& p, const Layout& L,
                                 const WeightSolveOptions& opts) {
  LinearProgram lp;
  const ConstraintRows rows = add_constraint_rows(lp, p, L);
  std::vector<int> w_col(L.free.size(), -1);
  for (std::size_t e = 0; e < L.free.size(); ++e) {
    if (L.free[e]) w_col[e] = lp.add_column(0.0, kInf, rows.entry_rows[e]);
  }
  // Terms with c = 0 or on fixed entries are the constant m.
  for (std::size_t e = 0; e < L.free.size(); ++e) {
    if (!L.free[e]) continue;
    const int k = static_cast<int>(e) / L.cols, r = static_cast<int>(e) % L.cols;
    for (const auto& s : p.samples) {
      const double c = s.coefficients(k, r);
      if (c == 0.0) continue;
      // c w - t <= -m
      const int row = lp.add_row(RowSense::kLessEqual, -p.margin);
      lp.add_entry(w_col[e], row, c);
      lp.add_column(1.0, kInf, {{row, -1.0}});
    }
  }
  const LpResult res = solve_lp(lp, opts.lp);
  if (res.status != LpStatus::kOptimal) {
    return finish(p, L, feasible_start(p, L), false, res.iterations,
                  "epigraph: " + lp_status_name(res.status));
  }
  Matrix w = Matrix::Zero(L.rows, L.cols);
  for (std::size_t e = 0; e < L.free.size(); ++e) {
    if (L.free[e]) w(static_cast<int>(e) / L.cols, static_cast<int>(e) % L.cols) = res.x[w_col[e]];
  }
  return finish(p, L, w, true, res.iterations, "optimal");
}

/// Euclidean projection onto {z >= 0, a'z = total}.
Vector project_weighted_simplex(const Vector& y, const Vector& a, double total) {
  const Eigen::Index n = y.size();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index i, Eigen::Index j) { return y[i] / a[i] > y[j] / a[j]; });
  // Largest prefix p of the sorted ratios whose last member stays positive.
  double ay = 0.0, aa = 0.0, lambda = 0.0;
  for (Eigen::Index p = 0; p < n; ++p) {
    const Eigen::Index i = order[p];
    ay += a[i] * y[i];
    aa += a[i] * a[i];
    const double candidate = (ay - total) / aa;
    if (y[i] - candidate * a[i] > 0.0) lambda = candidate;
  }
  return (y - lambda * a).cwiseMax(0.0);
}

WeightSolveResult solve_subgradient(const LearningProblem& p, const Layout& L,
                                    const WeightSolveOptions& opts) {
  // w_{k,r} = sum_{i >= k} z_{i,r} over free entries makes monotonicity
  // implicit; normalization becomes sum (i+1) z_{i,r} = total per group.
  std::vector<int> free_entries;
  for (std::size_t e = 0; e < L.free.size(); ++e) {
    if (L.free[e]) free_entries.push_back(static_cast<int>(e));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(free_entries.size());
  Vector a(n);
  for (Eigen::Index i = 0; i < n; ++i) a[i] = free_entries[i] / L.cols + 1.0;

  auto to_w = [&](const Vector& z) {
    Matrix w = Matrix::Zero(L.rows, L.cols);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int k = free_entries[i] / L.cols, r = free_entries[i] % L.cols;
      for (int kk = 0; kk <= k; ++kk) w(kk, r) += z[i];
    }
    return w;
  };
  auto project = [&](const Vector& y) {
    Vector z(n);
    for (int g = 0; g < L.num_groups; ++g) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (L.group[free_entries[i]] == g) idx.push_back(i);
      }
      Vector ys(idx.size()), as(idx.size());
      for (std::size_t q = 0; q < idx.size(); ++q) {
        ys[q] = y[idx[q]];
        as[q] = a[idx[q]];
      }
      const Vector zs = project_weighted_simplex(ys, as, p.normalization_total());
      for (std::size_t q = 0; q < idx.size(); ++q) z[idx[q]] = zs[q];
    }
    return z;
  };

  const Matrix w0 = feasible_start(p, L);
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int k = free_entries[i] / L.cols, r = free_entries[i] % L.cols;
    const double next = k + 1 < L.rows ? w0(k + 1, r) : 0.0;
    z[i] = w0(k, r) - next;
  }

  Vector best_z = z;
  double f = hinge_objective(p, to_w(z));
  double f_best = f;
  // Polyak steps toward a target level f_best - delta. delta grows after a
  // step reaches the level and halves once the path travelled without
  // reaching it exceeds the size of the feasible set.
  double delta = std::max(0.5 * f, 1e-9);
  const double delta_min = 1e-12;
  const double path_budget = p.normalization_total();
  double path = 0.0;
  int it = 0;
  for (; it < opts.subgradient_iterations; ++it) {
    const Matrix w = to_w(z);
    Matrix gw = Matrix::Zero(L.rows, L.cols);
    for (const auto& s : p.samples) {
      for (int k = 0; k < L.rows; ++k) {
        for (int r = 0; r < L.cols; ++r) {
          const double c = s.coefficients(k, r);
          if (p.margin + c * w(k, r) > 0.0) gw(k, r) += c;
        }
      }
    }
    Vector g(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int k = free_entries[i] / L.cols, r = free_entries[i] % L.cols;
      g[i] = gw.col(r).head(k + 1).sum();
    }
    const double gg = g.squaredNorm();
    if (gg == 0.0) break;
    const double level = f_best - delta;
    const Vector next = project(z - (f - level) / gg * g);
    path += (next - z).norm();
    z = next;
    f = hinge_objective(p, to_w(z));
    if (f <= level) {
      delta *= 1.5;
      path = 0.0;
    } else if (path > path_budget) {
      delta = std::max(0.5 * delta, delta_min);
      path = 0.0;
    }
    if (f < f_best) {
      f_best = f;
      best_z = z;
    }
  }
  return finish(p, L, to_w(best_z), true, it, "subgradient");
}

}  // namespace

void LearningProblem::validate() const {
  if (!(margin > 0.0) || !std::isfinite(margin)) throw InputError("margin must be positive");
  if (horizon < 0) throw InputError("horizon must be nonnegative");
  if (components < 1) throw InputError("at least one component is required");
  if (samples.empty()) throw InputError("the dataset is empty");
  if (initial.rows() != horizon + 1 || initial.cols() != components) {
    throw InputError("initial weights have the wrong shape");
  }
  if (!initial.allFinite() || (initial.array() < 0.0).any()) {
    throw InputError("initial weights must be finite and nonnegative");
  }
  if (!(initial.sum() > 0.0)) throw InputError("initial weights are all zero");
  for (int r = 0; r < components; ++r) {
    for (int k = 0; k < horizon; ++k) {
      if (initial(k + 1, r) > initial(k, r)) {
        throw InputError("initial weights must be nonincreasing over stages");
      }
    }
  }
  for (const auto& s : samples) {
    if (s.coefficients.rows() != horizon + 1 || s.coefficients.cols() != components) {
      throw InputError("sample coefficients have the wrong shape");
    }
    if (!s.coefficients.allFinite()) throw InputError("sample coefficients are not finite");
  }
}

double hinge_objective(const LearningProblem& problem, const Matrix& w) {
  double total = 0.0;
  for (const auto& s : problem.samples) {
    total += (problem.margin + s.coefficients.array() * w.array()).cwiseMax(0.0).sum();
  }
  return total;
}

double constraint_residual(const LearningProblem& problem, const Matrix& w) {
  const Layout L = make_layout(problem);
  double worst = std::max(0.0, -w.minCoeff());
  std::vector<double> sums(L.num_groups, 0.0);
  for (int k = 0; k < L.rows; ++k) {
    for (int r = 0; r < L.cols; ++r) {
      const int e = L.index(k, r);
      if (!L.free[e]) {
        worst = std::max(worst, std::abs(w(k, r)));
        continue;
      }
      sums[L.group[e]] += w(k, r);
      if (k > 0) worst = std::max(worst, w(k, r) - w(k - 1, r));
    }
  }
  for (double s : sums) worst = std::max(worst, std::abs(s - problem.normalization_total()));
  return worst;
}

std::string weight_solver_name(WeightSolver s) {
  switch (s) {
    case WeightSolver::kSimplex: return "simplex";
    case WeightSolver::kEpigraph: return "epigraph";
    case WeightSolver::kSubgradient: return "subgradient";
  }
  return "simplex";
}

WeightSolver parse_weight_solver(const std::string& name) {
  if (name == "simplex") return WeightSolver::kSimplex;
  if (name == "epigraph") return WeightSolver::kEpigraph;
  if (name == "subgradient") return WeightSolver::kSubgradient;
  throw InputError("unknown weight solver '" + name + "'");
}

WeightSolveResult solve_weight_lp(const LearningProblem& problem,
                                  const WeightSolveOptions& opts) {
  problem.validate();
  const Layout L = make_layout(problem);
  switch (opts.method) {
    case WeightSolver::kSimplex: return solve_segment(problem, L, opts);
    case WeightSolver::kEpigraph: return solve_epigraph(problem, L, opts);
    case WeightSolver::kSubgradient: return solve_subgradient(problem, L, opts);
  }
  throw InputError("unknown weight solver");
}

namespace {

bool stage_in_range(int k, int first, int last, int horizon) {
  const int end = last < 0 ? horizon : std::min(last, horizon);
  return k >= first && k <= end;
}

void check_stage_range(const char* what, int first, int last) {
  if (first < 1) throw InputError(std::string(what) + " must start at stage 1 or later");
  if (last >= 0 && last < first) throw InputError(std::string(what) + " stage range is empty");
}

}  // namespace

bool SpeedBand::covers(int k, int horizon) const {
  return stage_in_range(k, first_stage, last_stage, horizon);
}

bool PathBand::covers(int k, int horizon) const {
  return stage_in_range(k, first_stage, last_stage, horizon);
}

void RequirementSpec::validate() const {
  if (speed) {
    if (!(speed->tolerance > 0.0) || !std::isfinite(speed->target)) {
      throw InputError("speed band needs a finite target and a positive tolerance");
    }
    check_stage_range("speed band", speed->first_stage, speed->last_stage);
  }
  if (path) {
    if (!(path->tolerance > 0.0)) throw InputError("path tolerance must be positive");
    check_stage_range("path band", path->first_stage, path->last_stage);
  }
  if (headway_tolerance && !(*headway_tolerance > 0.0)) {
    throw InputError("headway tolerance must be positive");
  }
}

RequirementStatus evaluate_requirements(const Plan& plan, const CostContext& ctx,
                                        const RequirementSpec& req) {
  req.validate();
  if (!ctx.path) throw InputError("requirements need a reference path");
  RequirementStatus st;
  const int N = plan.horizon();
  for (int k = 1; k <= N; ++k) {
    const Vector& x = plan.states[k];
    if (req.speed) {
      if (req.speed->covers(k, N)) {
        const double err = std::abs(x[unicycle::kV] - req.speed->target);
        st.speed_error = std::max(st.speed_error, err);
        if (err > req.speed->tolerance) ++st.violations;
      }
    }
    if (req.path && req.path->covers(k, N)) {
      const double d = ctx.path->project(Point2(x[unicycle::kX], x[unicycle::kY])).distance;
      st.path_error = std::max(st.path_error, d);
      if (d > req.path->tolerance) ++st.violations;
    }
  }
  return st;
}

std::vector<double> headway_errors(const MpcTrace& trace, const CostContext& ctx) {
  if (!ctx.path) throw InputError("headway needs a reference path");
  if (trace.lead_arc.size() != trace.closed_loop_states.size()) {
    throw InputError("trace has no lead-agent track");
  }
  std::vector<double> out;
  for (std::size_t t = 0; t < trace.closed_loop_states.size(); ++t) {
    const Vector& x = trace.closed_loop_states[t];
    const double arc = ctx.path->project(Point2(x[unicycle::kX], x[unicycle::kY])).arc_length;
    out.push_back(trace.lead_arc[t] - arc - ctx.t_h * x[unicycle::kV]);
  }
  return out;
}

RequirementStatus evaluate_requirements(const MpcTrace& trace, const CostContext& ctx,
                                        const RequirementSpec& req) {
  req.validate();
  RequirementStatus st;
  if (!req.headway_tolerance) return st;
  const auto errors = headway_errors(trace, ctx);
  for (std::size_t t = 1; t < errors.size(); ++t) {
    st.headway_error = std::max(st.headway_error, std::abs(errors[t]));
    if (std::abs(errors[t]) > *req.headway_tolerance) ++st.violations;
  }
  return st;
}

std::vector<DirectionalCorrection> generate_corrections(const Plan& plan,
                                                        const CostContext& ctx,
                                                        const RequirementSpec& req) {
  req.validate();
  if (!ctx.path) throw InputError("requirements need a reference path");
  const int N = plan.horizon();
  std::vector<Annotation> speed, path;
  for (int k = 1; k <= N; ++k) {
    const Vector& x = plan.states[k];
    if (req.speed) {
      const double err = x[unicycle::kV] - req.speed->target;
      if (req.speed->covers(k, N) && std::abs(err) > req.speed->tolerance) {
        speed.push_back({k, PlanDimension::kV, err < 0.0 ? 1.0 : -1.0});
      }
    }
    if (req.path && req.path->covers(k, N)) {
      const Point2 p(x[unicycle::kX], x[unicycle::kY]);
      const PathProjection proj = ctx.path->project(p);
      if (proj.distance > req.path->tolerance) {
        const Point2 dir = (proj.point - p) / proj.distance;
        if (dir.x() != 0.0) path.push_back({k, PlanDimension::kX, dir.x()});
        if (dir.y() != 0.0) path.push_back({k, PlanDimension::kY, dir.y()});
      }
    }
  }
  std::vector<DirectionalCorrection> out;
  if (!speed.empty()) out.push_back(DirectionalCorrection::from_annotations(N, speed));
  if (!path.empty()) out.push_back(DirectionalCorrection::from_annotations(N, path));
  return out;
}

std::vector<DirectionalCorrection> generate_corrections(const MpcTrace& trace,
                                                        const CostContext& ctx,
                                                        const RequirementSpec& req) {
  req.validate();
  if (!req.headway_tolerance) return {};
  const auto errors = headway_errors(trace, ctx);
  const int T = trace.duration();
  std::vector<Annotation> ann;
  for (int t = 1; t <= T; ++t) {
    if (std::abs(errors[t]) <= *req.headway_tolerance) continue;
    const Vector& x = trace.closed_loop_states[t];
    const PathProjection proj = ctx.path->project(Point2(x[unicycle::kX], x[unicycle::kY]));
    Point2 tangent = ctx.path->tangent(proj.segment);
    if (errors[t] < 0.0) tangent = -tangent;
    if (tangent.x() != 0.0) ann.push_back({t, PlanDimension::kX, tangent.x()});
    if (tangent.y() != 0.0) ann.push_back({t, PlanDimension::kY, tangent.y()});
  }
  if (ann.empty()) return {};
  return {DirectionalCorrection::from_annotations(T, ann)};
}

void LearnerConfig::validate() const {
  if (max_iterations < 1) throw InputError("max_iterations must be at least 1");
  if (!(margin > 0.0)) throw InputError("margin must be positive");
  if (initial_weights.matrix().size() == 0) throw InputError("initial weights are missing");
}

WeightSchedule uniform_initial_weights(int horizon, const std::vector<int>& components) {
  if (components.empty()) throw InputError("no components to initialize");
  Matrix w = Matrix::Zero(horizon + 1, kNumComponents);
  for (int r : components) {
    if (r < 0 || r >= kNumComponents) throw InputError("component index out of range");
    w.col(r).setConstant(1.0 / static_cast<double>(components.size()));
  }
  return WeightSchedule(w);
}

namespace {

std::vector<int> active_components(const WeightSchedule& w) {
  std::vector<int> out;
  for (int r = 0; r < w.num_components(); ++r) {
    if (!w.matrix().col(r).isZero(0.0)) out.push_back(r);
  }
  return out;
}

LearningProblem initial_problem(const LearnerConfig& cfg) {
  LearningProblem p;
  p.margin = cfg.margin;
  p.horizon = cfg.initial_weights.horizon();
  p.components = cfg.initial_weights.num_components();
  p.initial = cfg.initial_weights.matrix();
  p.per_component_normalization = cfg.per_component_normalization;
  return p;
}

/// Shared outer loop; `step` computes the trajectory for the current weights,
/// fills the iteration record and returns the new samples.
template <typename Step>
LearningResult outer_loop(const LearnerConfig& cfg, Step step) {
  cfg.validate();
  LearningProblem problem = initial_problem(cfg);
  LearningResult result;
  result.weights = cfg.initial_weights;
  for (int it = 0;; ++it) {
    LearningIteration rec;
    rec.iteration = it;
    rec.weights = result.weights.matrix();
    std::vector<CorrectionSample> fresh;
    try {
      fresh = step(result.weights, it, rec);
    } catch (const Error& e) {
      result.message = "iteration " + std::to_string(it) + ": " + e.what();
      result.history.push_back(rec);
      return result;
    }
    rec.corrections = static_cast<int>(fresh.size());
    for (auto& s : fresh) problem.samples.push_back(std::move(s));
    rec.dataset_size = static_cast<int>(problem.samples.size());
    if (fresh.empty()) {
      result.history.push_back(rec);
      result.converged = true;
      result.message = "no corrections";
      break;
    }
    if (it >= cfg.max_iterations) {
      result.history.push_back(rec);
      result.message = "iteration limit reached";
      break;
    }
    const WeightSolveResult lp = solve_weight_lp(problem, cfg.solver);
    rec.lp_objective = lp.objective;
    result.history.push_back(rec);
    if (!lp.optimal) {
      result.message = "weight update failed: " + lp.message;
      break;
    }
    result.weights = WeightSchedule(lp.weights);
  }
  result.dataset = std::move(problem.samples);
  return result;
}

}  // namespace

LearningResult run_algorithm1_open_loop(const SystemModel& model, const Vector& x_init,
                                        const CostContext& ctx, const RequirementSpec& req,
                                        const SolverConfig& solver, const LearnerConfig& cfg) {
  req.validate();
  const PlannerCostModel costs(ctx);
  const std::vector<int> active = active_components(cfg.initial_weights);
  return outer_loop(cfg, [&](const WeightSchedule& w, int it, LearningIteration& rec) {
    const SolveResult res = solve(model, x_init, costs, w, solver);
    rec.trajectory_converged = res.converged;
    rec.status = evaluate_requirements(res.plan, ctx, req);
    std::vector<CorrectionSample> out;
    const auto corrections = generate_corrections(res.plan, ctx, req);
    if (corrections.empty()) return out;
    const SensitivityMatrix F = build_F(model, res.plan);
    for (std::size_t i = 0; i < corrections.size(); ++i) {
      out.push_back({"iteration-" + std::to_string(it) + "/" + std::to_string(i),
                     corrections[i],
                     open_loop_coefficients(F, res.plan, costs, corrections[i], active)});
    }
    return out;
  });
}

LearningResult run_algorithm1_closed_loop(const SystemModel& model, const Vector& x_init,
                                          const CostContext& ctx, const LeadAgentSpec& lead,
                                          const MpcConfig& mpc, const RequirementSpec& req,
                                          const LearnerConfig& cfg) {
  req.validate();
  const std::vector<int> active = active_components(cfg.initial_weights);
  return outer_loop(cfg, [&](const WeightSchedule& w, int it, LearningIteration& rec) {
    const MpcTrace trace = run_mpc(model, x_init, ctx, w, lead, mpc);
    if (!trace.complete) throw NumericalError("closed loop failed: " + trace.failure);
    rec.trajectory_converged = std::all_of(trace.cycles.begin(), trace.cycles.end(),
                                           [](const CycleRecord& c) { return c.converged; });
    rec.status = evaluate_requirements(trace, ctx, req);
    std::vector<CorrectionSample> out;
    for (const auto& a : generate_corrections(trace, ctx, req)) {
      out.push_back({"iteration-" + std::to_string(it), a,
                     closed_loop_coefficients(model, trace, a, active)});
    }
    return out;
  });
}

}  // namespace ocplens
