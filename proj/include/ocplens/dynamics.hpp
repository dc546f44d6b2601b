#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace ocplens {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Discrete-time system x_{k+1} = f(x_k, u_k) with analytic Jacobians.
class SystemModel {
 public:
  virtual ~SystemModel() = default;

  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual double dt() const = 0;

  virtual Vector transition(const Vector& x, const Vector& u) const = 0;

  /// A = df/dx, B = df/du evaluated at (x, u).
  virtual void jacobians(const Vector& x, const Vector& u, Matrix& A,
                         Matrix& B) const = 0;
  /// Adds sum_i lambda_i d2f_i/dx2 to H. f is assumed linear in u with no
  /// state-input cross terms; linear models add nothing.
  virtual void add_state_curvature(const Vector& /*x*/, const Vector& /*u*/,
                                   const Vector& /*lambda*/, Matrix& /*H*/) const {}
};

namespace unicycle {

inline constexpr int kStateDim = 7;
inline constexpr int kInputDim = 2;

enum StateIndex : int {
  kX = 0,
  kY = 1,
  kTheta = 2,
  kV = 3,
  kOmega = 4,
  kAccel = 5,
  kAngAccel = 6,
};

enum InputIndex : int {
  kJerk = 0,
  kAngJerk = 1,
};

}  // namespace unicycle

/// Named view of the unicycle state (X, Y, theta, v, omega, a, alpha).
struct RobotState {
  double X = 0.0;
  double Y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double omega = 0.0;
  double a = 0.0;
  double alpha = 0.0;

  Vector to_vector() const;
  static RobotState from_vector(const Vector& x);
};

/// Named view of the unicycle input (linear jerk j, angular jerk eta).
struct ControlInput {
  double j = 0.0;
  double eta = 0.0;

  Vector to_vector() const;
  static ControlInput from_vector(const Vector& u);
};

/// Forward-Euler unicycle with jerk inputs:
/// x' = x + (v cos(theta), v sin(theta), omega, a, alpha, j, eta) * dt.
/// Yaw is not wrapped.
class UnicycleModel final : public SystemModel {
 public:
  explicit UnicycleModel(double dt);

  int state_dim() const override { return unicycle::kStateDim; }
  int input_dim() const override { return unicycle::kInputDim; }
  double dt() const override { return dt_; }

  Vector transition(const Vector& x, const Vector& u) const override;
  void jacobians(const Vector& x, const Vector& u, Matrix& A,
                 Matrix& B) const override;
  void add_state_curvature(const Vector& x, const Vector& u,
                           const Vector& lambda, Matrix& H) const override;

 private:
  double dt_;
};

/// Time-invariant linear system x' = A x + B u. Used for integrator test beds.
class LinearModel final : public SystemModel {
 public:
  LinearModel(Matrix A, Matrix B, double dt);

  /// x' = x + u dt (scalar).
  static LinearModel single_integrator(double dt);
  /// (p, v)' = (p + v dt, v + u dt).
  static LinearModel double_integrator(double dt);

  int state_dim() const override { return static_cast<int>(A_.rows()); }
  int input_dim() const override { return static_cast<int>(B_.cols()); }
  double dt() const override { return dt_; }

  Vector transition(const Vector& x, const Vector& u) const override;
  void jacobians(const Vector& x, const Vector& u, Matrix& A,
                 Matrix& B) const override;

 private:
  Matrix A_;
  Matrix B_;
  double dt_;
};

/// A dynamically feasible state/input trajectory (x_{0:N}, u_{0:N-1}).
struct Plan {
  std::vector<Vector> states;
  std::vector<Vector> inputs;

  int horizon() const { return static_cast<int>(inputs.size()); }

  /// (x_0; ...; x_N) as one vector of length (N+1) n_x.
  Vector stacked_states() const;
  /// (u_0; ...; u_{N-1}) as one vector of length N n_u.
  Vector stacked_inputs() const;
  /// (stacked_states; stacked_inputs), the plan vector zeta.
  Vector stacked() const;
};

struct Linearization {
  Matrix A;
  Matrix B;
};

/// One application of f. Throws ModelBlowUp on a non-finite result.
Vector step(const SystemModel& model, const Vector& x, const Vector& u);

/// states[0] = x_init, states[k+1] = step(states[k], inputs[k]).
Plan rollout(const SystemModel& model, const Vector& x_init,
             const std::vector<Vector>& inputs);

/// Jacobians (A_k, B_k) for k = 0..N-1 along the plan.
std::vector<Linearization> linearize(const SystemModel& model,
                                     const Plan& plan);

/// max_k || x_{k+1} - f(x_k, u_k) ||_inf
double dynamics_residual(const SystemModel& model, const Plan& plan);

/// Split a stacked input vector (length N n_u) into per-stage inputs.
std::vector<Vector> unstack(const Vector& stacked, int block);

}  // namespace ocplens
