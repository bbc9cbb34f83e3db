#ifndef EDGEMPC_MPC_H_
#define EDGEMPC_MPC_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "edgempc/dynamics.h"

namespace edgempc {

using StateWeight = Eigen::Matrix<double, 8, 8>;
using InputWeight = Eigen::Matrix3d;

struct InputBounds {
  double thrust_max = 20.0;
  double roll_max = 0.4;
  double pitch_max = 0.4;

  friend bool operator==(const InputBounds&, const InputBounds&) = default;
};

enum class StepRule {
  // Every line search starts from initial_step.
  kFixed,
  // Line searches after the first start from the Barzilai-Borwein step
  // s's / s'y of the last accepted move.
  kBarzilaiBorwein,
};

std::string_view ToString(StepRule rule);
StepRule StepRuleFromString(std::string_view name);

// Projected gradient with Armijo backtracking.
struct SolverSettings {
  StepRule step_rule = StepRule::kBarzilaiBorwein;
  int max_iterations = 60;
  // Projected-gradient infinity norm.
  double tolerance = 1e-4;
  double initial_step = 1.0;
  double backtrack_factor = 0.5;
  double armijo_slope = 1e-4;
  int max_backtracks = 40;

  friend bool operator==(const SolverSettings&,
                         const SolverSettings&) = default;
};

struct MpcConfig {
  int horizon = 100;
  double dt = 0.01;
  StateWeight state_weight = DefaultStateWeight();
  InputWeight input_weight = InputWeight(Eigen::Vector3d(1, 5, 5).asDiagonal());
  InputWeight rate_weight = InputWeight(Eigen::Vector3d(2, 10, 10).asDiagonal());
  ControlInput steady_input{9.81, 0.0, 0.0};
  InputBounds bounds;
  SolverSettings solver;

  static StateWeight DefaultStateWeight();

  // Throws std::invalid_argument naming the offending field.
  void Validate(double gravity) const;

  friend bool operator==(const MpcConfig&, const MpcConfig&) = default;
};

using InputSequence = std::vector<ControlInput>;
using PredictedTrajectory = std::vector<UavState>;

// Desired full state; attitude is normally zero.
struct ReferencePoint {
  UavState state;
  friend bool operator==(const ReferencePoint&,
                         const ReferencePoint&) = default;
};

struct MpcSolution {
  InputSequence inputs;
  ControlInput first_input;
  double cost = 0.0;
  int iterations = 0;
  double solve_time = 0.0;  // seconds, wall clock
  bool converged = false;
  // Cost of the initial point followed by every accepted iterate.
  std::vector<double> cost_history;
};

// Thrown when the cost becomes non-finite; carries the last finite iterate.
class SolverDivergence : public std::runtime_error {
 public:
  SolverDivergence(const std::string& what, InputSequence last_finite)
      : std::runtime_error(what), last_finite_(std::move(last_finite)) {}
  const InputSequence& last_finite() const { return last_finite_; }

 private:
  InputSequence last_finite_;
};

// Forward-Euler rollout x_{k+1..k+N}; no attitude clamping.
PredictedTrajectory Predict(const UavState& x0, const InputSequence& inputs,
                            const MpcConfig& cfg, const ModelParams& params);

// Sum over the horizon of tracking, steady-input and input-rate penalties.
// Row j (1-based) pairs state x_{k+j} with input j-1 and the rate
// u_{j-1} - u_{j-2}, where u_{-1} is `previous_input`.
double TotalCost(const UavState& x0, const InputSequence& inputs,
                 const std::vector<ReferencePoint>& reference,
                 const ControlInput& previous_input, const MpcConfig& cfg,
                 const ModelParams& params);

// Exact gradient of TotalCost via the discrete adjoint of the rollout.
// Layout: 3 * j + {thrust, roll_ref, pitch_ref}.
Eigen::VectorXd CostGradient(const UavState& x0, const InputSequence& inputs,
                             const std::vector<ReferencePoint>& reference,
                             const ControlInput& previous_input,
                             const MpcConfig& cfg, const ModelParams& params);

ControlInput ProjectInput(const ControlInput& u, const InputBounds& bounds);
bool WithinBounds(const ControlInput& u, const InputBounds& bounds);

MpcSolution Solve(const UavState& x0,
                  const std::vector<ReferencePoint>& reference,
                  const std::optional<InputSequence>& warm_start,
                  const ControlInput& previous_input, const MpcConfig& cfg,
                  const ModelParams& params);

// Receding-horizon shift: drop `steps` leading inputs, repeat the last.
InputSequence ShiftInputs(const InputSequence& inputs, int steps = 1);

}  // namespace edgempc

#endif  // EDGEMPC_MPC_H_
