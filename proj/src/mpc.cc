#include "edgempc/mpc.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace edgempc {

std::string_view ToString(StepRule rule) {
  return rule == StepRule::kFixed ? "fixed" : "barzilai-borwein";
}

StepRule StepRuleFromString(std::string_view name) {
  if (name == "fixed") return StepRule::kFixed;
  if (name == "barzilai-borwein") return StepRule::kBarzilaiBorwein;
  throw std::invalid_argument("unknown step rule '" + std::string(name) +
                              "' (expected fixed or barzilai-borwein)");
}

StateWeight MpcConfig::DefaultStateWeight() {
  StateWeight q = StateWeight::Zero();
  q.diagonal() << 8, 8, 8, 1, 1, 1, 1, 1;
  return q;
}

void MpcConfig::Validate(double gravity) const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("mpc." + what);
  };
  require(horizon >= 1, "horizon must be >= 1");
  require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
  require(state_weight.allFinite() && state_weight.isApprox(state_weight.transpose()) &&
              (state_weight.diagonal().array() >= 0.0).all(),
          "state_weight must be symmetric with nonnegative diagonal");
  require(input_weight.allFinite() && input_weight.isApprox(input_weight.transpose()) &&
              (input_weight.diagonal().array() >= 0.0).all(),
          "input_weight must be symmetric with nonnegative diagonal");
  require(rate_weight.allFinite() && rate_weight.isApprox(rate_weight.transpose()) &&
              (rate_weight.diagonal().array() >= 0.0).all(),
          "rate_weight must be symmetric with nonnegative diagonal");
  require(steady_input.IsFinite(), "steady_input must be finite");
  require(std::isfinite(bounds.thrust_max) && bounds.thrust_max > gravity,
          "bounds.thrust_max must exceed gravity");
  require(bounds.roll_max > 0.0 && bounds.roll_max < std::numbers::pi / 2,
          "bounds.roll_max must be in (0, pi/2)");
  require(bounds.pitch_max > 0.0 && bounds.pitch_max < std::numbers::pi / 2,
          "bounds.pitch_max must be in (0, pi/2)");
  require(solver.max_iterations >= 0, "solver.max_iterations must be >= 0");
  require(solver.tolerance >= 0.0, "solver.tolerance must be >= 0");
  require(solver.initial_step > 0.0, "solver.initial_step must be > 0");
  require(solver.backtrack_factor > 0.0 && solver.backtrack_factor < 1.0,
          "solver.backtrack_factor must be in (0, 1)");
  require(solver.armijo_slope > 0.0 && solver.armijo_slope < 1.0,
          "solver.armijo_slope must be in (0, 1)");
  require(solver.max_backtracks >= 1, "solver.max_backtracks must be >= 1");
}

ControlInput ProjectInput(const ControlInput& u, const InputBounds& bounds) {
  return {std::clamp(u.thrust, 0.0, bounds.thrust_max),
          std::clamp(u.roll_ref, -bounds.roll_max, bounds.roll_max),
          std::clamp(u.pitch_ref, -bounds.pitch_max, bounds.pitch_max)};
}

bool WithinBounds(const ControlInput& u, const InputBounds& bounds) {
  return u.thrust >= 0.0 && u.thrust <= bounds.thrust_max &&
         std::abs(u.roll_ref) <= bounds.roll_max &&
         std::abs(u.pitch_ref) <= bounds.pitch_max;
}

InputSequence ShiftInputs(const InputSequence& inputs, int steps) {
  if (inputs.empty() || steps <= 0) return inputs;
  const std::size_t n = inputs.size();
  const std::size_t shift = std::min<std::size_t>(steps, n - 1);
  InputSequence out(inputs.begin() + shift, inputs.end());
  out.resize(n, inputs.back());
  return out;
}

namespace {

using Inputs = std::vector<InputVector>;

// Per-solve problem data plus rollout scratch space.
class HorizonProblem {
 public:
  HorizonProblem(const UavState& x0,
                 const std::vector<ReferencePoint>& reference,
                 const ControlInput& previous_input, const MpcConfig& cfg,
                 const ModelParams& params)
      : cfg_(cfg),
        params_(params),
        x0_(x0.ToVector()),
        u_prev_(previous_input.ToVector()),
        u_steady_(cfg.steady_input.ToVector()),
        qx_sym_(cfg.state_weight + cfg.state_weight.transpose()),
        qu_sym_(cfg.input_weight + cfg.input_weight.transpose()),
        qdu_sym_(cfg.rate_weight + cfg.rate_weight.transpose()) {
    targets_.reserve(reference.size());
    for (const auto& r : reference) targets_.push_back(r.state.ToVector());
    states_.resize(cfg.horizon + 1);
  }

  int horizon() const { return cfg_.horizon; }

  // Rolls out `u` into `states` and returns the cost.
  double Evaluate(const Inputs& u, std::vector<StateVector>* states) const {
    const int n = cfg_.horizon;
    (*states)[0] = x0_;
    double cost = 0.0;
    for (int j = 0; j < n; ++j) {
      (*states)[j + 1] =
          detail::EulerUnclamped((*states)[j], u[j], params_, cfg_.dt);
      const StateVector e = targets_[j] - (*states)[j + 1];
      const InputVector du = u_steady_ - u[j];
      const InputVector dr = u[j] - (j == 0 ? u_prev_ : u[j - 1]);
      cost += e.dot(cfg_.state_weight * e) + du.dot(cfg_.input_weight * du) +
              dr.dot(cfg_.rate_weight * dr);
    }
    return cost;
  }

  double Evaluate(const Inputs& u) { return Evaluate(u, &states_); }

  // Gradient at the inputs most recently passed to Evaluate(u).
  void Gradient(const Inputs& u, const std::vector<StateVector>& states,
                Inputs* grad) const {
    const int n = cfg_.horizon;
    grad->resize(n);
    Eigen::Matrix<double, 8, 8> fx;
    Eigen::Matrix<double, 8, 3> fu;
    // lambda = dJ/dx_{j} accumulated backwards.
    StateVector lambda = StateVector::Zero();
    for (int j = n; j >= 1; --j) {
      lambda -= qx_sym_ * (targets_[j - 1] - states[j]);
      detail::EulerJacobians(states[j - 1], u[j - 1], params_, cfg_.dt, &fx,
                             &fu);
      (*grad)[j - 1] = fu.transpose() * lambda;
      lambda = fx.transpose() * lambda;
    }
    for (int i = 0; i < n; ++i) {
      InputVector g = -(qu_sym_ * (u_steady_ - u[i]));
      g += qdu_sym_ * (u[i] - (i == 0 ? u_prev_ : u[i - 1]));
      if (i + 1 < n) g -= qdu_sym_ * (u[i + 1] - u[i]);
      (*grad)[i] += g;
    }
  }

  void Gradient(const Inputs& u, Inputs* grad) const {
    Gradient(u, states_, grad);
  }

  const std::vector<StateVector>& states() const { return states_; }
  std::vector<StateVector>& mutable_states() { return states_; }

 private:
  const MpcConfig& cfg_;
  const ModelParams& params_;
  StateVector x0_;
  InputVector u_prev_;
  InputVector u_steady_;
  StateWeight qx_sym_;
  InputWeight qu_sym_;
  InputWeight qdu_sym_;
  std::vector<StateVector> targets_;
  std::vector<StateVector> states_;
};

void CheckLengths(const InputSequence& inputs, const MpcConfig& cfg) {
  if (static_cast<int>(inputs.size()) != cfg.horizon) {
    throw std::invalid_argument("input sequence length " +
                                std::to_string(inputs.size()) +
                                " does not match horizon " +
                                std::to_string(cfg.horizon));
  }
}

void CheckLengths(const InputSequence& inputs,
                  const std::vector<ReferencePoint>& reference,
                  const MpcConfig& cfg) {
  CheckLengths(inputs, cfg);
  if (static_cast<int>(reference.size()) != cfg.horizon) {
    throw std::invalid_argument("reference length " +
                                std::to_string(reference.size()) +
                                " does not match horizon " +
                                std::to_string(cfg.horizon));
  }
}

Inputs ToVectors(const InputSequence& seq) {
  Inputs out;
  out.reserve(seq.size());
  for (const auto& u : seq) out.push_back(u.ToVector());
  return out;
}

InputSequence FromVectors(const Inputs& u) {
  InputSequence out;
  out.reserve(u.size());
  for (const auto& v : u) out.push_back(ControlInput::FromVector(v));
  return out;
}

InputVector Project(const InputVector& u, const InputBounds& b) {
  return {std::clamp(u(0), 0.0, b.thrust_max),
          std::clamp(u(1), -b.roll_max, b.roll_max),
          std::clamp(u(2), -b.pitch_max, b.pitch_max)};
}

}  // namespace

PredictedTrajectory Predict(const UavState& x0, const InputSequence& inputs,
                            const MpcConfig& cfg, const ModelParams& params) {
  CheckLengths(inputs, cfg);
  PredictedTrajectory out;
  out.reserve(inputs.size());
  StateVector x = x0.ToVector();
  for (const auto& u : inputs) {
    x = detail::EulerUnclamped(x, u.ToVector(), params, cfg.dt);
    out.push_back(UavState::FromVector(x));
  }
  return out;
}

double TotalCost(const UavState& x0, const InputSequence& inputs,
                 const std::vector<ReferencePoint>& reference,
                 const ControlInput& previous_input, const MpcConfig& cfg,
                 const ModelParams& params) {
  CheckLengths(inputs, reference, cfg);
  HorizonProblem problem(x0, reference, previous_input, cfg, params);
  return problem.Evaluate(ToVectors(inputs));
}

Eigen::VectorXd CostGradient(const UavState& x0, const InputSequence& inputs,
                             const std::vector<ReferencePoint>& reference,
                             const ControlInput& previous_input,
                             const MpcConfig& cfg, const ModelParams& params) {
  CheckLengths(inputs, reference, cfg);
  HorizonProblem problem(x0, reference, previous_input, cfg, params);
  const Inputs u = ToVectors(inputs);
  problem.Evaluate(u);
  Inputs grad;
  problem.Gradient(u, &grad);
  Eigen::VectorXd out(3 * grad.size());
  for (std::size_t j = 0; j < grad.size(); ++j) out.segment<3>(3 * j) = grad[j];
  return out;
}

MpcSolution Solve(const UavState& x0,
                  const std::vector<ReferencePoint>& reference,
                  const std::optional<InputSequence>& warm_start,
                  const ControlInput& previous_input, const MpcConfig& cfg,
                  const ModelParams& params) {
  const auto start = std::chrono::steady_clock::now();
  const int n = cfg.horizon;
  if (static_cast<int>(reference.size()) != n) {
    throw std::invalid_argument("reference length does not match horizon");
  }
  if (warm_start) CheckLengths(*warm_start, cfg);

  const auto& bounds = cfg.bounds;
  const auto& settings = cfg.solver;
  Inputs u = warm_start ? ToVectors(*warm_start)
                        : Inputs(n, cfg.steady_input.ToVector());
  for (auto& v : u) v = Project(v, bounds);

  HorizonProblem problem(x0, reference, previous_input, cfg, params);
  double cost = problem.Evaluate(u);
  if (!std::isfinite(cost)) {
    throw SolverDivergence("initial cost is not finite", FromVectors(u));
  }

  MpcSolution solution;
  solution.cost_history.push_back(cost);

  Inputs grad, previous_grad, candidate(n);
  std::vector<StateVector> candidate_states(n + 1);
  double next_step = settings.initial_step;
  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    previous_grad.swap(grad);
    problem.Gradient(u, &grad);
    double pg_norm = 0.0;
    for (int j = 0; j < n; ++j) {
      if (!grad[j].allFinite()) {
        throw SolverDivergence("gradient is not finite", FromVectors(u));
      }
      pg_norm = std::max(pg_norm,
                         (u[j] - Project(u[j] - grad[j], bounds)).lpNorm<Eigen::Infinity>());
    }
    if (pg_norm < settings.tolerance) {
      solution.converged = true;
      break;
    }

    if (settings.step_rule == StepRule::kBarzilaiBorwein && iter > 0) {
      // s = u_k - u_{k-1} is held in `candidate` after the swap below.
      double ss = 0.0, sy = 0.0;
      for (int j = 0; j < n; ++j) {
        const InputVector s = u[j] - candidate[j];
        ss += s.squaredNorm();
        sy += s.dot(grad[j] - previous_grad[j]);
      }
      next_step = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10)
                           : settings.initial_step;
    }
    double step = next_step;
    bool accepted = false;
    bool saw_nonfinite = false;
    for (int b = 0; b < settings.max_backtracks; ++b, step *= settings.backtrack_factor) {
      double slope = 0.0;
      for (int j = 0; j < n; ++j) {
        candidate[j] = Project(u[j] - step * grad[j], bounds);
        slope += grad[j].dot(candidate[j] - u[j]);
      }
      const double trial = problem.Evaluate(candidate, &candidate_states);
      if (!std::isfinite(trial)) {
        saw_nonfinite = true;
        continue;
      }
      if (trial <= cost + settings.armijo_slope * slope) {
        accepted = trial <= cost;
        if (accepted) {
          u.swap(candidate);
          problem.mutable_states().swap(candidate_states);
          cost = trial;
          solution.cost_history.push_back(cost);
          ++solution.iterations;
        }
        break;
      }
    }
    if (!accepted) {
      if (saw_nonfinite) {
        throw SolverDivergence("cost became non-finite during line search",
                               FromVectors(u));
      }
      break;
    }
  }

  solution.inputs = FromVectors(u);
  solution.first_input = solution.inputs.front();
  solution.cost = cost;
  solution.solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return solution;
}

}  // namespace edgempc
