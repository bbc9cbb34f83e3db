#ifndef EDGEMPC_TESTS_ORACLES_H_
#define EDGEMPC_TESTS_ORACLES_H_

// Reference implementations used only by tests. None of them call into the
// solver's rollout or gradient code.

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "edgempc/dynamics.h"
#include "edgempc/mpc.h"

namespace edgempc::oracle {

template <typename S>
using Vec8 = Eigen::Matrix<S, 8, 1>;

template <typename S>
Eigen::Matrix<S, 3, 3> RotX(S a) {
  Eigen::Matrix<S, 3, 3> r;
  r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return r;
}

template <typename S>
Eigen::Matrix<S, 3, 3> RotY(S a) {
  Eigen::Matrix<S, 3, 3> r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}

// Full rotation matrix product Rz(0) * Ry(pitch) * Rx(roll) applied to thrust.
template <typename S>
Vec8<S> DerivativeT(const Vec8<S>& x, const Eigen::Matrix<S, 3, 1>& u,
                    const ModelParams& p) {
  using V3 = Eigen::Matrix<S, 3, 1>;
  const V3 v = x.template segment<3>(3);
  const V3 thrust = RotY<S>(x(7)) * RotX<S>(x(6)) * V3(S(0), S(0), u(0));
  const V3 damping = p.damping.template cast<S>();
  Vec8<S> f;
  f.template segment<3>(0) = v;
  f.template segment<3>(3) =
      thrust + V3(S(0), S(0), -S(p.gravity)) - damping.cwiseProduct(v);
  f(6) = (S(p.roll_gain) * u(1) - x(6)) / S(p.roll_time_constant);
  f(7) = (S(p.pitch_gain) * u(2) - x(7)) / S(p.pitch_time_constant);
  return f;
}

inline Eigen::Matrix<double, 8, 1> Derivative(const Eigen::Matrix<double, 8, 1>& x,
                                              const Eigen::Vector3d& u,
                                              const ModelParams& p) {
  return DerivativeT<double>(x, u, p);
}

// Cost written term by term from the objective definition, evaluated in S.
template <typename S>
S NaiveCostT(const UavState& x0, const std::vector<Eigen::Matrix<S, 3, 1>>& inputs,
             const std::vector<ReferencePoint>& reference,
             const ControlInput& previous, const MpcConfig& cfg,
             const ModelParams& p) {
  using V3 = Eigen::Matrix<S, 3, 1>;
  const Eigen::Matrix<S, 8, 8> qx = cfg.state_weight.template cast<S>();
  const Eigen::Matrix<S, 3, 3> qu = cfg.input_weight.template cast<S>();
  const Eigen::Matrix<S, 3, 3> qdu = cfg.rate_weight.template cast<S>();
  Vec8<S> x = x0.ToVector().template cast<S>();
  const V3 ud = cfg.steady_input.ToVector().template cast<S>();
  const S dt(cfg.dt);
  S total(0);
  for (int j = 1; j <= cfg.horizon; ++j) {
    const V3 u = inputs[j - 1];
    const V3 u_before =
        j == 1 ? V3(previous.ToVector().template cast<S>()) : inputs[j - 2];
    x = x + dt * DerivativeT<S>(x, u, p);
    const Vec8<S> ex = reference[j - 1].state.ToVector().template cast<S>() - x;
    const V3 eu = ud - u;
    const V3 edu = u - u_before;
    const S state_term = (ex.transpose() * qx * ex)(0, 0);
    const S input_term = (eu.transpose() * qu * eu)(0, 0);
    const S rate_term = (edu.transpose() * qdu * edu)(0, 0);
    total += state_term + input_term + rate_term;
  }
  return total;
}

inline double NaiveCost(const UavState& x0, const InputSequence& inputs,
                        const std::vector<ReferencePoint>& reference,
                        const ControlInput& previous, const MpcConfig& cfg,
                        const ModelParams& p) {
  std::vector<Eigen::Vector3d> us;
  for (const auto& u : inputs) us.push_back(u.ToVector());
  return NaiveCostT<double>(x0, us, reference, previous, cfg, p);
}

// Central differences of the extended-precision naive cost, so that
// round-off stays far below the comparison tolerance.
inline Eigen::VectorXd NaiveCostGradientFd(const UavState& x0,
                                           const InputSequence& inputs,
                                           const std::vector<ReferencePoint>& reference,
                                           const ControlInput& previous,
                                           const MpcConfig& cfg,
                                           const ModelParams& p, double h) {
  using L = long double;
  using V3 = Eigen::Matrix<L, 3, 1>;
  std::vector<V3> base;
  for (const auto& u : inputs) base.push_back(u.ToVector().cast<L>());
  Eigen::VectorXd g(3 * inputs.size());
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    for (int k = 0; k < 3; ++k) {
      auto plus = base, minus = base;
      plus[j](k) += L(h);
      minus[j](k) -= L(h);
      const L diff = NaiveCostT<L>(x0, plus, reference, previous, cfg, p) -
                     NaiveCostT<L>(x0, minus, reference, previous, cfg, p);
      g(3 * j + k) = static_cast<double>(diff / (L(2) * L(h)));
    }
  }
  return g;
}

// Exhaustive search over a per-component grid of `points` values spanning the
// input box, for a horizon of two steps.
inline double GridSearchMinCost(const UavState& x0,
                                const std::vector<ReferencePoint>& reference,
                                const ControlInput& previous,
                                const MpcConfig& cfg, const ModelParams& p,
                                int points) {
  const auto& b = cfg.bounds;
  auto axis = [points](double lo, double hi) {
    std::vector<double> v(points);
    for (int i = 0; i < points; ++i) v[i] = lo + (hi - lo) * i / (points - 1);
    return v;
  };
  const auto thrusts = axis(0.0, b.thrust_max);
  const auto rolls = axis(-b.roll_max, b.roll_max);
  const auto pitches = axis(-b.pitch_max, b.pitch_max);
  std::vector<ControlInput> grid;
  for (double t : thrusts)
    for (double r : rolls)
      for (double q : pitches) grid.push_back({t, r, q});

  double best = std::numeric_limits<double>::infinity();
  InputSequence seq(2);
  for (const auto& a : grid) {
    seq[0] = a;
    for (const auto& c : grid) {
      seq[1] = c;
      best = std::min(best, NaiveCost(x0, seq, reference, previous, cfg, p));
    }
  }
  return best;
}

// Random instance generator shared by gradient and solver checks.
struct RandomInstance {
  UavState x0;
  InputSequence inputs;
  std::vector<ReferencePoint> reference;
  ControlInput previous;
  MpcConfig cfg;
};

inline RandomInstance MakeRandomInstance(std::mt19937_64& rng, int horizon) {
  std::uniform_real_distribution<double> pos(-2.0, 2.0), vel(-1.0, 1.0),
      ang(-0.3, 0.3), thrust(2.0, 18.0), w(0.1, 10.0);
  RandomInstance inst;
  inst.cfg.horizon = horizon;
  inst.cfg.dt = 0.05;
  inst.cfg.state_weight.setZero();
  for (int i = 0; i < 8; ++i) inst.cfg.state_weight(i, i) = w(rng);
  inst.cfg.input_weight = Eigen::Vector3d(w(rng), w(rng), w(rng)).asDiagonal();
  inst.cfg.rate_weight = Eigen::Vector3d(w(rng), w(rng), w(rng)).asDiagonal();
  inst.x0.position = {pos(rng), pos(rng), pos(rng)};
  inst.x0.velocity = {vel(rng), vel(rng), vel(rng)};
  inst.x0.roll = ang(rng);
  inst.x0.pitch = ang(rng);
  inst.previous = {thrust(rng), ang(rng), ang(rng)};
  for (int j = 0; j < horizon; ++j) {
    inst.inputs.push_back({thrust(rng), ang(rng), ang(rng)});
    ReferencePoint r;
    r.state.position = {pos(rng), pos(rng), pos(rng)};
    r.state.velocity = {vel(rng), vel(rng), vel(rng)};
    inst.reference.push_back(r);
  }
  return inst;
}

// Max over components of |a - b| / max(|b|, floor).
inline double MaxRelativeError(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                               double floor = 1e-8) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a(i) - b(i)) / std::max(std::abs(b(i)), floor));
  }
  return worst;
}

}  // namespace edgempc::oracle

#endif  // EDGEMPC_TESTS_ORACLES_H_
