/*
 Copyright 2026 The ringrotor Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "ringrotor/nmpc.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ringrotor/qp.hpp"

namespace ringrotor::nmpc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// --- OcpModel defaults -------------------------------------------------------

VectorXd OcpModel::retract(const VectorXd& x, const VectorXd& d) const {
  return x + d;
}

VectorXd OcpModel::local_error(const VectorXd& x, const VectorXd& ref) const {
  return x - ref;
}

void OcpModel::linearize(const VectorXd& x, const VectorXd& u,
                         const VectorXd& anchor, MatrixXd& A,
                         MatrixXd& B) const {
  const int nt = tangent_size();
  const int nu = input_size();
  const double h = 1e-6;
  A.resize(nt, nt);
  B.resize(nt, nu);
  VectorXd d = VectorXd::Zero(nt);
  for (int i = 0; i < nt; ++i) {
    d(i) = h;
    const VectorXd fp = local_error(step(retract(x, d), u), anchor);
    d(i) = -h;
    const VectorXd fm = local_error(step(retract(x, d), u), anchor);
    d(i) = 0.0;
    A.col(i) = (fp - fm) / (2.0 * h);
  }
  VectorXd du = u;
  for (int j = 0; j < nu; ++j) {
    du(j) = u(j) + h;
    const VectorXd fp = local_error(step(x, du), anchor);
    du(j) = u(j) - h;
    const VectorXd fm = local_error(step(x, du), anchor);
    du(j) = u(j);
    B.col(j) = (fp - fm) / (2.0 * h);
  }
}

// --- generic SQP solver ------------------------------------------------------

namespace {

[[noreturn]] void solver_failure(int iterations, double kkt,
                                 const std::string& why) {
  std::ostringstream os;
  os << "nmpc: solver failure after " << iterations
     << " iterations (last KKT residual " << kkt << "): " << why;
  throw std::runtime_error(os.str());
}

}  // namespace

OcpSolution solve_ocp(const OcpModel& model, const OcpWeights& weights,
                      const VectorXd& x0, const OcpReference& ref,
                      const SqpSettings& settings,
                      const OcpSolution* warm_start) {
  const int N = static_cast<int>(ref.u.size());
  const int nt = model.tangent_size();
  const int nu = model.input_size();
  if (N < 1 || ref.x.size() != static_cast<size_t>(N) + 1) {
    throw std::invalid_argument(
        "nmpc: reference must hold N inputs and N+1 states");
  }
  if (weights.Q.size() != nt || weights.QN.size() != nt ||
      weights.R.size() != nu) {
    throw std::invalid_argument("nmpc: weight dimensions do not match model");
  }
  if (weights.Q.minCoeff() < 0.0 || weights.QN.minCoeff() < 0.0 ||
      weights.R.minCoeff() < 0.0) {
    throw std::invalid_argument("nmpc: weights must be non-negative");
  }
  if (settings.u_lo.size() != nu || settings.u_hi.size() != nu ||
      ((settings.u_hi - settings.u_lo).array() < 0.0).any()) {
    throw std::invalid_argument("nmpc: invalid input bounds");
  }
  if (!x0.allFinite()) {
    throw std::invalid_argument("nmpc: initial state is not finite");
  }

  const auto clamp_input = [&](const VectorXd& u) {
    return u.cwiseMax(settings.u_lo).cwiseMin(settings.u_hi).eval();
  };

  // Initial trajectory: warm start when shapes match, otherwise simulate
  // forward under the (clamped) reference inputs.
  std::vector<VectorXd> u(N), x(N + 1);
  if (warm_start != nullptr &&
      warm_start->u.size() == static_cast<size_t>(N) &&
      warm_start->x.size() == static_cast<size_t>(N) + 1) {
    for (int k = 0; k < N; ++k) u[k] = clamp_input(warm_start->u[k]);
    x = warm_start->x;
    x[0] = x0;
  } else {
    x[0] = x0;
    for (int k = 0; k < N; ++k) {
      u[k] = clamp_input(ref.u[k]);
      x[k + 1] = model.step(x[k], u[k]);
    }
  }

  std::vector<MatrixXd> A(N), B(N);
  std::vector<VectorXd> c(N), s(N);
  std::vector<VectorXd> r(N + 1);

  OcpSolution sol;
  sol.iterations = 0;

  // Stacked weight diagonal over the (N*nt) condensed state corrections and
  // the (N*nu) input corrections.
  VectorXd w_state(N * nt), w_input(N * nu);
  for (int k = 0; k < N; ++k) {
    w_state.segment(k * nt, nt) = (k + 1 == N) ? weights.QN : weights.Q;
    w_input.segment(k * nu, nu) = weights.R;
  }

  while (true) {
    // Evaluate defects, residuals and the band linearization.
    for (int k = 0; k < N; ++k) {
      model.linearize(x[k], u[k], x[k + 1], A[k], B[k]);
      c[k] = model.local_error(model.step(x[k], u[k]), x[k + 1]);
      s[k] = u[k] - ref.u[k];
      if (!A[k].allFinite() || !B[k].allFinite() || !c[k].allFinite()) {
        solver_failure(sol.iterations,
                       sol.kkt_history.empty() ? 0.0 : sol.kkt_history.back(),
                       "non-finite linearization");
      }
    }
    for (int k = 1; k <= N; ++k) r[k] = model.local_error(x[k], ref.x[k]);

    // Condense: dx_{k+1} = A_k dx_k + B_k du_k + c_k with dx_0 = 0 gives
    // dx = M du + d over the stacked corrections.
    MatrixXd M = MatrixXd::Zero(N * nt, N * nu);
    VectorXd d(N * nt);
    M.block(0, 0, nt, nu) = B[0];
    d.segment(0, nt) = c[0];
    for (int k = 1; k < N; ++k) {
      M.block(k * nt, 0, nt, k * nu) =
          A[k] * M.block((k - 1) * nt, 0, nt, k * nu);
      M.block(k * nt, k * nu, nt, nu) = B[k];
      d.segment(k * nt, nt) = A[k] * d.segment((k - 1) * nt, nt) + c[k];
    }

    VectorXd r_stack(N * nt), s_stack(N * nu);
    for (int k = 0; k < N; ++k) {
      r_stack.segment(k * nt, nt) = r[k + 1];
      s_stack.segment(k * nu, nu) = s[k];
    }

    // Gauss-Newton quadratic model of the tracking cost in the input
    // corrections (the leading 2 keeps g the true cost gradient).
    const MatrixXd WM = w_state.asDiagonal() * M;
    const MatrixXd H =
        2.0 * (M.transpose() * WM + MatrixXd(w_input.asDiagonal()));
    const VectorXd g =
        2.0 * (M.transpose() * (w_state.asDiagonal() * (d + r_stack)) +
               w_input.cwiseProduct(s_stack));

    // KKT residual of the nonlinear problem at the current iterate:
    // projected-gradient stationarity plus the shooting defects.
    double kkt = 0.0;
    for (int k = 0; k < N; ++k) {
      for (int i = 0; i < nu; ++i) {
        const double ui = u[k](i);
        const double proj = std::clamp(ui - g(k * nu + i), settings.u_lo(i),
                                       settings.u_hi(i));
        kkt = std::max(kkt, std::abs(ui - proj));
      }
      kkt = std::max(kkt, c[k].lpNorm<Eigen::Infinity>());
    }
    sol.kkt_history.push_back(kkt);
    sol.kkt_residual = kkt;
    if (kkt <= settings.kkt_tolerance ||
        sol.iterations >= settings.max_iterations) {
      break;
    }

    // Box QP on the stacked input corrections.
    qp::BoxQp sub;
    sub.H = H;
    sub.g = g;
    sub.lo.resize(N * nu);
    sub.hi.resize(N * nu);
    for (int k = 0; k < N; ++k) {
      sub.lo.segment(k * nu, nu) = settings.u_lo - u[k];
      sub.hi.segment(k * nu, nu) = settings.u_hi - u[k];
    }
    const qp::BoxQpSolution qsol = qp::solve_box_qp(sub);

    // Expand the state corrections and take the full step.  Components the
    // QP fixed on a bound land exactly on the bound.
    VectorXd dx = VectorXd::Zero(nt);
    for (int k = 0; k < N; ++k) {
      const VectorXd du = qsol.z.segment(k * nu, nu);
      dx = (k == 0) ? (B[0] * du + c[0]).eval()
                    : (A[k] * dx + B[k] * du + c[k]).eval();
      u[k] = clamp_input(u[k] + du);
      for (int i = 0; i < nu; ++i) {
        if (qsol.active(k * nu + i) < 0) u[k](i) = settings.u_lo(i);
        if (qsol.active(k * nu + i) > 0) u[k](i) = settings.u_hi(i);
      }
      x[k + 1] = model.retract(x[k + 1], dx);
      if (!u[k].allFinite() || !x[k + 1].allFinite()) {
        solver_failure(sol.iterations + 1, kkt, "non-finite iterate");
      }
    }
    ++sol.iterations;
  }

  sol.u = std::move(u);
  sol.x = std::move(x);
  return sol;
}

// --- vehicle-facing wrappers -------------------------------------------------

Eigen::Matrix<double, 12, 1> NmpcConfig::state_weights() const {
  Eigen::Matrix<double, 12, 1> w;
  w << q_position, q_velocity, q_attitude, q_rates;
  return w;
}

Eigen::Vector3d quaternion_error(const Eigen::Quaterniond& q,
                                 const Eigen::Quaterniond& q_ref) {
  if (std::abs(q.norm() - 1.0) > 1e-6 || std::abs(q_ref.norm() - 1.0) > 1e-6) {
    throw std::domain_error("quaternion_error: inputs must be unit quaternions");
  }
  Eigen::Quaterniond qe = q.conjugate() * q_ref;
  if (qe.w() < 0.0) qe.coeffs() = -qe.coeffs();
  return qe.vec();
}

namespace {

/// The vehicle as an OcpModel: raw 13-vector states, 12-dim error
/// coordinates, thrust inputs; mass properties frozen over the horizon.
class VehicleModel final : public OcpModel {
 public:
  VehicleModel(const geometry::VehicleProperties& props,
               const dynamics::ExternalWrench& wrench, double dt,
               int substeps)
      : props_(props),
        wrench_(wrench),
        dt_(dt),
        substeps_(std::max(1, substeps)) {}

  int state_size() const override { return dynamics::kStateSize; }
  int tangent_size() const override { return dynamics::kTangentSize; }
  int input_size() const override { return dynamics::kInputSize; }

  VectorXd step(const VectorXd& x, const VectorXd& u) const override {
    dynamics::State s = dynamics::from_vector(x);
    const double h = dt_ / substeps_;
    for (int i = 0; i < substeps_; ++i) {
      s = dynamics::step_rk4(s, u, props_, wrench_, h);
    }
    return dynamics::to_vector(s);
  }

  VectorXd retract(const VectorXd& x, const VectorXd& d) const override {
    return dynamics::to_vector(
        dynamics::retract(dynamics::from_vector(x), d));
  }

  VectorXd local_error(const VectorXd& x, const VectorXd& ref) const override {
    return dynamics::local_error(dynamics::from_vector(x),
                                 dynamics::from_vector(ref));
  }

  void linearize(const VectorXd& x, const VectorXd& u, const VectorXd& anchor,
                 MatrixXd& A, MatrixXd& B) const override {
    const LinearizedStep lin = linearize_raw(
        dynamics::from_vector(x), u, dynamics::from_vector(anchor));
    A = lin.A;
    B = lin.B;
  }

  /// Shared by the public linearize_dynamics: chart-aware Jacobians from
  /// the closed-form raw-coordinate chain over the integration substeps.
  LinearizedStep linearize_raw(const dynamics::State& x,
                               const dynamics::Thrusts& u,
                               const dynamics::State& anchor) const {
    using StateMat = Eigen::Matrix<double, 13, 13>;
    using InputMat = Eigen::Matrix<double, 13, 4>;
    StateMat A_raw = StateMat::Identity();
    InputMat B_raw = InputMat::Zero();
    dynamics::State s = x;
    const double h = dt_ / substeps_;
    for (int i = 0; i < substeps_; ++i) {
      StateMat Ai;
      InputMat Bi;
      dynamics::step_rk4_jacobian_raw(s, u, props_, wrench_, h, Ai, Bi);
      B_raw = Ai * B_raw + Bi;
      A_raw = Ai * A_raw;
      s = dynamics::step_rk4(s, u, props_, wrench_, h);
    }
    const auto E = dynamics::local_error_jacobian(s, anchor);
    const auto T = dynamics::retract_jacobian(x);
    LinearizedStep out;
    out.A = E * A_raw * T;
    out.B = E * B_raw;
    out.c = dynamics::local_error(s, anchor);
    return out;
  }

 private:
  geometry::VehicleProperties props_;
  dynamics::ExternalWrench wrench_;
  double dt_;
  int substeps_;
};

void check_config(const NmpcConfig& cfg) {
  if (cfg.horizon < 1 || !(cfg.dt > 0.0)) {
    throw std::invalid_argument("nmpc: horizon/dt invalid");
  }
  if (!(cfg.u_min < cfg.u_max)) {
    throw std::invalid_argument("nmpc: thrust bounds empty");
  }
  if (cfg.state_weights().minCoeff() < 0.0 || cfg.r_input.minCoeff() < 0.0 ||
      cfg.terminal_weight_scale < 0.0) {
    throw std::invalid_argument("nmpc: weights must be non-negative");
  }
}

}  // namespace

double cost(const std::vector<dynamics::State>& states,
            const std::vector<dynamics::Thrusts>& inputs,
            const ReferenceWindow& ref, const NmpcConfig& config) {
  const size_t N = inputs.size();
  if (states.size() != N + 1 || ref.states.size() != N + 1 ||
      ref.thrusts.size() != N) {
    throw std::invalid_argument("nmpc: cost dimensions do not match");
  }
  const Eigen::Matrix<double, 12, 1> Q = config.state_weights();
  const Eigen::Matrix<double, 12, 1> QN =
      config.terminal_weight_scale * config.state_weights();
  double total = 0.0;
  for (size_t k = 0; k <= N; ++k) {
    const auto dx = dynamics::local_error(states[k], ref.states[k]);
    const auto& W = (k == N) ? QN : Q;
    total += dx.dot(W.asDiagonal() * dx);
    if (k < N) {
      const Eigen::Vector4d du = inputs[k] - ref.thrusts[k];
      total += du.dot(config.r_input.asDiagonal() * du);
    }
  }
  return total;
}

LinearizedStep linearize_dynamics(const dynamics::State& x,
                                  const dynamics::Thrusts& u,
                                  const geometry::VehicleProperties& props,
                                  const dynamics::ExternalWrench& wrench,
                                  double dt, const dynamics::State* next,
                                  int substeps) {
  const VehicleModel model(props, wrench, dt, substeps);
  dynamics::State anchor;
  if (next != nullptr) {
    anchor = *next;
  } else {
    anchor = dynamics::from_vector(
        model.step(dynamics::to_vector(x), u));
  }
  return model.linearize_raw(x, u, anchor);
}

dynamics::Thrusts hover_thrusts(const geometry::VehicleProperties& props) {
  const Eigen::Vector4d wrench(props.mass * dynamics::kGravity, 0.0, 0.0,
                               0.0);
  const Eigen::FullPivLU<Eigen::Matrix4d> lu(props.allocation);
  if (!lu.isInvertible()) {
    throw std::runtime_error("nmpc: allocation matrix is singular");
  }
  return lu.solve(wrench);
}

NmpcSolution solve(const dynamics::State& x_now, const ReferenceWindow& ref,
                   const geometry::VehicleProperties& props,
                   const NmpcConfig& config,
                   const dynamics::ExternalWrench& wrench,
                   const NmpcSolution* warm_start) {
  check_config(config);
  if (!x_now.all_finite()) {
    throw std::invalid_argument("nmpc: current state is not finite");
  }
  const size_t N = static_cast<size_t>(config.horizon);
  if (ref.states.size() != N + 1 || ref.thrusts.size() != N) {
    throw std::invalid_argument(
        "nmpc: reference window does not match the horizon");
  }

  const auto t_start = std::chrono::steady_clock::now();

  const VehicleModel model(props, wrench, config.dt,
                           config.integration_substeps);
  OcpWeights weights;
  weights.Q = config.state_weights();
  weights.QN = config.terminal_weight_scale * config.state_weights();
  weights.R = config.r_input;

  SqpSettings settings;
  settings.max_iterations = config.max_iterations;
  settings.kkt_tolerance = config.kkt_tolerance;
  settings.u_lo = Eigen::Vector4d::Constant(config.u_min);
  settings.u_hi = Eigen::Vector4d::Constant(config.u_max);

  OcpReference ocp_ref;
  ocp_ref.x.reserve(N + 1);
  ocp_ref.u.reserve(N);
  for (const auto& xs : ref.states) ocp_ref.x.push_back(dynamics::to_vector(xs));
  for (const auto& us : ref.thrusts) ocp_ref.u.push_back(us);

  OcpSolution warm;
  const OcpSolution* warm_ptr = nullptr;
  if (warm_start != nullptr && warm_start->inputs.size() == N &&
      warm_start->states.size() == N + 1) {
    warm.u.reserve(N);
    warm.x.reserve(N + 1);
    for (const auto& us : warm_start->inputs) warm.u.push_back(us);
    for (const auto& xs : warm_start->states) {
      warm.x.push_back(dynamics::to_vector(xs));
    }
    warm_ptr = &warm;
  }

  const OcpSolution raw = solve_ocp(model, weights, dynamics::to_vector(x_now),
                                    ocp_ref, settings, warm_ptr);

  NmpcSolution out;
  out.inputs.reserve(N);
  out.states.reserve(N + 1);
  for (const auto& us : raw.u) out.inputs.push_back(us);
  for (const auto& xs : raw.x) out.states.push_back(dynamics::from_vector(xs));
  out.iterations = raw.iterations;
  out.kkt_residual = raw.kkt_residual;
  out.kkt_history = raw.kkt_history;
  out.active_bounds = 0;
  for (const auto& us : out.inputs) {
    for (int i = 0; i < 4; ++i) {
      if (us(i) == config.u_min || us(i) == config.u_max) ++out.active_bounds;
    }
  }
  out.solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return out;
}

}  // namespace ringrotor::nmpc
