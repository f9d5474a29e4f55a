// SPDX-License-Identifier: Apache-2.0

#include "mpcert/instances.hpp"

#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "mpcert/rng.hpp"

#ifndef MPCERT_DATA_DIR
#define MPCERT_DATA_DIR "data"
#endif

namespace mpcert {

MpProblem GenRandom(const GenSpec& spec) {
  if (spec.n_b < 1) throw std::invalid_argument("GenRandom: n_b must be >= 1");
  const int n = spec.n();
  const int m = spec.m();
  const int d = spec.theta_dim();
  SplitMix64 rng(spec.seed);
  auto normal = [&rng](int rows, int cols) {
    Matrix M(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) M(i, j) = rng.Normal();
    }
    return M;
  };

  MpProblem p;
  p.kind = spec.kind;
  p.n_c = spec.n_c();
  p.n_b = spec.n_b;
  for (int i = p.n_c; i < n; ++i) p.binary_set.push_back(i);
  if (spec.kind == ProblemKind::kMilp) {
    p.c = normal(n, 1).col(0);
  } else {
    const Matrix Hbar = normal(n, n);
    p.H = Hbar * Hbar.transpose() + 1e-6 * Matrix::Identity(n, n);
    p.H = 0.5 * (p.H + p.H.transpose());
    p.f = normal(n, 1).col(0);
    p.f_theta = normal(n, d);
  }
  p.A = normal(m, n);
  p.b.resize(m);
  for (int i = 0; i < m; ++i) p.b(i) = rng.Uniform(0.0, 2.0);
  p.W = normal(m, d);
  p.theta0 = {Vector::Constant(d, -0.5), Vector::Constant(d, 0.5)};
  return p;
}

MpProblem PTiny() {
  MpProblem p;
  p.kind = ProblemKind::kMilp;
  p.n_c = 1;
  p.n_b = 1;
  p.binary_set = {1};
  p.c = Vector(2);
  p.c << -1.0, -2.0;
  p.A = Matrix(2, 2);
  p.A << 1.0, 1.0, -1.0, 0.0;
  p.b = Vector(2);
  p.b << 1.0, 0.0;
  p.W = Matrix(2, 1);
  p.W << 1.0, 0.0;
  p.theta0 = {Vector::Constant(1, -0.5), Vector::Constant(1, 0.5)};
  return p;
}

std::string DefaultPendulumFixture() {
  return std::string(MPCERT_DATA_DIR) + "/pendulum_v1.json";
}

namespace {

struct PendulumModel {
  double dt, mc, mp, l, g, wall, k, nu;
  double u_max, lambda_max, gap_m, force_m;
  Vector state_limits, theta_limits, q, r;
  double rho;
};

PendulumModel LoadModel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pendulum fixture '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
    auto vec = [&j](const char* key, int len) {
      const auto& a = j.at(key);
      if (static_cast<int>(a.size()) != len) {
        throw std::runtime_error(std::string("field '") + key + "' must have " +
                                 std::to_string(len) + " entries");
      }
      Vector v(len);
      for (int i = 0; i < len; ++i) v(i) = a.at(i).get<double>();
      return v;
    };
    PendulumModel m;
    m.dt = j.at("sample_time").get<double>();
    m.mc = j.at("mass_cart").get<double>();
    m.mp = j.at("mass_pole").get<double>();
    m.l = j.at("pole_length").get<double>();
    m.g = j.at("gravity").get<double>();
    m.wall = j.at("wall_distance").get<double>();
    m.k = j.at("wall_stiffness").get<double>();
    m.nu = j.at("wall_damping").get<double>();
    m.u_max = j.at("force_limit").get<double>();
    m.lambda_max = j.at("contact_force_limit").get<double>();
    m.gap_m = j.at("gap_big_m").get<double>();
    m.force_m = j.at("force_big_m").get<double>();
    m.state_limits = vec("state_limits", 4);
    m.theta_limits = vec("theta_limits", 4);
    m.q = vec("state_weights", 4);
    m.r = vec("input_weights", 2);
    m.rho = j.at("binary_weight").get<double>();
    return m;
  } catch (const std::exception& e) {
    throw std::runtime_error("invalid pendulum fixture '" + path + "': " + e.what());
  }
}

}  // namespace

MpProblem PendulumMiqp(const PendulumSpec& spec) {
  const int N = spec.horizon;
  if (N < 1) throw std::invalid_argument("pendulum horizon must be >= 1");
  const PendulumModel pm =
      LoadModel(spec.fixture.empty() ? DefaultPendulumFixture() : spec.fixture);

  // Continuous dynamics z' = Ac z + Bc (u, lambda), Euler step.
  Matrix Ac = Matrix::Zero(4, 4);
  Ac(0, 2) = 1.0;
  Ac(1, 3) = 1.0;
  Ac(2, 1) = pm.mp * pm.g / pm.mc;
  Ac(3, 1) = (pm.mc + pm.mp) * pm.g / (pm.mc * pm.l);
  Matrix Bc = Matrix::Zero(4, 2);
  Bc(2, 0) = 1.0 / pm.mc;
  Bc(3, 0) = 1.0 / (pm.mc * pm.l);
  Bc(3, 1) = 1.0 / (pm.mp * pm.l);
  const Matrix Ad = Matrix::Identity(4, 4) + pm.dt * Ac;
  const Matrix Bd = pm.dt * Bc;

  const int n = 4 * N;
  auto u_index = [](int t) { return 2 * t; };
  auto lambda_index = [](int t) { return 2 * t + 1; };
  auto delta1_index = [N](int t) { return 2 * N + 2 * t; };
  auto delta2_index = [N](int t) { return 2 * N + 2 * t + 1; };

  // z_t = Phi[t] theta + Gam[t] x
  std::vector<Matrix> Phi(N + 1), Gam(N + 1);
  Phi[0] = Matrix::Identity(4, 4);
  Gam[0] = Matrix::Zero(4, n);
  for (int t = 0; t < N; ++t) {
    Phi[t + 1] = Ad * Phi[t];
    Gam[t + 1] = Ad * Gam[t];
    Gam[t + 1].col(u_index(t)) += Bd.col(0);
    Gam[t + 1].col(lambda_index(t)) += Bd.col(1);
  }

  MpProblem p;
  p.kind = ProblemKind::kMiqp;
  p.n_c = 2 * N;
  p.n_b = 2 * N;
  for (int i = 2 * N; i < n; ++i) p.binary_set.push_back(i);
  p.theta0 = {-pm.theta_limits, pm.theta_limits};

  const Matrix Q = pm.q.asDiagonal();
  p.H = Matrix::Zero(n, n);
  p.f_theta = Matrix::Zero(n, 4);
  for (int t = 1; t <= N; ++t) {
    p.H += 2.0 * Gam[t].transpose() * Q * Gam[t];
    p.f_theta += 2.0 * Gam[t].transpose() * Q * Phi[t];
  }
  for (int t = 0; t < N; ++t) {
    p.H(u_index(t), u_index(t)) += 2.0 * pm.r(0);
    p.H(lambda_index(t), lambda_index(t)) += 2.0 * pm.r(1);
    p.H(delta1_index(t), delta1_index(t)) += 2.0 * pm.rho;
    p.H(delta2_index(t), delta2_index(t)) += 2.0 * pm.rho;
  }
  p.H = 0.5 * (p.H + p.H.transpose());
  p.f = Vector::Zero(n);

  const int m = 19 * N;
  p.A = Matrix::Zero(m, n);
  p.b = Vector::Zero(m);
  p.W = Matrix::Zero(m, 4);
  int row = 0;
  // a'x <= b + w'theta
  auto add = [&](const Eigen::RowVectorXd& a, double b,
                 const Eigen::RowVectorXd& w) {
    p.A.row(row) = a;
    p.b(row) = b;
    p.W.row(row) = w;
    ++row;
  };
  const Eigen::RowVectorXd zero_t = Eigen::RowVectorXd::Zero(4);
  auto unit = [n](int i, double v) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(n);
    e(i) = v;
    return e;
  };

  Eigen::RowVectorXd cg(4), cgd(4);
  cg << -1.0, pm.l, 0.0, 0.0;   // gap = wall + cg z
  cgd << 0.0, 0.0, -1.0, pm.l;  // gap rate = cgd z
  const Eigen::RowVectorXd w_force = pm.k * cg + pm.nu * cgd;  // phi = -k wall - w_force z

  for (int t = 0; t < N; ++t) {
    add(unit(u_index(t), 1.0), pm.u_max, zero_t);
    add(unit(u_index(t), -1.0), pm.u_max, zero_t);
    add(unit(lambda_index(t), 1.0), pm.lambda_max, zero_t);

    for (int i = 0; i < 4; ++i) {
      add(Gam[t + 1].row(i), pm.state_limits(i), -Phi[t + 1].row(i));
      add(-Gam[t + 1].row(i), pm.state_limits(i), Phi[t + 1].row(i));
    }

    const Eigen::RowVectorXd gap_x = cg * Gam[t];
    const Eigen::RowVectorXd gap_t = cg * Phi[t];
    const Eigen::RowVectorXd phi_x = -w_force * Gam[t];
    const Eigen::RowVectorXd phi_t = -w_force * Phi[t];
    const double phi_c = -pm.k * pm.wall;
    const int l_i = lambda_index(t);
    const int d1 = delta1_index(t);
    const int d2 = delta2_index(t);
    // contact (d1 = 1) iff gap <= 0
    add(gap_x + unit(d1, pm.gap_m), pm.gap_m - pm.wall, -gap_t);
    add(-gap_x - unit(d1, pm.gap_m), pm.wall, gap_t);
    // 0 <= lambda <= F d1
    add(unit(l_i, 1.0) + unit(d1, -pm.force_m), 0.0, zero_t);
    add(unit(l_i, -1.0), 0.0, zero_t);
    // d2 = 1 forces lambda = phi
    add(unit(l_i, 1.0) - phi_x + unit(d2, pm.force_m), pm.force_m + phi_c, phi_t);
    add(phi_x - unit(l_i, 1.0) + unit(d2, pm.force_m), pm.force_m - phi_c, -phi_t);
    // d2 <= d1, lambda <= F d2
    add(unit(d2, 1.0) + unit(d1, -1.0), 0.0, zero_t);
    add(unit(l_i, 1.0) + unit(d2, -pm.force_m), 0.0, zero_t);
  }
  p.Validate();
  return p;
}

}  // namespace mpcert
