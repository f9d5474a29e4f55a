// SPDX-License-Identifier: Apache-2.0
//
// Problem instances: seeded random families, the two-variable P_tiny, and a
// hybrid inverted-pendulum MPC problem built from a JSON model fixture.

#pragma once

#include <cstdint>
#include <string>

#include "mpcert/problem.hpp"

namespace mpcert {

struct GenSpec {
  ProblemKind kind = ProblemKind::kMilp;
  int n_b = 1;
  std::uint64_t seed = 1;

  int n_c() const { return n_b; }
  int n() const { return 2 * n_b; }
  int m() const { return n() + 8; }
  int theta_dim() const { return (n_b + 3) / 4; }
};

/// Continuous variables come first, binaries last. Entries are drawn in the
/// order c (or Hbar, f, f_theta), A, b, W, each row-major: standard normal
/// except b ~ U[0, 2]. MIQP uses H = Hbar Hbar' + 1e-6 I. Theta0 = [-0.5, 0.5]^n_theta.
MpProblem GenRandom(const GenSpec& spec);

/// min -x_c - 2 x_b  s.t.  x_c + x_b <= 1 + theta,  -x_c <= 0,  x_b binary,
/// theta in [-0.5, 0.5]. Variable 0 is x_c, variable 1 is x_b.
MpProblem PTiny();

struct PendulumSpec {
  int horizon = 1;
  std::string fixture;  // path to the model JSON; empty selects the bundled file
};

/// Condensed MPC problem for a cart-pole next to an elastic wall: per step
/// a cart force, a wall contact force and two contact-mode binaries, with
/// the initial state as parameter. n = 4N, n_b = 2N, m = 19N.
MpProblem PendulumMiqp(const PendulumSpec& spec);

/// Location of the bundled fixture.
std::string DefaultPendulumFixture();

}  // namespace mpcert
