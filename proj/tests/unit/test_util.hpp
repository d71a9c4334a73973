#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "common/matrix.hpp"
#include "common/rng.hpp"
#include "env/task_env.hpp"
#include "game/game.hpp"
#include "sac/sac.hpp"

namespace dpa::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = scale * (2.0 * rng.uniform() - 1.0);
  return m;
}

inline std::vector<double> random_vector(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * (2.0 * rng.uniform() - 1.0);
  return v;
}

// Central differences of f with respect to every entry of m.
inline Matrix finite_difference(const std::function<double(const Matrix&)>& f, const Matrix& m, double h = 1e-5) {
  Matrix g(m.rows(), m.cols());
  Matrix probe = m;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double keep = probe.data()[i];
    probe.data()[i] = keep + h;
    const double up = f(probe);
    probe.data()[i] = keep - h;
    const double down = f(probe);
    probe.data()[i] = keep;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// max |a - b| / max |b|, with a floor on the denominator.
inline double relative_error(const Matrix& a, const Matrix& b) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a.data()[i] - b.data()[i]));
    scale = std::max(scale, std::abs(b.data()[i]));
  }
  return diff / std::max(scale, 1e-12);
}

// Hand-built task: inputs, then lines with operands by name ("in<k>" or "L<k>").
inline env::OperandRef in(std::size_t k) { return {env::OperandRef::Source::kInput, k}; }
inline env::OperandRef line(std::size_t k) { return {env::OperandRef::Source::kLine, k}; }

// Hand-built transitions for the line-level examples: a one-line task whose
// oracle is `gold`, proposal x, and optionally an SAC with revision z.
struct Fixture {
  std::shared_ptr<const env::TaskInstance> task;
  game::Transition tr;
};

inline Fixture fixture(env::Cents gold, env::Cents x, std::optional<env::Cents> z, game::GeneratorAction a) {
  auto t = std::make_shared<env::TaskInstance>();
  t->id = "fixture";
  t->seed = 1;
  t->inputs = {{"gold", gold}};
  t->lines.push_back({env::RuleKind::kCopy, {in(0)}, {}, {}});
  t->evaluated_units = {0};
  Fixture f{t, game::Transition(env::DecisionContext(*t))};
  game::Transition& tr = f.tr;
  tr.proposal = x;
  tr.s_x = env::score_correct(x, *t, 1);
  tr.c_sac = 1 - tr.s_x;
  if (z) {
    tr.verifier_action = game::VerifierAction::kSac;
    tr.sac = sac::emit_sac(tr.context, x, 0);
    tr.revision = *z;
    tr.s_z = env::score_correct(*z, *t, 1);
    tr.generator_action = a;
    tr.submitted = a == game::GeneratorAction::kKeep ? x : *z;
  } else {
    tr.submitted = x;
  }
  return f;
}

}  // namespace dpa::testing
