#include "theory/tabular_game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/errors.hpp"
#include "policy/policy.hpp"

namespace dpa::theory {
namespace {

using train::pair_loss_expected;
using train::pair_loss_sampled;

constexpr std::size_t kSac = 1;

std::array<double, 2> verifier_rewards(const TabularContext& c) {
  return train::paired_rewards_verifier(1 - c.s_x);
}

double total_weight(const TabularGame& game) {
  double w = 0.0;
  for (const TabularContext& c : game.contexts) w += c.weight;
  return w;
}

// Two-action softmax at one context with log-ratios to the reference.
struct Pair2 {
  std::array<double, 2> pi{};
  std::array<double, 2> log_ratio{};
  double kl = 0.0;
};

Pair2 pair_at(const Matrix& head, const Matrix& ref, std::span<const double> f) {
  std::array<double, 2> z{}, zr{};
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t a = 0; a < 2; ++a) {
      z[a] += f[i] * head(i, a);
      zr[a] += f[i] * ref(i, a);
    }
  }
  auto log_softmax = [](const std::array<double, 2>& x) {
    const double m = std::max(x[0], x[1]);
    const double lse = m + std::log(std::exp(x[0] - m) + std::exp(x[1] - m));
    return std::array<double, 2>{x[0] - lse, x[1] - lse};
  };
  const std::array<double, 2> lp = log_softmax(z), lq = log_softmax(zr);
  Pair2 out;
  for (std::size_t a = 0; a < 2; ++a) {
    out.pi[a] = std::exp(lp[a]);
    out.log_ratio[a] = lp[a] - lq[a];
    out.kl += out.pi[a] * out.log_ratio[a];
  }
  return out;
}

// out += w * grad of (E_pi[R] - beta KL); entry (i, a) is
// f_i pi_a [(R_a - E_pi R) - beta (log(pi_a / ref_a) - KL)].
void add_expected(Matrix& out, std::span<const double> f, const Pair2& s, const std::array<double, 2>& r,
                  double beta, double w) {
  const double mean_r = s.pi[0] * r[0] + s.pi[1] * r[1];
  for (std::size_t a = 0; a < 2; ++a) {
    const double coef = w * s.pi[a] * ((r[a] - mean_r) - beta * (s.log_ratio[a] - s.kl));
    for (std::size_t i = 0; i < f.size(); ++i) out(i, a) += coef * f[i];
  }
}

// out += w * [A - beta log(pi_y / ref_y)] * f (x) (e_y - pi)
void add_sampled(Matrix& out, std::span<const double> f, const Pair2& s, std::size_t y, double advantage,
                 double beta, double w) {
  const double coef = w * (advantage - beta * s.log_ratio[y]);
  for (std::size_t a = 0; a < 2; ++a) {
    const double d = coef * ((a == y ? 1.0 : 0.0) - s.pi[a]);
    for (std::size_t i = 0; i < f.size(); ++i) out(i, a) += d * f[i];
  }
}

}  // namespace

GamePoint TabularGame::zero_point() const {
  return {Matrix(dim(), 2), Matrix(dim(), 2)};
}

TabularGame two_context_game(double beta) {
  TabularGame g;
  g.contexts = {{0.5, 0, 0.9, {1.0}}, {0.5, 1, 0.3, {-1.0}}};
  g.beta_v = beta;
  g.beta_fa = beta;
  g.reference = g.zero_point();
  return g;
}

double distance(const GamePoint& a, const GamePoint& b) {
  double ss = 0.0;
  for (std::size_t i = 0; i < a.theta.size(); ++i) ss += std::pow(a.theta.data()[i] - b.theta.data()[i], 2);
  for (std::size_t i = 0; i < a.phi.size(); ++i) ss += std::pow(a.phi.data()[i] - b.phi.data()[i], 2);
  return std::sqrt(ss);
}

GamePoint axpy(const GamePoint& x, double s, const GamePoint& y) {
  GamePoint out = x;
  out.theta.axpy(s, y.theta);
  out.phi.axpy(s, y.phi);
  return out;
}

double objective_v(const TabularGame& game, const GamePoint& p) {
  double j = 0.0;
  for (const TabularContext& c : game.contexts) {
    const std::vector<double> pi = policy::action_distribution(p.theta, c.features, 2);
    const std::vector<double> ref = policy::action_distribution(game.reference.theta, c.features, 2);
    const std::array<double, 2> r = verifier_rewards(c);
    j += c.weight * (pi[0] * r[0] + pi[1] * r[1] - game.beta_v * policy::categorical_kl(pi, ref));
  }
  return j;
}

double objective_f(const TabularGame& game, const GamePoint& p) {
  double j = 0.0;
  for (const TabularContext& c : game.contexts) {
    const double sac = policy::action_distribution(p.theta, c.features, 2)[kSac];
    const std::vector<double> pa = policy::action_distribution(p.phi, c.features, 2);
    const std::vector<double> ref = policy::action_distribution(game.reference.phi, c.features, 2);
    j += c.weight * sac *
         (pa[0] * c.s_x + pa[1] * c.s_bar_z - game.beta_fa * policy::categorical_kl(pa, ref));
  }
  return j;
}

GamePoint vector_field(const TabularGame& game, const GamePoint& p) {
  GamePoint f{Matrix(p.theta.rows(), p.theta.cols()), Matrix(p.phi.rows(), p.phi.cols())};
  for (const TabularContext& c : game.contexts) {
    const Pair2 v = pair_at(p.theta, game.reference.theta, c.features);
    const std::array<double, 2> rv = verifier_rewards(c);
    add_expected(f.theta, c.features, v, rv, game.beta_v, c.weight);
    const Pair2 g = pair_at(p.phi, game.reference.phi, c.features);
    const std::array<double, 2> rg = {static_cast<double>(c.s_x), c.s_bar_z};
    add_expected(f.phi, c.features, g, rg, game.beta_fa, c.weight * v.pi[kSac]);
  }
  return f;
}

Residual stationarity_residual(const TabularGame& game, const GamePoint& p) {
  const GamePoint f = vector_field(game, p);
  return {std::sqrt(f.phi.squared_norm()), std::sqrt(f.theta.squared_norm())};
}

GamePoint sampled_field(const TabularGame& game, const GamePoint& p, std::size_t batch, Rng& rng) {
  require(batch > 0, "batch must be positive");
  const double w_total = total_weight(game);
  std::vector<double> probs;
  for (const TabularContext& c : game.contexts) probs.push_back(c.weight / w_total);
  std::vector<Pair2> v, g;
  for (const TabularContext& c : game.contexts) {
    v.push_back(pair_at(p.theta, game.reference.theta, c.features));
    g.push_back(pair_at(p.phi, game.reference.phi, c.features));
  }
  GamePoint f{Matrix(p.theta.rows(), p.theta.cols()), Matrix(p.phi.rows(), p.phi.cols())};
  const double scale = w_total / static_cast<double>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t k = rng.categorical(probs);
    const TabularContext& c = game.contexts[k];
    const std::size_t y = rng.categorical(v[k].pi);
    const std::array<double, 2> rv = verifier_rewards(c);
    add_sampled(f.theta, c.features, v[k], y, rv[y] - 0.5 * (rv[0] + rv[1]), game.beta_v, scale);
    if (y != kSac) continue;
    const double s_z = rng.bernoulli(c.s_bar_z) ? 1.0 : 0.0;
    const std::size_t a = rng.categorical(g[k].pi);
    const std::array<double, 2> rg = {static_cast<double>(c.s_x), s_z};
    add_sampled(f.phi, c.features, g[k], a, rg[a] - 0.5 * (rg[0] + rg[1]), game.beta_fa, scale);
  }
  return f;
}

GamePoint ode_step(const TabularGame& game, const GamePoint& p, double dt, Integrator method) {
  const GamePoint k1 = vector_field(game, p);
  if (method == Integrator::kEuler) return axpy(p, dt, k1);
  const GamePoint k2 = vector_field(game, axpy(p, dt / 2, k1));
  const GamePoint k3 = vector_field(game, axpy(p, dt / 2, k2));
  const GamePoint k4 = vector_field(game, axpy(p, dt, k3));
  GamePoint out = axpy(p, dt / 6, k1);
  out = axpy(out, dt / 3, k2);
  out = axpy(out, dt / 3, k3);
  return axpy(out, dt / 6, k4);
}

std::vector<TrajectoryPoint> ode_trajectory(const TabularGame& game, const GamePoint& init, double horizon, double dt,
                                            Integrator method, std::size_t record_every) {
  require(dt > 0.0, "dt must be positive");
  require(horizon >= 0.0, "horizon must be non-negative");
  require(record_every >= 1, "record_every must be >= 1");
  std::vector<TrajectoryPoint> out{{0.0, init}};
  GamePoint p = init;
  double t = 0.0;
  std::size_t n = 0;
  while (t < horizon) {
    const double h = std::min(dt, horizon - t);
    p = ode_step(game, p, h, method);
    if (!p.theta.all_finite() || !p.phi.all_finite()) fail(ErrorCode::kNumeric, "non-finite ODE state");
    ++n;
    t = (horizon - t <= dt) ? horizon : t + dt;
    if (n % record_every == 0 || t == horizon) out.push_back({t, p});
  }
  return out;
}

std::vector<double> train_bandit(const Bandit& bandit, const BanditConfig& config) {
  require(config.batch > 0, "batch must be positive");
  const std::vector<double> f = {1.0};
  Matrix head(1, 2);
  const Matrix ref(1, 2);
  Rng rng(mix_seed({config.seed, hash_string("bandit")}));
  std::vector<double> trace;
  trace.reserve(config.max_steps + 1);
  trace.push_back(0.5);
  for (std::size_t t = 0; t < config.max_steps; ++t) {
    Matrix g(1, 2);
    if (config.mode == train::GradientMode::kExpected) {
      const std::vector<double> adv = train::group_advantage(bandit.reward_mean, config.epsilon_a, config.advantage);
      g = pair_loss_expected(head, ref, f, adv, config.beta).total();
    } else {
      const std::vector<double> pi = policy::action_distribution(head, f, 2);
      for (std::size_t b = 0; b < config.batch; ++b) {
        const std::size_t a = rng.categorical(pi);
        std::array<double, 2> r = bandit.reward_mean;
        for (std::size_t i = 0; i < 2; ++i) {
          if (bandit.bernoulli[i]) r[i] = rng.bernoulli(bandit.reward_mean[i]) ? 1.0 : 0.0;
        }
        const std::vector<double> adv = train::group_advantage(r, config.epsilon_a, config.advantage);
        g.axpy(1.0 / static_cast<double>(config.batch), pair_loss_sampled(head, ref, f, 2, a, adv[a], config.beta).total());
      }
    }
    head.axpy(-config.schedule.at(t), g);
    if (!head.all_finite()) fail(ErrorCode::kNumeric, "non-finite bandit parameters");
    trace.push_back(policy::action_distribution(head, f, 2)[1]);
  }
  return trace;
}

std::vector<double> kl_best_response_target(std::span<const double> ref, std::span<const double> rewards, double beta) {
  require(beta > 0.0, "beta must be positive");
  require(ref.size() == rewards.size() && !ref.empty(), "reference and rewards differ in size");
  std::vector<double> logit(ref.size());
  for (std::size_t a = 0; a < ref.size(); ++a) logit[a] = std::log(ref[a]) + rewards[a] / beta;
  return policy::softmax(logit);
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  require(p.size() == q.size(), "distributions differ in size");
  double tv = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) tv += std::abs(p[a] - q[a]);
  return tv / 2.0;
}

}  // namespace dpa::theory
