#include "policy/policy.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "common/errors.hpp"
#include "env/features.hpp"
#include "sac/sac.hpp"

namespace dpa::policy {
namespace {

void check_dims(const Matrix& head, std::span<const double> features, std::size_t n_actions) {
  if (n_actions < 2 || n_actions > head.cols() || features.size() != head.rows()) {
    fail(ErrorCode::kInvalidArgument,
         fmt::format("dimension mismatch: head {}x{}, features {}, actions {}", head.rows(), head.cols(),
                     features.size(), n_actions));
  }
}

}  // namespace

std::vector<double> logits(const Matrix& head, std::span<const double> features, std::size_t n_actions) {
  check_dims(head, features, n_actions);
  std::vector<double> z(n_actions, 0.0);
  for (std::size_t i = 0; i < head.rows(); ++i) {
    const double f = features[i];
    if (f == 0.0) continue;
    for (std::size_t a = 0; a < n_actions; ++a) z[a] += f * head(i, a);
  }
  return z;
}

std::vector<double> softmax(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double total = 0.0;
  for (std::size_t a = 0; a < z.size(); ++a) {
    p[a] = std::exp(z[a] - m);
    total += p[a];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> action_distribution(const Matrix& head, std::span<const double> features,
                                        std::size_t n_actions) {
  return softmax(logits(head, features, n_actions));
}

Matrix score(std::span<const double> features, std::span<const double> probs, std::size_t cols,
             std::size_t chosen) {
  require(chosen < probs.size(), "chosen action out of range");
  Matrix g(features.size(), cols);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double f = features[i];
    if (f == 0.0) continue;
    for (std::size_t a = 0; a < probs.size(); ++a) g(i, a) = f * ((a == chosen ? 1.0 : 0.0) - probs[a]);
  }
  return g;
}

Matrix log_prob_grad(const Matrix& head, std::span<const double> features, std::size_t n_actions,
                     std::size_t chosen) {
  require(chosen < n_actions, "chosen action out of range");
  const std::vector<double> p = action_distribution(head, features, n_actions);
  return score(features, p, head.cols(), chosen);
}

double categorical_kl(std::span<const double> p, std::span<const double> q) {
  require(p.size() == q.size(), "KL of distributions with different supports");
  double kl = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (p[a] > 0.0) kl += p[a] * (std::log(p[a]) - std::log(q[a]));
  }
  return kl;
}

KlResult kl_to_reference(const Matrix& head, const Matrix& ref_head, std::span<const double> features,
                         std::size_t n_actions) {
  if (!head.same_shape(ref_head)) fail(ErrorCode::kInvalidArgument, "head and reference shapes differ");
  const std::vector<double> zp = logits(head, features, n_actions);
  const std::vector<double> zq = logits(ref_head, features, n_actions);
  const std::vector<double> p = softmax(zp);
  const std::vector<double> q = softmax(zq);
  // log p_a - log q_a from logits directly, stable when probabilities underflow.
  const double mp = *std::max_element(zp.begin(), zp.end());
  const double mq = *std::max_element(zq.begin(), zq.end());
  double lse_p = 0.0, lse_q = 0.0;
  for (std::size_t a = 0; a < n_actions; ++a) {
    lse_p += std::exp(zp[a] - mp);
    lse_q += std::exp(zq[a] - mq);
  }
  lse_p = mp + std::log(lse_p);
  lse_q = mq + std::log(lse_q);
  std::vector<double> log_ratio(n_actions);
  KlResult out;
  for (std::size_t a = 0; a < n_actions; ++a) {
    log_ratio[a] = (zp[a] - lse_p) - (zq[a] - lse_q);
    out.value += p[a] * log_ratio[a];
  }
  out.value = std::max(out.value, 0.0);
  out.grad = Matrix(head.rows(), head.cols());
  for (std::size_t i = 0; i < head.rows(); ++i) {
    const double f = features[i];
    if (f == 0.0) continue;
    for (std::size_t a = 0; a < n_actions; ++a) out.grad(i, a) = f * p[a] * (log_ratio[a] - out.value);
  }
  return out;
}

std::size_t argmax_lowest(std::span<const double> values) {
  require(!values.empty(), "argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t a = 1; a < values.size(); ++a) {
    if (values[a] > values[best]) best = a;
  }
  return best;
}

std::string_view to_string(HeadId id) {
  switch (id) {
    case HeadId::kProposal: return "proposal";
    case HeadId::kRevision: return "revision";
    case HeadId::kAction: return "action";
    case HeadId::kIntervene: return "intervene";
    case HeadId::kTemplate: return "template";
  }
  return "?";
}

Role role_of(HeadId id) {
  return id == HeadId::kIntervene || id == HeadId::kTemplate ? Role::kVerifier : Role::kGenerator;
}

Matrix& PolicyParams::head(HeadId id) {
  return const_cast<Matrix&>(std::as_const(*this).head(id));
}

const Matrix& PolicyParams::head(HeadId id) const {
  switch (id) {
    case HeadId::kProposal: return generator.proposal_head;
    case HeadId::kRevision: return generator.revision_head;
    case HeadId::kAction: return generator.action_head;
    case HeadId::kIntervene: return verifier.intervene_head;
    case HeadId::kTemplate: return verifier.template_head;
  }
  fail(ErrorCode::kInvalidArgument, "unknown head");
}

bool PolicyParams::all_finite() const noexcept {
  return std::all_of(std::begin(kAllHeads), std::end(kAllHeads),
                     [this](HeadId id) { return head(id).all_finite(); });
}

PolicyParams zero_params(std::size_t num_slots) {
  using env::RoleTag;
  require(num_slots >= 2, "need at least two candidate slots");
  PolicyParams p;
  p.generator.proposal_head = Matrix(env::feature_length(RoleTag::kGeneratorProposal, num_slots), num_slots);
  p.generator.revision_head = Matrix(env::feature_length(RoleTag::kGeneratorRevision, num_slots), num_slots);
  p.generator.action_head = Matrix(env::feature_length(RoleTag::kGeneratorAction, num_slots), 2);
  p.verifier.intervene_head = Matrix(env::feature_length(RoleTag::kVerifier, num_slots), 2);
  p.verifier.template_head =
      Matrix(env::feature_length(RoleTag::kVerifier, num_slots), sac::kNumDrawableTemplates);
  return p;
}

ReferenceSnapshot snapshot(const PolicyParams& params) {
  return std::make_shared<const PolicyParams>(params);
}

PolicyParams zeros_like(const PolicyParams& params) {
  PolicyParams z;
  for (HeadId id : kAllHeads) z.head(id) = Matrix(params.head(id).rows(), params.head(id).cols());
  return z;
}

}  // namespace dpa::policy
