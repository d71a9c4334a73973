#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "common/matrix.hpp"

namespace dpa::policy {

// Linear-softmax head: logits_a = sum_i features_i * head(i, a) over the
// first n_actions columns.
std::vector<double> logits(const Matrix& head, std::span<const double> features, std::size_t n_actions);

std::vector<double> softmax(std::span<const double> logits);

std::vector<double> action_distribution(const Matrix& head, std::span<const double> features,
                                        std::size_t n_actions);

// d log pi(chosen) / d head = features (x) (onehot(chosen) - pi). Columns past
// n_actions are zero.
Matrix log_prob_grad(const Matrix& head, std::span<const double> features, std::size_t n_actions,
                     std::size_t chosen);

// Score block for a precomputed distribution.
Matrix score(std::span<const double> features, std::span<const double> probs, std::size_t cols,
             std::size_t chosen);

double categorical_kl(std::span<const double> p, std::span<const double> q);

struct KlResult {
  double value = 0.0;
  Matrix grad;
};

// KL(pi_head(.|f) || pi_ref(.|f)) and its gradient with respect to `head`:
// d/dz_a KL = pi_a * (log(pi_a / ref_a) - KL).
KlResult kl_to_reference(const Matrix& head, const Matrix& ref_head, std::span<const double> features,
                         std::size_t n_actions);

std::size_t argmax_lowest(std::span<const double> values);

enum class Role : std::uint8_t { kGenerator, kVerifier };

enum class HeadId : std::uint8_t {
  kProposal,   // pi_G^x over candidate slots
  kRevision,   // pi_G^z over candidate slots
  kAction,     // pi_G^a over {KEEP, REVISE}
  kIntervene,  // pi_V over {NS, SAC}
  kTemplate,   // SAC template draw
};
inline constexpr std::size_t kNumHeads = 5;
inline constexpr HeadId kAllHeads[kNumHeads] = {HeadId::kProposal, HeadId::kRevision, HeadId::kAction,
                                                HeadId::kIntervene, HeadId::kTemplate};

std::string_view to_string(HeadId id);
Role role_of(HeadId id);

struct GeneratorParams {
  Matrix proposal_head;
  Matrix revision_head;
  Matrix action_head;
  friend bool operator==(const GeneratorParams&, const GeneratorParams&) = default;
};

struct VerifierParams {
  Matrix intervene_head;
  Matrix template_head;
  friend bool operator==(const VerifierParams&, const VerifierParams&) = default;
};

struct PolicyParams {
  GeneratorParams generator;
  VerifierParams verifier;

  Matrix& head(HeadId id);
  const Matrix& head(HeadId id) const;
  bool all_finite() const noexcept;
  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

// Head shapes follow the feature schema for `num_slots` candidate slots.
PolicyParams zero_params(std::size_t num_slots);

// Frozen copy of the initial parameters; shared read-only.
using ReferenceSnapshot = std::shared_ptr<const PolicyParams>;
ReferenceSnapshot snapshot(const PolicyParams& params);

// Dense gradient container shaped like PolicyParams.
PolicyParams zeros_like(const PolicyParams& params);

}  // namespace dpa::policy
