#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace mmzero::toy {

using Sequence = std::vector<int>;

// Autoregressive categorical policy with one logit table per (position,
// previous symbol). Position 0 conditions on a start symbol with index `vocab`.
class SoftmaxPolicy {
 public:
  SoftmaxPolicy(int vocab, int length);

  int vocab() const { return vocab_; }
  int length() const { return length_; }
  std::size_t parameter_count() const { return logits_.size(); }

  std::span<double> logits() { return logits_; }
  std::span<const double> logits() const { return logits_; }

  // Index of logit (position, context, symbol) in logits().
  std::size_t index(int position, int context, int symbol) const;

  std::vector<double> probabilities(int position, int context) const;
  Sequence sample(std::mt19937_64& rng) const;
  double log_prob(const Sequence& seq) const;
  // Gradient of log_prob(seq) w.r.t. every logit.
  std::vector<double> grad_log_prob(const Sequence& seq) const;

  // Sum over the steps of seq of KL(this(.|ctx) || other(.|ctx)).
  double kl_along(const Sequence& seq, const SoftmaxPolicy& other) const;
  std::vector<double> grad_kl_along(const Sequence& seq, const SoftmaxPolicy& other) const;

 private:
  int vocab_;
  int length_;
  std::vector<double> logits_;
};

}  // namespace mmzero::toy
