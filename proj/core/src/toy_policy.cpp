#include "mmzero/toy_policy.hpp"

#include <algorithm>
#include <cmath>

#include "mmzero/error.hpp"

namespace mmzero::toy {

SoftmaxPolicy::SoftmaxPolicy(int vocab, int length) : vocab_(vocab), length_(length) {
  if (vocab < 2 || vocab > 8 || length < 1 || length > 4) {
    throw UsageError("toy policy needs vocabulary in [2, 8] and length in [1, 4]");
  }
  logits_.assign(static_cast<std::size_t>(length * (vocab + 1) * vocab), 0.0);
}

std::size_t SoftmaxPolicy::index(int position, int context, int symbol) const {
  return static_cast<std::size_t>((position * (vocab_ + 1) + context) * vocab_ + symbol);
}

std::vector<double> SoftmaxPolicy::probabilities(int position, int context) const {
  std::vector<double> p(static_cast<std::size_t>(vocab_));
  const std::size_t base = index(position, context, 0);
  const double hi = *std::max_element(logits_.begin() + static_cast<std::ptrdiff_t>(base),
                                      logits_.begin() + static_cast<std::ptrdiff_t>(base) + vocab_);
  double z = 0.0;
  for (int v = 0; v < vocab_; ++v) {
    p[static_cast<std::size_t>(v)] = std::exp(logits_[base + static_cast<std::size_t>(v)] - hi);
    z += p[static_cast<std::size_t>(v)];
  }
  for (auto& x : p) x /= z;
  return p;
}

Sequence SoftmaxPolicy::sample(std::mt19937_64& rng) const {
  Sequence seq;
  int context = vocab_;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int t = 0; t < length_; ++t) {
    const auto p = probabilities(t, context);
    double u = uni(rng);
    int pick = vocab_ - 1;
    for (int v = 0; v < vocab_; ++v) {
      u -= p[static_cast<std::size_t>(v)];
      if (u < 0.0) {
        pick = v;
        break;
      }
    }
    seq.push_back(pick);
    context = pick;
  }
  return seq;
}

double SoftmaxPolicy::log_prob(const Sequence& seq) const {
  double lp = 0.0;
  int context = vocab_;
  for (int t = 0; t < length_; ++t) {
    const auto p = probabilities(t, context);
    lp += std::log(p[static_cast<std::size_t>(seq[static_cast<std::size_t>(t)])]);
    context = seq[static_cast<std::size_t>(t)];
  }
  return lp;
}

std::vector<double> SoftmaxPolicy::grad_log_prob(const Sequence& seq) const {
  std::vector<double> g(logits_.size(), 0.0);
  int context = vocab_;
  for (int t = 0; t < length_; ++t) {
    const auto p = probabilities(t, context);
    const int chosen = seq[static_cast<std::size_t>(t)];
    for (int v = 0; v < vocab_; ++v) {
      g[index(t, context, v)] += (v == chosen ? 1.0 : 0.0) - p[static_cast<std::size_t>(v)];
    }
    context = chosen;
  }
  return g;
}

double SoftmaxPolicy::kl_along(const Sequence& seq, const SoftmaxPolicy& other) const {
  double kl = 0.0;
  int context = vocab_;
  for (int t = 0; t < length_; ++t) {
    const auto p = probabilities(t, context);
    const auto q = other.probabilities(t, context);
    for (std::size_t v = 0; v < p.size(); ++v) kl += p[v] * std::log(p[v] / q[v]);
    context = seq[static_cast<std::size_t>(t)];
  }
  return kl;
}

std::vector<double> SoftmaxPolicy::grad_kl_along(const Sequence& seq, const SoftmaxPolicy& other) const {
  // d/dz_u KL(p || q) = p_u * (log(p_u / q_u) - KL) for a softmax p = softmax(z).
  std::vector<double> g(logits_.size(), 0.0);
  int context = vocab_;
  for (int t = 0; t < length_; ++t) {
    const auto p = probabilities(t, context);
    const auto q = other.probabilities(t, context);
    double kl = 0.0;
    for (std::size_t v = 0; v < p.size(); ++v) kl += p[v] * std::log(p[v] / q[v]);
    for (int v = 0; v < vocab_; ++v) {
      const auto vi = static_cast<std::size_t>(v);
      g[index(t, context, v)] += p[vi] * (std::log(p[vi] / q[vi]) - kl);
    }
    context = seq[static_cast<std::size_t>(t)];
  }
  return g;
}

}  // namespace mmzero::toy
