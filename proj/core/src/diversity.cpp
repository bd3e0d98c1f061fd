#include "mmzero/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "mmzero/error.hpp"
#include "text_util.hpp"

namespace mmzero {

namespace {

using Tokens = std::vector<std::string>;

std::map<std::vector<std::string_view>, std::size_t> ngram_counts(const Tokens& toks, std::size_t order) {
  std::map<std::vector<std::string_view>, std::size_t> counts;
  if (toks.size() < order) return counts;
  for (std::size_t i = 0; i + order <= toks.size(); ++i) {
    std::vector<std::string_view> key;
    key.reserve(order);
    for (std::size_t k = 0; k < order; ++k) key.emplace_back(toks[i + k]);
    ++counts[key];
  }
  return counts;
}

}  // namespace

double bleu(std::string_view candidate, std::string_view reference, const BleuConfig& cfg) {
  const Tokens cand = detail::split_whitespace(detail::ascii_lower(candidate));
  const Tokens ref = detail::split_whitespace(detail::ascii_lower(reference));
  if (cand.empty() || ref.empty()) return 0.0;

  double log_sum = 0.0;
  for (int order = 1; order <= cfg.max_order; ++order) {
    const auto n = static_cast<std::size_t>(order);
    const auto cand_counts = ngram_counts(cand, n);
    const auto ref_counts = ngram_counts(ref, n);
    std::size_t matched = 0;
    std::size_t total = 0;
    for (const auto& [gram, count] : cand_counts) {
      total += count;
      if (auto it = ref_counts.find(gram); it != ref_counts.end()) matched += std::min(count, it->second);
    }
    double precision;
    if (order >= 2 && cfg.smooth_higher_orders) {
      precision = static_cast<double>(matched + 1) / static_cast<double>(total + 1);
    } else {
      if (total == 0 || matched == 0) return 0.0;
      precision = static_cast<double>(matched) / static_cast<double>(total);
    }
    if (precision <= 0.0) return 0.0;
    log_sum += std::log(precision) / cfg.max_order;
  }

  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  const double brevity = c < r ? std::exp(1.0 - r / c) : 1.0;
  return std::clamp(brevity * std::exp(log_sum), 0.0, 1.0);
}

DistanceMatrix distance_matrix(std::span<const std::string> texts, const BleuConfig& cfg) {
  DistanceMatrix d(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    for (std::size_t j = i + 1; j < texts.size(); ++j) {
      const double sim = (bleu(texts[i], texts[j], cfg) + bleu(texts[j], texts[i], cfg)) / 2.0;
      d.set(i, j, std::clamp(1.0 - sim, 0.0, 1.0));
    }
  }
  return d;
}

// Linkages within this distance count as tied.
constexpr double kLinkTolerance = 1e-12;

Clustering agglomerate(const DistanceMatrix& d, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw UsageError("clustering threshold must be in (0, 1]");
  const std::size_t n = d.size();

  // Active clusters are keyed by their smallest member. Linkage between active
  // clusters is kept as a running average via the Lance-Williams update.
  std::vector<std::size_t> size(n, 1);
  std::vector<bool> active(n, true);
  std::vector<std::size_t> root(n);
  for (std::size_t i = 0; i < n; ++i) root[i] = i;
  std::vector<double> link(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) link[i * n + j] = d(i, j);
  }

  for (std::size_t merges = 0; merges + 1 < n; ++merges) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = n;
    std::size_t bj = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        if (link[i * n + j] < best - kLinkTolerance) {
          best = link[i * n + j];
          bi = i;
          bj = j;
        }
      }
    }
    if (bi == n || best > threshold + kLinkTolerance) break;

    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double merged = (static_cast<double>(size[bi]) * link[bi * n + k] +
                             static_cast<double>(size[bj]) * link[bj * n + k]) /
                            static_cast<double>(size[bi] + size[bj]);
      link[bi * n + k] = merged;
      link[k * n + bi] = merged;
    }
    size[bi] += size[bj];
    active[bj] = false;
    for (auto& r : root) {
      if (r == bj) r = bi;
    }
  }

  Clustering c;
  c.assignment.resize(n);
  std::map<std::size_t, std::size_t> ids;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = ids.emplace(root[i], ids.size());
    c.assignment[i] = it->second;
  }
  c.k = ids.size();
  return c;
}

std::vector<double> cluster_shares(const Clustering& c) {
  const std::size_t n = c.assignment.size();
  std::vector<std::size_t> sizes(c.k, 0);
  for (auto id : c.assignment) ++sizes.at(id);
  std::vector<double> shares(n);
  for (std::size_t i = 0; i < n; ++i) {
    shares[i] = static_cast<double>(sizes[c.assignment[i]]) / static_cast<double>(n);
  }
  return shares;
}

std::string distance_matrix_csv(const DistanceMatrix& d) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (j) out << ',';
      out << d(i, j);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace mmzero
