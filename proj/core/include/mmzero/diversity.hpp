#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmzero {

// BLEU settings. Defaults: orders 1..4 with uniform weights, add-one smoothing
// on orders >= 2, standard brevity penalty, lower-cased whitespace tokens.
struct BleuConfig {
  int max_order = 4;
  bool smooth_higher_orders = true;
};

double bleu(std::string_view candidate, std::string_view reference, const BleuConfig& cfg = {});

// Symmetric n x n matrix, row-major, zero diagonal, entries in [0, 1].
class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::size_t n = 0) : n_(n), d_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  // Sets both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double v) {
    d_[i * n_ + j] = v;
    d_[j * n_ + i] = v;
  }

 private:
  std::size_t n_;
  std::vector<double> d_;
};

// 1 - (bleu(i, j) + bleu(j, i)) / 2 off the diagonal.
DistanceMatrix distance_matrix(std::span<const std::string> texts, const BleuConfig& cfg = {});

struct Clustering {
  std::vector<std::size_t> assignment;  // ids 0..k-1, numbered by first member
  std::size_t k = 0;
};

// Average-linkage agglomerative clustering. Merges the closest pair of clusters
// while their average distance is <= threshold; ties go to the pair with the
// smallest (first-member, first-member) indices.
Clustering agglomerate(const DistanceMatrix& d, double threshold);

// share[i] = |cluster(i)| / n.
std::vector<double> cluster_shares(const Clustering& c);

// Writes the matrix as CSV (debug aid).
std::string distance_matrix_csv(const DistanceMatrix& d);

}  // namespace mmzero
