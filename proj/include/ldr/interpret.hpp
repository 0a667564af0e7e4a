#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ldr/data.hpp"
#include "ldr/model.hpp"
#include "ldr/rng.hpp"

namespace ldr {

// Monte-Carlo estimates of w_ijk = E[lambda_ijk / sum lambda], the share of
// subject i's instantaneous risk carried by atom (j, k). Rows renormalize the
// averaged shares to sum to one.
struct SubriskWeights {
  Eigen::MatrixXd w;                       // n x total_atoms, risk-major columns
  std::vector<std::pair<int, int>> atoms;  // (risk, subrisk) per column, 0-based
  int n_mc = 0;
};

// data must contain uncensored subjects only.
SubriskWeights subrisk_weights(const Dataset& data, const LdrParams& params,
                               int n_mc, Rng& rng);

struct Representatives {
  Eigen::MatrixXd x;                       // one row per atom, V columns (no intercept)
  std::vector<std::pair<int, int>> atoms;  // (risk, subrisk), 0-based
  std::vector<bool> defined;               // false when the atom drew zero weight
};

// Weighted covariate centroid sum_i w_ijk x_i / sum_i w_ijk per atom.
Representatives representatives(const SubriskWeights& weights, const Dataset& data);

struct Embedding {
  Eigen::MatrixXd coords;     // m x 2, centered
  std::vector<int> kept;      // input indices embedded (largest component)
  std::vector<int> excluded;  // points outside the largest component
  int k_neighbors = 5;
};

// Symmetrized k-NN graph with Euclidean edge lengths; infinity marks absent
// edges and the diagonal is zero.
Eigen::MatrixXd knn_graph(const Eigen::MatrixXd& points, int k_neighbors);

// All-pairs shortest paths in place of a distance matrix with +inf gaps.
Eigen::MatrixXd floyd_warshall(Eigen::MatrixXd dist);

// Classical multidimensional scaling of a distance matrix into dims columns;
// negative eigenvalues of the centered Gram matrix are clamped to zero.
Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& dist, int dims);

// k-NN geodesics + 2-D classical MDS. A disconnected graph embeds the
// largest component and reports the rest as excluded.
Embedding isomap_embed(const Eigen::MatrixXd& points, int k_neighbors = 5);

}  // namespace ldr
