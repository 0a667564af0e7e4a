#include "ldr/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "ldr/errors.hpp"

namespace ldr {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SubriskWeights subrisk_weights(const Dataset& data, const LdrParams& params,
                               int n_mc, Rng& rng) {
  if (n_mc < 1) throw ParameterError("subrisk_weights: n_mc must be >= 1");
  data.validate();
  for (const auto& rec : data.records) {
    if (rec.time_status != TimeStatus::observed) {
      throw ParameterError("subrisk_weights: uncensored subjects only");
    }
  }
  SubriskWeights out;
  out.n_mc = n_mc;
  for (int j = 0; j < params.num_risks(); ++j) {
    for (int k = 0; k < params.num_subrisks(j); ++k) out.atoms.emplace_back(j, k);
  }
  const int atoms = params.total_atoms();
  out.w.setZero(data.size(), atoms);
  Eigen::VectorXd lambda(atoms);
  for (int i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd eta = params.linear_predictors(data.records[i].x);
    for (int m = 0; m < n_mc; ++m) {
      for (int a = 0; a < atoms; ++a) {
        lambda[a] = rng.gamma(params.atom_weight(out.atoms[a].first, out.atoms[a].second),
                              std::exp(eta[a]));
      }
      const double total = lambda.sum();
      if (total > 0.0) out.w.row(i) += lambda.transpose() / total;
    }
    const double row_total = out.w.row(i).sum();
    if (row_total > 0.0) out.w.row(i) /= row_total;
  }
  return out;
}

Representatives representatives(const SubriskWeights& weights, const Dataset& data) {
  if (weights.w.rows() != data.size()) {
    throw ParameterError("representatives: weight rows must match the dataset");
  }
  const int atoms = static_cast<int>(weights.atoms.size());
  const int v = data.num_covariates();
  Representatives out;
  out.atoms = weights.atoms;
  out.x.setZero(atoms, v);
  out.defined.assign(atoms, false);
  for (int a = 0; a < atoms; ++a) {
    const double total = weights.w.col(a).sum();
    if (!(total > 0.0)) continue;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(v);
    for (int i = 0; i < data.size(); ++i) {
      centroid += weights.w(i, a) * data.records[i].x.tail(v);
    }
    out.x.row(a) = centroid / total;
    out.defined[a] = true;
  }
  return out;
}

Eigen::MatrixXd knn_graph(const Eigen::MatrixXd& points, int k_neighbors) {
  const int n = static_cast<int>(points.rows());
  if (k_neighbors < 1) throw ParameterError("knn_graph: k must be >= 1");
  if (n < k_neighbors + 1) {
    throw ParameterError("knn_graph: need at least k+1 points");
  }
  Eigen::MatrixXd full(n, n);
  for (int i = 0; i < n; ++i) {
    full(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      full(i, j) = full(j, i) = (points.row(i) - points.row(j)).norm();
    }
  }
  Eigen::MatrixXd graph = Eigen::MatrixXd::Constant(n, n, kInf);
  graph.diagonal().setZero();
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    // union symmetrization: an edge exists if either endpoint selects the other
    std::partial_sort(order.begin(), order.begin() + k_neighbors + 1, order.end(),
                      [&](int a, int b) { return full(i, a) < full(i, b); });
    int picked = 0;
    for (int idx = 0; idx < n && picked < k_neighbors; ++idx) {
      const int j = order[idx];
      if (j == i) continue;
      graph(i, j) = graph(j, i) = full(i, j);
      ++picked;
    }
  }
  return graph;
}

Eigen::MatrixXd floyd_warshall(Eigen::MatrixXd dist) {
  const int n = static_cast<int>(dist.rows());
  if (dist.cols() != n) throw ParameterError("floyd_warshall: square matrix required");
  for (int mid = 0; mid < n; ++mid) {
    for (int i = 0; i < n; ++i) {
      const double d_im = dist(i, mid);
      if (d_im == kInf) continue;
      for (int j = 0; j < n; ++j) {
        const double via = d_im + dist(mid, j);
        if (via < dist(i, j)) dist(i, j) = via;
      }
    }
  }
  return dist;
}

Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& dist, int dims) {
  const int n = static_cast<int>(dist.rows());
  if (dist.cols() != n) throw ParameterError("classical_mds: square matrix required");
  if (dims < 1 || dims > n) throw ParameterError("classical_mds: bad embedding dimension");
  const Eigen::MatrixXd d2 = dist.array().square();
  const Eigen::MatrixXd center =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd gram = -0.5 * center * d2 * center;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("classical_mds: eigendecomposition failed");
  }
  Eigen::MatrixXd coords(n, dims);
  for (int d = 0; d < dims; ++d) {
    // eigenvalues ascend; take the top ones and clamp negatives
    const int idx = n - 1 - d;
    const double value = std::max(eig.eigenvalues()[idx], 0.0);
    coords.col(d) = eig.eigenvectors().col(idx) * std::sqrt(value);
  }
  return coords;
}

Embedding isomap_embed(const Eigen::MatrixXd& points, int k_neighbors) {
  const int n = static_cast<int>(points.rows());
  if (n < 3) throw ParameterError("isomap_embed: need at least three points");
  Embedding out;
  out.k_neighbors = k_neighbors;
  const Eigen::MatrixXd geo = floyd_warshall(knn_graph(points, k_neighbors));

  // connected components from the geodesic matrix; embed the largest
  std::vector<int> component(n, -1);
  int n_components = 0;
  for (int i = 0; i < n; ++i) {
    if (component[i] >= 0) continue;
    for (int j = 0; j < n; ++j) {
      if (geo(i, j) < kInf) component[j] = n_components;
    }
    ++n_components;
  }
  std::vector<int> sizes(n_components, 0);
  for (int i = 0; i < n; ++i) ++sizes[component[i]];
  const int biggest = static_cast<int>(
      std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  for (int i = 0; i < n; ++i) {
    if (component[i] == biggest) {
      out.kept.push_back(i);
    } else {
      out.excluded.push_back(i);
    }
  }
  const int m = static_cast<int>(out.kept.size());
  Eigen::MatrixXd sub(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) sub(i, j) = geo(out.kept[i], out.kept[j]);
  }
  out.coords = classical_mds(sub, 2);
  return out;
}

}  // namespace ldr
