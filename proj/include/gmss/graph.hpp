#pragma once

// Electrode graph, combinatorial Laplacian L = D - A, spectral scaling
// Ltilde = 2L/lambda_max - I, and the Chebyshev graph convolution
//   F(X) = sigma( sum_{k=0}^{K-1} T_k(Ltilde) X beta_k ),
//   T_0 = I, T_1 = Ltilde, T_k = 2 Ltilde T_{k-1} - T_{k-2}.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gmss/autodiff.hpp"
#include "gmss/errors.hpp"
#include "gmss/matrix.hpp"
#include "gmss/rng.hpp"

namespace gmss {

// The 62 channel names of Table 1 in the canonical row order of the shipped
// montage: region blocks are contiguous (Pre-Frontal, Frontal, Left Frontal,
// Right Frontal, Left Temporal, Right Temporal, Central, Left Parietal,
// Right Parietal, Occipital), so the identity block permutation is a no-op.
inline const std::vector<std::string>& canonical_channel_names() {
  static const std::vector<std::string> names = {
      "AF3", "FP1", "FPZ", "FP2", "AF4",                       // Pre-Frontal
      "F1",  "FZ",  "F2",  "FC1", "FCZ", "FC2",                // Frontal
      "F7",  "F5",  "F3",  "FT7", "FC5", "FC3",                // Left Frontal
      "F4",  "F6",  "F8",  "FC4", "FC6", "FT8",                // Right Frontal
      "T7",  "C5",  "C3",  "TP7", "CP5", "CP3",                // Left Temporal
      "C4",  "C6",  "T8",  "CP4", "CP6", "TP8",                // Right Temporal
      "C1",  "CZ",  "C2",  "CP1", "CPZ", "CP2", "P1", "PZ", "P2",  // Central
      "P7",  "P5",  "P3",  "PO7", "PO5", "CB1",                // Left Parietal
      "P4",  "P6",  "P8",  "PO6", "PO8", "CB2",                // Right Parietal
      "PO3", "POZ", "PO4", "O1",  "OZ",  "O2"};                // Occipital
  return names;
}

struct ElectrodeGraph {
  std::vector<std::string> names;
  std::vector<std::array<double, 2>> coords;
  Matrix adjacency;

  std::size_t n() const { return names.size(); }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw ConfigError("unknown electrode name: " + name);
  }

  // For programmatic graphs (tests, toy examples).
  static ElectrodeGraph from_adjacency(Matrix a, std::vector<std::string> node_names = {}) {
    ElectrodeGraph g;
    if (node_names.empty())
      for (std::size_t i = 0; i < a.rows(); ++i) node_names.push_back("n" + std::to_string(i));
    g.names = std::move(node_names);
    g.coords.assign(g.names.size(), {0.0, 0.0});
    g.adjacency = std::move(a);
    g.validate(false);
    return g;
  }

  void validate(bool expect_canonical) const {
    const std::size_t n = names.size();
    if (adjacency.rows() != n || adjacency.cols() != n)
      throw ContractError("adjacency " + adjacency.shape_str() + " for " +
                          std::to_string(n) + " electrodes");
    if (coords.size() != n) throw ContractError("coords/names length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      if (adjacency.at(i, i) != 0.0)
        throw ContractError("adjacency has nonzero diagonal at " + std::to_string(i));
      for (std::size_t j = 0; j < n; ++j) {
        const double v = adjacency.at(i, j);
        if (v < 0.0) throw ContractError("adjacency has negative entry");
        if (v != adjacency.at(j, i)) throw ContractError("adjacency not symmetric");
      }
    }
    if (!connected()) throw ContractError("electrode graph is not connected");
    if (expect_canonical) {
      const auto& canon = canonical_channel_names();
      if (n != canon.size())
        throw ConfigError("montage must list " + std::to_string(canon.size()) +
                          " electrodes, got " + std::to_string(n));
      std::vector<std::string> a = names, b = canon;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a != b) throw ConfigError("montage electrode names do not match the Table-1 set");
      for (std::size_t i = 0; i < adjacency.size(); ++i)
        if (adjacency[i] != 0.0 && adjacency[i] != 1.0)
          throw ContractError("default montage adjacency must be 0/1");
    }
  }

  bool connected() const {
    const std::size_t n = names.size();
    if (n == 0) return true;
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack = {0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v)
        if (!seen[v] && adjacency.at(u, v) != 0.0) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
    }
    return count == n;
  }
};

// Montage file: {"electrodes": [{"name","x","y"}], "edges": [[i,j]]}.
inline ElectrodeGraph load_montage(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("montage JSON parse failed: ") + e.what());
  }
  ElectrodeGraph g;
  try {
    for (const auto& e : j.at("electrodes")) {
      g.names.push_back(e.at("name").get<std::string>());
      g.coords.push_back({e.at("x").get<double>(), e.at("y").get<double>()});
    }
    const std::size_t n = g.names.size();
    g.adjacency = Matrix(n, n);
    for (const auto& e : j.at("edges")) {
      const auto i = e.at(0).get<std::int64_t>();
      const auto k = e.at(1).get<std::int64_t>();
      if (i < 0 || k < 0 || i >= static_cast<std::int64_t>(n) ||
          k >= static_cast<std::int64_t>(n) || i == k)
        throw ConfigError("montage edge [" + std::to_string(i) + "," + std::to_string(k) +
                          "] out of range");
      g.adjacency.at(static_cast<std::size_t>(i), static_cast<std::size_t>(k)) = 1.0;
      g.adjacency.at(static_cast<std::size_t>(k), static_cast<std::size_t>(i)) = 1.0;
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("montage JSON structure invalid: ") + e.what());
  }
  g.validate(true);
  return g;
}

// Core L = D - A on a bare adjacency; also serves degenerate graphs (e.g.
// edgeless) that ElectrodeGraph's connectivity invariant excludes.
inline Matrix build_laplacian_from_adjacency(const Matrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw DimensionError("build_laplacian: adjacency not square");
  for (std::size_t i = 0; i < n; ++i) {
    if (a.at(i, i) != 0.0) throw ContractError("build_laplacian: nonzero diagonal");
    for (std::size_t j = i + 1; j < n; ++j) {
      if (a.at(i, j) != a.at(j, i)) throw ContractError("build_laplacian: asymmetric adjacency");
      if (a.at(i, j) < 0.0) throw ContractError("build_laplacian: negative adjacency entry");
    }
  }
  Matrix l = scaled(a, -1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < n; ++j) deg += a.at(i, j);
    l.at(i, i) = deg;
  }
  return l;
}

inline Matrix build_laplacian(const ElectrodeGraph& graph) {
  return build_laplacian_from_adjacency(graph.adjacency);
}

// Power iteration with a fixed start vector (normalized all-ones plus a
// 1e-3*index tilt so eigenvectors orthogonal to 1, the common case for
// Laplacians, are still reachable).
inline double max_eigenvalue(const Matrix& l, double tol = 1e-9,
                             std::size_t max_iter = 10000) {
  if (l.rows() != l.cols()) throw DimensionError("max_eigenvalue: matrix not square");
  const std::size_t n = l.rows();
  if (n == 0) throw ContractError("max_eigenvalue: empty matrix");
  std::vector<double> v(n), w(n);
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = 1.0 + 1e-3 * static_cast<double>(i);
    norm += v[i] * v[i];
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;

  double lambda = 0.0;
  double residual = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += l.at(i, j) * v[j];
      w[i] = s;
    }
    double wnorm = 0.0, ray = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      wnorm += w[i] * w[i];
      ray += w[i] * v[i];
    }
    wnorm = std::sqrt(wnorm);
    if (wnorm == 0.0) return 0.0;  // start vector is in the null space: zero map
    // residual of the eigenpair candidate (v, ray): ||Lv - ray v|| / |ray|
    double rnum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = w[i] - ray * v[i];
      rnum += d * d;
    }
    residual = std::sqrt(rnum) / std::max(std::abs(ray), 1e-300);
    lambda = ray;
    if (residual < tol) return lambda;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wnorm;
  }
  throw NumericError("power iteration did not converge: relative residual " +
                     std::to_string(residual) + " after " + std::to_string(max_iter) +
                     " iterations");
}

struct ScaledLaplacian {
  Matrix L;
  double lambda_max = 0.0;
  Matrix Ltilde;
};

inline ScaledLaplacian scale_laplacian(Matrix l, double lambda_max) {
  if (lambda_max <= 0.0)
    throw ContractError("scale_laplacian: lambda_max must be positive, got " +
                        std::to_string(lambda_max));
  ScaledLaplacian sl;
  sl.Ltilde = scaled(l, 2.0 / lambda_max);
  for (std::size_t i = 0; i < l.rows(); ++i) sl.Ltilde.at(i, i) -= 1.0;
  sl.L = std::move(l);
  sl.lambda_max = lambda_max;
  return sl;
}

inline ScaledLaplacian scaled_laplacian_of(const ElectrodeGraph& g) {
  Matrix l = build_laplacian(g);
  const double lambda = max_eigenvalue(l);
  return scale_laplacian(std::move(l), lambda);
}

// T_0..T_{K-1} by the three-term recurrence.
inline std::vector<Matrix> cheb_polynomials(const Matrix& ltilde, std::size_t k_order) {
  if (ltilde.rows() != ltilde.cols()) throw DimensionError("cheb_polynomials: not square");
  if (k_order == 0) throw ContractError("cheb_polynomials: K must be >= 1");
  std::vector<Matrix> t;
  t.reserve(k_order);
  t.push_back(Matrix::identity(ltilde.rows()));
  if (k_order > 1) t.push_back(ltilde);
  for (std::size_t k = 2; k < k_order; ++k) {
    Matrix next = matmul(ltilde, t[k - 1]);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] = 2.0 * next[i] - t[k - 2][i];
    t.push_back(std::move(next));
  }
  return t;
}

struct ChebFilter {
  std::vector<ParamTensor> betas;

  std::size_t order() const { return betas.size(); }
  std::size_t d_in() const { return betas.at(0).data.rows(); }
  std::size_t d_out() const { return betas.at(0).data.cols(); }

  static ChebFilter init(std::size_t k_order, std::size_t d_in, std::size_t d_out,
                         Rng& rng) {
    if (k_order == 0) throw ContractError("ChebFilter: K must be >= 1");
    ChebFilter f;
    const double bound = std::sqrt(6.0 / static_cast<double>(d_in));
    for (std::size_t k = 0; k < k_order; ++k)
      f.betas.emplace_back("beta_" + std::to_string(k),
                           Matrix::random_uniform(d_in, d_out, -bound, bound, rng));
    return f;
  }

  void check() const {
    if (betas.empty()) throw ContractError("ChebFilter: no beta matrices");
    for (const auto& b : betas)
      if (b.data.rows() != d_in() || b.data.cols() != d_out())
        throw ContractError("ChebFilter: beta shape mismatch at " + b.name);
  }
};

// Differentiable convolution on the tape. `tk` are the precomputed
// T_k(Ltilde) matrices (constants for a fixed graph).
inline Var cheb_conv(Tape& t, Var x, const std::vector<Matrix>& tk, ChebFilter& filter,
                     bool relu_activation = true) {
  filter.check();
  if (tk.size() != filter.order())
    throw DimensionError("cheb_conv: " + std::to_string(tk.size()) + " polynomials for K=" +
                         std::to_string(filter.order()));
  const Matrix& xv = t.value(x);
  if (xv.rows() != tk[0].rows())
    throw DimensionError("cheb_conv: X " + xv.shape_str() + " vs graph of " +
                         std::to_string(tk[0].rows()));
  if (xv.cols() != filter.d_in())
    throw DimensionError("cheb_conv: X has " + std::to_string(xv.cols()) +
                         " features, filter expects " + std::to_string(filter.d_in()));
  std::vector<Var> terms;
  for (std::size_t k = 0; k < filter.order(); ++k) {
    // T_0 = I: skip the graph mixing entirely.
    Var mixed = k == 0 ? x : t.matmul(t.leaf(tk[k]), x);
    terms.push_back(t.matmul(mixed, t.param(filter.betas[k])));
  }
  Var s = sum_vars(t, terms);
  return relu_activation ? t.relu(s) : s;
}

inline Var cheb_conv(Tape& t, Var x, const ScaledLaplacian& sl, ChebFilter& filter,
                     bool relu_activation = true) {
  return cheb_conv(t, x, cheb_polynomials(sl.Ltilde, filter.order()), filter,
                   relu_activation);
}

}  // namespace gmss
