#pragma once

// View augmentation and the aggregated-positive contrastive loss.
//
// For sample n with M views and row-normalized projections Z:
//   g+_n = sum_{i<j} exp(sim(Z_ni, Z_nj)/tau)
//   g-_n = sum_{o, t != n, w} exp(sim(Z_no, Z_tw)/tau)
//   l_n  = -log(g+_n / (g+_n + g-_n)),   L_p = (1/N) sum_n l_n
//
// Positives are aggregated inside one log per sample (not per-pair NT-Xent).
// On the tape this is built from ones-vector reductions of the full
// exp-similarity matrix: with intra_n the sum over sample n's own M x M
// block (diagonal included) and total_n the sum over its M x (NM) row strip,
//   g+_n = (intra_n - M e^{1/tau}) / 2,   g-_n = total_n - intra_n,
// the diagonal being the constant e^{1/tau} because rows are normalized.
// With N = 1 the strip equals the block bitwise, so g- and L_p are exactly 0.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gmss/autodiff.hpp"
#include "gmss/errors.hpp"
#include "gmss/matrix.hpp"
#include "gmss/puzzles.hpp"
#include "gmss/rng.hpp"

namespace gmss {

inline double cosine_sim(const Matrix& u, const Matrix& v) {
  if (u.rows() != 1 && u.cols() != 1) throw DimensionError("cosine_sim: u is not a vector");
  if (v.rows() != 1 && v.cols() != 1) throw DimensionError("cosine_sim: v is not a vector");
  if (u.size() != v.size())
    throw DimensionError("cosine_sim: length mismatch " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
  double uu = 0.0, vv = 0.0, uv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uu += u[i] * u[i];
    vv += v[i] * v[i];
    uv += u[i] * v[i];
  }
  const double nu = std::sqrt(uu), nv = std::sqrt(vv);
  if (nu <= 1e-12 || nv <= 1e-12) throw NumericError("cosine_sim: near-zero norm");
  return uv / (nu * nv);
}

// M stochastic views of one sample: spatial scramble then frequency
// scramble, both drawn uniformly (spatial draw first, then frequency, per
// view in order).
inline std::vector<Matrix> augment(const Matrix& x, std::size_t m_views,
                                   const PermutationSet& spatial_set,
                                   const PermutationSet& freq_set,
                                   const BlockPartition& part, Rng& rng) {
  if (m_views < 1) throw ContractError("augment: M must be >= 1");
  std::vector<Matrix> views;
  views.reserve(m_views);
  for (std::size_t v = 0; v < m_views; ++v) {
    const auto s = rng.next_below(static_cast<std::uint32_t>(spatial_set.k()));
    const auto f = rng.next_below(static_cast<std::uint32_t>(freq_set.k()));
    views.push_back(
        apply_frequency(apply_spatial(x, spatial_set.perms[s], part), freq_set.perms[f]));
  }
  return views;
}

struct ViewBatch {
  std::size_t n_samples = 0;
  std::size_t m_views = 0;
  std::vector<Matrix> views;         // row-major by sample: view (n, m) at n*M + m
  std::vector<std::size_t> origin;   // origin[i] = sample index of views[i]

  void validate() const {
    if (views.size() != n_samples * m_views || origin.size() != views.size())
      throw ContractError("ViewBatch: expected N*M views");
    for (std::size_t i = 0; i < origin.size(); ++i)
      if (origin[i] != i / m_views)
        throw ContractError("ViewBatch: origin indices must group views by sample");
  }
};

inline ViewBatch make_view_batch(const std::vector<const Matrix*>& samples,
                                 std::size_t m_views, const PermutationSet& spatial_set,
                                 const PermutationSet& freq_set, const BlockPartition& part,
                                 Rng& rng) {
  ViewBatch b;
  b.n_samples = samples.size();
  b.m_views = m_views;
  for (std::size_t n = 0; n < samples.size(); ++n) {
    auto views = augment(*samples[n], m_views, spatial_set, freq_set, part, rng);
    for (auto& v : views) {
      b.views.push_back(std::move(v));
      b.origin.push_back(n);
    }
  }
  b.validate();
  return b;
}

// Differentiable L_p. `z` holds the N*M projection rows grouped by sample.
inline Var contrastive_loss(Tape& t, Var z, std::size_t n_samples, std::size_t m_views,
                            double tau) {
  if (n_samples < 1) throw ContractError("contrastive_loss: N must be >= 1");
  if (m_views < 2) throw ContractError("contrastive_loss: M must be >= 2, positives empty");
  if (!(tau > 0.0)) throw ContractError("contrastive_loss: tau must be positive");
  const Matrix& zv = t.value(z);
  const std::size_t total_rows = n_samples * m_views;
  if (zv.rows() != total_rows)
    throw DimensionError("contrastive_loss: " + std::to_string(zv.rows()) + " rows for N*M=" +
                         std::to_string(total_rows));

  Var zn = t.l2_normalize_rows(z);
  Var e_sim = t.exp(t.mul_scalar(t.matmul(zn, zn, false, true), 1.0 / tau));

  Var ones_col = t.leaf(Matrix::filled(total_rows, 1, 1.0));
  const double diag_const = std::exp(1.0 / tau) * static_cast<double>(m_views);

  std::vector<Var> losses;
  for (std::size_t n = 0; n < n_samples; ++n) {
    Matrix ind(1, total_rows);
    for (std::size_t m = 0; m < m_views; ++m) ind[n * m_views + m] = 1.0;
    Var ind_row = t.leaf(ind);
    Var ind_col = t.leaf(ind.reshaped(total_rows, 1));
    Var strip = t.matmul(ind_row, e_sim);                      // 1 x NM row sums
    // both reductions share strip and the same gemm shape, so for N = 1 they
    // agree bitwise and g- cancels to exactly zero
    Var total_n = t.matmul(strip, ones_col);                   // 1x1
    Var intra_n = t.matmul(strip, ind_col);                    // 1x1 block sum
    Var g_pos = t.mul_scalar(t.add_scalar(intra_n, -diag_const), 0.5);
    Var g_neg = sub(t, total_n, intra_n);
    losses.push_back(sub(t, t.log(t.add(g_pos, g_neg)), t.log(g_pos)));
  }
  return t.mul_scalar(sum_vars(t, losses), 1.0 / static_cast<double>(n_samples));
}

// Value-only convenience for tests and diagnostics.
inline double contrastive_loss_value(const Matrix& z, std::size_t n_samples,
                                     std::size_t m_views, double tau) {
  Tape t;
  return t.value(contrastive_loss(t, t.leaf(z), n_samples, m_views, tau))[0];
}

}  // namespace gmss
