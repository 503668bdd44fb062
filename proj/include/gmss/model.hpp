#pragma once

// The GMSS network: shared Chebyshev extractor, four task heads (spatial
// jigsaw, frequency jigsaw, projection, classification), learnable
// log-variance task weights, and the multitask forward pass.
//
// Total loss with s_t = log sigma_t^2 (exact reparameterization of the
// sigma form; keeps sigma > 0 without constraints):
//   L = e^{-s_s} L_s + e^{-s_f} L_f + 1/2 e^{-s_p} L_p
//       + 1/2 (s_s + s_f + s_p) + psi (e^{-s_c} L_c + 1/2 s_c)

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "gmss/autodiff.hpp"
#include "gmss/bytes.hpp"
#include "gmss/contrastive.hpp"
#include "gmss/errors.hpp"
#include "gmss/graph.hpp"
#include "gmss/matrix.hpp"
#include "gmss/puzzles.hpp"
#include "gmss/rng.hpp"

namespace gmss {

struct GmssConfig {
  std::size_t k_cheb = 2;      // Chebyshev terms
  std::size_t bands = 5;       // per-electrode input features
  std::size_t node_out = 32;   // per-electrode extractor output
  std::size_t hidden1 = 512;   // head widths: in -> hidden1 -> hidden2 -> out
  std::size_t hidden2 = 128;
  std::size_t k_spatial = 128;  // spatial permutation classes
  std::size_t k_freq = 120;     // frequency permutation classes
  std::size_t proj_dim = 64;    // projection head output
  std::size_t classes = 3;      // emotion classes
  std::size_t m_views = 8;      // contrastive views per sample
  double tau = 0.5;             // contrastive temperature
};

// Three fully connected layers, ReLU between them, raw output.
struct Mlp3 {
  ParamTensor w1, b1, w2, b2, w3, b3;

  static Mlp3 init(const std::string& prefix, std::size_t in, std::size_t h1,
                   std::size_t h2, std::size_t out, Rng& rng) {
    auto u = [&](std::size_t r, std::size_t c) {
      const double bound = std::sqrt(6.0 / static_cast<double>(r));
      return Matrix::random_uniform(r, c, -bound, bound, rng);
    };
    Mlp3 m;
    m.w1 = ParamTensor(prefix + ".w1", u(in, h1));
    m.b1 = ParamTensor(prefix + ".b1", Matrix(1, h1));
    m.w2 = ParamTensor(prefix + ".w2", u(h1, h2));
    m.b2 = ParamTensor(prefix + ".b2", Matrix(1, h2));
    m.w3 = ParamTensor(prefix + ".w3", u(h2, out));
    m.b3 = ParamTensor(prefix + ".b3", Matrix(1, out));
    return m;
  }

  Var forward(Tape& t, Var x) {
    Var h1 = t.relu(t.add_rowvec(t.matmul(x, t.param(w1)), t.param(b1)));
    Var h2 = t.relu(t.add_rowvec(t.matmul(h1, t.param(w2)), t.param(b2)));
    return t.add_rowvec(t.matmul(h2, t.param(w3)), t.param(b3));
  }

  std::vector<ParamTensor*> params() { return {&w1, &b1, &w2, &b2, &w3, &b3}; }
};

struct GmssModel {
  GmssConfig cfg;
  std::size_t n_nodes = 0;
  ChebFilter filter;
  Mlp3 head_s, head_f, head_p, head_c;
  ParamTensor log_var_s, log_var_f, log_var_p, log_var_c;

  std::size_t feature_dim() const { return n_nodes * cfg.node_out; }

  static GmssModel init(const GmssConfig& cfg, std::size_t n_nodes, Rng& rng) {
    GmssModel m;
    m.cfg = cfg;
    m.n_nodes = n_nodes;
    m.filter = ChebFilter::init(cfg.k_cheb, cfg.bands, cfg.node_out, rng);
    const std::size_t fd = m.feature_dim();
    m.head_s = Mlp3::init("head_s", fd, cfg.hidden1, cfg.hidden2, cfg.k_spatial, rng);
    m.head_f = Mlp3::init("head_f", fd, cfg.hidden1, cfg.hidden2, cfg.k_freq, rng);
    m.head_p = Mlp3::init("head_p", fd, cfg.hidden1, cfg.hidden2, cfg.proj_dim, rng);
    m.head_c = Mlp3::init("head_c", fd, cfg.hidden1, cfg.hidden2, cfg.classes, rng);
    for (auto [p, name] : {std::pair{&m.log_var_s, "log_var_s"},
                           std::pair{&m.log_var_f, "log_var_f"},
                           std::pair{&m.log_var_p, "log_var_p"},
                           std::pair{&m.log_var_c, "log_var_c"}}) {
      *p = ParamTensor(name, Matrix(1, 1));  // log sigma^2 = 0, sigma = 1
      p->decay_exempt = true;
    }
    return m;
  }

  std::vector<ParamTensor*> params() {
    std::vector<ParamTensor*> ps;
    for (auto& b : filter.betas) ps.push_back(&b);
    for (Mlp3* h : {&head_s, &head_f, &head_p, &head_c})
      for (ParamTensor* p : h->params()) ps.push_back(p);
    for (ParamTensor* p : {&log_var_s, &log_var_f, &log_var_p, &log_var_c})
      ps.push_back(p);
    return ps;
  }

  void zero_grads() {
    for (ParamTensor* p : params()) p->zero_grad();
  }
};

// Extractor over a list of samples: each 62x5 matrix -> cheb_conv -> one
// 1x1984 row; rows concatenated into a batch.
inline Var extract_features(Tape& t, GmssModel& model, const std::vector<Matrix>& tk,
                            const std::vector<const Matrix*>& xs) {
  if (xs.empty()) throw ContractError("extract_features: empty batch");
  std::vector<Var> rows;
  rows.reserve(xs.size());
  for (const Matrix* x : xs) {
    Var conv = cheb_conv(t, t.leaf(*x), tk, model.filter);
    rows.push_back(t.reshape(conv, 1, model.feature_dim()));
  }
  return rows.size() == 1 ? rows[0] : t.concat_rows(rows);
}

// Single-sample eager form: the flattened (channel-major) extractor output.
inline Matrix feature_extract(const Matrix& x, const ScaledLaplacian& sl, GmssModel& model) {
  Tape t;
  auto tk = cheb_polynomials(sl.Ltilde, model.filter.order());
  return t.value(extract_features(t, model, tk, {&x}));
}

// Mean softmax cross-entropy of puzzle logits against pseudo labels in 1..k.
inline Var puzzle_loss(Tape& t, Var logits, const std::vector<int>& pseudo_labels) {
  const Matrix& lv = t.value(logits);
  std::vector<int> zero_based;
  zero_based.reserve(pseudo_labels.size());
  for (int l : pseudo_labels) {
    if (l < 1 || static_cast<std::size_t>(l) > lv.cols())
      throw ContractError("puzzle_loss: pseudo label " + std::to_string(l) +
                          " outside 1.." + std::to_string(lv.cols()));
    zero_based.push_back(l - 1);
  }
  return t.cross_entropy_softmax(logits, zero_based);
}

struct TaskLosses {
  double l_s = 0.0, l_f = 0.0, l_p = 0.0, l_c = 0.0;
  int psi = 0;
};

// Differentiable Eq.-12/13 combination; pass an invalid Var for l_c when
// psi = 0 (the classification branch is absent from the graph entirely).
inline Var total_loss(Tape& t, Var l_s, Var l_f, Var l_p, Var l_c, int psi,
                      GmssModel& model) {
  if (psi != 0 && psi != 1) throw ContractError("total_loss: psi must be 0 or 1");
  Var ss = t.param(model.log_var_s);
  Var sf = t.param(model.log_var_f);
  Var sp = t.param(model.log_var_p);
  Var weighted_s = t.matmul(t.exp(t.mul_scalar(ss, -1.0)), l_s);
  Var weighted_f = t.matmul(t.exp(t.mul_scalar(sf, -1.0)), l_f);
  Var weighted_p = t.mul_scalar(t.matmul(t.exp(t.mul_scalar(sp, -1.0)), l_p), 0.5);
  Var reg = t.mul_scalar(sum_vars(t, {ss, sf, sp}), 0.5);
  Var total = sum_vars(t, {weighted_s, weighted_f, weighted_p, reg});
  if (psi == 1) {
    if (!l_c.valid()) throw ContractError("total_loss: psi = 1 requires L_c");
    Var sc = t.param(model.log_var_c);
    Var weighted_c = t.matmul(t.exp(t.mul_scalar(sc, -1.0)), l_c);
    total = sum_vars(t, {total, weighted_c, t.mul_scalar(sc, 0.5)});
  }
  return total;
}

struct MultitaskBatch {
  std::vector<const Matrix*> xs;
  std::vector<int> labels;  // 0-based class ids; may be empty when psi = 0
};

struct MultitaskResult {
  Var total;
  TaskLosses losses;
};

// One multitask step on the tape. Per sample, in batch order: one spatial
// puzzle draw, one frequency puzzle draw, then M augmentation draws (each a
// spatial then a frequency index). With psi = 1 the untransformed sample
// additionally feeds the classification head.
inline MultitaskResult forward_multitask(Tape& t, GmssModel& model,
                                         const std::vector<Matrix>& tk,
                                         const MultitaskBatch& batch,
                                         const PermutationSet& spatial_set,
                                         const PermutationSet& freq_set,
                                         const BlockPartition& part, int psi, Rng& rng) {
  if (batch.xs.empty()) throw ContractError("forward_multitask: empty batch");
  if (psi == 1 && batch.labels.size() != batch.xs.size())
    throw ContractError("forward_multitask: psi = 1 needs one label per sample");
  if (spatial_set.k() != model.cfg.k_spatial)
    throw ConfigError("spatial permutation set size " + std::to_string(spatial_set.k()) +
                      " != configured k_spatial " + std::to_string(model.cfg.k_spatial));
  if (freq_set.k() != model.cfg.k_freq)
    throw ConfigError("frequency permutation set size " + std::to_string(freq_set.k()) +
                      " != configured k_freq " + std::to_string(model.cfg.k_freq));

  const std::size_t b = batch.xs.size();
  const std::size_t m = model.cfg.m_views;
  std::vector<Matrix> spatial_xs, freq_xs, view_xs;
  std::vector<int> spatial_labels, freq_labels;
  spatial_xs.reserve(b);
  freq_xs.reserve(b);
  view_xs.reserve(b * m);
  for (const Matrix* x : batch.xs) {
    auto sp = random_puzzle(*x, spatial_set, PuzzleKind::kSpatial, &part, rng);
    spatial_xs.push_back(std::move(sp.x));
    spatial_labels.push_back(sp.label);
    auto fp = random_puzzle(*x, freq_set, PuzzleKind::kFrequency, nullptr, rng);
    freq_xs.push_back(std::move(fp.x));
    freq_labels.push_back(fp.label);
    for (auto& v : augment(*x, m, spatial_set, freq_set, part, rng))
      view_xs.push_back(std::move(v));
  }

  auto ptrs = [](const std::vector<Matrix>& ms) {
    std::vector<const Matrix*> ps;
    ps.reserve(ms.size());
    for (const auto& m2 : ms) ps.push_back(&m2);
    return ps;
  };

  Var l_s = puzzle_loss(t, model.head_s.forward(t, extract_features(t, model, tk, ptrs(spatial_xs))),
                        spatial_labels);
  Var l_f = puzzle_loss(t, model.head_f.forward(t, extract_features(t, model, tk, ptrs(freq_xs))),
                        freq_labels);
  Var proj = model.head_p.forward(t, extract_features(t, model, tk, ptrs(view_xs)));
  Var l_p = contrastive_loss(t, proj, b, m, model.cfg.tau);

  MultitaskResult r;
  Var l_c;
  if (psi == 1) {
    Var logits = model.head_c.forward(t, extract_features(t, model, tk, batch.xs));
    for (int y : batch.labels)
      if (y < 0 || static_cast<std::size_t>(y) >= model.cfg.classes)
        throw ContractError("forward_multitask: class label " + std::to_string(y) +
                            " outside 0.." + std::to_string(model.cfg.classes - 1));
    l_c = t.cross_entropy_softmax(logits, batch.labels);
    r.losses.l_c = t.value(l_c)[0];
  }
  r.losses.l_s = t.value(l_s)[0];
  r.losses.l_f = t.value(l_f)[0];
  r.losses.l_p = t.value(l_p)[0];
  r.losses.psi = psi;
  r.total = total_loss(t, l_s, l_f, l_p, l_c, psi, model);
  return r;
}

// -- checkpoint io -----------------------------------------------------------
// "GMSSCKPT" magic, u32 version, then one blob per parameter in params()
// order: u32 name length, name bytes, u32 rows, u32 cols, rows*cols doubles,
// everything little-endian. Bit-exact round trip.

inline constexpr char kCheckpointMagic[8] = {'G', 'M', 'S', 'S', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(std::ostream& os, GmssModel& model) {
  os.write(kCheckpointMagic, 8);
  detail::put_u32(os, kCheckpointVersion);
  for (ParamTensor* p : model.params()) {
    detail::put_u32(os, static_cast<std::uint32_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    detail::put_u32(os, static_cast<std::uint32_t>(p->data.rows()));
    detail::put_u32(os, static_cast<std::uint32_t>(p->data.cols()));
    for (std::size_t i = 0; i < p->data.size(); ++i) detail::put_f64(os, p->data[i]);
  }
  if (!os) throw FormatError("checkpoint write failed");
}

inline void load_checkpoint(std::istream& is, GmssModel& model) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw FormatError("not a GMSS checkpoint (bad magic)");
  const auto version = detail::get_u32(is, "checkpoint");
  if (version != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  auto params = model.params();
  // Stage everything first so a corrupt file cannot leave the model half-loaded.
  std::vector<Matrix> staged(params.size());
  std::vector<char> loaded(params.size(), 0);
  while (true) {
    is.peek();
    if (is.eof()) break;
    const auto name_len = detail::get_u32(is, "checkpoint");
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is) throw FormatError("checkpoint truncated while reading blob name");
    const auto rows = detail::get_u32(is, "checkpoint");
    const auto cols = detail::get_u32(is, "checkpoint");
    std::size_t found = params.size();
    for (std::size_t i = 0; i < params.size(); ++i)
      if (params[i]->name == name) {
        found = i;
        break;
      }
    if (found == params.size()) throw FormatError("checkpoint has unknown parameter '" + name + "'");
    if (loaded[found]) throw FormatError("checkpoint lists parameter '" + name + "' twice");
    ParamTensor* p = params[found];
    if (p->data.rows() != rows || p->data.cols() != cols)
      throw FormatError("checkpoint shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                        " for '" + name + "', model has " + p->data.shape_str());
    Matrix blob(rows, cols);
    for (std::size_t i = 0; i < blob.size(); ++i) blob[i] = detail::get_f64(is, "checkpoint");
    staged[found] = std::move(blob);
    loaded[found] = 1;
  }
  for (std::size_t i = 0; i < params.size(); ++i)
    if (!loaded[i]) throw FormatError("checkpoint is missing parameter '" + params[i]->name + "'");
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->data = std::move(staged[i]);
}

inline void save_checkpoint_file(const std::string& path, GmssModel& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open checkpoint for writing: " + path);
  save_checkpoint(os, model);
}

inline void load_checkpoint_file(const std::string& path, GmssModel& model) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open checkpoint: " + path);
  load_checkpoint(is, model);
}

}  // namespace gmss
