#pragma once

// Optimization, training modes, splits, linear probe, metrics.
//
// Stream discipline: standalone train()/probe calls draw from the fixed
// kShuffle/kPuzzleDraw/kProbeInit streams of the config seed. run_experiment
// gives fold f its own streams kFoldBase + 4f + {0 init, 1 shuffle, 2 puzzle,
// 3 probe} so folds are independent and the whole experiment is reproducible
// from one seed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gmss/data.hpp"
#include "gmss/errors.hpp"
#include "gmss/model.hpp"

namespace gmss {

// -- adam ---------------------------------------------------------------------

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 8e-5;
};

struct AdamState {
  AdamConfig cfg;
  std::uint64_t t = 0;
  std::vector<Matrix> m, v;

  static AdamState init(const std::vector<ParamTensor*>& params, AdamConfig cfg) {
    AdamState st;
    st.cfg = cfg;
    for (const ParamTensor* p : params) {
      st.m.emplace_back(p->data.rows(), p->data.cols());
      st.v.emplace_back(p->data.rows(), p->data.cols());
    }
    return st;
  }
};

// Classic Adam with bias correction. Coupled L2: g <- g + wd * theta before
// the moment update, skipped for decay-exempt parameters. A non-finite
// gradient anywhere aborts before any state is touched.
inline void adam_step(const std::vector<ParamTensor*>& params, AdamState& st) {
  if (params.size() != st.m.size())
    throw ContractError("adam_step: " + std::to_string(params.size()) + " params for " +
                        std::to_string(st.m.size()) + " moment slots");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->grad.rows() != st.m[i].rows() || params[i]->grad.cols() != st.m[i].cols())
      throw ContractError("adam_step: shape drift on " + params[i]->name);
    for (double g : params[i]->grad.values())
      if (!std::isfinite(g))
        throw NumericError("adam_step: non-finite gradient in " + params[i]->name);
  }
  st.t += 1;
  const double bc1 = 1.0 - std::pow(st.cfg.beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(st.cfg.beta2, static_cast<double>(st.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParamTensor& p = *params[i];
    const double wd = p.decay_exempt ? 0.0 : st.cfg.weight_decay;
    for (std::size_t k = 0; k < p.data.size(); ++k) {
      const double g = p.grad[k] + wd * p.data[k];
      st.m[i][k] = st.cfg.beta1 * st.m[i][k] + (1.0 - st.cfg.beta1) * g;
      st.v[i][k] = st.cfg.beta2 * st.v[i][k] + (1.0 - st.cfg.beta2) * g * g;
      const double mhat = st.m[i][k] / bc1;
      const double vhat = st.v[i][k] / bc2;
      p.data[k] -= st.cfg.lr * mhat / (std::sqrt(vhat) + st.cfg.eps);
    }
  }
}

// -- configuration ------------------------------------------------------------

enum class TrainMode { Unsupervised, Supervised };

inline std::string mode_name(TrainMode m) {
  return m == TrainMode::Unsupervised ? "unsupervised" : "supervised";
}

struct TrainConfig {
  TrainMode mode = TrainMode::Supervised;
  std::size_t epochs = 200;
  std::size_t batch_size = 100;
  std::size_t m_views = 8;
  double tau = 0.5;
  std::size_t k_cheb = 2;
  std::size_t k_spatial = 128;
  std::size_t k_freq = 120;
  std::uint64_t seed = 0;
  AdamConfig adam;
  std::size_t probe_epochs = 300;

  void validate() const {
    if (epochs == 0) throw ConfigError("train config: epochs must be positive");
    if (batch_size == 0) throw ConfigError("train config: batch size must be positive");
    if (m_views < 2) throw ConfigError("train config: M must be at least 2");
    if (!(tau > 0.0)) throw ConfigError("train config: tau must be > 0");
    if (k_cheb == 0) throw ConfigError("train config: K must be positive");
    if (k_spatial < 2 || k_freq < 2)
      throw ConfigError("train config: permutation class counts must be at least 2");
    if (!(adam.lr > 0.0)) throw ConfigError("train config: learning rate must be > 0");
    if (adam.weight_decay < 0.0) throw ConfigError("train config: weight decay must be >= 0");
    if (probe_epochs == 0) throw ConfigError("train config: probe epochs must be positive");
  }
};

inline GmssConfig model_config_for(const TrainConfig& tc, std::uint32_t classes) {
  GmssConfig g;
  g.k_cheb = tc.k_cheb;
  g.k_spatial = tc.k_spatial;
  g.k_freq = tc.k_freq;
  g.m_views = tc.m_views;
  g.tau = tc.tau;
  g.classes = classes;
  return g;
}

struct TrainSetup {
  const ElectrodeGraph* graph = nullptr;
  const BlockPartition* part = nullptr;
  ScaledLaplacian sl;
  std::vector<Matrix> tk;
  PermutationSet sset, fset;
};

inline TrainSetup make_setup(const ElectrodeGraph& graph, const BlockPartition& part,
                             const TrainConfig& cfg) {
  cfg.validate();
  TrainSetup s;
  s.graph = &graph;
  s.part = &part;
  s.sl = scaled_laplacian_of(graph);
  s.tk = cheb_polynomials(s.sl.Ltilde, cfg.k_cheb);
  s.sset = select_permutations(part.block_count(), cfg.k_spatial, cfg.seed);
  s.fset = select_permutations(kRecordCols, cfg.k_freq, cfg.seed);
  return s;
}

// -- training loop ------------------------------------------------------------

struct EpochTrace {
  std::size_t epoch = 0;
  double total = 0.0, l_s = 0.0, l_f = 0.0, l_p = 0.0, l_c = 0.0;
};

inline std::vector<EpochTrace> train(GmssModel& model, const TrainSetup& setup,
                                     const std::vector<SampleRecord>& records,
                                     const std::vector<std::size_t>& train_ids,
                                     const TrainConfig& cfg, Rng& shuffle_rng,
                                     Rng& puzzle_rng) {
  cfg.validate();
  if (train_ids.empty()) throw ContractError("train: empty training set");
  const int psi = cfg.mode == TrainMode::Supervised ? 1 : 0;
  auto params = model.params();
  AdamState adam = AdamState::init(params, cfg.adam);

  std::vector<std::size_t> order = train_ids;
  std::vector<EpochTrace> trace;
  trace.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    EpochTrace et;
    et.epoch = epoch;
    double seen = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      MultitaskBatch batch;
      for (std::size_t i = start; i < stop; ++i) {
        const SampleRecord& r = records[order[i]];
        batch.xs.push_back(&r.features);
        if (psi == 1) batch.labels.push_back(static_cast<int>(r.label));
      }
      Tape t;
      auto res = forward_multitask(t, model, setup.tk, batch, setup.sset, setup.fset,
                                   *setup.part, psi, puzzle_rng);
      const double total = t.value(res.total)[0];
      if (!std::isfinite(total))
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
      model.zero_grads();
      t.backward(res.total);
      adam_step(params, adam);

      const double w = static_cast<double>(stop - start);
      et.total += w * total;
      et.l_s += w * res.losses.l_s;
      et.l_f += w * res.losses.l_f;
      et.l_p += w * res.losses.l_p;
      et.l_c += w * res.losses.l_c;
      seen += w;
    }
    et.total /= seen;
    et.l_s /= seen;
    et.l_f /= seen;
    et.l_p /= seen;
    et.l_c /= seen;
    trace.push_back(et);
  }
  return trace;
}

inline std::vector<EpochTrace> train(GmssModel& model, const TrainSetup& setup,
                                     const std::vector<SampleRecord>& records,
                                     const std::vector<std::size_t>& train_ids,
                                     const TrainConfig& cfg) {
  Rng shuffle_rng(cfg.seed, stream::kShuffle);
  Rng puzzle_rng(cfg.seed, stream::kPuzzleDraw);
  return train(model, setup, records, train_ids, cfg, shuffle_rng, puzzle_rng);
}

// -- evaluation ---------------------------------------------------------------

struct EvalResult {
  std::vector<std::vector<std::uint32_t>> confusion;  // rows true, cols predicted
  double accuracy = 0.0;
};

inline std::size_t argmax_row(const Matrix& m, std::size_t row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < m.cols(); ++j)
    if (m.at(row, j) > m.at(row, best)) best = j;  // ties keep the lowest index
  return best;
}

inline EvalResult tally(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                        std::size_t classes) {
  if (y_true.empty()) throw ContractError("tally: empty test set");
  if (y_true.size() != y_pred.size())
    throw ContractError("tally: " + std::to_string(y_true.size()) + " labels vs " +
                        std::to_string(y_pred.size()) + " predictions");
  EvalResult r;
  r.confusion.assign(classes, std::vector<std::uint32_t>(classes, 0));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int a = y_true[i], b = y_pred[i];
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= classes ||
        static_cast<std::size_t>(b) >= classes)
      throw ContractError("tally: class index outside 0.." + std::to_string(classes - 1));
    r.confusion[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] += 1;
    if (a == b) ++hits;
  }
  r.accuracy = static_cast<double>(hits) / static_cast<double>(y_true.size());
  return r;
}

// Stacked frozen features for the listed records, one row per record.
inline Matrix features_for(GmssModel& model, const TrainSetup& setup,
                           const std::vector<SampleRecord>& records,
                           const std::vector<std::size_t>& ids) {
  if (ids.empty()) throw ContractError("features_for: empty id list");
  std::vector<const Matrix*> xs;
  xs.reserve(ids.size());
  for (std::size_t id : ids) xs.push_back(&records[id].features);
  Tape t;
  return t.value(extract_features(t, model, setup.tk, xs));
}

inline std::vector<int> labels_for(const std::vector<SampleRecord>& records,
                                   const std::vector<std::size_t>& ids) {
  std::vector<int> y;
  y.reserve(ids.size());
  for (std::size_t id : ids) y.push_back(static_cast<int>(records[id].label));
  return y;
}

// Supervised-path evaluation through the classification head.
inline EvalResult evaluate(GmssModel& model, const TrainSetup& setup,
                           const std::vector<SampleRecord>& records,
                           const std::vector<std::size_t>& ids) {
  if (ids.empty()) throw ContractError("evaluate: empty test set");
  Matrix feats = features_for(model, setup, records, ids);
  Tape t;
  Matrix logits = t.value(model.head_c.forward(t, t.leaf(feats)));
  std::vector<int> pred;
  pred.reserve(ids.size());
  for (std::size_t i = 0; i < logits.rows(); ++i)
    pred.push_back(static_cast<int>(argmax_row(logits, i)));
  return tally(labels_for(records, ids), pred, model.cfg.classes);
}

// -- linear probe -------------------------------------------------------------

struct LinearProbe {
  ParamTensor w, b;

  static LinearProbe init(std::size_t dim, std::size_t classes, Rng& rng) {
    LinearProbe p;
    const double bound = std::sqrt(6.0 / static_cast<double>(dim));
    p.w = ParamTensor("probe.w", Matrix::random_uniform(dim, classes, -bound, bound, rng));
    p.b = ParamTensor("probe.b", Matrix(1, classes));
    return p;
  }

  std::vector<int> predict(const Matrix& feats) const {
    Matrix logits(feats.rows(), w.data.cols());
    gemm(1.0, feats, false, w.data, false, 0.0, logits);
    std::vector<int> out;
    out.reserve(feats.rows());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
      for (std::size_t j = 0; j < logits.cols(); ++j) logits.at(i, j) += b.data[j];
      out.push_back(static_cast<int>(argmax_row(logits, i)));
    }
    return out;
  }
};

// Full-batch softmax regression on frozen features.
inline LinearProbe probe_fit(const Matrix& feats, const std::vector<int>& labels,
                             std::size_t classes, const TrainConfig& cfg, Rng& init_rng) {
  cfg.validate();
  if (feats.rows() != labels.size())
    throw ContractError("probe_fit: " + std::to_string(feats.rows()) + " rows vs " +
                        std::to_string(labels.size()) + " labels");
  LinearProbe probe = LinearProbe::init(feats.cols(), classes, init_rng);
  std::vector<ParamTensor*> params = {&probe.w, &probe.b};
  AdamState adam = AdamState::init(params, cfg.adam);
  for (std::size_t epoch = 0; epoch < cfg.probe_epochs; ++epoch) {
    Tape t;
    Var logits = t.add_rowvec(t.matmul(t.leaf(feats), t.param(probe.w)), t.param(probe.b));
    Var loss = t.cross_entropy_softmax(logits, labels);
    if (!std::isfinite(t.value(loss)[0]))
      throw NumericError("probe_fit: non-finite loss at epoch " + std::to_string(epoch));
    probe.w.grad.fill(0.0);
    probe.b.grad.fill(0.0);
    t.backward(loss);
    adam_step(params, adam);
  }
  return probe;
}

inline LinearProbe probe_fit(const Matrix& feats, const std::vector<int>& labels,
                             std::size_t classes, const TrainConfig& cfg) {
  Rng rng(cfg.seed, stream::kProbeInit);
  return probe_fit(feats, labels, classes, cfg, rng);
}

struct ProbeOutcome {
  EvalResult test;
  double train_accuracy = 0.0;
};

// Freeze the extractor, fit the probe on the train split, report test metrics.
inline ProbeOutcome linear_probe(GmssModel& model, const TrainSetup& setup,
                                 const std::vector<SampleRecord>& records,
                                 const std::vector<std::size_t>& train_ids,
                                 const std::vector<std::size_t>& test_ids,
                                 const TrainConfig& cfg, Rng& init_rng) {
  Matrix ftr = features_for(model, setup, records, train_ids);
  Matrix fte = features_for(model, setup, records, test_ids);
  const auto ytr = labels_for(records, train_ids);
  const auto yte = labels_for(records, test_ids);
  LinearProbe probe = probe_fit(ftr, ytr, model.cfg.classes, cfg, init_rng);
  ProbeOutcome out;
  out.test = tally(yte, probe.predict(fte), model.cfg.classes);
  out.train_accuracy = tally(ytr, probe.predict(ftr), model.cfg.classes).accuracy;
  return out;
}

inline ProbeOutcome linear_probe(GmssModel& model, const TrainSetup& setup,
                                 const std::vector<SampleRecord>& records,
                                 const std::vector<std::size_t>& train_ids,
                                 const std::vector<std::size_t>& test_ids,
                                 const TrainConfig& cfg) {
  Rng rng(cfg.seed, stream::kProbeInit);
  return linear_probe(model, setup, records, train_ids, test_ids, cfg, rng);
}

// -- splits -------------------------------------------------------------------

enum class Protocol { SubjectDependent, Loso };

struct SplitSpec {
  Protocol protocol = Protocol::SubjectDependent;
  std::uint32_t train_trials = 0, test_trials = 0;  // subject-dependent only
};

// The three published protocol shapes, keyed by session trial count.
inline SplitSpec subject_dependent_for(std::uint32_t trials) {
  SplitSpec s;
  s.protocol = Protocol::SubjectDependent;
  if (trials == 15) {
    s.train_trials = 9;
    s.test_trials = 6;
  } else if (trials == 24) {
    s.train_trials = 16;
    s.test_trials = 8;
  } else if (trials == 28) {
    s.train_trials = 21;
    s.test_trials = 7;
  } else {
    throw ContractError("no subject-dependent protocol for " + std::to_string(trials) +
                        " trials per session");
  }
  return s;
}

struct Fold {
  std::string fold_id;
  std::vector<std::size_t> train_ids, test_ids;
};

inline std::vector<Fold> make_splits(const DatasetManifest& manifest,
                                     const std::vector<SampleRecord>& records,
                                     const SplitSpec& spec) {
  if (records.empty()) throw ContractError("make_splits: empty dataset");
  std::vector<Fold> folds;
  if (spec.protocol == Protocol::SubjectDependent) {
    if (spec.train_trials == 0 || spec.test_trials == 0)
      throw ContractError("make_splits: train/test trial counts must be positive");
    if (spec.train_trials + spec.test_trials != manifest.trials)
      throw ContractError("make_splits: protocol wants " +
                          std::to_string(spec.train_trials + spec.test_trials) +
                          " trials, manifest has " + std::to_string(manifest.trials));
    std::map<std::pair<std::uint32_t, std::uint32_t>, Fold> by_cell;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const SampleRecord& r = records[i];
      Fold& f = by_cell[{r.subject, r.session}];
      if (r.trial < spec.train_trials)
        f.train_ids.push_back(i);
      else
        f.test_ids.push_back(i);
    }
    for (auto& [cell, fold] : by_cell) {
      fold.fold_id =
          "s" + std::to_string(cell.first) + "_session" + std::to_string(cell.second);
      if (fold.train_ids.empty() || fold.test_ids.empty())
        throw ContractError("make_splits: fold " + fold.fold_id +
                            " has an empty train or test side");
      folds.push_back(std::move(fold));
    }
  } else {
    if (manifest.subjects < 2) throw ContractError("make_splits: LOSO needs >= 2 subjects");
    folds.resize(manifest.subjects);
    for (std::uint32_t s = 0; s < manifest.subjects; ++s)
      folds[s].fold_id = "subject" + std::to_string(s);
    for (std::size_t i = 0; i < records.size(); ++i)
      for (std::uint32_t s = 0; s < manifest.subjects; ++s) {
        if (records[i].subject == s)
          folds[s].test_ids.push_back(i);
        else
          folds[s].train_ids.push_back(i);
      }
    for (const Fold& f : folds)
      if (f.train_ids.empty() || f.test_ids.empty())
        throw ContractError("make_splits: fold " + f.fold_id +
                            " has an empty train or test side");
  }
  return folds;
}

// Desk-scale benchmark split: the first n_train records train, the next
// n_test test. The synthetic generator interleaves classes, so count prefixes
// stay near-balanced.
inline Fold holdout_fold(std::size_t total, std::size_t n_train, std::size_t n_test) {
  if (n_train == 0 || n_test == 0)
    throw ContractError("holdout_fold: train and test counts must be positive");
  if (n_train + n_test > total)
    throw ContractError("holdout_fold: " + std::to_string(n_train) + "+" +
                        std::to_string(n_test) + " records requested, dataset has " +
                        std::to_string(total));
  Fold f;
  f.fold_id = "holdout";
  for (std::size_t i = 0; i < n_train; ++i) f.train_ids.push_back(i);
  for (std::size_t i = n_train; i < n_train + n_test; ++i) f.test_ids.push_back(i);
  return f;
}

// -- metrics ------------------------------------------------------------------

struct FoldMetrics {
  std::string fold_id;
  double accuracy = 0.0;
  std::vector<std::vector<std::uint32_t>> confusion;
  double seconds = 0.0;
};

struct Metrics {
  std::vector<FoldMetrics> folds;
  double mean_acc = 0.0;
  double std_acc = 0.0;  // population std over folds
};

inline void summarize(Metrics& m) {
  if (m.folds.empty()) throw ContractError("summarize: no folds");
  double acc = 0.0;
  for (const FoldMetrics& f : m.folds) acc += f.accuracy;
  m.mean_acc = acc / static_cast<double>(m.folds.size());
  double ss = 0.0;
  for (const FoldMetrics& f : m.folds) {
    const double d = f.accuracy - m.mean_acc;
    ss += d * d;
  }
  m.std_acc = std::sqrt(ss / static_cast<double>(m.folds.size()));
}

// -- experiment orchestration --------------------------------------------------

enum class SplitMode { Holdout, SubjectDependent, Loso };

inline std::string split_name(SplitMode s) {
  switch (s) {
    case SplitMode::Holdout: return "holdout";
    case SplitMode::SubjectDependent: return "subject_dependent";
    default: return "loso";
  }
}

struct ExperimentConfig {
  TrainConfig train;
  SplitMode split = SplitMode::Holdout;
  std::size_t holdout_train = 0, holdout_test = 0;
  std::uint32_t sd_train_trials = 0, sd_test_trials = 0;  // 0 = protocol defaults
  bool timing = false;  // off keeps metrics JSON byte-reproducible
};

struct ExperimentResult {
  Metrics metrics;
  std::vector<GmssModel> models;
  std::vector<std::vector<EpochTrace>> traces;
};

inline std::vector<Fold> folds_for(const Dataset& ds, const ExperimentConfig& cfg) {
  if (cfg.split == SplitMode::Holdout)
    return {holdout_fold(ds.records.size(), cfg.holdout_train, cfg.holdout_test)};
  SplitSpec spec;
  if (cfg.split == SplitMode::SubjectDependent) {
    if (cfg.sd_train_trials != 0 || cfg.sd_test_trials != 0) {
      spec.protocol = Protocol::SubjectDependent;
      spec.train_trials = cfg.sd_train_trials;
      spec.test_trials = cfg.sd_test_trials;
    } else {
      spec = subject_dependent_for(ds.manifest.trials);
    }
  } else {
    spec.protocol = Protocol::Loso;
  }
  return make_splits(ds.manifest, ds.records, spec);
}

inline ExperimentResult run_experiment(const Dataset& ds, const ElectrodeGraph& graph,
                                       const BlockPartition& part,
                                       const ExperimentConfig& cfg) {
  cfg.train.validate();
  TrainSetup setup = make_setup(graph, part, cfg.train);
  const std::vector<Fold> folds = folds_for(ds, cfg);

  ExperimentResult out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t base = stream::kFoldBase + 4 * f;
    Rng init_rng(cfg.train.seed, base);
    Rng shuffle_rng(cfg.train.seed, base + 1);
    Rng puzzle_rng(cfg.train.seed, base + 2);
    Rng probe_rng(cfg.train.seed, base + 3);

    GmssModel model = GmssModel::init(model_config_for(cfg.train, ds.manifest.classes),
                                      graph.n(), init_rng);
    out.traces.push_back(train(model, setup, ds.records, folds[f].train_ids, cfg.train,
                               shuffle_rng, puzzle_rng));

    EvalResult ev;
    if (cfg.train.mode == TrainMode::Supervised) {
      ev = evaluate(model, setup, ds.records, folds[f].test_ids);
    } else {
      ev = linear_probe(model, setup, ds.records, folds[f].train_ids, folds[f].test_ids,
                        cfg.train, probe_rng)
               .test;
    }
    FoldMetrics fm;
    fm.fold_id = folds[f].fold_id;
    fm.accuracy = ev.accuracy;
    fm.confusion = std::move(ev.confusion);
    if (cfg.timing)
      fm.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.metrics.folds.push_back(std::move(fm));
    out.models.push_back(std::move(model));
  }
  summarize(out.metrics);
  return out;
}

// -- metrics JSON --------------------------------------------------------------
// Hand-assembled so float formatting is pinned to 17 significant digits and
// the bytes are reproducible run to run.

inline std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shared by the metrics and trace reports; `pad` is the outer indentation.
inline std::string config_echo_json(const ExperimentConfig& cfg, const std::string& pad) {
  const std::string in = pad + " ";
  std::string s;
  s += pad + "\"config_echo\": {\n";
  s += in + "\"mode\": \"" + mode_name(cfg.train.mode) + "\",\n";
  s += in + "\"epochs\": " + std::to_string(cfg.train.epochs) + ",\n";
  s += in + "\"batch_size\": " + std::to_string(cfg.train.batch_size) + ",\n";
  s += in + "\"m_views\": " + std::to_string(cfg.train.m_views) + ",\n";
  s += in + "\"tau\": " + fmt_g17(cfg.train.tau) + ",\n";
  s += in + "\"k_cheb\": " + std::to_string(cfg.train.k_cheb) + ",\n";
  s += in + "\"k_spatial\": " + std::to_string(cfg.train.k_spatial) + ",\n";
  s += in + "\"k_freq\": " + std::to_string(cfg.train.k_freq) + ",\n";
  s += in + "\"lr\": " + fmt_g17(cfg.train.adam.lr) + ",\n";
  s += in + "\"weight_decay\": " + fmt_g17(cfg.train.adam.weight_decay) + ",\n";
  s += in + "\"probe_epochs\": " + std::to_string(cfg.train.probe_epochs) + ",\n";
  s += in + "\"split\": \"" + split_name(cfg.split) + "\",\n";
  s += in + "\"holdout_train\": " + std::to_string(cfg.holdout_train) + ",\n";
  s += in + "\"holdout_test\": " + std::to_string(cfg.holdout_test) + ",\n";
  s += in + "\"sd_train_trials\": " + std::to_string(cfg.sd_train_trials) + ",\n";
  s += in + "\"sd_test_trials\": " + std::to_string(cfg.sd_test_trials) + ",\n";
  s += in + "\"timing\": " + std::string(cfg.timing ? "true" : "false") + "\n";
  s += pad + "}";
  return s;
}

inline std::string metrics_to_json(const Metrics& m, const ExperimentConfig& cfg) {
  std::string s;
  s += "{\n";
  s += " \"format_version\": 1,\n";
  s += " \"protocol\": \"" + split_name(cfg.split) + "\",\n";
  s += " \"mode\": \"" + mode_name(cfg.train.mode) + "\",\n";
  s += " \"folds\": [\n";
  for (std::size_t f = 0; f < m.folds.size(); ++f) {
    const FoldMetrics& fm = m.folds[f];
    s += "  {\n";
    s += "   \"fold_id\": \"" + fm.fold_id + "\",\n";
    s += "   \"accuracy\": " + fmt_g17(fm.accuracy) + ",\n";
    s += "   \"confusion\": [";
    for (std::size_t i = 0; i < fm.confusion.size(); ++i) {
      s += i == 0 ? "[" : ", [";
      for (std::size_t j = 0; j < fm.confusion[i].size(); ++j) {
        if (j) s += ", ";
        s += std::to_string(fm.confusion[i][j]);
      }
      s += "]";
    }
    s += "],\n";
    s += "   \"seconds\": " + fmt_g17(fm.seconds) + "\n";
    s += f + 1 < m.folds.size() ? "  },\n" : "  }\n";
  }
  s += " ],\n";
  s += " \"mean_acc\": " + fmt_g17(m.mean_acc) + ",\n";
  s += " \"std_acc\": " + fmt_g17(m.std_acc) + ",\n";
  s += config_echo_json(cfg, " ") + ",\n";
  s += " \"seed\": " + std::to_string(cfg.train.seed) + "\n";
  s += "}\n";
  return s;
}

}  // namespace gmss
