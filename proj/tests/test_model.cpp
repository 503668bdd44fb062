#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "gmss/default_configs.hpp"
#include "gmss/gradcheck.hpp"
#include "gmss/model.hpp"

using gmss::GmssConfig;
using gmss::GmssModel;
using gmss::Matrix;
using gmss::Rng;
using gmss::Tape;
using gmss::Var;

namespace {

struct Fixture62 {
  gmss::ElectrodeGraph graph = gmss::load_montage(gmss::default_montage_json());
  gmss::BlockPartition part = gmss::load_partition(gmss::default_partition_json(), graph);
  gmss::ScaledLaplacian sl = gmss::scaled_laplacian_of(graph);
  std::vector<Matrix> tk2 = gmss::cheb_polynomials(sl.Ltilde, 2);
};

Fixture62& fix62() {
  static Fixture62 f;
  return f;
}

// Small everything: 5-node path graph, 3 bands, 3 spatial blocks.
struct TinyWorld {
  gmss::ElectrodeGraph graph;
  gmss::BlockPartition part;
  gmss::ScaledLaplacian sl;
  std::vector<Matrix> tk;
  gmss::PermutationSet sset, fset;
  GmssConfig cfg;

  TinyWorld() {
    Matrix a(5, 5);
    for (std::size_t i = 0; i + 1 < 5; ++i) a.at(i, i + 1) = a.at(i + 1, i) = 1.0;
    graph = gmss::ElectrodeGraph::from_adjacency(a);
    part.blocks = {{"a", {0, 1}}, {"b", {2, 3}}, {"c", {4}}};
    part.validate();
    sl = gmss::scaled_laplacian_of(graph);
    cfg.k_cheb = 2;
    cfg.bands = 3;
    cfg.node_out = 4;
    cfg.hidden1 = 8;
    cfg.hidden2 = 6;
    cfg.k_spatial = 6;
    cfg.k_freq = 6;
    cfg.proj_dim = 5;
    cfg.classes = 2;
    cfg.m_views = 2;
    tk = gmss::cheb_polynomials(sl.Ltilde, cfg.k_cheb);
    sset = gmss::select_permutations(3, 6, 11);
    fset = gmss::select_permutations(3, 6, 11);
  }
};

}  // namespace

TEST_CASE("feature_extract: zero input, identity filter, locality") {
  auto& f = fix62();
  Rng rng(101, 1);
  auto model = GmssModel::init(GmssConfig{}, 62, rng);

  SECTION("zero X gives the zero vector") {
    Matrix out = gmss::feature_extract(Matrix(62, 5), f.sl, model);
    REQUIRE(out.rows() == 1);
    REQUIRE(out.cols() == 1984);
    for (double v : out.values()) REQUIRE(v == 0.0);
  }

  SECTION("identity-padded beta0 with beta1=0 passes ReLU(X) through") {
    for (std::size_t i = 0; i < model.filter.betas[0].data.size(); ++i)
      model.filter.betas[0].data[i] = 0.0;
    for (std::size_t c = 0; c < 5; ++c) model.filter.betas[0].data.at(c, c) = 1.0;
    model.filter.betas[1].data.fill(0.0);
    Rng drng(5, 5);
    Matrix x = Matrix::random_uniform(62, 5, -1.0, 1.0, drng);
    Matrix out = gmss::feature_extract(x, f.sl, model);
    for (std::size_t e = 0; e < 62; ++e)
      for (std::size_t j = 0; j < 32; ++j) {
        const double want = j < 5 ? std::max(x.at(e, j), 0.0) : 0.0;
        REQUIRE(out[e * 32 + j] == want);
      }
  }

  SECTION("K=2 output changes only on channel 0 and its neighbors") {
    Rng drng(6, 5);
    Matrix x1 = Matrix::random_uniform(62, 5, -1.0, 1.0, drng);
    Matrix x2 = x1;
    for (std::size_t j = 0; j < 5; ++j) x2.at(0, j) += 1.5 + static_cast<double>(j);
    Matrix o1 = gmss::feature_extract(x1, f.sl, model);
    Matrix o2 = gmss::feature_extract(x2, f.sl, model);
    std::set<std::size_t> reachable = {0};
    for (std::size_t v = 0; v < 62; ++v)
      if (f.graph.adjacency.at(0, v) != 0.0) reachable.insert(v);
    for (std::size_t e = 0; e < 62; ++e) {
      bool changed = false;
      for (std::size_t j = 0; j < 32; ++j)
        if (o1[e * 32 + j] != o2[e * 32 + j]) changed = true;
      if (changed) REQUIRE(reachable.count(e) == 1);
    }
    // and the perturbation does reach node 0 itself
    bool any = false;
    for (std::size_t j = 0; j < 32; ++j) any |= o1[j] != o2[j];
    REQUIRE(any);
  }
}

TEST_CASE("head_forward architecture and gradients") {
  Rng rng(31, 1);

  SECTION("zero weights map everything to zero") {
    auto h = gmss::Mlp3::init("h", 10, 7, 6, 4, rng);
    for (auto* p : h.params()) p->data.fill(0.0);
    Tape t;
    Var out = h.forward(t, t.leaf(Matrix::filled(3, 10, 2.0)));
    for (double v : t.value(out).values()) REQUIRE(v == 0.0);
  }

  SECTION("default dimensions: 1984 -> 512 -> 128 -> out") {
    auto model = GmssModel::init(GmssConfig{}, 62, rng);
    REQUIRE(model.head_s.w1.data.rows() == 1984);
    REQUIRE(model.head_s.w1.data.cols() == 512);
    REQUIRE(model.head_s.w2.data.rows() == 512);
    REQUIRE(model.head_s.w2.data.cols() == 128);
    REQUIRE(model.head_s.w3.data.rows() == 128);
    REQUIRE(model.head_s.w3.data.cols() == 128);
    REQUIRE(model.head_f.w3.data.cols() == 120);
    REQUIRE(model.head_p.w3.data.cols() == 64);
    REQUIRE(model.head_c.w3.data.cols() == 3);
    Tape t;
    Var out = model.head_s.forward(t, t.leaf(Matrix(1, 1984)));
    REQUIRE(t.value(out).cols() == 128);
  }

  SECTION("three-layer gradcheck") {
    auto h = gmss::Mlp3::init("h", 6, 5, 4, 3, rng);
    Matrix x = Matrix::random_uniform(4, 6, -1.0, 1.0, rng);
    std::vector<int> labels = {0, 2, 1, 2};
    auto build = [&](Tape& t) {
      return t.cross_entropy_softmax(h.forward(t, t.leaf(x)), labels);
    };
    auto rep = gmss::grad_check_fn(
        {&h.w1, &h.b1, &h.w2, &h.b2, &h.w3, &h.b3}, build, 1e-5, 1e-4);
    INFO("worst " << rep.worst.param << " rel " << rep.max_rel_err);
    REQUIRE(rep.ok(1e-4));
  }
}

TEST_CASE("puzzle_loss values") {
  SECTION("uniform logits over 128 classes") {
    Tape t;
    Var loss = gmss::puzzle_loss(t, t.leaf(Matrix(1, 128)), {7});
    REQUIRE(t.value(loss)[0] == Catch::Approx(std::log(128.0)).epsilon(1e-12));
  }

  SECTION("dominant true class saturates to ~0") {
    Matrix logits(1, 10);
    logits[3] = 30.0;
    Tape t;
    Var loss = gmss::puzzle_loss(t, t.leaf(logits), {4});
    REQUIRE(t.value(loss)[0] < 1e-9);
  }

  SECTION("random logits match a direct log-sum-exp evaluation") {
    Rng rng(41, 1);
    Matrix logits = Matrix::random_uniform(6, 9, -3.0, 3.0, rng);
    std::vector<int> labels;
    for (int i = 0; i < 6; ++i) labels.push_back(1 + static_cast<int>(rng.next_below(9)));
    Tape t;
    Var loss = gmss::puzzle_loss(t, t.leaf(logits), labels);
    double want = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      double se = 0.0;
      for (std::size_t j = 0; j < 9; ++j) se += std::exp(logits.at(i, j));
      want += std::log(se) - logits.at(i, static_cast<std::size_t>(labels[i] - 1));
    }
    want /= 6.0;
    REQUIRE(t.value(loss)[0] == Catch::Approx(want).epsilon(1e-12));
  }

  SECTION("labels outside 1..k are contract errors") {
    Tape t;
    Var logits = t.leaf(Matrix(2, 5));
    REQUIRE_THROWS_AS(gmss::puzzle_loss(t, logits, {0, 1}), gmss::ContractError);
    REQUIRE_THROWS_AS(gmss::puzzle_loss(t, logits, {1, 6}), gmss::ContractError);
  }
}

TEST_CASE("total_loss algebra and gradients") {
  Rng rng(51, 1);
  TinyWorld w;
  auto model = GmssModel::init(w.cfg, 5, rng);

  auto eval = [&](double ls, double lf, double lp, double lc, int psi) {
    Tape t;
    Var vls = t.leaf(Matrix::filled(1, 1, ls));
    Var vlf = t.leaf(Matrix::filled(1, 1, lf));
    Var vlp = t.leaf(Matrix::filled(1, 1, lp));
    Var vlc = psi ? t.leaf(Matrix::filled(1, 1, lc)) : Var{};
    Var total = gmss::total_loss(t, vls, vlf, vlp, vlc, psi, model);
    return t.value(total)[0];
  };

  SECTION("spec substitution cases") {
    REQUIRE(eval(0.7, 0.4, 0.9, 0.0, 0) == Catch::Approx(0.7 + 0.4 + 0.45).margin(1e-15));
    REQUIRE(eval(0.7, 0.4, 0.9, 0.3, 1) ==
            Catch::Approx(0.7 + 0.4 + 0.45 + 0.3).margin(1e-15));
    REQUIRE(eval(0.0, 0.0, 0.0, 0.0, 0) == 0.0);
    model.log_var_s.data[0] = 2.0;
    REQUIRE(eval(1.0, 0.0, 0.0, 0.0, 0) ==
            Catch::Approx(std::exp(-2.0) + 1.0).margin(1e-12));
    model.log_var_s.data[0] = 0.0;
  }

  SECTION("d total / d log_var at 0 matches the closed form") {
    const double ls = 0.83, lf = 0.21, lp = 1.7, lc = 0.44;
    model.zero_grads();
    Tape t;
    Var total = gmss::total_loss(t, t.leaf(Matrix::filled(1, 1, ls)),
                                 t.leaf(Matrix::filled(1, 1, lf)),
                                 t.leaf(Matrix::filled(1, 1, lp)),
                                 t.leaf(Matrix::filled(1, 1, lc)), 1, model);
    t.backward(total);
    REQUIRE(model.log_var_s.grad[0] == Catch::Approx(-ls + 0.5).margin(1e-8));
    REQUIRE(model.log_var_f.grad[0] == Catch::Approx(-lf + 0.5).margin(1e-8));
    REQUIRE(model.log_var_p.grad[0] == Catch::Approx(-0.5 * lp + 0.5).margin(1e-8));
    REQUIRE(model.log_var_c.grad[0] == Catch::Approx(-lc + 0.5).margin(1e-8));
  }

  SECTION("argmin of e^{-s}L + s/2 sits at log(2L)") {
    const double l = 0.83;
    const double star = std::log(2.0 * l);
    auto f = [&](double s) { return std::exp(-s) * l + 0.5 * s; };
    REQUIRE(f(star) < f(star - 1e-3));
    REQUIRE(f(star) < f(star + 1e-3));
    // and the model-side gradient vanishes there
    model.log_var_s.data[0] = star;
    model.zero_grads();
    Tape t;
    Var total = gmss::total_loss(t, t.leaf(Matrix::filled(1, 1, l)),
                                 t.leaf(Matrix::filled(1, 1, 0.0)),
                                 t.leaf(Matrix::filled(1, 1, 0.0)), Var{}, 0, model);
    t.backward(total);
    REQUIRE(std::abs(model.log_var_s.grad[0]) < 1e-12);
    model.log_var_s.data[0] = 0.0;
  }

  SECTION("psi validation") {
    Tape t;
    Var z = t.leaf(Matrix(1, 1));
    REQUIRE_THROWS_AS(gmss::total_loss(t, z, z, z, z, 2, model), gmss::ContractError);
    REQUIRE_THROWS_AS(gmss::total_loss(t, z, z, z, Var{}, 1, model), gmss::ContractError);
  }
}

TEST_CASE("model init is seed-deterministic and log_vars start at zero") {
  TinyWorld w;
  Rng r1(7, 1), r2(7, 1), r3(8, 1);
  auto m1 = GmssModel::init(w.cfg, 5, r1);
  auto m2 = GmssModel::init(w.cfg, 5, r2);
  auto m3 = GmssModel::init(w.cfg, 5, r3);
  auto p1 = m1.params(), p2 = m2.params(), p3 = m3.params();
  REQUIRE(p1.size() == p2.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    REQUIRE(p1[i]->name == p2[i]->name);
    REQUIRE(p1[i]->data.values() == p2[i]->data.values());
    if (p1[i]->data.values() != p3[i]->data.values()) any_diff = true;
  }
  REQUIRE(any_diff);
  for (auto* lv : {&m1.log_var_s, &m1.log_var_f, &m1.log_var_p, &m1.log_var_c}) {
    REQUIRE(lv->data[0] == 0.0);
    REQUIRE(lv->decay_exempt);
  }
  std::set<std::string> names;
  for (auto* p : p1) REQUIRE(names.insert(p->name).second);
}

TEST_CASE("forward_multitask task routing") {
  TinyWorld w;
  Rng mrng(13, 1);
  auto model = GmssModel::init(w.cfg, 5, mrng);
  Rng drng(14, 5);
  Matrix x0 = Matrix::random_uniform(5, 3, -1.0, 1.0, drng);
  Matrix x1 = Matrix::random_uniform(5, 3, -1.0, 1.0, drng);
  gmss::MultitaskBatch batch{{&x0, &x1}, {0, 1}};

  SECTION("psi=0 reports L_c = 0 and keeps the classification head out of the graph") {
    model.zero_grads();
    Tape t;
    Rng rng(21, 3);
    auto r = gmss::forward_multitask(t, model, w.tk, batch, w.sset, w.fset, w.part, 0, rng);
    REQUIRE(r.losses.l_c == 0.0);
    REQUIRE(r.losses.psi == 0);
    t.backward(r.total);
    for (auto* p : model.head_c.params())
      for (double g : p->grad.values()) REQUIRE(g == 0.0);
    REQUIRE(model.log_var_c.grad[0] == 0.0);
    // the other heads do receive gradient
    double mag = 0.0;
    for (double g : model.head_s.w1.grad.values()) mag += std::abs(g);
    REQUIRE(mag > 0.0);
  }

  SECTION("batch of 1 and M=2: L_p exactly 0, puzzle losses positive") {
    gmss::MultitaskBatch one{{&x0}, {1}};
    Tape t;
    Rng rng(22, 3);
    auto r = gmss::forward_multitask(t, model, w.tk, one, w.sset, w.fset, w.part, 1, rng);
    REQUIRE(r.losses.l_p == 0.0);
    REQUIRE(r.losses.l_s > 0.0);
    REQUIRE(r.losses.l_f > 0.0);
    REQUIRE(r.losses.l_c > 0.0);
  }

  SECTION("deterministic: same seed, same TaskLosses, same total") {
    auto run = [&]() {
      Tape t;
      Rng rng(23, 3);
      auto r = gmss::forward_multitask(t, model, w.tk, batch, w.sset, w.fset, w.part, 1, rng);
      return std::tuple(r.losses.l_s, r.losses.l_f, r.losses.l_p, r.losses.l_c,
                        t.value(r.total)[0]);
    };
    REQUIRE(run() == run());
  }

  SECTION("contract violations") {
    Tape t;
    Rng rng(24, 3);
    gmss::MultitaskBatch empty;
    REQUIRE_THROWS_AS(
        gmss::forward_multitask(t, model, w.tk, empty, w.sset, w.fset, w.part, 0, rng),
        gmss::ContractError);
    gmss::MultitaskBatch unlabeled{{&x0, &x1}, {}};
    REQUIRE_THROWS_AS(
        gmss::forward_multitask(t, model, w.tk, unlabeled, w.sset, w.fset, w.part, 1, rng),
        gmss::ContractError);
    gmss::MultitaskBatch badlabel{{&x0}, {5}};
    REQUIRE_THROWS_AS(
        gmss::forward_multitask(t, model, w.tk, badlabel, w.sset, w.fset, w.part, 1, rng),
        gmss::ContractError);
    auto wrong_sset = gmss::select_permutations(3, 5, 1);
    REQUIRE_THROWS_AS(
        gmss::forward_multitask(t, model, w.tk, batch, wrong_sset, w.fset, w.part, 0, rng),
        gmss::ConfigError);
  }
}

TEST_CASE("full multitask loss passes gradcheck on a tiny model") {
  TinyWorld w;
  Rng mrng(61, 1);
  auto model = GmssModel::init(w.cfg, 5, mrng);
  Rng drng(62, 5);
  Matrix x0 = Matrix::random_uniform(5, 3, -1.0, 1.0, drng);
  Matrix x1 = Matrix::random_uniform(5, 3, -1.0, 1.0, drng);
  gmss::MultitaskBatch batch{{&x0, &x1}, {0, 1}};

  auto build = [&](Tape& t) {
    Rng rng(63, 3);  // fresh stream per rebuild keeps draws identical
    return gmss::forward_multitask(t, model, w.tk, batch, w.sset, w.fset, w.part, 1, rng)
        .total;
  };
  auto rep = gmss::grad_check_fn(model.params(), build, 1e-4, 1e-4);
  INFO("checked " << rep.checked << " coords, worst " << rep.worst.param << "["
                  << rep.worst.index << "] rel " << rep.max_rel_err);
  REQUIRE(rep.checked > 1000);
  REQUIRE(rep.ok(1e-4));
}

TEST_CASE("checkpoint round-trips bit-exactly and validates structure") {
  TinyWorld w;
  Rng r1(71, 1);
  auto model = GmssModel::init(w.cfg, 5, r1);
  model.log_var_s.data[0] = -0.37;  // non-default value must survive

  std::stringstream ss;
  gmss::save_checkpoint(ss, model);
  const std::string bytes = ss.str();
  REQUIRE(bytes.substr(0, 8) == "GMSSCKPT");

  Rng r2(999, 1);
  auto other = GmssModel::init(w.cfg, 5, r2);
  std::stringstream in(bytes);
  gmss::load_checkpoint(in, other);
  auto pa = model.params(), pb = other.params();
  for (std::size_t i = 0; i < pa.size(); ++i)
    REQUIRE(pa[i]->data.values() == pb[i]->data.values());

  // saving the loaded model reproduces the exact bytes
  std::stringstream ss2;
  gmss::save_checkpoint(ss2, other);
  REQUIRE(ss2.str() == bytes);

  SECTION("bad magic") {
    std::stringstream badmagic("XXXXXXXX" + bytes.substr(8));
    REQUIRE_THROWS_AS(gmss::load_checkpoint(badmagic, other), gmss::FormatError);
  }
  SECTION("truncation") {
    std::stringstream trunc(bytes.substr(0, bytes.size() / 2));
    REQUIRE_THROWS_AS(gmss::load_checkpoint(trunc, other), gmss::FormatError);
  }
  SECTION("missing parameter") {
    // checkpoint of a model with one renamed tensor: unknown name on load
    auto renamed = GmssModel::init(w.cfg, 5, r2);
    renamed.head_s.w1.name = "rogue";
    std::stringstream rss;
    gmss::save_checkpoint(rss, renamed);
    REQUIRE_THROWS_AS(gmss::load_checkpoint(rss, other), gmss::FormatError);
  }
  SECTION("shape mismatch") {
    auto small_cfg = w.cfg;
    small_cfg.hidden1 = 7;
    Rng r3(5, 1);
    auto small = GmssModel::init(small_cfg, 5, r3);
    std::stringstream in2(bytes);
    REQUIRE_THROWS_AS(gmss::load_checkpoint(in2, small), gmss::FormatError);
  }
}
