#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "gmss/default_configs.hpp"
#include "gmss/puzzles.hpp"

using gmss::BlockPartition;
using gmss::Matrix;
using gmss::Permutation;
using gmss::PermutationSet;
using gmss::Rng;

namespace {

gmss::ElectrodeGraph& graph62() {
  static auto g = gmss::load_montage(gmss::default_montage_json());
  return g;
}

BlockPartition& part62() {
  static auto p = gmss::load_partition(gmss::default_partition_json(), graph62());
  return p;
}

Permutation perm_of(std::vector<int> v) {
  Permutation p;
  p.mapping = std::move(v);
  return p;
}

std::size_t min_pairwise_hamming(const std::vector<Permutation>& ps) {
  std::size_t best = SIZE_MAX;
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t j = i + 1; j < ps.size(); ++j)
      best = std::min(best, gmss::hamming(ps[i], ps[j]));
  return best;
}

}  // namespace

TEST_CASE("hamming distance basics") {
  auto id10 = Permutation::identity(10);
  REQUIRE(gmss::hamming(id10, id10) == 0);
  auto rev = id10;
  std::reverse(rev.mapping.begin(), rev.mapping.end());
  REQUIRE(gmss::hamming(id10, rev) == 10);
  REQUIRE(gmss::hamming(perm_of({1, 2, 3}), perm_of({1, 3, 2})) == 2);
  REQUIRE_THROWS_AS(gmss::hamming(id10, Permutation::identity(5)), gmss::ContractError);
}

TEST_CASE("select_permutations exhaustive branch is lexicographic") {
  auto s3 = gmss::select_permutations(3, 6, 99);
  REQUIRE(s3.k() == 6);
  const std::vector<std::vector<int>> want = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                              {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (std::size_t i = 0; i < 6; ++i) {
    REQUIRE(s3.perms[i].mapping == want[i]);
    REQUIRE(s3.label_of(i) == static_cast<int>(i) + 1);
  }

  // label = lex rank checked exhaustively for m up to 5
  for (std::size_t m = 2; m <= 5; ++m) {
    const auto full = gmss::select_permutations(m, gmss::factorial_capped(m), 1);
    auto p = Permutation::identity(m);
    std::size_t rank = 0;
    do {
      REQUIRE(full.perms[rank].mapping == p.mapping);
      ++rank;
    } while (std::next_permutation(p.mapping.begin(), p.mapping.end()));
    REQUIRE(rank == full.k());
  }
}

TEST_CASE("select_permutations(5, 120) is the whole of S5") {
  auto s5 = gmss::select_permutations(5, 120, 7);
  REQUIRE(s5.k() == 120);
  std::set<std::vector<int>> uniq;
  for (const auto& p : s5.perms) {
    p.validate();
    uniq.insert(p.mapping);
  }
  REQUIRE(uniq.size() == 120);
  REQUIRE(s5.perms[0].mapping == Permutation::identity(5).mapping);
}

TEST_CASE("greedy selection: identity anchor, distinct, deterministic") {
  auto a = gmss::select_permutations(10, 128, 42);
  auto b = gmss::select_permutations(10, 128, 42);
  REQUIRE(a == b);
  REQUIRE(a.k() == 128);
  REQUIRE(a.perms[0].mapping == Permutation::identity(10).mapping);
  a.validate();  // throws on duplicates

  auto c = gmss::select_permutations(10, 128, 43);
  REQUIRE(c.perms != a.perms);
}

TEST_CASE("greedy max-min Hamming beats random subsets on average") {
  auto sel = gmss::select_permutations(10, 128, 42);
  const auto greedy_min = min_pairwise_hamming(sel.perms);

  // baseline oracle: 10 uniformly random 128-subsets of S10
  Rng rng(4242, 77);
  double base_sum = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    std::set<std::vector<int>> uniq;
    std::vector<Permutation> subset;
    while (subset.size() < 128) {
      auto p = Permutation::identity(10);
      rng.shuffle(p.mapping);
      if (uniq.insert(p.mapping).second) subset.push_back(std::move(p));
    }
    base_sum += static_cast<double>(min_pairwise_hamming(subset));
  }
  const double base_avg = base_sum / 10.0;
  INFO("greedy " << greedy_min << " vs random avg " << base_avg);
  REQUIRE(static_cast<double>(greedy_min) >= base_avg);
}

TEST_CASE("select_permutations contract violations") {
  REQUIRE_THROWS_AS(gmss::select_permutations(3, 7, 1), gmss::ContractError);
  REQUIRE_THROWS_AS(gmss::select_permutations(3, 0, 1), gmss::ContractError);
  REQUIRE_THROWS_AS(gmss::select_permutations(0, 1, 1), gmss::ContractError);
}

TEST_CASE("default partition matches Table 1 and the data file") {
  const auto& part = part62();
  REQUIRE(part.block_count() == 10);
  const std::vector<std::size_t> sizes = {5, 6, 6, 6, 6, 6, 9, 6, 6, 6};
  const std::vector<std::string> names = {
      "Pre-Frontal",   "Frontal",        "Left Frontal",  "Right Frontal",
      "Left Temporal", "Right Temporal", "Central",       "Left Parietal",
      "Right Parietal", "Occipital"};
  for (std::size_t i = 0; i < 10; ++i) {
    REQUIRE(part.blocks[i].region == names[i]);
    REQUIRE(part.blocks[i].channels.size() == sizes[i]);
  }
  REQUIRE(part.channel_count() == 62);
  part.validate();

  // shipped layout: blocks occupy contiguous ascending ranges, so the
  // identity permutation leaves matrices untouched
  std::size_t next = 0;
  for (const auto& b : part.blocks)
    for (std::size_t c : b.channels) REQUIRE(c == next++);

  // spot-check membership resolution: Central holds CZ, Occipital holds OZ
  const auto cz = graph62().index_of("CZ");
  const auto& central = part.blocks[6].channels;
  REQUIRE(std::find(central.begin(), central.end(), cz) != central.end());

  std::ifstream in(std::string(GMSS_SOURCE_DIR) + "/data/partition62.json");
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  REQUIRE(ss.str() == gmss::default_partition_json());
}

TEST_CASE("partition loader rejects bad inputs") {
  REQUIRE_THROWS_AS(gmss::load_partition("{", graph62()), gmss::FormatError);
  REQUIRE_THROWS_AS(
      gmss::load_partition("{\"regions\": [{\"name\": \"r\", \"electrodes\": [\"ZZ\"]}]}",
                           graph62()),
      gmss::ConfigError);
  // double membership
  std::string dup = R"({"regions": [{"name": "a", "electrodes": ["FP1"]},
                                    {"name": "b", "electrodes": ["FP1"]}]})";
  REQUIRE_THROWS_AS(gmss::load_partition(dup, graph62()), gmss::ConfigError);
}

TEST_CASE("apply_spatial examples") {
  const auto& part = part62();
  Matrix x(62, 5);
  for (std::size_t i = 0; i < 62; ++i)
    for (std::size_t j = 0; j < 5; ++j) x.at(i, j) = static_cast<double>(i);

  SECTION("identity keeps X") {
    auto out = gmss::apply_spatial(x, Permutation::identity(10), part);
    REQUIRE(gmss::max_abs_diff(out, x) == 0.0);
  }

  SECTION("swapping the equal-size Frontal and Occipital blocks moves exactly 12 rows") {
    auto p = Permutation::identity(10);
    std::swap(p.mapping[1], p.mapping[9]);  // Frontal <-> Occipital, both 6 channels
    auto out = gmss::apply_spatial(x, p, part);
    // row positions covered by the two blocks
    std::vector<std::size_t> frontal_rows, occipital_rows;
    std::size_t row = 0;
    for (std::size_t b = 0; b < 10; ++b) {
      for (std::size_t c = 0; c < part.blocks[b].channels.size(); ++c, ++row) {
        if (b == 1) frontal_rows.push_back(row);
        if (b == 9) occipital_rows.push_back(row);
      }
    }
    std::size_t moved = 0;
    for (std::size_t r = 0; r < 62; ++r)
      if (out.at(r, 0) != x.at(r, 0)) ++moved;
    REQUIRE(moved == 12);
    for (std::size_t i = 0; i < 6; ++i) {
      REQUIRE(out.at(frontal_rows[i], 0) == x.at(occipital_rows[i], 0));
      REQUIRE(out.at(occipital_rows[i], 0) == x.at(frontal_rows[i], 0));
    }
  }

  SECTION("full reversal matches index bookkeeping") {
    auto p = Permutation::identity(10);
    std::reverse(p.mapping.begin(), p.mapping.end());
    auto out = gmss::apply_spatial(x, p, part);
    std::vector<std::size_t> want;
    for (std::size_t b = 10; b-- > 0;)
      for (std::size_t c : part.blocks[b].channels) want.push_back(c);
    for (std::size_t r = 0; r < 62; ++r)
      REQUIRE(out.at(r, 0) == static_cast<double>(want[r]));
  }
}

TEST_CASE("apply_frequency examples") {
  Rng rng(14, 9);
  Matrix x = Matrix::random_uniform(62, 5, -1.0, 1.0, rng);

  auto out_id = gmss::apply_frequency(x, Permutation::identity(5));
  REQUIRE(gmss::max_abs_diff(out_id, x) == 0.0);

  auto swap04 = perm_of({4, 1, 2, 3, 0});
  auto out_sw = gmss::apply_frequency(x, swap04);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    REQUIRE(out_sw.at(i, 0) == x.at(i, 4));
    REQUIRE(out_sw.at(i, 4) == x.at(i, 0));
    REQUIRE(out_sw.at(i, 2) == x.at(i, 2));
  }

  auto rev = perm_of({4, 3, 2, 1, 0});
  auto out_rev = gmss::apply_frequency(x, rev);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < 5; ++j) REQUIRE(out_rev.at(i, j) == x.at(i, 4 - j));

  REQUIRE_THROWS_AS(gmss::apply_frequency(x, Permutation::identity(4)),
                    gmss::ContractError);
}

TEST_CASE("transforms are bijections preserving row/column multisets") {
  const auto& part = part62();
  Rng rng(5150, 9);
  Matrix x = Matrix::random_uniform(62, 5, -3.0, 3.0, rng);

  auto sp = gmss::select_permutations(10, 16, 3);
  for (const auto& p : sp.perms) {
    Matrix y = gmss::apply_spatial(x, p, part);
    REQUIRE(gmss::max_abs_diff(gmss::undo_spatial(y, p, part), x) == 0.0);
    // row multiset preserved
    auto rows_of = [](const Matrix& m) {
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < m.rows(); ++i)
        rows.emplace_back(m.data() + i * m.cols(), m.data() + (i + 1) * m.cols());
      std::sort(rows.begin(), rows.end());
      return rows;
    };
    REQUIRE(rows_of(y) == rows_of(x));
  }

  auto sf = gmss::select_permutations(5, 120, 3);
  for (std::size_t i = 0; i < sf.k(); i += 7) {
    const auto& p = sf.perms[i];
    Matrix y = gmss::apply_frequency(x, p);
    REQUIRE(gmss::max_abs_diff(gmss::apply_frequency(y, p.inverse()), x) == 0.0);
    auto cols_of = [](const Matrix& m) {
      std::vector<std::vector<double>> cols(m.cols());
      for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) cols[j].push_back(m.at(i, j));
      std::sort(cols.begin(), cols.end());
      return cols;
    };
    REQUIRE(cols_of(y) == cols_of(x));
  }
}

TEST_CASE("random_puzzle draws are reproducible, uniform, invertible") {
  const auto& part = part62();
  Rng data_rng(8, 9);
  Matrix x = Matrix::random_uniform(62, 5, -1.0, 1.0, data_rng);
  auto set = gmss::select_permutations(10, 128, 42);

  SECTION("determinism") {
    Rng r1(9, 3), r2(9, 3);
    auto s1 = gmss::random_puzzle(x, set, gmss::PuzzleKind::kSpatial, &part, r1);
    auto s2 = gmss::random_puzzle(x, set, gmss::PuzzleKind::kSpatial, &part, r2);
    REQUIRE(s1.label == s2.label);
    REQUIRE(gmss::max_abs_diff(s1.x, s2.x) == 0.0);
  }

  SECTION("label distribution over 128000 draws") {
    Rng rng(10, 3);
    std::vector<int> counts(129, 0);
    for (int i = 0; i < 128000; ++i) {
      const auto d = rng.next_below(128);
      ++counts[d + 1];
    }
    for (int l = 1; l <= 128; ++l) {
      REQUIRE(counts[l] > 800);
      REQUIRE(counts[l] < 1200);
    }
  }

  SECTION("inverse of the drawn permutation recovers X") {
    Rng rng(11, 3);
    for (int i = 0; i < 20; ++i) {
      auto s = gmss::random_puzzle(x, set, gmss::PuzzleKind::kSpatial, &part, rng);
      const auto& p = set.perms[static_cast<std::size_t>(s.label - 1)];
      REQUIRE(gmss::max_abs_diff(gmss::undo_spatial(s.x, p, part), x) == 0.0);
    }
    auto fset = gmss::select_permutations(5, 120, 42);
    for (int i = 0; i < 20; ++i) {
      auto s = gmss::random_puzzle(x, fset, gmss::PuzzleKind::kFrequency, nullptr, rng);
      const auto& p = fset.perms[static_cast<std::size_t>(s.label - 1)];
      REQUIRE(gmss::max_abs_diff(gmss::apply_frequency(s.x, p.inverse()), x) == 0.0);
    }
  }

  SECTION("spatial kind without partition is a contract error") {
    Rng rng(12, 3);
    REQUIRE_THROWS_AS(gmss::random_puzzle(x, set, gmss::PuzzleKind::kSpatial, nullptr, rng),
                      gmss::ContractError);
  }
}

TEST_CASE("permutation set serialization round-trips bit-exactly") {
  auto set = gmss::select_permutations(10, 32, 17);
  const std::string text = gmss::write_permutation_set(set);
  auto back = gmss::load_permutation_set(text);
  REQUIRE(back == set);
  REQUIRE(gmss::write_permutation_set(back) == text);

  REQUIRE_THROWS_AS(gmss::load_permutation_set("{"), gmss::FormatError);
  REQUIRE_THROWS_AS(gmss::load_permutation_set("{\"m\":3,\"k\":2,\"seed\":0,\"perms\":[[0,1,2]]}"),
                    gmss::FormatError);
  // duplicate perms fail validation
  REQUIRE_THROWS_AS(
      gmss::load_permutation_set(
          "{\"m\":3,\"k\":2,\"seed\":0,\"perms\":[[0,1,2],[0,1,2]]}"),
      gmss::ContractError);
}
