#pragma once

// Jigsaw pretext machinery: the Table-1 block partition, permutation sets
// with max-min Hamming selection, the spatial and frequency transforms, and
// pseudo-label draws.

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gmss/errors.hpp"
#include "gmss/graph.hpp"
#include "gmss/matrix.hpp"
#include "gmss/rng.hpp"

namespace gmss {

struct Permutation {
  // mapping[i] = source block/band index placed at slot i
  std::vector<int> mapping;

  std::size_t size() const { return mapping.size(); }
  int operator[](std::size_t i) const { return mapping[i]; }
  bool operator==(const Permutation&) const = default;

  static Permutation identity(std::size_t m) {
    Permutation p;
    p.mapping.resize(m);
    for (std::size_t i = 0; i < m; ++i) p.mapping[i] = static_cast<int>(i);
    return p;
  }

  void validate() const {
    std::vector<char> seen(mapping.size(), 0);
    for (int v : mapping) {
      if (v < 0 || static_cast<std::size_t>(v) >= mapping.size() || seen[v])
        throw ContractError("permutation is not a bijection on 0.." +
                            std::to_string(mapping.size() - 1));
      seen[v] = 1;
    }
  }

  Permutation inverse() const {
    validate();
    Permutation inv;
    inv.mapping.resize(mapping.size());
    for (std::size_t i = 0; i < mapping.size(); ++i)
      inv.mapping[static_cast<std::size_t>(mapping[i])] = static_cast<int>(i);
    return inv;
  }
};

inline std::size_t hamming(const Permutation& p, const Permutation& q) {
  if (p.size() != q.size())
    throw ContractError("hamming: length mismatch " + std::to_string(p.size()) + " vs " +
                        std::to_string(q.size()));
  std::size_t d = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] != q[i]) ++d;
  return d;
}

struct Block {
  std::string region;
  std::vector<std::size_t> channels;
};

struct BlockPartition {
  std::vector<Block> blocks;

  std::size_t block_count() const { return blocks.size(); }

  std::size_t channel_count() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.channels.size();
    return n;
  }

  // disjoint and exhaustive over 0..n-1
  void validate() const {
    const std::size_t n = channel_count();
    std::vector<char> seen(n, 0);
    for (const auto& b : blocks) {
      if (b.channels.empty()) throw ContractError("partition block '" + b.region + "' is empty");
      for (std::size_t c : b.channels) {
        if (c >= n || seen[c])
          throw ContractError("partition is not disjoint/exhaustive at channel " +
                              std::to_string(c));
        seen[c] = 1;
      }
    }
  }
};

// Partition file: {"regions": [{"name", "electrodes": [names]}]}; electrode
// names resolve against the montage.
inline BlockPartition load_partition(const std::string& json_text, const ElectrodeGraph& graph) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("partition JSON parse failed: ") + e.what());
  }
  BlockPartition part;
  try {
    for (const auto& r : j.at("regions")) {
      Block b;
      b.region = r.at("name").get<std::string>();
      for (const auto& e : r.at("electrodes"))
        b.channels.push_back(graph.index_of(e.get<std::string>()));
      part.blocks.push_back(std::move(b));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("partition JSON structure invalid: ") + e.what());
  }
  if (part.channel_count() != graph.n())
    throw ConfigError("partition covers " + std::to_string(part.channel_count()) +
                      " channels, montage has " + std::to_string(graph.n()));
  part.validate();
  return part;
}

struct PermutationSet {
  std::size_t m = 0;
  std::uint64_t seed = 0;
  std::vector<Permutation> perms;  // labels implicit: perms[i] has label i+1

  std::size_t k() const { return perms.size(); }
  int label_of(std::size_t index) const { return static_cast<int>(index) + 1; }

  bool operator==(const PermutationSet&) const = default;

  void validate() const {
    std::set<std::vector<int>> uniq;
    for (const auto& p : perms) {
      if (p.size() != m) throw ContractError("permutation length != m");
      p.validate();
      if (!uniq.insert(p.mapping).second)
        throw ContractError("permutation set contains duplicates");
    }
  }
};

inline std::uint64_t factorial_capped(std::size_t m) {
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= m; ++i) {
    if (f > UINT64_MAX / i) return UINT64_MAX;
    f *= static_cast<std::uint64_t>(i);
  }
  return f;
}

// k = m!: the full symmetric group in lexicographic order, label = lex rank.
// k < m!: greedy farthest-point from the identity; each step samples 1000
// uniformly random not-yet-chosen candidates and keeps the one maximizing
// the minimum Hamming distance to the chosen set (first maximum wins ties).
inline PermutationSet select_permutations(std::size_t m, std::size_t k, std::uint64_t seed) {
  if (m == 0) throw ContractError("select_permutations: m must be positive");
  const std::uint64_t mf = factorial_capped(m);
  if (k < 1 || k > mf)
    throw ContractError("select_permutations: k=" + std::to_string(k) +
                        " outside 1..m! (m=" + std::to_string(m) + ")");
  PermutationSet set;
  set.m = m;
  set.seed = seed;

  if (k == mf) {
    Permutation p = Permutation::identity(m);
    do {
      set.perms.push_back(p);
    } while (std::next_permutation(p.mapping.begin(), p.mapping.end()));
    return set;
  }

  Rng rng(seed, stream::kPermSelect);
  std::set<std::vector<int>> chosen;
  set.perms.push_back(Permutation::identity(m));
  chosen.insert(set.perms.back().mapping);
  while (set.perms.size() < k) {
    Permutation best;
    std::size_t best_score = 0;
    bool have = false;
    for (int c = 0; c < 1000; ++c) {
      Permutation cand = Permutation::identity(m);
      do {
        rng.shuffle(cand.mapping);
      } while (chosen.count(cand.mapping));
      // min distance to chosen, pruned once it cannot beat the leader
      std::size_t mind = m + 1;
      for (const auto& p : set.perms) {
        mind = std::min(mind, hamming(cand, p));
        if (have && mind <= best_score) break;
      }
      if (!have || mind > best_score) {
        best = std::move(cand);
        best_score = mind;
        have = true;
      }
    }
    chosen.insert(best.mapping);
    set.perms.push_back(std::move(best));
  }
  return set;
}

// Row gather order induced by a block permutation: output row r takes input
// row spatial_row_map(...)[r].
inline std::vector<std::size_t> spatial_row_map(const Permutation& perm,
                                                const BlockPartition& part) {
  if (perm.size() != part.block_count())
    throw ContractError("spatial permutation length " + std::to_string(perm.size()) +
                        " != block count " + std::to_string(part.block_count()));
  perm.validate();
  std::vector<std::size_t> map;
  map.reserve(part.channel_count());
  for (std::size_t slot = 0; slot < perm.size(); ++slot) {
    const auto& ch = part.blocks[static_cast<std::size_t>(perm[slot])].channels;
    map.insert(map.end(), ch.begin(), ch.end());
  }
  return map;
}

// Blocks concatenated in permuted order; the adjacency is never permuted
// (the graph keeps the scalp topology).
inline Matrix apply_spatial(const Matrix& x, const Permutation& perm,
                            const BlockPartition& part) {
  const auto map = spatial_row_map(perm, part);
  if (x.rows() != map.size())
    throw ContractError("apply_spatial: X has " + std::to_string(x.rows()) +
                        " rows, partition covers " + std::to_string(map.size()));
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < map.size(); ++r)
    std::copy(x.data() + map[r] * x.cols(), x.data() + (map[r] + 1) * x.cols(),
              out.data() + r * x.cols());
  return out;
}

// Exact inverse of apply_spatial. With unequal block sizes the block
// boundaries of the scrambled matrix differ from the original ones, so the
// inverse scatters rows through the same row map rather than re-applying a
// block permutation.
inline Matrix undo_spatial(const Matrix& x, const Permutation& perm,
                           const BlockPartition& part) {
  const auto map = spatial_row_map(perm, part);
  if (x.rows() != map.size())
    throw ContractError("undo_spatial: X has " + std::to_string(x.rows()) +
                        " rows, partition covers " + std::to_string(map.size()));
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < map.size(); ++r)
    std::copy(x.data() + r * x.cols(), x.data() + (r + 1) * x.cols(),
              out.data() + map[r] * x.cols());
  return out;
}

// Column j of the output is column perm[j] of the input, same for every
// channel. Band column order: delta, theta, alpha, beta, gamma.
inline Matrix apply_frequency(const Matrix& x, const Permutation& perm) {
  if (perm.size() != x.cols())
    throw ContractError("apply_frequency: permutation length " + std::to_string(perm.size()) +
                        " != band count " + std::to_string(x.cols()));
  perm.validate();
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j)
      out.at(i, j) = x.at(i, static_cast<std::size_t>(perm[j]));
  return out;
}

enum class PuzzleKind { kSpatial, kFrequency };

struct PuzzleSample {
  Matrix x;
  int label = 0;  // 1..k
};

inline PuzzleSample random_puzzle(const Matrix& x, const PermutationSet& set, PuzzleKind kind,
                                  const BlockPartition* part, Rng& rng) {
  const auto draw = rng.next_below(static_cast<std::uint32_t>(set.k()));
  const Permutation& p = set.perms[draw];
  PuzzleSample s;
  if (kind == PuzzleKind::kSpatial) {
    if (!part) throw ContractError("random_puzzle: spatial kind needs a partition");
    s.x = apply_spatial(x, p, *part);
  } else {
    s.x = apply_frequency(x, p);
  }
  s.label = set.label_of(draw);
  return s;
}

// -- serialization -----------------------------------------------------------

inline std::string write_permutation_set(const PermutationSet& set) {
  nlohmann::ordered_json j;
  j["m"] = set.m;
  j["k"] = set.k();
  j["seed"] = set.seed;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& p : set.perms) arr.push_back(p.mapping);
  j["perms"] = std::move(arr);
  return j.dump(1) + "\n";
}

inline PermutationSet load_permutation_set(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("permutation set JSON parse failed: ") + e.what());
  }
  PermutationSet set;
  try {
    set.m = j.at("m").get<std::size_t>();
    set.seed = j.at("seed").get<std::uint64_t>();
    const auto declared_k = j.at("k").get<std::size_t>();
    for (const auto& row : j.at("perms")) {
      Permutation p;
      p.mapping = row.get<std::vector<int>>();
      set.perms.push_back(std::move(p));
    }
    if (set.perms.size() != declared_k)
      throw FormatError("permutation set declares k=" + std::to_string(declared_k) +
                        " but lists " + std::to_string(set.perms.size()));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("permutation set JSON structure invalid: ") + e.what());
  }
  set.validate();
  return set;
}

}  // namespace gmss
