#pragma once

// Dataset container and synthetic generator.
//
// On-disk container: binary payload + JSON manifest at <path> and
// <path>.json. Payload layout, all little-endian:
//   bytes 0..7   magic "GMSSDS1\0"
//   bytes 8..11  u32 format version (1)
//   bytes 12..15 u32 record count
//   then per record, 2496 bytes:
//     62*5 f64 features, row-major (2480 bytes)
//     u32 label, u32 subject, u32 session, u32 trial
// The manifest carries name, class metadata, subject/session/trial counts and
// a byte-offset index with one entry per record. Loading validates both files
// and fails atomically; format errors name the byte offset.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmss/bytes.hpp"
#include "gmss/errors.hpp"
#include "gmss/matrix.hpp"
#include "gmss/puzzles.hpp"
#include "gmss/rng.hpp"

namespace gmss {

inline constexpr char kDatasetMagic[8] = {'G', 'M', 'S', 'S', 'D', 'S', '1', '\0'};
inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::size_t kRecordRows = 62;
inline constexpr std::size_t kRecordCols = 5;
inline constexpr std::size_t kRecordBytes = kRecordRows * kRecordCols * 8 + 16;
inline constexpr std::size_t kPayloadHeaderBytes = 16;

struct SampleRecord {
  Matrix features;  // 62x5
  std::uint32_t label = 0;
  std::uint32_t subject = 0;
  std::uint32_t session = 0;
  std::uint32_t trial = 0;
};

struct DatasetManifest {
  std::string name;
  std::uint32_t classes = 0;
  std::vector<std::string> class_names;
  std::uint32_t subjects = 0;
  std::uint32_t sessions = 0;
  std::uint32_t trials = 0;
  std::vector<std::uint64_t> index;  // byte offset of each record in the payload

  std::size_t records() const { return index.size(); }

  void validate() const {
    if (classes == 0) throw ContractError("manifest: class count must be positive");
    if (class_names.size() != classes)
      throw ContractError("manifest: " + std::to_string(class_names.size()) +
                          " class names for " + std::to_string(classes) + " classes");
    if (subjects == 0 || sessions == 0 || trials == 0)
      throw ContractError("manifest: subject/session/trial counts must be positive");
    for (std::size_t i = 0; i < index.size(); ++i) {
      const std::uint64_t want = kPayloadHeaderBytes + i * kRecordBytes;
      if (index[i] != want)
        throw ContractError("manifest: index entry " + std::to_string(i) + " is " +
                            std::to_string(index[i]) + ", record stride requires " +
                            std::to_string(want));
    }
  }
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<SampleRecord> records;
};

namespace detail {

inline void check_record(const SampleRecord& r, const DatasetManifest& m, std::size_t i) {
  if (r.features.rows() != kRecordRows || r.features.cols() != kRecordCols)
    throw ContractError("record " + std::to_string(i) + ": features are " +
                        std::to_string(r.features.rows()) + "x" +
                        std::to_string(r.features.cols()) + ", need 62x5");
  for (double v : r.features.values())
    if (!std::isfinite(v))
      throw ContractError("record " + std::to_string(i) + ": non-finite feature");
  if (r.label >= m.classes)
    throw ContractError("record " + std::to_string(i) + ": label " +
                        std::to_string(r.label) + " outside " + std::to_string(m.classes) +
                        " classes");
  if (r.subject >= m.subjects || r.session >= m.sessions || r.trial >= m.trials)
    throw ContractError("record " + std::to_string(i) + ": subject/session/trial id " +
                        std::to_string(r.subject) + "/" + std::to_string(r.session) + "/" +
                        std::to_string(r.trial) + " outside manifest counts");
}

}  // namespace detail

inline std::string manifest_path_for(const std::string& payload_path) {
  return payload_path + ".json";
}

// Writes <path> (payload) and <path>.json (manifest). The caller's manifest
// index is recomputed from the record count.
inline void write_dataset(DatasetManifest manifest, const std::vector<SampleRecord>& records,
                          const std::string& path) {
  manifest.index.resize(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    manifest.index[i] = kPayloadHeaderBytes + i * kRecordBytes;
  manifest.validate();
  for (std::size_t i = 0; i < records.size(); ++i)
    detail::check_record(records[i], manifest, i);

  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  os.write(kDatasetMagic, 8);
  detail::put_u32(os, kDatasetVersion);
  detail::put_u32(os, static_cast<std::uint32_t>(records.size()));
  for (const SampleRecord& r : records) {
    for (double v : r.features.values()) detail::put_f64(os, v);
    detail::put_u32(os, r.label);
    detail::put_u32(os, r.subject);
    detail::put_u32(os, r.session);
    detail::put_u32(os, r.trial);
  }
  os.flush();
  if (!os) throw FormatError("write failed for " + path);

  nlohmann::ordered_json j;
  j["name"] = manifest.name;
  j["classes"] = manifest.classes;
  j["class_names"] = manifest.class_names;
  j["subjects"] = manifest.subjects;
  j["sessions"] = manifest.sessions;
  j["trials"] = manifest.trials;
  j["records"] = records.size();
  j["index"] = manifest.index;
  std::ofstream ms(manifest_path_for(path));
  if (!ms) throw FormatError("cannot open " + manifest_path_for(path) + " for writing");
  ms << j.dump(1) << "\n";
  ms.flush();
  if (!ms) throw FormatError("write failed for " + manifest_path_for(path));
}

inline Dataset load_dataset(const std::string& path) {
  const std::string mpath = manifest_path_for(path);
  std::ifstream ms(mpath);
  if (!ms) throw FormatError("cannot open manifest " + mpath);
  nlohmann::json j;
  try {
    ms >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + mpath + ": " + e.what());
  }
  if (!j.is_object()) throw FormatError("manifest " + mpath + ": not a JSON object");
  for (const char* key :
       {"name", "classes", "class_names", "subjects", "sessions", "trials", "records",
        "index"})
    if (!j.contains(key))
      throw FormatError("manifest " + mpath + ": missing key \"" + key + "\"");
  for (const auto& [key, value] : j.items())
    if (key != "name" && key != "classes" && key != "class_names" && key != "subjects" &&
        key != "sessions" && key != "trials" && key != "records" && key != "index")
      throw FormatError("manifest " + mpath + ": unknown key \"" + key + "\"");

  Dataset ds;
  try {
    ds.manifest.name = j["name"].get<std::string>();
    ds.manifest.classes = j["classes"].get<std::uint32_t>();
    ds.manifest.class_names = j["class_names"].get<std::vector<std::string>>();
    ds.manifest.subjects = j["subjects"].get<std::uint32_t>();
    ds.manifest.sessions = j["sessions"].get<std::uint32_t>();
    ds.manifest.trials = j["trials"].get<std::uint32_t>();
    ds.manifest.index = j["index"].get<std::vector<std::uint64_t>>();
    if (j["records"].get<std::uint64_t>() != ds.manifest.index.size())
      throw FormatError("manifest " + mpath + ": records=" +
                        std::to_string(j["records"].get<std::uint64_t>()) + " but index has " +
                        std::to_string(ds.manifest.index.size()) + " entries");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + mpath + ": " + e.what());
  }
  try {
    ds.manifest.validate();
  } catch (const ContractError& e) {
    throw FormatError(mpath + ": " + e.what());
  }

  std::ifstream ps(path, std::ios::binary);
  if (!ps) throw FormatError("cannot open payload " + path);
  std::ostringstream buf;
  buf << ps.rdbuf();
  const std::string bytes = buf.str();
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());

  if (bytes.size() < kPayloadHeaderBytes)
    throw FormatError(path + ": truncated header at byte " + std::to_string(bytes.size()));
  if (!std::equal(kDatasetMagic, kDatasetMagic + 8, bytes.data()))
    throw FormatError(path + ": bad magic at byte 0");
  const std::uint32_t version = detail::decode_u32(p + 8);
  if (version != kDatasetVersion)
    throw FormatError(path + ": unsupported version " + std::to_string(version) +
                      " at byte 8");
  const std::uint32_t count = detail::decode_u32(p + 12);
  if (count != ds.manifest.records())
    throw FormatError(path + ": payload holds " + std::to_string(count) +
                      " records at byte 12, manifest claims " +
                      std::to_string(ds.manifest.records()));
  const std::size_t want = kPayloadHeaderBytes + static_cast<std::size_t>(count) * kRecordBytes;
  if (bytes.size() != want)
    throw FormatError(path + ": payload is " + std::to_string(bytes.size()) +
                      " bytes, expected " + std::to_string(want) + "; ends at byte " +
                      std::to_string(bytes.size()));

  ds.records.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t off = static_cast<std::size_t>(ds.manifest.index[i]);
    SampleRecord r;
    r.features = Matrix(kRecordRows, kRecordCols);
    for (std::size_t k = 0; k < kRecordRows * kRecordCols; ++k) {
      r.features[k] = detail::decode_f64(p + off + 8 * k);
      if (!std::isfinite(r.features[k]))
        throw FormatError(path + ": non-finite feature at byte " +
                          std::to_string(off + 8 * k));
    }
    const std::size_t tail = off + kRecordRows * kRecordCols * 8;
    r.label = detail::decode_u32(p + tail);
    r.subject = detail::decode_u32(p + tail + 4);
    r.session = detail::decode_u32(p + tail + 8);
    r.trial = detail::decode_u32(p + tail + 12);
    try {
      detail::check_record(r, ds.manifest, i);
    } catch (const ContractError& e) {
      throw FormatError(path + ": at byte " + std::to_string(off) + ": " + e.what());
    }
    ds.records.push_back(std::move(r));
  }
  return ds;
}

// -- synthetic generator ------------------------------------------------------

struct SignalEntry {
  std::uint32_t cls = 0;
  std::string region;
  std::size_t band = 0;
  double shift = 0.0;
};

struct SyntheticSpec {
  std::string name = "synthetic";
  std::uint32_t classes = 3;
  std::uint32_t samples_per_class = 100;  // per subject
  std::uint32_t subjects = 1;
  std::uint32_t sessions = 1;
  std::uint32_t trials = 3;
  std::vector<SignalEntry> signals;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;

  void validate(const BlockPartition& part) const {
    if (classes == 0) throw ConfigError("synthetic spec: class count must be positive");
    if (samples_per_class == 0)
      throw ConfigError("synthetic spec: samples per class must be positive");
    if (subjects == 0 || sessions == 0)
      throw ConfigError("synthetic spec: subjects and sessions must be positive");
    if (trials < classes || trials % classes != 0)
      throw ConfigError("synthetic spec: trials (" + std::to_string(trials) +
                        ") must be a positive multiple of classes (" +
                        std::to_string(classes) + ") so trial labels balance");
    if (!(noise_scale > 0.0)) throw ConfigError("synthetic spec: noise scale must be > 0");
    std::vector<bool> covered(classes, false);
    for (const SignalEntry& e : signals) {
      if (e.cls >= classes)
        throw ConfigError("synthetic spec: signal class " + std::to_string(e.cls) +
                          " outside " + std::to_string(classes) + " classes");
      bool found = false;
      for (const Block& b : part.blocks) found |= b.region == e.region;
      if (!found) throw ConfigError("synthetic spec: unknown region \"" + e.region + "\"");
      if (e.band >= kRecordCols)
        throw ConfigError("synthetic spec: band " + std::to_string(e.band) +
                          " outside 0.." + std::to_string(kRecordCols - 1));
      if (!std::isfinite(e.shift))
        throw ConfigError("synthetic spec: non-finite shift for class " +
                          std::to_string(e.cls));
      covered[e.cls] = true;
    }
    for (std::uint32_t c = 0; c < classes; ++c)
      if (!covered[c])
        throw ConfigError("synthetic spec: class " + std::to_string(c) +
                          " has no signal entry");
  }
};

// Record emission order: subject, then sample index, then class, so any prefix
// of the record list is near class-balanced. Sample i of a class sits in
// session i % sessions and in that class's trial number (i / sessions) %
// (trials / classes); trial t carries label t % classes. Features draw 310
// Gaussians row-major from Rng(seed, kSynthData) scaled by noise_scale, then
// the class's (region, band) shifts are added.
inline Dataset gen_synthetic(const SyntheticSpec& spec, const BlockPartition& part) {
  spec.validate(part);
  Dataset ds;
  ds.manifest.name = spec.name;
  ds.manifest.classes = spec.classes;
  for (std::uint32_t c = 0; c < spec.classes; ++c)
    ds.manifest.class_names.push_back("class" + std::to_string(c));
  ds.manifest.subjects = spec.subjects;
  ds.manifest.sessions = spec.sessions;
  ds.manifest.trials = spec.trials;

  const std::uint32_t trials_per_class = spec.trials / spec.classes;
  Rng rng(spec.seed, stream::kSynthData);
  for (std::uint32_t s = 0; s < spec.subjects; ++s)
    for (std::uint32_t i = 0; i < spec.samples_per_class; ++i)
      for (std::uint32_t c = 0; c < spec.classes; ++c) {
        SampleRecord r;
        r.label = c;
        r.subject = s;
        r.session = i % spec.sessions;
        const std::uint32_t nth = (i / spec.sessions) % trials_per_class;
        r.trial = nth * spec.classes + c;  // label of trial t is t % classes
        r.features = Matrix(kRecordRows, kRecordCols);
        for (std::size_t k = 0; k < kRecordRows * kRecordCols; ++k)
          r.features[k] = spec.noise_scale * rng.next_gaussian();
        for (const SignalEntry& e : spec.signals) {
          if (e.cls != c) continue;
          for (const Block& b : part.blocks)
            if (b.region == e.region)
              for (std::size_t ch : b.channels) r.features.at(ch, e.band) += e.shift;
        }
        ds.records.push_back(std::move(r));
      }

  ds.manifest.index.resize(ds.records.size());
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    ds.manifest.index[i] = kPayloadHeaderBytes + i * kRecordBytes;
  ds.manifest.validate();
  return ds;
}

// JSON form of SyntheticSpec for the CLI. Unknown keys are config errors.
inline SyntheticSpec synthetic_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("synthetic spec: not a JSON object");
  SyntheticSpec s;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "name") s.name = value.get<std::string>();
      else if (key == "classes") s.classes = value.get<std::uint32_t>();
      else if (key == "samples_per_class") s.samples_per_class = value.get<std::uint32_t>();
      else if (key == "subjects") s.subjects = value.get<std::uint32_t>();
      else if (key == "sessions") s.sessions = value.get<std::uint32_t>();
      else if (key == "trials") s.trials = value.get<std::uint32_t>();
      else if (key == "noise_scale") s.noise_scale = value.get<double>();
      else if (key == "seed") s.seed = value.get<std::uint64_t>();
      else if (key == "signals") {
        if (!value.is_array()) throw ConfigError("synthetic spec: signals must be an array");
        for (const auto& item : value) {
          SignalEntry e;
          for (const auto& [k2, v2] : item.items()) {
            if (k2 == "class") e.cls = v2.get<std::uint32_t>();
            else if (k2 == "region") e.region = v2.get<std::string>();
            else if (k2 == "band") e.band = v2.get<std::size_t>();
            else if (k2 == "shift") e.shift = v2.get<double>();
            else throw ConfigError("synthetic spec: unknown signal key \"" + k2 + "\"");
          }
          s.signals.push_back(std::move(e));
        }
      } else {
        throw ConfigError("synthetic spec: unknown key \"" + key + "\"");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  return s;
}

inline std::string synthetic_spec_to_json(const SyntheticSpec& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["classes"] = s.classes;
  j["samples_per_class"] = s.samples_per_class;
  j["subjects"] = s.subjects;
  j["sessions"] = s.sessions;
  j["trials"] = s.trials;
  j["signals"] = nlohmann::ordered_json::array();
  for (const SignalEntry& e : s.signals) {
    nlohmann::ordered_json je;
    je["class"] = e.cls;
    je["region"] = e.region;
    je["band"] = e.band;
    je["shift"] = e.shift;
    j["signals"].push_back(je);
  }
  j["noise_scale"] = s.noise_scale;
  j["seed"] = s.seed;
  return j.dump(1) + "\n";
}

}  // namespace gmss
