#pragma once

// Run configuration: JSON file -> ExperimentConfig with strict key checking.
// Defaults are the paper values already baked into TrainConfig, so an empty
// object {} is a valid config.

#include <cstdint>
#include <set>
#include <string>

#include <json.hpp>

#include "gmss/errors.hpp"
#include "gmss/trainer.hpp"

namespace gmss {

struct RunConfig {
  ExperimentConfig exp;
  bool seed_set = false;  // whether the file carried an explicit "seed"
};

inline TrainMode parse_mode(const std::string& s) {
  if (s == "unsupervised") return TrainMode::Unsupervised;
  if (s == "supervised") return TrainMode::Supervised;
  throw ConfigError("unknown mode '" + s + "' (want unsupervised or supervised)");
}

inline SplitMode parse_split(const std::string& s) {
  if (s == "holdout") return SplitMode::Holdout;
  if (s == "subject_dependent") return SplitMode::SubjectDependent;
  if (s == "loso") return SplitMode::Loso;
  throw ConfigError("unknown split '" + s + "' (want holdout, subject_dependent or loso)");
}

namespace detail {

inline std::uint64_t cfg_count(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0))
    throw ConfigError(std::string("run config: ") + key + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

inline double cfg_real(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("run config: ") + key + " must be a number");
  return v.get<double>();
}

inline std::string cfg_string(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw ConfigError(std::string("run config: ") + key + " must be a string");
  return v.get<std::string>();
}

}  // namespace detail

inline RunConfig run_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("run config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("run config: top level must be a JSON object");

  static const std::set<std::string> known = {
      "mode",        "epochs",        "batch_size",    "m_views",       "tau",
      "k_cheb",      "k_spatial",     "k_freq",        "lr",            "weight_decay",
      "probe_epochs", "seed",         "split",         "holdout_train", "holdout_test",
      "sd_train_trials", "sd_test_trials", "timing"};
  for (const auto& [key, val] : j.items())
    if (!known.count(key)) throw ConfigError("run config: unknown key '" + key + "'");

  RunConfig rc;
  auto& t = rc.exp.train;
  if (j.contains("mode")) t.mode = parse_mode(detail::cfg_string(j, "mode"));
  if (j.contains("epochs")) t.epochs = detail::cfg_count(j, "epochs");
  if (j.contains("batch_size")) t.batch_size = detail::cfg_count(j, "batch_size");
  if (j.contains("m_views")) t.m_views = detail::cfg_count(j, "m_views");
  if (j.contains("tau")) t.tau = detail::cfg_real(j, "tau");
  if (j.contains("k_cheb")) t.k_cheb = detail::cfg_count(j, "k_cheb");
  if (j.contains("k_spatial")) t.k_spatial = detail::cfg_count(j, "k_spatial");
  if (j.contains("k_freq")) t.k_freq = detail::cfg_count(j, "k_freq");
  if (j.contains("lr")) t.adam.lr = detail::cfg_real(j, "lr");
  if (j.contains("weight_decay")) t.adam.weight_decay = detail::cfg_real(j, "weight_decay");
  if (j.contains("probe_epochs")) t.probe_epochs = detail::cfg_count(j, "probe_epochs");
  if (j.contains("seed")) {
    t.seed = detail::cfg_count(j, "seed");
    rc.seed_set = true;
  }
  if (j.contains("split")) rc.exp.split = parse_split(detail::cfg_string(j, "split"));
  if (j.contains("holdout_train")) rc.exp.holdout_train = detail::cfg_count(j, "holdout_train");
  if (j.contains("holdout_test")) rc.exp.holdout_test = detail::cfg_count(j, "holdout_test");
  if (j.contains("sd_train_trials"))
    rc.exp.sd_train_trials = static_cast<std::uint32_t>(detail::cfg_count(j, "sd_train_trials"));
  if (j.contains("sd_test_trials"))
    rc.exp.sd_test_trials = static_cast<std::uint32_t>(detail::cfg_count(j, "sd_test_trials"));
  if (j.contains("timing")) {
    const auto& v = j.at("timing");
    if (!v.is_boolean()) throw ConfigError("run config: timing must be a boolean");
    rc.exp.timing = v.get<bool>();
  }
  t.validate();
  return rc;
}

}  // namespace gmss
