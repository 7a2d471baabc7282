#pragma once

// Declarative pipeline configuration with a JSON representation. Unknown keys
// are rejected so that typos fail loudly instead of silently using defaults.

#include <aer/detector.hpp>
#include <aer/error.hpp>
#include <aer/model.hpp>
#include <aer/scoring.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

namespace aer {

using json = nlohmann::ordered_json;

struct PreprocessConfig {
  bool detrend = true;
  double scale_lo = -1.0;
  double scale_hi = 1.0;
  // Fraction of the series held out at the end for scoring only; 0 trains and
  // scores on the whole series.
  double split_fraction = 0.0;

  void validate() const {
    if (!(scale_lo < scale_hi)) throw Error(ErrorKind::Config, "scale_range requires lo < hi");
    if (!(split_fraction >= 0.0 && split_fraction < 1.0)) {
      throw Error(ErrorKind::Config, "split_fraction must lie in [0, 1)");
    }
  }
};

struct PipelineConfig {
  PreprocessConfig preprocess;
  AerConfig model;
  FusionConfig scoring;
  DetectorConfig detector;
  bool plot = false;

  void validate() const {
    preprocess.validate();
    model.validate();
    scoring.validate();
    detector.validate();
  }
};

namespace detail {

inline void reject_unknown(const json& j, std::string_view section, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw Error(ErrorKind::Config, "config section '" + std::string(section) + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto k : keys) known = known || key == k;
    if (!known) {
      throw Error(ErrorKind::Config, "unknown config key '" + std::string(section) + (section.empty() ? "" : ".") +
                                         key + "'");
    }
  }
}

template <typename T>
void read(const json& j, std::string_view section, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::Config, "config key '" + std::string(section) + "." + key + "' has the wrong type");
  }
}

template <typename T>
void read(const json& j, std::string_view section, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
    return;
  }
  T v{};
  read(j, section, key, v);
  out = v;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace detail

inline json to_json(const PipelineConfig& c) {
  json j;
  j["preprocess"] = {{"detrend", c.preprocess.detrend},
                     {"scale_range", {c.preprocess.scale_lo, c.preprocess.scale_hi}},
                     {"split_fraction", c.preprocess.split_fraction}};
  j["model"] = {{"window_size", c.model.window_size}, {"gamma", c.model.gamma},
                {"hidden_units", c.model.hidden_units}, {"epochs", c.model.epochs},
                {"batch_size", c.model.batch_size},   {"learning_rate", c.model.learning_rate},
                {"seed", c.model.seed}};
  j["scoring"] = {{"smoothing_window", detail::optional_json(c.scoring.smoothing_window)},
                  {"smoothing_fraction", c.scoring.smoothing_fraction},
                  {"mask", c.scoring.mask},
                  {"mask_length", detail::optional_json(c.scoring.mask_length)},
                  {"beta", detail::optional_json(c.scoring.beta)},
                  {"dtw_half_window", c.scoring.dtw_half_window},
                  {"combination", std::string(to_string(c.scoring.combination))},
                  {"rec_method", std::string(to_string(c.scoring.rec_method))},
                  {"bidirectional", c.scoring.bidirectional}};
  j["detector"] = {{"window_size", detail::optional_json(c.detector.window_size)},
                   {"step_size", detail::optional_json(c.detector.step_size)},
                   {"z", c.detector.z},
                   {"theta", c.detector.theta}};
  j["plot"] = c.plot;
  return j;
}

inline PipelineConfig pipeline_config_from_json(const json& j) {
  using detail::read;
  PipelineConfig c;
  detail::reject_unknown(j, "", {"preprocess", "model", "scoring", "detector", "plot"});
  read(j, "", "plot", c.plot);
  if (j.contains("preprocess")) {
    const json& p = j["preprocess"];
    detail::reject_unknown(p, "preprocess", {"detrend", "scale_range", "split_fraction"});
    read(p, "preprocess", "detrend", c.preprocess.detrend);
    read(p, "preprocess", "split_fraction", c.preprocess.split_fraction);
    if (p.contains("scale_range")) {
      const json& r = p["scale_range"];
      if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
        throw Error(ErrorKind::Config, "preprocess.scale_range must be a [lo, hi] pair");
      }
      c.preprocess.scale_lo = r[0].get<double>();
      c.preprocess.scale_hi = r[1].get<double>();
    }
  }
  if (j.contains("model")) {
    const json& m = j["model"];
    detail::reject_unknown(m, "model",
                           {"window_size", "gamma", "hidden_units", "epochs", "batch_size", "learning_rate", "seed"});
    read(m, "model", "window_size", c.model.window_size);
    read(m, "model", "gamma", c.model.gamma);
    read(m, "model", "hidden_units", c.model.hidden_units);
    read(m, "model", "epochs", c.model.epochs);
    read(m, "model", "batch_size", c.model.batch_size);
    read(m, "model", "learning_rate", c.model.learning_rate);
    read(m, "model", "seed", c.model.seed);
  }
  if (j.contains("scoring")) {
    const json& s = j["scoring"];
    detail::reject_unknown(s, "scoring",
                           {"smoothing_window", "smoothing_fraction", "mask", "mask_length", "beta", "dtw_half_window",
                            "combination", "rec_method", "bidirectional"});
    read(s, "scoring", "smoothing_window", c.scoring.smoothing_window);
    read(s, "scoring", "smoothing_fraction", c.scoring.smoothing_fraction);
    read(s, "scoring", "mask", c.scoring.mask);
    read(s, "scoring", "mask_length", c.scoring.mask_length);
    read(s, "scoring", "beta", c.scoring.beta);
    read(s, "scoring", "dtw_half_window", c.scoring.dtw_half_window);
    read(s, "scoring", "bidirectional", c.scoring.bidirectional);
    std::string name;
    if (s.contains("combination")) {
      read(s, "scoring", "combination", name);
      c.scoring.combination = parse_combination(name);
    }
    if (s.contains("rec_method")) {
      read(s, "scoring", "rec_method", name);
      c.scoring.rec_method = parse_rec_method(name);
    }
  }
  if (j.contains("detector")) {
    const json& d = j["detector"];
    detail::reject_unknown(d, "detector", {"window_size", "step_size", "z", "theta"});
    read(d, "detector", "window_size", c.detector.window_size);
    read(d, "detector", "step_size", c.detector.step_size);
    read(d, "detector", "z", c.detector.z);
    read(d, "detector", "theta", c.detector.theta);
  }
  c.validate();
  return c;
}

inline PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, "config file '" + path + "': " + e.what());
  }
  return pipeline_config_from_json(j);
}

}  // namespace aer
