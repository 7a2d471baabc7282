#pragma once

// File formats: signal CSV, label / report JSON, score CSV, model
// checkpoints and an SVG score plot.

#include <aer/config.hpp>
#include <aer/detector.hpp>
#include <aer/error.hpp>
#include <aer/model.hpp>
#include <aer/pipeline.hpp>
#include <aer/signal.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace aer {

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

/// Parses a full numeric token; anything else (including empty) is missing.
inline double parse_sample(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) return kMissing;
  return v;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << content;
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

inline json parse_json_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, "'" + path + "': " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Signal CSV

/// Header row, integer timestamp column, then one column per channel. Empty
/// or non-numeric samples become missing. The first data channel is the
/// target unless `target` (0-based) says otherwise.
inline Signal parse_signal_csv(std::string_view text, std::string name = "signal", Eigen::Index target = 0) {
  std::vector<std::int64_t> ts;
  std::vector<std::vector<double>> rows;
  std::size_t columns = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line_no == 1) {
      const auto header = detail::split_fields(line);
      if (header.size() < 2) {
        throw Error(ErrorKind::Parse, name + ":1: header needs a timestamp column and at least one channel");
      }
      columns = header.size();
      continue;
    }
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line);
    const std::string where = name + ":" + std::to_string(line_no) + ": ";
    if (fields.size() != columns) {
      throw Error(ErrorKind::Parse, where + "expected " + std::to_string(columns) + " fields, found " +
                                        std::to_string(fields.size()));
    }
    std::int64_t t = 0;
    const auto res = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), t);
    if (fields[0].empty() || res.ec != std::errc() || res.ptr != fields[0].data() + fields[0].size()) {
      throw Error(ErrorKind::Parse, where + "timestamp '" + std::string(fields[0]) + "' is not an integer");
    }
    if (!ts.empty() && t <= ts.back()) throw Error(ErrorKind::Parse, where + "timestamps must strictly increase");
    ts.push_back(t);
    std::vector<double> row;
    for (std::size_t c = 1; c < fields.size(); ++c) row.push_back(detail::parse_sample(fields[c]));
    rows.push_back(std::move(row));
  }
  if (line_no == 0) throw Error(ErrorKind::Parse, name + ": empty file");
  Signal s;
  s.name = std::move(name);
  s.timestamps = std::move(ts);
  s.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns - 1));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      s.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  s.target = target;
  s.validate();
  return s;
}

inline Signal read_signal_csv(const std::string& path, Eigen::Index target = 0) {
  return parse_signal_csv(detail::read_file(path), std::filesystem::path(path).stem().string(), target);
}

inline std::string signal_to_csv(const Signal& s) {
  std::string out = "timestamp";
  for (Eigen::Index c = 0; c < s.channels(); ++c) {
    out += s.channels() == 1 ? ",value" : ",value_" + std::to_string(c + 1);
  }
  out += '\n';
  for (Eigen::Index r = 0; r < s.length(); ++r) {
    out += std::to_string(s.timestamps[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < s.channels(); ++c) {
      out += ',';
      if (!is_missing(s.values(r, c))) out += format_double(s.values(r, c));
    }
    out += '\n';
  }
  return out;
}

inline void write_signal_csv(const Signal& s, const std::string& path) { detail::write_file(path, signal_to_csv(s)); }

// ---------------------------------------------------------------------------
// Labels and reports

inline std::vector<LabeledInterval> labels_from_json(const json& j, const std::string& origin = "labels") {
  if (!j.is_array()) throw Error(ErrorKind::Parse, origin + ": expected a JSON array of {start, end} objects");
  std::vector<LabeledInterval> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const json& e = j[k];
    if (!e.is_object() || !e.contains("start") || !e.contains("end") || !e["start"].is_number_integer() ||
        !e["end"].is_number_integer()) {
      throw Error(ErrorKind::Parse, origin + ": entry " + std::to_string(k) + " needs integer start and end");
    }
    LabeledInterval iv{e["start"].get<std::int64_t>(), e["end"].get<std::int64_t>()};
    if (iv.start > iv.end) throw Error(ErrorKind::Parse, origin + ": entry " + std::to_string(k) + " has start > end");
    out.push_back(iv);
  }
  return out;
}

inline std::vector<LabeledInterval> read_labels_json(const std::string& path) {
  return labels_from_json(detail::parse_json_file(path), path);
}

inline json labels_to_json(const std::vector<LabeledInterval>& labels) {
  json j = json::array();
  for (const auto& iv : labels) j.push_back({{"start", iv.start}, {"end", iv.end}});
  return j;
}

inline void write_labels_json(const std::vector<LabeledInterval>& labels, const std::string& path) {
  detail::write_file(path, labels_to_json(labels).dump(2) + "\n");
}

/// One report entry in timestamp units.
struct ReportEntry {
  LabeledInterval range;
  double peak = 0.0;
  bool pruned = false;
};

inline std::vector<ReportEntry> report_entries(const AnomalyReport& report, const Signal& signal, Eigen::Index offset) {
  std::vector<ReportEntry> out;
  for (const auto& iv : report.intervals) out.push_back({to_timestamps(iv, signal, offset), iv.peak_score, iv.pruned});
  return out;
}

inline json report_to_json(const std::vector<ReportEntry>& entries) {
  json j = json::array();
  for (const auto& e : entries) {
    j.push_back({{"start", e.range.start}, {"end", e.range.end}, {"peak", e.peak}, {"pruned", e.pruned}});
  }
  return j;
}

inline std::vector<ReportEntry> report_from_json(const json& j, const std::string& origin = "report") {
  if (!j.is_array()) throw Error(ErrorKind::Parse, origin + ": expected a JSON array");
  std::vector<ReportEntry> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const json& e = j[k];
    const bool ok = e.is_object() && e.contains("start") && e["start"].is_number_integer() && e.contains("end") &&
                    e["end"].is_number_integer() && e.contains("peak") && e["peak"].is_number() &&
                    e.contains("pruned") && e["pruned"].is_boolean();
    if (!ok) throw Error(ErrorKind::Parse, origin + ": entry " + std::to_string(k) + " is not {start, end, peak, pruned}");
    out.push_back({{e["start"].get<std::int64_t>(), e["end"].get<std::int64_t>()},
                   e["peak"].get<double>(),
                   e["pruned"].get<bool>()});
  }
  return out;
}

inline std::vector<ReportEntry> read_report_json(const std::string& path) {
  return report_from_json(detail::parse_json_file(path), path);
}

// ---------------------------------------------------------------------------
// Scores

/// `index,score,kind` rows for each series in turn; indices are 1-based in
/// the scored segment.
inline std::string scores_to_csv(const std::vector<const ScoreSeries*>& series) {
  std::string out = "index,score,kind\n";
  for (const ScoreSeries* s : series) {
    const std::string kind(to_string(s->kind));
    for (std::size_t i = 0; i < s->size(); ++i) {
      if (!s->valid[i]) continue;
      out += std::to_string(i + 1);
      out += ',';
      out += format_double(s->scores[i]);
      out += ',';
      out += kind;
      out += '\n';
    }
  }
  return out;
}

/// Polyline of the combined scores with detections shaded (kept in red,
/// pruned in grey).
inline std::string scores_to_svg(const ScoreSeries& scores, const AnomalyReport& report, const std::string& title) {
  const double width = 1000, height = 300, pad = 30;
  const auto n = static_cast<double>(std::max<std::size_t>(scores.size(), 2) - 1);
  const double lo = scores.min_valid().value_or(0.0);
  double hi = scores.max_valid().value_or(1.0);
  if (hi <= lo) hi = lo + 1.0;
  auto x = [&](double i) { return pad + (width - 2 * pad) * i / n; };
  auto y = [&](double v) { return height - pad - (height - 2 * pad) * (v - lo) / (hi - lo); };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << pad << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  for (const auto& iv : report.intervals) {
    const double x0 = x(static_cast<double>(iv.start - 1)) - 1;
    const double x1 = x(static_cast<double>(iv.end - 1)) + 1;
    svg << "<rect x=\"" << x0 << "\" y=\"" << pad << "\" width=\"" << (x1 - x0) << "\" height=\""
        << (height - 2 * pad) << "\" fill=\"" << (iv.pruned ? "#bbbbbb" : "#e45756") << "\" fill-opacity=\"0.4\"/>\n";
  }
  svg << "<polyline fill=\"none\" stroke=\"#4c78a8\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    svg << x(static_cast<double>(i)) << ',' << y(scores.scores[i]) << ' ';
  }
  svg << "\"/>\n</svg>\n";
  return svg.str();
}

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr std::string_view kCheckpointFormat = "aer-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  AerModel model;
  Preprocessor preprocessor;
  std::vector<double> loss_history;
};

inline json checkpoint_to_json(const AerModel& model, const Preprocessor& pre, const std::vector<double>& losses,
                               const PipelineConfig& config) {
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["config"] = to_json(config);
  j["channels"] = model.channels();
  j["target_channel"] = model.target_channel() + 1;
  j["loss_history"] = losses;
  json p;
  if (pre.trend) {
    p["trend"] = {{"slope", pre.trend->slope}, {"intercept", pre.trend->intercept}};
  } else {
    p["trend"] = nullptr;
  }
  p["scale"] = {{"lo", pre.scale.lo}, {"hi", pre.scale.hi}, {"min", pre.scale.min}, {"max", pre.scale.max}};
  p["train_length"] = pre.train_length;
  j["preprocess"] = std::move(p);
  json tensors = json::array();
  for (const auto& t : model.layout().tensors) {
    const auto* first = model.parameters().data() + t.offset;
    tensors.push_back({{"name", t.name},
                       {"shape", {t.rows, t.cols}},
                       {"data", std::vector<double>(first, first + t.rows * t.cols)}});
  }
  j["tensors"] = std::move(tensors);
  return j;
}

inline Checkpoint checkpoint_from_json(const json& j, const std::string& origin = "checkpoint") {
  auto fail = [&](const std::string& what) { return Error(ErrorKind::Parse, origin + ": " + what); };
  if (!j.is_object() || j.value("format", std::string()) != kCheckpointFormat) {
    throw fail("not an AER checkpoint");
  }
  if (j.value("version", 0) != kCheckpointVersion) throw fail("unsupported checkpoint version");
  try {
    const PipelineConfig config = pipeline_config_from_json(j.at("config"));
    const auto channels = j.at("channels").get<Eigen::Index>();
    Checkpoint cp{AerModel(config.model, channels), {}, j.at("loss_history").get<std::vector<double>>()};
    cp.model.set_target_channel(j.at("target_channel").get<Eigen::Index>() - 1);

    const json& p = j.at("preprocess");
    if (!p.at("trend").is_null()) {
      cp.preprocessor.trend = TrendParams{p["trend"].at("slope").get<std::vector<double>>(),
                                          p["trend"].at("intercept").get<std::vector<double>>()};
    }
    const json& sc = p.at("scale");
    cp.preprocessor.scale = {sc.at("lo").get<double>(), sc.at("hi").get<double>(),
                             sc.at("min").get<std::vector<double>>(), sc.at("max").get<std::vector<double>>()};
    cp.preprocessor.train_length = p.at("train_length").get<Eigen::Index>();

    const json& tensors = j.at("tensors");
    const auto& layout = cp.model.layout().tensors;
    if (!tensors.is_array() || tensors.size() != layout.size()) throw fail("tensor list does not match the model");
    for (std::size_t k = 0; k < layout.size(); ++k) {
      const auto& info = layout[k];
      const json& t = tensors[k];
      const auto shape = t.at("shape").get<std::vector<Eigen::Index>>();
      if (t.at("name").get<std::string>() != info.name || shape.size() != 2 || shape[0] != info.rows ||
          shape[1] != info.cols) {
        throw Error(ErrorKind::Dimension, origin + ": tensor '" + info.name + "' expected shape [" +
                                              std::to_string(info.rows) + ", " + std::to_string(info.cols) + "]");
      }
      const auto data = t.at("data").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(data.size()) != info.rows * info.cols) {
        throw fail("tensor '" + info.name + "' has the wrong number of values");
      }
      std::copy(data.begin(), data.end(), cp.model.parameters().data() + info.offset);
    }
    return cp;
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  }
}

inline void save_checkpoint(const std::string& path, const AerModel& model, const Preprocessor& pre,
                            const std::vector<double>& losses, const PipelineConfig& config) {
  detail::write_file(path, checkpoint_to_json(model, pre, losses, config).dump() + "\n");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  return checkpoint_from_json(detail::parse_json_file(path), path);
}

}  // namespace aer
