#include <aer/io.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace {

aer::ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const aer::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no aer::Error thrown";
  return aer::ErrorKind::DegenerateInput;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("aer_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const aer::PipelineConfig c;
  const auto j = aer::to_json(c);
  EXPECT_EQ(aer::to_json(aer::pipeline_config_from_json(j)), j);
  EXPECT_EQ(j["scoring"]["combination"], "mult");
  EXPECT_EQ(j["detector"]["z"], 4.0);
}

TEST(Config, CustomValuesRoundTrip) {
  aer::PipelineConfig c;
  c.model.window_size = 50;
  c.model.seed = 99;
  c.scoring.combination = aer::Combination::Sum;
  c.scoring.beta = 0.25;
  c.detector.window_size = 40;
  c.preprocess.split_fraction = 0.3;
  const auto back = aer::pipeline_config_from_json(aer::to_json(c));
  EXPECT_EQ(back.model.window_size, 50);
  EXPECT_EQ(back.model.seed, 99u);
  EXPECT_EQ(back.scoring.combination, aer::Combination::Sum);
  EXPECT_EQ(back.scoring.beta, 0.25);
  EXPECT_EQ(back.detector.window_size, 40);
  EXPECT_EQ(back.preprocess.split_fraction, 0.3);
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_EQ(kind_of([] { aer::pipeline_config_from_json({{"modle", {}}}); }), aer::ErrorKind::Config);
  EXPECT_EQ(kind_of([] { aer::pipeline_config_from_json({{"model", {{"epoch", 3}}}}); }), aer::ErrorKind::Config);
  EXPECT_EQ(kind_of([] { aer::pipeline_config_from_json({{"detector", {{"z", "four"}}}}); }), aer::ErrorKind::Config);
  EXPECT_EQ(kind_of([] { aer::pipeline_config_from_json({{"scoring", {{"combination", "max"}}}}); }),
            aer::ErrorKind::Config);
}

TEST(Config, InvalidValuesRejected) {
  EXPECT_EQ(kind_of([] { aer::pipeline_config_from_json({{"model", {{"window_size", 1}}}}); }),
            aer::ErrorKind::Config);
  EXPECT_EQ(kind_of([] { aer::pipeline_config_from_json({{"preprocess", {{"scale_range", {1, -1}}}}}); }),
            aer::ErrorKind::Config);
}

TEST(Config, MalformedFileIsParseError) {
  const auto dir = temp_dir("cfg");
  std::ofstream(dir / "bad.json") << "{ \"model\": ";
  EXPECT_EQ(kind_of([&] { aer::load_pipeline_config((dir / "bad.json").string()); }), aer::ErrorKind::Parse);
  EXPECT_EQ(kind_of([&] { aer::load_pipeline_config((dir / "missing.json").string()); }), aer::ErrorKind::Io);
}

TEST(SignalCsv, ParsesMissingValues) {
  const auto s = aer::parse_signal_csv("timestamp,a,b\n1,0.5,1\n2,,2\n3,nan,3\n", "x");
  EXPECT_EQ(s.length(), 3);
  EXPECT_EQ(s.channels(), 2);
  EXPECT_EQ(s.timestamps, (std::vector<std::int64_t>{1, 2, 3}));
  EXPECT_EQ(s.values(0, 0), 0.5);
  EXPECT_TRUE(aer::is_missing(s.values(1, 0)));
  EXPECT_TRUE(aer::is_missing(s.values(2, 0)));
  EXPECT_EQ(s.values(2, 1), 3.0);
}

TEST(SignalCsv, ToleratesCrlfAndBlankLines) {
  const auto s = aer::parse_signal_csv("t,v\r\n1,1\r\n\r\n2,2\r\n", "x");
  EXPECT_EQ(s.length(), 2);
  EXPECT_EQ(s.values(1, 0), 2.0);
}

TEST(SignalCsv, ErrorsNameTheLine) {
  try {
    aer::parse_signal_csv("t,v\n1,1\n2,2,3\n", "sig");
    FAIL();
  } catch (const aer::Error& e) {
    EXPECT_EQ(e.kind(), aer::ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("sig:3:"), std::string::npos) << e.what();
  }
  EXPECT_EQ(kind_of([] { aer::parse_signal_csv("t,v\n1,1\nx,2\n", "s"); }), aer::ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { aer::parse_signal_csv("t,v\n2,1\n1,2\n", "s"); }), aer::ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { aer::parse_signal_csv("", "s"); }), aer::ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { aer::parse_signal_csv("t\n1\n", "s"); }), aer::ErrorKind::Parse);
}

TEST(SignalCsv, WriteReadRoundTripIsExact) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  std::vector<double> v(200);
  for (auto& x : v) x = d(rng);
  v[17] = aer::kMissing;
  auto s = aer::Signal::univariate(v, "round");
  const auto dir = temp_dir("csv");
  const auto path = (dir / "round.csv").string();
  aer::write_signal_csv(s, path);
  const auto back = aer::read_signal_csv(path);
  EXPECT_EQ(back.name, "round");
  EXPECT_EQ(back.timestamps, s.timestamps);
  for (Eigen::Index i = 0; i < 200; ++i) {
    if (i == 17) {
      EXPECT_TRUE(aer::is_missing(back.values(i, 0)));
    } else {
      EXPECT_EQ(back.values(i, 0), s.values(i, 0));
    }
  }
  EXPECT_EQ(kind_of([&] { aer::read_signal_csv((dir / "nope.csv").string()); }), aer::ErrorKind::Io);
}

TEST(Labels, RoundTripAndValidation) {
  const std::vector<aer::LabeledInterval> l{{1, 5}, {40, 40}};
  EXPECT_EQ(aer::labels_from_json(aer::labels_to_json(l)), l);
  EXPECT_EQ(kind_of([] { aer::labels_from_json(aer::json::object()); }), aer::ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { aer::labels_from_json(aer::json::parse(R"([{"start": 5, "end": 1}])")); }),
            aer::ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { aer::labels_from_json(aer::json::parse(R"([{"start": 1.5, "end": 2}])")); }),
            aer::ErrorKind::Parse);
}

TEST(Report, JsonShapeAndRoundTrip) {
  const std::vector<aer::ReportEntry> e{{{10, 12}, 0.75, false}, {{30, 30}, 0.5, true}};
  const auto j = aer::report_to_json(e);
  EXPECT_EQ(j.dump(), R"([{"start":10,"end":12,"peak":0.75,"pruned":false},{"start":30,"end":30,"peak":0.5,"pruned":true}])");
  const auto back = aer::report_from_json(j);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].range, (aer::LabeledInterval{30, 30}));
  EXPECT_TRUE(back[1].pruned);
  EXPECT_EQ(kind_of([] { aer::report_from_json(aer::json::parse(R"([{"start": 1, "end": 2}])")); }),
            aer::ErrorKind::Parse);
}

TEST(Report, EntriesUseTimestamps) {
  aer::Signal s = aer::Signal::univariate(std::vector<double>(10, 0.0));
  for (std::size_t i = 0; i < 10; ++i) s.timestamps[i] = 1000 + 60 * static_cast<std::int64_t>(i);
  aer::AnomalyReport r;
  r.intervals = {{2, 3, 1.0, false}};
  const auto e = aer::report_entries(r, s, 4);
  EXPECT_EQ(e[0].range, (aer::LabeledInterval{1000 + 60 * 5, 1000 + 60 * 6}));
}

TEST(Scores, CsvRowsPerSeries) {
  auto a = aer::ScoreSeries::dense({0.5, 1.0});
  a.kind = aer::ScoreKind::Combined;
  const auto csv = aer::scores_to_csv({&a});
  EXPECT_EQ(csv.substr(0, 16), "index,score,kind");
  EXPECT_NE(csv.find("1,0.5,combined"), std::string::npos) << csv;
  EXPECT_NE(csv.find("2,1,combined"), std::string::npos) << csv;
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(aer::format_double(0.1), "0.1");
  EXPECT_EQ(aer::format_double(3.0), "3");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(aer::format_double(x)), x);
}

namespace {

struct Trained {
  aer::PipelineConfig config;
  aer::FitResult fit;
};

Trained small_fit() {
  aer::PipelineConfig c;
  c.model.window_size = 12;
  c.model.hidden_units = 4;
  c.model.epochs = 1;
  std::vector<double> v(120);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.3 * static_cast<double>(i)) + 0.01 * static_cast<double>(i);
  return {c, aer::fit(aer::Signal::univariate(v), c)};
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitIdentical) {
  const auto t = small_fit();
  const auto dir = temp_dir("ckpt");
  const auto path = (dir / "m.ckpt.json").string();
  aer::save_checkpoint(path, t.fit.model, t.fit.preprocessor, t.fit.loss_history, t.config);
  const auto cp = aer::load_checkpoint(path);
  EXPECT_TRUE(cp.model == t.fit.model);
  EXPECT_EQ(cp.loss_history, t.fit.loss_history);
  ASSERT_TRUE(cp.preprocessor.trend.has_value());
  EXPECT_EQ(cp.preprocessor.trend->slope, t.fit.preprocessor.trend->slope);
  EXPECT_EQ(cp.preprocessor.scale.min, t.fit.preprocessor.scale.min);
  EXPECT_EQ(cp.preprocessor.train_length, t.fit.preprocessor.train_length);
  // A second save is byte-identical to the first.
  const auto again = (dir / "again.ckpt.json").string();
  aer::save_checkpoint(again, cp.model, cp.preprocessor, cp.loss_history, t.config);
  EXPECT_EQ(aer::detail::read_file(path), aer::detail::read_file(again));
}

TEST(Checkpoint, ShapeMismatchIsDimensionError) {
  const auto t = small_fit();
  auto j = aer::checkpoint_to_json(t.fit.model, t.fit.preprocessor, t.fit.loss_history, t.config);
  j["config"]["model"]["hidden_units"] = 5;
  EXPECT_EQ(kind_of([&] { aer::checkpoint_from_json(j); }), aer::ErrorKind::Dimension);
}

TEST(Checkpoint, ScoringWithDifferentWindowIsDimensionError) {
  const auto t = small_fit();
  auto other = t.config;
  other.model.window_size = 20;
  const auto s = aer::Signal::univariate(std::vector<double>(120, 0.5));
  EXPECT_EQ(kind_of([&] { aer::score(t.fit.model, t.fit.preprocessor, s, other); }), aer::ErrorKind::Dimension);
  aer::Signal two;
  two.values = Eigen::MatrixXd::Zero(120, 2);
  for (std::int64_t i = 1; i <= 120; ++i) two.timestamps.push_back(i);
  EXPECT_EQ(kind_of([&] { aer::score(t.fit.model, t.fit.preprocessor, two, t.config); }), aer::ErrorKind::Dimension);
}

TEST(Checkpoint, GarbageIsParseError) {
  EXPECT_EQ(kind_of([] { aer::checkpoint_from_json(aer::json::object()); }), aer::ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { aer::checkpoint_from_json({{"format", "aer-checkpoint"}, {"version", 1}}); }),
            aer::ErrorKind::Parse);
  const auto dir = temp_dir("garbage");
  std::ofstream(dir / "x.json") << "not json";
  EXPECT_EQ(kind_of([&] { aer::load_checkpoint((dir / "x.json").string()); }), aer::ErrorKind::Parse);
}
