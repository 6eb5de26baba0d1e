#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "afdm/harness.hpp"

using namespace afdm;

namespace {

// L = 4, Q = 1 on N = 256; uniform pilots make the columns orthogonal.
ExperimentConfig small_config() {
  ExperimentConfig c;
  c.N = 256;
  c.sparsity.model = SparsityModel::Type2;
  c.sparsity.L = 4;
  c.sparsity.Q = 1;
  c.sparsity.p_d = 0.5;
  c.sparsity.p_D = 0.5;
  c.P = 1;
  c.s_d = 4;
  c.s_D = 3;
  c.pilot_counts = {4};
  c.snr_db = {std::numeric_limits<double>::infinity()};
  c.trials = 20;
  c.master_seed = 11;
  c.threads = 1;
  return c;
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("pilot overhead formulas") {
  OverheadParams afdm;
  afdm.N_p = 16;
  afdm.L = 30;
  afdm.Q = 7;
  afdm.P = 1;
  CHECK(pilot_overhead(Waveform::AFDM, afdm) == 537);
  afdm.N_p = 0;
  CHECK(pilot_overhead(Waveform::AFDM, afdm) == 29 + 28);

  OverheadParams otfs;
  otfs.L = 30;
  otfs.Q = 7;
  otfs.N_otfs = 16;
  otfs.M_otfs = 256;
  CHECK(pilot_overhead(Waveform::OTFS, otfs) == 944);
  otfs.N_otfs = 64;
  CHECK(pilot_overhead(Waveform::OTFS, otfs) == 29 * 59);

  OverheadParams ofdm;
  ofdm.L = 30;
  ofdm.N_p_td = 4;
  ofdm.N_p_fd = 12;
  ofdm.N_symb = 14;
  CHECK(pilot_overhead(Waveform::OFDM, ofdm) == 4 * 12 + 13 * 29);

  OverheadParams missing = afdm;
  missing.P.reset();
  CHECK_THROWS_AS(pilot_overhead(Waveform::AFDM, missing), Error);
  CHECK_THROWS_AS(pilot_overhead(Waveform::OTFS, afdm), Error);
  CHECK(waveform_from_string("otfs") == Waveform::OTFS);
  CHECK_THROWS_AS(waveform_from_string("cdma"), Error);
}

TEST_CASE("noise-free small configuration is recovered exactly") {
  const auto records = run_monte_carlo(small_config());
  REQUIRE(records.size() == 1);
  const ResultRecord& r = records[0];
  CHECK(r.mse <= 1e-12);
  CHECK(r.support_rate == 1.0);
  CHECK(r.failures == 0);
  CHECK(r.trials == 20);
  CHECK(r.N_p == 4);
  CHECK(r.P == 1);
  CHECK(r.overhead == 4 * 4 + 3 + 4);
}

TEST_CASE("results do not depend on the thread count") {
  ExperimentConfig c = small_config();
  c.snr_db = {5.0, 15.0};
  c.pilot_counts = {4, 8};
  c.s_d = 2;
  c.s_D = 2;
  c.threads = 1;
  const auto serial = run_monte_carlo(c);
  c.threads = 3;
  const auto parallel = run_monte_carlo(c);
  REQUIRE(serial.size() == 4);
  CHECK(records_to_csv(serial) == records_to_csv(parallel));
  c.master_seed = 12;
  CHECK(records_to_csv(run_monte_carlo(c)) != records_to_csv(serial));
}

TEST_CASE("mse falls with SNR") {
  ExperimentConfig c = small_config();
  c.snr_db = {0.0, 10.0, 20.0, 30.0};
  c.trials = 200;
  const auto rec = run_monte_carlo(c);
  REQUIRE(rec.size() == 4);
  for (std::size_t i = 1; i < rec.size(); ++i)
    CHECK(rec[i].mse <= rec[i - 1].mse + 2 * std::hypot(rec[i].mse_stderr, rec[i - 1].mse_stderr));
  // full-support least squares: mse = sigma^2 |cols| / (pilot energy per column)
  CHECK(rec[3].mse > 0.0);
}

TEST_CASE("standard error halves with four times the trials") {
  ExperimentConfig c = small_config();
  c.snr_db = {10.0};
  c.trials = 100;
  const double se1 = run_monte_carlo(c)[0].mse_stderr;
  c.trials = 400;
  c.master_seed = 99;
  const double se4 = run_monte_carlo(c)[0].mse_stderr;
  CHECK(se4 / se1 == doctest::Approx(0.5).epsilon(0.25));
}

TEST_CASE("low-rate receiver reproduces the full-rate results without noise") {
  ExperimentConfig c = small_config();
  c.placement = PilotPlacement::Packed;
  c.s_d = 2;
  c.s_D = 2;
  c.L_cpp = 8;
  const auto full = run_monte_carlo(c);
  c.receiver = Receiver::SubNyquist;
  const auto sub = run_monte_carlo(c);
  CHECK(std::abs(full[0].mse - sub[0].mse) <= 1e-8);
  CHECK(full[0].support_rate == sub[0].support_rate);
  CHECK(sub[0].failures == 0);
  c.data_fill = true;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("failed trials are counted") {
  ExperimentConfig c = small_config();
  c.pilot_counts = {1};  // |P| = 6 < |support| = 12
  const auto rec = run_monte_carlo(c);
  CHECK(rec[0].failures == c.trials);
}

TEST_CASE("report formats") {
  ExperimentConfig c = small_config();
  c.pilot_counts = {4, 8};
  c.snr_db = {0.0, 10.0, 20.0};
  c.trials = 5;
  const auto rec = run_monte_carlo(c);
  REQUIRE(rec.size() == 6);

  const std::string one = records_to_csv({rec[0]});
  CHECK(count_lines(one) == 2);
  CHECK(one.rfind("config_hash,N,L,Q,p_d,p_D,N_p,snr_db,mse,support_rate,overhead,f_s_hz,seed", 0) == 0);

  CHECK(records_from_json(records_to_json(rec)) == rec);
  CHECK_THROWS_AS(records_from_json("[{\"N\": \"x\"}]"), Error);
  ResultRecord odd = rec[0];
  odd.snr_db = std::numeric_limits<double>::infinity();
  odd.mse = std::numeric_limits<double>::quiet_NaN();
  const ResultRecord odd_back = records_from_json(records_to_json({odd}))[0];
  CHECK(std::isinf(odd_back.snr_db));
  CHECK(std::isnan(odd_back.mse));

  const std::string plot = records_to_plotdata(rec);
  std::istringstream in(plot);
  std::string line;
  int series = 0, points = 0;
  while (std::getline(in, line)) {
    if (line.rfind("# series", 0) == 0)
      ++series;
    else if (!line.empty() && line[0] != '#')
      ++points;
  }
  CHECK(series == 2);
  CHECK(points == 6);

  const auto dir = std::filesystem::temp_directory_path() / "afdm_report_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "out.csv").string();
  emit_report(rec, ReportFormat::CSV, path);
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str() == records_to_csv(rec));
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(emit_report({}, ReportFormat::CSV, path), Error);
  CHECK_THROWS_AS(emit_report(rec, ReportFormat::CSV, "/nonexistent-dir/x.csv"), Error);
  CHECK(report_format_from_string("plotdata") == ReportFormat::PlotData);
  CHECK_THROWS_AS(report_format_from_string("xml"), Error);
}

TEST_CASE("smallest pilot count") {
  std::vector<ResultRecord> rec(3);
  rec[0].N_p = 8, rec[0].mse = 5e-4, rec[0].snr_db = 20;
  rec[1].N_p = 16, rec[1].mse = 1e-4, rec[1].snr_db = 20;
  rec[2].N_p = 32, rec[2].mse = 5e-5, rec[2].snr_db = 20;
  CHECK(smallest_pilot_count(rec, 20, 2e-4) == 16);
  CHECK_FALSE(smallest_pilot_count(rec, 20, 1e-5).has_value());
}

TEST_CASE("configuration files") {
  const ExperimentConfig c = config_from_json(
      R"({"N": 512, "L": 8, "Q": 3, "p_d": 0.25, "p_D": 0.3, "pilot_counts": [4, 8], "snr_db": [10, 20],
          "trials": 7, "master_seed": 5, "receiver": "fullrate", "solver": "htp"})");
  CHECK(c.N == 512);
  CHECK(c.sparsity.L == 8);
  CHECK(c.pilot_counts == std::vector<int>{4, 8});
  CHECK(c.solver == Solver::HTP);
  CHECK(c.chirp_rate() >= 1);
  CHECK(c.prefix_length() >= 7);
  const ExperimentConfig back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));

  CHECK_THROWS_AS(config_from_json("{"), Error);
  CHECK_THROWS_AS(config_from_json("[1, 2]"), Error);
  CHECK_THROWS_AS(config_from_json(R"({"N": "large"})"), Error);
  CHECK_THROWS_AS(config_from_json(R"({"trails": 10})"), Error);
  CHECK_THROWS_AS(config_from_json(R"({"trials": 0})"), Error);
  CHECK_THROWS_AS(config_from_json(R"({"solver": "omp"})"), Error);
  CHECK_THROWS_AS(config_from_json(R"({"pilot_counts": []})"), Error);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
}
