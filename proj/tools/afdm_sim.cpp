// Command-line driver: Monte-Carlo runs, overhead and sampling-rate arithmetic.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "afdm/harness.hpp"

namespace {

std::optional<int> opt(int v) { return v >= 0 ? std::optional<int>(v) : std::nullopt; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AFDM compressed-sensing channel estimation simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a Monte-Carlo experiment from a JSON config");
  std::string config_path;
  std::string out_prefix = "results";
  std::vector<std::string> formats{"csv"};
  run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out", out_prefix, "Output path prefix");
  run->add_option("-f,--format", formats, "Output formats: csv, json, plotdata")->expected(1, 3);

  auto* overhead = app.add_subcommand("overhead", "Pilot and guard overhead per frame");
  std::string waveform = "afdm";
  int L = -1, Q = -1, n_p = -1, P = -1, n_p_td = -1, n_p_fd = -1, n_symb = -1, n_otfs = -1, m_otfs = -1;
  overhead->add_option("--waveform", waveform, "afdm, ofdm or otfs");
  overhead->add_option("-L", L, "Delay taps");
  overhead->add_option("-Q", Q, "Maximum Doppler index");
  overhead->add_option("--np", n_p, "AFDM pilot count");
  overhead->add_option("-P", P, "AFDM chirp-rate numerator");
  overhead->add_option("--np-td", n_p_td, "OFDM pilot symbols");
  overhead->add_option("--np-fd", n_p_fd, "OFDM pilot subcarriers");
  overhead->add_option("--nsymb", n_symb, "OFDM symbols per frame");
  overhead->add_option("--n-otfs", n_otfs, "OTFS Doppler dimension");
  overhead->add_option("--m-otfs", m_otfs, "OTFS delay dimension");

  auto* rate = app.add_subcommand("rate", "Minimal sampling rate of the de-chirping receiver");
  int r_np = 16, r_L = 30, r_P = 1, r_N = 4096, r_cpp = 0;
  double bw = 30e6;
  bool include_cpp = false;
  rate->add_option("--np", r_np, "Pilot count");
  rate->add_option("-L", r_L, "Delay taps");
  rate->add_option("-P", r_P, "Chirp-rate numerator");
  rate->add_option("-N", r_N, "Samples per frame");
  rate->add_option("--bandwidth", bw, "Bandwidth in Hz");
  rate->add_option("--cpp", r_cpp, "Prefix length in samples");
  rate->add_flag("--include-cpp", include_cpp, "Count the prefix in the frame duration");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const afdm::ExperimentConfig cfg = afdm::load_config(config_path);
      for (const auto& f : formats) afdm::report_format_from_string(f);
      const auto parent = std::filesystem::path(out_prefix).parent_path();
      std::error_code ec;
      if (!parent.empty()) std::filesystem::create_directories(parent, ec);
      const auto records = afdm::run_monte_carlo(cfg);
      for (const auto& f : formats) {
        const auto fmt = afdm::report_format_from_string(f);
        const std::string ext = f == "plotdata" ? ".dat" : "." + f;
        afdm::emit_report(records, fmt, out_prefix + ext);
        std::cerr << "wrote " << out_prefix + ext << "\n";
      }
      int failures = 0;
      for (const auto& r : records) {
        std::printf("N_p=%d snr=%g mse=%.4g (se %.2g) support=%.2f overhead=%d f_s=%.4g Hz failures=%d\n", r.N_p,
                    r.snr_db, r.mse, r.mse_stderr, r.support_rate, r.overhead, r.f_s_hz, r.failures);
        failures += r.failures;
      }
      return failures > 0 ? 3 : 0;
    }
    if (*overhead) {
      afdm::OverheadParams p;
      p.L = opt(L);
      p.Q = opt(Q);
      p.N_p = opt(n_p);
      p.P = opt(P);
      p.N_p_td = opt(n_p_td);
      p.N_p_fd = opt(n_p_fd);
      p.N_symb = opt(n_symb);
      p.N_otfs = opt(n_otfs);
      p.M_otfs = opt(m_otfs);
      std::printf("%d\n", afdm::pilot_overhead(afdm::waveform_from_string(waveform), p));
      return 0;
    }
    if (*rate) {
      afdm::RadarConfig cfg;
      cfg.bandwidth_hz = bw;
      cfg.N = r_N;
      cfg.L_cpp = r_cpp;
      cfg.include_cpp = include_cpp;
      const auto fs = afdm::sampling_rate(r_np, r_L, r_P, cfg);
      std::printf("f_s_hz %.6f\nratio_to_bw %.6f\n", fs.f_s_hz, fs.ratio_to_bw);
      return 0;
    }
  } catch (const afdm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
