#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "afdm/channel.hpp"
#include "afdm/daft.hpp"
#include "afdm/sensing.hpp"
#include "afdm/subnyquist.hpp"

namespace afdm {

enum class Receiver { FullRate, SubNyquist };
enum class Solver { HiHTP, HTP };
enum class PilotPlacement { Uniform, Packed };
/// Unit: |pilot| = 1. Frame: pilots carry the energy of every reserved
/// position, so a frame with unit-energy data elsewhere has mean symbol
/// energy 1.
enum class PilotPower { Unit, Frame };

struct ExperimentConfig {
  int N = 4096;
  int c1_sign = +1;
  double c2 = 0.0;
  int L_cpp = 0;             // raised to L-1 when smaller
  std::optional<int> P;      // derived from the sparsity levels when unset
  std::optional<int> s_d;    // derived from SparsityConfig when unset
  std::optional<int> s_D;
  SparsityConfig sparsity;

  std::vector<int> pilot_counts{16};
  OverlapMode overlap = OverlapMode::Disjoint;
  PilotPlacement placement = PilotPlacement::Uniform;
  PilotPower pilot_power = PilotPower::Frame;
  bool data_fill = false;  // QPSK data outside the guards (full-rate receiver only)

  std::vector<double> snr_db{20.0};
  double bandwidth_hz = 30e6;
  bool include_cpp_in_T = true;

  int trials = 100;
  std::uint64_t master_seed = 1;
  Receiver receiver = Receiver::FullRate;
  Solver solver = Solver::HiHTP;
  int k_max = 20;
  int threads = 0;  // 0: AFDM_THREADS or hardware concurrency

  int level_d() const { return s_d.value_or(sparsity.s_d()); }
  int level_D() const { return s_D.value_or(sparsity.s_D()); }
  int chirp_rate() const;
  int prefix_length() const;
  AfdmParams afdm_params() const;
  RadarConfig radar() const;
  void validate() const;
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

/// Aggregates for one (configuration, pilot count, SNR) cell.
struct ResultRecord {
  std::string config_hash;
  int N = 0;
  int L = 0;
  int Q = 0;
  double p_d = 0.0;
  double p_D = 0.0;
  int N_p = 0;
  double snr_db = 0.0;
  double mse = 0.0;
  double support_rate = 0.0;  // exact recovery of the true active set (not a paper metric)
  int overhead = 0;
  double f_s_hz = 0.0;
  std::uint64_t seed = 0;
  double mse_stderr = 0.0;
  double mean_iterations = 0.0;
  int failures = 0;
  int trials = 0;
  int P = 0;
  double wall_time_s = 0.0;

  bool operator==(const ResultRecord&) const = default;
};

/// Thread count used by run_monte_carlo when the config leaves it at 0.
int default_thread_count();

/// For every pilot count and SNR: sample a profile, transmit a pilot frame
/// through the channel, receive, recover, and accumulate ||alpha_hat - alpha||^2.
/// Trial t draws from streams keyed by (master_seed, t), so results do not
/// depend on the thread count.
std::vector<ResultRecord> run_monte_carlo(const ExperimentConfig& cfg);

/// Smallest N_p whose record at snr_db has mse <= threshold.
std::optional<int> smallest_pilot_count(const std::vector<ResultRecord>& records, double snr_db,
                                        double threshold);

enum class Waveform { AFDM, OFDM, OTFS };
Waveform waveform_from_string(const std::string& s);

struct OverheadParams {
  std::optional<int> L;
  std::optional<int> Q;
  std::optional<int> N_p;        // AFDM pilots
  std::optional<int> P;          // AFDM chirp-rate numerator
  std::optional<int> N_p_td;     // OFDM pilot symbols
  std::optional<int> N_p_fd;     // OFDM pilot subcarriers per symbol
  std::optional<int> N_symb;     // OFDM symbols per frame
  std::optional<int> N_otfs;
  std::optional<int> M_otfs;
};

/// Pilot-plus-guard samples per frame:
///   AFDM  N_p((L-1)P+1) + (L-1)P + 4Q
///   OFDM  N_p,td N_p,fd + (N_symb-1)(L-1)
///   OTFS  min(4Q+1, N_otfs) min(2L-1, M_otfs)
int pilot_overhead(Waveform waveform, const OverheadParams& p);

enum class ReportFormat { CSV, JSON, PlotData };
ReportFormat report_format_from_string(const std::string& s);

std::string records_to_csv(const std::vector<ResultRecord>& records);
std::string records_to_json(const std::vector<ResultRecord>& records);
std::vector<ResultRecord> records_from_json(const std::string& text);
/// One "(snr_db, mse)" series per (config_hash, N_p).
std::string records_to_plotdata(const std::vector<ResultRecord>& records);

void emit_report(const std::vector<ResultRecord>& records, ReportFormat format, const std::string& path);

}  // namespace afdm
