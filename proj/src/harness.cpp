#include "afdm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "afdm/hihtp.hpp"

namespace afdm {

namespace {

using nlohmann::json;

const char* to_string(OverlapMode m) { return m == OverlapMode::Disjoint ? "disjoint" : "reduced"; }
const char* to_string(PilotPlacement p) { return p == PilotPlacement::Uniform ? "uniform" : "packed"; }
const char* to_string(PilotPower p) { return p == PilotPower::Unit ? "unit" : "frame"; }
const char* to_string(Receiver r) { return r == Receiver::FullRate ? "fullrate" : "subnyquist"; }
const char* to_string(Solver s) { return s == Solver::HiHTP ? "hihtp" : "htp"; }

template <typename E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> options, const char* what) {
  for (const auto& [name, value] : options)
    if (s == name) return value;
  throw Error(std::string("unknown ") + what + " '" + s + "'");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["N"] = c.N;
  j["c1_sign"] = c.c1_sign;
  j["c2"] = c.c2;
  j["L_cpp"] = c.L_cpp;
  if (c.P) j["P"] = *c.P;
  if (c.s_d) j["s_d"] = *c.s_d;
  if (c.s_D) j["s_D"] = *c.s_D;
  j["model"] = to_string(c.sparsity.model);
  j["L"] = c.sparsity.L;
  j["Q"] = c.sparsity.Q;
  j["p_d"] = c.sparsity.p_d;
  j["p_D"] = c.sparsity.p_D;
  j["cluster_len"] = c.sparsity.cluster_len;
  j["epsilon"] = c.sparsity.epsilon;
  j["pilot_counts"] = c.pilot_counts;
  j["overlap"] = to_string(c.overlap);
  j["placement"] = to_string(c.placement);
  j["pilot_power"] = to_string(c.pilot_power);
  j["data_fill"] = c.data_fill;
  j["snr_db"] = c.snr_db;
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["include_cpp_in_T"] = c.include_cpp_in_T;
  j["trials"] = c.trials;
  j["master_seed"] = c.master_seed;
  j["receiver"] = to_string(c.receiver);
  j["solver"] = to_string(c.solver);
  j["k_max"] = c.k_max;
  j["threads"] = c.threads;
  return j;
}

std::string cell_hash(const ExperimentConfig& cfg, int n_pilots) {
  json j = config_json(cfg);
  j["pilot_counts"] = n_pilots;
  j.erase("snr_db");
  j.erase("threads");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

struct TrialOutcome {
  bool failed = false;
  double sq_error = 0.0;
  bool support_exact = false;
  int iterations = 0;
};

// Shared per pilot count; read-only while trials run.
struct CellSetup {
  AfdmParams params;
  PilotScheme scheme;
  MeasurementOperator op;
  CMatrix normalized;  // op.matrix / scale
  double scale = 1.0;
};

CellSetup prepare_cell(const ExperimentConfig& cfg, int n_pilots) {
  CellSetup cell;
  cell.params = cfg.afdm_params();
  const int L = cfg.sparsity.L;
  const int Q = cfg.sparsity.Q;
  const bool packed = cfg.placement == PilotPlacement::Packed || cfg.receiver == Receiver::SubNyquist;
  cell.scheme = packed ? PilotScheme::packed(n_pilots, cell.params, L, Q, cfg.overlap)
                       : PilotScheme::uniform(n_pilots, cell.params, L, Q, cfg.overlap);
  const std::vector<bool> reserved = reserved_positions(cell.scheme, cell.params, L, Q);
  const int n_reserved = static_cast<int>(std::count(reserved.begin(), reserved.end(), true));
  if (cfg.pilot_power == PilotPower::Frame) {
    // Same pilot energy whether or not the data positions are simulated.
    const double energy = static_cast<double>(n_reserved) / n_pilots;
    cell.scheme.set_uniform_value(cplx(std::sqrt(energy), 0.0));
  }
  cell.op = build_measurement_operator(cell.scheme, cell.params, L, Q);
  // Unit-norm columns on average so the gradient step is well scaled.
  cell.scale = std::sqrt(cell.op.matrix.squaredNorm() / static_cast<double>(cell.op.matrix.cols()));
  cell.normalized = cell.op.matrix / cell.scale;
  return cell;
}

bool exact_support(const CVector& alpha_hat, const DelayDopplerProfile& truth) {
  const CVector alpha = vectorize_profile(truth);
  std::vector<int> truth_idx;
  for (int l = 0; l < truth.L; ++l)
    for (int q = -truth.Q; q <= truth.Q; ++q)
      if (truth.active(l, q)) truth_idx.push_back(grid_index(l, q, truth.Q));
  if (truth_idx.empty()) return true;
  SupportSet top = flat_threshold(alpha_hat, truth.doppler_bins(), static_cast<int>(truth_idx.size()));
  return top.indices == truth_idx;
}

std::vector<TrialOutcome> run_trial(const ExperimentConfig& cfg, const CellSetup& cell, int trial) {
  const int L = cfg.sparsity.L;
  const int Q = cfg.sparsity.Q;
  std::vector<TrialOutcome> out(cfg.snr_db.size());
  try {
    Rng profile_rng = make_stream(cfg.master_seed, static_cast<std::uint64_t>(trial), 0);
    const DelayDopplerProfile profile = sample_profile(cfg.sparsity, profile_rng);
    const CVector alpha = vectorize_profile(profile);

    std::optional<CVector> data;
    if (cfg.data_fill) {
      Rng data_rng = make_stream(cfg.master_seed, static_cast<std::uint64_t>(trial), 1);
      std::bernoulli_distribution bit(0.5);
      CVector d(cell.params.N);
      const double a = 1.0 / std::sqrt(2.0);
      for (int k = 0; k < cell.params.N; ++k) {
        const double re = bit(data_rng) ? a : -a;
        const double im = bit(data_rng) ? a : -a;
        d[k] = {re, im};
      }
      data = std::move(d);
    }
    const CVector x = build_pilot_frame(cell.scheme, cell.params, L, Q, data);
    const Daft daft(cell.params);
    const CVector s_cpp = cpp_extend(daft.modulate(x), cell.params);

    for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
      TrialOutcome& o = out[si];
      try {
        Rng noise_rng = make_stream(cfg.master_seed, static_cast<std::uint64_t>(trial), 2 + si);
        const CVector r = apply_channel(s_cpp, profile, cell.params, NoiseConfig::from_snr_db(cfg.snr_db[si]),
                                        noise_rng);
        CVector y_p;
        if (cfg.receiver == Receiver::FullRate) {
          y_p = extract_measurements(daft.demodulate(r), cell.op.rows);
        } else {
          CVector r_cpp(cell.params.N + cell.params.L_cpp);
          r_cpp.head(cell.params.L_cpp).setZero();
          r_cpp.tail(cell.params.N) = r;
          y_p = dechirp_decimate_receive(r_cpp, cell.scheme, cell.params, L, Q, x);
        }
        const CVector y_n = y_p / cell.scale;
        const RecoveryResult rec =
            cfg.solver == Solver::HiHTP
                ? hihtp_recover(cell.normalized, y_n, L, cfg.level_d(), cfg.level_D(), cfg.k_max)
                : htp_recover(cell.normalized, y_n, L, cfg.level_d() * cfg.level_D(), cfg.k_max);
        o.sq_error = (rec.alpha_hat - alpha).squaredNorm();
        o.support_exact = exact_support(rec.alpha_hat, profile);
        o.iterations = rec.iterations;
      } catch (const Error&) {
        o.failed = true;
      }
    }
  } catch (const Error&) {
    for (auto& o : out) o.failed = true;
  }
  return out;
}

}  // namespace

int ExperimentConfig::chirp_rate() const {
  if (P) return *P;
  return select_chirp_rate(sparsity.L, sparsity.Q, level_d(), level_D());
}

int ExperimentConfig::prefix_length() const { return std::max(L_cpp, sparsity.L - 1); }

AfdmParams ExperimentConfig::afdm_params() const {
  AfdmParams p;
  p.N = N;
  p.P = chirp_rate();
  p.c1_sign = c1_sign;
  p.c2 = c2;
  p.L_cpp = prefix_length();
  return p;
}

RadarConfig ExperimentConfig::radar() const {
  RadarConfig r;
  r.bandwidth_hz = bandwidth_hz;
  r.N = N;
  r.L_cpp = prefix_length();
  r.include_cpp = include_cpp_in_T;
  return r;
}

void ExperimentConfig::validate() const {
  afdm_params().validate();
  sparsity.validate();
  if (pilot_counts.empty()) throw Error("config: pilot_counts is empty");
  for (int n : pilot_counts)
    if (n < 1) throw Error("config: pilot counts must be positive");
  if (snr_db.empty()) throw Error("config: snr_db is empty");
  if (trials < 1) throw Error("config: trials must be positive");
  if (k_max < 1) throw Error("config: k_max must be positive");
  if (level_d() < 1 || level_d() > sparsity.L) throw Error("config: s_d out of range");
  if (level_D() < 1 || level_D() > sparsity.doppler_bins()) throw Error("config: s_D out of range");
  if (receiver == Receiver::SubNyquist && data_fill)
    throw Error("config: the sub-Nyquist receiver needs pilot-only frames (data_fill = false)");
  if (!(bandwidth_hz > 0.0)) throw Error("config: bandwidth must be positive");
}

ExperimentConfig config_from_json(const std::string& text) {
  ExperimentConfig c;
  json j;
  try {
    j = json::parse(text);
    if (!j.is_object()) throw Error("config: top level must be an object");
    static const std::set<std::string> known = {
        "N",        "c1_sign",   "c2",          "L_cpp",        "P",                "s_d",
        "s_D",      "model",     "L",           "Q",            "p_d",              "p_D",
        "cluster_len", "epsilon", "pilot_counts", "overlap",    "placement",        "pilot_power",
        "data_fill", "snr_db",   "bandwidth_hz", "include_cpp_in_T", "trials",      "master_seed",
        "receiver", "solver",    "k_max",       "threads"};
    for (const auto& item : j.items())
      if (!known.count(item.key())) throw Error("config: unknown key '" + item.key() + "'");
    c.N = j.value("N", c.N);
    c.c1_sign = j.value("c1_sign", c.c1_sign);
    c.c2 = j.value("c2", c.c2);
    c.L_cpp = j.value("L_cpp", c.L_cpp);
    if (j.contains("P") && !j["P"].is_null()) c.P = j["P"].get<int>();
    if (j.contains("s_d") && !j["s_d"].is_null()) c.s_d = j["s_d"].get<int>();
    if (j.contains("s_D") && !j["s_D"].is_null()) c.s_D = j["s_D"].get<int>();
    c.sparsity.model = sparsity_model_from_string(j.value("model", std::string("type1")));
    c.sparsity.L = j.value("L", 30);
    c.sparsity.Q = j.value("Q", 7);
    c.sparsity.p_d = j.value("p_d", 0.2);
    c.sparsity.p_D = j.value("p_D", 0.2);
    c.sparsity.cluster_len = j.value("cluster_len", 1);
    c.sparsity.epsilon = j.value("epsilon", 0.5);
    if (j.contains("pilot_counts")) c.pilot_counts = j["pilot_counts"].get<std::vector<int>>();
    c.overlap = parse_enum<OverlapMode>(j.value("overlap", std::string("disjoint")),
                                        {{"disjoint", OverlapMode::Disjoint}, {"reduced", OverlapMode::Reduced}},
                                        "overlap mode");
    c.placement = parse_enum<PilotPlacement>(
        j.value("placement", std::string("uniform")),
        {{"uniform", PilotPlacement::Uniform}, {"packed", PilotPlacement::Packed}}, "placement");
    c.pilot_power = parse_enum<PilotPower>(j.value("pilot_power", std::string("frame")),
                                           {{"unit", PilotPower::Unit}, {"frame", PilotPower::Frame}},
                                           "pilot power");
    c.data_fill = j.value("data_fill", c.data_fill);
    if (j.contains("snr_db")) c.snr_db = j["snr_db"].get<std::vector<double>>();
    c.bandwidth_hz = j.value("bandwidth_hz", c.bandwidth_hz);
    c.include_cpp_in_T = j.value("include_cpp_in_T", c.include_cpp_in_T);
    c.trials = j.value("trials", c.trials);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.receiver = parse_enum<Receiver>(j.value("receiver", std::string("fullrate")),
                                      {{"fullrate", Receiver::FullRate}, {"subnyquist", Receiver::SubNyquist}},
                                      "receiver");
    c.solver = parse_enum<Solver>(j.value("solver", std::string("hihtp")),
                                  {{"hihtp", Solver::HiHTP}, {"htp", Solver::HTP}}, "solver");
    c.k_max = j.value("k_max", c.k_max);
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  if (c.sparsity.model == SparsityModel::Type3) c.sparsity.p_D = c.sparsity.effective_p_D();
  c.validate();
  return c;
}

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2); }

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

int default_thread_count() {
  if (const char* env = std::getenv("AFDM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<ResultRecord> run_monte_carlo(const ExperimentConfig& cfg) {
  cfg.validate();
  const int n_threads = std::min(cfg.threads > 0 ? cfg.threads : default_thread_count(), cfg.trials);
  const std::size_t n_snr = cfg.snr_db.size();
  std::vector<ResultRecord> records;

  for (int n_pilots : cfg.pilot_counts) {
    const auto t0 = std::chrono::steady_clock::now();
    // A pilot count that does not fit the frame fails all its trials.
    std::optional<CellSetup> cell;
    try {
      cell = prepare_cell(cfg, n_pilots);
    } catch (const Error&) {
    }

    TrialOutcome failed;
    failed.failed = true;
    std::vector<std::vector<TrialOutcome>> outcomes(static_cast<std::size_t>(cfg.trials),
                                                    std::vector<TrialOutcome>(n_snr, failed));
    if (cell) {
      std::vector<std::jthread> workers;
      for (int w = 0; w < n_threads; ++w)
        workers.emplace_back([&, w] {
          for (int t = w; t < cfg.trials; t += n_threads) outcomes[t] = run_trial(cfg, *cell, t);
        });
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    OverheadParams op;
    op.L = cfg.sparsity.L;
    op.Q = cfg.sparsity.Q;
    op.N_p = n_pilots;
    op.P = cfg.chirp_rate();
    const int overhead = pilot_overhead(Waveform::AFDM, op);
    const double f_s = sampling_rate(n_pilots, cfg.sparsity.L, cfg.chirp_rate(), cfg.radar()).f_s_hz;
    const std::string hash = cell_hash(cfg, n_pilots);

    for (std::size_t si = 0; si < n_snr; ++si) {
      ResultRecord rec;
      rec.config_hash = hash;
      rec.N = cfg.N;
      rec.L = cfg.sparsity.L;
      rec.Q = cfg.sparsity.Q;
      rec.p_d = cfg.sparsity.p_d;
      rec.p_D = cfg.sparsity.effective_p_D();
      rec.N_p = n_pilots;
      rec.snr_db = cfg.snr_db[si];
      rec.overhead = overhead;
      rec.f_s_hz = f_s;
      rec.seed = cfg.master_seed;
      rec.trials = cfg.trials;
      rec.P = cfg.chirp_rate();
      rec.wall_time_s = elapsed / static_cast<double>(n_snr);

      // Serial reduction in trial order keeps results bitwise reproducible.
      double sum = 0.0, sum_sq = 0.0, iters = 0.0;
      int ok = 0, exact = 0;
      for (const auto& trial : outcomes) {
        const TrialOutcome& o = trial[si];
        if (o.failed) {
          ++rec.failures;
          continue;
        }
        ++ok;
        sum += o.sq_error;
        sum_sq += o.sq_error * o.sq_error;
        iters += o.iterations;
        exact += o.support_exact ? 1 : 0;
      }
      if (ok > 0) {
        rec.mse = sum / ok;
        const double var = ok > 1 ? std::max(0.0, (sum_sq - ok * rec.mse * rec.mse) / (ok - 1)) : 0.0;
        rec.mse_stderr = std::sqrt(var / ok);
        rec.support_rate = static_cast<double>(exact) / ok;
        rec.mean_iterations = iters / ok;
      } else {
        rec.mse = std::numeric_limits<double>::quiet_NaN();
      }
      records.push_back(rec);
    }
  }
  return records;
}

std::optional<int> smallest_pilot_count(const std::vector<ResultRecord>& records, double snr_db,
                                        double threshold) {
  std::optional<int> best;
  for (const auto& r : records)
    if (r.snr_db == snr_db && r.mse <= threshold && (!best || r.N_p < *best)) best = r.N_p;
  return best;
}

Waveform waveform_from_string(const std::string& s) {
  return parse_enum<Waveform>(s, {{"afdm", Waveform::AFDM}, {"ofdm", Waveform::OFDM}, {"otfs", Waveform::OTFS}},
                              "waveform");
}

int pilot_overhead(Waveform waveform, const OverheadParams& p) {
  auto need = [](const std::optional<int>& v, const char* name) {
    if (!v) throw Error(std::string("pilot_overhead: missing parameter ") + name);
    if (*v < 0) throw Error(std::string("pilot_overhead: negative parameter ") + name);
    return *v;
  };
  switch (waveform) {
    case Waveform::AFDM: {
      const int L = need(p.L, "L"), Q = need(p.Q, "Q"), n_p = need(p.N_p, "N_p"), P = need(p.P, "P");
      return n_p * ((L - 1) * P + 1) + (L - 1) * P + 4 * Q;
    }
    case Waveform::OFDM: {
      const int L = need(p.L, "L");
      return need(p.N_p_td, "N_p_td") * need(p.N_p_fd, "N_p_fd") + (need(p.N_symb, "N_symb") - 1) * (L - 1);
    }
    case Waveform::OTFS: {
      const int L = need(p.L, "L"), Q = need(p.Q, "Q");
      return std::min(4 * Q + 1, need(p.N_otfs, "N_otfs")) * std::min(2 * L - 1, need(p.M_otfs, "M_otfs"));
    }
  }
  throw Error("pilot_overhead: unknown waveform");
}

}  // namespace afdm
