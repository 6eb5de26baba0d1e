#include "afdm/channel.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

namespace afdm {

namespace {

// Ceiling that ignores floating-point dust, so (1.5 * 0.2) * 30 gives 9.
int robust_ceil(double x) { return static_cast<int>(std::ceil(x - 1e-9)); }

using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

struct MaskDraw {
  Mask mask;
  std::vector<std::uint8_t> taps;  // I_l
};

MaskDraw sample_mask(const SparsityConfig& cfg, Rng& rng) {
  const int bins = cfg.doppler_bins();
  Mask mask = Mask::Zero(cfg.L, bins);
  std::bernoulli_distribution delay_on(cfg.p_d);
  std::bernoulli_distribution doppler_on(cfg.effective_p_D());
  std::uniform_int_distribution<int> start_pos(0, bins - 1);

  std::vector<std::uint8_t> taps(cfg.L);
  for (int l = 0; l < cfg.L; ++l) taps[l] = delay_on(rng) ? 1 : 0;

  switch (cfg.model) {
    case SparsityModel::Type1: {
      std::vector<std::uint8_t> shared(bins);
      for (int j = 0; j < bins; ++j) shared[j] = doppler_on(rng) ? 1 : 0;
      for (int l = 0; l < cfg.L; ++l)
        if (taps[l])
          for (int j = 0; j < bins; ++j) mask(l, j) = shared[j];
      break;
    }
    case SparsityModel::Type2:
      for (int l = 0; l < cfg.L; ++l)
        for (int j = 0; j < bins; ++j) {
          const bool on = doppler_on(rng);
          if (taps[l]) mask(l, j) = on ? 1 : 0;
        }
      break;
    case SparsityModel::Type3:
      for (int l = 0; l < cfg.L; ++l) {
        const int start = start_pos(rng);
        if (!taps[l]) continue;
        for (int j = 0; j < cfg.cluster_len; ++j) mask(l, (start + j) % bins) = 1;
      }
      break;
  }
  return {std::move(mask), std::move(taps)};
}

}  // namespace

std::string to_string(SparsityModel m) {
  switch (m) {
    case SparsityModel::Type1: return "type1";
    case SparsityModel::Type2: return "type2";
    case SparsityModel::Type3: return "type3";
  }
  return "unknown";
}

SparsityModel sparsity_model_from_string(const std::string& s) {
  if (s == "type1" || s == "Type1" || s == "1") return SparsityModel::Type1;
  if (s == "type2" || s == "Type2" || s == "2") return SparsityModel::Type2;
  if (s == "type3" || s == "Type3" || s == "3") return SparsityModel::Type3;
  throw Error("unknown sparsity model '" + s + "'");
}

double SparsityConfig::effective_p_D() const {
  if (model == SparsityModel::Type3) return static_cast<double>(cluster_len) / doppler_bins();
  return p_D;
}

int SparsityConfig::s_d() const {
  return std::clamp(robust_ceil((1.0 + epsilon) * p_d * L), 1, L);
}

int SparsityConfig::s_D() const {
  return std::clamp(robust_ceil((1.0 + epsilon) * effective_p_D() * doppler_bins()), 1, doppler_bins());
}

double SparsityConfig::sigma_alpha2() const {
  return 1.0 / (L * p_d * doppler_bins() * effective_p_D());
}

void SparsityConfig::validate() const {
  if (L < 1) throw Error("SparsityConfig: L must be >= 1");
  if (Q < 0) throw Error("SparsityConfig: Q must be >= 0");
  if (!(p_d > 0.0 && p_d < 1.0)) throw Error("SparsityConfig: p_d must lie in (0, 1)");
  if (epsilon < 0.0) throw Error("SparsityConfig: epsilon must be >= 0");
  if (model == SparsityModel::Type3) {
    if (cluster_len < 1 || cluster_len > doppler_bins())
      throw Error("SparsityConfig: Type3 cluster length must lie in [1, 2Q+1]");
  } else if (!(p_D > 0.0 && p_D < 1.0)) {
    throw Error("SparsityConfig: p_D must lie in (0, 1)");
  }
}

DelayDopplerProfile::DelayDopplerProfile(int L_, int Q_)
    : L(L_), Q(Q_), gains(CMatrix::Zero(L_, 2 * Q_ + 1)), mask(Mask::Zero(L_, 2 * Q_ + 1)) {}

void DelayDopplerProfile::set_path(int l, int q, cplx alpha) {
  if (l < 0 || l >= L || q < -Q || q > Q) throw Error("set_path: grid point out of range");
  gains(l, q + Q) = alpha;
  mask(l, q + Q) = 1;
}

int DelayDopplerProfile::active_count() const { return static_cast<int>(mask.cast<int>().sum()); }

double DelayDopplerProfile::power() const {
  double p = 0.0;
  for (int l = 0; l < L; ++l)
    for (int j = 0; j < doppler_bins(); ++j)
      if (mask(l, j)) p += std::norm(gains(l, j));
  return p;
}

bool DelayDopplerProfile::operator==(const DelayDopplerProfile& o) const {
  return L == o.L && Q == o.Q && sigma_alpha2 == o.sigma_alpha2 && gains == o.gains && mask == o.mask;
}

NoiseConfig NoiseConfig::from_snr_db(double snr_db) { return {std::pow(10.0, -snr_db / 10.0)}; }

double NoiseConfig::snr_db() const { return -10.0 * std::log10(sigma_w2); }

DelayDopplerProfile sample_profile(const SparsityConfig& cfg, Rng& rng) {
  cfg.validate();
  DelayDopplerProfile profile(cfg.L, cfg.Q);
  profile.mask = sample_mask(cfg, rng).mask;
  profile.sigma_alpha2 = cfg.sigma_alpha2();
  std::normal_distribution<double> component(0.0, std::sqrt(profile.sigma_alpha2 / 2.0));
  for (int l = 0; l < cfg.L; ++l)
    for (int j = 0; j < cfg.doppler_bins(); ++j)
      if (profile.mask(l, j)) {
        const double re = component(rng);
        const double im = component(rng);
        profile.gains(l, j) = {re, im};
      }
  return profile;
}

CVector vectorize_profile(const DelayDopplerProfile& profile) {
  const int bins = profile.doppler_bins();
  CVector alpha = CVector::Zero(static_cast<Eigen::Index>(profile.L) * bins);
  for (int l = 0; l < profile.L; ++l)
    for (int j = 0; j < bins; ++j)
      if (profile.mask(l, j)) alpha[l * bins + j] = profile.gains(l, j);
  return alpha;
}

DelayDopplerProfile devectorize_profile(const CVector& alpha, int L, int Q, double sigma_alpha2) {
  const int bins = 2 * Q + 1;
  if (alpha.size() != static_cast<Eigen::Index>(L) * bins)
    throw Error("devectorize_profile: length does not match L(2Q+1)");
  DelayDopplerProfile profile(L, Q);
  profile.sigma_alpha2 = sigma_alpha2;
  for (int l = 0; l < L; ++l)
    for (int j = 0; j < bins; ++j)
      if (alpha[l * bins + j] != cplx{}) {
        profile.gains(l, j) = alpha[l * bins + j];
        profile.mask(l, j) = 1;
      }
  return profile;
}

CVector apply_channel(const CVector& s_cpp, const DelayDopplerProfile& profile,
                      const AfdmParams& params, const NoiseConfig& noise, Rng& rng) {
  params.validate();
  const int n_len = params.N;
  const int lc = params.L_cpp;
  if (profile.L - 1 > lc) throw Error("apply_channel: prefix shorter than the channel memory L-1");
  if (s_cpp.size() != n_len + lc) throw Error("apply_channel: input must have length N + L_cpp");
  if (noise.sigma_w2 < 0.0) throw Error("apply_channel: negative noise variance");

  std::vector<cplx> twiddle(n_len);
  for (int k = 0; k < n_len; ++k) twiddle[k] = unit_phase(static_cast<double>(k) / n_len);

  CVector r = CVector::Zero(n_len);
  for (int l = 0; l < profile.L; ++l) {
    for (int q = -profile.Q; q <= profile.Q; ++q) {
      if (!profile.active(l, q)) continue;
      const cplx a = profile.gain(l, q);
      const std::int64_t step = mod(q, n_len);
      std::int64_t phase = 0;
      for (int n = 0; n < n_len; ++n) {
        // s_{n-l} lives at offset lc + n - l of the extended signal.
        r[n] += a * twiddle[phase] * s_cpp[lc + n - l];
        phase += step;
        if (phase >= n_len) phase -= n_len;
      }
    }
  }

  if (noise.sigma_w2 > 0.0) {
    std::normal_distribution<double> component(0.0, std::sqrt(noise.sigma_w2 / 2.0));
    for (int n = 0; n < n_len; ++n) {
      const double re = component(rng);
      const double im = component(rng);
      r[n] += cplx(re, im);
    }
  }
  return r;
}

double chernoff_binomial_tail(int n, double p, int s) {
  const double frac = static_cast<double>(s) / n;
  if (frac <= p) return 1.0;
  const double head = std::pow(p / frac, s);
  const double tail = (s == n) ? 1.0 : std::pow((1.0 - p) / (1.0 - frac), n - s);
  return std::min(1.0, head * tail);
}

SparsityStats empirical_sparsity_stats(const SparsityConfig& cfg, int trials, Rng& rng, int s_d,
                                       int s_D) {
  cfg.validate();
  if (trials < 1000) throw Error("empirical_sparsity_stats: needs at least 1000 trials");
  SparsityStats st;
  st.trials = trials;
  st.s_d = s_d > 0 ? s_d : cfg.s_d();
  st.s_D = s_D > 0 ? s_D : cfg.s_D();
  const int bins = cfg.doppler_bins();

  long delay_exceed = 0;
  long doppler_exceed = 0;
  long hierarchical = 0;
  for (int t = 0; t < trials; ++t) {
    const MaskDraw draw = sample_mask(cfg, rng);
    int active_taps = 0;   // S_d = sum_l I_l
    int nonzero_rows = 0;  // blocks of alpha with an active entry
    bool row_exceed = false;
    for (int l = 0; l < cfg.L; ++l) {
      int row = 0;
      for (int j = 0; j < bins; ++j) row += draw.mask(l, j);
      active_taps += draw.taps[l];
      if (row > 0) ++nonzero_rows;
      // rows with I_l = 0 are all zero, so this is the joint event
      if (row > st.s_D) row_exceed = true;
    }
    if (active_taps > st.s_d) ++delay_exceed;
    if (row_exceed) ++doppler_exceed;
    if (nonzero_rows <= st.s_d && !row_exceed) ++hierarchical;
  }
  st.prob_delay_exceed = static_cast<double>(delay_exceed) / trials;
  st.prob_doppler_exceed_joint = static_cast<double>(doppler_exceed) / trials;
  st.prob_hierarchical = static_cast<double>(hierarchical) / trials;
  st.chernoff_delay_bound = chernoff_binomial_tail(cfg.L, cfg.p_d, st.s_d);
  st.chernoff_doppler_row_bound = chernoff_binomial_tail(bins, cfg.effective_p_D(), st.s_D);
  if (cfg.model == SparsityModel::Type3)
    st.chernoff_doppler_row_bound = cfg.cluster_len > st.s_D ? 1.0 : 0.0;
  st.doppler_joint_bound = std::min(1.0, cfg.L * cfg.p_d * st.chernoff_doppler_row_bound);
  return st;
}

std::string profile_to_json(const DelayDopplerProfile& profile) {
  nlohmann::json j;
  j["L"] = profile.L;
  j["Q"] = profile.Q;
  j["sigma_alpha2"] = profile.sigma_alpha2;
  auto actives = nlohmann::json::array();
  for (int l = 0; l < profile.L; ++l)
    for (int q = -profile.Q; q <= profile.Q; ++q)
      if (profile.active(l, q)) {
        const cplx a = profile.gain(l, q);
        actives.push_back({l, q, a.real(), a.imag()});
      }
  j["actives"] = std::move(actives);
  return j.dump();
}

DelayDopplerProfile profile_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("profile_from_json: ") + e.what());
  }
  DelayDopplerProfile profile(j.at("L").get<int>(), j.at("Q").get<int>());
  profile.sigma_alpha2 = j.value("sigma_alpha2", 1.0);
  for (const auto& a : j.at("actives"))
    profile.set_path(a.at(0).get<int>(), a.at(1).get<int>(), {a.at(2).get<double>(), a.at(3).get<double>()});
  return profile;
}

}  // namespace afdm
