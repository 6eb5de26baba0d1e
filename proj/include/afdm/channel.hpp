#pragma once

#include <string>

#include "afdm/common.hpp"
#include "afdm/daft.hpp"
#include "afdm/rng.hpp"

namespace afdm {

enum class SparsityModel { Type1, Type2, Type3 };

std::string to_string(SparsityModel m);
SparsityModel sparsity_model_from_string(const std::string& s);

/// Statistical description of a doubly sparse delay-Doppler grid of L taps
/// by 2Q+1 Doppler bins.
///
///  - Type1: one Doppler pattern shared by every active tap.
///  - Type2: independent Bernoulli(p_D) pattern per tap.
///  - Type3: one contiguous (circular) cluster of cluster_len bins per tap.
struct SparsityConfig {
  SparsityModel model = SparsityModel::Type1;
  int L = 1;
  int Q = 0;
  double p_d = 0.5;
  double p_D = 0.5;
  int cluster_len = 1;   // Type3 only
  double epsilon = 0.5;  // margin on the mean sparsity levels

  int doppler_bins() const { return 2 * Q + 1; }
  /// For Type3 p_D is implied by cluster_len.
  double effective_p_D() const;
  /// ceil((1+eps) p_d L) clamped to [1, L]
  int s_d() const;
  /// ceil((1+eps) p_D (2Q+1)) clamped to [1, 2Q+1]
  int s_D() const;
  /// Per-entry gain variance giving unit expected channel power.
  double sigma_alpha2() const;

  void validate() const;
};

/// Gains alpha_{l,q} and activity mask I_{l,q}; row l, column q+Q.
struct DelayDopplerProfile {
  int L = 0;
  int Q = 0;
  CMatrix gains;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> mask;
  double sigma_alpha2 = 1.0;

  DelayDopplerProfile() = default;
  DelayDopplerProfile(int L_, int Q_);

  int doppler_bins() const { return 2 * Q + 1; }
  cplx gain(int l, int q) const { return gains(l, q + Q); }
  bool active(int l, int q) const { return mask(l, q + Q) != 0; }
  /// Sets an active path; a zero gain still marks the entry active.
  void set_path(int l, int q, cplx alpha);
  int active_count() const;
  /// Sum of |alpha|^2 over active entries.
  double power() const;

  bool operator==(const DelayDopplerProfile& o) const;
};

/// Flat index of grid point (l, q): l(2Q+1) + Q + q.
inline int grid_index(int l, int q, int Q) { return l * (2 * Q + 1) + Q + q; }

struct NoiseConfig {
  double sigma_w2 = 0.0;

  static NoiseConfig from_snr_db(double snr_db);
  double snr_db() const;
};

DelayDopplerProfile sample_profile(const SparsityConfig& cfg, Rng& rng);

CVector vectorize_profile(const DelayDopplerProfile& profile);
/// Inverse of vectorize_profile; nonzero entries become active paths.
DelayDopplerProfile devectorize_profile(const CVector& alpha, int L, int Q, double sigma_alpha2 = 1.0);

/// Linear time-varying channel with additive noise.
///
/// s_cpp must carry a prefix of at least L-1 samples. Returns the N samples
/// after the prefix. Noise is drawn from rng only when sigma_w2 > 0.
CVector apply_channel(const CVector& s_cpp, const DelayDopplerProfile& profile,
                      const AfdmParams& params, const NoiseConfig& noise, Rng& rng);

/// Monte-Carlo frequencies of the sparsity-level exceedance events together
/// with their Chernoff bounds.
struct SparsityStats {
  int trials = 0;
  int s_d = 0;
  int s_D = 0;
  double prob_delay_exceed = 0.0;          // P[S_d > s_d]
  double chernoff_delay_bound = 1.0;
  double prob_doppler_exceed_joint = 0.0;  // P[exists l: I_l = 1, S_{D,l} > s_D]
  double chernoff_doppler_row_bound = 1.0; // per-row bound for B(2Q+1, p_D)
  double doppler_joint_bound = 1.0;        // union bound L p_d * row bound
  double prob_hierarchical = 0.0;          // P[alpha is (s_d, s_D)-sparse]
};

/// Chernoff bound on P[B(n, p) > s] in the relative-entropy form; 1 when s/n <= p.
double chernoff_binomial_tail(int n, double p, int s);

/// pre: trials >= 1000. The s_d, s_D levels default to the config's derived ones.
SparsityStats empirical_sparsity_stats(const SparsityConfig& cfg, int trials, Rng& rng, int s_d = 0,
                                       int s_D = 0);

/// JSON text: {"L":..,"Q":..,"sigma_alpha2":..,"actives":[[l,q,re,im],...]}
std::string profile_to_json(const DelayDopplerProfile& profile);
DelayDopplerProfile profile_from_json(const std::string& text);

}  // namespace afdm
