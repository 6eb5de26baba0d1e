#include "afdm/subnyquist.hpp"

#include <cmath>

namespace afdm {

SamplingRate sampling_rate(int n_pilots, int L, int P, const RadarConfig& cfg) {
  if (n_pilots < 1 || L < 1 || P < 1 || cfg.N < 1 || !(cfg.bandwidth_hz > 0.0))
    throw Error("sampling_rate: invalid arguments");
  const double samples = static_cast<double>(n_pilots) * ((L - 1) * P + 1);
  return {samples / cfg.frame_duration_s(), samples / cfg.N};
}

DecimationPlan plan_decimation(int observed, int N) {
  if (observed < 1 || observed > N) throw Error("plan_decimation: observation set larger than the frame");
  DecimationPlan plan;
  plan.observed = observed;
  for (int k = observed; k <= N; ++k)
    if (N % k == 0) {
      plan.K = k;
      break;
    }
  plan.D = N / plan.K;
  return plan;
}

CVector dechirp_decimate_receive(const CVector& r_cpp, const PilotScheme& scheme, const AfdmParams& params,
                                 int L, int Q, const CVector& x_frame) {
  if (!scheme.contiguous) throw Error("dechirp_decimate_receive: pilot scheme must be contiguous");
  const std::vector<int> rows = observation_index_set(scheme, params, L, Q);
  const int n_len = params.N;

  if (x_frame.size() != n_len) throw Error("dechirp_decimate_receive: frame must have length N");
  std::vector<bool> is_pilot(n_len, false);
  for (int m : scheme.positions) is_pilot[m] = true;
  for (int k = 0; k < n_len; ++k)
    if (!is_pilot[k] && x_frame[k] != cplx{})
      throw Error("dechirp_decimate_receive: data symbols present; only pilot-only frames are supported");

  const DecimationPlan plan = plan_decimation(static_cast<int>(rows.size()), n_len);
  const CVector r = cpp_strip(r_cpp, params);

  // De-chirp, then sample every D-th point.
  const Daft daft(params);
  CVector v(plan.K);
  for (int m = 0; m < plan.K; ++m) {
    const int n = m * plan.D;
    v[m] = r[n] * daft.chirp1()[n];
  }
  // Unitary K-point DFT carries 1/sqrt(K); the full-rate transform needs
  // 1/sqrt(N) on a sum D times larger, so rescale by D sqrt(K) / sqrt(N).
  const CVector bins = fft_unitary(v) * (plan.D * std::sqrt(static_cast<double>(plan.K)) /
                                          std::sqrt(static_cast<double>(n_len)));

  CVector y_p(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int k = rows[i];
    y_p[static_cast<Eigen::Index>(i)] = bins[k % plan.K] * daft.chirp2()[k];
  }
  return y_p;
}

}  // namespace afdm
