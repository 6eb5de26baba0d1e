#pragma once

#include "afdm/common.hpp"
#include "afdm/daft.hpp"
#include "afdm/sensing.hpp"

namespace afdm {

/// Timing of the sensing receiver: one frame of N samples at rate BW.
struct RadarConfig {
  double bandwidth_hz = 30e6;
  int N = 4096;
  int L_cpp = 0;
  bool include_cpp = false;  // whether the frame duration T counts the prefix

  double sample_period_s() const { return 1.0 / bandwidth_hz; }
  double frame_duration_s() const {
    return (N + (include_cpp ? L_cpp : 0)) * sample_period_s();
  }
  double tau_max_s(int L) const { return (L - 1) * sample_period_s(); }
  double t_cpp_s() const { return L_cpp * sample_period_s(); }
};

struct SamplingRate {
  double f_s_hz = 0.0;     // N_p((L-1)P+1) / T
  double ratio_to_bw = 0.0;  // N_p((L-1)P+1) / N, prefix excluded
};

SamplingRate sampling_rate(int n_pilots, int L, int P, const RadarConfig& cfg);

/// Geometry of the decimating receiver for one observation set.
struct DecimationPlan {
  int observed = 0;   // |P|
  int K = 0;          // smallest divisor of N with K >= |P|
  int D = 0;          // N / K
  double effective_rate_hz(const RadarConfig& cfg) const { return K / cfg.frame_duration_s(); }
};

DecimationPlan plan_decimation(int observed, int N);

/// Low-rate receiver for pilot-only frames with a contiguous observation set.
///
/// Strips the prefix, multiplies by the conjugate chirp e^{-i 2 pi c1 n^2},
/// keeps every D-th sample, takes a K-point DFT and maps the aliased bins
/// back onto the absolute DAFT indices of the observation set (applying the
/// c2 phase). The output is ordered like extract_measurements.
///
/// The data region of x_frame (the transmitted DAFT symbols) must be zero;
/// it is only inspected, never used to form the output.
CVector dechirp_decimate_receive(const CVector& r_cpp, const PilotScheme& scheme, const AfdmParams& params,
                                 int L, int Q, const CVector& x_frame);

}  // namespace afdm
