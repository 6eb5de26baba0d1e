#pragma once

#include <memory>

#include "afdm/common.hpp"

namespace afdm {

/// Waveform geometry of one AFDM frame.
///
/// The first chirp rate is held in integer form, c1 = c1_sign * P / (2N), so
/// 2*c1*N is always an integer and the chirp-periodic prefix collapses to a
/// plain cyclic prefix.
struct AfdmParams {
  int N = 0;          // samples per frame, even
  int P = 1;          // chirp-rate numerator; 0 gives plain DFT (OFDM)
  int c1_sign = +1;   // +1 or -1
  double c2 = 0.0;    // second chirp rate
  int L_cpp = 0;      // prefix length

  double c1() const { return c1_sign * static_cast<double>(P) / (2.0 * N); }
  /// Signed DAFT-domain shift contributed per unit of delay: 2*N*c1.
  int delay_shift() const { return c1_sign * P; }

  void validate() const;
};

/// Precomputed chirp tables and FFT plans for one AfdmParams.
///
/// Immutable after construction; modulate/demodulate may be called from many
/// threads at once.
class Daft {
 public:
  explicit Daft(const AfdmParams& params);
  ~Daft();
  Daft(const Daft&) = delete;
  Daft& operator=(const Daft&) = delete;
  Daft(Daft&&) noexcept;
  Daft& operator=(Daft&&) noexcept;

  const AfdmParams& params() const { return params_; }
  int size() const { return params_.N; }

  /// s = Phi^H x
  CVector modulate(const CVector& x) const;
  /// y = Phi r
  CVector demodulate(const CVector& r) const;

  /// e^{-i 2 pi c1 n^2}
  const CVector& chirp1() const { return chirp1_; }
  /// e^{-i 2 pi c2 k^2}
  const CVector& chirp2() const { return chirp2_; }

 private:
  struct Plans;
  AfdmParams params_;
  CVector chirp1_;
  CVector chirp2_;
  std::unique_ptr<Plans> plans_;
};

/// Unitary forward DFT / inverse DFT of arbitrary length (FFTW backed).
CVector fft_unitary(const CVector& x);
CVector ifft_unitary(const CVector& x);

/// Dense Phi = Lambda_c2 F_N Lambda_c1. Intended for tests and diagnostics.
CMatrix build_daft_operator(const AfdmParams& params);

CVector idaft_modulate(const CVector& x, const AfdmParams& params);
CVector daft_demodulate(const CVector& r, const AfdmParams& params);

/// Prepends the chirp-periodic prefix; output length N + L_cpp.
CVector cpp_extend(const CVector& s, const AfdmParams& params);
/// Drops the first L_cpp samples.
CVector cpp_strip(const CVector& s_cpp, const AfdmParams& params);

/// Smallest P >= 1 with (L-1)P + 2Q + 1 >= s_d * s_D, capped at 2Q+1.
int select_chirp_rate(int L, int Q, int s_d, int s_D);

}  // namespace afdm
