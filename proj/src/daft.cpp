#include "afdm/daft.hpp"

#include <cmath>
#include <mutex>

#include <fftw3.h>

namespace afdm {

namespace {

// FFTW's planner is not reentrant; plan execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit PlanPair(int n) {
    std::lock_guard lock(planner_mutex());
    fftw_complex* in = fftw_alloc_complex(n);
    fftw_complex* out = fftw_alloc_complex(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, flags);
    backward = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, flags);
    fftw_free(in);
    fftw_free(out);
  }
  ~PlanPair() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
  PlanPair(const PlanPair&) = delete;
  PlanPair& operator=(const PlanPair&) = delete;
};

void execute(fftw_plan plan, const CVector& in, CVector& out) {
  // new-array execute requires non-const input; FFTW does not write to it for
  // out-of-place complex transforms.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plan, src, dst);
}

void require_length(const CVector& v, int n, const char* what) {
  if (v.size() != n)
    throw Error(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                std::to_string(v.size()));
}

}  // namespace

void AfdmParams::validate() const {
  if (N <= 0 || N % 2 != 0) throw Error("AfdmParams: N must be a positive even integer");
  if (P < 0) throw Error("AfdmParams: P must be >= 0");
  if (c1_sign != 1 && c1_sign != -1) throw Error("AfdmParams: c1_sign must be +1 or -1");
  if (L_cpp < 0) throw Error("AfdmParams: L_cpp must be non-negative");
  if (!std::isfinite(c2)) throw Error("AfdmParams: c2 must be finite");
}

struct Daft::Plans : PlanPair {
  using PlanPair::PlanPair;
};

Daft::Daft(const AfdmParams& params) : params_(params) {
  params_.validate();
  const int n_len = params_.N;
  const std::int64_t two_n = 2LL * n_len;
  chirp1_.resize(n_len);
  chirp2_.resize(n_len);
  for (int n = 0; n < n_len; ++n) {
    const std::int64_t n2 = static_cast<std::int64_t>(n) * n;
    // c1 n^2 = sign * P n^2 / (2N); reduce the integer numerator exactly.
    const std::int64_t num = mod(params_.c1_sign * params_.P * n2, two_n);
    chirp1_[n] = unit_phase(-static_cast<double>(num) / static_cast<double>(two_n));
    chirp2_[n] = unit_phase(-std::fmod(params_.c2 * static_cast<double>(n2), 1.0));
  }
  plans_ = std::make_unique<Plans>(n_len);
}

Daft::~Daft() = default;
Daft::Daft(Daft&&) noexcept = default;
Daft& Daft::operator=(Daft&&) noexcept = default;

CVector Daft::demodulate(const CVector& r) const {
  require_length(r, params_.N, "daft_demodulate");
  const CVector u = r.cwiseProduct(chirp1_);
  CVector out(params_.N);
  execute(plans_->forward, u, out);
  const double scale = 1.0 / std::sqrt(static_cast<double>(params_.N));
  return out.cwiseProduct(chirp2_) * scale;
}

CVector Daft::modulate(const CVector& x) const {
  require_length(x, params_.N, "idaft_modulate");
  const CVector u = x.cwiseProduct(chirp2_.conjugate());
  CVector out(params_.N);
  execute(plans_->backward, u, out);
  const double scale = 1.0 / std::sqrt(static_cast<double>(params_.N));
  return out.cwiseProduct(chirp1_.conjugate()) * scale;
}

CVector fft_unitary(const CVector& x) {
  const int n = static_cast<int>(x.size());
  PlanPair plans(n);
  CVector out(n);
  execute(plans.forward, x, out);
  return out / std::sqrt(static_cast<double>(n));
}

CVector ifft_unitary(const CVector& x) {
  const int n = static_cast<int>(x.size());
  PlanPair plans(n);
  CVector out(n);
  execute(plans.backward, x, out);
  return out / std::sqrt(static_cast<double>(n));
}

CMatrix build_daft_operator(const AfdmParams& params) {
  Daft daft(params);
  const int n_len = params.N;
  CMatrix phi(n_len, n_len);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_len));
  for (int k = 0; k < n_len; ++k) {
    for (int n = 0; n < n_len; ++n) {
      const cplx dft = unit_phase(-static_cast<double>(mod(static_cast<std::int64_t>(k) * n, n_len)) /
                                  n_len);
      phi(k, n) = scale * daft.chirp2()[k] * dft * daft.chirp1()[n];
    }
  }
  return phi;
}

CVector idaft_modulate(const CVector& x, const AfdmParams& params) {
  return Daft(params).modulate(x);
}

CVector daft_demodulate(const CVector& r, const AfdmParams& params) {
  return Daft(params).demodulate(r);
}

CVector cpp_extend(const CVector& s, const AfdmParams& params) {
  params.validate();
  require_length(s, params.N, "cpp_extend");
  const int n_len = params.N;
  const int lc = params.L_cpp;
  if (lc > n_len) throw Error("cpp_extend: prefix longer than the frame");
  CVector out(n_len + lc);
  const std::int64_t two_n = 2LL * n_len;
  for (int n = -lc; n < 0; ++n) {
    // c1 (N^2 + 2 N n) = sign * P (N^2 + 2 N n) / (2N); integer numerator mod 2N.
    const std::int64_t num =
        mod(params.c1_sign * params.P * (static_cast<std::int64_t>(n_len) * n_len + 2LL * n_len * n),
            two_n);
    out[n + lc] = s[n_len + n] * unit_phase(-static_cast<double>(num) / static_cast<double>(two_n));
  }
  out.tail(n_len) = s;
  return out;
}

CVector cpp_strip(const CVector& s_cpp, const AfdmParams& params) {
  require_length(s_cpp, params.N + params.L_cpp, "cpp_strip");
  return s_cpp.tail(params.N);
}

int select_chirp_rate(int L, int Q, int s_d, int s_D) {
  if (L < 1 || Q < 0) throw Error("select_chirp_rate: requires L >= 1 and Q >= 0");
  if (s_d < 1 || s_d > L || s_D < 1 || s_D > 2 * Q + 1)
    throw Error("select_chirp_rate: sparsity levels out of range");
  const int cap = 2 * Q + 1;
  const int target = s_d * s_D;
  for (int p = 1; p < cap; ++p)
    if ((L - 1) * p + 2 * Q + 1 >= target) return p;
  return cap;
}

}  // namespace afdm
