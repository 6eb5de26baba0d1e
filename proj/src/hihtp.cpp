#include "afdm/hihtp.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace afdm {

namespace {

// Indices of the k largest values, larger first, ties to the lower index.
std::vector<int> top_k(const std::vector<double>& score, int k) {
  std::vector<int> order(score.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return score[a] > score[b]; });
  order.resize(std::min<std::size_t>(static_cast<std::size_t>(k), order.size()));
  return order;
}

void check_dims(const CMatrix& M, const CVector& y, int n_blocks) {
  if (M.rows() != y.size()) throw Error("recovery: operator rows and measurement length differ");
  if (n_blocks < 1 || M.cols() % n_blocks != 0)
    throw Error("recovery: column count is not a multiple of the block count");
}

template <typename Threshold>
RecoveryResult pursuit(const CMatrix& M, const CVector& y, int block_size, int k_max, Threshold threshold) {
  if (k_max < 1) throw Error("recovery: k_max must be >= 1");
  RecoveryResult res;
  res.alpha_hat = CVector::Zero(M.cols());
  res.support.block_size = block_size;
  bool first = true;
  for (int k = 0; k < k_max; ++k) {
    const CVector proxy = res.alpha_hat + M.adjoint() * (y - M * res.alpha_hat);
    SupportSet next = threshold(proxy);
    res.alpha_hat = restricted_least_squares(M, y, next, 1e-10);
    res.iterations = k + 1;
    res.residual_trace.push_back((y - M * res.alpha_hat).norm());
    const bool repeated = !first && next == res.support;
    res.support = std::move(next);
    first = false;
    if (repeated) {
      res.converged_by = StopReason::SupportFixed;
      return res;
    }
  }
  res.converged_by = StopReason::MaxIter;
  return res;
}

}  // namespace

int SupportSet::block_count() const {
  std::set<int> blocks;
  for (int i : indices) blocks.insert(i / block_size);
  return static_cast<int>(blocks.size());
}

int SupportSet::max_per_block() const {
  int best = 0;
  std::size_t i = 0;
  while (i < indices.size()) {
    const int b = indices[i] / block_size;
    int n = 0;
    while (i < indices.size() && indices[i] / block_size == b) {
      ++n;
      ++i;
    }
    best = std::max(best, n);
  }
  return best;
}

bool SupportSet::contains(int flat) const { return std::binary_search(indices.begin(), indices.end(), flat); }

bool is_hierarchically_sparse(const CVector& x, int block_size, int s_blocks, int s_within) {
  if (block_size < 1 || x.size() % block_size != 0) throw Error("is_hierarchically_sparse: bad block size");
  int blocks = 0;
  for (Eigen::Index b = 0; b < x.size() / block_size; ++b) {
    int nz = 0;
    for (int j = 0; j < block_size; ++j) nz += x[b * block_size + j] != cplx{} ? 1 : 0;
    if (nz > s_within) return false;
    if (nz > 0) ++blocks;
  }
  return blocks <= s_blocks;
}

SupportSet hierarchical_threshold(const CVector& x, int n_blocks, int block_size, int s_d, int s_D) {
  if (block_size < 1 || n_blocks < 1 || x.size() != static_cast<Eigen::Index>(n_blocks) * block_size)
    throw Error("hierarchical_threshold: dimension mismatch");
  if (s_D < 1 || s_D > block_size || s_d < 1 || s_d > n_blocks)
    throw Error("hierarchical_threshold: sparsity levels out of range");

  std::vector<std::vector<int>> kept(n_blocks);
  std::vector<double> energy(n_blocks, 0.0);
  std::vector<double> mag(block_size);
  for (int b = 0; b < n_blocks; ++b) {
    for (int j = 0; j < block_size; ++j) mag[j] = std::abs(x[b * block_size + j]);
    kept[b] = top_k(mag, s_D);
    for (int j : kept[b]) energy[b] += mag[j] * mag[j];
  }
  SupportSet out;
  out.block_size = block_size;
  for (int b : top_k(energy, s_d))
    for (int j : kept[b]) out.indices.push_back(b * block_size + j);
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

SupportSet flat_threshold(const CVector& x, int block_size, int s) {
  if (s < 1 || s > x.size()) throw Error("flat_threshold: sparsity level out of range");
  std::vector<double> mag(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) mag[static_cast<std::size_t>(i)] = std::abs(x[i]);
  SupportSet out;
  out.block_size = block_size;
  out.indices = top_k(mag, s);
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

CVector restrict_to(const CVector& x, const SupportSet& support) {
  CVector out = CVector::Zero(x.size());
  for (int i : support.indices) out[i] = x[i];
  return out;
}

CVector restricted_least_squares(const CMatrix& M, const CVector& y, const SupportSet& support,
                                 double rank_tol) {
  if (M.rows() != y.size()) throw Error("restricted_least_squares: dimension mismatch");
  if (support.size() > M.rows())
    throw Error("restricted_least_squares: support larger than the number of measurements");
  CVector z = CVector::Zero(M.cols());
  if (support.size() == 0) return z;
  CMatrix sub(M.rows(), support.size());
  for (int i = 0; i < support.size(); ++i) {
    const int c = support.indices[i];
    if (c < 0 || c >= M.cols()) throw Error("restricted_least_squares: support index out of range");
    sub.col(i) = M.col(c);
  }
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod;
  cod.setThreshold(rank_tol);
  cod.compute(sub);
  const CVector coef = cod.solve(y);
  for (int i = 0; i < support.size(); ++i) z[support.indices[i]] = coef[i];
  return z;
}

RecoveryResult hihtp_recover(const CMatrix& M, const CVector& y, int n_blocks, int s_d, int s_D, int k_max) {
  check_dims(M, y, n_blocks);
  const int block_size = static_cast<int>(M.cols() / n_blocks);
  return pursuit(M, y, block_size, k_max, [&](const CVector& proxy) {
    return hierarchical_threshold(proxy, n_blocks, block_size, s_d, s_D);
  });
}

RecoveryResult htp_recover(const CMatrix& M, const CVector& y, int n_blocks, int s, int k_max) {
  check_dims(M, y, n_blocks);
  const int block_size = static_cast<int>(M.cols() / n_blocks);
  return pursuit(M, y, block_size, k_max, [&](const CVector& proxy) { return flat_threshold(proxy, block_size, s); });
}

}  // namespace afdm
