#pragma once

#include <vector>

#include "afdm/common.hpp"

namespace afdm {

/// Sorted flat indices into a vector of blocks of equal size.
struct SupportSet {
  int block_size = 1;
  std::vector<int> indices;

  int size() const { return static_cast<int>(indices.size()); }
  int block_of(int i) const { return indices[i] / block_size; }
  /// Number of distinct blocks touched.
  int block_count() const;
  /// Largest number of indices inside a single block.
  int max_per_block() const;
  bool contains(int flat) const;

  bool operator==(const SupportSet&) const = default;
};

/// (s_blocks, s_within)-sparsity of x: at most s_blocks non-zero blocks,
/// each with at most s_within non-zeros.
bool is_hierarchically_sparse(const CVector& x, int block_size, int s_blocks, int s_within);

enum class StopReason { SupportFixed, MaxIter };

struct RecoveryResult {
  CVector alpha_hat;
  SupportSet support;
  int iterations = 0;
  std::vector<double> residual_trace;  // ||y - M alpha^(k)|| for k = 1..iterations
  StopReason converged_by = StopReason::MaxIter;
};

/// Hierarchical thresholding L_{s_d, s_D}: keep the s_D largest-modulus
/// entries of every block, then the s_d blocks with the largest kept energy.
/// Ties go to the lower index.
SupportSet hierarchical_threshold(const CVector& x, int n_blocks, int block_size, int s_d, int s_D);

/// Plain top-s thresholding over the whole vector, ties to the lower index.
SupportSet flat_threshold(const CVector& x, int block_size, int s);

/// x restricted to the support, zero elsewhere.
CVector restrict_to(const CVector& x, const SupportSet& support);

/// argmin ||y - M z|| subject to supp(z) in support.
///
/// Solved with a column-pivoted complete orthogonal decomposition; pivots
/// below rank_tol times the largest one are treated as zero and the
/// minimum-norm solution is returned. Throws when |support| > rows(M).
CVector restricted_least_squares(const CMatrix& M, const CVector& y, const SupportSet& support,
                                 double rank_tol = 1e-10);

/// Hierarchical hard thresholding pursuit.
///
/// alpha^(0) = 0; at each step the support is the hierarchical threshold of
/// alpha^(k) + M^H (y - M alpha^(k)) and the iterate is the restricted least
/// squares fit on it. Stops when the support repeats or after k_max steps.
RecoveryResult hihtp_recover(const CMatrix& M, const CVector& y, int n_blocks, int s_d, int s_D,
                             int k_max = 20);

/// Classical HTP with flat top-s thresholding, same iteration otherwise.
RecoveryResult htp_recover(const CMatrix& M, const CVector& y, int n_blocks, int s, int k_max = 20);

}  // namespace afdm
