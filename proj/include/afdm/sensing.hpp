#pragma once

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "afdm/common.hpp"
#include "afdm/daft.hpp"

namespace afdm {

enum class OverlapMode {
  Disjoint,  // per-pilot observation windows never intersect
  Reduced,   // neighbouring windows share their Doppler guards
};

/// DAFT-domain extent of one pilot's channel response.
///
/// A path (l, q) moves a symbol at index m to (m + q - shift*l) mod N with
/// shift = 2 N c1, so a pilot's responses occupy offsets [d_min, d_max]
/// relative to the pilot.
struct WindowGeometry {
  int d_min = 0;
  int d_max = 0;

  WindowGeometry(const AfdmParams& params, int L, int Q);
  /// (L-1)P + 2Q + 1
  int width() const { return d_max - d_min + 1; }
};

struct PilotScheme {
  std::vector<int> positions;
  std::vector<cplx> values;  // empty means unit pilots
  OverlapMode overlap_mode = OverlapMode::Disjoint;
  bool contiguous = false;

  int count() const { return static_cast<int>(positions.size()); }
  cplx value(int p) const { return values.empty() ? cplx{1.0, 0.0} : values.at(p); }
  void set_uniform_value(cplx v) { values.assign(positions.size(), v); }

  /// Pilots spread evenly over the frame, spacing floor(N / N_p).
  static PilotScheme uniform(int n_pilots, const AfdmParams& params, int L, int Q,
                             OverlapMode mode = OverlapMode::Disjoint);
  /// Pilots packed back to back so the observation set is one interval
  /// starting at index 0. Spacing is the window width (disjoint) or
  /// (L-1)P + 1 (reduced).
  static PilotScheme packed(int n_pilots, const AfdmParams& params, int L, int Q,
                            OverlapMode mode = OverlapMode::Disjoint);

  /// Throws when the layout is infeasible for (params, L, Q).
  void validate(const AfdmParams& params, int L, int Q) const;
};

/// Positions that must carry zero (or a pilot) so that no data symbol's
/// response reaches an observation window. true = reserved.
std::vector<bool> reserved_positions(const PilotScheme& scheme, const AfdmParams& params, int L, int Q);

/// Frame with pilots in place, guards zeroed and the remaining positions
/// copied from data (length N) when given.
CVector build_pilot_frame(const PilotScheme& scheme, const AfdmParams& params, int L, int Q,
                          const std::optional<CVector>& data = std::nullopt);

/// Sorted union of the per-pilot observation windows.
std::vector<int> observation_index_set(const PilotScheme& scheme, const AfdmParams& params, int L, int Q);

/// y_p = M_p alpha for the observation rows.
struct MeasurementOperator {
  CMatrix matrix;         // |P| x L(2Q+1)
  std::vector<int> rows;  // sorted observation indices
  AfdmParams params;
  PilotScheme scheme;
  int L = 0;
  int Q = 0;

  int column(int l, int q) const { return l * (2 * Q + 1) + Q + q; }
  CVector apply(const CVector& alpha) const { return matrix * alpha; }
};

/// Column (l, q) is the observed part of Phi Delta_q Pi^l Phi^H x_p, with
/// Delta_q = diag(e^{i 2 pi q n / N}) and Pi the cyclic down-shift.
MeasurementOperator build_measurement_operator(const PilotScheme& scheme, const AfdmParams& params, int L,
                                               int Q);

CVector extract_measurements(const CVector& y, const std::vector<int>& rows);
/// Writes y_p back into a zero vector of length n.
CVector scatter_measurements(const CVector& y_p, const std::vector<int>& rows, int n);

/// Grouping of the delay-Doppler grid into the sets
///   D_r = {(l, q) : (q - shift*l) mod ((L-1)P + 1) = r},
/// i.e. the grid points whose DAFT-domain shift falls in residue class r.
/// With shift = -P this is the (q + P l) congruence.
struct HierarchicalForm {
  int L = 0;
  int Q = 0;
  int P = 1;
  int c1_sign = +1;
  int block_count = 0;   // (L-1)P + 1
  int block_width = 0;   // 2 ceil(Q/P) + 1
  std::vector<std::vector<std::pair<int, int>>> diagonal_sets;  // (l, q), ordered by q then l
  std::vector<int> block_offsets;       // start of D_r inside alpha~, size block_count + 1
  std::vector<int> column_permutation;  // alpha~[i] = alpha[column_permutation[i]]

  CVector permute(const CVector& alpha) const;
  CVector unpermute(const CVector& alpha_tilde) const;
};

HierarchicalForm hierarchical_permutation(int L, int Q, int P, int c1_sign = +1);

/// Map of observation rows onto the folded layout y~_p: row i of y_p is
/// added into entry target[i] = r * N_p + p, where p is the pilot whose
/// window holds the row and r is the residue of its offset. Rows of one
/// pilot at congruent offsets fold together.
struct RowGrouping {
  bool valid = false;       // false when some row sits in several windows
  int n_pilots = 0;
  std::vector<int> target;  // one entry per row of y_p
};

RowGrouping build_row_grouping(const MeasurementOperator& op, const HierarchicalForm& hf);
/// y~_p from y_p.
CVector fold_observations(const CVector& y_p, const RowGrouping& grouping, int block_count);

struct KroneckerReport {
  bool tiling_ok = false;
  std::string note;
  CMatrix permuted;                   // folded rows, permuted columns
  double off_block_mass = 0.0;        // relative energy outside the diagonal blocks
  double max_block_deviation = 0.0;   // after removing unit-modulus row/column factors
  CMatrix block_matrix;               // first diagonal block, M~_D
  RVector pilot_magnitudes;           // per-row magnitude of the first block
  double modulus_deviation = 0.0;     // max | |entry| - |pilot value| |
  bool equal_modulus = false;
};

/// Tiles the permuted operator into (L-1)P+1 diagonal blocks and compares
/// them. Blocks are compared after dividing out per-row and per-column
/// unit-modulus phases (and pilot magnitudes), i.e. up to the diagonal
/// factors diag(p) and Psi.
KroneckerReport kronecker_diagnostic(const MeasurementOperator& op, const HierarchicalForm& hf,
                                     double tol = 1e-9);

/// Text format:
///   afdm-operator 1
///   rows <R> cols <C>
///   index <k_0> ... <k_{R-1}>
///   <row> <col> <re> <im>     (one line per nonzero, |entry| > drop_below)
///   end
void write_operator_text(std::ostream& os, const MeasurementOperator& op, double drop_below = 0.0);

struct OperatorText {
  std::vector<int> rows;
  CMatrix matrix;
};
OperatorText read_operator_text(std::istream& is);

}  // namespace afdm
