#include "afdm/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace afdm {

WindowGeometry::WindowGeometry(const AfdmParams& params, int L, int Q) {
  if (L < 1 || Q < 0) throw Error("WindowGeometry: requires L >= 1 and Q >= 0");
  const int spread = params.P * (L - 1);
  if (params.delay_shift() > 0) {
    d_min = -spread - Q;
    d_max = Q;
  } else {
    d_min = -Q;
    d_max = spread + Q;
  }
}

namespace {

PilotScheme evenly_spaced(int n_pilots, int spacing, const AfdmParams& params, const WindowGeometry& g,
                          OverlapMode mode, bool contiguous) {
  if (n_pilots < 1) throw Error("pilot scheme: need at least one pilot");
  PilotScheme scheme;
  scheme.overlap_mode = mode;
  scheme.contiguous = contiguous;
  for (int p = 0; p < n_pilots; ++p)
    scheme.positions.push_back(static_cast<int>(mod(-g.d_min + static_cast<std::int64_t>(p) * spacing, params.N)));
  return scheme;
}

// Circular gaps between consecutive sorted positions.
std::vector<int> circular_gaps(std::vector<int> pos, int n) {
  std::sort(pos.begin(), pos.end());
  std::vector<int> gaps;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const int next = (i + 1 < pos.size()) ? pos[i + 1] : pos[0] + n;
    gaps.push_back(next - pos[i]);
  }
  return gaps;
}

bool is_circular_interval(const std::vector<int>& sorted_rows, int n) {
  if (sorted_rows.empty()) return false;
  if (static_cast<int>(sorted_rows.size()) == n) return true;
  std::vector<bool> in(n, false);
  for (int k : sorted_rows) in[k] = true;
  int starts = 0;
  for (int k = 0; k < n; ++k)
    if (in[k] && !in[(k + n - 1) % n]) ++starts;
  return starts == 1;
}

}  // namespace

PilotScheme PilotScheme::uniform(int n_pilots, const AfdmParams& params, int L, int Q, OverlapMode mode) {
  if (n_pilots < 1) throw Error("PilotScheme::uniform: need at least one pilot");
  const WindowGeometry g(params, L, Q);
  PilotScheme scheme = evenly_spaced(n_pilots, params.N / n_pilots, params, g, mode, false);
  scheme.validate(params, L, Q);
  return scheme;
}

PilotScheme PilotScheme::packed(int n_pilots, const AfdmParams& params, int L, int Q, OverlapMode mode) {
  const WindowGeometry g(params, L, Q);
  const int spacing = mode == OverlapMode::Disjoint ? g.width() : params.P * (L - 1) + 1;
  PilotScheme scheme = evenly_spaced(n_pilots, spacing, params, g, mode, true);
  scheme.validate(params, L, Q);
  return scheme;
}

void PilotScheme::validate(const AfdmParams& params, int L, int Q) const {
  params.validate();
  const WindowGeometry g(params, L, Q);
  if (positions.empty()) throw Error("pilot scheme: no pilots");
  if (!values.empty() && values.size() != positions.size())
    throw Error("pilot scheme: values and positions differ in length");
  for (int m : positions)
    if (m < 0 || m >= params.N) throw Error("pilot scheme: position outside [0, N)");
  if (std::set<int>(positions.begin(), positions.end()).size() != positions.size())
    throw Error("pilot scheme: duplicate pilot position");
  if (g.width() > params.N) throw Error("pilot scheme: observation window wider than the frame");
  if (positions.size() > 1) {
    const int min_gap = overlap_mode == OverlapMode::Disjoint ? g.width() : params.P * (L - 1) + 1;
    for (int gap : circular_gaps(positions, params.N)) {
      if (gap >= min_gap) continue;
      if (overlap_mode == OverlapMode::Disjoint)
        throw Error("pilot scheme: observation windows overlap in disjoint mode");
      throw Error("pilot scheme: pilot inside another pilot's guard");
    }
  }
  if (contiguous) {
    // computed directly to avoid recursing through observation_index_set
    std::set<int> rows;
    for (int m : positions)
      for (int d = g.d_min; d <= g.d_max; ++d) rows.insert(static_cast<int>(mod(m + d, params.N)));
    if (!is_circular_interval(std::vector<int>(rows.begin(), rows.end()), params.N))
      throw Error("pilot scheme: contiguous placement does not give an interval");
  }
}

std::vector<bool> reserved_positions(const PilotScheme& scheme, const AfdmParams& params, int L, int Q) {
  scheme.validate(params, L, Q);
  const WindowGeometry g(params, L, Q);
  const int reach = g.width() - 1;
  std::vector<bool> reserved(params.N, false);
  for (int m : scheme.positions)
    for (int d = -reach; d <= reach; ++d) reserved[mod(m + d, params.N)] = true;
  return reserved;
}

CVector build_pilot_frame(const PilotScheme& scheme, const AfdmParams& params, int L, int Q,
                          const std::optional<CVector>& data) {
  const std::vector<bool> reserved = reserved_positions(scheme, params, L, Q);
  CVector x = CVector::Zero(params.N);
  if (data) {
    if (data->size() != params.N) throw Error("build_pilot_frame: data must have length N");
    for (int k = 0; k < params.N; ++k)
      if (!reserved[k]) x[k] = (*data)[k];
  }
  for (int p = 0; p < scheme.count(); ++p) x[scheme.positions[p]] = scheme.value(p);
  return x;
}

std::vector<int> observation_index_set(const PilotScheme& scheme, const AfdmParams& params, int L, int Q) {
  scheme.validate(params, L, Q);
  const WindowGeometry g(params, L, Q);
  std::set<int> rows;
  for (int m : scheme.positions)
    for (int d = g.d_min; d <= g.d_max; ++d) rows.insert(static_cast<int>(mod(m + d, params.N)));
  return {rows.begin(), rows.end()};
}

MeasurementOperator build_measurement_operator(const PilotScheme& scheme, const AfdmParams& params, int L,
                                               int Q) {
  MeasurementOperator op;
  op.rows = observation_index_set(scheme, params, L, Q);
  op.params = params;
  op.scheme = scheme;
  op.L = L;
  op.Q = Q;

  const int n_len = params.N;
  const int bins = 2 * Q + 1;
  const Daft daft(params);
  const CVector s = daft.modulate(build_pilot_frame(scheme, params, L, Q));

  std::vector<cplx> twiddle(n_len);
  for (int k = 0; k < n_len; ++k) twiddle[k] = unit_phase(static_cast<double>(k) / n_len);

  op.matrix.resize(static_cast<Eigen::Index>(op.rows.size()), static_cast<Eigen::Index>(L) * bins);
  CVector shifted(n_len);
  CVector t(n_len);
  for (int l = 0; l < L; ++l) {
    for (int n = 0; n < n_len; ++n) shifted[n] = s[mod(n - l, n_len)];  // Pi^l
    for (int q = -Q; q <= Q; ++q) {
      for (int n = 0; n < n_len; ++n)
        t[n] = twiddle[mod(static_cast<std::int64_t>(q) * n, n_len)] * shifted[n];  // Delta_q
      const CVector y = daft.demodulate(t);
      const int col = op.column(l, q);
      for (std::size_t i = 0; i < op.rows.size(); ++i) op.matrix(static_cast<Eigen::Index>(i), col) = y[op.rows[i]];
    }
  }
  return op;
}

CVector extract_measurements(const CVector& y, const std::vector<int>& rows) {
  CVector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= y.size()) throw Error("extract_measurements: index out of range");
    out[static_cast<Eigen::Index>(i)] = y[rows[i]];
  }
  return out;
}

CVector scatter_measurements(const CVector& y_p, const std::vector<int>& rows, int n) {
  if (y_p.size() != static_cast<Eigen::Index>(rows.size()))
    throw Error("scatter_measurements: size mismatch");
  CVector out = CVector::Zero(n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= n) throw Error("scatter_measurements: index out of range");
    out[rows[i]] = y_p[static_cast<Eigen::Index>(i)];
  }
  return out;
}

CVector HierarchicalForm::permute(const CVector& alpha) const {
  if (alpha.size() != static_cast<Eigen::Index>(column_permutation.size()))
    throw Error("HierarchicalForm::permute: size mismatch");
  CVector out(alpha.size());
  for (std::size_t i = 0; i < column_permutation.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = alpha[column_permutation[i]];
  return out;
}

CVector HierarchicalForm::unpermute(const CVector& alpha_tilde) const {
  if (alpha_tilde.size() != static_cast<Eigen::Index>(column_permutation.size()))
    throw Error("HierarchicalForm::unpermute: size mismatch");
  CVector out(alpha_tilde.size());
  for (std::size_t i = 0; i < column_permutation.size(); ++i)
    out[column_permutation[i]] = alpha_tilde[static_cast<Eigen::Index>(i)];
  return out;
}

HierarchicalForm hierarchical_permutation(int L, int Q, int P, int c1_sign) {
  if (L < 1 || Q < 0 || P < 1) throw Error("hierarchical_permutation: invalid L, Q or P");
  if (c1_sign != 1 && c1_sign != -1) throw Error("hierarchical_permutation: c1_sign must be +1 or -1");
  HierarchicalForm hf;
  hf.L = L;
  hf.Q = Q;
  hf.P = P;
  hf.c1_sign = c1_sign;
  hf.block_count = (L - 1) * P + 1;
  hf.block_width = 2 * ((Q + P - 1) / P) + 1;
  hf.diagonal_sets.resize(hf.block_count);
  const int shift = c1_sign * P;
  for (int q = -Q; q <= Q; ++q)
    for (int l = 0; l < L; ++l)
      hf.diagonal_sets[mod(q - shift * l, hf.block_count)].emplace_back(l, q);

  hf.block_offsets.push_back(0);
  for (const auto& set : hf.diagonal_sets) {
    for (const auto& [l, q] : set) hf.column_permutation.push_back(l * (2 * Q + 1) + Q + q);
    hf.block_offsets.push_back(static_cast<int>(hf.column_permutation.size()));
  }
  return hf;
}

RowGrouping build_row_grouping(const MeasurementOperator& op, const HierarchicalForm& hf) {
  const WindowGeometry g(op.params, op.L, op.Q);
  const int n_len = op.params.N;
  RowGrouping grouping;
  grouping.n_pilots = op.scheme.count();
  grouping.valid = true;
  grouping.target.assign(op.rows.size(), -1);
  for (std::size_t i = 0; i < op.rows.size(); ++i) {
    int owners = 0;
    for (int p = 0; p < grouping.n_pilots; ++p) {
      const auto off = mod(op.rows[i] - op.scheme.positions[p] - g.d_min, n_len);
      if (off >= g.width()) continue;
      const int d = static_cast<int>(off) + g.d_min;
      grouping.target[i] = static_cast<int>(mod(d, hf.block_count)) * grouping.n_pilots + p;
      ++owners;
    }
    if (owners != 1) grouping.valid = false;
  }
  return grouping;
}

CVector fold_observations(const CVector& y_p, const RowGrouping& grouping, int block_count) {
  if (y_p.size() != static_cast<Eigen::Index>(grouping.target.size()))
    throw Error("fold_observations: size mismatch");
  CVector out = CVector::Zero(static_cast<Eigen::Index>(block_count) * grouping.n_pilots);
  for (std::size_t i = 0; i < grouping.target.size(); ++i)
    if (grouping.target[i] >= 0) out[grouping.target[i]] += y_p[static_cast<Eigen::Index>(i)];
  return out;
}

KroneckerReport kronecker_diagnostic(const MeasurementOperator& op, const HierarchicalForm& hf, double tol) {
  if (hf.L != op.L || hf.Q != op.Q || hf.P != op.params.P || hf.c1_sign != op.params.c1_sign)
    throw Error("kronecker_diagnostic: hierarchical form does not match the operator");
  KroneckerReport rep;
  const RowGrouping grouping = build_row_grouping(op, hf);
  const int n_pilots = grouping.n_pilots;
  const auto n_cols = op.matrix.cols();

  CMatrix folded = CMatrix::Zero(static_cast<Eigen::Index>(hf.block_count) * n_pilots, n_cols);
  for (std::size_t i = 0; i < grouping.target.size(); ++i)
    if (grouping.target[i] >= 0) folded.row(grouping.target[i]) += op.matrix.row(static_cast<Eigen::Index>(i));
  rep.permuted.resize(folded.rows(), n_cols);
  for (Eigen::Index j = 0; j < n_cols; ++j) rep.permuted.col(j) = folded.col(hf.column_permutation[j]);

  const double total = rep.permuted.squaredNorm();
  double inside = 0.0;
  for (int r = 0; r < hf.block_count; ++r) {
    const int width = hf.block_offsets[r + 1] - hf.block_offsets[r];
    inside += rep.permuted.block(static_cast<Eigen::Index>(r) * n_pilots, hf.block_offsets[r], n_pilots, width)
                  .squaredNorm();
  }
  rep.off_block_mass = total > 0.0 ? (total - inside) / total : 0.0;

  const int width0 = hf.block_offsets[1] - hf.block_offsets[0];
  rep.block_matrix = rep.permuted.block(0, 0, n_pilots, width0);
  rep.pilot_magnitudes = rep.block_matrix.col(0).cwiseAbs();

  rep.modulus_deviation = 0.0;
  for (int r = 0; r < hf.block_count; ++r) {
    const int width = hf.block_offsets[r + 1] - hf.block_offsets[r];
    const CMatrix b =
        rep.permuted.block(static_cast<Eigen::Index>(r) * n_pilots, hf.block_offsets[r], n_pilots, width);
    for (int p = 0; p < n_pilots; ++p)
      for (int j = 0; j < width; ++j)
        rep.modulus_deviation =
            std::max(rep.modulus_deviation, std::abs(std::abs(b(p, j)) - std::abs(op.scheme.value(p))));
  }
  rep.equal_modulus = rep.modulus_deviation <= tol;

  if (!grouping.valid) {
    rep.note = "observation rows shared between pilot windows; blocks cannot be tiled";
    rep.max_block_deviation = std::numeric_limits<double>::infinity();
    return rep;
  }
  for (int r = 1; r < hf.block_count; ++r)
    if (hf.block_offsets[r + 1] - hf.block_offsets[r] != width0) {
      rep.note = "diagonal sets differ in size; blocks cannot be compared";
      rep.max_block_deviation = std::numeric_limits<double>::infinity();
      return rep;
    }

  // Divide each row by its first entry, then each column by its first entry.
  auto normalized = [&](int r, CMatrix& out) -> bool {
    out = rep.permuted.block(static_cast<Eigen::Index>(r) * n_pilots, hf.block_offsets[r], n_pilots, width0);
    for (int p = 0; p < n_pilots; ++p) {
      const cplx lead = out(p, 0);
      if (std::abs(lead) <= tol) return false;
      out.row(p) /= lead;
    }
    for (int j = 0; j < width0; ++j) {
      const cplx lead = out(0, j);
      if (std::abs(lead) <= tol) return false;
      out.col(j) /= lead;
    }
    return true;
  };

  CMatrix reference;
  CMatrix current;
  if (!normalized(0, reference)) {
    rep.note = "vanishing entry in the first block";
    rep.max_block_deviation = std::numeric_limits<double>::infinity();
    return rep;
  }
  rep.max_block_deviation = 0.0;
  for (int r = 1; r < hf.block_count; ++r) {
    if (!normalized(r, current)) {
      rep.note = "vanishing entry in block " + std::to_string(r);
      rep.max_block_deviation = std::numeric_limits<double>::infinity();
      return rep;
    }
    rep.max_block_deviation = std::max(rep.max_block_deviation, (current - reference).cwiseAbs().maxCoeff());
  }
  rep.tiling_ok = true;
  return rep;
}

void write_operator_text(std::ostream& os, const MeasurementOperator& op, double drop_below) {
  os << "afdm-operator 1\n";
  os << "rows " << op.matrix.rows() << " cols " << op.matrix.cols() << "\n";
  os << "index";
  for (int k : op.rows) os << ' ' << k;
  os << "\n" << std::setprecision(17);
  for (Eigen::Index j = 0; j < op.matrix.cols(); ++j)
    for (Eigen::Index i = 0; i < op.matrix.rows(); ++i) {
      const cplx v = op.matrix(i, j);
      if (std::abs(v) > drop_below || (drop_below == 0.0 && v != cplx{}))
        os << i << ' ' << j << ' ' << v.real() << ' ' << v.imag() << "\n";
    }
  os << "end\n";
}

OperatorText read_operator_text(std::istream& is) {
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "afdm-operator" || version != 1)
    throw Error("read_operator_text: bad header");
  std::string w1, w2;
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> w1 >> rows >> w2 >> cols) || w1 != "rows" || w2 != "cols")
    throw Error("read_operator_text: bad dimensions line");
  OperatorText out;
  if (!(is >> tag) || tag != "index") throw Error("read_operator_text: missing index line");
  out.rows.resize(static_cast<std::size_t>(rows));
  for (auto& k : out.rows)
    if (!(is >> k)) throw Error("read_operator_text: truncated index line");
  out.matrix = CMatrix::Zero(rows, cols);
  std::string token;
  while (is >> token) {
    if (token == "end") return out;
    Eigen::Index i = std::stol(token), j = 0;
    double re = 0.0, im = 0.0;
    if (!(is >> j >> re >> im)) throw Error("read_operator_text: truncated entry");
    if (i < 0 || i >= rows || j < 0 || j >= cols) throw Error("read_operator_text: entry out of range");
    out.matrix(i, j) = {re, im};
  }
  throw Error("read_operator_text: missing end marker");
}

}  // namespace afdm
