#pragma once

// Sparse binary linear algebra over GF(2).
//
// BinMatrix keeps row and column adjacency in sync; it is the authoritative
// representation for Tanner graph construction. Elimination paths convert to
// a bit-packed dense form (DenseRows) with private scratch per call.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace symbreak {

using Index = std::uint32_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void normalize_support(std::vector<Index>& s, std::size_t len,
                              const char* what) {
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) {
    throw Error(std::string(what) + ": duplicate index");
  }
  if (!s.empty() && s.back() >= len) {
    throw Error(std::string(what) + ": index " + std::to_string(s.back()) +
                " out of range " + std::to_string(len));
  }
}

}  // namespace detail

/// Binary vector stored by its sorted, duplicate-free support.
class BinVector {
 public:
  BinVector() = default;
  explicit BinVector(std::size_t len) : len_(len) {}
  BinVector(std::size_t len, std::vector<Index> support)
      : len_(len), support_(std::move(support)) {
    detail::normalize_support(support_, len_, "BinVector");
  }

  static BinVector from_dense(std::span<const std::uint8_t> bits) {
    BinVector v(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] & 1U) v.support_.push_back(static_cast<Index>(i));
    }
    return v;
  }

  std::size_t size() const { return len_; }
  std::size_t weight() const { return support_.size(); }
  bool is_zero() const { return support_.empty(); }
  const std::vector<Index>& support() const { return support_; }

  bool test(Index i) const {
    return std::binary_search(support_.begin(), support_.end(), i);
  }

  std::vector<std::uint8_t> dense() const {
    std::vector<std::uint8_t> out(len_, 0);
    for (Index i : support_) out[i] = 1;
    return out;
  }

  /// Symmetric difference.
  BinVector operator^(const BinVector& o) const {
    if (o.len_ != len_) throw DimensionError("BinVector xor: length mismatch");
    BinVector out(len_);
    std::set_symmetric_difference(support_.begin(), support_.end(),
                                  o.support_.begin(), o.support_.end(),
                                  std::back_inserter(out.support_));
    return out;
  }

  /// Parity of the overlap with another vector.
  bool dot(const BinVector& o) const {
    std::size_t i = 0, j = 0, n = 0;
    while (i < support_.size() && j < o.support_.size()) {
      if (support_[i] < o.support_[j]) {
        ++i;
      } else if (o.support_[j] < support_[i]) {
        ++j;
      } else {
        ++n, ++i, ++j;
      }
    }
    return (n & 1U) != 0;
  }

  bool operator==(const BinVector&) const = default;

  std::string to_string() const {
    std::string s(len_, '0');
    for (Index i : support_) s[i] = '1';
    return s;
  }

 private:
  std::size_t len_ = 0;
  std::vector<Index> support_;
};

/// Sparse binary matrix with row and column adjacency.
class BinMatrix {
 public:
  BinMatrix() = default;
  BinMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), row_support_(rows), col_support_(cols) {}

  BinMatrix(std::size_t rows, std::size_t cols,
            std::vector<std::vector<Index>> row_support)
      : rows_(rows), cols_(cols), row_support_(std::move(row_support)) {
    if (row_support_.size() != rows_) {
      throw DimensionError("BinMatrix: row count mismatch");
    }
    for (auto& r : row_support_) detail::normalize_support(r, cols_, "BinMatrix");
    rebuild_columns();
  }

  static BinMatrix identity(std::size_t n) {
    std::vector<std::vector<Index>> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = {static_cast<Index>(i)};
    return BinMatrix(n, n, std::move(rows));
  }

  static BinMatrix from_dense(const std::vector<std::vector<std::uint8_t>>& d,
                              std::size_t cols) {
    std::vector<std::vector<Index>> rows(d.size());
    for (std::size_t r = 0; r < d.size(); ++r) {
      if (d[r].size() != cols) throw DimensionError("from_dense: ragged rows");
      for (std::size_t c = 0; c < cols; ++c) {
        if (d[r][c] & 1U) rows[r].push_back(static_cast<Index>(c));
      }
    }
    return BinMatrix(d.size(), cols, std::move(rows));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<Index>& row(std::size_t r) const { return row_support_[r]; }
  const std::vector<Index>& col(std::size_t c) const { return col_support_[c]; }
  const std::vector<std::vector<Index>>& row_supports() const { return row_support_; }

  std::size_t nnz() const {
    std::size_t n = 0;
    for (const auto& r : row_support_) n += r.size();
    return n;
  }

  bool test(std::size_t r, std::size_t c) const {
    const auto& s = row_support_[r];
    return std::binary_search(s.begin(), s.end(), static_cast<Index>(c));
  }

  BinVector row_vector(std::size_t r) const {
    BinVector v(cols_, row_support_[r]);
    return v;
  }

  BinMatrix transpose() const {
    return BinMatrix(cols_, rows_, col_support_);
  }

  bool operator==(const BinMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && row_support_ == o.row_support_;
  }

 private:
  void rebuild_columns() {
    col_support_.assign(cols_, {});
    for (std::size_t r = 0; r < rows_; ++r) {
      for (Index c : row_support_[r]) col_support_[c].push_back(static_cast<Index>(r));
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::vector<Index>> row_support_;
  std::vector<std::vector<Index>> col_support_;
};

/// [a | b], side by side.
inline BinMatrix hstack(const BinMatrix& a, const BinMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("hstack: row count mismatch");
  std::vector<std::vector<Index>> rows(a.rows());
  const auto off = static_cast<Index>(a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    rows[r] = a.row(r);
    for (Index c : b.row(r)) rows[r].push_back(c + off);
  }
  return BinMatrix(a.rows(), a.cols() + b.cols(), std::move(rows));
}

/// Rows of a followed by rows of b.
inline BinMatrix vstack(const BinMatrix& a, const BinMatrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("vstack: column count mismatch");
  auto rows = a.row_supports();
  rows.insert(rows.end(), b.row_supports().begin(), b.row_supports().end());
  return BinMatrix(a.rows() + b.rows(), a.cols(), std::move(rows));
}

/// Kronecker product a (x) b.
inline BinMatrix kron(const BinMatrix& a, const BinMatrix& b) {
  std::vector<std::vector<Index>> rows(a.rows() * b.rows());
  for (std::size_t ra = 0; ra < a.rows(); ++ra) {
    for (std::size_t rb = 0; rb < b.rows(); ++rb) {
      auto& out = rows[ra * b.rows() + rb];
      for (Index ca : a.row(ra)) {
        for (Index cb : b.row(rb)) {
          out.push_back(static_cast<Index>(ca * b.cols() + cb));
        }
      }
    }
  }
  return BinMatrix(a.rows() * b.rows(), a.cols() * b.cols(), std::move(rows));
}

inline BinVector matvec(const BinMatrix& m, const BinVector& v) {
  if (m.cols() != v.size()) {
    throw DimensionError("matvec: matrix has " + std::to_string(m.cols()) +
                         " columns, vector has length " + std::to_string(v.size()));
  }
  std::vector<std::uint8_t> acc(m.rows(), 0);
  for (Index c : v.support()) {
    for (Index r : m.col(c)) acc[r] ^= 1U;
  }
  return BinVector::from_dense(acc);
}

/// Product a * b^T over GF(2), returned sparse. Used for commutation checks.
inline BinMatrix mul_transpose(const BinMatrix& a, const BinMatrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("mul_transpose: column mismatch");
  std::vector<std::vector<Index>> rows(a.rows());
  std::vector<std::uint8_t> acc(b.rows(), 0), seen(b.rows(), 0);
  std::vector<Index> touched;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    touched.clear();
    for (Index c : a.row(r)) {
      for (Index rb : b.col(c)) {
        if (!seen[rb]) {
          seen[rb] = 1;
          touched.push_back(rb);
        }
        acc[rb] ^= 1U;
      }
    }
    for (Index rb : touched) {
      if (acc[rb]) rows[r].push_back(rb);
      acc[rb] = 0;
      seen[rb] = 0;
    }
  }
  return BinMatrix(a.rows(), b.rows(), std::move(rows));
}

// ---------------------------------------------------------------------------
// Bit-packed dense rows for elimination.

class DenseRows {
 public:
  DenseRows(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), words_((cols + 63) / 64), data_(rows * words_, 0) {}

  explicit DenseRows(const BinMatrix& m) : DenseRows(m.rows(), m.cols()) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (Index c : m.row(r)) set(r, c);
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t words() const { return words_; }

  bool get(std::size_t r, std::size_t c) const {
    return (data_[r * words_ + c / 64] >> (c % 64)) & 1U;
  }
  void set(std::size_t r, std::size_t c) { data_[r * words_ + c / 64] |= bit(c); }
  void flip(std::size_t r, std::size_t c) { data_[r * words_ + c / 64] ^= bit(c); }

  std::uint64_t* row(std::size_t r) { return data_.data() + r * words_; }
  const std::uint64_t* row(std::size_t r) const { return data_.data() + r * words_; }

  void xor_row(std::size_t dst, std::size_t src) {
    std::uint64_t* d = row(dst);
    const std::uint64_t* s = row(src);
    for (std::size_t w = 0; w < words_; ++w) d[w] ^= s[w];
  }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    std::swap_ranges(row(a), row(a) + words_, row(b));
  }

  bool row_is_zero(std::size_t r) const {
    const std::uint64_t* p = row(r);
    return std::all_of(p, p + words_, [](std::uint64_t w) { return w == 0; });
  }

  std::vector<Index> row_support(std::size_t r) const {
    std::vector<Index> out;
    const std::uint64_t* p = row(r);
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t x = p[w];
      while (x) {
        out.push_back(static_cast<Index>(w * 64 + std::countr_zero(x)));
        x &= x - 1;
      }
    }
    return out;
  }

  /// Appends a row; returns its index.
  std::size_t push_row(std::span<const Index> support) {
    data_.resize(data_.size() + words_, 0);
    ++rows_;
    for (Index c : support) set(rows_ - 1, c);
    return rows_ - 1;
  }

 private:
  static std::uint64_t bit(std::size_t c) { return std::uint64_t{1} << (c % 64); }

  std::size_t rows_;
  std::size_t cols_;
  std::size_t words_;
  std::vector<std::uint64_t> data_;
};

/// Reduced row-echelon form computed over a chosen column order.
///
/// Pivot columns are taken greedily in `column_order`; the pivot row for each
/// is the lowest-index remaining row with a one in that column. Every pivot
/// column is cleared from all other rows (full reduction). An optional
/// right-hand side is carried along as one extra bit per row.
class Echelon {
 public:
  Echelon(const BinMatrix& m, std::span<const Index> column_order,
          const BinVector* rhs = nullptr)
      : rows_(m), rhs_(m.rows(), 0) {
    if (rhs != nullptr) {
      if (rhs->size() != m.rows()) throw DimensionError("Echelon: rhs length mismatch");
      for (Index r : rhs->support()) rhs_[r] = 1;
    }
    reduce(column_order);
  }

  explicit Echelon(const BinMatrix& m, const BinVector* rhs = nullptr)
      : Echelon(m, natural_order(m.cols()), rhs) {}

  std::size_t rank() const { return pivots_.size(); }
  const std::vector<Index>& pivot_columns() const { return pivots_; }
  const DenseRows& reduced() const { return rows_; }
  std::uint8_t rhs(std::size_t r) const { return rhs_[r]; }

  /// True when the carried right-hand side lies in the column space.
  bool consistent() const {
    for (std::size_t r = rank(); r < rows_.rows(); ++r) {
      if (rhs_[r]) return false;
    }
    return true;
  }

  /// Solution with all non-pivot columns zero; requires consistent().
  BinVector particular_solution() const {
    std::vector<Index> sup;
    for (std::size_t r = 0; r < rank(); ++r) {
      if (rhs_[r]) sup.push_back(pivots_[r]);
    }
    return BinVector(rows_.cols(), std::move(sup));
  }

  std::vector<bool> pivot_mask() const {
    std::vector<bool> mask(rows_.cols(), false);
    for (Index p : pivots_) mask[p] = true;
    return mask;
  }

  /// One kernel vector per free column f: e_f plus the pivots it drives.
  std::vector<BinVector> kernel_basis() const {
    const auto mask = pivot_mask();
    std::vector<BinVector> out;
    out.reserve(rows_.cols() - rank());
    for (std::size_t f = 0; f < rows_.cols(); ++f) {
      if (mask[f]) continue;
      std::vector<Index> sup{static_cast<Index>(f)};
      for (std::size_t r = 0; r < rank(); ++r) {
        if (rows_.get(r, f)) sup.push_back(pivots_[r]);
      }
      out.emplace_back(rows_.cols(), std::move(sup));
    }
    return out;
  }

  static std::vector<Index> natural_order(std::size_t n) {
    std::vector<Index> o(n);
    for (std::size_t i = 0; i < n; ++i) o[i] = static_cast<Index>(i);
    return o;
  }

 private:
  void reduce(std::span<const Index> order) {
    const std::size_t m = rows_.rows();
    std::size_t r = 0;
    for (Index c : order) {
      if (r == m) break;
      std::size_t piv = m;
      for (std::size_t i = r; i < m; ++i) {
        if (rows_.get(i, c)) {
          piv = i;
          break;
        }
      }
      if (piv == m) continue;
      rows_.swap_rows(r, piv);
      std::swap(rhs_[r], rhs_[piv]);
      for (std::size_t i = 0; i < m; ++i) {
        if (i != r && rows_.get(i, c)) {
          rows_.xor_row(i, r);
          rhs_[i] ^= rhs_[r];
        }
      }
      pivots_.push_back(c);
      ++r;
    }
  }

  DenseRows rows_;
  std::vector<std::uint8_t> rhs_;
  std::vector<Index> pivots_;
};

inline std::size_t rank(const BinMatrix& m) { return Echelon(m).rank(); }

inline std::vector<BinVector> kernel_basis(const BinMatrix& m) {
  return Echelon(m).kernel_basis();
}

/// Solves m e = s choosing pivots greedily in `pivot_order`, with every
/// non-pivot column set to zero. Returns nullopt when s is outside the
/// column space.
inline std::optional<BinVector> solve_constrained(const BinMatrix& m, const BinVector& s,
                                                  std::span<const Index> pivot_order) {
  if (s.size() != m.rows()) throw DimensionError("solve_constrained: syndrome length mismatch");
  if (pivot_order.size() != m.cols()) {
    throw DimensionError("solve_constrained: pivot order is not a permutation of the columns");
  }
  std::vector<std::uint8_t> seen(m.cols(), 0);
  for (Index c : pivot_order) {
    if (c >= m.cols() || seen[c]) {
      throw Error("solve_constrained: pivot order is not a permutation of the columns");
    }
    seen[c] = 1;
  }
  Echelon e(m, pivot_order, &s);
  if (!e.consistent()) return std::nullopt;
  return e.particular_solution();
}

// ---------------------------------------------------------------------------
// alist format (MacKay): "cols rows", "max_col_deg max_row_deg", column
// degrees, row degrees, then 1-based column and row lists padded with zeros.

inline void write_alist(std::ostream& os, const BinMatrix& m) {
  std::size_t max_col = 0, max_row = 0;
  for (std::size_t c = 0; c < m.cols(); ++c) max_col = std::max(max_col, m.col(c).size());
  for (std::size_t r = 0; r < m.rows(); ++r) max_row = std::max(max_row, m.row(r).size());
  os << m.cols() << ' ' << m.rows() << '\n' << max_col << ' ' << max_row << '\n';
  auto degrees = [&os](std::size_t n, auto&& get) {
    for (std::size_t i = 0; i < n; ++i) os << (i ? " " : "") << get(i).size();
    os << '\n';
  };
  degrees(m.cols(), [&](std::size_t c) -> const auto& { return m.col(c); });
  degrees(m.rows(), [&](std::size_t r) -> const auto& { return m.row(r); });
  auto lists = [&os](std::size_t n, std::size_t width, auto&& get) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = get(i);
      for (std::size_t j = 0; j < width; ++j) {
        os << (j ? " " : "") << (j < s.size() ? s[j] + 1 : 0);
      }
      os << '\n';
    }
  };
  lists(m.cols(), max_col, [&](std::size_t c) -> const auto& { return m.col(c); });
  lists(m.rows(), max_row, [&](std::size_t r) -> const auto& { return m.row(r); });
}

inline std::string to_alist(const BinMatrix& m) {
  std::ostringstream os;
  write_alist(os, m);
  return os.str();
}

inline BinMatrix read_alist(std::istream& is) {
  std::size_t cols = 0, rows = 0, max_col = 0, max_row = 0;
  if (!(is >> cols >> rows >> max_col >> max_row)) throw Error("alist: truncated header");
  std::vector<std::size_t> col_deg(cols), row_deg(rows);
  for (auto& d : col_deg) {
    if (!(is >> d)) throw Error("alist: truncated column degrees");
  }
  for (auto& d : row_deg) {
    if (!(is >> d)) throw Error("alist: truncated row degrees");
  }
  std::vector<std::vector<Index>> from_cols(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t j = 0; j < max_col; ++j) {
      std::size_t r = 0;
      if (!(is >> r)) throw Error("alist: truncated column lists");
      if (r == 0) continue;
      if (r > rows) throw Error("alist: row index out of range");
      from_cols[r - 1].push_back(static_cast<Index>(c));
    }
  }
  std::vector<std::vector<Index>> from_rows(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < max_row; ++j) {
      std::size_t c = 0;
      if (!(is >> c)) throw Error("alist: truncated row lists");
      if (c == 0) continue;
      if (c > cols) throw Error("alist: column index out of range");
      from_rows[r].push_back(static_cast<Index>(c - 1));
    }
    if (from_rows[r].size() != row_deg[r]) throw Error("alist: row degree mismatch");
  }
  BinMatrix m(rows, cols, from_rows);
  if (!(m == BinMatrix(rows, cols, from_cols))) {
    throw Error("alist: column and row lists disagree");
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (m.col(c).size() != col_deg[c]) throw Error("alist: column degree mismatch");
  }
  return m;
}

}  // namespace symbreak
