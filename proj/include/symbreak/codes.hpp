#pragma once

// CSS code construction: bivariate bicycle, generalized bicycle and
// hypergraph product families, plus logical operator bases.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "symbreak/gf2.hpp"

namespace symbreak {

enum class CodeFamily { generic, bb, gb, hp };

inline std::string to_string(CodeFamily f) {
  switch (f) {
    case CodeFamily::bb: return "bb";
    case CodeFamily::gb: return "gb";
    case CodeFamily::hp: return "hp";
    default: return "generic";
  }
}

/// Sum of monomials x^i y^j in the group algebra of Z_l x Z_m.
class MonomialSum {
 public:
  struct Term {
    Index i = 0;
    Index j = 0;
    bool operator==(const Term&) const = default;
    auto operator<=>(const Term&) const = default;
  };

  MonomialSum(std::size_t l, std::size_t m, std::vector<std::pair<long, long>> terms)
      : l_(l), m_(m) {
    if (l == 0 || m == 0) throw Error("MonomialSum: group orders must be positive");
    for (auto [i, j] : terms) {
      const auto li = static_cast<long>(l), mj = static_cast<long>(m);
      terms_.push_back({static_cast<Index>(((i % li) + li) % li),
                        static_cast<Index>(((j % mj) + mj) % mj)});
    }
    auto sorted = terms_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error("MonomialSum: duplicate term after reduction");
    }
  }

  /// Polynomial in a single cyclic shift of order l.
  static MonomialSum univariate(std::size_t l, const std::vector<long>& exponents) {
    std::vector<std::pair<long, long>> t;
    for (long e : exponents) t.emplace_back(e, 0);
    return MonomialSum(l, 1, std::move(t));
  }

  std::size_t l() const { return l_; }
  std::size_t m() const { return m_; }
  const std::vector<Term>& terms() const { return terms_; }

  /// The l*m x l*m matrix sum_t x^{i_t} y^{j_t}; row (i, j) has ones at
  /// columns (i + i_t, j + j_t), flattened as i*m + j.
  BinMatrix matrix() const {
    const std::size_t n = l_ * m_;
    std::vector<std::vector<Index>> rows(n);
    for (std::size_t i = 0; i < l_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) {
        auto& row = rows[i * m_ + j];
        for (const auto& t : terms_) {
          row.push_back(static_cast<Index>(((i + t.i) % l_) * m_ + (j + t.j) % m_));
        }
      }
    }
    return BinMatrix(n, n, std::move(rows));
  }

 private:
  std::size_t l_;
  std::size_t m_;
  std::vector<Term> terms_;
};

struct CssCode {
  std::string label;
  CodeFamily family = CodeFamily::generic;
  std::size_t n = 0;
  std::size_t k = 0;
  BinMatrix hx;
  BinMatrix hz;
  std::vector<BinVector> logical_x;
  std::vector<BinVector> logical_z;
  std::optional<std::size_t> claimed_distance;
  /// Width of the left column block for two-block (BB/GB) codes, else 0.
  std::size_t left_block = 0;
};

/// X errors are decoded against hz, Z errors against hx.
enum class ErrorType { X, Z };

inline const BinMatrix& checks_for(const CssCode& c, ErrorType t) {
  return t == ErrorType::X ? c.hz : c.hx;
}

inline const BinMatrix& opposite_for(const CssCode& c, ErrorType t) {
  return t == ErrorType::X ? c.hx : c.hz;
}

/// Logicals that detect a residual of the given type.
inline const std::vector<BinVector>& detecting_logicals(const CssCode& c, ErrorType t) {
  return t == ErrorType::X ? c.logical_z : c.logical_x;
}

struct LogicalBasis {
  std::vector<BinVector> x;
  std::vector<BinVector> z;
};

namespace detail {

/// Incremental span over GF(2), rows kept with distinct leading (lowest) bits.
class SpanBuilder {
 public:
  explicit SpanBuilder(std::size_t cols) : rows_(0, cols), lead_(cols, kNone) {}

  /// Adds v if it is independent of the current span; returns true if added.
  bool insert(const BinVector& v) {
    std::vector<std::uint64_t> w(rows_.words(), 0);
    for (Index c : v.support()) w[c / 64] ^= std::uint64_t{1} << (c % 64);
    for (std::size_t word = 0; word < w.size();) {
      if (w[word] == 0) {
        ++word;
        continue;
      }
      const std::size_t c = word * 64 + std::countr_zero(w[word]);
      const std::size_t r = lead_[c];
      if (r == kNone) {
        const std::size_t idx = rows_.push_row({});
        std::copy(w.begin(), w.end(), rows_.row(idx));
        lead_[c] = idx;
        return true;
      }
      const std::uint64_t* src = rows_.row(r);
      for (std::size_t x = word; x < w.size(); ++x) w[x] ^= src[x];
    }
    return false;
  }

  std::size_t size() const { return rows_.rows(); }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  DenseRows rows_;
  std::vector<std::size_t> lead_;
};

/// Kernel vectors of `kernel_of` that are independent modulo rowspace(`modulo`).
inline std::vector<BinVector> quotient_basis(const BinMatrix& kernel_of,
                                             const BinMatrix& modulo) {
  SpanBuilder span(kernel_of.cols());
  for (std::size_t r = 0; r < modulo.rows(); ++r) span.insert(modulo.row_vector(r));
  std::vector<BinVector> out;
  for (auto& v : kernel_basis(kernel_of)) {
    if (span.insert(v)) out.push_back(std::move(v));
  }
  return out;
}

/// Inverse of a square GF(2) matrix given as dense rows; throws if singular.
inline DenseRows invert(DenseRows a) {
  const std::size_t k = a.rows();
  DenseRows inv(k, k);
  for (std::size_t i = 0; i < k; ++i) inv.set(i, i);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = k;
    for (std::size_t r = c; r < k; ++r) {
      if (a.get(r, c)) {
        piv = r;
        break;
      }
    }
    if (piv == k) throw Error("logical pairing matrix is singular");
    a.swap_rows(c, piv);
    inv.swap_rows(c, piv);
    for (std::size_t r = 0; r < k; ++r) {
      if (r != c && a.get(r, c)) {
        a.xor_row(r, c);
        inv.xor_row(r, c);
      }
    }
  }
  return inv;
}

}  // namespace detail

/// Logical operator bases with symplectic pairing logical_z[i].logical_x[j] = delta_ij.
/// X logicals lie in ker(hz) outside rowspace(hx); Z logicals symmetrically.
inline LogicalBasis compute_logicals(const BinMatrix& hx, const BinMatrix& hz) {
  if (hx.cols() != hz.cols()) throw DimensionError("compute_logicals: qubit count mismatch");
  LogicalBasis out;
  out.x = detail::quotient_basis(hz, hx);
  auto z = detail::quotient_basis(hx, hz);
  if (out.x.size() != z.size()) throw Error("compute_logicals: X/Z logical counts differ");
  const std::size_t k = z.size();
  const std::size_t n = hx.cols();
  if (k == 0) return out;

  DenseRows xs(k, n), zs(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    for (Index c : out.x[i].support()) xs.set(i, c);
    for (Index c : z[i].support()) zs.set(i, c);
  }
  DenseRows pairing(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      unsigned par = 0;
      for (std::size_t w = 0; w < xs.words(); ++w) {
        par += std::popcount(zs.row(i)[w] & xs.row(j)[w]);
      }
      if (par & 1U) pairing.set(i, j);
    }
  }
  // z' = pairing^{-1} z gives z'_i . x_j = delta_ij.
  const DenseRows inv = detail::invert(std::move(pairing));
  out.z.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<std::uint64_t> acc(zs.words(), 0);
    for (std::size_t j = 0; j < k; ++j) {
      if (!inv.get(i, j)) continue;
      for (std::size_t w = 0; w < acc.size(); ++w) acc[w] ^= zs.row(j)[w];
    }
    std::vector<Index> sup;
    for (std::size_t w = 0; w < acc.size(); ++w) {
      for (std::uint64_t x = acc[w]; x; x &= x - 1) {
        sup.push_back(static_cast<Index>(w * 64 + std::countr_zero(x)));
      }
    }
    out.z.emplace_back(n, std::move(sup));
  }
  return out;
}

/// Assembles a CSS code, computing k and the logical bases. Throws if the
/// check matrices do not commute. k = 0 is allowed here; family
/// constructors reject it.
inline CssCode make_css_code(std::string label, BinMatrix hx, BinMatrix hz,
                             CodeFamily family = CodeFamily::generic) {
  if (hx.cols() != hz.cols()) throw DimensionError("CSS code: hx and hz column counts differ");
  if (mul_transpose(hz, hx).nnz() != 0) throw Error("CSS code: hz hx^T != 0");
  CssCode c;
  c.label = std::move(label);
  c.family = family;
  c.n = hx.cols();
  c.k = c.n - rank(hx) - rank(hz);
  auto logicals = compute_logicals(hx, hz);
  if (logicals.x.size() != c.k) throw Error("CSS code: logical count disagrees with rank formula");
  c.logical_x = std::move(logicals.x);
  c.logical_z = std::move(logicals.z);
  c.hx = std::move(hx);
  c.hz = std::move(hz);
  return c;
}

/// hx = [A | B], hz = [B^T | A^T] for commuting A, B.
inline CssCode make_two_block_code(std::string label, const MonomialSum& a,
                                   const MonomialSum& b, CodeFamily family) {
  if (a.l() != b.l() || a.m() != b.m()) throw Error("two-block code: group orders differ");
  const BinMatrix ma = a.matrix(), mb = b.matrix();
  CssCode c = make_css_code(std::move(label), hstack(ma, mb),
                            hstack(mb.transpose(), ma.transpose()), family);
  if (c.k == 0) throw Error("trivial code: k = 0");
  c.left_block = a.l() * a.m();
  return c;
}

inline CssCode make_bb_code(const MonomialSum& a, const MonomialSum& b,
                            std::string label = "bb") {
  if (a.terms().size() != 3 || b.terms().size() != 3) {
    throw Error("BB code: each polynomial needs exactly 3 terms");
  }
  return make_two_block_code(std::move(label), a, b, CodeFamily::bb);
}

inline CssCode make_gb_code(const std::vector<long>& a, const std::vector<long>& b,
                            std::size_t l, std::string label = "gb") {
  return make_two_block_code(std::move(label), MonomialSum::univariate(l, a),
                             MonomialSum::univariate(l, b), CodeFamily::gb);
}

/// Hypergraph product: hx = [h1 (x) I | I (x) h2^T], hz = [I (x) h2 | h1^T (x) I].
inline CssCode make_hp_code(const BinMatrix& h1, const BinMatrix& h2,
                            std::string label = "hp") {
  const std::size_t m1 = h1.rows(), n1 = h1.cols(), m2 = h2.rows(), n2 = h2.cols();
  if (n1 == 0 || n2 == 0) throw DimensionError("HP code: empty classical matrix");
  BinMatrix hx = hstack(kron(h1, BinMatrix::identity(n2)),
                        kron(BinMatrix::identity(m1), h2.transpose()));
  BinMatrix hz = hstack(kron(BinMatrix::identity(n1), h2),
                        kron(h1.transpose(), BinMatrix::identity(m2)));
  CssCode c = make_css_code(std::move(label), std::move(hx), std::move(hz), CodeFamily::hp);
  if (c.k == 0) throw Error("trivial code: k = 0");
  return c;
}

/// Parity-check matrix of the length-n repetition code, (n-1) x n.
inline BinMatrix repetition_code(std::size_t n) {
  std::vector<std::vector<Index>> rows(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    rows[i] = {static_cast<Index>(i), static_cast<Index>(i + 1)};
  }
  return BinMatrix(n - 1, n, std::move(rows));
}

/// n x n circulant whose row i has ones at columns i + e (mod n).
inline BinMatrix circulant(std::size_t n, const std::vector<long>& exponents) {
  return MonomialSum::univariate(n, exponents).matrix();
}

/// Exact distance by enumerating the cosets of ker(h) for both error types.
inline std::size_t min_distance_exhaustive(const CssCode& code, std::size_t max_n = 24) {
  if (max_n > 24) throw Error("min_distance_exhaustive: max_n is capped at 24");
  if (code.n > max_n) {
    throw Error("min_distance_exhaustive: n = " + std::to_string(code.n) +
                " exceeds the enumeration limit; use claimed_distance instead");
  }
  if (code.k == 0) throw Error("min_distance_exhaustive: code encodes no logical qubits");
  auto to_mask = [](const BinVector& v) {
    std::uint32_t m = 0;
    for (Index i : v.support()) m |= std::uint32_t{1} << i;
    return m;
  };
  auto sector = [&](const BinMatrix& checks, const std::vector<BinVector>& opposite) {
    std::vector<std::uint32_t> basis, logicals;
    for (const auto& v : kernel_basis(checks)) basis.push_back(to_mask(v));
    for (const auto& v : opposite) logicals.push_back(to_mask(v));
    std::size_t best = code.n + 1;
    std::uint32_t cur = 0;
    for (std::uint64_t g = 1; g < (std::uint64_t{1} << basis.size()); ++g) {
      cur ^= basis[std::countr_zero(g)];
      const auto w = static_cast<std::size_t>(std::popcount(cur));
      if (w >= best) continue;
      for (std::uint32_t l : logicals) {
        if (std::popcount(cur & l) & 1) {
          best = w;
          break;
        }
      }
    }
    return best;
  };
  // X logicals live in ker(hz) and are detected by Z logicals, and vice versa.
  return std::min(sector(code.hz, code.logical_z), sector(code.hx, code.logical_x));
}

struct WeightRange {
  std::size_t min = 0;
  std::size_t max = 0;
};

inline WeightRange row_weights(const BinMatrix& m) {
  WeightRange w{static_cast<std::size_t>(-1), 0};
  for (std::size_t r = 0; r < m.rows(); ++r) {
    w.min = std::min(w.min, m.row(r).size());
    w.max = std::max(w.max, m.row(r).size());
  }
  if (m.rows() == 0) w.min = 0;
  return w;
}

inline WeightRange col_weights(const BinMatrix& m) { return row_weights(m.transpose()); }

/// True when zs[i] . xs[j] = delta_ij for all i, j.
inline bool pairing_is_identity(const CssCode& c, const std::vector<BinVector>& zs,
                                const std::vector<BinVector>& xs) {
  DenseRows dz(zs.size(), c.n), dx(xs.size(), c.n);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    for (Index q : zs[i].support()) dz.set(i, q);
  }
  for (std::size_t j = 0; j < xs.size(); ++j) {
    for (Index q : xs[j].support()) dx.set(j, q);
  }
  for (std::size_t i = 0; i < zs.size(); ++i) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      unsigned par = 0;
      for (std::size_t w = 0; w < dz.words(); ++w) par += std::popcount(dz.row(i)[w] & dx.row(j)[w]);
      if (((par & 1U) != 0) != (i == j)) return false;
    }
  }
  return true;
}

/// Invariant violations of a code, empty when valid.
inline std::vector<std::string> validate(const CssCode& c) {
  std::vector<std::string> bad;
  if (c.hx.cols() != c.n || c.hz.cols() != c.n) bad.push_back("column count != n");
  if (mul_transpose(c.hz, c.hx).nnz() != 0) bad.push_back("hz hx^T != 0");
  if (c.k != c.n - rank(c.hx) - rank(c.hz)) bad.push_back("k != n - rank(hx) - rank(hz)");
  if (c.logical_x.size() != c.k || c.logical_z.size() != c.k) bad.push_back("logical count != k");
  for (std::size_t i = 0; i < c.logical_x.size(); ++i) {
    if (!matvec(c.hz, c.logical_x[i]).is_zero()) bad.push_back("logical_x not in ker(hz)");
    if (!matvec(c.hx, c.logical_z[i]).is_zero()) bad.push_back("logical_z not in ker(hx)");
  }
  if (c.logical_x.size() == c.logical_z.size() && !pairing_is_identity(c, c.logical_z, c.logical_x)) {
    bad.push_back("logical pairing is not the identity");
  }
  if (c.family == CodeFamily::bb) {
    for (const BinMatrix* h : {&c.hx, &c.hz}) {
      const auto rw = row_weights(*h), cw = col_weights(*h);
      if (rw.min != 6 || rw.max != 6) bad.push_back("BB check weight != 6");
      if (cw.min != 3 || cw.max != 3) bad.push_back("BB qubit degree != 3");
    }
  }
  return bad;
}

}  // namespace symbreak
