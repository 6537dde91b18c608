#pragma once

// Reference implementations used only by tests. Everything here is dense and
// exhaustive on purpose: it shares no code with the library beyond the
// BinMatrix/BinVector containers.

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "symbreak/codes.hpp"
#include "symbreak/gf2.hpp"

namespace oracle {

using Dense = std::vector<std::vector<int>>;

inline symbreak::BinMatrix random_matrix(std::size_t rows, std::size_t cols, double density,
                                        std::mt19937_64& rng) {
  std::bernoulli_distribution bit(density);
  std::vector<std::vector<symbreak::Index>> r(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (bit(rng)) r[i].push_back(static_cast<symbreak::Index>(j));
    }
  }
  return symbreak::BinMatrix(rows, cols, std::move(r));
}

inline symbreak::BinVector random_vector(std::size_t len, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution bit(density);
  std::vector<symbreak::Index> s;
  for (std::size_t j = 0; j < len; ++j) {
    if (bit(rng)) s.push_back(static_cast<symbreak::Index>(j));
  }
  return symbreak::BinVector(len, std::move(s));
}

inline Dense to_dense(const symbreak::BinMatrix& m) {
  Dense d(m.rows(), std::vector<int>(m.cols(), 0));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (auto c : m.row(r)) d[r][c] = 1;
  }
  return d;
}

inline std::vector<int> to_dense(const symbreak::BinVector& v) {
  std::vector<int> d(v.size(), 0);
  for (auto i : v.support()) d[i] = 1;
  return d;
}

inline Dense multiply(const Dense& a, const Dense& b) {
  const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  Dense c(n, std::vector<int>(m, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      int s = 0;
      for (std::size_t t = 0; t < k; ++t) s += a[i][t] * b[t][j];
      c[i][j] = s % 2;
    }
  }
  return c;
}

inline Dense transpose(const Dense& a) {
  if (a.empty()) return {};
  Dense t(a[0].size(), std::vector<int>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  }
  return t;
}

inline std::vector<int> apply(const Dense& a, const std::vector<int>& x) {
  std::vector<int> y(a.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    int s = 0;
    for (std::size_t j = 0; j < x.size(); ++j) s += a[i][j] * x[j];
    y[i] = s % 2;
  }
  return y;
}

/// Plain row reduction over GF(2), column by column.
inline std::size_t rank(Dense a) {
  std::size_t r = 0;
  const std::size_t rows = a.size(), cols = rows ? a[0].size() : 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && !a[p][c]) ++p;
    if (p == rows) continue;
    std::swap(a[p], a[r]);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i != r && a[i][c]) {
        for (std::size_t j = 0; j < cols; ++j) a[i][j] ^= a[r][j];
      }
    }
    ++r;
  }
  return r;
}

/// Pivot columns found by greedy elimination in the given column order.
inline std::vector<std::size_t> pivots_in_order(Dense a, const std::vector<std::uint32_t>& order) {
  std::vector<std::size_t> piv;
  std::size_t r = 0;
  const std::size_t rows = a.size();
  for (auto c : order) {
    if (r == rows) break;
    std::size_t p = r;
    while (p < rows && !a[p][c]) ++p;
    if (p == rows) continue;
    std::swap(a[p], a[r]);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i != r && a[i][c]) {
        for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] ^= a[r][j];
      }
    }
    piv.push_back(c);
    ++r;
  }
  return piv;
}

/// Exact posterior P(e_q = 1 | H e = s) by enumerating all 2^n errors.
inline std::vector<double> brute_force_posterior(const Dense& h, const std::vector<int>& s,
                                                 const std::vector<double>& p) {
  const std::size_t n = p.size();
  std::vector<double> num(n, 0.0);
  double z = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<int> e(n);
    double w = 1;
    for (std::size_t q = 0; q < n; ++q) {
      e[q] = (mask >> q) & 1U;
      w *= e[q] ? p[q] : 1 - p[q];
    }
    if (oracle::apply(h, e) != s) continue;
    z += w;
    for (std::size_t q = 0; q < n; ++q) {
      if (e[q]) num[q] += w;
    }
  }
  for (auto& x : num) x /= z;
  return num;
}

/// Degenerate maximum-likelihood decoder for one sector of a small CSS code.
/// For every syndrome it stores the logical class of highest total
/// probability; errors are iid with rate p.
class MlSectorOracle {
 public:
  MlSectorOracle(const symbreak::BinMatrix& h, const std::vector<symbreak::BinVector>& detecting, double p)
      : n_(h.cols()) {
    if (n_ > 20) throw std::invalid_argument("ML oracle limited to n <= 20");
    std::vector<std::uint32_t> row_masks, logical_masks;
    for (std::size_t r = 0; r < h.rows(); ++r) row_masks.push_back(mask_of(h.row(r)));
    for (const auto& l : detecting) logical_masks.push_back(mask_of(l.support()));
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> mass;
    for (std::uint32_t e = 0; e < (1U << n_); ++e) {
      const auto syn = parities(row_masks, e), cls = parities(logical_masks, e);
      const int w = std::popcount(e);
      mass[{syn, cls}] += std::pow(p, w) * std::pow(1 - p, static_cast<int>(n_) - w);
    }
    for (const auto& [key, prob] : mass) {
      auto it = best_.find(key.first);
      if (it == best_.end() || prob > it->second.second) best_[key.first] = {key.second, prob};
    }
    row_masks_ = std::move(row_masks);
    logical_masks_ = std::move(logical_masks);
  }

  /// True when ML decoding of this error yields a logical error.
  bool fails(const symbreak::BinVector& e) const {
    const auto m = mask_of(e.support());
    return best_.at(parities(row_masks_, m)).first != parities(logical_masks_, m);
  }

  /// Logical class of a residual (bit i: anticommutes with logical i).
  std::uint32_t logical_class(const symbreak::BinVector& r) const {
    return parities(logical_masks_, mask_of(r.support()));
  }

 private:
  template <class Range>
  static std::uint32_t mask_of(const Range& support) {
    std::uint32_t m = 0;
    for (auto i : support) m |= 1U << i;
    return m;
  }

  static std::uint32_t parities(const std::vector<std::uint32_t>& masks, std::uint32_t e) {
    std::uint32_t out = 0;
    for (std::size_t i = 0; i < masks.size(); ++i) out |= static_cast<std::uint32_t>(std::popcount(masks[i] & e) & 1) << i;
    return out;
  }

  std::size_t n_;
  std::vector<std::uint32_t> row_masks_, logical_masks_;
  std::map<std::uint32_t, std::pair<std::uint32_t, double>> best_;
};

}  // namespace oracle
