#pragma once

// Ordered statistics post-processing. Columns are ordered by ascending
// reliability |L(q)| so the least reliable qubits become pivots (the revised
// set); every non-pivot qubit keeps its BP hard decision.

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "symbreak/gf2.hpp"

namespace symbreak {

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

enum class OsdMode { osd0, osd_cs };

struct OsdConfig {
  OsdMode mode = OsdMode::osd0;
  std::size_t sweep_depth = 60;

  void validate() const {
    if (mode == OsdMode::osd_cs && sweep_depth < 1) throw Error("OsdConfig: sweep_depth must be >= 1");
  }
};

/// Sum of L(q) over the support: lower means more likely under the LLRs.
inline double soft_weight(std::span<const std::uint8_t> e, std::span<const double> llrs) {
  double w = 0;
  for (std::size_t q = 0; q < e.size(); ++q) {
    if (e[q]) w += llrs[q];
  }
  return w;
}

/// Column order used by OSD: ascending |L|, ties by ascending index.
inline std::vector<Index> reliability_order(std::span<const double> llrs) {
  std::vector<Index> order(llrs.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(llrs[a]) < std::abs(llrs[b]); });
  return order;
}

inline BinVector osd_postprocess(const BinMatrix& h, const BinVector& syndrome,
                                 std::span<const double> llrs, const OsdConfig& cfg) {
  cfg.validate();
  if (h.cols() != llrs.size()) throw DimensionError("osd: llr count != columns");
  if (h.rows() != syndrome.size()) throw DimensionError("osd: syndrome length != rows");
  const std::size_t n = h.cols();

  const auto order = reliability_order(llrs);
  const Echelon ech(h, order, &syndrome);
  if (!ech.consistent()) throw InfeasibleError("osd: syndrome is outside the column space");
  const DenseRows& red = ech.reduced();
  const auto& pivots = ech.pivot_columns();
  const std::size_t rank = pivots.size();
  const auto is_pivot = ech.pivot_mask();

  // Non-pivot part fixed to hard decisions; solve pivots.
  std::vector<std::uint8_t> x(n, 0);
  std::vector<std::uint64_t> fixed(red.words(), 0);
  for (std::size_t q = 0; q < n; ++q) {
    if (!is_pivot[q] && llrs[q] < 0.0) {
      x[q] = 1;
      fixed[q / 64] |= std::uint64_t{1} << (q % 64);
    }
  }
  for (std::size_t r = 0; r < rank; ++r) {
    unsigned par = ech.rhs(r);
    const std::uint64_t* row = red.row(r);
    for (std::size_t w = 0; w < fixed.size(); ++w) par += std::popcount(row[w] & fixed[w]);
    x[pivots[r]] = par & 1U;
  }

  if (cfg.mode == OsdMode::osd_cs) {
    std::vector<Index> sweep;
    for (Index q : order) {
      if (sweep.size() == cfg.sweep_depth) break;
      if (!is_pivot[q]) sweep.push_back(q);
    }
    // Flipping non-pivot j toggles pivot r iff red[r][j] = 1.
    const std::size_t rw = (rank + 63) / 64;
    std::vector<std::uint64_t> toggles(sweep.size() * rw, 0);
    for (std::size_t s = 0; s < sweep.size(); ++s) {
      for (std::size_t r = 0; r < rank; ++r) {
        if (red.get(r, sweep[s])) toggles[s * rw + r / 64] |= std::uint64_t{1} << (r % 64);
      }
    }
    // Cost change when a position flips, given the current base solution.
    auto flip_gain = [&](Index q) { return x[q] ? -llrs[q] : llrs[q]; };
    std::vector<double> pivot_gain(rank);
    for (std::size_t r = 0; r < rank; ++r) pivot_gain[r] = flip_gain(pivots[r]);

    double best_delta = 0.0;
    std::size_t best_a = sweep.size(), best_b = sweep.size();
    std::vector<std::uint64_t> acc(rw);
    auto evaluate = [&](std::size_t a, std::size_t b) {
      double delta = flip_gain(sweep[a]);
      const std::uint64_t* ta = &toggles[a * rw];
      if (b < sweep.size()) {
        delta += flip_gain(sweep[b]);
        const std::uint64_t* tb = &toggles[b * rw];
        for (std::size_t w = 0; w < rw; ++w) acc[w] = ta[w] ^ tb[w];
      } else {
        std::copy(ta, ta + rw, acc.begin());
      }
      for (std::size_t w = 0; w < rw; ++w) {
        for (std::uint64_t bits = acc[w]; bits; bits &= bits - 1) {
          delta += pivot_gain[w * 64 + std::countr_zero(bits)];
        }
      }
      if (delta < best_delta) {
        best_delta = delta;
        best_a = a;
        best_b = b;
      }
    };
    for (std::size_t a = 0; a < sweep.size(); ++a) evaluate(a, sweep.size());
    for (std::size_t a = 0; a < sweep.size(); ++a) {
      for (std::size_t b = a + 1; b < sweep.size(); ++b) evaluate(a, b);
    }
    if (best_a < sweep.size()) {
      for (std::size_t s : {best_a, best_b}) {
        if (s >= sweep.size()) continue;
        x[sweep[s]] ^= 1U;
        for (std::size_t r = 0; r < rank; ++r) {
          if ((toggles[s * rw + r / 64] >> (r % 64)) & 1U) x[pivots[r]] ^= 1U;
        }
      }
    }
  }
  return BinVector::from_dense(x);
}

}  // namespace symbreak
