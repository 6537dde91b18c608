#pragma once

// Mutable Tanner graph supporting the syndrome split: a check is replaced by
// two children that partition its qubits and whose syndromes XOR to the
// parent's. Edge ids are stable across splits, so per-edge message arrays
// stay valid after the graph changes.

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "symbreak/gf2.hpp"

namespace symbreak {

using CheckId = Index;
using EdgeId = Index;

/// Read-only view of a live check. Spans are invalidated by split_check.
struct CheckNode {
  CheckId id = 0;
  std::span<const Index> vars;    // sorted
  std::span<const EdgeId> edges;  // parallel to vars
  std::uint8_t syndrome = 0;
  bool split_child = false;
  Index origin = 0;  // row of the parity matrix this check descends from
};

struct Edge {
  CheckId check = 0;
  Index var = 0;
};

struct Residual {
  std::size_t mismatch_count = 0;
  std::vector<std::uint8_t> bits;
};

class TannerGraph {
 public:
  TannerGraph() = default;

  static TannerGraph from_parity(const BinMatrix& h, const BinVector& syndrome) {
    if (h.rows() != syndrome.size()) {
      throw DimensionError("from_parity: " + std::to_string(h.rows()) + " checks but syndrome of length " +
                           std::to_string(syndrome.size()));
    }
    TannerGraph g;
    const std::size_t nnz = h.nnz();
    g.n_vars_ = h.cols();
    g.original_checks_ = h.rows();
    g.slots_.reserve(2 * h.rows());
    g.slot_vars_.reserve(2 * nnz);
    g.slot_edges_.reserve(2 * nnz);
    g.edges_.reserve(nnz);
    for (std::size_t r = 0; r < h.rows(); ++r) {
      const auto& row = h.row(r);
      g.slots_.push_back({static_cast<Index>(g.slot_vars_.size()), static_cast<Index>(row.size()), 0, false,
                          static_cast<Index>(r)});
      for (Index v : row) {
        const auto e = static_cast<EdgeId>(g.edges_.size());
        g.edges_.push_back({static_cast<CheckId>(r), v});
        g.slot_vars_.push_back(v);
        g.slot_edges_.push_back(e);
      }
    }
    for (Index s : syndrome.support()) g.slots_[s].syndrome = 1;
    // Variable-to-edge adjacency in CSR form; edge ids never change.
    g.var_offsets_.assign(h.cols() + 1, 0);
    for (const auto& e : g.edges_) ++g.var_offsets_[e.var + 1];
    for (std::size_t v = 0; v < h.cols(); ++v) g.var_offsets_[v + 1] += g.var_offsets_[v];
    g.var_edge_list_.resize(nnz);
    std::vector<Index> fill(g.var_offsets_.begin(), g.var_offsets_.end() - 1);
    for (std::size_t e = 0; e < nnz; ++e) g.var_edge_list_[fill[g.edges_[e].var]++] = static_cast<EdgeId>(e);
    return g;
  }

  std::size_t n_vars() const { return n_vars_; }
  std::size_t n_checks() const { return slots_.size(); }
  std::size_t n_edges() const { return edges_.size(); }
  std::size_t original_check_count() const { return original_checks_; }

  CheckNode check(CheckId c) const {
    if (c >= slots_.size()) throw Error("no such check: " + std::to_string(c));
    const Slot& s = slots_[c];
    return {c,
            std::span<const Index>(slot_vars_.data() + s.begin, s.size),
            std::span<const EdgeId>(slot_edges_.data() + s.begin, s.size),
            s.syndrome,
            s.split_child,
            s.origin};
  }
  const Edge& edge(EdgeId e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const EdgeId> var_edges(Index v) const {
    return {var_edge_list_.data() + var_offsets_[v], var_offsets_[v + 1] - var_offsets_[v]};
  }

  /// Replaces `check` by c1 (qubits `part1`, syndrome s1, keeps the id) and a
  /// new check c2 (remaining qubits, syndrome original ^ s1). Returns (c1, c2).
  std::pair<CheckId, CheckId> split_check(CheckId check, std::span<const Index> part1, bool s1) {
    if (check >= slots_.size()) throw Error("split_check: no such check");
    if (slots_[check].split_child) throw Error("split_check: check is already a split child");
    std::vector<Index> p1(part1.begin(), part1.end());
    std::sort(p1.begin(), p1.end());
    if (std::adjacent_find(p1.begin(), p1.end()) != p1.end()) {
      throw Error("split_check: duplicate qubit in part1");
    }
    const Slot parent = slots_[check];
    if (p1.empty() || p1.size() >= parent.size) {
      throw Error("split_check: part1 must be a proper nonempty subset");
    }
    std::vector<Index> v1, v2;
    std::vector<EdgeId> e1, e2;
    for (std::size_t i = parent.begin; i < parent.begin + parent.size; ++i) {
      const bool first = std::binary_search(p1.begin(), p1.end(), slot_vars_[i]);
      (first ? v1 : v2).push_back(slot_vars_[i]);
      (first ? e1 : e2).push_back(slot_edges_[i]);
    }
    if (v1.size() != p1.size()) throw Error("split_check: part1 is not a subset of the check");
    // c1 reuses the front of the parent's range; c2 gets a fresh range.
    std::copy(v1.begin(), v1.end(), slot_vars_.begin() + parent.begin);
    std::copy(e1.begin(), e1.end(), slot_edges_.begin() + parent.begin);
    const auto c2 = static_cast<CheckId>(slots_.size());
    Slot& s1_slot = slots_[check];
    s1_slot.size = static_cast<Index>(v1.size());
    s1_slot.syndrome = s1 ? 1 : 0;
    s1_slot.split_child = true;
    slots_.push_back({static_cast<Index>(slot_vars_.size()), static_cast<Index>(v2.size()),
                      static_cast<std::uint8_t>(parent.syndrome ^ (s1 ? 1 : 0)), true, parent.origin});
    slot_vars_.insert(slot_vars_.end(), v2.begin(), v2.end());
    slot_edges_.insert(slot_edges_.end(), e2.begin(), e2.end());
    for (EdgeId e : e2) edges_[e].check = c2;
    return {check, c2};
  }

  /// Odd overlap between the check and an opposite-type check support (sorted).
  bool anticommutes(CheckId check, std::span<const Index> x_support) const {
    return (overlap(check, x_support) & 1U) != 0;
  }

  std::size_t overlap(CheckId check, std::span<const Index> sorted_support) const {
    const auto a = check_vars(check);
    std::size_t i = 0, j = 0, n = 0;
    while (i < a.size() && j < sorted_support.size()) {
      if (a[i] < sorted_support[j]) {
        ++i;
      } else if (sorted_support[j] < a[i]) {
        ++j;
      } else {
        ++n, ++i, ++j;
      }
    }
    return n;
  }

  /// Per live check: parity of the estimate over its qubits XOR its syndrome.
  Residual effective_syndrome_residual(std::span<const std::uint8_t> estimate) const {
    if (estimate.size() != n_vars_) throw DimensionError("residual: estimate length mismatch");
    Residual r;
    r.bits.resize(slots_.size());
    for (std::size_t c = 0; c < slots_.size(); ++c) {
      std::uint8_t par = slots_[c].syndrome;
      for (Index v : check_vars(static_cast<CheckId>(c))) par ^= estimate[v];
      r.bits[c] = par & 1U;
      r.mismatch_count += r.bits[c];
    }
    return r;
  }

  /// True when the estimate satisfies every live check.
  bool satisfied_by(std::span<const std::uint8_t> estimate) const {
    for (std::size_t c = 0; c < slots_.size(); ++c) {
      std::uint8_t par = slots_[c].syndrome;
      for (Index v : check_vars(static_cast<CheckId>(c))) par ^= estimate[v];
      if (par & 1U) return false;
    }
    return true;
  }

  Residual effective_syndrome_residual(const BinVector& estimate) const {
    const auto d = estimate.dense();
    if (estimate.size() != n_vars_) throw DimensionError("residual: estimate length mismatch");
    return effective_syndrome_residual(std::span<const std::uint8_t>(d));
  }

  /// Graphviz text for inspection; checks are boxes, qubits circles.
  void write_dot(std::ostream& os) const {
    os << "graph tanner {\n";
    for (std::size_t v = 0; v < n_vars_; ++v) os << "  q" << v << " [shape=circle];\n";
    for (CheckId id = 0; id < slots_.size(); ++id) {
      const CheckNode c = check(id);
      os << "  c" << c.id << " [shape=box,label=\"c" << c.id << " s=" << int(c.syndrome)
         << (c.split_child ? " split" : "") << "\"];\n";
    }
    for (const auto& e : edges_) os << "  c" << e.check << " -- q" << e.var << ";\n";
    os << "}\n";
  }

 private:
  struct Slot {
    Index begin = 0;
    Index size = 0;
    std::uint8_t syndrome = 0;
    bool split_child = false;
    Index origin = 0;
  };

  std::span<const Index> check_vars(CheckId c) const {
    return {slot_vars_.data() + slots_[c].begin, slots_[c].size};
  }

  std::size_t n_vars_ = 0;
  std::size_t original_checks_ = 0;
  std::vector<Slot> slots_;
  std::vector<Index> slot_vars_;
  std::vector<EdgeId> slot_edges_;
  std::vector<Edge> edges_;
  std::vector<Index> var_offsets_;
  std::vector<EdgeId> var_edge_list_;
};

}  // namespace symbreak
