#pragma once

// SymBreak: rounds of BP interleaved with degeneracy-breaking syndrome
// splits, stopped by a stagnation counter over the mismatch count
// d = |s - s_hat| measured on the live (split) graph.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "symbreak/bp.hpp"
#include "symbreak/codes.hpp"
#include "symbreak/gf2.hpp"
#include "symbreak/osd.hpp"
#include "symbreak/tanner.hpp"

namespace symbreak {

enum class SplitStrategy { bp_guided, syndrome_guided, bb_layered };
enum class StopReason { syndrome_matched, k_threshold, split_budget, no_split_candidate };

inline std::string to_string(SplitStrategy s) {
  switch (s) {
    case SplitStrategy::bp_guided: return "bp_guided";
    case SplitStrategy::syndrome_guided: return "syndrome_guided";
    case SplitStrategy::bb_layered: return "bb_layered";
  }
  return "?";
}

inline std::string_view stop_name(StopReason r) {
  switch (r) {
    case StopReason::syndrome_matched: return "syndrome_matched";
    case StopReason::k_threshold: return "k_threshold";
    case StopReason::split_budget: return "split_budget";
    case StopReason::no_split_candidate: return "no_split_candidate";
  }
  return "?";
}

inline std::string to_string(StopReason r) { return std::string(stop_name(r)); }

inline SplitStrategy parse_split_strategy(const std::string& s) {
  if (s == "bp_guided") return SplitStrategy::bp_guided;
  if (s == "syndrome_guided") return SplitStrategy::syndrome_guided;
  if (s == "bb_layered") return SplitStrategy::bb_layered;
  throw Error("unknown split strategy: " + s);
}

struct SymBreakConfig {
  std::size_t m = 10;  // BP iterations per round
  std::size_t k_max = 3;
  std::size_t max_splits = 50;
  // Unset: bb_layered for BB codes, syndrome_guided otherwise.
  std::optional<SplitStrategy> strategy;
  BpConfig bp;
  bool reset_messages_on_split = true;
  // Ablation only: run OSD on the final LLRs when the loop stops unconverged.
  std::optional<OsdConfig> osd_rescue;

  void validate() const {
    if (m < 1) throw Error("SymBreakConfig: m must be >= 1");
    if (k_max < 1) throw Error("SymBreakConfig: k_max must be >= 1");
    if (osd_rescue) osd_rescue->validate();
  }
};

/// The K counter: +1 when d stays equal or grows, -1 (floored at 0) when it
/// shrinks; stop once K reaches k_max.
class StagnationMonitor {
 public:
  enum class Verdict { matched, proceed, stop };

  explicit StagnationMonitor(std::size_t k_max) : k_max_(k_max) {}

  Verdict update(std::size_t d) {
    if (d == 0) return Verdict::matched;
    if (has_prev_) {
      if (d >= prev_) {
        ++k_;
      } else if (k_ > 0) {
        --k_;
      }
    }
    prev_ = d;
    has_prev_ = true;
    return k_ >= k_max_ ? Verdict::stop : Verdict::proceed;
  }

  std::size_t k() const { return k_; }

 private:
  std::size_t k_max_;
  std::size_t k_ = 0;
  std::size_t prev_ = 0;
  bool has_prev_ = false;
};

struct SplitRecord {
  std::size_t round = 0;
  Index gx_row = 0;
  CheckId z_check = 0;
  CheckId new_check = 0;
  std::vector<Index> part1;
  bool s1 = false;
  SplitStrategy strategy = SplitStrategy::syndrome_guided;
  std::size_t gx_overlap_part1 = 0;
  std::size_t d_before = 0;
  std::optional<std::size_t> d_after;
};

struct DecodeOutcome {
  BinVector estimate;
  bool converged = false;
  bool osd_rescued = false;
  std::size_t bp_iterations_total = 0;
  std::vector<SplitRecord> splits;
  std::vector<std::size_t> d_trajectory;
  std::chrono::nanoseconds wall_time{0};
  StopReason stop_reason = StopReason::syndrome_matched;
};

struct SplitTarget {
  Index gx_row = 0;
  CheckId z_check = 0;
};

struct SplitPlan {
  std::vector<Index> part1;
  bool s1 = false;
};

/// Mean |L(q)| over the support of each row of the opposite-type matrix;
/// empty rows get +infinity so they are never selected.
inline std::vector<double> check_reliability(const BpState& state, const BinMatrix& opposite) {
  if (state.llr.size() != opposite.cols()) throw DimensionError("check_reliability: llr count != columns");
  std::vector<double> out(opposite.rows());
  for (std::size_t r = 0; r < opposite.rows(); ++r) {
    const auto& row = opposite.row(r);
    if (row.empty()) {
      out[r] = std::numeric_limits<double>::infinity();
      continue;
    }
    double s = 0;
    for (Index q : row) s += std::abs(state.llr[q]);
    out[r] = s / static_cast<double>(row.size());
  }
  return out;
}

/// Mean |L(q)| over the qubits of a live check.
inline double live_check_reliability(const BpState& state, const TannerGraph& g, CheckId c) {
  const auto vars = g.check(c).vars;
  if (vars.empty()) return std::numeric_limits<double>::infinity();
  double s = 0;
  for (Index q : vars) s += std::abs(state.llr[q]);
  return s / static_cast<double>(vars.size());
}

namespace detail {

/// Live checks touching an opposite-type support, with overlap counts.
inline std::vector<std::pair<CheckId, std::size_t>> overlapping_checks(const TannerGraph& g,
                                                                       std::span<const Index> support) {
  std::vector<std::pair<CheckId, std::size_t>> out;
  for (Index v : support) {
    for (EdgeId e : g.var_edges(v)) {
      const CheckId c = g.edge(e).check;
      auto it = std::find_if(out.begin(), out.end(), [c](const auto& p) { return p.first == c; });
      if (it == out.end()) {
        out.emplace_back(c, 1);
      } else {
        ++it->second;
      }
    }
  }
  return out;
}

inline std::optional<CheckId> eligible_check(const TannerGraph& g, const BpState& state,
                                             std::span<const Index> gx_support) {
  std::optional<CheckId> best;
  double best_rel = std::numeric_limits<double>::infinity();
  for (auto [c, count] : overlapping_checks(g, gx_support)) {
    if (count < 2 || (count & 1U) || g.check(c).split_child) continue;
    const double rel = live_check_reliability(state, g, c);
    if (!best || rel < best_rel || (rel == best_rel && c < *best)) {
      best = c;
      best_rel = rel;
    }
  }
  return best;
}

inline void require_even_overlap(std::size_t overlap) {
  if (overlap < 2 || (overlap & 1U)) {
    throw Error("split plan: check must overlap the opposite check in an even number >= 2 of qubits");
  }
}

/// Overlap qubits assigned to part1: k if k is odd, k - 1 otherwise, where
/// the overlap has 2k qubits. Always odd.
inline std::size_t overlap_quota(std::size_t overlap) {
  const std::size_t k = overlap / 2;
  return (k & 1U) ? k : k - 1;
}

/// True when every live check other than `skip` that touches `side` has syndrome 0.
inline bool side_is_quiet(const TannerGraph& g, CheckId skip, std::span<const Index> side) {
  for (Index v : side) {
    for (EdgeId e : g.var_edges(v)) {
      const CheckId c = g.edge(e).check;
      if (c != skip && g.check(c).syndrome) return false;
    }
  }
  return true;
}

inline bool hard_parity(const BpState& state, std::span<const Index> qubits) {
  bool s = false;
  for (Index q : qubits) s ^= state.llr[q] < 0.0;
  return s;
}

inline double mean_reliability(const BpState& state, std::span<const Index> qubits) {
  double s = 0;
  for (Index q : qubits) s += std::abs(state.llr[q]);
  return qubits.empty() ? 0.0 : s / static_cast<double>(qubits.size());
}

inline std::vector<Index> complement(std::span<const Index> all, const std::vector<Index>& part) {
  std::vector<Index> out;
  std::set_difference(all.begin(), all.end(), part.begin(), part.end(), std::back_inserter(out));
  return out;
}

inline std::size_t sorted_overlap(std::span<const Index> a, std::span<const Index> b) {
  std::size_t i = 0, j = 0, n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++n, ++i, ++j;
    }
  }
  return n;
}

/// Shortest cycle length in the bipartite graph of `h` restricted to the
/// columns in [col_begin, col_end); 0 if acyclic.
inline std::size_t layer_girth(const BinMatrix& h, std::size_t col_begin, std::size_t col_end) {
  const std::size_t nc = h.rows();
  const std::size_t nv = col_end - col_begin;
  const std::size_t total = nc + nv;
  std::vector<std::vector<std::size_t>> adj(total);
  for (std::size_t r = 0; r < nc; ++r) {
    for (Index c : h.row(r)) {
      if (c < col_begin || c >= col_end) continue;
      adj[r].push_back(nc + (c - col_begin));
      adj[nc + (c - col_begin)].push_back(r);
    }
  }
  std::size_t girth = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(total), parent(total);
  constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();
  for (std::size_t s = 0; s < total; ++s) {
    std::fill(dist.begin(), dist.end(), kUnseen);
    dist[s] = 0;
    parent[s] = kUnseen;
    std::queue<std::size_t> q;
    q.push(s);
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      if (2 * dist[u] + 1 >= girth) break;
      for (std::size_t w : adj[u]) {
        if (dist[w] == kUnseen) {
          dist[w] = dist[u] + 1;
          parent[w] = u;
          q.push(w);
        } else if (w != parent[u]) {
          girth = std::min(girth, dist[u] + dist[w] + 1);
        }
      }
    }
  }
  return girth == std::numeric_limits<std::size_t>::max() ? 0 : girth;
}

}  // namespace detail

/// Least reliable opposite-type check with an eligible live check (even
/// overlap >= 2, not a split child); among eligible checks the least reliable
/// one wins. Ties break toward lower indices. nullopt if no split is possible.
inline std::optional<SplitTarget> select_split_target(std::span<const double> reliabilities,
                                                      const TannerGraph& g, const BinMatrix& opposite,
                                                      const BpState& state) {
  if (reliabilities.size() != opposite.rows()) throw DimensionError("select_split_target: size mismatch");
  if (reliabilities.empty()) return std::nullopt;
  auto try_row = [&](Index row) -> std::optional<SplitTarget> {
    if (auto c = detail::eligible_check(g, state, opposite.row(row))) return SplitTarget{row, *c};
    return std::nullopt;
  };
  Index best = 0;
  for (Index r = 1; r < reliabilities.size(); ++r) {
    if (reliabilities[r] < reliabilities[best]) best = r;
  }
  if (auto t = try_row(best)) return t;
  std::vector<Index> order(reliabilities.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return reliabilities[a] < reliabilities[b]; });
  for (Index r : order) {
    if (r == best) continue;
    if (auto t = try_row(r)) return t;
  }
  return std::nullopt;
}

/// Most reliable overlap qubits (odd quota) plus the most reliable other
/// qubits fill part1 up to half the check; s1 is the parity of their hard
/// decisions.
inline SplitPlan plan_split_bp_guided(const TannerGraph& g, CheckId z_check,
                                      std::span<const Index> gx_support, const BpState& state) {
  const auto nbrs = g.check(z_check).vars;
  std::vector<Index> overlap, rest;
  for (Index v : nbrs) {
    (std::binary_search(gx_support.begin(), gx_support.end(), v) ? overlap : rest).push_back(v);
  }
  detail::require_even_overlap(overlap.size());
  auto by_reliability = [&](Index a, Index b) {
    const double ra = std::abs(state.llr[a]), rb = std::abs(state.llr[b]);
    return ra != rb ? ra > rb : a < b;
  };
  std::sort(overlap.begin(), overlap.end(), by_reliability);
  std::sort(rest.begin(), rest.end(), by_reliability);
  SplitPlan plan;
  const std::size_t quota = detail::overlap_quota(overlap.size());
  plan.part1.assign(overlap.begin(), overlap.begin() + static_cast<std::ptrdiff_t>(quota));
  const std::size_t target = nbrs.size() / 2;
  for (std::size_t i = 0; i < rest.size() && plan.part1.size() < target; ++i) plan.part1.push_back(rest[i]);
  std::sort(plan.part1.begin(), plan.part1.end());
  plan.s1 = detail::hard_parity(state, plan.part1);
  return plan;
}

/// Balanced partition with odd overlap (lowest indices first). The side
/// whose neighbouring checks are all quiet gets syndrome 0; if neither side
/// is quiet the BP-guided plan is used instead.
inline SplitPlan plan_split_syndrome_guided(const TannerGraph& g, CheckId z_check,
                                            std::span<const Index> gx_support, const BpState& state) {
  const CheckNode node = g.check(z_check);
  std::vector<Index> overlap, rest;
  for (Index v : node.vars) {
    (std::binary_search(gx_support.begin(), gx_support.end(), v) ? overlap : rest).push_back(v);
  }
  detail::require_even_overlap(overlap.size());
  SplitPlan plan;
  const std::size_t quota = detail::overlap_quota(overlap.size());
  plan.part1.assign(overlap.begin(), overlap.begin() + static_cast<std::ptrdiff_t>(quota));
  const std::size_t target = node.vars.size() / 2;
  for (std::size_t i = 0; i < rest.size() && plan.part1.size() < target; ++i) plan.part1.push_back(rest[i]);
  std::sort(plan.part1.begin(), plan.part1.end());
  const auto part2 = detail::complement(node.vars, plan.part1);
  if (detail::side_is_quiet(g, z_check, plan.part1)) {
    plan.s1 = false;
  } else if (detail::side_is_quiet(g, z_check, part2)) {
    plan.s1 = node.syndrome != 0;
  } else {
    return plan_split_bp_guided(g, z_check, gx_support, state);
  }
  return plan;
}

/// BB layered split: left-block qubits form part1. The syndrome follows the
/// quiet-side rule; otherwise the more reliable side's hard decisions fix it.
inline SplitPlan plan_split_bb_layered(const TannerGraph& g, CheckId z_check, std::size_t left_block,
                                       const BpState& state) {
  if (left_block == 0) throw Error("bb_layered split requires a two-block BB code");
  const CheckNode node = g.check(z_check);
  SplitPlan plan;
  std::vector<Index> right;
  for (Index v : node.vars) (v < left_block ? plan.part1 : right).push_back(v);
  if (node.vars.size() != 6 || plan.part1.size() != 3) {
    throw Error("bb_layered split: check must have 3 left-block and 3 right-block qubits");
  }
  if (detail::side_is_quiet(g, z_check, plan.part1)) {
    plan.s1 = false;
  } else if (detail::side_is_quiet(g, z_check, right)) {
    plan.s1 = node.syndrome != 0;
  } else if (detail::mean_reliability(state, plan.part1) >= detail::mean_reliability(state, right)) {
    plan.s1 = detail::hard_parity(state, plan.part1);
  } else {
    plan.s1 = (node.syndrome != 0) != detail::hard_parity(state, right);
  }
  return plan;
}

/// True when both column blocks of a two-block check matrix induce
/// intra-layer Tanner graphs of girth exactly 6.
inline bool bb_layering_valid(const BinMatrix& checks, std::size_t left_block) {
  if (left_block == 0 || left_block >= checks.cols()) return false;
  return detail::layer_girth(checks, 0, left_block) == 6 &&
         detail::layer_girth(checks, left_block, checks.cols()) == 6;
}

class SymBreakDecoder {
 public:
  /// Decoder for one error type of a CSS code.
  SymBreakDecoder(const CssCode& code, ErrorType type, SymBreakConfig cfg)
      : SymBreakDecoder(checks_for(code, type), opposite_for(code, type), std::move(cfg),
                        code.family == CodeFamily::bb ? code.left_block : 0) {}

  /// `left_block` > 0 marks a BB-style two-block layout eligible for the
  /// layered split.
  SymBreakDecoder(BinMatrix checks, BinMatrix opposite, SymBreakConfig cfg, std::size_t left_block = 0)
      : checks_(std::move(checks)), opposite_(std::move(opposite)), cfg_(std::move(cfg)), left_block_(left_block) {
    cfg_.validate();
    if (checks_.cols() != opposite_.cols()) throw DimensionError("SymBreakDecoder: column mismatch");
    if (cfg_.bp.prior_llr.size() != checks_.cols()) {
      throw DimensionError("SymBreakDecoder: prior_llr length != qubit count");
    }
    strategy_ = cfg_.strategy.value_or(left_block_ ? SplitStrategy::bb_layered : SplitStrategy::syndrome_guided);
    if (strategy_ == SplitStrategy::bb_layered) {
      if (left_block_ == 0) throw Error("bb_layered strategy requires a BB code");
      if (!bb_layering_valid(checks_, left_block_)) {
        warning_ = "BB layering failed the girth-6 check; using syndrome_guided splits";
        std::clog << "symbreak: warning: " << warning_ << '\n';
        strategy_ = SplitStrategy::syndrome_guided;
      }
    }
    bp_ = cfg_.bp;
    bp_.max_iters = cfg_.m;
  }

  SplitStrategy strategy() const { return strategy_; }
  const std::string& warning() const { return warning_; }
  const SymBreakConfig& config() const { return cfg_; }
  const BinMatrix& checks() const { return checks_; }

  DecodeOutcome decode(const BinVector& syndrome) const {
    const auto start = std::chrono::steady_clock::now();
    if (syndrome.size() != checks_.rows()) throw DimensionError("decode: syndrome length != check count");
    TannerGraph g = TannerGraph::from_parity(checks_, syndrome);
    StagnationMonitor monitor(cfg_.k_max);
    DecodeOutcome out;
    std::vector<std::uint8_t> best;
    std::size_t best_d = std::numeric_limits<std::size_t>::max();
    std::optional<BpState> carried;
    BpResult res;

    for (std::size_t round = 0;; ++round) {
      const BpState* warm = (cfg_.reset_messages_on_split || !carried) ? nullptr : &*carried;
      res = run_bp(g, bp_, warm);
      out.bp_iterations_total += res.iterations;
      const std::size_t d = res.converged ? 0 : g.effective_syndrome_residual(res.hard).mismatch_count;
      out.d_trajectory.push_back(d);
      if (!out.splits.empty()) out.splits.back().d_after = d;
      if (d > 0 && d < best_d) {
        best_d = d;
        best = res.hard;
      }

      const auto verdict = monitor.update(d);
      if (verdict == StagnationMonitor::Verdict::matched) {
        out.converged = true;
        out.stop_reason = StopReason::syndrome_matched;
        break;
      }
      if (verdict == StagnationMonitor::Verdict::stop) {
        out.stop_reason = StopReason::k_threshold;
        break;
      }
      if (out.splits.size() >= cfg_.max_splits) {
        out.stop_reason = StopReason::split_budget;
        break;
      }

      const auto rel = check_reliability(res.state, opposite_);
      const auto target = select_split_target(rel, g, opposite_, res.state);
      if (!target) {
        out.stop_reason = StopReason::no_split_candidate;
        break;
      }
      const auto& gx = opposite_.row(target->gx_row);
      SplitRecord rec;
      rec.round = round;
      rec.gx_row = target->gx_row;
      rec.z_check = target->z_check;
      rec.d_before = d;
      SplitPlan plan;
      rec.strategy = strategy_;
      switch (strategy_) {
        case SplitStrategy::bp_guided:
          plan = plan_split_bp_guided(g, target->z_check, gx, res.state);
          break;
        case SplitStrategy::syndrome_guided:
          plan = plan_split_syndrome_guided(g, target->z_check, gx, res.state);
          break;
        case SplitStrategy::bb_layered:
          plan = plan_split_bb_layered(g, target->z_check, left_block_, res.state);
          // The layer cut must anti-commute with this opposite check.
          if ((detail::sorted_overlap(plan.part1, gx) & 1U) == 0) {
            plan = plan_split_syndrome_guided(g, target->z_check, gx, res.state);
            rec.strategy = SplitStrategy::syndrome_guided;
          }
          break;
      }
      rec.gx_overlap_part1 = detail::sorted_overlap(plan.part1, gx);
      rec.new_check = g.split_check(target->z_check, plan.part1, plan.s1).second;
      rec.part1 = std::move(plan.part1);
      rec.s1 = plan.s1;
      out.splits.push_back(std::move(rec));
      carried = std::move(res.state);
    }

    if (out.converged) {
      out.estimate = BinVector::from_dense(res.hard);
      // Without splits the live graph is the original system, so BP's own
      // stopping test already certified the estimate.
      if (!out.splits.empty() && !(matvec(checks_, out.estimate) == syndrome)) {
        throw std::logic_error("symbreak: converged estimate violates the original syndrome");
      }
    } else if (cfg_.osd_rescue) {
      out.estimate = osd_postprocess(checks_, syndrome, res.state.llr, *cfg_.osd_rescue);
      out.converged = true;
      out.osd_rescued = true;
    } else {
      out.estimate = BinVector::from_dense(best);
    }
    out.wall_time = std::chrono::steady_clock::now() - start;
    return out;
  }

 private:
  BinMatrix checks_;
  BinMatrix opposite_;
  SymBreakConfig cfg_;
  std::size_t left_block_ = 0;
  SplitStrategy strategy_ = SplitStrategy::syndrome_guided;
  BpConfig bp_;
  std::string warning_;
};

inline DecodeOutcome decode(const CssCode& code, const BinVector& syndrome, const SymBreakConfig& cfg,
                            ErrorType type) {
  return SymBreakDecoder(code, type, cfg).decode(syndrome);
}

}  // namespace symbreak
