#pragma once

// Belief propagation over a (possibly split) Tanner graph, in the LLR domain
// L(q) = log((1 - p_q) / p_q). Negative L means "error".

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "symbreak/tanner.hpp"

namespace symbreak {

enum class BpSchedule { flooding, serial };
enum class BpVariant { product_sum, min_sum };

struct BpConfig {
  std::size_t max_iters = 100;
  BpSchedule schedule = BpSchedule::flooding;
  BpVariant variant = BpVariant::product_sum;
  double min_sum_scale = 0.625;
  double llr_clip = 100.0;
  std::vector<double> prior_llr;
  bool record_trace = false;

  void validate() const {
    if (max_iters < 1) throw Error("BpConfig: max_iters must be >= 1");
    if (!(llr_clip > 0)) throw Error("BpConfig: llr_clip must be positive");
    if (!(min_sum_scale > 0 && min_sum_scale <= 1)) throw Error("BpConfig: min-sum scale must be in (0, 1]");
  }
};

struct BpState {
  std::vector<double> check_to_var;  // per edge
  std::vector<double> var_to_check;  // per edge
  std::vector<double> llr;           // per variable
  std::size_t iteration = 0;
};

struct BpResult {
  BpState state;
  std::vector<std::uint8_t> hard;  // dense hard decision
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<std::vector<double>> llr_trace;  // filled when cfg.record_trace

  BinVector estimate() const { return BinVector::from_dense(hard); }
};

inline double prior_from_error_rate(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("prior_from_error_rate: p must lie in (0, 1), got " + std::to_string(p));
  return std::log((1.0 - p) / p);
}

inline std::vector<double> error_probabilities(const BpState& state) {
  std::vector<double> out(state.llr.size());
  for (std::size_t q = 0; q < out.size(); ++q) out[q] = 1.0 / (1.0 + std::exp(state.llr[q]));
  return out;
}

inline double reliability(const BpState& state, Index q) { return std::abs(state.llr.at(q)); }

namespace detail {

inline double clip(double x, double c) { return std::clamp(x, -c, c); }

/// tanh(m / 2) via one exp.
inline double half_tanh(double m) {
  const double e = std::exp(-std::abs(m));
  const double t = (1.0 - e) / (1.0 + e);
  return m < 0 ? -t : t;
}

/// 2 atanh(x) via one log.
inline double twice_atanh(double x) { return std::log((1.0 + x) / (1.0 - x)); }

/// Product-sum check rule for all edges of one check, using prefix/suffix
/// products of tanh(m/2) so no division is needed.
inline void check_update_product_sum(const CheckNode& c, const std::vector<double>& v2c,
                                     std::vector<double>& c2v, double clip_at,
                                     std::vector<double>& scratch) {
  const std::size_t d = c.edges.size();
  scratch.resize(2 * d + 1);
  double* t = scratch.data();           // t[i] = tanh(m_i / 2)
  double* suffix = scratch.data() + d;  // suffix[i] = prod_{j>=i} t[j]
  for (std::size_t i = 0; i < d; ++i) t[i] = half_tanh(v2c[c.edges[i]]);
  suffix[d] = 1.0;
  for (std::size_t i = d; i-- > 0;) suffix[i] = suffix[i + 1] * t[i];
  const double sign = c.syndrome ? -1.0 : 1.0;
  constexpr double kMax = 1.0 - 1e-16;
  double prefix = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double x = std::clamp(prefix * suffix[i + 1], -kMax, kMax);
    c2v[c.edges[i]] = clip(sign * twice_atanh(x), clip_at);
    prefix *= t[i];
  }
}

inline void check_update_min_sum(const CheckNode& c, const std::vector<double>& v2c,
                                 std::vector<double>& c2v, double clip_at, double scale) {
  double min1 = std::numeric_limits<double>::infinity(), min2 = min1;
  std::size_t argmin = 0;
  bool negative = c.syndrome != 0;
  for (std::size_t i = 0; i < c.edges.size(); ++i) {
    const double m = v2c[c.edges[i]];
    if (m < 0) negative = !negative;
    const double a = std::abs(m);
    if (a < min1) {
      min2 = min1;
      min1 = a;
      argmin = i;
    } else if (a < min2) {
      min2 = a;
    }
  }
  for (std::size_t i = 0; i < c.edges.size(); ++i) {
    const double m = v2c[c.edges[i]];
    const bool neg = negative != (m < 0);
    const double mag = std::min(scale * (i == argmin ? min2 : min1), clip_at);
    c2v[c.edges[i]] = neg ? -mag : mag;
  }
}

/// Single-edge check rule, used by the serial schedule.
inline double check_message(const CheckNode& c, EdgeId target, const std::vector<double>& v2c,
                            const BpConfig& cfg) {
  if (cfg.variant == BpVariant::product_sum) {
    double prod = c.syndrome ? -1.0 : 1.0;
    for (EdgeId e : c.edges) {
      if (e != target) prod *= half_tanh(v2c[e]);
    }
    constexpr double kMax = 1.0 - 1e-16;
    return clip(twice_atanh(std::clamp(prod, -kMax, kMax)), cfg.llr_clip);
  }
  bool negative = c.syndrome != 0;
  double mn = std::numeric_limits<double>::infinity();
  for (EdgeId e : c.edges) {
    if (e == target) continue;
    if (v2c[e] < 0) negative = !negative;
    mn = std::min(mn, std::abs(v2c[e]));
  }
  const double mag = std::min(cfg.min_sum_scale * mn, cfg.llr_clip);
  return negative ? -mag : mag;
}

}  // namespace detail

/// Runs up to cfg.max_iters iterations, stopping as soon as the hard decision
/// satisfies every live check. Messages start from the priors unless a
/// previous state over the same edge set is supplied.
inline BpResult run_bp(const TannerGraph& g, const BpConfig& cfg,
                       const BpState* warm_start = nullptr) {
  cfg.validate();
  const std::size_t n = g.n_vars();
  if (cfg.prior_llr.size() != n) {
    throw DimensionError("run_bp: " + std::to_string(cfg.prior_llr.size()) + " priors for " +
                         std::to_string(n) + " variables");
  }
  const double clip_at = cfg.llr_clip;
  BpResult res;
  BpState& st = res.state;
  if (warm_start != nullptr && warm_start->var_to_check.size() == g.n_edges()) {
    st = *warm_start;
  } else {
    st.var_to_check.resize(g.n_edges());
    st.check_to_var.assign(g.n_edges(), 0.0);
    for (std::size_t e = 0; e < g.n_edges(); ++e) {
      st.var_to_check[e] = detail::clip(cfg.prior_llr[g.edge(static_cast<EdgeId>(e)).var], clip_at);
    }
    st.llr.resize(n);
    for (std::size_t q = 0; q < n; ++q) st.llr[q] = detail::clip(cfg.prior_llr[q], clip_at);
  }
  res.hard.assign(n, 0);
  std::vector<double> scratch;

  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    if (cfg.schedule == BpSchedule::flooding) {
      for (CheckId id = 0; id < g.n_checks(); ++id) {
        const CheckNode c = g.check(id);
        if (cfg.variant == BpVariant::product_sum) {
          detail::check_update_product_sum(c, st.var_to_check, st.check_to_var, clip_at, scratch);
        } else {
          detail::check_update_min_sum(c, st.var_to_check, st.check_to_var, clip_at, cfg.min_sum_scale);
        }
      }
      for (std::size_t q = 0; q < n; ++q) {
        double total = cfg.prior_llr[q];
        for (EdgeId e : g.var_edges(static_cast<Index>(q))) total += st.check_to_var[e];
        st.llr[q] = detail::clip(total, clip_at);
        for (EdgeId e : g.var_edges(static_cast<Index>(q))) {
          st.var_to_check[e] = detail::clip(total - st.check_to_var[e], clip_at);
        }
      }
    } else {
      for (std::size_t q = 0; q < n; ++q) {
        const auto edges = g.var_edges(static_cast<Index>(q));
        for (EdgeId e : edges) {
          st.check_to_var[e] = detail::check_message(g.check(g.edge(e).check), e, st.var_to_check, cfg);
        }
        double total = cfg.prior_llr[q];
        for (EdgeId e : edges) total += st.check_to_var[e];
        st.llr[q] = detail::clip(total, clip_at);
        for (EdgeId e : edges) st.var_to_check[e] = detail::clip(total - st.check_to_var[e], clip_at);
      }
    }
    ++st.iteration;
    ++res.iterations;
    for (std::size_t q = 0; q < n; ++q) res.hard[q] = st.llr[q] < 0.0 ? 1 : 0;
    if (cfg.record_trace) res.llr_trace.push_back(st.llr);
    if (g.satisfied_by(res.hard)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace symbreak
