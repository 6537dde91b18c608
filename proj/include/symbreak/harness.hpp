#pragma once

// Monte Carlo logical-error-rate estimation. Each shot samples an error,
// decodes the X and Z sectors independently and fails if either sector
// fails. Shot outcomes depend only on (seed, shot index).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "symbreak/bp.hpp"
#include "symbreak/codes.hpp"
#include "symbreak/noise.hpp"
#include "symbreak/osd.hpp"
#include "symbreak/symbreak_decoder.hpp"

namespace symbreak {

enum class DecoderKind { bp, bp_osd0, bp_osd_cs, symbreak, null_decoder };

inline std::string to_string(DecoderKind k) {
  switch (k) {
    case DecoderKind::bp: return "bp";
    case DecoderKind::bp_osd0: return "bp_osd0";
    case DecoderKind::bp_osd_cs: return "bp_osd_cs";
    case DecoderKind::symbreak: return "symbreak";
    case DecoderKind::null_decoder: return "null";
  }
  return "?";
}

inline DecoderKind parse_decoder_kind(const std::string& s) {
  if (s == "bp") return DecoderKind::bp;
  if (s == "bp_osd0") return DecoderKind::bp_osd0;
  if (s == "bp_osd_cs") return DecoderKind::bp_osd_cs;
  if (s == "symbreak") return DecoderKind::symbreak;
  if (s == "null") return DecoderKind::null_decoder;
  throw Error("unknown decoder: " + s);
}

/// Decoder choice plus its knobs. Priors are filled in from the noise model.
struct DecoderSpec {
  DecoderKind kind = DecoderKind::bp;
  BpConfig bp;
  OsdConfig osd;
  SymBreakConfig symbreak;

  static DecoderSpec of(DecoderKind k) {
    DecoderSpec s;
    s.kind = k;
    if (k == DecoderKind::bp_osd_cs) s.osd.mode = OsdMode::osd_cs;
    return s;
  }

  std::string name() const {
    if (kind == DecoderKind::symbreak && symbreak.osd_rescue) return "symbreak+osd";
    return to_string(kind);
  }
};

inline BpSchedule parse_schedule(const std::string& s) {
  if (s == "flooding") return BpSchedule::flooding;
  if (s == "serial") return BpSchedule::serial;
  throw Error("unknown BP schedule: " + s);
}

inline BpVariant parse_variant(const std::string& s) {
  if (s == "product_sum") return BpVariant::product_sum;
  if (s == "min_sum") return BpVariant::min_sum;
  throw Error("unknown BP variant: " + s);
}

/// Accepts either a bare name ("symbreak") or an object with a "name" key
/// and optional knobs.
inline DecoderSpec decoder_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "symbreak+osd") {
      DecoderSpec s = DecoderSpec::of(DecoderKind::symbreak);
      s.symbreak.osd_rescue = OsdConfig{};
      return s;
    }
    return DecoderSpec::of(parse_decoder_kind(name));
  }
  DecoderSpec s = decoder_from_json(j.at("name"));
  if (j.contains("max_iters")) s.bp.max_iters = j["max_iters"].get<std::size_t>();
  if (j.contains("schedule")) s.bp.schedule = parse_schedule(j["schedule"].get<std::string>());
  if (j.contains("variant")) s.bp.variant = parse_variant(j["variant"].get<std::string>());
  if (j.contains("min_sum_scale")) s.bp.min_sum_scale = j["min_sum_scale"].get<double>();
  if (j.contains("sweep_depth")) s.osd.sweep_depth = j["sweep_depth"].get<std::size_t>();
  if (j.contains("m")) s.symbreak.m = j["m"].get<std::size_t>();
  if (j.contains("k_max")) s.symbreak.k_max = j["k_max"].get<std::size_t>();
  if (j.contains("max_splits")) s.symbreak.max_splits = j["max_splits"].get<std::size_t>();
  if (j.contains("strategy")) s.symbreak.strategy = parse_split_strategy(j["strategy"].get<std::string>());
  if (j.contains("reset_messages_on_split")) {
    s.symbreak.reset_messages_on_split = j["reset_messages_on_split"].get<bool>();
  }
  s.symbreak.bp.schedule = s.bp.schedule;
  s.symbreak.bp.variant = s.bp.variant;
  s.symbreak.bp.min_sum_scale = s.bp.min_sum_scale;
  return s;
}

struct ExperimentSpec {
  std::string code;
  NoiseModel noise;
  DecoderSpec decoder;
  std::size_t shots = 1000;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: hardware concurrency
  bool timing = false;      // single worker for low-variance latency
  bool keep_traces = false;

  void validate() const {
    if (shots < 1) throw Error("ExperimentSpec: shots must be >= 1");
    noise.validate();
  }
};

inline ExperimentSpec experiment_from_json(const nlohmann::json& j) {
  ExperimentSpec s;
  s.code = j.at("code").get<std::string>();
  if (j.contains("noise")) {
    s.noise = j["noise"].get<NoiseModel>();
  } else {
    s.noise = NoiseModel::depolarizing(j.at("p").get<double>());
  }
  if (j.contains("decoder")) s.decoder = decoder_from_json(j["decoder"]);
  s.shots = j.value("shots", s.shots);
  s.seed = j.value("seed", s.seed);
  s.threads = j.value("threads", s.threads);
  s.timing = j.value("timing", s.timing);
  s.keep_traces = j.value("traces", s.keep_traces);
  s.validate();
  return s;
}

struct LerResult {
  std::string code;
  std::string decoder;
  double p = 0;
  std::size_t shots = 0;
  std::size_t failures = 0;
  double ler = 0;
  double ci_low = 0;
  double ci_high = 0;
  double mean_time_us = 0;
  double p99_time_us = 0;
  std::map<std::string, std::size_t> stop_reasons;  // per sector decode
  std::size_t syndrome_violations = 0;
  nlohmann::json traces;  // per-shot SymBreak traces when requested
};

struct WilsonInterval {
  double low = 0;
  double high = 0;
};

/// 95% Wilson score interval for `failures` out of `shots`.
inline WilsonInterval wilson(std::size_t failures, std::size_t shots, double z = 1.959963984540054) {
  if (shots == 0) return {0.0, 1.0};
  const double n = static_cast<double>(shots);
  const double ph = static_cast<double>(failures) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (ph + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(ph * (1 - ph) / n + z2 / (4 * n * n)) / denom;
  WilsonInterval w{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (failures == 0) w.low = 0.0;
  if (failures == shots) w.high = 1.0;
  w.low = std::min(w.low, ph);
  w.high = std::max(w.high, ph);
  return w;
}

/// Unconverged decodes fail. Otherwise the residual e + estimate fails iff
/// it anticommutes with some detecting logical.
inline bool is_logical_failure(const CssCode& code, const BinVector& e, const BinVector& estimate,
                               ErrorType type, bool converged) {
  if (!converged) return true;
  if (e.size() != code.n || estimate.size() != code.n) throw DimensionError("is_logical_failure: length != n");
  const BinVector r = e ^ estimate;
  if (r.is_zero()) return false;
  for (const auto& l : detecting_logicals(code, type)) {
    if (l.dot(r)) return true;
  }
  return false;
}

struct SectorResult {
  BinVector estimate;  // over data qubits and, if present, measurement bits
  bool converged = false;
  std::string_view stop;  // static label
  std::optional<DecodeOutcome> outcome;  // SymBreak only
};

/// One decoder bound to one error type. Measurement errors extend the check
/// matrix to [H | I] so each check gets its own flip variable.
class SectorDecoder {
 public:
  SectorDecoder(const CssCode& code, ErrorType type, const NoiseModel& noise, const DecoderSpec& spec)
      : kind_(spec.kind), osd_(spec.osd), n_data_(code.n) {
    const BinMatrix& h = checks_for(code, type);
    const BinMatrix& opp = opposite_for(code, type);
    const double rate = type == ErrorType::X ? noise.x_rate() : noise.z_rate();
    const bool with_meas = noise.meas_rate() > 0.0;
    std::vector<double> prior(code.n, prior_of(rate));
    if (with_meas) {
      checks_ = hstack(h, BinMatrix::identity(h.rows()));
      prior.resize(code.n + h.rows(), prior_of(noise.meas_rate()));
    } else {
      checks_ = h;
    }
    bp_ = spec.bp;
    bp_.prior_llr = prior;
    bp_.validate();
    osd_.validate();
    if (kind_ == DecoderKind::symbreak) {
      SymBreakConfig cfg = spec.symbreak;
      cfg.bp.prior_llr = prior;
      BinMatrix opposite = with_meas ? hstack(opp, BinMatrix(opp.rows(), h.rows())) : opp;
      if (with_meas && cfg.strategy == SplitStrategy::bb_layered) {
        throw Error("bb_layered splits are not defined with measurement errors");
      }
      const std::size_t left = (code.family == CodeFamily::bb && !with_meas) ? code.left_block : 0;
      symbreak_.emplace(checks_, std::move(opposite), std::move(cfg), left);
    }
  }

  static double prior_of(double rate) {
    constexpr double kFloor = 1e-9;  // p = 0 guard
    return prior_from_error_rate(std::clamp(rate, kFloor, 0.5));
  }

  const BinMatrix& checks() const { return checks_; }
  std::size_t n_data() const { return n_data_; }

  /// `keep_outcome` retains the SymBreak trace in the result.
  SectorResult decode(const BinVector& syndrome, bool keep_outcome = false) const {
    SectorResult r;
    switch (kind_) {
      case DecoderKind::null_decoder:
        r.estimate = BinVector(checks_.cols(), {});
        r.converged = syndrome.is_zero();
        r.stop = "null";
        return r;
      case DecoderKind::symbreak: {
        DecodeOutcome out = symbreak_->decode(syndrome);
        r.converged = out.converged;
        r.stop = out.osd_rescued ? std::string_view("osd_rescue") : stop_name(out.stop_reason);
        if (keep_outcome) {
          r.estimate = out.estimate;
          r.outcome = std::move(out);
        } else {
          r.estimate = std::move(out.estimate);
        }
        return r;
      }
      default: break;
    }
    const TannerGraph g = TannerGraph::from_parity(checks_, syndrome);
    BpResult res = run_bp(g, bp_);
    if (res.converged) {
      r.estimate = BinVector::from_dense(res.hard);
      r.converged = true;
      r.stop = "bp_converged";
    } else if (kind_ == DecoderKind::bp) {
      r.estimate = BinVector::from_dense(res.hard);
      r.stop = "bp_unconverged";
    } else {
      r.estimate = osd_postprocess(checks_, syndrome, res.state.llr, osd_);
      r.converged = true;
      r.stop = "osd";
    }
    return r;
  }

  /// Data-qubit part of an estimate.
  BinVector data_part(const BinVector& estimate) const {
    if (estimate.size() == n_data_) return estimate;
    std::vector<Index> s;
    for (Index q : estimate.support()) {
      if (q < n_data_) s.push_back(q);
    }
    return BinVector(n_data_, std::move(s));
  }

 private:
  DecoderKind kind_;
  OsdConfig osd_;
  std::size_t n_data_;
  BinMatrix checks_;
  BpConfig bp_;
  std::optional<SymBreakDecoder> symbreak_;
};

inline nlohmann::json trace_to_json(const DecodeOutcome& o) {
  nlohmann::json splits = nlohmann::json::array();
  for (const auto& s : o.splits) {
    splits.push_back({{"round", s.round},
                      {"gx_row", s.gx_row},
                      {"z_check", s.z_check},
                      {"new_check", s.new_check},
                      {"part1", s.part1},
                      {"s1", s.s1 ? 1 : 0},
                      {"strategy", to_string(s.strategy)},
                      {"gx_overlap_part1", s.gx_overlap_part1},
                      {"d_before", s.d_before},
                      {"d_after", s.d_after ? nlohmann::json(*s.d_after) : nlohmann::json(nullptr)}});
  }
  return {{"converged", o.converged},
          {"osd_rescued", o.osd_rescued},
          {"stop_reason", to_string(o.stop_reason)},
          {"bp_iterations_total", o.bp_iterations_total},
          {"d_trajectory", o.d_trajectory},
          {"splits", splits},
          {"estimate", o.estimate.support()},
          {"wall_time_us", std::chrono::duration<double, std::micro>(o.wall_time).count()}};
}

/// Both sector decoders for a code, built once and shared read-only by workers.
class PreparedExperiment {
 public:
  PreparedExperiment(const CssCode& code, ExperimentSpec spec)
      : code_(&code),
        spec_(std::move(spec)),
        x_(code, ErrorType::X, spec_.noise, spec_.decoder),
        z_(code, ErrorType::Z, spec_.noise, spec_.decoder) {
    spec_.validate();
  }

  struct Shot {
    bool failed = false;
    bool violation = false;
    double time_us = 0;
    std::string_view stop_x, stop_z;
    nlohmann::json trace;
  };

  Shot run_shot(std::uint64_t shot) const {
    const CssCode& c = *code_;
    ShotRng rng(spec_.seed, shot);
    const ErrorSample err = sample_error(spec_.noise, c.n, rng, c.hz.rows(), c.hx.rows());
    BinVector sz = matvec(c.hz, err.ex), sx = matvec(c.hx, err.ez);
    if (spec_.noise.meas_rate() > 0.0) {
      sz = sz ^ err.meas_x;
      sx = sx ^ err.meas_z;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const SectorResult rx = x_.decode(sz, spec_.keep_traces);
    const SectorResult rz = z_.decode(sx, spec_.keep_traces);
    const auto t1 = std::chrono::steady_clock::now();

    Shot s;
    s.time_us = std::chrono::duration<double, std::micro>(t1 - t0).count();
    s.violation = (rx.converged && !(matvec(x_.checks(), rx.estimate) == sz)) ||
                  (rz.converged && !(matvec(z_.checks(), rz.estimate) == sx));
    s.failed = s.violation ||
               is_logical_failure(c, err.ex, x_.data_part(rx.estimate), ErrorType::X, rx.converged) ||
               is_logical_failure(c, err.ez, z_.data_part(rz.estimate), ErrorType::Z, rz.converged);
    s.stop_x = rx.stop;
    s.stop_z = rz.stop;
    if (spec_.keep_traces && rx.outcome && rz.outcome) {
      s.trace = {{"shot", shot},
                 {"failed", s.failed},
                 {"x", trace_to_json(*rx.outcome)},
                 {"z", trace_to_json(*rz.outcome)}};
    }
    return s;
  }

  LerResult run() const {
    const std::size_t shots = spec_.shots;
    // Per-shot times and traces are indexed by shot; counts are merged from
    // per-worker tallies, so memory stays O(shots) doubles.
    struct Tally {
      std::size_t failures = 0;
      std::size_t violations = 0;
      std::map<std::string_view, std::size_t> stops;
    };
    std::vector<double> times(shots);
    std::vector<nlohmann::json> traces(spec_.keep_traces ? shots : 0);
    std::size_t workers = spec_.timing ? 1 : spec_.threads;
    if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
    workers = std::min(workers, shots);
    std::vector<Tally> tallies(workers);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto work = [&](Tally& t) {
      try {
        for (std::size_t i; (i = next.fetch_add(1)) < shots;) {
          Shot s = run_shot(i);
          t.failures += s.failed;
          t.violations += s.violation;
          ++t.stops[s.stop_x];
          ++t.stops[s.stop_z];
          times[i] = s.time_us;
          if (spec_.keep_traces) traces[i] = std::move(s.trace);
        }
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = shots;
      }
    };
    if (workers == 1) {
      work(tallies[0]);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, std::ref(tallies[w]));
      for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    LerResult r;
    r.code = code_->label;
    r.decoder = spec_.decoder.name();
    r.p = spec_.noise.nominal_p();
    r.shots = shots;
    for (const auto& t : tallies) {
      r.failures += t.failures;
      r.syndrome_violations += t.violations;
      for (const auto& [k, v] : t.stops) r.stop_reasons[std::string(k)] += v;
    }
    if (spec_.keep_traces) {
      r.traces = nlohmann::json::array();
      for (auto& t : traces) {
        if (!t.is_null()) r.traces.push_back(std::move(t));
      }
    }
    finish(r, times);
    return r;
  }

  /// Fills rate, interval and timing summaries from failures and per-shot times.
  static void finish(LerResult& r, std::vector<double>& times) {
    r.ler = static_cast<double>(r.failures) / static_cast<double>(r.shots);
    const auto ci = wilson(r.failures, r.shots);
    r.ci_low = ci.low;
    r.ci_high = ci.high;
    double total = 0;
    for (double t : times) total += t;
    r.mean_time_us = total / static_cast<double>(r.shots);
    const auto rank99 = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(r.shots))) - 1;
    std::nth_element(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(rank99), times.end());
    r.p99_time_us = times[rank99];
  }

  const ExperimentSpec& spec() const { return spec_; }

 private:
  const CssCode* code_;
  ExperimentSpec spec_;
  SectorDecoder x_;
  SectorDecoder z_;
};

inline LerResult run_experiment(const CssCode& code, const ExperimentSpec& spec) {
  return PreparedExperiment(code, spec).run();
}

/// Times several decoders on identical shots in one thread. Decoders are
/// interleaved per shot with a rotating order, so slow drift in machine speed
/// affects all of them alike and the timing ratios stay stable.
inline std::vector<LerResult> time_decoders(const CssCode& code, const ExperimentSpec& base,
                                            const std::vector<DecoderSpec>& decoders) {
  std::vector<PreparedExperiment> prepared;
  prepared.reserve(decoders.size());
  for (const auto& d : decoders) {
    ExperimentSpec s = base;
    s.decoder = d;
    prepared.emplace_back(code, std::move(s));
  }
  const std::size_t k = prepared.size(), shots = base.shots;
  std::vector<LerResult> out(k);
  std::vector<std::vector<double>> times(k, std::vector<double>(shots));
  for (std::size_t i = 0; i < shots; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t d = (i + j) % k;
      const auto s = prepared[d].run_shot(i);
      times[d][i] = s.time_us;
      out[d].failures += s.failed;
      out[d].syndrome_violations += s.violation;
      ++out[d].stop_reasons[std::string(s.stop_x)];
      ++out[d].stop_reasons[std::string(s.stop_z)];
    }
  }
  for (std::size_t d = 0; d < k; ++d) {
    out[d].code = code.label;
    out[d].decoder = decoders[d].name();
    out[d].p = base.noise.nominal_p();
    out[d].shots = shots;
    PreparedExperiment::finish(out[d], times[d]);
  }
  return out;
}

enum class SweepAxis { p, max_iters, max_splits };

inline SweepAxis parse_sweep_axis(const std::string& s) {
  if (s == "p") return SweepAxis::p;
  if (s == "max_iters") return SweepAxis::max_iters;
  if (s == "max_splits") return SweepAxis::max_splits;
  throw Error("unknown sweep axis: " + s);
}

/// Applies one sweep value. For SymBreak, max_iters sets the per-round BP
/// budget m; for the BP family it sets the BP iteration cap.
inline ExperimentSpec with_axis(ExperimentSpec spec, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::p:
      spec.noise.set_p(value);
      break;
    case SweepAxis::max_iters: {
      if (!(value >= 1)) throw Error("sweep: max_iters must be >= 1");
      const auto v = static_cast<std::size_t>(value);
      if (spec.decoder.kind == DecoderKind::null_decoder) throw Error("sweep: null decoder has no iterations");
      if (spec.decoder.kind == DecoderKind::symbreak) {
        spec.decoder.symbreak.m = v;
      } else {
        spec.decoder.bp.max_iters = v;
      }
      break;
    }
    case SweepAxis::max_splits:
      if (spec.decoder.kind != DecoderKind::symbreak) throw Error("sweep: max_splits needs the symbreak decoder");
      if (!(value >= 0)) throw Error("sweep: max_splits must be >= 0");
      spec.decoder.symbreak.max_splits = static_cast<std::size_t>(value);
      break;
  }
  return spec;
}

inline std::vector<LerResult> sweep(const CssCode& code, const ExperimentSpec& base, SweepAxis axis,
                                    const std::vector<double>& values) {
  std::vector<ExperimentSpec> specs;
  for (double v : values) specs.push_back(with_axis(base, axis, v));  // fail before any shot
  std::vector<LerResult> out;
  for (const auto& s : specs) out.push_back(run_experiment(code, s));
  return out;
}

inline constexpr const char* kCsvHeader = "code,decoder,p,shots,failures,ler,ci_low,ci_high,mean_time_us,p99_time_us";

inline void write_csv(std::ostream& os, const std::vector<LerResult>& rows, bool header = true) {
  if (header) os << kCsvHeader << '\n';
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    os << r.code << ',' << r.decoder << ',' << num(r.p) << ',' << r.shots << ',' << r.failures << ','
       << num(r.ler) << ',' << num(r.ci_low) << ',' << num(r.ci_high) << ',' << num(r.mean_time_us) << ','
       << num(r.p99_time_us) << '\n';
  }
}

inline std::vector<LerResult> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw Error("csv: missing or unexpected header");
  std::vector<LerResult> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 10) throw Error("csv: expected 10 fields, got " + std::to_string(f.size()));
    LerResult r;
    r.code = f[0];
    r.decoder = f[1];
    r.p = std::stod(f[2]);
    r.shots = std::stoull(f[3]);
    r.failures = std::stoull(f[4]);
    r.ler = std::stod(f[5]);
    r.ci_low = std::stod(f[6]);
    r.ci_high = std::stod(f[7]);
    r.mean_time_us = std::stod(f[8]);
    r.p99_time_us = std::stod(f[9]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace symbreak
