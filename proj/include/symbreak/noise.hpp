#pragma once

// Error sampling for Monte Carlo runs. Randomness is a SplitMix64 stream
// keyed by (seed, shot): the stream for a shot is independent of which
// thread runs it, and the generator is fully specified so samples are
// reproducible across platforms.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "symbreak/gf2.hpp"

namespace symbreak {

/// SplitMix64 (Steele, Lea, Flood 2014). next() advances the state by the
/// golden gamma and returns the finalized mix.
class ShotRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  ShotRng(std::uint64_t seed, std::uint64_t shot) : state_(mix(seed) ^ mix(shot * kGamma + 1)) {}

  std::uint64_t next() { return mix(state_ += kGamma); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

enum class NoiseKind { depolarizing, independent_xz, phenomenological };

struct NoiseModel {
  NoiseKind kind = NoiseKind::depolarizing;
  double p = 0.0;       // depolarizing total rate
  double px = 0.0;      // independent_xz
  double pz = 0.0;      // independent_xz
  double p_data = 0.0;  // phenomenological, per data qubit and per type
  double p_meas = 0.0;  // phenomenological, per check

  static NoiseModel depolarizing(double p) {
    NoiseModel m;
    m.p = p;
    m.validate();
    return m;
  }

  void validate() const {
    for (double v : {p, px, pz, p_data, p_meas}) {
      if (!(v >= 0.0 && v < 1.0)) throw Error("NoiseModel: probabilities must lie in [0, 1)");
    }
  }

  /// Marginal probability that a data qubit carries an error detected by
  /// the given check type (X or Z component).
  double x_rate() const {
    switch (kind) {
      case NoiseKind::depolarizing: return 2.0 * p / 3.0;
      case NoiseKind::independent_xz: return px;
      case NoiseKind::phenomenological: return p_data;
    }
    return 0;
  }
  double z_rate() const {
    switch (kind) {
      case NoiseKind::depolarizing: return 2.0 * p / 3.0;
      case NoiseKind::independent_xz: return pz;
      case NoiseKind::phenomenological: return p_data;
    }
    return 0;
  }
  double meas_rate() const { return kind == NoiseKind::phenomenological ? p_meas : 0.0; }

  /// Representative rate used to label sweeps and CSV rows.
  double nominal_p() const {
    switch (kind) {
      case NoiseKind::depolarizing: return p;
      case NoiseKind::independent_xz: return std::max(px, pz);
      case NoiseKind::phenomenological: return p_data;
    }
    return 0;
  }

  /// Sets every rate of the model to p (sweep axis).
  void set_p(double v) {
    p = px = pz = p_data = v;
    if (kind == NoiseKind::phenomenological) p_meas = v;
    validate();
  }
};

inline std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::depolarizing: return "depolarizing";
    case NoiseKind::independent_xz: return "independent_xz";
    case NoiseKind::phenomenological: return "phenomenological";
  }
  return "?";
}

inline void to_json(nlohmann::json& j, const NoiseModel& m) {
  j = nlohmann::json{{"model", to_string(m.kind)}};
  switch (m.kind) {
    case NoiseKind::depolarizing: j["p"] = m.p; break;
    case NoiseKind::independent_xz: j["px"] = m.px, j["pz"] = m.pz; break;
    case NoiseKind::phenomenological: j["p_data"] = m.p_data, j["p_meas"] = m.p_meas; break;
  }
}

inline void from_json(const nlohmann::json& j, NoiseModel& m) {
  m = NoiseModel{};
  const std::string kind = j.value("model", std::string("depolarizing"));
  if (kind == "depolarizing") {
    m.kind = NoiseKind::depolarizing;
    m.p = j.at("p").get<double>();
  } else if (kind == "independent_xz") {
    m.kind = NoiseKind::independent_xz;
    m.px = j.at("px").get<double>();
    m.pz = j.at("pz").get<double>();
  } else if (kind == "phenomenological") {
    m.kind = NoiseKind::phenomenological;
    m.p_data = j.at("p_data").get<double>();
    m.p_meas = j.at("p_meas").get<double>();
  } else {
    throw Error("unknown noise model: " + kind);
  }
  m.validate();
}

struct ErrorSample {
  BinVector ex;      // X component (X or Y)
  BinVector ez;      // Z component (Z or Y)
  BinVector meas_x;  // flips of hz syndrome bits (phenomenological only)
  BinVector meas_z;  // flips of hx syndrome bits (phenomenological only)
};

namespace detail {
inline BinVector bernoulli(std::size_t n, double p, ShotRng& rng) {
  std::vector<Index> s;
  if (p > 0.0) {
    for (std::size_t q = 0; q < n; ++q) {
      if (rng.uniform() < p) s.push_back(static_cast<Index>(q));
    }
  }
  return BinVector(n, std::move(s));
}
}  // namespace detail

/// `x_checks` / `z_checks` size the measurement-flip vectors for the
/// phenomenological model (rows of hz and hx respectively).
inline ErrorSample sample_error(const NoiseModel& model, std::size_t n, ShotRng& rng,
                                std::size_t x_checks = 0, std::size_t z_checks = 0) {
  ErrorSample out;
  switch (model.kind) {
    case NoiseKind::depolarizing: {
      std::vector<Index> xs, zs;
      if (model.p > 0.0) {
        const double third = model.p / 3.0;
        for (std::size_t q = 0; q < n; ++q) {
          const double u = rng.uniform();
          if (u >= model.p) continue;
          const auto i = static_cast<Index>(q);
          if (u < third) {
            xs.push_back(i);  // X
          } else if (u < 2.0 * third) {
            xs.push_back(i), zs.push_back(i);  // Y
          } else {
            zs.push_back(i);  // Z
          }
        }
      }
      out.ex = BinVector(n, std::move(xs));
      out.ez = BinVector(n, std::move(zs));
      break;
    }
    case NoiseKind::independent_xz:
      out.ex = detail::bernoulli(n, model.px, rng);
      out.ez = detail::bernoulli(n, model.pz, rng);
      break;
    case NoiseKind::phenomenological:
      out.ex = detail::bernoulli(n, model.p_data, rng);
      out.ez = detail::bernoulli(n, model.p_data, rng);
      break;
  }
  out.meas_x = detail::bernoulli(x_checks, model.meas_rate(), rng);
  out.meas_z = detail::bernoulli(z_checks, model.meas_rate(), rng);
  return out;
}

}  // namespace symbreak
