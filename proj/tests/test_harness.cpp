#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "symbreak/harness.hpp"
#include "symbreak/registry.hpp"

using namespace symbreak;

namespace {

const CssCode& hp13() {
  static const CssCode c = make_hp_code(repetition_code(3), repetition_code(3), "hp_13_1_3");
  return c;
}

const CssCode& bb72() {
  static const CssCode c = Registry::load().build("bb_72_12_6");
  return c;
}

ExperimentSpec spec_for(const std::string& code, DecoderKind kind, double p, std::size_t shots) {
  ExperimentSpec s;
  s.code = code;
  s.noise = NoiseModel::depolarizing(p);
  s.decoder = DecoderSpec::of(kind);
  s.shots = shots;
  s.seed = 12345;
  return s;
}

}  // namespace

TEST(Wilson, MatchesClosedForm) {
  const double z = 1.959963984540054;
  for (auto [f, n] : std::vector<std::pair<std::size_t, std::size_t>>{{0, 10}, {3, 100}, {50, 100}, {100, 100}}) {
    const double ph = double(f) / double(n), z2 = z * z;
    const double centre = (ph + z2 / (2.0 * double(n))) / (1 + z2 / double(n));
    const double half = z * std::sqrt(ph * (1 - ph) / double(n) + z2 / (4.0 * double(n) * double(n))) /
                        (1 + z2 / double(n));
    const auto w = wilson(f, n);
    EXPECT_NEAR(w.low, std::max(0.0, centre - half), 1e-12);
    EXPECT_NEAR(w.high, std::min(1.0, centre + half), 1e-12);
    EXPECT_LE(w.low, ph);
    EXPECT_GE(w.high, ph);
  }
  EXPECT_EQ(wilson(0, 10).low, 0.0);
}

TEST(LogicalFailure, Examples) {
  const CssCode& c = hp13();
  const BinVector e(13, {0, 4});
  EXPECT_FALSE(is_logical_failure(c, e, e, ErrorType::X, true));
  EXPECT_TRUE(is_logical_failure(c, e, e, ErrorType::X, false));
  EXPECT_FALSE(is_logical_failure(c, e, e ^ c.hx.row_vector(0), ErrorType::X, true));
  EXPECT_TRUE(is_logical_failure(c, e, e ^ c.logical_x[0], ErrorType::X, true));
  EXPECT_FALSE(is_logical_failure(c, e, e ^ c.hz.row_vector(1), ErrorType::Z, true));
  EXPECT_TRUE(is_logical_failure(c, e, e ^ c.logical_z[0], ErrorType::Z, true));
  EXPECT_THROW(is_logical_failure(c, BinVector(12), BinVector(12), ErrorType::X, true), DimensionError);
}

TEST(DecoderJson, ParsesKnobs) {
  const auto d = decoder_from_json(nlohmann::json::parse(
      R"({"name": "symbreak", "m": 20, "k_max": 4, "max_splits": 7, "strategy": "bp_guided"})"));
  EXPECT_EQ(d.kind, DecoderKind::symbreak);
  EXPECT_EQ(d.symbreak.m, 20u);
  EXPECT_EQ(d.symbreak.k_max, 4u);
  EXPECT_EQ(d.symbreak.max_splits, 7u);
  EXPECT_EQ(*d.symbreak.strategy, SplitStrategy::bp_guided);
  EXPECT_EQ(decoder_from_json("bp_osd_cs").osd.mode, OsdMode::osd_cs);
  EXPECT_THROW(decoder_from_json("mwpm"), Error);
  const auto spec = experiment_from_json(nlohmann::json::parse(R"({"code": "x", "p": 0.01, "shots": 5})"));
  EXPECT_EQ(spec.shots, 5u);
  EXPECT_DOUBLE_EQ(spec.noise.p, 0.01);
  EXPECT_THROW(experiment_from_json(nlohmann::json::parse(R"({"code": "x", "p": 0.01, "shots": 0})")), Error);
}

TEST(RunExperiment, ZeroNoiseHasNoFailures) {
  for (auto kind : {DecoderKind::bp, DecoderKind::bp_osd0, DecoderKind::symbreak}) {
    const auto r = run_experiment(bb72(), spec_for("bb_72_12_6", kind, 0.0, 200));
    EXPECT_EQ(r.failures, 0u);
    EXPECT_EQ(r.ci_low, 0.0);
  }
}

TEST(RunExperiment, DeterministicAcrossThreadCounts) {
  auto s = spec_for("bb_72_12_6", DecoderKind::symbreak, 0.03, 400);
  s.threads = 1;
  const auto a = run_experiment(bb72(), s);
  s.threads = 4;
  const auto b = run_experiment(bb72(), s);
  EXPECT_EQ(a.failures, b.failures);
  EXPECT_EQ(a.stop_reasons, b.stop_reasons);
  EXPECT_GT(a.failures, 0u);
  EXPECT_LE(a.ci_low, a.ler);
  EXPECT_GE(a.ci_high, a.ler);
}

TEST(RunExperiment, TracesAreRecorded) {
  auto s = spec_for("bb_72_12_6", DecoderKind::symbreak, 0.05, 20);
  s.keep_traces = true;
  const auto r = run_experiment(bb72(), s);
  ASSERT_EQ(r.traces.size(), 20u);
  EXPECT_TRUE(r.traces[0].contains("x"));
  EXPECT_TRUE(r.traces[0]["x"].contains("d_trajectory"));
}

TEST(RunExperiment, PhenomenologicalRuns) {
  ExperimentSpec s = spec_for("bb_72_12_6", DecoderKind::symbreak, 0.0, 100);
  s.noise.kind = NoiseKind::phenomenological;
  s.noise.p_data = 0.01;
  s.noise.p_meas = 0.01;
  const auto r = run_experiment(bb72(), s);
  EXPECT_EQ(r.syndrome_violations, 0u);
  EXPECT_LT(r.failures, 100u);
}

// Sector-wise ML on the 13-qubit product code against BP+OSD-0, same shots.
TEST(RunExperiment, SmallCodeMatchesMaximumLikelihood) {
  const CssCode& c = hp13();
  const double p = 0.01;
  const std::size_t shots = 10000;
  auto s = spec_for(c.label, DecoderKind::bp_osd0, p, shots);
  const auto r = run_experiment(c, s);
  const oracle::MlSectorOracle mlx(c.hz, c.logical_z, 2 * p / 3), mlz(c.hx, c.logical_x, 2 * p / 3);
  std::size_t ml_failures = 0;
  for (std::size_t shot = 0; shot < shots; ++shot) {
    ShotRng rng(s.seed, shot);
    const auto e = sample_error(s.noise, c.n, rng);
    ml_failures += mlx.fails(e.ex) || mlz.fails(e.ez);
  }
  const auto ml = wilson(ml_failures, shots);
  EXPECT_LT(r.ler, 1e-2);
  EXPECT_EQ(r.syndrome_violations, 0u);
  EXPECT_LE(ml.low, r.ci_high);
  EXPECT_LE(r.ci_low, ml.high);
  // Oracle LER <= decoder LER + 2 half-widths.
  EXPECT_LE(static_cast<double>(ml_failures) / shots, r.ler + (r.ci_high - r.ci_low));
}

TEST(RunExperiment, NullDecoderOverheadIsSmall) {
  auto base = spec_for("bb_72_12_6", DecoderKind::bp, 0.003, 3000);
  base.timing = true;
  const auto bp = run_experiment(bb72(), base);
  base.decoder = DecoderSpec::of(DecoderKind::null_decoder);
  const auto null = run_experiment(bb72(), base);
  EXPECT_LT(null.mean_time_us, 0.05 * bp.mean_time_us) << null.mean_time_us << " vs " << bp.mean_time_us;
}

TEST(Sweep, AxesAndValidation) {
  const auto base = spec_for("hp_13_1_3", DecoderKind::symbreak, 0.02, 300);
  const auto rows = sweep(hp13(), base, SweepAxis::p, {0.01, 0.05});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(rows[0].p, 0.01);
  EXPECT_LE(rows[0].failures, rows[1].failures);
  EXPECT_EQ(with_axis(base, SweepAxis::max_iters, 20).decoder.symbreak.m, 20u);
  EXPECT_EQ(with_axis(base, SweepAxis::max_splits, 3).decoder.symbreak.max_splits, 3u);
  const auto bp = spec_for("hp_13_1_3", DecoderKind::bp, 0.02, 300);
  EXPECT_EQ(with_axis(bp, SweepAxis::max_iters, 10).decoder.bp.max_iters, 10u);
  EXPECT_THROW(with_axis(bp, SweepAxis::max_splits, 3), Error);
  EXPECT_THROW(parse_sweep_axis("seed"), Error);
}

TEST(Csv, RoundTrip) {
  LerResult a;
  a.code = "bb_72_12_6";
  a.decoder = "symbreak";
  a.p = 0.003;
  a.shots = 1000000;
  a.failures = 17;
  a.ler = 1.7e-5;
  a.ci_low = 1.0 / 3.0;
  a.ci_high = 2.0 / 7.0;
  a.mean_time_us = 27.123456789;
  a.p99_time_us = 1e-300;
  std::stringstream ss;
  write_csv(ss, {a, a});
  const auto back = parse_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].code, a.code);
  EXPECT_EQ(back[0].failures, a.failures);
  EXPECT_EQ(back[0].p, a.p);
  EXPECT_EQ(back[0].ci_low, a.ci_low);
  EXPECT_EQ(back[0].ci_high, a.ci_high);
  EXPECT_EQ(back[0].mean_time_us, a.mean_time_us);
  EXPECT_EQ(back[0].p99_time_us, a.p99_time_us);
  std::istringstream bad("code,oops\n");
  EXPECT_THROW(parse_csv(bad), Error);
}
