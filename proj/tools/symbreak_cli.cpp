// symbreak command-line driver. Exit codes: 0 success, 1 usage or I/O
// error, 2 invariant violation.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "symbreak/symbreak.hpp"

namespace {

using namespace symbreak;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

/// One 0/1 character per check, or a JSON array of 0/1 values.
BinVector read_syndrome(const std::string& path, std::size_t rows) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  std::vector<std::uint8_t> bits;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    for (const auto& b : json::parse(text)) bits.push_back(static_cast<std::uint8_t>(b.get<int>() & 1));
  } else {
    for (char c : text) {
      if (c == '0' || c == '1') {
        bits.push_back(static_cast<std::uint8_t>(c - '0'));
      } else if (!std::isspace(static_cast<unsigned char>(c))) {
        throw UsageError("syndrome file: unexpected character '" + std::string(1, c) + "'");
      }
    }
  }
  if (bits.size() != rows) {
    throw UsageError("syndrome has " + std::to_string(bits.size()) + " bits, expected " + std::to_string(rows));
  }
  return BinVector::from_dense(bits);
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

struct Common {
  std::string registry;
  std::string config;
  std::string out;
  std::string trace_out;
  std::string decoder;
  std::uint64_t seed = 0;
  std::size_t shots = 0;
  std::size_t threads = 0;
};

Registry load_registry(const Common& c) {
  try {
    return c.registry.empty() ? Registry::load() : Registry::load(c.registry);
  } catch (const RegistryError& e) {
    throw UsageError(e.what());
  }
}

ExperimentSpec load_spec(const Common& c, const CLI::App& sub) {
  if (c.config.empty()) throw UsageError("--config is required");
  ExperimentSpec spec = experiment_from_json(read_json_file(c.config));
  if (sub.count("--seed")) spec.seed = c.seed;
  if (sub.count("--shots")) spec.shots = c.shots;
  if (sub.count("--threads")) spec.threads = c.threads;
  if (sub.count("--decoder")) spec.decoder = decoder_from_json(json(c.decoder));
  spec.validate();
  return spec;
}

void check_violations(const std::vector<LerResult>& rows) {
  for (const auto& r : rows) {
    if (r.syndrome_violations) {
      throw InvariantError(r.decoder + ": " + std::to_string(r.syndrome_violations) +
                           " converged estimates violate their syndrome");
    }
  }
}

int cmd_codes_list(const Common& c) {
  const Registry reg = load_registry(c);
  for (const auto& label : reg.labels()) {
    const auto& e = reg.entry(label);
    std::cout << label << " family=" << e.spec.value("family", std::string("?")) << " n=" << e.n << " k=" << e.k;
    if (e.distance) std::cout << " d=" << *e.distance;
    if (!e.verified) std::cout << " (unverified)";
    std::cout << '\n';
  }
  return 0;
}

int cmd_codes_check(const Common& c, const std::string& label) {
  const Registry reg = load_registry(c);
  if (!reg.contains(label)) throw UsageError("unknown code label: " + label);
  CssCode code;
  try {
    code = reg.build(label);
  } catch (const Error& e) {
    throw InvariantError(e.what());
  }
  const auto problems = validate(code);
  const auto rw = row_weights(code.hx), cw = col_weights(code.hx);
  auto range = [](const WeightRange& w) {
    return w.min == w.max ? std::to_string(w.min) : std::to_string(w.min) + ".." + std::to_string(w.max);
  };
  std::cout << "n=" << code.n << " k=" << code.k << " row_w=" << range(rw) << " col_w=" << range(cw) << '\n';
  const auto& e = reg.entry(label);
  if (e.n && e.n != code.n) throw InvariantError("registry n=" + std::to_string(e.n) + " disagrees");
  if (e.k && e.k != code.k) throw InvariantError("registry k=" + std::to_string(e.k) + " disagrees");
  if (!problems.empty()) {
    for (const auto& p : problems) std::cerr << "violation: " << p << '\n';
    return 2;
  }
  return 0;
}

int cmd_decode(const Common& c, const std::string& label, const std::string& syndrome_path,
               const std::string& type_name, double p) {
  const Registry reg = load_registry(c);
  if (!reg.contains(label)) throw UsageError("unknown code label: " + label);
  const CssCode code = reg.build(label);
  if (type_name != "X" && type_name != "Z") throw UsageError("--type must be X or Z");
  const ErrorType type = type_name == "X" ? ErrorType::X : ErrorType::Z;
  const BinVector s = read_syndrome(syndrome_path, checks_for(code, type).rows());
  DecoderSpec spec = decoder_from_json(json(c.decoder.empty() ? std::string("symbreak") : c.decoder));
  const SectorDecoder dec(code, type, NoiseModel::depolarizing(p), spec);
  const SectorResult r = dec.decode(s, true);
  std::cout << "estimate=";
  const auto& sup = r.estimate.support();
  for (std::size_t i = 0; i < sup.size(); ++i) std::cout << (i ? "," : "") << sup[i];
  std::cout << "\nweight=" << r.estimate.weight() << "\nconverged=" << (r.converged ? 1 : 0)
            << "\nstop_reason=" << r.stop << '\n';
  if (!c.trace_out.empty() && r.outcome) write_output(c.trace_out, trace_to_json(*r.outcome).dump(2) + "\n");
  if (r.converged && !(matvec(dec.checks(), r.estimate) == s)) throw InvariantError("estimate violates syndrome");
  return 0;
}

int cmd_ler(const Common& c, const CLI::App& sub) {
  const ExperimentSpec spec = load_spec(c, sub);
  const Registry reg = load_registry(c);
  const CssCode code = reg.build(spec.code);
  const LerResult r = run_experiment(code, spec);
  for (const auto& [reason, count] : r.stop_reasons) std::cerr << reason << '=' << count << '\n';
  std::ostringstream os;
  write_csv(os, {r});
  write_output(c.out, os.str());
  if (!c.trace_out.empty() && spec.keep_traces) write_output(c.trace_out, r.traces.dump(2) + "\n");
  check_violations({r});
  return 0;
}

int cmd_sweep(const Common& c, const CLI::App& sub) {
  const ExperimentSpec spec = load_spec(c, sub);
  const json cfg = read_json_file(c.config);
  if (!cfg.contains("sweep")) throw UsageError("config has no \"sweep\" section");
  const SweepAxis axis = parse_sweep_axis(cfg["sweep"].at("axis").get<std::string>());
  const auto values = cfg["sweep"].at("values").get<std::vector<double>>();
  const Registry reg = load_registry(c);
  const CssCode code = reg.build(spec.code);
  const auto rows = sweep(code, spec, axis, values);
  std::ostringstream os;
  write_csv(os, rows);
  write_output(c.out, os.str());
  check_violations(rows);
  return 0;
}

int cmd_bench(const Common& c, const CLI::App& sub, std::vector<std::string> decoders) {
  ExperimentSpec spec = load_spec(c, sub);
  spec.timing = true;
  if (decoders.empty()) decoders = {"bp", "bp_osd0", "bp_osd_cs", "symbreak"};
  const Registry reg = load_registry(c);
  const CssCode code = reg.build(spec.code);
  std::vector<DecoderSpec> specs;
  for (const auto& d : decoders) specs.push_back(decoder_from_json(json(d)));
  const std::vector<LerResult> rows = time_decoders(code, spec, specs);
  for (const auto& r : rows) {
    std::cerr << r.decoder << ": mean_time_us=" << r.mean_time_us << " p99_time_us=" << r.p99_time_us << '\n';
  }
  std::ostringstream os;
  write_csv(os, rows);
  write_output(c.out, os.str());
  check_violations(rows);
  return 0;
}

int cmd_trace(const Common& c, const CLI::App& sub, std::uint64_t shot) {
  ExperimentSpec spec = load_spec(c, sub);
  spec.decoder.kind = DecoderKind::symbreak;
  spec.keep_traces = true;
  const Registry reg = load_registry(c);
  const CssCode code = reg.build(spec.code);
  const PreparedExperiment prepared(code, spec);
  const auto s = prepared.run_shot(shot);
  write_output(c.trace_out.empty() ? c.out : c.trace_out, s.trace.dump(2) + "\n");
  if (s.violation) throw InvariantError("converged estimate violates its syndrome");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SymBreak decoder toolkit"};
  app.require_subcommand(1);
  Common c;
  app.add_option("--registry", c.registry, "Code registry JSON (default: $SYMBREAK_REGISTRY or built-in)");

  auto add_run_flags = [&c](CLI::App* s) {
    s->add_option("--config", c.config, "Experiment JSON config");
    s->add_option("--seed", c.seed, "RNG seed");
    s->add_option("--shots", c.shots, "Number of shots")->check(CLI::PositiveNumber);
    s->add_option("--decoder", c.decoder, "bp | bp_osd0 | bp_osd_cs | symbreak | symbreak+osd | null");
    s->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
    s->add_option("--out", c.out, "Output CSV path (default stdout)");
    s->add_option("--trace-out", c.trace_out, "Trace JSON path");
  };

  auto* codes = app.add_subcommand("codes", "Inspect the code registry");
  codes->require_subcommand(1);
  auto* codes_list = codes->add_subcommand("list", "List registry codes");
  std::string check_label;
  auto* codes_check = codes->add_subcommand("check", "Build a code and validate its invariants");
  codes_check->add_option("label", check_label)->required();

  auto* decode = app.add_subcommand("decode", "Decode one syndrome file");
  std::string code_label, syndrome_path, type_name = "X";
  double p = 0.003;
  decode->add_option("--code", code_label)->required();
  decode->add_option("--syndrome", syndrome_path, "0/1 text or JSON array")->required();
  decode->add_option("--type", type_name, "Error type: X (uses hz) or Z (uses hx)");
  decode->add_option("--p", p, "Physical error rate for priors");
  decode->add_option("--decoder", c.decoder);
  decode->add_option("--trace-out", c.trace_out);

  auto* ler = app.add_subcommand("ler", "Estimate a logical error rate");
  add_run_flags(ler);
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep");
  add_run_flags(sweep_cmd);
  auto* bench = app.add_subcommand("bench", "Time decoders on one configuration");
  add_run_flags(bench);
  std::vector<std::string> bench_decoders;
  bench->add_option("--compare", bench_decoders, "Decoders to time (default: all)");
  auto* trace = app.add_subcommand("trace", "Dump the split trace of one shot");
  add_run_flags(trace);
  std::uint64_t shot = 0;
  trace->add_option("--shot", shot, "Shot index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*codes_list) return cmd_codes_list(c);
    if (*codes_check) return cmd_codes_check(c, check_label);
    if (*decode) return cmd_decode(c, code_label, syndrome_path, type_name, p);
    if (*ler) return cmd_ler(c, *ler);
    if (*sweep_cmd) return cmd_sweep(c, *sweep_cmd);
    if (*bench) return cmd_bench(c, *bench, bench_decoders);
    if (*trace) return cmd_trace(c, *trace, shot);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
