#include "sbf/cli.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "sbf/diagnostics.hpp"

namespace sbf::cli {
namespace {

using nlohmann::json;

FilterBackend backend_from_string(std::string_view name) {
  for (FilterBackend b : {FilterBackend::kStandardBloom, FilterBackend::kFingerprintPH}) {
    if (name == to_string(b)) return b;
  }
  throw ConfigError(fmt::format("unknown backend '{}' (standard_bloom, fingerprint_ph)", name));
}

FilterBackend backend_from_json(const json& v) {
  if (v.is_string()) return backend_from_string(v.get<std::string>());
  if (v.is_number()) {
    const double a = v.get<double>();
    for (FilterBackend b : {FilterBackend::kStandardBloom, FilterBackend::kFingerprintPH}) {
      if (std::abs(a - alpha(b)) < 5e-4) return b;
    }
    throw ConfigError(fmt::format(
        "alpha_backend {} matches no backend (0.5 fingerprint_ph, {:.7f} standard_bloom)", a,
        alpha(FilterBackend::kStandardBloom)));
  }
  throw ConfigError("alpha_backend must be a backend name or its alpha");
}

std::uint64_t count_field(const json& v, std::string_view name) {
  if (!v.is_number_unsigned()) {
    throw ConfigError(fmt::format("{} must be a nonnegative integer", name));
  }
  return v.get<std::uint64_t>();
}

double rate_field(const json& v, std::string_view name) {
  if (!v.is_number()) throw ConfigError(fmt::format("{} must be a number", name));
  const double x = v.get<double>();
  if (!(x >= 0.0 && x <= 1.0)) throw ConfigError(fmt::format("{} must lie in [0, 1]", name));
  return x;
}

OracleSettings parse_oracle(const json& v) {
  if (!v.is_object()) throw ConfigError("oracle must be an object");
  OracleSettings settings;
  json params = json::object();
  for (const auto& [key, value] : v.items()) {
    if (key == "kind") {
      const std::string kind = value.is_string() ? value.get<std::string>() : "";
      if (kind == "synthetic") {
        settings.kind = OracleSettings::Kind::kSynthetic;
      } else if (kind == "score") {
        settings.kind = OracleSettings::Kind::kScore;
      } else {
        throw ConfigError("oracle.kind must be \"synthetic\" or \"score\"");
      }
    } else if (key == "params") {
      if (!value.is_object()) throw ConfigError("oracle.params must be an object");
      params = value;
    } else {
      throw ConfigError(fmt::format("unknown oracle field '{}'", key));
    }
  }
  for (const auto& [key, value] : params.items()) {
    if (key == "smoothing" && settings.kind == OracleSettings::Kind::kScore) {
      if (!value.is_number() || !(value.get<double>() > 0.0)) {
        throw ConfigError("oracle.params.smoothing must be > 0");
      }
      settings.smoothing = value.get<double>();
    } else {
      throw ConfigError(fmt::format("unknown oracle parameter '{}'", key));
    }
  }
  return settings;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path));
}

void write_keys(const std::string& path, const KeySet& keys) {
  std::string text;
  for (const Key& k : keys) {
    text += to_hex(k.bytes());
    text += '\n';
  }
  write_file(path, text);
}

std::vector<Key> read_hex_keys(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<Key> keys;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      keys.push_back(key_from_hex(line));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("{}:{}: {}", path, line_no, e.what()));
    }
  }
  return keys;
}

struct ModelArgs {
  std::optional<double> alpha;
  std::string backend = std::string(to_string(FilterBackend::kFingerprintPH));
  double f_p = 0.0;
  double f_n = 0.0;

  void attach(CLI::App& app) {
    app.add_option("--alpha", alpha, "per-bit false-positive base")->check(CLI::Range(0.0, 1.0));
    app.add_option("--backend", backend, "take alpha from a backend")
        ->check(CLI::IsMember({"standard_bloom", "fingerprint_ph"}));
    app.add_option("--f-p", f_p, "oracle false-positive rate")->required();
    app.add_option("--f-n", f_n, "oracle false-negative rate")->required();
  }

  double resolved_alpha() const { return alpha ? *alpha : sbf::alpha(backend_from_string(backend)); }
};

void print_plan(std::ostream& out, const BudgetPlan& plan, const ModelParams& params) {
  fmt::print(out, "alpha      {}\n", params.alpha);
  fmt::print(out, "f_p        {}\n", params.f_p);
  fmt::print(out, "f_n        {}\n", params.f_n);
  fmt::print(out, "b          {}\n", plan.b);
  fmt::print(out, "b1         {}\n", plan.b1);
  fmt::print(out, "b2         {}\n", plan.b2);
  fmt::print(out, "model_fpr  {}\n", plan.modeled_fpr);
  if (!plan.note.empty()) fmt::print(out, "note       {}\n", plan.note);
}

struct ExperimentArgs {
  std::string config_path;
  unsigned threads = 1;
  bool deterministic = false;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--threads", threads, "probe worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--deterministic", deterministic, "skip timing so output is reproducible");
  }

  MeasureOptions options() const { return {threads, deterministic}; }
};

Workload workload_for(const ExperimentConfig& c) {
  return generate_workload(c.m, c.n_train_neg, c.n_test_neg, c.key_len, c.seed);
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  for (const auto& [key, v] : doc.items()) {
    if (key == "seed") {
      c.seed = count_field(v, key);
    } else if (key == "m") {
      c.m = count_field(v, key);
    } else if (key == "key_len") {
      c.key_len = count_field(v, key);
      if (c.key_len < 2 || c.key_len > kMaxKeyLength) {
        throw ConfigError(fmt::format("key_len must lie in [2, {}]", kMaxKeyLength));
      }
    } else if (key == "n_train_neg") {
      c.n_train_neg = count_field(v, key);
    } else if (key == "n_test_neg") {
      c.n_test_neg = count_field(v, key);
    } else if (key == "alpha_backend") {
      c.backend = backend_from_json(v);
    } else if (key == "f_p") {
      c.f_p = rate_field(v, key);
    } else if (key == "f_n") {
      c.f_n = rate_field(v, key);
    } else if (key == "budgets") {
      if (!v.is_array() || v.empty()) throw ConfigError("budgets must be a nonempty array");
      c.budgets.clear();
      for (const json& b : v) {
        if (!b.is_number() || !(b.get<double>() >= 0.0)) {
          throw ConfigError("budgets must be numbers >= 0");
        }
        c.budgets.push_back(b.get<double>());
      }
    } else if (key == "oracle") {
      c.oracle = parse_oracle(v);
    } else {
      throw ConfigError(fmt::format("unknown config field '{}'", key));
    }
  }
  if (c.oracle.kind == OracleSettings::Kind::kScore && (c.m == 0 || c.n_train_neg == 0)) {
    throw ConfigError("a score oracle needs m > 0 and n_train_neg > 0");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open config {}", path));
  return parse_config(read_file(path));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learned and sandwiched Bloom filters: planning, building and measurement"};
  app.name("sbf");
  app.require_subcommand(1);

  // optimize
  auto* optimize = app.add_subcommand("optimize", "optimal split of b bits per key");
  ModelArgs opt_model;
  double opt_b = 0;
  double opt_grid = 0;
  opt_model.attach(*optimize);
  optimize->add_option("--b", opt_b, "bits per key")->required()->check(CLI::NonNegativeNumber);
  optimize->add_option("--grid-step", opt_grid, "cross-check against a grid search")
      ->check(CLI::PositiveNumber);

  // model
  auto* model = app.add_subcommand("model", "evaluate the false-positive model");
  ModelArgs mod_model;
  std::optional<double> mod_b1, mod_b2, mod_b;
  bool mod_optimal = false;
  mod_model.attach(*model);
  auto* b1_opt = model->add_option("--b1", mod_b1, "initial filter bits per key");
  auto* b2_opt = model->add_option("--b2", mod_b2, "backup filter bits per key");
  auto* b_opt = model->add_option("--b", mod_b, "budget for --optimal");
  auto* optimal_flag = model->add_flag("--optimal", mod_optimal, "use the optimal split of --b");
  b1_opt->needs(b2_opt);
  b2_opt->needs(b1_opt);
  optimal_flag->needs(b_opt);
  b1_opt->excludes(optimal_flag);
  b2_opt->excludes(optimal_flag);

  // build
  auto* build = app.add_subcommand("build", "build a structure and write it to a file");
  ExperimentArgs build_exp;
  std::string build_kind, build_out, build_keys_out, build_neg_out;
  double build_b = 0;
  build_exp.attach(*build);
  build->add_option("--structure", build_kind, "plain, learned or sandwiched")->required();
  build->add_option("--b", build_b, "bits per key")->required()->check(CLI::NonNegativeNumber);
  build->add_option("--out", build_out, "structure file")->required();
  build->add_option("--keys-out", build_keys_out, "write the stored keys, hex per line");
  build->add_option("--negatives-out", build_neg_out, "write the test negatives, hex per line");

  // query
  auto* query = app.add_subcommand("query", "answer membership queries from a structure file");
  std::string query_file, query_keys;
  query->add_option("--structure-file", query_file, "file written by build")->required();
  query->add_option("--keys", query_keys, "keys to test, hex per line")->required();

  // measure
  auto* measure = app.add_subcommand("measure", "empirical false-positive rate of one structure");
  ExperimentArgs measure_exp;
  std::string measure_kind, measure_csv;
  double measure_b = 0;
  measure_exp.attach(*measure);
  measure->add_option("--structure", measure_kind, "plain, learned or sandwiched")->required();
  measure->add_option("--b", measure_b, "bits per key")->required()->check(CLI::NonNegativeNumber);
  measure->add_option("--csv", measure_csv, "write the report row as CSV");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "measure all structures over the config budgets");
  ExperimentArgs sweep_exp;
  std::string sweep_csv, sweep_json;
  sweep_exp.attach(*sweep_cmd);
  sweep_cmd->add_option("--csv", sweep_csv, "CSV report path");
  sweep_cmd->add_option("--json", sweep_json, "JSON report path");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "measure the oracle's error rates");
  std::string calibrate_config;
  calibrate->add_option("--config", calibrate_config, "experiment config (JSON)")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  ScopedWarningCapture warnings;
  auto flush_warnings = [&] {
    for (const std::string& w : warnings.messages()) fmt::print(err, "warning: {}\n", w);
  };
  try {
    if (*optimize) {
      const ModelParams params{opt_model.resolved_alpha(), opt_model.f_p, opt_model.f_n, opt_b};
      const BudgetPlan plan = optimize_backup_bits(params);
      print_plan(out, plan, params);
      if (params.f_n > 0.0 && params.f_n < 1.0) {
        fmt::print(out, "crossover  {}\n", crossover_level(params));
      }
      if (opt_grid > 0) {
        const BudgetPlan grid = grid_search_allocation(params, opt_grid);
        fmt::print(out, "grid_b2    {}\n", grid.b2);
        fmt::print(out, "grid_fpr   {}\n", grid.modeled_fpr);
      }
    } else if (*model) {
      const double a = mod_model.resolved_alpha();
      BudgetPlan plan;
      ModelParams params{a, mod_model.f_p, mod_model.f_n, 0};
      if (mod_optimal) {
        params.b = *mod_b;
        plan = optimize_backup_bits(params);
      } else if (mod_b1) {
        params.b = *mod_b1 + *mod_b2;
        plan.b = params.b;
        plan.b1 = *mod_b1;
        plan.b2 = *mod_b2;
        plan.alpha = a;
        plan.modeled_fpr = model_false_positive_rate(params, *mod_b1, *mod_b2);
      } else {
        throw ConfigError("model needs --b1 and --b2, or --b with --optimal");
      }
      print_plan(out, plan, params);
    } else if (*build) {
      const StructureKind kind = structure_kind_from_string(build_kind);
      const ExperimentConfig config = load_config(build_exp.config_path);
      const Workload w = workload_for(config);
      const TrainedOracle oracle = make_oracle(config, w);
      const BuiltStructure s = build_structure(kind, build_b, config, w, oracle);
      const Bytes bytes = s.serialize();
      write_file(build_out,
                 std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
      if (!build_keys_out.empty()) write_keys(build_keys_out, w.positives);
      if (!build_neg_out.empty()) write_keys(build_neg_out, w.test_negatives);
      fmt::print(out, "structure  {}\n", to_string(kind));
      fmt::print(out, "keys       {}\n", w.positives.size());
      fmt::print(out, "b1         {}\n", s.plan.b1);
      fmt::print(out, "b2         {}\n", s.plan.b2);
      fmt::print(out, "model_fpr  {}\n", s.plan.modeled_fpr);
      fmt::print(out, "bytes      {}\n", bytes.size());
    } else if (*query) {
      const std::string raw = read_file(query_file);
      const auto structure = deserialize_structure(std::span(
          reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
      for (const Key& k : read_hex_keys(query_keys)) {
        const bool hit = std::visit(
            [&](const auto& s) {
              if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Filter>) {
                return s.contains(k);
              } else {
                return s.query(k);
              }
            },
            structure);
        fmt::print(out, "{} {}\n", to_hex(k.bytes()), hit ? "yes" : "no");
      }
    } else if (*measure) {
      const StructureKind kind = structure_kind_from_string(measure_kind);
      const ExperimentConfig config = load_config(measure_exp.config_path);
      const Workload w = workload_for(config);
      const TrainedOracle oracle = make_oracle(config, w);
      const BuiltStructure s = build_structure(kind, measure_b, config, w, oracle);
      const std::vector<MeasurementReport> rows{
          measure_fpr(s, w.positives, w.test_negatives, measure_exp.options())};
      out << to_table(rows);
      if (!measure_csv.empty()) write_file(measure_csv, to_csv(rows));
    } else if (*sweep_cmd) {
      const ExperimentConfig config = load_config(sweep_exp.config_path);
      const Workload w = workload_for(config);
      const TrainedOracle oracle = make_oracle(config, w);
      const std::vector<MeasurementReport> rows = sweep(config, w, oracle, sweep_exp.options());
      out << to_table(rows);
      if (!sweep_csv.empty()) write_file(sweep_csv, to_csv(rows));
      if (!sweep_json.empty()) write_file(sweep_json, to_json(rows));
    } else if (*calibrate) {
      const ExperimentConfig config = load_config(calibrate_config);
      const Workload w = workload_for(config);
      const TrainedOracle oracle = make_oracle(config, w);
      fmt::print(out, "oracle     {}\n",
                 config.oracle.kind == OracleSettings::Kind::kScore ? "score" : "synthetic");
      fmt::print(out, "tau        {}\n", *oracle.oracle.tau());
      fmt::print(out, "size_bits  {}\n", oracle.profile.size_bits);
      fmt::print(out, "f_n        {}\n", oracle.profile.f_n);
      fmt::print(out, "f_p        {}\n", oracle.profile.f_p);
      if (!w.test_negatives.empty()) {
        const OracleProfile held_out = measure_profile(oracle.oracle, w.positives, w.test_negatives);
        fmt::print(out, "f_p_test   {}\n", held_out.f_p);
      }
    }
  } catch (const ContractViolation& e) {
    flush_warnings();
    fmt::print(err, "contract violation: {}\n", e.what());
    return kExitContractViolation;
  } catch (const std::invalid_argument& e) {
    flush_warnings();
    fmt::print(err, "error: {}\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    flush_warnings();
    fmt::print(err, "error: {}\n", e.what());
    return kExitFailure;
  }
  flush_warnings();
  return kExitOk;
}

}  // namespace sbf::cli
