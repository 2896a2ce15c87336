// gwlab: command-line front end for the exact engine, the simulator and the
// convergence experiments.
//
// Exit status: 0 success / PASS, 1 verdict FAIL, 2 usage or configuration error.

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <system_error>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gwlab/gwlab.hpp"

#ifndef GWLAB_BANDS_PATH
#define GWLAB_BANDS_PATH "config/bands.json"
#endif

namespace {

using namespace gwlab;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

/// Raised for invalid parameter values; carries the offending field.
struct UsageError : std::runtime_error {
  UsageError(std::string f, const std::string& what) : std::runtime_error(what), field(std::move(f)) {}
  std::string field;
};

const std::map<std::string, std::string> kExamples = {
    {"validate", "gwlab validate --model config/models/zoo2.json"},
    {"constants", "gwlab constants --model config/models/zoo3.json --format json"},
    {"extinction", "gwlab extinction --model config/models/zoo2.json --n 1000 --type 1"},
    {"conditional", "gwlab conditional --model config/models/zoo2.json --n 2000 --m 1800 --s 1 0.995"},
    {"mc", "gwlab mc --model config/models/zoo2.json --replicates 1000000 --seed 42 --n 30"},
    {"theorem", "gwlab theorem death --model config/models/zoo2.json --n 20000 --k 200 --lambda 1"},
    {"lemma", "gwlab lemma laplace_w --model config/models/zoo2.json --theta-min 1e-5 --theta-max 1e-2"},
    {"pilot", "gwlab pilot --model config/models/zoo2.json --bands config/bands.json"},
};

std::string fmt(double x) { return format_double(x); }

struct Common {
  std::string model_path;
  std::string output;
  std::string format = "csv";
  bool plotdata = false;
};

void add_common(CLI::App* cmd, Common& c, bool needs_output) {
  cmd->add_option("--model", c.model_path, "model configuration file (JSON)")->required();
  if (needs_output) {
    cmd->add_option("--output", c.output, "artifact path (default: $GWLAB_OUTPUT_DIR/<experiment>_<model>_<time>.csv)");
    cmd->add_option("--format", c.format, "artifact format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_flag("--plotdata", c.plotdata, "also write two-column files per curve");
  } else {
    cmd->add_option("--output", c.output, "write the table to this file as well as stdout");
    cmd->add_option("--format", c.format, "table format")->check(CLI::IsMember({"csv", "json"}));
  }
}

ModelConfig load_model(const std::string& path) { return load_model_config(path); }

std::string utc_stamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

std::filesystem::path default_artifact(const std::string& experiment, const std::string& model, const std::string& ext) {
  const char* dir = std::getenv("GWLAB_OUTPUT_DIR");
  std::filesystem::path base = dir && *dir ? dir : ".";
  return base / (experiment + "_" + model + "_" + utc_stamp() + "." + ext);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("output", "cannot write '" + path.string() + "'");
  out << text;
}

// "# key: value" comments become meta entries; the first other line is the header.
std::string csv_to_json(const std::string& csv) {
  json j{{"meta", json::object()}, {"notes", json::array()}, {"columns", json::array()}, {"rows", json::array()}};
  std::istringstream in(csv);
  std::string line;
  bool header = true;
  auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) out.push_back(cell);
    if (!l.empty() && l.back() == ',') out.emplace_back();
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = line.substr(line.find_first_not_of("# "));
      const auto colon = body.find(": ");
      if (colon == std::string::npos) {
        j["notes"].push_back(body);
      } else {
        j["meta"][body.substr(0, colon)] = body.substr(colon + 2);
      }
      continue;
    }
    if (header) {
      for (auto& col : split(line)) j["columns"].push_back(col);
      header = false;
      continue;
    }
    json row = json::array();
    for (const auto& cell : split(line)) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (!cell.empty() && res.ec == std::errc() && res.ptr == cell.data() + cell.size()) {
        row.push_back(v);
      } else if (cell == "nan") {
        row.push_back(nullptr);
      } else {
        row.push_back(cell);
      }
    }
    j["rows"].push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

// Tables are built as commented CSV; JSON output is derived from that text.
void emit_table(const Common& c, const std::string& csv) {
  const std::string text = c.format == "json" ? csv_to_json(csv) : csv;
  std::cout << text;
  if (!c.output.empty()) write_file(c.output, text);
}

void emit_json(const Common& c, const std::string& text) {
  std::cout << text;
  if (!c.output.empty()) write_file(c.output, text);
}

// --------------------------------------------------------------------------

int cmd_validate(const Common& c) {
  const auto cfg = load_model(c.model_path);
  const auto v = validate_hypothesis_A(cfg.spec, cfg.validation);
  const std::size_t n = cfg.spec.types();
  std::ostringstream out;
  if (c.format == "json") {
    json j;
    j["model"] = cfg.name;
    j["types"] = n;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row;
      for (std::size_t k = 0; k < n; ++k) row.push_back(v.moments.mean(i, k));
      j["mean_matrix"].push_back(row);
    }
    j["half_variance"] = v.moments.half_variance;
    j["valid"] = v.ok();
    j["violations"] = json::array();
    for (const auto& x : v.violations) j["violations"].push_back(x.describe());
    emit_json(c, j.dump(2) + "\n");
    return v.ok() ? kOk : kFail;
  } else {
    out << "# model: " << cfg.name << "\n# types: " << n << "\ntype,b";
    for (std::size_t k = 0; k < n; ++k) out << ",m_" << (k + 1);
    out << "\n";
    for (std::size_t i = 0; i < n; ++i) {
      out << (i + 1) << "," << fmt(v.moments.half_variance[i]);
      for (std::size_t k = 0; k < n; ++k) out << "," << fmt(v.moments.mean(i, k));
      out << "\n";
    }
    for (const auto& x : v.violations) out << "# violation: " << x.describe() << "\n";
    out << "# valid: " << (v.ok() ? "yes" : "no") << "\n";
  }
  emit_table(c, out.str());
  return v.ok() ? kOk : kFail;
}

int cmd_constants(const Common& c) {
  const auto cfg = load_model(c.model_path);
  const auto v = validate_hypothesis_A(cfg.spec, cfg.validation);
  const auto cs = constant_set(v.moments);
  std::optional<IdentityCheck> id;
  if (cs.n >= 2) id = check_identity_c1N(cs);
  std::ostringstream out;
  if (c.format == "json") {
    json j{{"model", cfg.name}, {"types", cs.n}, {"gamma", cs.gamma}, {"c", cs.c}, {"D", cs.D}, {"g", cs.g}};
    if (id) j["identity_c1N"] = {{"holds", id->holds}, {"residual", id->residual}};
    emit_json(c, j.dump(2) + "\n");
    return !id || id->holds ? kOk : kFail;
  } else {
    out << "# model: " << cfg.name << "\ntype,gamma,c,D,g\n";
    for (std::size_t i = 0; i < cs.n; ++i)
      out << (i + 1) << "," << fmt(cs.gamma[i]) << "," << fmt(cs.c[i]) << "," << (i < cs.D.size() ? fmt(cs.D[i]) : "")
          << "," << fmt(cs.g[i]) << "\n";
    if (id) out << "# identity c_1N: residual " << fmt(id->residual) << (id->holds ? " (holds)" : " (FAILS)") << "\n";
  }
  emit_table(c, out.str());
  return !id || id->holds ? kOk : kFail;
}

int cmd_extinction(const Common& c, long long n, std::size_t type) {
  if (n < 1) throw UsageError("n", "n must be >= 1");
  const auto cfg = load_model(c.model_path);
  if (type < 1 || type > cfg.spec.types()) throw UsageError("type", "type must lie in 1.." + std::to_string(cfg.spec.types()));
  const auto table = build_survival_table(cfg.spec, n);
  std::ostringstream out;
  out << "# model: " << cfg.name << "\n# type: " << type << "\n# horizon: " << table.horizon() << "\n";
  if (table.precision_loss_at()) out << "# precision loss at n = " << *table.precision_loss_at() << "\n";
  out << "n,survival,pmf,precision_ok\n";
  for (long long k = 1; k <= table.horizon(); ++k) {
    bool ok = true;
    double p = std::nan("");
    try {
      p = extinction_time_pmf(table, type - 1, k);
    } catch (const PrecisionLoss&) {
      ok = false;
    }
    out << k << "," << fmt(table.d(type - 1, k)) << "," << fmt(p) << "," << (ok ? 1 : 0) << "\n";
  }
  emit_table(c, out.str());
  return table.precision_loss_at() ? kFail : kOk;
}

int cmd_conditional(const Common& c, long long n, long long m, const std::vector<double>& s, long long t) {
  const auto cfg = load_model(c.model_path);
  const std::size_t types = cfg.spec.types();
  if (n < 1) throw UsageError("n", "n must be >= 1");
  if (m < 0 || m >= n) throw UsageError("m", "need 0 <= m < n");
  if (s.size() != types) throw UsageError("s", "expected " + std::to_string(types) + " values");
  for (double x : s)
    if (!(x >= 0.0 && x <= 1.0)) throw UsageError("s", "values must lie in [0,1]");
  if (t < 0 || t > m) throw UsageError("t", "need 0 <= t <= m");
  const auto table = build_survival_table(cfg.spec, n);
  if (table.horizon() < n) throw PrecisionLoss(*table.precision_loss_at(), "survival table truncated before n");
  const Point sp = point_from_values(s);
  const double value = censored_transform(cfg.spec, &table, sp, t, m, n);
  std::ostringstream out;
  out << "# model: " << cfg.name << "\nn,m,t,value\n" << n << "," << m << "," << t << "," << fmt(value) << "\n";
  emit_table(c, out.str());
  return kOk;
}

struct McArgs {
  std::uint64_t replicates = 1'000'000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  long long n = 30;
  std::string target = "pmf";
  long long m = -1;
  double s = 0.5;
};

int cmd_mc(const Common& c, const McArgs& a) {
  if (a.replicates < 1) throw UsageError("replicates", "replicates must be >= 1");
  if (a.n < 1) throw UsageError("n", "n must be >= 1");
  const auto cfg = load_model(c.model_path);
  SimConfig sc;
  sc.master_seed = a.seed;
  sc.replicates = a.replicates;
  sc.workers = a.workers;
  sc.max_steps = a.n;
  const auto table = build_survival_table(cfg.spec, a.n);
  std::ostringstream out;
  out << "# model: " << cfg.name << "\n# seed: " << a.seed << "\n# replicates: " << a.replicates << "\n";
  if (a.target == "pmf") {
    const auto est = estimate_pmf_T(cfg.spec, sc);
    out << "n,mc,std_error,exact,z\n";
    bool ok = true;
    for (long long k = 1; k <= a.n; ++k) {
      const double exact = extinction_time_pmf(table, 0, k);
      const auto& e = est.pmf[static_cast<std::size_t>(k)];
      const double z = e.std_error > 0 ? (e.estimate - exact) / e.std_error : 0.0;
      ok = ok && std::abs(e.estimate - exact) <= 4.0 * std::sqrt(exact * (1 - exact) / double(a.replicates));
      out << k << "," << fmt(e.estimate) << "," << fmt(e.std_error) << "," << fmt(exact) << "," << fmt(z) << "\n";
    }
    out << "# verdict: " << (ok ? "PASS" : "FAIL") << " (all bins within 4 sigma)\n";
    emit_table(c, out.str());
    return ok ? kOk : kFail;
  }
  // conditional: E[s^{Z_N(m)} | T_N = n]
  if (a.m < 0 || a.m >= a.n) throw UsageError("m", "need 0 <= m < n");
  if (!(a.s >= 0.0 && a.s <= 1.0)) throw UsageError("s", "s must lie in [0,1]");
  sc.snapshot_times = {a.m};
  const std::size_t last = cfg.spec.types() - 1;
  const double s = a.s;
  const auto est = conditional_estimate(cfg.spec, sc, a.n,
                                        [&](const TrajectorySummary& tr) { return std::pow(s, double(tr.snapshots[0][last])); });
  Point sp(cfg.spec.types(), Prob::one());
  sp[last] = Prob::from_value(s);
  const double exact = conditional_transform(cfg.spec, table, sp, a.m, a.n);
  const double z = est.std_error > 0 ? (est.estimate - exact) / est.std_error : 0.0;
  out << "n,m,s,mc,std_error,hits,acceptance,exact,z\n"
      << a.n << "," << a.m << "," << fmt(s) << "," << fmt(est.estimate) << "," << fmt(est.std_error) << ","
      << est.replicates << "," << fmt(est.acceptance_rate) << "," << fmt(exact) << "," << fmt(z) << "\n";
  emit_table(c, out.str());
  return std::abs(z) <= 4.0 ? kOk : kFail;
}

// --------------------------------------------------------------------------
// Experiments

struct ExperimentArgs {
  std::string id;
  std::string bands = GWLAB_BANDS_PATH;
  std::vector<long long> n_grid, k;
  long long n = -1;
  std::vector<double> lambda, x, s, exponents;
  double s_lower = -1;
  std::size_t type = 0;
  double theta_min = -1, theta_max = -1;
  std::size_t points = 0;
};

void add_experiment_options(CLI::App* cmd, ExperimentArgs& a) {
  cmd->add_option("--bands", a.bands, "pre-registered band file");
  cmd->add_option("--n-grid", a.n_grid, "grid of n values");
  cmd->add_option("--n", a.n, "target n");
  cmd->add_option("--k", a.k, "k values (n - m)");
  cmd->add_option("--lambda", a.lambda, "lambda values");
  cmd->add_option("--x", a.x, "x = m/n values");
  cmd->add_option("--s", a.s, "s_N values");
  cmd->add_option("--exponents", a.exponents, "growth exponents for k or l");
  cmd->add_option("--s-lower", a.s_lower, "argument for types 1..N-1");
  cmd->add_option("--type", a.type, "type index for survival experiments (1-based)");
  cmd->add_option("--theta-min", a.theta_min, "smallest theta");
  cmd->add_option("--theta-max", a.theta_max, "largest theta");
  cmd->add_option("--points", a.points, "number of theta points");
}

ExperimentParams resolve(const ExperimentArgs& a, const ModelConfig& cfg) {
  if (!is_known_experiment(a.id)) throw UsageError("id", "unknown experiment '" + a.id + "'");
  ExperimentParams p = default_params(a.id);
  if (!a.n_grid.empty()) p.n_grid = a.n_grid;
  if (a.n >= 0) p.n = a.n;
  if (!a.k.empty()) p.k = a.k;
  if (!a.lambda.empty()) p.lambda = a.lambda;
  if (!a.x.empty()) p.x = a.x;
  if (!a.s.empty()) p.s = a.s;
  if (!a.exponents.empty()) p.exponents = a.exponents;
  if (a.s_lower >= 0) p.s_lower = a.s_lower;
  if (a.type > 0) p.type = a.type - 1;
  if (a.theta_min > 0) p.theta_min = a.theta_min;
  if (a.theta_max > 0) p.theta_max = a.theta_max;
  if (a.points > 0) p.points = a.points;

  if (p.type >= cfg.spec.types()) throw UsageError("type", "type must lie in 1.." + std::to_string(cfg.spec.types()));
  for (long long n : p.n_grid)
    if (n < 2) throw UsageError("n-grid", "grid values must be >= 2");
  for (double l : p.lambda)
    if (!(l > 0)) throw UsageError("lambda", "lambda must be > 0");
  for (double x : p.x)
    if (!(x > 0 && x < 1)) throw UsageError("x", "x must lie in (0,1)");
  for (double s : p.s)
    if (!(s >= 0 && s < 1)) throw UsageError("s", "s must lie in [0,1)");
  if (!(p.s_lower >= 0 && p.s_lower <= 1)) throw UsageError("s-lower", "s-lower must lie in [0,1]");
  if (!(p.theta_min < p.theta_max)) throw UsageError("theta-min", "theta-min must be below theta-max");
  if (p.points < 2) throw UsageError("points", "need at least 2 points");
  const bool uses_n = a.id == "finalstage" || a.id == "death" || a.id == "deathfin";
  if (uses_n) {
    if (p.n < 2) throw UsageError("n", "n must be >= 2");
    for (long long k : p.k)
      if (k < 0 || k >= p.n) throw UsageError("k", "need 0 <= k < n");
    if (a.id == "death")
      for (long long k : p.k)
        if (k < 1) throw UsageError("k", "k must be >= 1");
  }
  if (a.id == "deathfin" && cfg.spec.types() < 1) throw UsageError("model", "empty model");
  const bool needs_w = a.id == "laplace_w" || a.id == "diff2" || a.id == "censored_w" || a.id == "diff3";
  if (needs_w && cfg.spec.types() < 2) throw UsageError("model", "experiment '" + a.id + "' needs at least two types");
  if (a.id == "diff1") {
    if (p.k.size() != p.n_grid.size()) throw UsageError("k", "diff1 needs one k per entry of --n-grid");
    for (std::size_t i = 0; i < p.k.size(); ++i)
      if (p.k[i] < 1 || p.k[i] >= p.n_grid[i]) throw UsageError("k", "need 1 <= k < n");
  }
  return p;
}

/// Two-column files: x = first varying parameter, y = ratio (value when the limit is 0);
/// one file per combination of the other varying parameters.
void write_plotdata(const ConvergenceReport& rep, const std::filesystem::path& base) {
  const std::size_t np = rep.param_names.size();
  std::vector<bool> varies(np, false);
  for (const auto& r : rep.rows)
    for (std::size_t i = 0; i < np; ++i)
      if (r.params[i] != rep.rows.front().params[i]) varies[i] = true;
  std::size_t xaxis = 0;
  for (std::size_t i = 0; i < np; ++i)
    if (varies[i]) {
      xaxis = i;
      break;
    }
  std::map<std::string, std::string> curves;
  for (const auto& r : rep.rows) {
    std::string label;
    for (std::size_t i = 0; i < np; ++i)
      if (varies[i] && i != xaxis) label += (label.empty() ? "" : "_") + rep.param_names[i] + "=" + fmt(r.params[i]);
    if (label.empty()) label = "ratio";
    const double y = r.limit != 0.0 ? r.ratio : r.value;
    curves[label] += fmt(r.params[xaxis]) + " " + fmt(y) + "\n";
  }
  for (const auto& [label, body] : curves) {
    auto path = base;
    path += "_" + label + ".dat";
    write_file(path, "# " + rep.param_names[xaxis] + " " + (rep.rows.front().limit != 0.0 ? "ratio" : "value") +
                         "\n" + body);
  }
}

int cmd_experiment(const Common& c, const ExperimentArgs& a, const std::string& kind) {
  const auto cfg = load_model(c.model_path);
  const auto v = validate_hypothesis_A(cfg.spec, cfg.validation);
  if (!v.ok()) {
    std::string what = "model violates strong criticality:";
    for (const auto& x : v.violations) what += " " + x.describe();
    throw UsageError("model", what);
  }
  const ExperimentParams p = resolve(a, cfg);
  std::optional<BandRegistry> bands;
  if (std::filesystem::exists(a.bands)) bands = BandRegistry::load(a.bands);
  const auto ctx = ModelContext::make(cfg.name, cfg.spec);
  const auto rep = run_experiment(ctx, a.id, p, bands ? &*bands : nullptr);

  std::vector<std::string> header{
      "command: " + kind + " " + a.id,
      "model_file: " + c.model_path,
      "params: " + p.to_json().dump(),
      "bands_file: " + (bands ? a.bands : std::string("(none)")),
  };
  const auto verdict = report_verdict(rep);
  std::string artifact;
  if (c.format == "json") {
    json j;
    j["config"] = {{"command", kind + " " + a.id}, {"model_file", c.model_path}, {"params", p.to_json()}};
    j["param_names"] = rep.param_names;
    for (const auto& r : rep.rows)
      j["rows"].push_back({{"params", r.params}, {"value", r.value}, {"limit", r.limit}, {"ratio", r.ratio},
                           {"precision_ok", r.precision_ok}});
    j["verdict"] = verdict;
    artifact = j.dump(2) + "\n";
  } else {
    artifact = report_csv(rep, header) + "# verdict: " + verdict.dump() + "\n";
  }
  const std::filesystem::path path =
      c.output.empty() ? default_artifact(a.id, cfg.name, c.format) : std::filesystem::path(c.output);
  write_file(path, artifact);
  if (c.plotdata) {
    auto base = path;
    base.replace_extension();
    write_plotdata(rep, base);
  }
  std::cout << report_csv(rep, header);
  json summary = verdict;
  summary["artifact"] = path.string();
  std::cout << summary.dump(2) << "\n";
  return rep.pass ? kOk : kFail;
}

int cmd_pilot(const Common& c, const std::string& bands_path, std::vector<std::string> ids) {
  const auto cfg = load_model(c.model_path);
  const auto v = validate_hypothesis_A(cfg.spec, cfg.validation);
  if (!v.ok()) throw UsageError("model", "model violates strong criticality");
  if (ids.empty()) ids = {"foster", "local", "finalstage", "death", "deathfin", "laplace_w",
                          "diff2", "censored_w", "diff3"};
  for (const auto& id : ids)
    if (!is_known_experiment(id)) throw UsageError("experiments", "unknown experiment '" + id + "'");
  BandRegistry reg;
  if (std::filesystem::exists(bands_path)) reg = BandRegistry::load(bands_path);
  reg.set_rule(kBandRule);
  const auto ctx = ModelContext::make(cfg.name, cfg.spec);
  for (const auto& id : ids) {
    if (cfg.spec.types() < 2 && (id == "laplace_w" || id == "diff2" || id == "censored_w" || id == "diff3")) continue;
    const bool ok = register_pilot(ctx, id, default_params(id), reg);
    const auto band = reg.find(band_key(id, ctx.name));
    std::cout << band_key(id, ctx.name) << ": "
              << (ok && band ? "[" + fmt(band->lo) + ", " + fmt(band->hi) + "]" : std::string("no band")) << "\n";
  }
  write_file(bands_path, reg.dump());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gwlab: decomposable critical multitype branching processes"};
  app.require_subcommand(1);
  Common common;

  auto* validate = app.add_subcommand("validate", "check strong criticality and print moments");
  add_common(validate, common, false);
  auto* constants = app.add_subcommand("constants", "print gamma, c, D, g");
  add_common(constants, common, false);

  long long ext_n = 100;
  std::size_t ext_type = 1;
  auto* extinction = app.add_subcommand("extinction", "survival probabilities and extinction-time law");
  add_common(extinction, common, false);
  extinction->add_option("--n", ext_n, "horizon");
  extinction->add_option("--type", ext_type, "starting type (1-based)");

  long long cond_n = 0, cond_m = 0, cond_t = 0;
  std::vector<double> cond_s;
  auto* conditional = app.add_subcommand("conditional", "E[prod s_j^{Z_j(m)} I(t) | T_N = n]");
  add_common(conditional, common, false);
  conditional->add_option("--n", cond_n, "extinction time")->required();
  conditional->add_option("--m", cond_m, "observation time")->required();
  conditional->add_option("--s", cond_s, "one argument per type")->required();
  conditional->add_option("--t", cond_t, "censoring time (0: none)");

  McArgs mc_args;
  auto* mc = app.add_subcommand("mc", "Monte Carlo cross-check against the exact engine");
  add_common(mc, common, false);
  mc->add_option("--replicates", mc_args.replicates, "number of replicates");
  mc->add_option("--seed", mc_args.seed, "master seed");
  mc->add_option("--workers", mc_args.workers, "worker threads (0: all cores)");
  mc->add_option("--n", mc_args.n, "pmf horizon, or the conditioning time");
  mc->add_option("--target", mc_args.target, "pmf or conditional")->check(CLI::IsMember({"pmf", "conditional"}));
  mc->add_option("--m", mc_args.m, "observation time for --target conditional");
  mc->add_option("--s", mc_args.s, "argument of the last type for --target conditional");

  ExperimentArgs exp_args;
  auto* theorem = app.add_subcommand("theorem", "limit theorem drivers: finalstage death deathfin foster local");
  add_common(theorem, common, true);
  theorem->add_option("id", exp_args.id, "experiment")->required()->check(CLI::IsMember(theorem_ids()));
  add_experiment_options(theorem, exp_args);
  auto* lemma = app.add_subcommand("lemma", "auxiliary drivers: laplace_w diff1 diff2 diff3 censored_w no_previous");
  add_common(lemma, common, true);
  lemma->add_option("id", exp_args.id, "experiment")->required()->check(CLI::IsMember(lemma_ids()));
  add_experiment_options(lemma, exp_args);

  std::string pilot_bands = GWLAB_BANDS_PATH;
  std::vector<std::string> pilot_ids;
  auto* pilot = app.add_subcommand("pilot", "run pilots at half the target n and write tolerance bands");
  add_common(pilot, common, false);
  pilot->add_option("--bands", pilot_bands, "band file to create or update");
  pilot->add_option("--experiments", pilot_ids, "experiments to pilot (default: all banded ones)");

  std::string active;
  try {
    app.parse(argc, argv);
    active = app.get_subcommands().front()->get_name();
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    for (auto* sub : app.get_subcommands())
      std::cerr << "example:\n  " << kExamples.at(sub->get_name()) << "\n";
    return kUsage;
  }

  try {
    if (active == "validate") return cmd_validate(common);
    if (active == "constants") return cmd_constants(common);
    if (active == "extinction") return cmd_extinction(common, ext_n, ext_type);
    if (active == "conditional") return cmd_conditional(common, cond_n, cond_m, cond_s, cond_t);
    if (active == "mc") return cmd_mc(common, mc_args);
    if (active == "theorem" || active == "lemma") return cmd_experiment(common, exp_args, active);
    if (active == "pilot") return cmd_pilot(common, pilot_bands, pilot_ids);
  } catch (const UsageError& e) {
    std::cerr << "error: invalid value for '" << e.field << "': " << e.what() << "\nexample:\n  " << kExamples.at(active)
              << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\nexample model stanza:\n"
              << "  {\"types\": 1, \"laws\": [{\"type\": 1, \"kind\": \"product\",\n"
              << "    \"children\": [{\"type\": 1, \"family\": \"geometric\", \"mean\": 1}]}]}\n";
    return kUsage;
  } catch (const InvalidMoments& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const AcceptanceTooLow& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << "\nexample:\n  " << kExamples.at(active) << "\n";
    return kUsage;
  }
  return kUsage;
}
