#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "expfit/condnum.hpp"
#include "expfit/inverse.hpp"
#include "expfit/pde.hpp"
#include "expfit/prony.hpp"
#include "expfit/selftest.hpp"
#include "io.hpp"

using namespace expfit;
using namespace expfit::cli;

namespace {

struct RunContext {
  fs::path config_path;
  json config;
  fs::path config_dir;
  NumberFormat fmt;
  std::string hash;
  OutputSet* out = nullptr;

  fs::path resolve(const std::string& p) const {
    fs::path path(p);
    return path.is_absolute() ? path : config_dir / path;
  }
};

// ---- sweep ----

struct RegimeDefaults {
  std::vector<std::string> grid;
  const char* fixed;
  const char* epsilon;
};

RegimeDefaults regime_defaults(Regime r) {
  switch (r) {
    case Regime::R1: return {{"25", "35", "45", "55", "65"}, "0.1", "1e-6"};
    case Regime::R2: return {{"0.1", "0.5", "1.0", "1.5", "2.0", "2.5"}, "10", "0.1"};
    case Regime::R3: return {{"10", "20", "30", "40", "50", "65"}, "2.0", "1e-6"};
  }
  return regime_defaults(Regime::R1);
}

std::string sweep_csv(const SweepResult& res, const SweepConfig& cfg, const Stamp& stamp, const NumberFormat& fmt) {
  std::ostringstream os;
  os << stamp.csv_header() << "regime,axis,n_max,kind,metric,kappa_decimal,excluded\n";
  for (const auto& pt : res.points)
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j) {
        if (k == 1 && !cfg.empirical) continue;
        const bool missing = k == 1 && !pt.empirical_error.empty();
        os << regime_name(res.regime) << "," << pt.axis.to_string(12) << "," << recovered_count(pt.n1, cfg.eta) << ","
           << (k == 0 ? "analytic" : "prony_empirical") << "," << (j == 0 ? "lambda" : "y") << ","
           << (missing ? std::string("nan") : fmt(pt.kappa[k][j])) << "," << (pt.excluded[k][j] ? "true" : "false")
           << "\n";
      }
  return os.str();
}

json slopes_json(const SweepResult& res, const SweepConfig& cfg, const Stamp& stamp) {
  json j = stamp.to_json();
  j["regime"] = regime_name(res.regime);
  j["law"] = {{"c", cfg.law_c}, {"p", cfg.law_p}};
  json slopes = json::object();
  for (int k = 0; k < 2; ++k)
    for (int m = 0; m < 2; ++m) {
      std::string key = std::string(k == 0 ? "analytic" : "prony_empirical") + "_" + (m == 0 ? "lambda" : "y");
      const auto& f = res.fits[k][m];
      slopes[key] = f ? json{{"slope", real_json(f->slope)}, {"intercept", real_json(f->intercept)},
                             {"residual", real_json(f->residual)}}
                      : json(nullptr);
    }
  j["slopes"] = slopes;
  json pts = json::array();
  for (const auto& pt : res.points) {
    json e = {{"axis", pt.axis.to_string(12)}, {"prec_bits", pt.prec}, {"roundoff_dominated_lambda", pt.roundoff_dominated[0]},
              {"roundoff_dominated_y", pt.roundoff_dominated[1]}};
    if (!pt.empirical_error.empty()) e["empirical_error"] = pt.empirical_error;
    pts.push_back(e);
  }
  j["points"] = pts;
  return j;
}

void cmd_sweep(const RunContext& ctx) {
  const json& c = ctx.config;
  const std::string rname = string_field(c, "regime", "R1");
  Regime regime = rname == "R1" ? Regime::R1 : rname == "R2" ? Regime::R2 : rname == "R3" ? Regime::R3 : Regime::R1;
  if (rname != "R1" && rname != "R2" && rname != "R3") throw ConfigError("regime must be R1, R2 or R3");
  const prec_t cfg_prec = int_field<prec_t>(c, "prec_bits", 9000);
  const prec_t p_in = std::max<prec_t>(cfg_prec, 128);
  RegimeDefaults def = regime_defaults(regime);

  SweepConfig cfg;
  cfg.regime = regime;
  if (c.contains("grid")) {
    cfg.grid = real_list(c, "grid", p_in);
  } else {
    for (const auto& g : def.grid) cfg.grid.emplace_back(g, p_in);
  }
  cfg.fixed = real_field(c, "fixed", def.fixed, p_in);
  cfg.eta = real_field(c, "eta", "0.5", p_in);
  cfg.epsilon = real_field(c, "epsilon", def.epsilon, p_in);
  cfg.prec_bits = cfg_prec;
  cfg.n2 = int_field<std::size_t>(c, "n2", 1);
  cfg.empirical = c.value("empirical", true);
  if (c.contains("law")) {
    cfg.law_c = require(c.at("law"), "c").get<double>();
    cfg.law_p = require(c.at("law"), "p").get<double>();
  }
  if (cfg.eta <= 0 || cfg.eta > 1) throw ConfigError("eta must lie in (0, 1]");
  if (cfg.grid.size() < 4) throw ConfigError("grid needs at least 4 points");
  for (std::size_t i = 1; i < cfg.grid.size(); ++i)
    if (cfg.grid[i] <= cfg.grid[i - 1]) throw ConfigError("grid must be increasing");

  const Stamp stamp{cfg_prec, int_field<std::uint64_t>(c, "rng_seed", 0), ctx.hash};
  std::vector<double> powers;
  if (c.contains("decay_powers"))
    for (const auto& v : c.at("decay_powers")) powers.push_back(v.get<double>());
  const bool many = !powers.empty();
  if (!many) powers.push_back(cfg.law_p);
  for (double pw : powers) {
    SweepConfig run = cfg;
    run.law_p = pw;
    SweepResult res = regime_sweep(run);
    std::ostringstream suffix;
    suffix << rname;
    if (many) suffix << "_p" << pw;
    ctx.out->write("sweep_" + suffix.str() + ".csv", sweep_csv(res, run, stamp, ctx.fmt));
    ctx.out->write_json("slopes_" + suffix.str() + ".json", slopes_json(res, run, stamp));
    for (int k = 0; k < 2; ++k)
      for (int m = 0; m < 2; ++m)
        if (res.fits[k][m])
          std::cout << suffix.str() << " " << (k == 0 ? "analytic" : "prony_empirical") << " " << (m == 0 ? "lambda" : "y")
                    << " slope " << res.fits[k][m]->slope.to_string(6) << "\n";
  }
}

// ---- pde-gen ----

void cmd_pde_gen(const RunContext& ctx) {
  const json& c = ctx.config;
  const prec_t p = int_field<prec_t>(c, "prec_bits", kPdePrec);
  const std::uint64_t seed = int_field<std::uint64_t>(c, "rng_seed", 0);
  const Real delta = real_field(c, "delta", p), t_final = real_field(c, "t_final", p);
  if (delta <= 0) throw ConfigError("delta must be positive");
  if (t_final <= 0) throw ConfigError("t_final must be positive");
  const std::size_t n_x = int_field<std::size_t>(c, "n_x", 60), n_t = int_field<std::size_t>(c, "n_t", 51);
  if (n_x < 4) throw ConfigError("n_x must be at least 4");
  if (n_t < 2) throw ConfigError("n_t must be at least 2");
  std::size_t n_samples = 0;
  if (c.contains("n_samples"))
    n_samples = int_field<std::size_t>(c, "n_samples");
  else if (c.contains("n_prony"))
    n_samples = 2 * int_field<std::size_t>(c, "n_prony");
  else
    throw ConfigError("missing field 'n_samples' (or 'n_prony')");
  if (n_samples < 2) throw ConfigError("n_samples must be at least 2");
  if (delta * static_cast<long>(n_samples - 1) > t_final) throw ConfigError("samples extend past t_final");

  Potential q = potential_of(require(c, "potential"), seed, p);
  SineSeries f = c.contains("initial") ? sine_series_of(c.at("initial"), seed, p) : default_initial_condition(60, p);
  const json& meas = require(c, "measurement");
  const std::string kind = string_field(meas, "kind");
  if (kind != "point" && kind != "integral") throw ConfigError("measurement kind must be point or integral");

  ForwardSolution sol = forward_solve(q, f, t_final, n_x, n_t, p);
  RealVec times = uniform_times(delta, n_samples);
  json meta = Stamp{p, seed, ctx.hash}.to_json();
  MeasurementTrace tr;
  if (kind == "point") {
    Real x0 = real_field(meas, "x0", p);
    if (x0 <= 0 || x0 >= 1) throw ConfigError("x0 must lie in (0, 1)");
    tr = point_trace(sol, x0, times);
    meta["x0"] = real_json(x0);
  } else {
    MeasurementKernel kernel = sine_series_of(require(meas, "kernel"), seed + 1, p);
    tr = integral_trace(sol, kernel, times);
    meta["kernel_coeffs"] = real_list_json(kernel.coeffs);
  }
  const std::size_t eig_count = int_field<std::size_t>(c, "eig_count", std::min<std::size_t>(40, n_x - 2));
  const std::string stem = string_field(c, "name", "trace");
  meta["config"] = c;
  meta["source"] = source_name(tr.source);
  meta["delta"] = real_json(delta);
  meta["n_samples"] = n_samples;
  meta["potential"] = potential_json(q);
  meta["ground_truth"] = {{"eigenvalues", real_list_json(discrete_eigenvalues(q, n_x, eig_count, p))},
                          {"operator", "discrete interior collocation, n_x = " + std::to_string(n_x)}};
  ctx.out->write(stem + ".csv", trace_csv(tr, Stamp{p, seed, ctx.hash}));
  ctx.out->write_json(stem + ".json", meta);
  std::cout << "wrote " << n_samples << " samples to " << stem << ".csv\n";
}

// ---- recover ----

GroundTruth truth_of(const fs::path& path) {
  json meta = read_json(path);
  const json& gt = require(meta, "ground_truth");
  const prec_t p = int_field<prec_t>(meta, "prec_bits");
  return GroundTruth{potential_of(require(meta, "potential"), 0, p), real_list(gt, "eigenvalues", p)};
}

json report_json(const RecoveryReport& rep) {
  json j = {{"recovered_coeffs", real_list_json(rep.recovered_coeffs)},
            {"recovered_lambdas", real_list_json(rep.recovered_lambdas)},
            {"loss_final", real_json(rep.loss_final)},
            {"restarts_used", rep.restarts_used},
            {"iterations", rep.iterations},
            {"converged", rep.converged}};
  if (rep.metrics)
    j["metrics"] = {{"eig_rel_err", real_list_json(rep.metrics->eig_rel_err)},
                    {"coeff_abs_err", real_list_json(rep.metrics->coeff_abs_err)},
                    {"potential_l2_err", real_json(rep.metrics->potential_l2_err)}};
  return j;
}

void cmd_recover(const RunContext& ctx, const std::vector<std::size_t>& sweep_override) {
  const json& c = ctx.config;
  LoadedTrace lt = read_trace_csv(ctx.resolve(string_field(c, "trace")));
  std::optional<GroundTruth> truth;
  if (c.contains("truth")) truth = truth_of(ctx.resolve(string_field(c, "truth")));
  const std::size_t m_coeffs = int_field<std::size_t>(c, "M");
  if (m_coeffs < 1) throw ConfigError("M must be at least 1");
  const Real threshold = real_field(c, "amp_threshold", "1e-6", lt.prec);
  RecoverOptions opt;
  if (c.contains("optimizer")) {
    const json& o = c.at("optimizer");
    opt.restarts = int_field<std::size_t>(o, "restarts", opt.restarts);
    opt.max_iters = int_field<std::size_t>(o, "max_iters", opt.max_iters);
    opt.seed = int_field<std::uint64_t>(o, "seed", opt.seed);
    opt.prec = int_field<prec_t>(o, "prec_bits", opt.prec);
    if (o.contains("grad_step")) opt.grad_step = o.at("grad_step").get<double>();
  }
  std::vector<std::size_t> grid = sweep_override;
  if (grid.empty() && c.contains("sweep_m"))
    for (const auto& v : c.at("sweep_m")) grid.push_back(v.get<std::size_t>());

  const Stamp stamp{opt.prec, opt.seed, ctx.hash};
  json base = stamp.to_json();
  base["trace_prec_bits"] = lt.prec;
  base["config"] = c;
  if (grid.empty()) {
    const std::size_t n_prony = int_field<std::size_t>(c, "n_prony");
    if (lt.trace.samples.size() < 2 * n_prony) throw ConfigError("trace too short for n_prony");
    RecoveryReport rep = end_to_end_recover(lt.trace, n_prony, m_coeffs, threshold, opt, truth);
    json j = base;
    j["n_prony"] = n_prony;
    j["report"] = report_json(rep);
    ctx.out->write_json("report.json", j);
    std::cout << "recovered " << rep.recovered_lambdas.size() << " eigenvalues, loss " << rep.loss_final.to_string(6) << "\n";
    return;
  }
  if (!truth) throw ConfigError("--sweep-m needs a 'truth' metadata file");
  for (std::size_t m : grid)
    if (lt.trace.samples.size() < 2 * m) throw ConfigError("trace too short for m = " + std::to_string(m));
  std::vector<ConvergenceRow> rows = convergence_study(lt.trace, grid, m_coeffs, threshold, *truth, opt);
  std::ostringstream csv;
  csv << stamp.csv_header() << "m,n_recovered,n_used,eig_rel_err,coeff_abs_err,potential_l2_err\n";
  json reports = json::array();
  for (const auto& r : rows) {
    csv << r.m << "," << r.n_recovered << "," << r.n_used << "," << ctx.fmt(r.eig_rel_err) << "," << ctx.fmt(r.coeff_abs_err)
        << "," << ctx.fmt(r.potential_l2_err) << "\n";
    reports.push_back({{"m", r.m}, {"report", report_json(r.report)}});
    std::cout << "m " << r.m << " N0 " << r.n_recovered << " eig " << r.eig_rel_err.to_string(4) << " L2 "
              << r.potential_l2_err.to_string(4) << "\n";
  }
  json j = base;
  j["rows"] = reports;
  ctx.out->write("convergence.csv", csv.str());
  ctx.out->write_json("convergence.json", j);
}

// ---- fit ----

void cmd_fit(const RunContext& ctx) {
  const json& c = ctx.config;
  LoadedTrace lt = read_trace_csv(ctx.resolve(string_field(c, "trace")));
  const std::size_t n_prony = int_field<std::size_t>(c, "n_prony");
  if (n_prony < 1 || lt.trace.samples.size() < 2 * n_prony) throw ConfigError("trace too short for n_prony");
  const std::string solver = string_field(c, "solver", "filtered");
  PronyResult pr;
  if (solver == "filtered")
    pr = filtered_prony(lt.trace.samples, n_prony, lt.trace.delta, real_field(c, "amp_threshold", "1e-6", lt.prec));
  else if (solver == "classical")
    pr = classical_prony(RealVec(lt.trace.samples.begin(), lt.trace.samples.begin() + static_cast<long>(2 * n_prony)),
                         n_prony, lt.trace.delta);
  else
    throw ConfigError("solver must be filtered or classical");
  json j = Stamp{lt.prec, int_field<std::uint64_t>(c, "rng_seed", 0), ctx.hash}.to_json();
  j["config"] = c;
  j["delta"] = real_json(pr.delta);
  j["nodes"] = real_list_json(pr.nodes);
  j["exponents"] = real_list_json(pr.exponents);
  j["amplitudes"] = real_list_json(pr.amplitudes);
  j["n_recovered"] = pr.n_recovered;
  j["diagnostics"] = {{"hankel_rank_gap", real_json(pr.diagnostics.hankel_rank_gap)},
                      {"max_root_residual", real_json(pr.diagnostics.max_root_residual)},
                      {"discarded_roots", pr.diagnostics.discarded_roots},
                      {"complex_roots_retained", pr.diagnostics.complex_roots_retained},
                      {"rank_deficient", pr.diagnostics.rank_deficient}};
  ctx.out->write_json("prony.json", j);
  std::cout << "recovered " << pr.n_recovered << " exponents\n";
}

// ---- analysis-selftest ----

bool cmd_selftest(const RunContext& ctx) {
  const std::uint64_t seed = ctx.config.is_object() ? int_field<std::uint64_t>(ctx.config, "rng_seed", 1) : 1;
  bool all = true;
  json checks = json::array();
  for (const auto& r : analysis_selftest(seed)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    all = all && r.passed;
    checks.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  }
  if (ctx.out) {
    json j = Stamp{192, seed, ctx.hash}.to_json();
    j["checks"] = checks;
    ctx.out->write_json("selftest.json", j);
  }
  return all;
}

bool config_class(Errc e) {
  switch (e) {
    case Errc::InvalidArgument:
    case Errc::InvalidModel:
    case Errc::ParseError:
    case Errc::InsufficientSamples:
    case Errc::TimeOutOfRange: return true;
    default: return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-precision exponential fitting experiments"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  bool full = false;
  std::vector<std::size_t> sweep_m;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("config", config_path, "JSON config file");
    if (config_required) opt->required();
    sub->add_option("-o,--out", out_dir, "Output directory")->capture_default_str();
    sub->add_flag("--full-precision", full, "Write CSV numbers with every carried digit");
  };
  auto* sweep = app.add_subcommand("sweep", "Condition-number regime sweep");
  auto* pde = app.add_subcommand("pde-gen", "Solve the forward PDE and write a measurement trace");
  auto* rec = app.add_subcommand("recover", "Prony eigenvalues, then the potential");
  auto* fit = app.add_subcommand("fit", "One-shot Prony on a trace file");
  auto* self = app.add_subcommand("analysis-selftest", "Run the analysis oracle suite");
  add_common(sweep, true);
  add_common(pde, true);
  add_common(rec, true);
  add_common(fit, true);
  add_common(self, false);
  rec->add_option("--sweep-m", sweep_m, "Run the convergence study over these n_prony values")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  OutputSet out{fs::path(out_dir)};
  RunContext ctx;
  ctx.fmt.full = full;
  ctx.out = &out;
  try {
    if (!config_path.empty()) {
      ctx.config_path = config_path;
      ctx.config = read_json(config_path);
      if (!ctx.config.is_object()) throw ConfigError(config_path + ": top level must be an object");
      ctx.config_dir = fs::path(config_path).parent_path();
    }
    ctx.hash = config_hash(ctx.config);
    if (sweep->parsed()) cmd_sweep(ctx);
    if (pde->parsed()) cmd_pde_gen(ctx);
    if (rec->parsed()) cmd_recover(ctx, sweep_m);
    if (fit->parsed()) cmd_fit(ctx);
    if (self->parsed()) return cmd_selftest(ctx) ? 0 : 1;
  } catch (const ConfigError& e) {
    out.remove_all();
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    out.remove_all();
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    out.remove_all();
    std::cerr << "error: " << e.what() << "\n";
    return config_class(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    out.remove_all();
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
