// Command-line front end: metric spec checking, SD-family generation,
// geodesic tracing and null-plane classification.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nsdt/connection.hpp"
#include "nsdt/curvature.hpp"
#include "nsdt/errors.hpp"
#include "nsdt/geodesics.hpp"
#include "nsdt/io.hpp"
#include "nsdt/killing.hpp"
#include "nsdt/metric.hpp"
#include "nsdt/tetrad.hpp"
#include "nsdt/twistor.hpp"

namespace {

using nsdt::Json;

uint64_t default_seed() {
  if (const char* env = std::getenv("NSDT_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw nsdt::SpecParseError("NSDT_SEED must be an unsigned integer");
    }
  }
  return 20060711ULL;
}

std::string field_residual(const nsdt::ScalarField& f, int probes) {
  bool exact = f.is_polynomial() && f.poly().is_zero();
  return nsdt::residual_string(exact, exact ? 0.0 : f.max_abs_on_probes(probes));
}

struct CheckContext {
  double tolerance = 1e-9;
  int probes = 32;
  uint64_t seed = 0;
  std::optional<std::pair<nsdt::ScalarField, nsdt::ScalarField>> killing;  // (K0, K1)
};

// One check entry: status in {pass, fail, skipped}; skipped carries a
// reason and does not affect the exit code.
struct CheckEntry {
  std::string status;
  std::string reason;
  Json details = Json::object();
};

Json entry_json(const CheckEntry& e) {
  Json j;
  j["status"] = e.status;
  if (!e.reason.empty()) j["reason"] = e.reason;
  if (!e.details.empty()) j["details"] = e.details;
  return j;
}

// Full pipeline with dependency-aware skipping. Throws nothing: every
// stage failure is folded into its entry.
std::pair<Json, bool> run_check_suite(const nsdt::MetricSpec& spec, const CheckContext& ctx) {
  std::vector<std::pair<std::string, CheckEntry>> entries;
  bool all_pass = true;
  auto push = [&](const std::string& name, CheckEntry e) {
    if (e.status == "fail") all_pass = false;
    entries.emplace_back(name, std::move(e));
  };

  const nsdt::NeutralMetric& m = spec.metric;
  bool special = m.backend() == nsdt::MetricBackend::SpecialForm;

  // sd: the five-PDE system (special-form only).
  bool sd_pass = false;
  if (special) {
    CheckEntry e;
    auto rep = nsdt::check_sd_system(m, ctx.tolerance, ctx.probes);
    sd_pass = rep.pass;
    e.status = rep.pass ? "pass" : "fail";
    for (size_t i = 0; i < 5; ++i)
      e.details[nsdt::SdSystemReport::kNames[i]] = field_residual(rep.residuals[i], ctx.probes);
    push("sd", std::move(e));
  } else {
    push("sd", {"skipped", "self-duality PDE system is defined for the special-form backend", {}});
  }

  // Tetrad-based stages share the foliation tetrad and components.
  std::optional<nsdt::NullTetrad> tetrad;
  std::optional<nsdt::ConnectionComponents> comps;
  std::string tetrad_error;
  try {
    tetrad = nsdt::construct_foliation_tetrad(m);
    comps = nsdt::extract_components(nsdt::connection_form_in_tetrad(m, *tetrad, 1e-8));
  } catch (const std::exception& ex) {
    tetrad_error = ex.what();
  }

  auto skip_no_tetrad = [&](const std::string& name) {
    push(name, {"skipped", "no adapted tetrad: " + tetrad_error, {}});
  };

  // structural: vertical-ideal and commutator identities.
  if (tetrad) {
    CheckEntry e;
    auto rep = nsdt::verify_structural_identities(m, 1e-8, ctx.probes);
    bool ok = rep.pass;
    for (const auto& id : rep.identities)
      e.details[id.name] = nsdt::residual_string(id.exact, id.max_abs);
    if (sd_pass) {
      auto sd_rep = nsdt::verify_sd_component_identities(m, 1e-8, ctx.probes);
      ok = ok && sd_rep.pass;
      for (const auto& id : sd_rep.identities)
        e.details[id.name] = nsdt::residual_string(id.exact, id.max_abs);
    }
    e.status = ok ? "pass" : "fail";
    push("structural", std::move(e));
  } else {
    skip_no_tetrad("structural");
  }

  // sd_weyl: the curvature oracle (anti-self-dual Weyl part).
  bool weyl_sd = false;
  if (tetrad) {
    CheckEntry e;
    try {
      auto dec = nsdt::weyl_decomposition(m, 1e-8, ctx.probes);
      weyl_sd = dec.sd;
      e.status = dec.sd ? "pass" : "fail";
      e.details["asd_norm"] = dec.asd_exact_zero ? Json("exact-zero") : Json(dec.asd_norm);
    } catch (const std::exception& ex) {
      e.status = "fail";
      e.reason = ex.what();
    }
    push("sd_weyl", std::move(e));
  } else {
    skip_no_tetrad("sd_weyl");
  }

  // integrable: the Lax-pair criterion.
  std::optional<nsdt::TwistorLift> lift;
  std::optional<nsdt::LaxReport> lax;
  if (tetrad) {
    CheckEntry e;
    lift = nsdt::build_twistor_lift(*comps, *tetrad);
    lax = nsdt::check_lax_integrability(*lift, ctx.tolerance, 8, ctx.seed);
    e.status = lax->pass ? "pass" : "fail";
    for (size_t k = 0; k < 4; ++k)
      e.details["Q2 coeff zeta^" + std::to_string(k)] = field_residual(lax->q2_residuals[k], ctx.probes);
    for (size_t k = 0; k < 5; ++k)
      e.details["(p0 + zeta p1) Q1 coeff zeta^" + std::to_string(k)] =
          field_residual(lax->vertical_derivative_residuals[k], ctx.probes);
    e.details["max bracket residual"] = lax->max_bracket_residual;
    push("integrable", std::move(e));
  } else {
    skip_no_tetrad("integrable");
  }

  // basic: requires self-duality (the criterion's hypothesis).
  if (!tetrad) {
    skip_no_tetrad("basic");
  } else if (!lax->pass) {
    push("basic", {"skipped", "requires a self-dual metric (integrability failed)", {}});
  } else {
    CheckEntry e;
    auto rep = nsdt::check_basic(*lift, *lax, ctx.tolerance, ctx.probes);
    e.status = rep.basic ? "pass" : "fail";
    for (int i = 0; i < 2; ++i)
      for (size_t j = 0; j < 4; ++j)
        e.details["p" + std::to_string(i) + " q" + std::to_string(j)] =
            field_residual(rep.residuals[static_cast<size_t>(i)][j], ctx.probes);
    push("basic", std::move(e));
  }

  // sd_foliation: canonical-connection curvature has no ASD part.
  if (tetrad) {
    CheckEntry e;
    auto rep = nsdt::check_sd_foliation(*comps, *tetrad, ctx.tolerance, ctx.probes);
    e.status = rep.pass ? "pass" : "fail";
    e.details["connection_exists"] = rep.connection_exists;
    static const char* comp_names[3] = {"p0 (a+d)(e0)", "p1 (a+d)(e1)",
                                        "p0 (a+d)(e1) + p1 (a+d)(e0)"};
    static const char* dtau_names[3] = {"dtau(e0,p0)", "dtau(e1,p1)",
                                        "dtau(e0,p1) + dtau(e1,p0)"};
    for (size_t i = 0; i < 3; ++i) {
      e.details[comp_names[i]] = field_residual(rep.component_residuals[i], ctx.probes);
      e.details[dtau_names[i]] = field_residual(rep.dtau_residuals[i], ctx.probes);
    }
    push("sd_foliation", std::move(e));
  } else {
    skip_no_tetrad("sd_foliation");
  }

  // killing: only when a vertical candidate field was supplied.
  if (!ctx.killing) {
    push("killing", {"skipped", "no Killing candidate supplied (use --killing)", {}});
  } else if (!tetrad) {
    skip_no_tetrad("killing");
  } else {
    CheckEntry e;
    try {
      auto rep = nsdt::check_conformal_killing(m, *tetrad, *comps, ctx.killing->first,
                                               ctx.killing->second, ctx.tolerance, ctx.probes);
      e.status = rep.pass ? "pass" : "fail";
      e.details["eta max abs"] = rep.eta.max_abs_on_probes(ctx.probes);
      e.details["lie_pass"] = rep.lie_pass;
      e.details["component_pass"] = rep.component_pass;
    } catch (const std::exception& ex) {
      e.status = "fail";
      e.reason = ex.what();
    }
    push("killing", std::move(e));
  }

  Json checks = Json::object();
  for (auto& [name, e] : entries) checks[name] = entry_json(e);
  Json report;
  report["metric"] = spec.name;
  switch (m.backend()) {
    case nsdt::MetricBackend::SpecialForm: report["backend"] = "special-form"; break;
    case nsdt::MetricBackend::ProductSphere: report["backend"] = "product-sphere"; break;
    case nsdt::MetricBackend::Generic: report["backend"] = "generic"; break;
  }
  report["seed"] = ctx.seed;
  report["checks"] = checks;
  (void)weyl_sd;
  return {report, all_pass};
}

void print_text_report(const Json& report, std::ostream& out) {
  out << "metric: " << report["metric"].get<std::string>() << "\n";
  out << "backend: " << report["backend"].get<std::string>() << "\n";
  for (const auto& [name, entry] : report["checks"].items()) {
    out << name << ": " << entry["status"].get<std::string>();
    if (entry.contains("reason")) out << " (" << entry["reason"].get<std::string>() << ")";
    out << "\n";
    if (entry.contains("details"))
      for (const auto& [k, v] : entry["details"].items())
        out << "  " << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
  }
  if (report.contains("timings"))
    out << "elapsed_ms: " << report["timings"]["total_ms"].dump() << "\n";
}

int cmd_check(const std::string& spec_path, const std::string& format, double tolerance,
              int probes, uint64_t seed, bool no_timings, const std::string& killing_path) {
  auto t0 = std::chrono::steady_clock::now();
  nsdt::MetricSpec spec = nsdt::load_metric_spec(spec_path);
  CheckContext ctx;
  ctx.tolerance = tolerance;
  ctx.probes = probes;
  ctx.seed = seed;
  if (!killing_path.empty()) {
    std::ifstream in(killing_path);
    if (!in) throw nsdt::SpecParseError("cannot open killing file: " + killing_path);
    Json kj;
    try {
      in >> kj;
    } catch (const Json::exception& e) {
      throw nsdt::SpecParseError(std::string("malformed killing JSON: ") + e.what());
    }
    if (!kj.contains("K0") || !kj.contains("K1"))
      throw nsdt::SpecParseError("killing file needs 'K0' and 'K1'");
    ctx.killing = {nsdt::ScalarField(nsdt::polynomial_from_json(kj["K0"])),
                   nsdt::ScalarField(nsdt::polynomial_from_json(kj["K1"]))};
  }
  auto [report, all_pass] = run_check_suite(spec, ctx);
  if (!no_timings) {
    auto dt = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    report["timings"] = Json{{"total_ms", dt}};
  }
  if (format == "json")
    std::cout << report.dump(2) << "\n";
  else
    print_text_report(report, std::cout);
  return all_pass ? 0 : 1;
}

int cmd_generate(unsigned fiber_degree, unsigned base_degree, uint64_t seed, unsigned count,
                 const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto family = nsdt::generate_sd_family(fiber_degree, base_degree, seed, count);
  unsigned written = 0;
  for (size_t i = 0; i < family.size(); ++i) {
    const auto& p = family[i][0];
    const auto& q = family[i][1];
    const auto& r = family[i][2];
    auto rep = nsdt::check_sd_system(p, q, r);
    if (!rep.pass) {
      std::cerr << "generated triple " << i << " failed its own SD check\n";
      return 1;
    }
    nsdt::MetricSpec spec;
    std::ostringstream name;
    name << "sd_f" << fiber_degree << "_b" << base_degree << "_s" << seed << "_" << i;
    spec.name = name.str();
    spec.metric = nsdt::NeutralMetric::special_form(p, q, r);
    nsdt::save_metric_spec(spec, (std::filesystem::path(out_dir) / (spec.name + ".json")).string());
    ++written;
  }
  std::cout << "wrote " << written << " spec files to " << out_dir << "\n";
  return 0;
}

int cmd_trace(const std::string& metric_arg, const std::vector<double>& init, size_t steps,
              double step_size, const std::string& out_csv) {
  nsdt::NeutralMetric m;
  if (metric_arg == "std-s2xs2")
    m = nsdt::NeutralMetric::product_sphere();
  else
    m = nsdt::load_metric_spec(metric_arg).metric;

  nsdt::GeodesicState s0;
  for (int i = 0; i < 4; ++i) {
    s0.x[i] = init[static_cast<size_t>(i)];
    s0.v[static_cast<size_t>(i)] = init[static_cast<size_t>(i) + 4];
  }
  nsdt::TracerConfig cfg;
  cfg.step = step_size;
  cfg.max_steps = steps;
  auto path = nsdt::trace_geodesic(m, s0, cfg);

  if (!out_csv.empty()) {
    std::ofstream out(out_csv);
    if (!out) {
      std::cerr << "cannot open output csv: " << out_csv << "\n";
      return 1;
    }
    out << "t,x0,x1,x2,x3,v0,v1,v2,v3,null_defect\n";
    out.precision(17);
    for (size_t i = 0; i < path.states.size(); ++i) {
      const auto& st = path.states[i];
      out << st.t;
      for (int k = 0; k < 4; ++k) out << "," << st.x[k];
      for (int k = 0; k < 4; ++k) out << "," << st.v[static_cast<size_t>(k)];
      out << "," << path.defects[i] << "\n";
    }
  }

  auto verdict = nsdt::detect_closure(path, 1e-2);
  std::cout.precision(5);
  if (verdict.closed)
    std::cout << "closed, period ~ " << verdict.period << "\n";
  else
    std::cout << "open\n";
  std::cout << "max null defect: " << path.max_null_defect << "\n";
  return 0;
}

int cmd_classify(const std::string& metric_arg, const std::vector<double>& point,
                 const std::vector<double>& v, const std::vector<double>& w) {
  nsdt::NeutralMetric m;
  if (metric_arg == "std-s2xs2")
    m = nsdt::NeutralMetric::product_sphere();
  else
    m = nsdt::load_metric_spec(metric_arg).metric;
  nsdt::ChartPoint p;
  nsdt::Vec4 vv{}, ww{};
  for (int i = 0; i < 4; ++i) {
    p[i] = point[static_cast<size_t>(i)];
    vv[static_cast<size_t>(i)] = v[static_cast<size_t>(i)];
    ww[static_cast<size_t>(i)] = w[static_cast<size_t>(i)];
  }
  switch (nsdt::classify_null_plane(vv, ww, m, p)) {
    case nsdt::PlaneClass::Alpha: std::cout << "Alpha\n"; break;
    case nsdt::PlaneClass::Beta: std::cout << "Beta\n"; break;
    case nsdt::PlaneClass::NotTotallyNull: std::cout << "NotTotallyNull\n"; break;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"local geometry checks for neutral self-dual 4-metrics"};
  app.require_subcommand(1);

  uint64_t seed = 0;
  try {
    seed = default_seed();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  // check
  auto* check = app.add_subcommand("check", "run the check suite on a metric spec");
  std::string spec_path, report_format = "text", killing_path;
  double tolerance = 1e-9;
  int probes = 32;
  bool no_timings = false;
  check->add_option("spec", spec_path, "metric spec JSON file")->required();
  check->add_option("--report", report_format, "report format")->check(CLI::IsMember({"json", "text"}));
  check->add_option("--tolerance", tolerance, "numeric residual tolerance");
  check->add_option("--probes", probes, "probe points for callback fields");
  check->add_option("--seed", seed, "probe RNG seed");
  check->add_option("--killing", killing_path, "vertical Killing candidate JSON ({K0, K1})");
  check->add_flag("--no-timings", no_timings, "omit timings (byte-stable reports)");

  // generate
  auto* gen = app.add_subcommand("generate", "generate exact SD special-form metrics");
  unsigned fiber_degree = 2, base_degree = 1, count = 1;
  std::string out_dir = ".";
  gen->add_option("--fiber-degree", fiber_degree, "max degree in (x2,x3)");
  gen->add_option("--base-degree", base_degree, "max degree in (x0,x1)");
  gen->add_option("--seed", seed, "sampling seed");
  gen->add_option("--count", count, "number of metrics");
  gen->add_option("--out", out_dir, "output directory")->required();

  // trace
  auto* trace = app.add_subcommand("trace", "trace a geodesic and test closure");
  std::string trace_metric = "std-s2xs2", out_csv;
  std::vector<double> init;
  size_t steps = 10000;
  double step_size = 1e-3;
  trace->add_option("--metric", trace_metric, "std-s2xs2 or a spec file");
  trace->add_option("--init", init, "x0 x1 x2 x3 v0 v1 v2 v3")->expected(8)->required();
  trace->add_option("--steps", steps, "number of RK4 steps");
  trace->add_option("--step-size", step_size, "RK4 step");
  trace->add_option("--out", out_csv, "CSV output path");

  // classify
  auto* classify = app.add_subcommand("classify", "classify a totally null 2-plane");
  std::string cls_metric = "std-s2xs2";
  std::vector<double> cls_point, cls_v, cls_w;
  classify->add_option("--metric", cls_metric, "std-s2xs2 or a spec file");
  classify->add_option("--point", cls_point, "chart point")->expected(4)->required();
  classify->add_option("--v", cls_v, "first spanning vector")->expected(4)->required();
  classify->add_option("--w", cls_w, "second spanning vector")->expected(4)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*check)
      return cmd_check(spec_path, report_format, tolerance, probes, seed, no_timings, killing_path);
    if (*gen) return cmd_generate(fiber_degree, base_degree, seed, count, out_dir);
    if (*trace) return cmd_trace(trace_metric, init, steps, step_size, out_csv);
    if (*classify) return cmd_classify(cls_metric, cls_point, cls_v, cls_w);
  } catch (const nsdt::SpecParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
