#include "hbopt/experiment.hpp"

#include "hbopt/problem_io.hpp"
#include "hbopt/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

namespace hbopt {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kCertifiedMargin = 1e-3;
constexpr double kOrderingEps = 1e-8;

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!ok.count(item.key())) throw InvalidArgument("unknown key '" + item.key() + "' in " + where);
  }
}

Vector vector_of(const json& values, const std::string& what) {
  require(values.is_array(), what + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i].get<double>();
  return v;
}

AlphaRule alpha_rule_from_string(const std::string& name) {
  if (name == "thm1") return AlphaRule::kTheorem1;
  if (name == "cor1") return AlphaRule::kCorollary1;
  if (name == "cor2") return AlphaRule::kCorollary2;
  throw InvalidArgument("unknown alpha_rule '" + name + "' (expected thm1, cor1 or cor2)");
}

AlphaRule alpha_rule_of(Regime regime) {
  switch (regime) {
    case Regime::kTheorem1: return AlphaRule::kTheorem1;
    case Regime::kCorollary1Optimal: return AlphaRule::kCorollary1;
    case Regime::kCorollary2Overestimated: return AlphaRule::kCorollary2;
  }
  return AlphaRule::kCorollary1;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

SchemeEntry parse_scheme(const json& doc, const ExperimentConfig& cfg) {
  require(doc.is_object(), "each scheme must be a JSON object");
  reject_unknown_keys(doc,
                      {"kind", "label", "alpha", "alpha_rule", "theta", "kappa_estimate", "step", "cd_alpha",
                       "restart_period", "max_iter"},
                      "scheme");
  SchemeEntry e;
  e.config.kind = scheme_kind_from_string(doc.at("kind").get<std::string>());
  e.label = doc.value("label", std::string());
  e.config.max_iter = doc.value("max_iter", cfg.max_iter);
  e.config.stop_gap = cfg.stop_gap;
  e.config.stop_residual = cfg.stop_residual;
  e.config.record_wall_time = cfg.record_wall_time;
  if (doc.contains("step")) e.config.step = doc["step"].get<double>();
  if (doc.contains("cd_alpha")) e.config.cd_alpha = doc["cd_alpha"].get<double>();
  if (doc.contains("restart_period")) e.config.restart_period = doc["restart_period"].get<long>();
  if (doc.contains("theta")) e.theta = doc["theta"].get<double>();
  if (doc.contains("kappa_estimate")) e.kappa_estimate = doc["kappa_estimate"].get<double>();
  require(e.config.max_iter >= 1, "max_iter must be positive");

  if (e.config.kind == SchemeKind::kVFista) {
    if (doc.contains("alpha")) {
      require(!doc.contains("alpha_rule"), "give either alpha or alpha_rule, not both");
      e.config.alpha = doc["alpha"].get<double>();
      e.alpha_rule = AlphaRule::kExplicit;
    } else if (doc.contains("alpha_rule")) {
      e.alpha_rule = alpha_rule_from_string(doc["alpha_rule"].get<std::string>());
    } else if (cfg.regime) {
      e.alpha_rule = alpha_rule_of(*cfg.regime);
    } else {
      throw InvalidArgument("VFISTA needs alpha, alpha_rule or a top-level regime");
    }
    if (e.alpha_rule == AlphaRule::kCorollary2) {
      require(e.theta || e.kappa_estimate, "alpha_rule cor2 needs theta or kappa_estimate");
    }
  }
  return e;
}

void assign_labels(std::vector<SchemeEntry>& schemes) {
  std::map<std::string, int> seen;
  for (auto& s : schemes) {
    if (s.label.empty()) s.label = lower(to_string(s.config.kind));
    const int count = seen[s.label]++;
    if (count > 0) s.label += "_" + std::to_string(count + 1);
    for (char c : s.label) {
      require(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.',
              "scheme labels may only contain letters, digits, '_', '-' and '.'");
    }
  }
}

std::optional<double> problem_kappa(const CompositeProblem& p) {
  const auto& g = p.geometry();
  if (g && g->kappa) return g->kappa;
  return std::nullopt;
}

PreparedScheme prepare_scheme(const SchemeEntry& entry, const CompositeProblem& p) {
  PreparedScheme out;
  out.entry = entry;
  SchemeConfig& cfg = out.entry.config;
  const std::optional<double> kappa = problem_kappa(p);
  const double unit_step = 1.0 / p.lipschitz();
  const bool unit = !cfg.step || *cfg.step == unit_step;

  switch (cfg.kind) {
    case SchemeKind::kFB:
      if (kappa) out.theoretical_decrement = *kappa;
      break;
    case SchemeKind::kFistaRestart:
      if (kappa) out.theoretical_decrement = std::sqrt(*kappa) / std::numbers::e;
      break;
    case SchemeKind::kVFista: {
      const std::optional<double> k_tune = entry.kappa_estimate ? entry.kappa_estimate : kappa;
      switch (entry.alpha_rule) {
        case AlphaRule::kExplicit:
          break;
        case AlphaRule::kTheorem1: {
          require(k_tune.has_value(), "alpha_rule thm1 needs kappa (problem mu or kappa_estimate)");
          const RateCertificate c = theorem1_certificate(*k_tune);
          cfg.alpha = c.alpha;
          if (kappa && *k_tune == *kappa) out.certificate = c;
          break;
        }
        case AlphaRule::kCorollary1: {
          require(k_tune.has_value(), "alpha_rule cor1 needs kappa (problem mu or kappa_estimate)");
          const RateCertificate c = corollary1_certificate(*k_tune);
          cfg.alpha = c.alpha;
          if (kappa && *k_tune == *kappa) out.certificate = c;
          break;
        }
        case AlphaRule::kCorollary2: {
          const double theta = entry.theta ? *entry.theta : 1.5 * std::sqrt(*entry.kappa_estimate);
          out.entry.theta = theta;
          cfg.alpha = 1.0 - theta;
          if (kappa) out.certificate = corollary2_certificate(theta, *kappa);
          break;
        }
      }
      if (!unit) out.certificate.reset();
      if (out.certificate) out.theoretical_decrement = out.certificate->certified_decrement();
      break;
    }
    case SchemeKind::kFistaBT:
    case SchemeKind::kFistaCD:
      break;
  }
  validate_config(cfg, p);
  return out;
}

fs::path output_dir_of(const ExperimentConfig& cfg) {
  fs::path dir = cfg.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) dir = env;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InvalidArgument("output directory not writable: " + dir.string());
  return dir;
}

std::string eps_key(double eps) {
  std::ostringstream s;
  s << std::setprecision(0) << std::scientific << eps;
  return s.str();
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json optional_json(const std::optional<long>& v) { return v ? json(*v) : json(nullptr); }
json optional_json(const std::optional<bool>& v) { return v ? json(*v) : json(nullptr); }

bool trusted_fstar(const CompositeProblem& p) {
  const auto& g = p.geometry();
  return g && (!g->numeric_reference || g->f_star_error_bound <= 1e-10 * std::max(1.0, std::abs(g->f_star)));
}

std::string gnuplot_script(const Experiment& exp) {
  std::ostringstream s;
  s << "set datafile separator ','\n"
    << "set logscale y\n"
    << "set xlabel 'iteration'\n"
    << "set ylabel 'F(x_n) - F*'\n"
    << "set key outside right\n"
    << "plot ";
  for (std::size_t i = 0; i < exp.schemes.size(); ++i) {
    const std::string& label = exp.schemes[i].entry.label;
    if (i) s << ", \\\n     ";
    s << "'" << label << ".csv' using 1:2 skip 1 with lines title '" << label << "'";
  }
  s << "\n";
  return s.str();
}

void warn_unreached(const Experiment& exp, const std::vector<RunResult>& runs, std::ostream& err) {
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!runs[i].reached_target()) {
      err << "warning: " << exp.schemes[i].entry.label << " hit max_iter before its stop criterion\n";
    }
  }
}

std::vector<CheckReport> scheme_checks(const Experiment& exp, const PreparedScheme& ps, const RunResult& run) {
  std::vector<CheckReport> checks;
  const CompositeProblem& p = exp.problem;
  const bool trusted = trusted_fstar(p);
  const std::vector<double> gaps = run.gaps();
  const auto& g = p.geometry();

  if (ps.certificate && trusted) {
    const RateCertificate& c = *ps.certificate;
    checks.push_back(check_bound_envelope(gaps, c.prefactor_C, c.per_iter_factor, 1e-9,
                                          lower(to_string(c.regime)) + "_gap_bound"));
  }
  if (ps.certificate && p.has_projection() && !run.iterates.empty()) {
    const RateCertificate& c = *ps.certificate;
    if (c.regime == Regime::kTheorem1) {
      const EnergyTrace et = energy_theorem1(p, run.iterates, c.kappa);
      checks.push_back(check_theorem1_decay(et, c.kappa));
      checks.push_back(check_lemma7(et));
      checks.push_back(check_step_envelope_theorem1(et));
      checks.push_back(check_lemma_tech2(et, c.alpha));
      checks.push_back(check_projection_signs(et));
    } else {
      const EnergyTrace et = energy_theorem2(p, run.iterates, c.omega, c.tau, c.kappa);
      checks.push_back(check_theorem2_decay(et));
      checks.push_back(check_step_envelope_theorem2(et));
      checks.push_back(check_lemma_tech2(et, c.alpha));
      checks.push_back(check_projection_signs(et));
    }
  }
  // Classical sublinear envelopes for the momentum-free and FISTA baselines.
  if (trusted && p.has_projection() && gaps.size() > 1) {
    const double d0 = *g->dist_xstar(exp.x0);
    const double lip = p.lipschitz();
    const bool unit = !run.config.step || *run.config.step == 1.0 / lip;
    if (unit && run.config.kind == SchemeKind::kFB) {
      CheckReport r;
      r.name = "fb_sublinear_envelope";
      r.slack_used = 1e-9 * std::abs(gaps.front());
      for (std::size_t n = 1; n < gaps.size(); ++n) {
        r.observe(static_cast<long>(n), gaps[n] - lip * d0 * d0 / (2.0 * static_cast<double>(n)));
      }
      checks.push_back(r);
    }
    if (unit && run.config.kind == SchemeKind::kFistaBT) {
      CheckReport r;
      r.name = "fista_sublinear_envelope";
      r.slack_used = 1e-9 * std::abs(gaps.front());
      for (std::size_t n = 1; n < gaps.size(); ++n) {
        const double np1 = static_cast<double>(n + 1);
        r.observe(static_cast<long>(n), gaps[n] - 2.0 * lip * d0 * d0 / (np1 * np1));
      }
      checks.push_back(r);
    }
  }
  return checks;
}

void write_json(const fs::path& path, const json& doc) { write_file_atomic(path, doc.dump(2) + "\n"); }

}  // namespace

ExperimentConfig parse_experiment(const json& doc, const fs::path& base_dir) {
  require(doc.is_object(), "experiment config must be a JSON object");
  reject_unknown_keys(doc,
                      {"problem", "problem_file", "schemes", "regime", "output_dir", "seed", "budgets", "emit",
                       "x0", "ode"},
                      "experiment config");
  ExperimentConfig cfg;
  if (doc.contains("problem")) {
    require(!doc.contains("problem_file"), "give either problem or problem_file, not both");
    cfg.problem = doc["problem"];
  } else if (doc.contains("problem_file")) {
    fs::path file = doc["problem_file"].get<std::string>();
    if (file.is_relative()) file = base_dir / file;
    std::ifstream in(file);
    if (!in) throw InvalidArgument("cannot read problem file " + file.string());
    cfg.problem = json::parse(in);
  } else {
    throw InvalidArgument("experiment config needs problem or problem_file");
  }
  if (doc.contains("regime")) cfg.regime = regime_from_string(doc["regime"].get<std::string>());
  if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();
  cfg.seed = doc.value("seed", std::uint64_t{0});
  if (doc.contains("budgets")) {
    const json& b = doc["budgets"];
    reject_unknown_keys(b, {"max_iter", "stop_gap", "stop_residual", "record_wall_time"}, "budgets");
    cfg.max_iter = b.value("max_iter", cfg.max_iter);
    cfg.stop_gap = b.value("stop_gap", 0.0);
    cfg.stop_residual = b.value("stop_residual", 0.0);
    cfg.record_wall_time = b.value("record_wall_time", false);
  }
  require(cfg.max_iter >= 1, "max_iter budget must be positive");
  require(cfg.stop_gap >= 0.0 && cfg.stop_residual >= 0.0, "stop tolerances must be nonnegative");
  if (doc.contains("emit")) {
    const json& e = doc["emit"];
    reject_unknown_keys(e, {"csv", "json_report", "gnuplot_script"}, "emit");
    cfg.emit.csv = e.value("csv", true);
    cfg.emit.json_report = e.value("json_report", true);
    cfg.emit.gnuplot_script = e.value("gnuplot_script", false);
  }
  if (doc.contains("x0")) cfg.x0 = vector_of(doc["x0"], "x0");
  if (doc.contains("ode")) {
    const json& o = doc["ode"];
    reject_unknown_keys(o, {"friction", "t0", "t_end", "dt", "v0"}, "ode");
    if (o.contains("friction")) {
      if (o["friction"].is_number()) {
        cfg.ode.friction = "value";
        cfg.ode.friction_value = o["friction"].get<double>();
      } else {
        cfg.ode.friction = o["friction"].get<std::string>();
        require(cfg.ode.friction == "thm3" || cfg.ode.friction == "prop1",
                "ode.friction must be thm3, prop1 or a number");
      }
    }
    cfg.ode.t0 = o.value("t0", cfg.ode.t0);
    cfg.ode.t_end = o.value("t_end", cfg.ode.t_end);
    cfg.ode.dt = o.value("dt", cfg.ode.dt);
    require(cfg.ode.t_end > cfg.ode.t0 && cfg.ode.dt > 0.0, "ode budget needs t_end > t0 and dt > 0");
    if (o.contains("v0")) cfg.ode.v0 = vector_of(o["v0"], "ode.v0");
  }
  if (doc.contains("schemes")) {
    require(doc["schemes"].is_array(), "schemes must be an array");
    for (const auto& s : doc["schemes"]) cfg.schemes.push_back(parse_scheme(s, cfg));
  }
  assign_labels(cfg.schemes);
  return cfg;
}

ExperimentConfig load_experiment(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_experiment(doc, path.parent_path());
}

Experiment prepare_experiment(const ExperimentConfig& cfg) {
  CompositeProblem problem = problem_from_json(cfg.problem);
  Vector x0;
  if (cfg.x0) {
    require(cfg.x0->size() == problem.dim(), "x0 has the wrong dimension");
    x0 = *cfg.x0;
  } else {
    GaussianStream stream(cfg.seed + 1);
    x0 = stream.vector(problem.dim());
  }
  std::vector<PreparedScheme> schemes;
  for (const auto& entry : cfg.schemes) schemes.push_back(prepare_scheme(entry, problem));
  const std::string hash = hex_digest(problem_hash(problem));
  return Experiment{cfg, std::move(problem), std::move(x0), std::move(schemes), hash};
}

std::vector<RunResult> run_schemes(const Experiment& exp, bool keep_iterates) {
  std::vector<std::future<RunResult>> futures;
  futures.reserve(exp.schemes.size());
  for (const auto& ps : exp.schemes) {
    SchemeConfig cfg = ps.entry.config;
    cfg.keep_iterates = keep_iterates;
    const auto policy = exp.schemes.size() > 1 ? std::launch::async : std::launch::deferred;
    futures.push_back(std::async(policy, [&exp, cfg] { return run(exp.problem, cfg, exp.x0); }));
  }
  std::vector<RunResult> out;
  out.reserve(futures.size());
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

std::optional<long> iterations_to(const RunResult& run, double eps) {
  for (const auto& r : run.records) {
    if (r.f_gap <= eps) return r.n;
  }
  return std::nullopt;
}

json certificate_json(const RateCertificate& c) {
  json doc;
  doc["regime"] = to_string(c.regime);
  doc["kappa"] = c.kappa;
  doc["alpha"] = c.alpha;
  doc["omega"] = c.omega;
  doc["tau"] = c.tau;
  doc["sigma"] = c.sigma;
  doc["C"] = c.prefactor_C;
  doc["per_iter_factor"] = c.per_iter_factor;
  doc["certified_decrement"] = c.certified_decrement();
  doc["theta"] = optional_json(c.theta);
  doc["cor2_tau"] = optional_json(c.cor2_tau);
  doc["cor2_exponent"] = optional_json(c.cor2_exponent);
  return doc;
}

ComparisonReport build_comparison(const Experiment& exp, const std::vector<RunResult>& runs) {
  require(runs.size() == exp.schemes.size(), "one run per scheme expected");
  ComparisonReport report;
  const bool trusted = trusted_fstar(exp.problem);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const PreparedScheme& ps = exp.schemes[i];
    const RunResult& run = runs[i];
    ComparisonRow row;
    row.label = ps.entry.label;
    row.scheme = to_string(ps.entry.config.kind);
    const double gap0 = run.records.front().f_gap;
    for (double eps : kAccuracyGrid) {
      row.iterations_to_eps[eps] = iterations_to(run, eps);
      if (ps.certificate && gap0 > 0.0) {
        row.predicted_iterations[eps] = iterations_to_accuracy(*ps.certificate, eps / gap0);
      } else {
        row.predicted_iterations[eps] = std::nullopt;
      }
    }
    const std::vector<double> gaps = run.gaps();
    if (gaps.size() >= 50 && exp.problem.geometry()) {
      row.fit = fit_tail_rate(gaps, evaluate_total(exp.problem, exp.x0));
    } else {
      row.fit.floor_hit = true;
    }
    row.theoretical_decrement = ps.theoretical_decrement;
    if (ps.certificate) {
      row.certified_decrement = ps.certificate->certified_decrement();
      if (trusted) {
        row.bound_check = check_bound_envelope(gaps, ps.certificate->prefactor_C,
                                               ps.certificate->per_iter_factor)
                              .pass;
      }
      if (const auto fitted = row.fit.decrement()) {
        row.certified_consistent = *fitted >= *row.certified_decrement - kCertifiedMargin;
      }
    }
    report.rows.push_back(std::move(row));
  }

  std::vector<const ComparisonRow*> ranked;
  for (const auto& row : report.rows) {
    if (row.theoretical_decrement) ranked.push_back(&row);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const ComparisonRow* a, const ComparisonRow* b) {
    return *a->theoretical_decrement > *b->theoretical_decrement;
  });
  for (const auto* row : ranked) report.expected_order.push_back(row->label);
  if (ranked.size() >= 2) {
    bool holds = true;
    for (std::size_t i = 0; i + 1 < ranked.size(); ++i) {
      const auto a = ranked[i]->iterations_to_eps.at(kOrderingEps);
      const auto b = ranked[i + 1]->iterations_to_eps.at(kOrderingEps);
      if (b && (!a || *a > *b)) holds = false;
    }
    report.ordering_holds = holds;
  }
  return report;
}

json to_json(const ComparisonReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r;
    r["label"] = row.label;
    r["scheme"] = row.scheme;
    json iters = json::object();
    json predicted = json::object();
    for (double eps : kAccuracyGrid) {
      iters[eps_key(eps)] = optional_json(row.iterations_to_eps.at(eps));
      predicted[eps_key(eps)] = optional_json(row.predicted_iterations.at(eps));
    }
    r["iterations_to_eps"] = std::move(iters);
    r["predicted_iterations"] = std::move(predicted);
    r["rate_fit"] = to_json(row.fit);
    r["fitted_decrement"] = optional_json(row.fit.decrement());
    r["certified_decrement"] = optional_json(row.certified_decrement);
    r["theoretical_decrement"] = optional_json(row.theoretical_decrement);
    r["bound_check"] = optional_json(row.bound_check);
    r["certified_consistent"] = optional_json(row.certified_consistent);
    rows.push_back(std::move(r));
  }
  json doc;
  doc["rows"] = std::move(rows);
  doc["ordering"] = {{"accuracy", kOrderingEps},
                     {"expected_order", report.expected_order},
                     {"holds", optional_json(report.ordering_holds)}};
  return doc;
}

void print_comparison(std::ostream& out, const ComparisonReport& report) {
  auto cell = [](const std::optional<long>& v) { return v ? std::to_string(*v) : std::string("-"); };
  auto num = [](const std::optional<double>& v) {
    if (!v) return std::string("-");
    std::ostringstream s;
    s << std::setprecision(4) << *v;
    return s.str();
  };
  out << std::left << std::setw(22) << "scheme";
  for (double eps : kAccuracyGrid) out << std::setw(10) << ("n@" + eps_key(eps));
  out << std::setw(12) << "fitted" << std::setw(12) << "certified" << std::setw(8) << "bound" << '\n';
  for (const auto& row : report.rows) {
    out << std::setw(22) << row.label;
    for (double eps : kAccuracyGrid) out << std::setw(10) << cell(row.iterations_to_eps.at(eps));
    out << std::setw(12) << num(row.fit.decrement()) << std::setw(12) << num(row.certified_decrement)
        << std::setw(8) << (row.bound_check ? (*row.bound_check ? "pass" : "FAIL") : "-") << '\n';
  }
  if (report.ordering_holds) {
    out << "ordering at " << eps_key(kOrderingEps) << ": " << (*report.ordering_holds ? "holds" : "VIOLATED")
        << '\n';
  }
}

int cmd_certify(const CertifyArgs& args, std::ostream& out, std::ostream& err) {
  double kappa = 0.0;
  if (args.kappa) {
    require(!args.lipschitz && !args.mu, "give either kappa or (L, mu)");
    kappa = *args.kappa;
  } else {
    require(args.lipschitz && args.mu, "certify needs kappa or both L and mu");
    require(*args.lipschitz > 0.0 && *args.mu > 0.0, "L and mu must be positive");
    kappa = *args.mu / *args.lipschitz;
  }
  require(std::isfinite(kappa) && kappa > 0.0, "kappa must be positive");
  const Regime regime = args.regime ? regime_from_string(*args.regime)
                                    : (args.theta ? Regime::kCorollary2Overestimated : Regime::kCorollary1Optimal);
  RateCertificate cert;
  switch (regime) {
    case Regime::kTheorem1: cert = theorem1_certificate(kappa); break;
    case Regime::kCorollary1Optimal: cert = corollary1_certificate(kappa); break;
    case Regime::kCorollary2Overestimated:
      require(args.theta.has_value(), "the cor2 regime needs --theta");
      cert = corollary2_certificate(*args.theta, kappa);
      break;
  }
  json doc = certificate_json(cert);
  const long n = iterations_to_accuracy(cert, args.eps);
  doc["iterations"] = {{"eps", args.eps}, {"n", n}};
  out << doc.dump(2) << '\n';
  err << to_string(cert.regime) << ": alpha = " << cert.alpha << ", gap <= " << cert.prefactor_C << " * "
      << cert.per_iter_factor << "^n * (F(x0) - F*)\n"
      << "relative accuracy " << args.eps << " after at most " << n << " iterations\n";
  return kExitOk;
}

int cmd_run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  require(!cfg.schemes.empty(), "config lists no schemes; add at least one entry under \"schemes\"");
  const Experiment exp = prepare_experiment(cfg);
  const fs::path dir = output_dir_of(cfg);
  const std::vector<RunResult> runs = run_schemes(exp, false);
  warn_unreached(exp, runs, err);

  json report;
  report["problem"] = problem_to_json(exp.problem);
  report["problem_hash"] = exp.problem_hash;
  report["seed"] = cfg.seed;
  json entries = json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const PreparedScheme& ps = exp.schemes[i];
    const RunResult& run = runs[i];
    const json meta = run_metadata(run, cfg.seed, exp.problem_hash);
    if (cfg.emit.csv) {
      write_file_atomic(dir / (ps.entry.label + ".csv"), trace_csv(run.records));
      write_json(dir / (ps.entry.label + ".meta.json"), meta);
    }
    json e;
    e["label"] = ps.entry.label;
    e["metadata"] = meta;
    e["final_gap"] = run.records.back().f_gap;
    e["reached_target"] = run.reached_target();
    e["certificate"] = ps.certificate ? certificate_json(*ps.certificate) : json(nullptr);
    e["csv"] = cfg.emit.csv ? json(ps.entry.label + ".csv") : json(nullptr);
    entries.push_back(std::move(e));
  }
  report["runs"] = std::move(entries);
  if (cfg.emit.json_report) write_json(dir / "report.json", report);
  if (cfg.emit.gnuplot_script) write_file_atomic(dir / "plot.gp", gnuplot_script(exp));
  out << report.dump(2) << '\n';
  return kExitOk;
}

int cmd_compare(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  require(!cfg.schemes.empty(), "config lists no schemes; add at least one entry under \"schemes\"");
  const Experiment exp = prepare_experiment(cfg);
  const fs::path dir = output_dir_of(cfg);
  const std::vector<RunResult> runs = run_schemes(exp, false);
  warn_unreached(exp, runs, err);
  const ComparisonReport report = build_comparison(exp, runs);
  json doc = to_json(report);
  doc["problem_hash"] = exp.problem_hash;
  doc["seed"] = cfg.seed;
  if (cfg.emit.csv) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      write_file_atomic(dir / (exp.schemes[i].entry.label + ".csv"), trace_csv(runs[i].records));
    }
  }
  if (cfg.emit.json_report) write_json(dir / "comparison.json", doc);
  if (cfg.emit.gnuplot_script) write_file_atomic(dir / "plot.gp", gnuplot_script(exp));
  print_comparison(err, report);
  out << doc.dump(2) << '\n';
  return kExitOk;
}

int cmd_validate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  require(!cfg.schemes.empty(), "config lists no schemes; add at least one entry under \"schemes\"");
  const Experiment exp = prepare_experiment(cfg);
  const fs::path dir = output_dir_of(cfg);
  const std::vector<RunResult> runs = run_schemes(exp, exp.problem.has_projection());

  bool all_pass = true;
  json entries = json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const PreparedScheme& ps = exp.schemes[i];
    json checks = json::array();
    for (const auto& c : scheme_checks(exp, ps, runs[i])) {
      all_pass = all_pass && c.pass;
      err << ps.entry.label << ' ' << c.name << ": " << (c.pass ? "pass" : "FAIL") << '\n';
      checks.push_back(to_json(c));
    }
    entries.push_back({{"label", ps.entry.label}, {"scheme", to_string(ps.entry.config.kind)}, {"checks", checks}});
  }
  json doc;
  doc["problem_hash"] = exp.problem_hash;
  doc["seed"] = cfg.seed;
  doc["pass"] = all_pass;
  doc["schemes"] = std::move(entries);
  if (cfg.emit.json_report) write_json(dir / "validation.json", doc);
  out << doc.dump(2) << '\n';
  return all_pass ? kExitOk : kExitNumerical;
}

int cmd_ode(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  Experiment exp = prepare_experiment(cfg);
  const fs::path dir = output_dir_of(cfg);
  const CompositeProblem& p = exp.problem;
  const auto& g = p.geometry();
  std::optional<double> mu;
  if (g && g->mu) mu.emplace(*g->mu);

  OdeConfig oc;
  oc.t0 = cfg.ode.t0;
  oc.t_end = cfg.ode.t_end;
  oc.dt = cfg.ode.dt;
  oc.x0 = exp.x0;
  oc.v0 = cfg.ode.v0 ? *cfg.ode.v0 : Vector::Zero(p.dim());
  if (cfg.ode.friction == "value") {
    oc.alpha_c = *cfg.ode.friction_value;
  } else {
    require(mu.has_value(), "friction rules need the growth modulus mu");
    const double m = mu.value_or(0.0);
    oc.alpha_c = cfg.ode.friction == "thm3" ? theorem3_friction(m) : proposition1_friction(m);
  }
  const OdeTrajectory traj = integrate_hbf(p, oc);

  std::vector<CheckReport> checks;
  if (mu && cfg.ode.friction == "thm3") {
    checks.push_back(check_theorem3(traj, *mu));
    if (p.has_projection()) {
      const ContinuousEnergyReport er = energy_continuous(p, traj, *mu);
      checks.push_back(er.decay);
      checks.push_back(er.velocity_sign);
      checks.push_back(er.normal_orthogonality);
    }
  }
  if (mu && cfg.ode.friction == "prop1") checks.push_back(check_proposition1(traj, *mu));
  checks.push_back(check_mechanical_energy(traj));

  bool all_pass = true;
  json list = json::array();
  for (const auto& c : checks) {
    all_pass = all_pass && c.pass;
    err << c.name << ": " << (c.pass ? "pass" : "FAIL") << '\n';
    list.push_back(to_json(c));
  }
  json doc;
  doc["problem_hash"] = exp.problem_hash;
  doc["friction"] = oc.alpha_c;
  doc["mu"] = optional_json(mu);
  doc["t0"] = oc.t0;
  doc["t_end"] = oc.t_end;
  doc["dt"] = oc.dt;
  doc["M0"] = traj.m0;
  doc["final_gap"] = traj.f_gap.back();
  doc["pass"] = all_pass;
  doc["checks"] = std::move(list);
  if (cfg.emit.csv) write_file_atomic(dir / "ode.csv", trajectory_csv(traj));
  if (cfg.emit.json_report) write_json(dir / "ode_report.json", doc);
  out << doc.dump(2) << '\n';
  return all_pass ? kExitOk : kExitNumerical;
}

}  // namespace hbopt
