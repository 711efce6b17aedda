#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "sigfdr/evaluate.hpp"
#include "sigfdr/fitting.hpp"
#include "sigfdr/io.hpp"
#include "sigfdr/models.hpp"
#include "sigfdr/simulate.hpp"

namespace sigfdr::cli {

namespace {

using io::Json;

struct Options {
  std::string input;
  std::string scale = "z";
  std::optional<std::string> column;
  std::string kind = "hnd";
  std::string mode = "mle";
  std::optional<double> eta0;
  std::optional<double> s;
  std::optional<double> sigma;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> B;
  std::string out;
  std::optional<std::string> format;
  std::size_t grid = 601;
  std::string preset = "separated";
  std::string scenario;
  std::string methods = "hnd-native,bum-native,hnd-plugin,bum-plugin";
  std::string table;
  unsigned threads = 0;
};

ModelKind parse_kind(const std::string& kind) {
  if (kind == "bum") return ModelKind::Bum;
  if (kind == "hnd") return ModelKind::Hnd;
  throw InputError("--kind must be bum or hnd");
}

StatisticScale parse_scale(const std::string& scale, bool allow_native) {
  if (scale == "z") return StatisticScale::ZScore;
  if (scale == "p") return StatisticScale::PValue;
  if (allow_native && scale == "y") return StatisticScale::NativeY;
  throw InputError(allow_native ? "--scale must be z, p or y"
                                : "--scale must be z or p");
}

std::string resolve_format(const Options& o, const std::string& fallback) {
  const std::string f = o.format.value_or(fallback);
  if (f != "json" && f != "csv") throw InputError("--format must be json or csv");
  return f;
}

class Emitter {
 public:
  Emitter(const Options& o, std::ostream& out) : path_(o.out), out_(out) {}

  void emit(const std::string& content) const {
    if (path_.empty()) {
      out_ << content;
    } else {
      io::atomic_write(path_, content);
    }
  }

 private:
  std::string path_;
  std::ostream& out_;
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

StatisticBatch load_input(const Options& o, StatisticScale scale) {
  if (o.input.empty()) throw InputError("--input is required");
  return io::read_statistics_file(o.input, scale, o.column);
}

// Model from --kind with either --eta0 or --s, and --sigma (default 1).
ThresholdModel model_from_flags(const Options& o) {
  const ModelKind kind = parse_kind(o.kind);
  if (o.eta0.has_value() == o.s.has_value()) {
    throw InputError("give exactly one of --eta0 and --s");
  }
  const double sigma = o.sigma.value_or(1.0);
  double s = 0.0;
  if (o.s) {
    s = *o.s;
  } else if (kind == ModelKind::Hnd) {
    s = hnd_s_from_eta0(*o.eta0);
  } else {
    s = *o.eta0;
  }
  return make_model(kind, s, sigma);
}

Json model_json(const ThresholdModel& model) {
  return Json{{"kind", std::string(to_string(kind_of(model)))},
              {"s", io::round15(s_of(model))},
              {"sigma", io::round15(sigma_of(model))},
              {"eta0", io::round15(eta0_of(model))}};
}

int cmd_fit(const Options& o, std::ostream& out) {
  const ModelKind kind = parse_kind(o.kind);
  const StatisticScale scale = parse_scale(o.scale, false);
  const std::string format = resolve_format(o, "json");
  const StatisticBatch batch = load_input(o, scale);

  FitOutput fit;
  if (o.mode == "plugin") {
    if (!o.eta0 || !o.sigma) {
      throw InputError("plugin mode requires --eta0 and --sigma");
    }
    fit = plugin_fit(kind, *o.eta0, *o.sigma, batch);
  } else if (o.mode == "mle") {
    if (scale != StatisticScale::ZScore) {
      throw InputError("mle mode needs z-scores (--scale z)");
    }
    fit = mle_fit(kind, batch);
  } else {
    throw InputError("--mode must be mle or plugin");
  }

  std::string doc;
  if (format == "json") {
    Json j;
    j["command"] = "fit";
    j["input"] = o.input;
    j["scale"] = o.scale;
    j["fit"] = io::to_json(fit.result);
    j["rows"] = io::to_json(fit.table);
    doc = dump(j);
  } else {
    const FitResult& r = fit.result;
    doc = "kind,mode,s_hat,sigma_hat,eta0_hat,log_likelihood,converged,"
          "at_boundary,n_obs\n";
    doc += std::string(to_string(r.model_kind)) + ',' +
           std::string(to_string(r.mode)) + ',' + io::format_number(r.s_hat) +
           ',' + io::format_number(r.sigma_hat) + ',' +
           io::format_number(r.eta0_hat) + ',' +
           io::format_number(r.log_likelihood.value_or(NAN)) + ',' +
           (r.converged ? "1" : "0") + ',' + (r.at_boundary ? "1" : "0") +
           ',' + std::to_string(r.n_obs) + '\n';
  }
  Emitter(o, out).emit(doc);
  return fit.result.converged ? kExitOk : kExitNotConverged;
}

int cmd_score(const Options& o, std::ostream& out) {
  const StatisticScale scale = parse_scale(o.scale, false);
  const std::string format = resolve_format(o, "json");
  const ThresholdModel model = model_from_flags(o);
  const StatisticBatch batch = load_input(o, scale);
  const FdrTable table = score_batch(model, batch);

  if (format == "json") {
    Json j;
    j["command"] = "score";
    j["input"] = o.input;
    j["scale"] = o.scale;
    j["model"] = model_json(model);
    j["rows"] = io::to_json(table);
    Emitter(o, out).emit(dump(j));
  } else {
    Emitter(o, out).emit(io::table_csv(table));
  }
  return kExitOk;
}

struct CurvePoint {
  double x, fdr, Fdr, f, f0, fa;
};

// Densities are expressed on the grid's own scale: folded |z| for z, the
// p-value for p, native y for y.
CurvePoint curve_point(const ThresholdModel& model, StatisticScale scale,
                       double x) {
  const NativeStat stat = to_native(x, scale, model);
  const double eta0 = eta0_of(model);
  const double sigma = sigma_of(model);
  CurvePoint p{x, local_fdr(model, stat), tail_fdr(model, stat), 0, 0, 0};
  switch (scale) {
    case StatisticScale::ZScore:
      p.f0 = 2.0 * norm_pdf(x / sigma) / sigma;
      break;
    case StatisticScale::PValue:
      p.f0 = 1.0;
      break;
    case StatisticScale::NativeY:
      p.f0 = densities(model, stat).f0;
      break;
  }
  p.f = p.fdr > 0.0 ? eta0 * p.f0 / p.fdr : kInf;
  p.fa = eta0 < 1.0 ? (p.f - eta0 * p.f0) / (1.0 - eta0) : 0.0;
  if (p.fa < 0.0) p.fa = 0.0;  // rounding on the fdr = 1 plateau
  return p;
}

int cmd_curve(const Options& o, std::ostream& out) {
  const StatisticScale scale = parse_scale(o.scale, true);
  const std::string format = resolve_format(o, "csv");
  const ThresholdModel model = model_from_flags(o);
  if (o.grid < 2) throw InputError("--grid must be >= 2");

  const bool hnd = kind_of(model) == ModelKind::Hnd;
  std::vector<double> xs(o.grid);
  for (std::size_t i = 0; i < o.grid; ++i) {
    const double k = static_cast<double>(i);
    if (scale == StatisticScale::ZScore ||
        (scale == StatisticScale::NativeY && hnd)) {
      xs[i] = 6.0 * k / static_cast<double>(o.grid - 1);
    } else {
      xs[i] = k / static_cast<double>(o.grid);
    }
  }

  std::vector<CurvePoint> points;
  points.reserve(xs.size());
  for (double x : xs) points.push_back(curve_point(model, scale, x));

  if (format == "csv") {
    std::string doc = "x,fdr,Fdr,f,f0,fA\n";
    for (const auto& p : points) {
      doc += io::format_number(p.x) + ',' + io::format_number(p.fdr) + ',' +
             io::format_number(p.Fdr) + ',' + io::format_number(p.f) + ',' +
             io::format_number(p.f0) + ',' + io::format_number(p.fa) + '\n';
    }
    Emitter(o, out).emit(doc);
  } else {
    Json rows = Json::array();
    auto num = [](double v) { return std::isfinite(v) ? Json(io::round15(v)) : Json(nullptr); };
    for (const auto& p : points) {
      rows.push_back(Json{{"x", num(p.x)},
                          {"fdr", num(p.fdr)},
                          {"Fdr", num(p.Fdr)},
                          {"f", num(p.f)},
                          {"f0", num(p.f0)},
                          {"fA", num(p.fa)}});
    }
    Json j;
    j["command"] = "curve";
    j["scale"] = o.scale;
    j["model"] = model_json(model);
    j["points"] = rows;
    Emitter(o, out).emit(dump(j));
  }
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const std::string format = resolve_format(o, "json");
  SimulationScenario scenario = o.scenario.empty()
                                    ? SimulationScenario::preset(o.preset)
                                    : load_scenario(o.scenario);
  if (o.B) scenario.B = *o.B;
  if (o.seed) scenario.seed = *o.seed;
  scenario.validate();

  std::vector<MethodSpec> methods;
  std::istringstream names(o.methods);
  std::string name;
  while (std::getline(names, name, ',')) {
    if (!name.empty()) methods.push_back(parse_method(name, scenario));
  }
  if (methods.empty()) throw InputError("--methods lists no methods");

  StudyOptions opts;
  opts.threads = o.threads;
  const EvalSummary summary = run_study(scenario, methods, opts);

  const std::string flat = io::summary_csv(summary);
  if (!o.table.empty()) io::atomic_write(o.table, flat);
  if (format == "json") {
    Json j;
    j["command"] = "simulate";
    j["summary"] = io::to_json(summary);
    Emitter(o, out).emit(dump(j));
  } else {
    Emitter(o, out).emit(flat);
  }
  return kExitOk;
}

void add_shared_options(CLI::App& app, Options& o) {
  app.add_option("--input", o.input, "Delimited text file with a header row");
  app.add_option("--scale", o.scale, "Statistic scale: z, p (curve also y)");
  app.add_option("--column", o.column, "Column holding the statistic");
  app.add_option("--kind", o.kind, "Threshold model: bum or hnd");
  app.add_option("--mode", o.mode, "Fit mode: mle or plugin");
  app.add_option("--eta0", o.eta0, "Null proportion");
  app.add_option("--s", o.s, "Model parameter s (instead of --eta0)");
  app.add_option("--sigma", o.sigma, "Null standard deviation");
  app.add_option("--seed", o.seed, "Simulation seed");
  app.add_option("--B", o.B, "Simulation repetitions");
  app.add_option("--out", o.out, "Output path (default: stdout)");
  app.add_option("--format", o.format, "Output format: json or csv");
  app.add_option("--grid", o.grid, "Curve grid points");
  app.add_option("--preset", o.preset, "Scenario preset: separated, overlapping");
  app.add_option("--scenario", o.scenario, "Scenario key = value file");
  app.add_option("--methods", o.methods, "Comma-separated methods");
  app.add_option("--table", o.table, "Per-repetition CSV table path");
  app.add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Local and tail-area fdr from sigmoidal threshold curves",
               "sigfdr"};
  app.fallthrough();
  app.require_subcommand(1);
  Options o;
  add_shared_options(app, o);
  auto* fit = app.add_subcommand("fit", "Fit a BUM or HND model to a file");
  auto* score = app.add_subcommand("score", "Score statistics with a model");
  auto* curve = app.add_subcommand("curve", "Tabulate model curves on a grid");
  auto* simulate =
      app.add_subcommand("simulate", "Run the mixture simulation study");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "sigfdr: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (fit->parsed()) return cmd_fit(o, out);
    if (score->parsed()) return cmd_score(o, out);
    if (curve->parsed()) return cmd_curve(o, out);
    if (simulate->parsed()) return cmd_simulate(o, out);
  } catch (const InputError& e) {
    err << "sigfdr: " << e.what() << "\n";
    return kExitInput;
  } catch (const DomainError& e) {
    err << "sigfdr: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "sigfdr: internal error: " << e.what() << "\n";
    return 1;
  }
  return kExitInput;
}

}  // namespace sigfdr::cli
