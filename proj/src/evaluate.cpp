#include "sigfdr/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace sigfdr {

MethodSpec MethodSpec::native(ModelKind kind) {
  MethodSpec m;
  m.name = std::string(to_string(kind)) + "-native";
  m.kind = kind;
  m.mode = MethodMode::Mle;
  return m;
}

MethodSpec MethodSpec::plugin(ModelKind kind, double eta0, double sigma) {
  MethodSpec m;
  m.name = std::string(to_string(kind)) + "-plugin";
  m.kind = kind;
  m.mode = MethodMode::Plugin;
  m.eta0 = eta0;
  m.sigma = sigma;
  return m;
}

MethodSpec MethodSpec::truth() {
  MethodSpec m;
  m.name = "truth";
  m.mode = MethodMode::Truth;
  return m;
}

void MethodSpec::validate() const {
  if (mode != MethodMode::Plugin) return;
  if (!(sigma > 0.0)) throw InputError(name + ": plug-in sigma must be > 0");
  if (kind == ModelKind::Bum && !(eta0 > 0.0 && eta0 <= 1.0)) {
    throw InputError(name + ": plug-in eta0 must lie in (0, 1]");
  }
  if (kind == ModelKind::Hnd && !(eta0 > hnd_min_eta0() && eta0 < 1.0)) {
    throw InputError(name + ": plug-in eta0 outside the attainable HND range");
  }
}

MethodSpec parse_method(const std::string& name,
                        const SimulationScenario& scenario) {
  if (name == "hnd-native") return MethodSpec::native(ModelKind::Hnd);
  if (name == "bum-native") return MethodSpec::native(ModelKind::Bum);
  if (name == "hnd-plugin") {
    return MethodSpec::plugin(ModelKind::Hnd, scenario.eta0_true,
                              scenario.null_sd);
  }
  if (name == "bum-plugin") {
    return MethodSpec::plugin(ModelKind::Bum, scenario.eta0_true,
                              scenario.null_sd);
  }
  if (name == "truth") return MethodSpec::truth();
  throw InputError("unknown method '" + name + "'");
}

// ---------------------------------------------------------------------------

double quantile(std::vector<double> values, double level) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = level * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Quantiles summarize(const std::vector<double>& values) {
  return {quantile(values, 0.05), quantile(values, 0.25),
          quantile(values, 0.50), quantile(values, 0.75),
          quantile(values, 0.95)};
}

const MethodSummary& EvalSummary::method(const std::string& name) const {
  for (const auto& m : methods) {
    if (m.method.name == name) return m;
  }
  throw InputError("no method named '" + name + "' in the summary");
}

// ---------------------------------------------------------------------------

RepResult evaluate_method(const MethodSpec& method, const TruthOracle& oracle,
                          const StatisticBatch& batch, const FitOptions& fit) {
  RepResult r;
  const auto& values = batch.values;
  std::vector<double> fdr(values.size());
  std::vector<double> Fdr(values.size());
  try {
    switch (method.mode) {
      case MethodMode::Truth:
        for (std::size_t i = 0; i < values.size(); ++i) {
          fdr[i] = oracle.local_fdr(values[i]);
          Fdr[i] = oracle.tail_fdr(values[i]);
        }
        r.eta0_hat = oracle.scenario().eta0_true;
        r.sigma_hat = oracle.scenario().null_sd;
        break;
      case MethodMode::Plugin:
      case MethodMode::Mle: {
        const FitOutput out =
            method.mode == MethodMode::Plugin
                ? plugin_fit(method.kind, method.eta0, method.sigma, batch)
                : mle_fit(method.kind, batch, fit);
        for (std::size_t i = 0; i < values.size(); ++i) {
          fdr[i] = out.table.rows[i].fdr;
          Fdr[i] = out.table.rows[i].Fdr;
        }
        r.eta0_hat = out.result.eta0_hat;
        r.sigma_hat = out.result.sigma_hat;
        r.converged = out.result.converged;
        r.at_boundary = out.result.at_boundary;
        break;
      }
    }
  } catch (const std::exception& e) {
    r.failed = true;
    r.error = e.what();
    return r;
  }

  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d_fdr = fdr[i] - oracle.local_fdr(values[i]);
    const double d_Fdr = Fdr[i] - oracle.tail_fdr(values[i]);
    r.mae_fdr += std::abs(d_fdr);
    r.mae_Fdr += std::abs(d_Fdr);
    r.mse_fdr += d_fdr * d_fdr;
    r.mse_Fdr += d_Fdr * d_Fdr;
  }
  r.mae_fdr /= n;
  r.mae_Fdr /= n;
  r.mse_fdr /= n;
  r.mse_Fdr /= n;
  return r;
}

EvalSummary run_study(const SimulationScenario& scenario,
                      const std::vector<MethodSpec>& methods,
                      const StudyOptions& options) {
  scenario.validate();
  if (methods.empty()) throw InputError("run_study: no methods given");
  for (const auto& m : methods) m.validate();

  const TruthOracle oracle(scenario);
  const std::size_t B = scenario.B;
  // results[rep][method]
  std::vector<std::vector<RepResult>> results(B);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t rep = next++; rep < B; rep = next++) {
      const StatisticBatch batch = generate(scenario, rep);
      std::vector<RepResult> row;
      row.reserve(methods.size());
      for (const auto& m : methods) {
        row.push_back(evaluate_method(m, oracle, batch, options.fit));
      }
      results[rep] = std::move(row);
    }
  };
  unsigned threads = options.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, B));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  EvalSummary summary;
  summary.scenario = scenario;
  for (std::size_t k = 0; k < methods.size(); ++k) {
    MethodSummary ms;
    ms.method = methods[k];
    std::vector<double> mae_fdr, mae_Fdr, mse_fdr, mse_Fdr, eta0, sigma;
    for (std::size_t rep = 0; rep < B; ++rep) {
      const RepResult& r = results[rep][k];
      ms.reps.push_back(r);
      if (r.failed) {
        ++ms.n_failed;
        continue;
      }
      mae_fdr.push_back(r.mae_fdr);
      mae_Fdr.push_back(r.mae_Fdr);
      mse_fdr.push_back(r.mse_fdr);
      mse_Fdr.push_back(r.mse_Fdr);
      eta0.push_back(r.eta0_hat);
      sigma.push_back(r.sigma_hat);
    }
    ms.mae_fdr = summarize(mae_fdr);
    ms.mae_Fdr = summarize(mae_Fdr);
    ms.mse_fdr = summarize(mse_fdr);
    ms.mse_Fdr = summarize(mse_Fdr);
    ms.eta0_hat = summarize(eta0);
    ms.sigma_hat = summarize(sigma);
    summary.methods.push_back(std::move(ms));
  }
  return summary;
}

std::vector<ParamBias> param_bias(const EvalSummary& summary,
                                  const SimulationScenario& truth) {
  std::vector<ParamBias> out;
  for (const auto& m : summary.methods) {
    out.push_back({m.method.name, m.eta0_hat.q50 - truth.eta0_true,
                   m.sigma_hat.q50 - truth.null_sd});
  }
  return out;
}

}  // namespace sigfdr
