#include "sigfdr/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sigfdr::io {

double round15(double value) {
  if (!std::isfinite(value)) return value;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", value);
  return std::strtod(buf, nullptr);
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", value);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) {
    const auto b = field.find_first_not_of(" \t\r\"");
    const auto e = field.find_last_not_of(" \t\r\"");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == delim) fields.emplace_back();
  return fields;
}

std::optional<double> parse_double(const std::string& text) {
  if (text.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE) return std::nullopt;
  return v;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round15(v);
}

Json quantiles(const Quantiles& q) {
  return Json{{"q05", number(q.q05)},
              {"q25", number(q.q25)},
              {"q50", number(q.q50)},
              {"q75", number(q.q75)},
              {"q95", number(q.q95)}};
}

std::string_view mode_name(MethodMode mode) {
  switch (mode) {
    case MethodMode::Plugin:
      return "plugin";
    case MethodMode::Mle:
      return "mle";
    case MethodMode::Truth:
      return "truth";
  }
  return "?";
}

}  // namespace

StatisticBatch read_statistics(std::istream& in, StatisticScale scale,
                               const std::optional<std::string>& column) {
  std::string header;
  int line_no = 0;
  while (std::getline(in, header)) {
    ++line_no;
    if (!blank(header)) break;
  }
  if (blank(header)) throw InputError("input is empty (no header line)");
  const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
  const std::vector<std::string> names = split(header, delim);

  std::vector<std::pair<int, std::vector<std::string>>> rows;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    rows.emplace_back(line_no, split(line, delim));
  }
  if (rows.empty()) throw InputError("input has no data rows");

  std::size_t col = 0;
  if (column) {
    const auto it = std::find(names.begin(), names.end(), *column);
    if (it == names.end()) {
      throw InputError("column '" + *column + "' not found in header");
    }
    col = static_cast<std::size_t>(it - names.begin());
  } else {
    const auto& first = rows.front().second;
    bool found = false;
    for (std::size_t c = 0; c < first.size(); ++c) {
      if (parse_double(first[c])) {
        col = c;
        found = true;
        break;
      }
    }
    if (!found) throw InputError("no numeric column in the first data row");
  }

  StatisticBatch batch;
  batch.scale = scale;
  batch.values.reserve(rows.size());
  for (const auto& [no, fields] : rows) {
    const std::string where = "line " + std::to_string(no) + ": ";
    if (col >= fields.size()) throw InputError(where + "missing column");
    const auto v = parse_double(fields[col]);
    if (!v || !std::isfinite(*v)) {
      throw InputError(where + "not a finite number: '" + fields[col] + "'");
    }
    if (scale == StatisticScale::PValue && !(*v >= 0.0 && *v <= 1.0)) {
      throw InputError(where + "p-value outside [0, 1]");
    }
    batch.values.push_back(*v);
  }
  return batch;
}

StatisticBatch read_statistics_file(const std::string& path,
                                    StatisticScale scale,
                                    const std::optional<std::string>& column) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file " + path);
  return read_statistics(in, scale, column);
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw InputError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InputError("cannot replace " + path);
  }
}

// ---------------------------------------------------------------------------

Json to_json(const FitResult& r) {
  Json j;
  j["kind"] = std::string(to_string(r.model_kind));
  j["mode"] = std::string(to_string(r.mode));
  j["s_hat"] = number(r.s_hat);
  j["sigma_hat"] = number(r.sigma_hat);
  j["eta0_hat"] = number(r.eta0_hat);
  j["log_likelihood"] =
      r.log_likelihood ? number(*r.log_likelihood) : Json(nullptr);
  j["converged"] = r.converged;
  j["at_boundary"] = r.at_boundary;
  j["n_obs"] = r.n_obs;
  return j;
}

Json to_json(const FdrTable& table) {
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    rows.push_back(Json{{"raw", number(row.raw)},
                        {"y", number(row.y)},
                        {"fdr", number(row.fdr)},
                        {"Fdr", number(row.Fdr)}});
  }
  return rows;
}

Json to_json(const SimulationScenario& sc) {
  return Json{{"name", sc.name},         {"eta0", number(sc.eta0_true)},
              {"null_sd", number(sc.null_sd)}, {"alt_lo", number(sc.alt_lo)},
              {"alt_hi", number(sc.alt_hi)}, {"m", sc.m},
              {"B", sc.B},               {"seed", sc.seed}};
}

Json to_json(const EvalSummary& summary) {
  Json methods = Json::array();
  for (const auto& m : summary.methods) {
    Json mae_fdr = Json::array(), mae_Fdr = Json::array(),
         eta0 = Json::array(), sigma = Json::array(), failed = Json::array();
    for (const auto& r : m.reps) {
      failed.push_back(r.failed);
      mae_fdr.push_back(r.failed ? Json(nullptr) : number(r.mae_fdr));
      mae_Fdr.push_back(r.failed ? Json(nullptr) : number(r.mae_Fdr));
      eta0.push_back(r.failed ? Json(nullptr) : number(r.eta0_hat));
      sigma.push_back(r.failed ? Json(nullptr) : number(r.sigma_hat));
    }
    Json jm;
    jm["name"] = m.method.name;
    jm["kind"] = std::string(to_string(m.method.kind));
    jm["mode"] = std::string(mode_name(m.method.mode));
    if (m.method.mode == MethodMode::Plugin) {
      jm["plugin_eta0"] = number(m.method.eta0);
      jm["plugin_sigma"] = number(m.method.sigma);
    }
    jm["n_failed"] = m.n_failed;
    jm["mae_fdr"] = quantiles(m.mae_fdr);
    jm["mae_Fdr"] = quantiles(m.mae_Fdr);
    jm["mse_fdr"] = quantiles(m.mse_fdr);
    jm["mse_Fdr"] = quantiles(m.mse_Fdr);
    jm["eta0_hat"] = quantiles(m.eta0_hat);
    jm["sigma_hat"] = quantiles(m.sigma_hat);
    jm["per_rep"] = Json{{"failed", failed},
                         {"mae_fdr", mae_fdr},
                         {"mae_Fdr", mae_Fdr},
                         {"eta0_hat", eta0},
                         {"sigma_hat", sigma}};
    methods.push_back(std::move(jm));
  }
  Json bias = Json::array();
  for (const auto& b : param_bias(summary, summary.scenario)) {
    bias.push_back(Json{{"method", b.method},
                        {"eta0_bias", number(b.eta0_bias)},
                        {"sigma_bias", number(b.sigma_bias)}});
  }
  return Json{{"scenario", to_json(summary.scenario)},
              {"methods", methods},
              {"param_bias", bias}};
}

std::string table_csv(const FdrTable& table) {
  std::string out = "row,raw,y,fdr,Fdr\n";
  std::size_t i = 0;
  for (const auto& r : table.rows) {
    out += std::to_string(++i) + ',' + format_number(r.raw) + ',' +
           format_number(r.y) + ',' + format_number(r.fdr) + ',' +
           format_number(r.Fdr) + '\n';
  }
  return out;
}

std::string summary_csv(const EvalSummary& summary) {
  std::string out =
      "scenario,rep,method,failed,mae_fdr,mae_Fdr,mse_fdr,mse_Fdr,eta0_hat,"
      "sigma_hat,converged,at_boundary\n";
  const std::size_t B = summary.scenario.B;
  for (std::size_t rep = 0; rep < B; ++rep) {
    for (const auto& m : summary.methods) {
      const RepResult& r = m.reps[rep];
      out += summary.scenario.name + ',' + std::to_string(rep) + ',' +
             m.method.name + ',' + (r.failed ? "1" : "0");
      for (double v : {r.mae_fdr, r.mae_Fdr, r.mse_fdr, r.mse_Fdr, r.eta0_hat,
                       r.sigma_hat}) {
        out += ',' + (r.failed ? std::string("nan") : format_number(v));
      }
      out += std::string(",") + (r.converged ? "1" : "0") + ',' +
             (r.at_boundary ? "1" : "0") + '\n';
    }
  }
  return out;
}

}  // namespace sigfdr::io
