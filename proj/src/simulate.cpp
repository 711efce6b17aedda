#include "sigfdr/simulate.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "sigfdr/fitting.hpp"

namespace sigfdr {

SimulationScenario SimulationScenario::separated() {
  SimulationScenario s;
  s.name = "separated";
  return s;
}

SimulationScenario SimulationScenario::overlapping() {
  SimulationScenario s;
  s.name = "overlapping";
  s.alt_lo = 2.0;
  return s;
}

SimulationScenario SimulationScenario::preset(const std::string& name) {
  if (name == "separated") return separated();
  if (name == "overlapping") return overlapping();
  throw InputError("unknown scenario preset '" + name +
                   "' (expected separated or overlapping)");
}

void SimulationScenario::validate() const {
  if (!(eta0_true >= 0.0 && eta0_true <= 1.0)) {
    throw InputError("scenario: eta0 must lie in [0, 1]");
  }
  if (!(null_sd > 0.0) || !std::isfinite(null_sd)) {
    throw InputError("scenario: null_sd must be positive");
  }
  if (!(alt_lo > 0.0 && alt_lo < alt_hi) || !std::isfinite(alt_hi)) {
    throw InputError("scenario: need 0 < alt_lo < alt_hi");
  }
  if (m < 1 || B < 1) throw InputError("scenario: m and B must be >= 1");
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || !std::isfinite(v)) {
    throw InputError("scenario: bad value for " + key + ": '" + value + "'");
  }
  return v;
}

std::uint64_t parse_count(const std::string& key, const std::string& value) {
  if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
    throw InputError("scenario: bad value for " + key + ": '" + value + "'");
  }
  try {
    return std::stoull(value);
  } catch (const std::exception&) {
    throw InputError("scenario: value out of range for " + key);
  }
}

}  // namespace

SimulationScenario parse_scenario(std::istream& in) {
  SimulationScenario sc = SimulationScenario::separated();
  sc.name = "custom";
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("scenario line " + std::to_string(line_no) +
                       ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "eta0") {
      sc.eta0_true = parse_real(key, value);
    } else if (key == "null_sd") {
      sc.null_sd = parse_real(key, value);
    } else if (key == "alt_lo") {
      sc.alt_lo = parse_real(key, value);
    } else if (key == "alt_hi") {
      sc.alt_hi = parse_real(key, value);
    } else if (key == "m") {
      sc.m = parse_count(key, value);
    } else if (key == "B") {
      sc.B = parse_count(key, value);
    } else if (key == "seed") {
      sc.seed = parse_count(key, value);
    } else if (key == "name") {
      sc.name = value;
    } else {
      throw InputError("scenario line " + std::to_string(line_no) +
                       ": unknown key '" + key + "'");
    }
  }
  sc.validate();
  return sc;
}

SimulationScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file " + path);
  return parse_scenario(in);
}

// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL)) {}

std::uint64_t CounterRng::next() {
  ++counter_;
  return splitmix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
}

double CounterRng::uniform() {
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  return (static_cast<double>(next() >> 11) + 0.5) * kScale;
}

double CounterRng::normal() { return norm_quantile(uniform()); }

// ---------------------------------------------------------------------------

TruthOracle::TruthOracle(SimulationScenario scenario)
    : scenario_(std::move(scenario)) {
  scenario_.validate();
}

double TruthOracle::null_density(double t) const {
  const double sd = scenario_.null_sd;
  return 2.0 * norm_pdf(t / sd) / sd;
}

double TruthOracle::alt_density(double t) const {
  if (t < scenario_.alt_lo || t > scenario_.alt_hi) return 0.0;
  return 1.0 / (scenario_.alt_hi - scenario_.alt_lo);
}

double TruthOracle::null_sf(double t) const {
  return std::erfc(t / (scenario_.null_sd * kSqrt2));
}

double TruthOracle::alt_sf(double t) const {
  if (t <= scenario_.alt_lo) return 1.0;
  if (t >= scenario_.alt_hi) return 0.0;
  return (scenario_.alt_hi - t) / (scenario_.alt_hi - scenario_.alt_lo);
}

double TruthOracle::mixture_cdf(double t) const {
  const double eta0 = scenario_.eta0_true;
  return eta0 * (1.0 - null_sf(t)) + (1.0 - eta0) * (1.0 - alt_sf(t));
}

double TruthOracle::local_fdr(double z) const {
  const double t = std::abs(z);
  const double eta0 = scenario_.eta0_true;
  const double g = alt_density(t);
  if (g == 0.0 || eta0 == 1.0) return 1.0;
  const double null_part = eta0 * null_density(t);
  return null_part / (null_part + (1.0 - eta0) * g);
}

double TruthOracle::tail_fdr(double z) const {
  const double t = std::abs(z);
  const double eta0 = scenario_.eta0_true;
  const double alt = alt_sf(t);
  if (alt == 0.0 || eta0 == 1.0) return 1.0;
  const double p0 = null_sf(t);
  if (alt == 1.0) return eta0 * p0 / (1.0 - eta0 * (1.0 - p0));
  return eta0 * p0 / (eta0 * p0 + (1.0 - eta0) * alt);
}

// ---------------------------------------------------------------------------

StatisticBatch generate(const SimulationScenario& scenario, std::size_t rep) {
  scenario.validate();
  if (rep >= scenario.B) {
    throw InputError("repetition index " + std::to_string(rep) +
                     " is not below B = " + std::to_string(scenario.B));
  }
  CounterRng rng(scenario.seed, rep);
  StatisticBatch batch;
  batch.scale = StatisticScale::ZScore;
  batch.values.reserve(scenario.m);
  const double eta0 = scenario.eta0_true;
  const double width = scenario.alt_hi - scenario.alt_lo;
  for (std::size_t i = 0; i < scenario.m; ++i) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    if (u < eta0) {
      batch.values.push_back(scenario.null_sd * norm_quantile(v));
    } else {
      const double magnitude = scenario.alt_lo + width * v;
      const bool negative = (u - eta0) / (1.0 - eta0) < 0.5;
      batch.values.push_back(negative ? -magnitude : magnitude);
    }
  }
  return batch;
}

StatisticBatch sample_hnd(const HndModel& model, std::size_t m,
                          std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  const double s = model.s();
  const double p_body = model.eta0() * std::erf(s / kSqrt2);
  const double cdf_s = norm_cdf(s);
  StatisticBatch batch;
  batch.scale = StatisticScale::ZScore;
  batch.values.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    double y;
    bool negative;
    if (u < p_body) {
      y = norm_quantile(0.5 + v * (cdf_s - 0.5));
      negative = u / p_body < 0.5;
    } else {
      y = s - std::log(v) / s;
      negative = (u - p_body) / (1.0 - p_body) < 0.5;
    }
    const double z = model.sigma() * y;
    batch.values.push_back(negative ? -z : z);
  }
  return batch;
}

}  // namespace sigfdr
