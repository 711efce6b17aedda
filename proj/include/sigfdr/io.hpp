// Text input/output: delimited statistic files, 15-digit number formatting,
// JSON / CSV documents and atomic file replacement.

#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sigfdr/evaluate.hpp"
#include "sigfdr/fitting.hpp"
#include "sigfdr/models.hpp"

namespace sigfdr::io {

using Json = nlohmann::ordered_json;

/// Round to 15 significant digits (the serialized precision).
double round15(double value);

/// "%.15g", with inf / -inf / nan spelled out.
std::string format_number(double value);

/// Read one statistic column from header-bearing delimited text. The
/// delimiter is a tab when the header contains one, a comma otherwise.
/// Without a column name, the first column whose first data value parses
/// as a number is used. Throws InputError naming the offending line.
StatisticBatch read_statistics(std::istream& in, StatisticScale scale,
                               const std::optional<std::string>& column = {});
StatisticBatch read_statistics_file(const std::string& path,
                                    StatisticScale scale,
                                    const std::optional<std::string>& column = {});

/// Write through a temporary file in the same directory, then rename.
void atomic_write(const std::string& path, const std::string& content);

Json to_json(const FitResult& result);
Json to_json(const FdrTable& table);
Json to_json(const SimulationScenario& scenario);
Json to_json(const EvalSummary& summary);

std::string table_csv(const FdrTable& table);

/// One row per repetition and method.
std::string summary_csv(const EvalSummary& summary);

}  // namespace sigfdr::io
