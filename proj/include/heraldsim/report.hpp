#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "heraldsim/protocol.hpp"
#include "heraldsim/validation.hpp"

namespace heraldsim {

typedef nlohmann::ordered_json Json;

Json to_json(const HeraldRunResult& r);
Json to_json(const InterferenceResult& r);
Json to_json(const std::vector<TemperaturePoint>& sweep);
Json to_json(const std::vector<HeraldPoint>& scan);
Json to_json(const std::vector<CheckResult>& checks);
Json to_json(const RunDiagnostics& d);
Json to_json(const QubitMatrix& rho);

// 17 significant digits; "nan"/"inf" for non-finite values.
std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::string> units;  // one per column, may be empty strings
  std::vector<std::vector<std::string>> rows;
};

CsvTable csv_table(const HeraldRunResult& r);
CsvTable csv_table(const InterferenceResult& r);
CsvTable csv_table(const std::vector<TemperaturePoint>& sweep);
CsvTable csv_table(const std::vector<HeraldPoint>& scan);
CsvTable csv_table(const std::vector<CheckResult>& checks);

// Header comment with the column documentation, a comment line holding the
// resolved config as compact JSON, then the header row and the data.
void write_csv(std::ostream& os, const CsvTable& table, const Json& config_echo);

}  // namespace heraldsim
