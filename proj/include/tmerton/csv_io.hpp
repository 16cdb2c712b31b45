#pragma once

#include <string>
#include <vector>

#include "tmerton/calibration.hpp"

namespace tmerton {

// Shortest representation that round-trips a double exactly (17 significant
// digits).
std::string fmt17(double x);

// Strict double parse; the context string names the field in errors.
double parse_double_strict(const std::string& text, const std::string& context);

// Observation files use the header
//   t,price,v_prime,at_report_date,face,maturity
// with times in decimal years and one claim per file.
void write_observations_csv(const std::string& path,
                            const std::vector<MarketObservation>& observations);
std::vector<MarketObservation> read_observations_csv(const std::string& path);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace tmerton
