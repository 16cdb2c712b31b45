#include "tmerton/csv_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tmerton {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_double_strict(const std::string& text, const std::string& context) {
    if (text.empty())
        throw ValidationError(context + ": empty numeric field");
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || errno == ERANGE)
        throw ValidationError(context + ": cannot parse '" + text + "' as a number");
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(current);
            current.clear();
        } else if (ch != '\r') {
            current += ch;
        }
    }
    fields.push_back(current);
    return fields;
}

namespace {
const char* kObsHeader = "t,price,v_prime,at_report_date,face,maturity";
}

void write_observations_csv(const std::string& path,
                            const std::vector<MarketObservation>& observations) {
    std::ofstream out(path);
    if (!out)
        throw ValidationError("cannot open " + path + " for writing");
    out << kObsHeader << "\n";
    for (const MarketObservation& obs : observations) {
        out << fmt17(obs.t) << ',' << fmt17(obs.price) << ',' << fmt17(obs.v_prime_observed)
            << ',' << (obs.at_report_date ? 1 : 0) << ',' << fmt17(obs.claim.face) << ','
            << fmt17(obs.claim.maturity) << "\n";
    }
    if (!out.flush())
        throw ValidationError("write failed for " + path);
}

std::vector<MarketObservation> read_observations_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open observations file " + path);

    std::string line;
    if (!std::getline(in, line))
        throw ValidationError(path + ": empty file");
    {
        std::string header = line;
        if (!header.empty() && header.back() == '\r') header.pop_back();
        if (header != kObsHeader)
            throw ValidationError(path + ":1: expected header '" + kObsHeader + "'");
    }

    std::vector<MarketObservation> observations;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::string where = path + ":" + std::to_string(line_no);
        const auto fields = split_csv_line(line);
        if (fields.size() != 6)
            throw ValidationError(where + ": expected 6 fields, got " +
                                  std::to_string(fields.size()));
        MarketObservation obs;
        obs.t = parse_double_strict(fields[0], where + " (t)");
        obs.price = parse_double_strict(fields[1], where + " (price)");
        obs.v_prime_observed = parse_double_strict(fields[2], where + " (v_prime)");
        if (fields[3] == "1")
            obs.at_report_date = true;
        else if (fields[3] == "0")
            obs.at_report_date = false;
        else
            throw ValidationError(where + " (at_report_date): expected 0 or 1, got '" +
                                  fields[3] + "'");
        obs.claim.face = parse_double_strict(fields[4], where + " (face)");
        obs.claim.maturity = parse_double_strict(fields[5], where + " (maturity)");
        observations.push_back(obs);
    }
    if (observations.empty())
        throw ValidationError(path + ": no observation rows");
    for (const MarketObservation& obs : observations) {
        if (obs.claim.face != observations.front().claim.face ||
            obs.claim.maturity != observations.front().claim.maturity)
            throw ValidationError(path + ": all rows must describe the same claim");
    }
    return observations;
}

}  // namespace tmerton
