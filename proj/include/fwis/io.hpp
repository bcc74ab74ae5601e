#pragma once

#include "fwis/analysis.hpp"
#include "fwis/bounds.hpp"
#include "fwis/config.hpp"
#include "fwis/sim.hpp"

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace fwis {

class TraceParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::array<double, 29> trace_row_values(const TraceRow& row);  // CSV column order

// Values are written with 17 significant digits so a round trip is lossless.
void write_trace_csv(const SimTrace& trace, std::ostream& out);
void write_trace_csv(const SimTrace& trace, const std::string& path);
SimTrace read_trace_csv(std::istream& in);
SimTrace read_trace_csv(const std::string& path);

json bounds_to_json(const BoundSet& b);
json certificate_to_json(const ExperimentConfig& cfg, const BoundSet& b, const GainCertificate& cert);
json report_to_json(const StabilityReport& rep, bool include_series = false);
std::string report_summary(const StabilityReport& rep);

}  // namespace fwis
