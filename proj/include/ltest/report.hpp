#pragma once

#include "ltest/simlab.hpp"

#include <ostream>

namespace ltest
{

/// Long-format CSV: a few '#' header lines (tool version, resolved config,
/// optionally wall-clock seconds) followed by
/// method,n,p,dist,m,s,alpha,estimate,stderr.
void write_report_csv(const ExperimentReport& report, std::ostream& out, bool include_timing = false);

/// Standalone SVG 1.1 line chart of estimate against sparsity s, one series per
/// method, for the given alpha.
void write_power_svg(const ExperimentReport& report, std::ostream& out, double alpha);

} // namespace ltest
