#pragma once

#include "driftlab/harness.hpp"

#include <string>
#include <vector>

namespace driftlab {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Header `t,mean,std_error,predicted,scheme,observable`, one row per grid
/// point, LF line endings. Throws IoError on write failure.
void emit_trace_csv(const TraceReport& report, const std::string& path);

/// Header `h,error,mode,scheme` plus a trailing `# fitted_slope=<value>`
/// comment line.
void emit_convergence_csv(const ConvergenceReport& report, const std::string& path);

/// Header `t,x_1,...,x_n`, one row per grid point.
void emit_single_csv(const std::vector<double>& time_grid, const std::vector<StateVec>& states,
                     const std::string& path);

} // namespace driftlab
