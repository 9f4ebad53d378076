#include "driftlab/csv_io.hpp"

#include "driftlab/errors.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace driftlab {

namespace {

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: LF endings everywhere
    if (!out) {
        throw IoError(path, "cannot open '" + path + "' for writing");
    }
    return out;
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) {
        throw IoError(path, "write to '" + path + "' failed");
    }
}

} // namespace

std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    if (res.ec != std::errc{}) {
        throw std::runtime_error("double formatting failed");
    }
    return std::string(buf, res.ptr);
}

void emit_trace_csv(const TraceReport& report, const std::string& path) {
    std::ofstream out = open_for_write(path);
    out << "t,mean,std_error,predicted,scheme,observable\n";
    const std::string scheme = to_string(report.scheme);
    const std::string observable = to_string(report.observable);
    for (std::size_t i = 0; i < report.time_grid.size(); ++i) {
        out << format_double(report.time_grid[i]) << ',' << format_double(report.sample_mean[i])
            << ',' << format_double(report.std_error[i]) << ','
            << format_double(report.predicted[i]) << ',' << scheme << ',' << observable << '\n';
    }
    finish(out, path);
}

void emit_convergence_csv(const ConvergenceReport& report, const std::string& path) {
    std::ofstream out = open_for_write(path);
    out << "h,error,mode,scheme\n";
    const std::string scheme = to_string(report.scheme);
    const std::string mode = to_string(report.mode);
    for (std::size_t i = 0; i < report.step_sizes.size(); ++i) {
        out << format_double(report.step_sizes[i]) << ',' << format_double(report.errors[i])
            << ',' << mode << ',' << scheme << '\n';
    }
    out << "# fitted_slope=" << format_double(report.fitted_slope) << '\n';
    finish(out, path);
}

void emit_single_csv(const std::vector<double>& time_grid, const std::vector<StateVec>& states,
                     const std::string& path) {
    if (time_grid.size() != states.size() || states.empty()) {
        throw std::invalid_argument("time grid and state list must have equal nonzero length");
    }
    std::ofstream out = open_for_write(path);
    out << 't';
    for (Eigen::Index c = 0; c < states.front().size(); ++c) {
        out << ",x_" << (c + 1);
    }
    out << '\n';
    for (std::size_t i = 0; i < states.size(); ++i) {
        out << format_double(time_grid[i]);
        for (Eigen::Index c = 0; c < states[i].size(); ++c) {
            out << ',' << format_double(states[i](c));
        }
        out << '\n';
    }
    finish(out, path);
}

} // namespace driftlab
