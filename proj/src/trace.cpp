#include "argmin/trace.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "argmin/error.hpp"

namespace argmin {

namespace {

std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

RunTrace::RunTrace(bool record_wall_time)
    : record_wall_time_(record_wall_time), start_ns_(record_wall_time ? now_ns() : 0) {}

void RunTrace::add(TraceRow row, const OracleCounter& counter) {
  row.calls0 = counter.calls(0);
  row.calls1 = counter.calls(1);
  row.calls2 = counter.calls(2);
  row.wall_ns = record_wall_time_ ? now_ns() - start_ns_ : 0;
  rows_.push_back(row);
}

void RunTrace::append(const RunTrace& other) {
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols = {
      "epoch", "iter",  "calls0", "calls1",  "calls2",      "f",          "grad_norm",
      "grad_fs_norm", "sigma", "L_est", "wall_ns", "r1_residual", "r2_residual"};
  return cols;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const RunTrace& trace, std::ostream& out) {
  const auto& cols = trace_columns();
  for (size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const TraceRow& r : trace.rows()) {
    out << r.epoch << ',' << r.iter << ',' << r.calls0 << ',' << r.calls1 << ',' << r.calls2 << ','
        << format_double(r.f) << ',' << format_double(r.grad_norm) << ','
        << format_double(r.grad_fs_norm) << ',' << format_double(r.sigma) << ','
        << format_double(r.L_est) << ',' << r.wall_ns << ',' << format_double(r.r1_residual) << ','
        << format_double(r.r2_residual) << '\n';
  }
}

void write_csv_file(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  write_csv(trace, out);
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path + "'");
}

}  // namespace argmin
