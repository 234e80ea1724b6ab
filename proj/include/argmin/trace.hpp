#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "argmin/oracle.hpp"

namespace argmin {

/// One iteration of one epoch. Residual columns are NaN when not measured.
struct TraceRow {
  int epoch = 0;
  int iter = 0;
  std::int64_t calls0 = 0;
  std::int64_t calls1 = 0;
  std::int64_t calls2 = 0;
  double f = 0.0;             ///< unregularized objective
  double grad_norm = 0.0;     ///< ||grad f||
  double grad_fs_norm = 0.0;  ///< ||grad f_s||
  double sigma = 0.0;
  double L_est = 0.0;
  std::int64_t wall_ns = 0;
  double r1_residual = std::numeric_limits<double>::quiet_NaN();
  double r2_residual = std::numeric_limits<double>::quiet_NaN();
};

class RunTrace {
 public:
  /// Wall-clock stamps are written as 0 unless enabled, so equal runs produce equal bytes.
  explicit RunTrace(bool record_wall_time = false);

  void add(TraceRow row, const OracleCounter& counter);
  void append(const RunTrace& other);

  const std::vector<TraceRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  bool records_wall_time() const { return record_wall_time_; }

 private:
  bool record_wall_time_;
  std::int64_t start_ns_;
  std::vector<TraceRow> rows_;
};

/// Column names in output order.
const std::vector<std::string>& trace_columns();

/// Writes header plus one line per row; floats use 17 significant digits.
void write_csv(const RunTrace& trace, std::ostream& out);

/// write_csv to a file. Throws Error(kIo) naming the path on failure.
void write_csv_file(const RunTrace& trace, const std::string& path);

/// Formats a double with 17 significant digits ("nan"/"inf" for non-finite values).
std::string format_double(double v);

}  // namespace argmin
