#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "drokit/trajectory.hpp"

namespace drokit::harness {

/// Reals with 17 significant digits; NaN is written as "nan".
std::string format_real(double v);

/// k,h,phi_k,moreau_grad[,pi_0..pi_{c-1}],grad_norm,wall_ms
std::string trajectory_header(std::size_t groups, bool with_pi);

/// Header plus one LF-terminated line per row.
void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record, std::size_t groups,
                          bool with_pi);

/// Minimal table writer for summaries: fields are written verbatim, so they
/// must not contain commas or newlines.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);
  void add_row(std::vector<std::string> fields);
  void write(std::ostream& out) const;
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace drokit::harness
