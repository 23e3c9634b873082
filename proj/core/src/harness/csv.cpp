#include "drokit/harness/csv.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "drokit/error.hpp"

namespace drokit::harness {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trajectory_header(std::size_t groups, bool with_pi) {
  std::string h = "k,h,phi_k,moreau_grad";
  if (with_pi) {
    for (std::size_t i = 0; i < groups; ++i) h += ",pi_" + std::to_string(i);
  }
  return h + ",grad_norm,wall_ms";
}

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record, std::size_t groups,
                          bool with_pi) {
  out << trajectory_header(groups, with_pi) << '\n';
  for (const auto& row : record.rows) {
    out << row.k << ',' << format_real(row.h) << ',' << format_real(row.phi_k) << ','
        << format_real(row.moreau_grad);
    if (with_pi) {
      if (static_cast<std::size_t>(row.pi.size()) != groups) {
        throw DimensionMismatch("write_trajectory_csv: row has no pi of the expected length");
      }
      for (Eigen::Index i = 0; i < row.pi.size(); ++i) out << ',' << format_real(row.pi[i]);
    }
    out << ',' << format_real(row.grad_norm) << ',' << format_real(row.wall_ms) << '\n';
  }
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<std::string> fields) {
  if (fields.size() != columns_.size()) throw DimensionMismatch("CsvTable: wrong number of fields");
  rows_.push_back(std::move(fields));
}

void CsvTable::write(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& f) {
    for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << f[i];
    out << '\n';
  };
  line(columns_);
  for (const auto& r : rows_) line(r);
}

}  // namespace drokit::harness
