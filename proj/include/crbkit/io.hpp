#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "crbkit/constraint.hpp"
#include "crbkit/matlin.hpp"

namespace crbkit::io {

// matx v1: a header line "rows cols", then `rows` lines of `cols`
// whitespace-separated decimal values. Blank lines and lines starting with
// '#' are ignored. Values are written with 17 significant digits.

Matrix read_matx(std::istream& in);
Matrix read_matx(const std::filesystem::path& path);
void write_matx(std::ostream& out, const Matrix& m);
void write_matx(const std::filesystem::path& path, const Matrix& m);

/// Constraint file: optional "# constraint <label>" line, a matx block for
/// F, then an optional "offset c_1 ... c_m" line.
ConstraintSpec read_constraint(std::istream& in);
ConstraintSpec read_constraint(const std::filesystem::path& path);
void write_constraint(std::ostream& out, const ConstraintSpec& spec);
void write_constraint(const std::filesystem::path& path, const ConstraintSpec& spec);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

/// Header comment placed at the top of every CSV report.
inline constexpr const char* kCsvVersionLine = "# crb-kit v1";

}  // namespace crbkit::io
