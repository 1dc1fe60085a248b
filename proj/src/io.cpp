#include "crbkit/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

namespace crbkit::io {
namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  /// Next line that is neither blank nor a '#' comment.
  std::optional<std::string> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') {
        if (first != std::string::npos) last_comment_ = line.substr(first);
        continue;
      }
      return line;
    }
    return std::nullopt;
  }

  std::size_t line_no() const { return line_no_; }
  const std::string& last_comment() const { return last_comment_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
  std::string last_comment_;
};

[[noreturn]] void parse_error(const LineReader& r, const std::string& what) {
  throw Error(ErrorCode::InvalidInput, "matx line " + std::to_string(r.line_no()) + ": " + what);
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

bool parse_double(std::string tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.erase(0, 1);
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_index(const std::string& tok, Eigen::Index& out) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0) return false;
  out = static_cast<Eigen::Index>(v);
  return true;
}

Matrix parse_block(LineReader& r) {
  const auto header = r.next();
  if (!header) parse_error(r, "missing 'rows cols' header");
  const auto dims = split(*header);
  Eigen::Index rows = 0, cols = 0;
  if (dims.size() != 2 || !parse_index(dims[0], rows) || !parse_index(dims[1], cols)) {
    parse_error(r, "header must be two nonnegative integers, got '" + *header + "'");
  }
  Matrix m(rows, cols);
  if (cols == 0) return m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto line = r.next();
    if (!line) parse_error(r, "expected " + std::to_string(rows) + " rows, got " + std::to_string(i));
    const auto toks = split(*line);
    if (static_cast<Eigen::Index>(toks.size()) != cols) {
      parse_error(r, "row " + std::to_string(i) + " has " + std::to_string(toks.size()) +
                         " values, expected " + std::to_string(cols));
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      if (!parse_double(toks[static_cast<size_t>(k)], m(i, k))) {
        parse_error(r, "cannot parse '" + toks[static_cast<size_t>(k)] + "' as a number");
      }
    }
  }
  return m;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Matrix read_matx(std::istream& in) {
  LineReader r(in);
  Matrix m = parse_block(r);
  if (r.next()) parse_error(r, "trailing content after matrix");
  return m;
}

Matrix read_matx(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_matx(in);
}

void write_matx(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  if (m.cols() == 0) return;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      if (k) out << ' ';
      out << format_double(m(i, k));
    }
    out << '\n';
  }
}

void write_matx(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path);
  write_matx(out, m);
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

ConstraintSpec read_constraint(std::istream& in) {
  LineReader r(in);
  ConstraintSpec spec;
  spec.f_jac = parse_block(r);
  const std::string& comment = r.last_comment();
  const std::string tag = "# constraint ";
  if (comment.rfind(tag, 0) == 0) spec.label = comment.substr(tag.size());
  if (auto line = r.next()) {
    auto toks = split(*line);
    if (toks.empty() || toks[0] != "offset") parse_error(r, "expected 'offset' line");
    Vector c(static_cast<Eigen::Index>(toks.size() - 1));
    for (std::size_t k = 1; k < toks.size(); ++k) {
      if (!parse_double(toks[k], c(static_cast<Eigen::Index>(k - 1)))) {
        parse_error(r, "cannot parse offset value '" + toks[k] + "'");
      }
    }
    spec.offset = c;
    if (r.next()) parse_error(r, "trailing content after offset");
  }
  spec.validate();
  return spec;
}

ConstraintSpec read_constraint(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_constraint(in);
}

void write_constraint(std::ostream& out, const ConstraintSpec& spec) {
  if (!spec.label.empty()) out << "# constraint " << spec.label << '\n';
  write_matx(out, spec.f_jac);
  if (spec.offset) {
    out << "offset";
    for (Eigen::Index k = 0; k < spec.offset->size(); ++k) out << ' ' << format_double((*spec.offset)(k));
    out << '\n';
  }
}

void write_constraint(const std::filesystem::path& path, const ConstraintSpec& spec) {
  auto out = open_out(path);
  write_constraint(out, spec);
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace crbkit::io
