#include "crbkit/run.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "crbkit/constraint.hpp"
#include "crbkit/crb.hpp"
#include "crbkit/fim.hpp"
#include "crbkit/io.hpp"
#include "crbkit/random.hpp"
#include "crbkit/statmodel.hpp"
#include "crbkit/verify.hpp"

namespace fs = std::filesystem;

namespace crbkit {
namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorCode::InvalidInput, "invalid value '" + value + "' for '" + key + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  double x = 0.0;
  std::string t = (!v.empty() && v[0] == '+') ? v.substr(1) : v;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || p != t.data() + t.size() || !std::isfinite(x)) bad_value(key, v);
  return x;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int x{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v);
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v);
}

Vector parse_vector(const std::string& key, const std::string& v) {
  std::string s = v;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream ss(s);
  std::vector<double> vals;
  std::string tok;
  while (ss >> tok) vals.push_back(parse_real(key, tok));
  if (vals.empty()) bad_value(key, v);
  return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

std::string join(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += io::format_double(v(i));
  }
  return out;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "command") command = value;
  else if (key == "input") input = value.empty() ? std::nullopt : std::optional<fs::path>(value);
  else if (key == "model") model = value.empty() ? std::nullopt : std::optional<std::string>(value);
  else if (key == "s_len") s_len = parse_int<Eigen::Index>(key, value);
  else if (key == "h_len") h_len = parse_int<Eigen::Index>(key, value);
  else if (key == "noise_var") noise_var = parse_real(key, value);
  else if (key == "design") design = value.empty() ? std::nullopt : std::optional<fs::path>(value);
  else if (key == "theta") theta = value.empty() ? std::nullopt : std::optional<Vector>(parse_vector(key, value));
  else if (key == "seed") seed = parse_int<std::uint64_t>(key, value);
  else if (key == "count") count = value.empty() ? std::nullopt : std::optional<std::size_t>(parse_int<std::size_t>(key, value));
  else if (key == "samples") samples = parse_int<std::size_t>(key, value);
  else if (key == "out") out = value;
  else if (key == "rank_tol") tol.rank_tol_rel = parse_real(key, value);
  else if (key == "psd_tol") tol.psd_tol = (value == "auto" || value.empty()) ? std::nullopt : std::optional<double>(parse_real(key, value));
  else if (key == "margin_tol") tol.margin_tol = parse_real(key, value);
  else if (key == "force_optimal") force_optimal = parse_bool(key, value);
  else if (key == "workers") workers = parse_int<unsigned>(key, value);
  else if (key == "version") {}  // recorded in manifests; informational
  else throw Error(ErrorCode::InvalidInput, "unknown config key '" + key + "'");
}

void RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidInput, path.string() + ":" + std::to_string(line_no) +
                                               ": expected 'key = value'");
    }
    set(trim(t.substr(0, eq)), t.substr(eq + 1));
  }
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidInput, msg); };
  if (command != "analyze" && command != "certify" && command != "experiment") {
    fail("command must be analyze, certify or experiment (got '" + command + "')");
  }
  if (input && model) fail("give either an input matrix or a model, not both");
  if (!input && !model && command != "certify") fail(command + " needs --input or --model");
  if (model && *model != "blind_channel" && *model != "linear_gaussian") {
    fail("unknown model '" + *model + "' (blind_channel, linear_gaussian)");
  }
  if (model && *model == "linear_gaussian" && !design) fail("linear_gaussian needs 'design'");
  if (s_len < 1 || h_len < 1) fail("s_len and h_len must be positive");
  if (!(noise_var > 0.0)) fail("noise_var must be positive");
  if (!(tol.rank_tol_rel > 0.0) || !(tol.margin_tol > 0.0) || (tol.psd_tol && !(*tol.psd_tol > 0.0))) {
    fail("tolerances must be positive");
  }
  if (count && *count < 1) fail("count must be at least 1");
  if (samples != 0 && samples < 100) fail("samples must be 0 or at least 100");
  if (workers < 1) fail("workers must be at least 1");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> e;
  e.emplace_back("version", kVersion);
  e.emplace_back("command", command);
  if (input) e.emplace_back("input", input->string());
  if (model) e.emplace_back("model", *model);
  if (model && *model == "blind_channel") {
    e.emplace_back("s_len", std::to_string(s_len));
    e.emplace_back("h_len", std::to_string(h_len));
  }
  if (model) e.emplace_back("noise_var", io::format_double(noise_var));
  if (design) e.emplace_back("design", design->string());
  if (theta) e.emplace_back("theta", join(*theta));
  e.emplace_back("seed", std::to_string(seed));
  if (count) e.emplace_back("count", std::to_string(*count));
  e.emplace_back("samples", std::to_string(samples));
  e.emplace_back("out", out.string());
  e.emplace_back("rank_tol", io::format_double(tol.rank_tol_rel));
  e.emplace_back("psd_tol", tol.psd_tol ? io::format_double(*tol.psd_tol) : "auto");
  e.emplace_back("margin_tol", io::format_double(tol.margin_tol));
  e.emplace_back("force_optimal", force_optimal ? "true" : "false");
  e.emplace_back("workers", std::to_string(workers));
  return e;
}

namespace {

struct StageFailure {
  std::string stage;
  ErrorCode code;
  std::string message;
};

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw StageFailure{name, e.code(), e.what()};
  }
}

struct Problem {
  SymMatrix j;
  Vector theta;
  std::string source;
  std::unique_ptr<GaussianMeanModel> model;
  std::optional<ChannelDims> channel;
};

Problem load_problem(const RunConfig& c) {
  Problem p;
  if (c.input) {
    p.source = "matx:" + c.input->string();
    const Matrix raw = io::read_matx(*c.input);
    if (raw.rows() != raw.cols() || raw.rows() == 0) {
      throw Error(ErrorCode::InvalidMatrix, "FIM must be a non-empty square matrix");
    }
    if ((raw - raw.transpose()).norm() > 1e-9 * raw.norm()) {
      throw Error(ErrorCode::InvalidMatrix, "FIM is not symmetric");
    }
    p.j = SymMatrix(raw);
    if (!is_psd(p.j, c.tol.psd_tol)) {
      throw Error(ErrorCode::InvalidMatrix, "FIM is not positive semidefinite (min eigenvalue " +
                                                io::format_double(eigvals_desc(p.j).min()) + ")");
    }
    p.theta = c.theta.value_or(Vector::Zero(p.j.dim()));
    if (p.theta.size() != p.j.dim()) {
      throw Error(ErrorCode::InvalidInput, "theta length does not match the FIM dimension");
    }
    return p;
  }
  if (*c.model == "blind_channel") {
    const ChannelDims dims{c.s_len, c.h_len};
    p.model = std::make_unique<BlindChannelModel>(dims, c.noise_var);
    p.channel = dims;
  } else {
    p.model = std::make_unique<LinearGaussianModel>(io::read_matx(*c.design), c.noise_var);
  }
  p.source = "model:" + *c.model;
  if (c.theta) {
    p.theta = *c.theta;
  } else {
    Rng rng = make_rng(c.seed, "theta");
    p.theta = generic_theta(p.model->param_dim(), rng);
  }
  if (p.theta.size() != p.model->param_dim()) {
    throw Error(ErrorCode::InvalidInput, "theta has length " + std::to_string(p.theta.size()) +
                                             ", model has " +
                                             std::to_string(p.model->param_dim()) + " parameters");
  }
  p.j = fim_gaussian_mean(*p.model, p.theta).matrix;
  return p;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& header) : path_(path), out_(path) {
    if (!out_) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out_ << io::kCsvVersionLine << '\n' << header << '\n';
  }
  template <class... T>
  void row(const T&... cells) {
    std::size_t k = 0;
    ((out_ << (k++ ? "," : "") << cell(cells)), ...);
    out_ << '\n';
  }
  void close() {
    out_.close();
    if (!out_) throw Error(ErrorCode::IoError, "write failed: " + path_.string());
  }

 private:
  static std::string cell(double x) { return io::format_double(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <class I, class = std::enable_if_t<std::is_integral_v<I>>>
  static std::string cell(I i) { return std::to_string(i); }

  fs::path path_;
  std::ofstream out_;
};

void prepare_out(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec || !fs::is_directory(c.out)) {
    throw Error(ErrorCode::IoError, "cannot create output directory " + c.out.string());
  }
}

fs::path write_manifest(const RunConfig& c) {
  const fs::path path = c.out / "manifest.txt";
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "# crb-kit run manifest; usable as --config\n";
  for (const auto& [k, v] : c.entries()) out << k << " = " << v << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
  return path;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput:
    case ErrorCode::InvalidMatrix:
    case ErrorCode::InvalidModel:
    case ErrorCode::IoError:
    case ErrorCode::FullRankFim:
      return kExitInvalidInput;
    default:
      return kExitNumerical;
  }
}

template <class F>
RunResult guarded(F&& body) {
  try {
    return body();
  } catch (const StageFailure& f) {
    return {exit_code_for(f.code), "error in stage '" + f.stage + "': " + f.message, {}};
  } catch (const Error& e) {
    return {exit_code_for(e.code()), e.what(), {}};
  } catch (const std::exception& e) {
    return {kExitNumerical, std::string("unexpected failure: ") + e.what(), {}};
  }
}

std::string describe(const Matrix& m) {
  std::ostringstream os;
  os.precision(6);
  os << '[';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) os << "; ";
    for (Eigen::Index k = 0; k < m.cols(); ++k) os << (k ? " " : "") << m(i, k);
  }
  os << ']';
  return os.str();
}

}  // namespace

RunResult cmd_analyze(const RunConfig& c) {
  return guarded([&]() -> RunResult {
    stage("config", [&] { c.validate(); });
    Problem p = stage("load input", [&] { return load_problem(c); });
    stage("output", [&] { prepare_out(c); });
    const Tolerances& tol = c.tol;
    const Eigen::Index n = p.j.dim();
    RunResult res;
    std::ostringstream text;

    const RankedSvd svd = stage("rank", [&] { return ranked_svd(p.j, tol.rank_tol_rel); });
    const CrbReport unc = stage("unconstrained crb", [&] { return unconstrained_crb(p.j, tol); });
    const EigenSpectrum fim_eig = eigvals_desc(p.j);

    std::optional<ConstraintSpec> opt;
    std::optional<CrbReport> con;
    std::optional<MinConstraintReport> minrep;
    if (svd.rank < n) {
      opt = stage("optimal constraint", [&] { return optimal_affine_constraint(p.j, p.theta, tol); });
      con = stage("constrained crb", [&] {
        return constrained_crb(p.j, opt->f_jac, tol, ConstraintKind::Affine);
      });
      minrep = stage("minimum constraint check", [&] { return check_minimum_constraint(p.j, *opt, tol); });
    }

    std::optional<FimEstimate> mc;
    if (c.samples > 0 && p.model) {
      mc = stage("monte carlo fim", [&] {
        MonteCarloOptions o;
        o.n_samples = c.samples;
        o.rng_seed = derive_seed(c.seed, "analyze_mc");
        o.workers = c.workers;
        return fim_monte_carlo(*p.model, p.theta, o);
      });
    }

    stage("write report", [&] {
      const auto put = [&](const char* name, const Matrix& m) {
        io::write_matx(c.out / name, m);
        res.files.push_back(c.out / name);
      };
      put("fim.matx", p.j.matrix());
      put("pinv.matx", unc.bound->matrix());
      if (opt) {
        io::write_constraint(c.out / "constraint.txt", *opt);
        res.files.push_back(c.out / "constraint.txt");
        if (con->exists) put("crb_constrained.matx", con->bound->matrix());
      }
      if (mc) put("fim_mc.matx", mc->matrix.matrix());

      CsvWriter sum(c.out / "summary.csv", "key,value");
      sum.row("source", p.source);
      sum.row("n", n);
      sum.row("rank", svd.rank);
      sum.row("nullity", n - svd.rank);
      sum.row("singular_fim", unc.singular_fim ? "true" : "false");
      sum.row("trace_pinv", unc.trace);
      if (opt) {
        sum.row("constraint_rows", opt->rows());
        sum.row("constrained_crb_exists", con->exists ? "true" : "false");
        if (con->exists) {
          sum.row("trace_constrained", con->trace);
          sum.row("trace_margin", con->trace - unc.trace);
          sum.row("frobenius_gap_to_pinv", (con->bound->matrix() - unc.bound->matrix()).norm());
        }
        sum.row("is_minimum_constraint", minrep->is_minimum ? "true" : "false");
      } else {
        sum.row("note", "no constraint needed");
      }
      if (p.channel) {
        const Vector d = scalar_ambiguity_direction(p.theta, *p.channel);
        sum.row("ambiguity_residual_rel", (p.j.matrix() * d).norm() / p.j.matrix().norm());
      }
      if (mc) {
        sum.row("mc_samples", mc->n_samples);
        sum.row("mc_std_err_bound", mc->std_err_bound);
        sum.row("mc_frobenius_gap", (mc->matrix.matrix() - p.j.matrix()).norm());
        double z = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index k = 0; k < n; ++k)
            if (mc->std_err(i, k) > 0.0)
              z = std::max(z, std::abs(mc->matrix(i, k) - p.j(i, k)) / mc->std_err(i, k));
        sum.row("mc_max_abs_z", z);
      }
      sum.close();
      res.files.push_back(c.out / "summary.csv");

      CsvWriter eig(c.out / "eigenvalues.csv", "index,fim,pinv,constrained_crb");
      for (Eigen::Index i = 0; i < n; ++i) {
        const std::string ce = (con && con->exists) ? io::format_double(con->eigenvalues[i]) : "";
        eig.row(i + 1, fim_eig[i], unc.eigenvalues[i], ce);
      }
      eig.close();
      res.files.push_back(c.out / "eigenvalues.csv");
      res.files.push_back(write_manifest(c));
    });

    text << "source: " << p.source << "\n";
    text << "rank " << svd.rank << " of " << n << " (nullity " << n - svd.rank << ")\n";
    text << "tr(J+) = " << io::format_double(unc.trace) << "\n";
    if (opt) {
      text << "optimal constraint F = " << describe(opt->f_jac)
           << ", C = " << describe(opt->offset->transpose()) << "\n";
      if (con->exists) text << "tr(constrained CRB) = " << io::format_double(con->trace) << "\n";
    } else {
      text << "FIM is nonsingular: no constraint needed; J^-1 = " << describe(unc.bound->matrix())
           << "\n";
    }
    text << "report written to " << c.out.string() << "\n";
    res.summary = text.str();
    return res;
  });
}

RunResult cmd_certify(const RunConfig& c) {
  return guarded([&]() -> RunResult {
    stage("config", [&] { c.validate(); });
    SuiteOptions o;
    if (c.input || c.model) {
      o.fim = stage("load input", [&] { return load_problem(c).j; });
    }
    stage("output", [&] { prepare_out(c); });
    o.seed = c.seed;
    o.constraints_per_fim = c.count.value_or(20);
    o.workers = c.workers;
    o.tol = c.tol;
    const auto certs = stage("certificate suite", [&] { return run_certificate_suite(o); });

    RunResult res;
    bool all = true;
    stage("write report", [&] {
      CsvWriter csv(c.out / "certificates.csv",
                    "theorem_id,passed,n_cases,worst_margin,statistic,statistic_value");
      for (const auto& cert : certs) {
        csv.row(to_string(cert.id), cert.passed ? "true" : "false", cert.n_cases,
                cert.worst_margin, cert.statistic_name, cert.statistic);
        all = all && cert.passed;
        for (const auto& w : cert.witnesses) {
          const fs::path dir = c.out / "witnesses";
          fs::create_directories(dir);
          for (const auto& [name, m] : w.matrices) {
            const fs::path f = dir / (std::string(to_string(cert.id)) + "_case" +
                                      std::to_string(w.case_index) + "_" + name + ".matx");
            io::write_matx(f, m);
            res.files.push_back(f);
          }
        }
      }
      csv.close();
      res.files.push_back(c.out / "certificates.csv");
      res.files.push_back(write_manifest(c));
    });

    std::ostringstream text;
    for (const auto& cert : certs) {
      text << (cert.passed ? "PASS " : "FAIL ") << to_string(cert.id) << "  cases=" << cert.n_cases
           << "  worst_margin=" << io::format_double(cert.worst_margin);
      if (!cert.statistic_name.empty()) {
        text << "  " << cert.statistic_name << "=" << io::format_double(cert.statistic);
      }
      text << "\n";
      for (const auto& w : cert.witnesses) text << "  witness " << w.case_index << ": " << w.description << "\n";
    }
    res.summary = text.str();
    res.exit_code = all ? kExitOk : kExitCertificateFailed;
    return res;
  });
}

RunResult cmd_experiment(const RunConfig& c) {
  return guarded([&]() -> RunResult {
    stage("config", [&] { c.validate(); });
    Problem p = stage("load input", [&] { return load_problem(c); });
    stage("output", [&] { prepare_out(c); });
    const Tolerances& tol = c.tol;
    const std::size_t count = c.count.value_or(1000);

    const double trace_pinv = stage("pseudoinverse", [&] { return pinv_via_basis(p.j, tol.rank_tol_rel).trace(); });
    std::vector<ConstraintSpec> specs;
    stage("sample constraints", [&] {
      if (ranked_svd(p.j, tol.rank_tol_rel).rank == p.j.dim()) {
        throw Error(ErrorCode::FullRankFim, "experiment needs a singular FIM");
      }
      if (c.force_optimal) specs.push_back(optimal_affine_constraint(p.j, p.theta, tol));
      if (count > specs.size()) {
        auto drawn = sample_minimum_constraints(p.j, count - specs.size(),
                                                derive_seed(c.seed, "experiment"), tol);
        std::move(drawn.begin(), drawn.end(), std::back_inserter(specs));
      }
    });

    RunResult res;
    double min_margin = std::numeric_limits<double>::infinity();
    double min_trace = min_margin, max_trace = -min_margin, sum_trace = 0.0;
    std::size_t retries = 0;
    stage("constrained crb", [&] {
      CsvWriter csv(c.out / "traces.csv", "sample_index,trace,margin");
      for (std::size_t k = 0; k < specs.size(); ++k) {
        const CrbReport r = constrained_crb(p.j, specs[k].f_jac, tol);
        if (!r.exists) throw Error(ErrorCode::NumericalFailure, "sampled constraint lost existence");
        const double margin = r.trace - trace_pinv;
        csv.row(k, r.trace, margin);
        min_margin = std::min(min_margin, margin);
        min_trace = std::min(min_trace, r.trace);
        max_trace = std::max(max_trace, r.trace);
        sum_trace += r.trace;
        retries += specs[k].retries;
      }
      csv.close();
      res.files.push_back(c.out / "traces.csv");
    });
    stage("write report", [&] {
      CsvWriter sum(c.out / "experiment_summary.csv", "key,value");
      sum.row("source", p.source);
      sum.row("count", specs.size());
      sum.row("trace_pinv", trace_pinv);
      sum.row("min_trace", min_trace);
      sum.row("max_trace", max_trace);
      sum.row("mean_trace", sum_trace / static_cast<double>(specs.size()));
      sum.row("min_margin", min_margin);
      sum.row("total_retries", retries);
      sum.close();
      res.files.push_back(c.out / "experiment_summary.csv");
      res.files.push_back(write_manifest(c));
    });

    std::ostringstream text;
    text << specs.size() << " minimum constraints sampled\n"
         << "tr(J+) = " << io::format_double(trace_pinv) << "\n"
         << "min tr(CRB) = " << io::format_double(min_trace)
         << "  (min margin " << io::format_double(min_margin) << ")\n";
    const bool ok = min_margin >= -tol.margin_tol;
    if (!ok) text << "trace bound violated beyond margin_tol\n";
    res.summary = text.str();
    res.exit_code = ok ? kExitOk : kExitCertificateFailed;
    return res;
  });
}

RunResult run_command(const RunConfig& config) {
  if (config.command == "analyze") return cmd_analyze(config);
  if (config.command == "certify") return cmd_certify(config);
  if (config.command == "experiment") return cmd_experiment(config);
  return guarded([&]() -> RunResult {
    config.validate();
    return {};
  });
}

}  // namespace crbkit
