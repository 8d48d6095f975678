#pragma once

// finsler command-line front end: argument parsing and the command runner.
// Kept header-only so the test suites can drive it without a subprocess.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include "finsler/error.hpp"
#include "finsler/hypersurface.hpp"
#include "finsler/indicatrix.hpp"
#include "finsler/metric_spec.hpp"
#include "finsler/metrics.hpp"
#include "lemma_check.hpp"

namespace finsler::tools {

enum class Command { verify, curvature, sample, lemma_test };
enum class Format { json, csv, text };

inline constexpr std::size_t kMaxDim = 64;

struct RunConfig {
  Command command = Command::verify;
  std::string metric_spec;
  std::optional<std::size_t> dim;
  std::size_t samples = 100;
  std::uint64_t seed = 42;
  double tol = 1e-8;
  Method method = Method::hyperdual;
  double fd_step = 1e-5;
  std::string output;  // empty: standard output
  Format format = Format::text;
  Vector point;  // curvature only
};

struct ExitCode {
  static constexpr int ok = 0;
  static constexpr int claim_failed = 1;
  static constexpr int usage = 2;
};

[[noreturn]] inline void usage_error(const std::string& msg) { throw Error(ErrorKind::UsageError, msg); }

/// Thrown by parse_args for --help; carries the formatted help text.
struct HelpRequested {
  std::string text;
};

/// Parses argv into a validated config. Throws Error(UsageError) naming the
/// offending flag; metric specs are parsed here too so that malformed specs
/// are usage errors.
inline RunConfig parse_args(const std::vector<std::string>& argv) {
  CLI::App app{"Mean curvature of Minkowski indicatrices", "finsler"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::size_t dim = 0;
  std::string method = "hyperdual";
  std::string format = "text";
  std::string point;
  std::optional<std::size_t> trials;

  auto common = [&](CLI::App* sub, bool metric) {
    if (metric) sub->add_option("--metric", cfg.metric_spec, "metric spec, e.g. randers:a=@a.json,b=0.3,0,0")->required();
    sub->add_option("--dim", dim, "ambient dimension");
    sub->add_option("--tol", cfg.tol, "pass tolerance");
    sub->add_option("--output", cfg.output, "output path (default: stdout)");
    sub->add_option("--format", format, "json | csv | text");
  };
  auto sampling = [&](CLI::App* sub) {
    sub->add_option("--samples", cfg.samples, "number of indicatrix points");
    sub->add_option("--seed", cfg.seed, "random seed");
  };
  auto derivs = [&](CLI::App* sub) {
    sub->add_option("--method", method, "hyperdual | fd");
    sub->add_option("--fd-step", cfg.fd_step, "finite-difference relative step");
  };

  CLI::App* verify = app.add_subcommand("verify", "check H = 1, tr g = n and umbilicity on sampled points");
  common(verify, true);
  sampling(verify);
  derivs(verify);
  CLI::App* curvature = app.add_subcommand("curvature", "curvature report at one point of the indicatrix");
  common(curvature, true);
  derivs(curvature);
  curvature->add_option("--point", point, "comma-separated direction, rescaled onto F = 1")->required();
  CLI::App* sample = app.add_subcommand("sample", "sampled indicatrix points with their mean curvature");
  common(sample, true);
  sampling(sample);
  derivs(sample);
  CLI::App* lemma = app.add_subcommand("lemma-test", "hyperplane trace identity on random (A, N)");
  common(lemma, false);
  lemma->add_option("--seed", cfg.seed, "random seed");
  lemma->add_option("--trials", trials, "number of random trials");

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    std::ostringstream text, ignored;
    app.exit(e, text, ignored);
    throw HelpRequested{text.str()};
  } catch (const CLI::ParseError& e) {
    usage_error(e.get_name() + ": " + e.what());
  }

  if (verify->parsed()) cfg.command = Command::verify;
  if (curvature->parsed()) cfg.command = Command::curvature;
  if (sample->parsed()) cfg.command = Command::sample;
  if (lemma->parsed()) cfg.command = Command::lemma_test;
  if (trials) cfg.samples = *trials;

  if (dim != 0) cfg.dim = dim;
  if (cfg.dim && (*cfg.dim < 2 || *cfg.dim > kMaxDim)) usage_error("--dim must lie in [2, 64]");
  if (cfg.samples < 1) usage_error(cfg.command == Command::lemma_test ? "--trials must be >= 1" : "--samples must be >= 1");
  if (cfg.samples > 10'000'000) usage_error("--samples is too large");
  if (!(cfg.tol > 0.0)) usage_error("--tol must be positive");
  if (!(cfg.fd_step > 0.0 && cfg.fd_step <= 1e-2)) usage_error("--fd-step must lie in (0, 1e-2]");
  if (method == "hyperdual") {
    cfg.method = Method::hyperdual;
  } else if (method == "fd") {
    cfg.method = Method::fd;
  } else {
    usage_error("--method must be hyperdual or fd");
  }
  if (format == "json") {
    cfg.format = Format::json;
  } else if (format == "csv") {
    cfg.format = Format::csv;
  } else if (format == "text") {
    cfg.format = Format::text;
  } else {
    usage_error("--format must be json, csv or text");
  }
  if (cfg.command == Command::curvature) {
    std::stringstream ss(point);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        cfg.point.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        usage_error("--point: '" + tok + "' is not a number");
      }
    }
    if (cfg.point.size() < 2) usage_error("--point needs at least two coordinates");
  }
  if (cfg.command != Command::lemma_test) {
    try {
      const FundamentalFunction f = parse_metric_spec(cfg.metric_spec, cfg.dim);
      cfg.dim = f.dim();
    } catch (const Error& e) {
      usage_error(std::string("--metric: ") + e.what());
    }
  } else if (!cfg.dim) {
    cfg.dim = 3;
  }
  if (cfg.command == Command::curvature && cfg.point.size() != *cfg.dim) {
    usage_error("--point has " + std::to_string(cfg.point.size()) + " coordinates, dimension is " +
                std::to_string(*cfg.dim));
  }
  return cfg;
}

/// FINSLER_THREADS, else hardware concurrency.
inline std::size_t thread_budget() {
  if (const char* env = std::getenv("FINSLER_THREADS")) {
    const std::string s(env);
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || v < 1) usage_error("FINSLER_THREADS must be a positive integer");
    return static_cast<std::size_t>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

inline std::string num(double v) { return fmt::format("{:.17g}", v); }

namespace report {

using nlohmann::ordered_json;

inline ordered_json failure_json(const PointFailure& f) {
  ordered_json j;
  j["index"] = f.index;
  j["y"] = f.y;
  j["residual_H"] = f.residual_H;
  j["residual_trace"] = f.residual_trace;
  j["residual_umbilic"] = f.residual_umbilic;
  if (!f.error.empty()) j["error"] = f.error;
  return j;
}

inline std::string csv_header(std::size_t dim) {
  std::string h = "index";
  for (std::size_t i = 1; i <= dim; ++i) h += fmt::format(",y_{}", i);
  return h + ",F,H,residual_H\n";
}

inline std::string csv_row(std::size_t index, const CurvatureReport& r, double f_value) {
  std::string row = std::to_string(index);
  for (double c : r.point.y) row += "," + num(c);
  return row + "," + num(f_value) + "," + num(r.H) + "," + num(r.residual_H) + "\n";
}

}  // namespace report

struct RunResult {
  int code = ExitCode::ok;
  std::string body;
};

inline VerifySummary run_batch(const RunConfig& cfg, const FundamentalFunction& f, std::size_t threads,
                               bool keep_reports) {
  VerifyOptions opts;
  opts.method = cfg.method;
  opts.report.fd_step = cfg.fd_step;
  opts.threads = threads;
  opts.keep_reports = keep_reports;
  return verify_claims(f, cfg.samples, cfg.seed, cfg.tol, opts);
}

inline std::string csv_points(const VerifySummary& s, const FundamentalFunction& f) {
  std::string body = report::csv_header(s.dim);
  for (const auto& [index, r] : s.reports) body += report::csv_row(index, r, f(std::span<const double>(r.point.y)));
  return body;
}

inline RunResult run_verify(const RunConfig& cfg, const FundamentalFunction& f, std::size_t threads) {
  const VerifySummary s = run_batch(cfg, f, threads, cfg.format == Format::csv);
  RunResult out{s.pass ? ExitCode::ok : ExitCode::claim_failed, {}};
  switch (cfg.format) {
    case Format::json: {
      report::ordered_json j;
      j["metric"] = cfg.metric_spec;
      j["dim"] = s.dim;
      j["samples"] = s.samples;
      j["seed"] = s.seed;
      j["method"] = std::string(to_string(s.method));
      j["max_residual_H"] = s.residual_H.max;
      j["mean_residual_H"] = s.residual_H.mean;
      j["max_residual_trace"] = s.residual_trace.max;
      j["max_residual_umbilic"] = s.residual_umbilic.max;
      j["max_oracle_gap"] = s.oracle_gap.max;
      j["oracle_unavailable"] = s.oracle_unavailable;
      j["pass"] = s.pass;
      j["failures"] = report::ordered_json::array();
      for (const auto& fl : s.failures) j["failures"].push_back(report::failure_json(fl));
      out.body = j.dump(2) + "\n";
      break;
    }
    case Format::csv: out.body = csv_points(s, f); break;
    case Format::text: {
      std::string& b = out.body;
      b += fmt::format("metric            {}\n", cfg.metric_spec);
      b += fmt::format("dim / samples     {} / {} (seed {}, method {})\n", s.dim, s.samples, s.seed,
                       to_string(s.method));
      b += fmt::format("residual H        max {:.3e}  mean {:.3e}\n", s.residual_H.max, s.residual_H.mean);
      b += fmt::format("residual trace    max {:.3e}  mean {:.3e}\n", s.residual_trace.max, s.residual_trace.mean);
      b += fmt::format("residual umbilic  max {:.3e}  mean {:.3e}\n", s.residual_umbilic.max,
                       s.residual_umbilic.mean);
      b += fmt::format("oracle gap        max {:.3e}  mean {:.3e}  ({} point(s) without oracle)\n", s.oracle_gap.max,
                       s.oracle_gap.mean, s.oracle_unavailable);
      b += fmt::format("path gap          max {:.3e}\n", s.max_path_gap);
      b += fmt::format("rejections        {}\n", s.rejections);
      b += fmt::format("elapsed           {:.3f} s\n", s.seconds);
      b += fmt::format("result            {} (tol {:.1e}, {} failing point(s))\n", s.pass ? "PASS" : "FAIL", s.tol,
                       s.failures.size());
      for (const auto& fl : s.failures) {
        b += fmt::format("  point {}: residual_H {:.3e} trace {:.3e} umbilic {:.3e} {}\n", fl.index, fl.residual_H,
                         fl.residual_trace, fl.residual_umbilic, fl.error);
      }
      break;
    }
  }
  return out;
}

inline RunResult run_sample(const RunConfig& cfg, const FundamentalFunction& f, std::size_t threads) {
  const VerifySummary s = run_batch(cfg, f, threads, true);
  bool ok = s.reports.size() == s.samples;
  for (const auto& [index, r] : s.reports) ok = ok && r.residual_H <= cfg.tol;
  RunResult out{ok ? ExitCode::ok : ExitCode::claim_failed, {}};
  switch (cfg.format) {
    case Format::csv: out.body = csv_points(s, f); break;
    case Format::json: {
      report::ordered_json arr = report::ordered_json::array();
      for (const auto& [index, r] : s.reports) {
        report::ordered_json j;
        j["index"] = index;
        j["y"] = r.point.y;
        j["F"] = f(std::span<const double>(r.point.y));
        j["H"] = r.H;
        j["residual_H"] = r.residual_H;
        arr.push_back(std::move(j));
      }
      out.body = arr.dump(2) + "\n";
      break;
    }
    case Format::text: {
      for (const auto& [index, r] : s.reports) {
        std::string coords;
        for (double c : r.point.y) coords += fmt::format(" {:+.6f}", c);
        out.body += fmt::format("{:5d} {}  H = {:.15f}\n", index, coords, r.H);
      }
      for (const auto& fl : s.failures) {
        if (!fl.error.empty()) out.body += fmt::format("{:5d} error: {}\n", fl.index, fl.error);
      }
      break;
    }
  }
  return out;
}

inline RunResult run_curvature(const RunConfig& cfg, const FundamentalFunction& f) {
  Vector y = cfg.point;
  const double scale = 1.0 / eval_F(f, y);
  for (double& c : y) c *= scale;

  ReportOptions ropts;
  ropts.fd_step = cfg.fd_step;
  const CurvatureReport r = adapted_report(f, make_indicatrix_point(f, y), cfg.method, ropts);

  // The same indicatrix point seen in the original linear coordinates.
  const auto field = defining_field(f);
  const DefiningEvaluation ev = evaluate_defining(field, y, SurfaceCheck::on_surface, {cfg.method, cfg.fd_step});
  const OrientedNormal n = unit_normal(ev, Orientation::along_gradient);
  const ShapeOperatorMatrix ambient = shape_operator(ev, n);
  const double ambient_H = mean_curvature_trace(ev, n);

  const bool ok = r.residual_H <= cfg.tol && r.residual_trace <= cfg.tol && r.residual_umbilic <= cfg.tol;
  RunResult out{ok ? ExitCode::ok : ExitCode::claim_failed, {}};
  switch (cfg.format) {
    case Format::json: {
      report::ordered_json j;
      j["metric"] = cfg.metric_spec;
      j["dim"] = f.dim();
      j["method"] = std::string(to_string(cfg.method));
      j["y"] = r.point.y;
      j["y_adapted"] = r.point.y_adapted;
      j["H"] = r.H;
      j["principal_curvatures"] = r.principal;
      j["residual_H"] = r.residual_H;
      j["residual_trace"] = r.residual_trace;
      j["residual_umbilic"] = r.residual_umbilic;
      j["oracle_gap"] = r.oracle_gap;
      j["ambient_H"] = ambient_H;
      j["ambient_principal_curvatures"] = ambient.principal_curvatures;
      j["pass"] = ok;
      out.body = j.dump(2) + "\n";
      break;
    }
    case Format::csv: out.body = report::csv_header(f.dim()) + report::csv_row(0, r, f(std::span<const double>(y))); break;
    case Format::text: {
      std::string coords;
      for (double c : r.point.y) coords += fmt::format(" {:.12g}", c);
      std::string kappa;
      for (double k : r.principal) kappa += fmt::format(" {:.15f}", k);
      std::string ambient_kappa;
      for (double k : ambient.principal_curvatures) ambient_kappa += fmt::format(" {:.12g}", k);
      out.body += fmt::format("point on F = 1    {}\n", coords);
      out.body += fmt::format("adapted H         {:.15f}\n", r.H);
      out.body += fmt::format("adapted kappa    {}\n", kappa);
      out.body += fmt::format("trace residual    {:.3e}\n", r.residual_trace);
      out.body += fmt::format("oracle gap        {:.3e}\n", r.oracle_gap);
      out.body += fmt::format("ambient H         {:.12g}\n", ambient_H);
      out.body += fmt::format("ambient kappa    {}\n", ambient_kappa);
      out.body += fmt::format("result            {}\n", ok ? "PASS" : "FAIL");
      break;
    }
  }
  return out;
}

inline RunResult run_lemma(const RunConfig& cfg, std::size_t threads) {
  const std::size_t dim = *cfg.dim;
  std::vector<double> delta(cfg.samples);
  detail::parallel_for(cfg.samples, threads, [&](std::size_t i) {
    const LemmaTrial t = lemma_trial(dim, cfg.seed, i);
    delta[i] = std::abs(trace_reduction(t.a, t.normal) - projected_trace(t.a, t.normal));
  });
  double worst = 0.0;
  for (double d : delta) worst = std::max(worst, d);
  const bool ok = worst <= cfg.tol;
  RunResult out{ok ? ExitCode::ok : ExitCode::claim_failed, {}};
  switch (cfg.format) {
    case Format::json: {
      report::ordered_json j;
      j["dim"] = dim;
      j["trials"] = cfg.samples;
      j["seed"] = cfg.seed;
      j["max_abs_delta_trace"] = worst;
      j["pass"] = ok;
      out.body = j.dump(2) + "\n";
      break;
    }
    case Format::csv:
      out.body = "trial,delta_trace\n";
      for (std::size_t i = 0; i < delta.size(); ++i) out.body += fmt::format("{},{}\n", i, num(delta[i]));
      break;
    case Format::text:
      out.body = fmt::format("lemma-test dim {} trials {} seed {}: max |delta trace| = {:.3e} -> {}\n", dim,
                             cfg.samples, cfg.seed, worst, ok ? "PASS" : "FAIL");
      break;
  }
  return out;
}

/// Executes a validated config. Library errors surface as exceptions; the
/// caller maps them to exit code 2.
inline RunResult run(const RunConfig& cfg) {
  const std::size_t threads = thread_budget();
  if (cfg.command == Command::lemma_test) return run_lemma(cfg, threads);
  const FundamentalFunction f = parse_metric_spec(cfg.metric_spec, cfg.dim);
  switch (cfg.command) {
    case Command::verify: return run_verify(cfg, f, threads);
    case Command::sample: return run_sample(cfg, f, threads);
    case Command::curvature: return run_curvature(cfg, f);
    case Command::lemma_test: break;
  }
  return {ExitCode::usage, {}};
}

/// Full CLI behaviour: parse, run, write output. Returns the exit code.
inline int main_entry(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  RunResult result;
  RunConfig cfg;
  try {
    cfg = parse_args(argv);
    result = run(cfg);
  } catch (const HelpRequested& h) {
    out << h.text;
    return ExitCode::ok;
  } catch (const std::exception& e) {
    err << "finsler: " << e.what() << "\n";
    return ExitCode::usage;
  }
  if (cfg.output.empty()) {
    out << result.body;
    out.flush();
    return result.code;
  }
  std::ofstream file(cfg.output, std::ios::binary);
  file << result.body;
  file.close();
  if (!file) {
    err << "finsler: cannot write '" << cfg.output << "'\n";
    return ExitCode::usage;
  }
  return result.code;
}

}  // namespace finsler::tools
