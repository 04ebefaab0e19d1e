// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "coalpp/moments.hpp"
#include "coalpp/stats.hpp"

namespace coalpp::cli {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

/// --threads default: COALPP_THREADS if set, else machine parallelism.
inline unsigned default_threads() {
  if (const char* env = std::getenv("COALPP_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != nullptr && *end == '\0' && v > 0 && v < 1024) return static_cast<unsigned>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

/// Writes through a temp file plus rename so readers never see partial output.
inline void write_text_atomic(const std::string& path, const std::string& body) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp(target);
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw error("cannot open output file " + tmp.string());
    out << body;
    out.flush();
    if (!out) throw error("failed writing " + tmp.string());
  }
  fs::rename(tmp, target);
}

struct RunManifest {
  std::string command;
  json parameters;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 1;
  double duration_seconds = 0.0;

  json to_json() const {
    return json{{"command", command},      {"parameters", parameters},
                {"seed", seed},            {"version", kVersion},
                {"threads", threads},      {"duration_seconds", duration_seconds}};
  }
};

inline json report_to_json(const TestReport& r) {
  return json{{"name", r.name},       {"estimate", r.estimate},   {"std_error", r.std_error},
              {"reference", r.reference}, {"tolerance", r.tolerance}, {"passed", r.passed},
              {"replicates", r.replicates}, {"seed", r.seed},      {"n", r.n}};
}

inline json reports_to_json(const std::vector<TestReport>& reports) {
  json arr = json::array();
  for (const TestReport& r : reports) arr.push_back(report_to_json(r));
  return arr;
}

inline void emit(const std::string& body, const std::string& out_path) {
  if (out_path.empty())
    std::cout << body;
  else
    write_text_atomic(out_path, body);
}

namespace detail {

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ',') {
      parts.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

inline std::vector<double> parse_double_list(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  for (const std::string& p : split_list(text)) {
    try {
      std::size_t used = 0;
      const double v = std::stod(p, &used);
      if (used != p.size()) throw std::invalid_argument(p);
      out.push_back(v);
    } catch (const std::exception&) {
      throw invalid_parameter(flag + ": cannot parse '" + p + "'");
    }
  }
  return out;
}

inline std::vector<std::uint64_t> parse_uint_list(const std::string& flag, const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const std::string& p : split_list(text)) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(p, &used);
      if (used != p.size()) throw std::invalid_argument(p);
      out.push_back(v);
    } catch (const std::exception&) {
      throw invalid_parameter(flag + ": cannot parse '" + p + "'");
    }
  }
  return out;
}

inline std::vector<Suite> parse_suites(const std::string& name, bool& acceptance) {
  acceptance = false;
  if (name == "void") return {Suite::Void};
  if (name == "mean") return {Suite::Mean};
  if (name == "coupling") return {Suite::Coupling};
  if (name == "gumbel") return {Suite::Gumbel};
  if (name == "poisson") return {Suite::Poisson};
  if (name == "ewens") return {Suite::Ewens};
  if (name == "all") {
    acceptance = true;
    return {Suite::Void, Suite::Mean, Suite::Coupling, Suite::Gumbel, Suite::Poisson, Suite::Ewens};
  }
  throw invalid_parameter("--suite: unknown suite '" + name + "'");
}

}  // namespace detail

// --- simulate ---

struct SimulateArgs {
  std::uint64_t n = 100;
  std::uint64_t reps = 100;
  std::uint64_t seed = kDefaultSeed;
  double t1_max = -1.0;  // negative: derive from the rectangle envelope
  double t2_max = -1.0;
  std::string rects;
  std::string out;
  unsigned threads = 0;
};

/// One CSV row per replicate: the replicate index, then pi_s and pi_k per
/// rectangle. Streams match the verify battery, so column means agree with
/// the verify suite at the same (n, seed, reps, envelope).
inline std::string simulate_csv(const SimulateArgs& args) {
  if (args.n < 2) throw invalid_parameter("--n: must be at least 2");
  if (args.reps == 0) throw invalid_parameter("--reps: must be positive");
  RectUnion rects;
  try {
    rects = parse_union(args.rects);
  } catch (const error& e) {
    throw invalid_parameter(std::string("--rects: ") + e.what());
  }
  if (rects.empty()) throw invalid_parameter("--rects: need at least one rectangle");
  double env_t1 = 0.0, env_t2 = 0.0;
  for (const Rect& r : rects) {
    env_t1 = std::max(env_t1, r.u1);
    env_t2 = std::max(env_t2, r.u2);
  }
  const double t1_max = args.t1_max < 0.0 ? env_t1 : args.t1_max;
  const double t2_max = args.t2_max < 0.0 ? env_t2 : args.t2_max;
  if (!(t1_max > 0.0) || !(t2_max > 0.0))
    throw invalid_parameter("--rects: rectangle envelope is degenerate; pass --t1-max/--t2-max");
  if (env_t1 > t1_max) throw invalid_parameter("--t1-max: smaller than the rectangle envelope");
  if (env_t2 > t2_max) throw invalid_parameter("--t2-max: smaller than the rectangle envelope");
  if (floor_pow(args.n, t2_max) > kMaxCoalescentSize)
    throw scale_limit("--t2-max: floor(n^t2_max) exceeds 1e7");

  const unsigned threads = args.threads == 0 ? 1 : args.threads;
  const std::uint64_t sweep_seed = substream_seed(args.seed, stream_purpose::kContextSweep);
  const auto rows = parallel_replicates(sweep_seed, args.reps, threads, [&](std::uint64_t, RngStream& rng) {
    const CouplingContext ctx = build_context(args.n, t1_max, t2_max, rng);
    std::vector<std::uint64_t> vals;
    vals.reserve(rects.size() * 2);
    for (const Rect& r : rects) {
      vals.push_back(pi_rect(ctx, Process::S, r));
      vals.push_back(pi_rect(ctx, Process::K, r));
    }
    return vals;
  });

  std::ostringstream os;
  os << "replicate";
  for (std::size_t i = 0; i < rects.size(); ++i) os << ",pi_s_" << i << ",pi_k_" << i;
  os << "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    os << r;
    for (std::uint64_t v : rows[r]) os << ',' << v;
    os << "\n";
  }
  return os.str();
}

// --- command wiring ---

inline int run_cli(std::vector<std::string> args) {
  CLI::App app{"coupled segregating-sites / cycle-count point process simulator"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "sample coupled realizations, one CSV row per replicate");
  simulate->add_option("--n", sim.n, "base sample-size scale (>= 2)")->required();
  simulate->add_option("--reps", sim.reps, "number of replicates")->required();
  simulate->add_option("--seed", sim.seed, "RNG seed (default 0x5EED)");
  simulate->add_option("--t1-max", sim.t1_max, "evaluation bound for t1 (default: rectangle envelope)");
  simulate->add_option("--t2-max", sim.t2_max, "evaluation bound for t2 (default: rectangle envelope)");
  simulate->add_option("--rects", sim.rects, "rectangles 's1,u1,s2,u2', joined by ';'")->required();
  simulate->add_option("--out", sim.out, "output CSV path (default: stdout)");
  simulate->add_option("--threads", sim.threads, "worker threads (default: COALPP_THREADS or machine parallelism)");

  struct {
    std::string suite = "all";
    std::uint64_t n = 100'000;
    std::uint64_t reps = 20'000;
    std::uint64_t seed = kDefaultSeed;
    std::string out;
    unsigned threads = 0;
  } ver;
  CLI::App* verify = app.add_subcommand("verify", "run verification suites; exit 0 iff every check passed");
  verify->add_option("--suite", ver.suite, "void|mean|coupling|gumbel|poisson|ewens|all")->required();
  verify->add_option("--n", ver.n, "base sample-size scale");
  verify->add_option("--reps", ver.reps, "replicates per sweep (>= 100)");
  verify->add_option("--seed", ver.seed, "RNG seed (default 0x5EED)");
  verify->add_option("--out", ver.out, "output JSON path (default: stdout)");
  verify->add_option("--threads", ver.threads, "worker threads");

  struct {
    std::string n = "100";
    std::string t1 = "1";
    std::string t2 = "1";
    std::string out;
    std::string format;
  } mom;
  CLI::App* moments_cmd = app.add_subcommand("moments", "closed-form moment tables over parameter sweeps");
  moments_cmd->add_option("--n", mom.n, "comma list of n values");
  moments_cmd->add_option("--t1", mom.t1, "comma list of t1 values");
  moments_cmd->add_option("--t2", mom.t2, "comma list of t2 values");
  moments_cmd->add_option("--out", mom.out, "output path (default: stdout)");
  moments_cmd->add_option("--format", mom.format, "json|csv (default: json, or csv for *.csv outputs)");

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.emplace_back("coalpp");
  for (std::string& a : args) argv_storage.push_back(std::move(a));
  std::vector<const char*> argv;
  argv.reserve(argv_storage.size());
  for (const std::string& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&started] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };

  try {
    if (simulate->parsed()) {
      if (sim.threads == 0) sim.threads = default_threads();
      const std::string csv = simulate_csv(sim);
      emit(csv, sim.out);
      if (!sim.out.empty()) {
        RunManifest manifest;
        manifest.command = "simulate";
        manifest.parameters = json{{"n", sim.n},           {"reps", sim.reps},   {"t1_max", sim.t1_max},
                                   {"t2_max", sim.t2_max}, {"rects", sim.rects}, {"out", sim.out}};
        manifest.seed = sim.seed;
        manifest.threads = sim.threads;
        manifest.duration_seconds = elapsed();
        write_text_atomic(sim.out + ".manifest.json", manifest.to_json().dump(2) + "\n");
      }
      return 0;
    }

    if (verify->parsed()) {
      if (ver.threads == 0) ver.threads = default_threads();
      bool acceptance = false;
      const std::vector<Suite> suites = detail::parse_suites(ver.suite, acceptance);
      MCConfig cfg;
      cfg.n = ver.n;
      cfg.replicates = ver.reps;
      cfg.seed = ver.seed;
      VerifyOptions opt;
      opt.acceptance_params = acceptance;
      opt.threads = ver.threads;
      const std::vector<TestReport> reports = run_verify(cfg, suites, opt);

      RunManifest manifest;
      manifest.command = "verify";
      manifest.parameters = json{{"suite", ver.suite}, {"n", ver.n}, {"reps", ver.reps}, {"out", ver.out}};
      manifest.seed = ver.seed;
      manifest.threads = ver.threads;
      manifest.duration_seconds = elapsed();
      const json body{{"manifest", manifest.to_json()}, {"reports", reports_to_json(reports)}};
      emit(body.dump(2) + "\n", ver.out);
      for (const TestReport& r : reports)
        if (!r.passed) return 1;
      return 0;
    }

    // moments
    const std::vector<std::uint64_t> ns = detail::parse_uint_list("--n", mom.n);
    const std::vector<double> t1s = detail::parse_double_list("--t1", mom.t1);
    const std::vector<double> t2s = detail::parse_double_list("--t2", mom.t2);
    if (ns.empty() || t1s.empty() || t2s.empty()) throw invalid_parameter("moments: empty parameter list");
    std::vector<MomentReport> table;
    for (std::uint64_t n : ns)
      for (double t1 : t1s)
        for (double t2 : t2s) table.push_back(compute_moment_report(n, t1, t2));

    std::string format = mom.format;
    if (format.empty())
      format = (mom.out.size() >= 4 && mom.out.substr(mom.out.size() - 4) == ".csv") ? "csv" : "json";
    if (format != "json" && format != "csv") throw invalid_parameter("--format: must be json or csv");

    RunManifest manifest;
    manifest.command = "moments";
    manifest.parameters = json{{"n", mom.n}, {"t1", mom.t1}, {"t2", mom.t2}, {"out", mom.out}, {"format", format}};
    manifest.threads = 1;
    manifest.duration_seconds = elapsed();

    if (format == "json") {
      json rows = json::array();
      for (const MomentReport& r : table) {
        json row;
        for (const auto& [key, value] : r.to_kv()) row[key] = value;
        rows.push_back(std::move(row));
      }
      const json body{{"manifest", manifest.to_json()}, {"reports", rows}};
      emit(body.dump(2) + "\n", mom.out);
    } else {
      std::ostringstream os;
      const auto header = table.front().to_kv();
      for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i].first;
      os << "\n";
      for (const MomentReport& r : table) {
        const auto kv = r.to_kv();
        for (std::size_t i = 0; i < kv.size(); ++i) {
          char buf[32];
          const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), kv[i].second);
          os << (i ? "," : "") << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
        }
        os << "\n";
      }
      emit(os.str(), mom.out);
      if (!mom.out.empty()) write_text_atomic(mom.out + ".manifest.json", manifest.to_json().dump(2) + "\n");
    }
    return 0;
  } catch (const scale_limit& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}

inline int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(std::move(args));
}

}  // namespace coalpp::cli
