#include "gcdl/cli.hpp"

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gcdl/experiment.hpp"
#include "gcdl/idx.hpp"
#include "gcdl/verification.hpp"

namespace gcdl {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void print_usage(std::ostream& out) {
  out << "usage: gcdl <command> [options]\n"
         "\n"
         "commands:\n"
         "  run <config>     run the experiment described by a key=value config\n"
         "  bounds <config>  evaluate the convergence bounds over a list of horizons\n"
         "  verify           run the built-in oracle suite and print PASS/FAIL lines\n"
         "\n"
         "options:\n"
         "  --seed N   override the seed list (run) or the suite seed (verify)\n"
         "  --out P    override the output prefix\n"
         "  --quiet    suppress per-run and PASS lines\n";
}

struct Options {
  std::vector<std::string> positional;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool quiet = false;
};

bool parse_options(int argc, const char* const* argv, Options& options) {
  for (int i = 2; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--quiet") {
      options.quiet = true;
    } else if (arg == "--seed") {
      if (i + 1 >= argc) return false;
      try {
        options.seed = std::stoull(argv[++i]);
      } catch (const std::exception&) {
        return false;
      }
    } else if (arg == "--out") {
      if (i + 1 >= argc) return false;
      options.out = argv[++i];
    } else if (!arg.empty() && arg[0] == '-') {
      return false;
    } else {
      options.positional.push_back(arg);
    }
  }
  return true;
}

int cmd_run(const Options& options) {
  if (options.positional.size() != 1) {
    std::cerr << "run: expected exactly one config path\n";
    return kExitUsage;
  }
  ExperimentConfig config = load_config_file(options.positional[0]);
  if (options.seed) config.seeds = {*options.seed};
  if (options.out) config.out_prefix = *options.out;

  const ExperimentResult result = run_experiment(config);
  if (!options.quiet) {
    for (const RunRecord& record : result.runs) {
      std::printf("%s seed=%llu: %s, rows=%llu, final_bits=%llu, final_loss=%s\n",
                  method_name(record.method),
                  static_cast<unsigned long long>(record.seed),
                  record.diverged ? "diverged" : "ok",
                  static_cast<unsigned long long>(record.rows),
                  static_cast<unsigned long long>(record.final_bits),
                  format_double(record.final_loss).c_str());
    }
    std::printf("summary: %s\nruns: %s\n", result.summary_path.c_str(),
                result.runs_path.c_str());
  }
  if (result.any_divergence && !config.allow_divergence) {
    std::cerr << "error: a run diverged and allow_divergence is not set\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_bounds(const Options& options) {
  if (options.positional.size() != 1) {
    std::cerr << "bounds: expected exactly one config path\n";
    return kExitUsage;
  }
  std::ifstream in(options.positional[0], std::ios::binary);
  if (!in) {
    std::cerr << "bounds: cannot open config file: " << options.positional[0] << "\n";
    return kExitUsage;
  }
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  BoundsConfig config = parse_bounds_config(text);
  if (options.out) config.out_prefix = *options.out;
  const std::string path = write_bounds_csv(config);
  if (!options.quiet) std::printf("bounds: %s\n", path.c_str());
  return kExitOk;
}

int cmd_verify(const Options& options) {
  VerifyOptions verify;
  if (options.seed) verify.seed = *options.seed;
  const std::vector<CheckResult> results = run_verification_suite(verify);

  std::ofstream file;
  if (options.out) {
    file.open(*options.out, std::ios::binary);
    if (!file) {
      std::cerr << "verify: cannot open output file: " << *options.out << "\n";
      return kExitRuntime;
    }
  }
  bool all_pass = true;
  for (const CheckResult& result : results) {
    all_pass = all_pass && result.pass;
    const std::string line = std::string(result.pass ? "PASS" : "FAIL") + " " +
                             result.name + " (" + result.detail + ")";
    if (!options.quiet || !result.pass) std::printf("%s\n", line.c_str());
    if (file) file << line << '\n';
  }
  std::printf("%s: %zu checks\n", all_pass ? "PASS" : "FAIL", results.size());
  return all_pass ? kExitOk : kExitRuntime;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  if (argc < 2) {
    print_usage(std::cerr);
    return kExitUsage;
  }
  const std::string command = argv[1];
  if (command == "--help" || command == "-h" || command == "help") {
    print_usage(std::cout);
    return kExitOk;
  }

  Options options;
  if (!parse_options(argc, argv, options)) {
    print_usage(std::cerr);
    return kExitUsage;
  }

  try {
    if (command == "run") return cmd_run(options);
    if (command == "bounds") return cmd_bounds(options);
    if (command == "verify") return cmd_verify(options);
  } catch (const ParseError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const IngestError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitRuntime;
  }

  std::cerr << "unknown command '" << command << "'\n";
  print_usage(std::cerr);
  return kExitUsage;
}

}  // namespace gcdl
