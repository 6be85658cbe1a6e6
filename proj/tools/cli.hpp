#pragma once

#include "deblur/image.hpp"
#include "deblur/noise.hpp"
#include "deblur/psf.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace deblur::cli {

enum class Command { blur, deblur, analyze, eval, psf };
enum class Method { naive, tsvd, tikhonov, variational, map_blind };

struct Selector {
  enum class Kind { fixed, gcv, lcurve, discrepancy };
  Kind kind = Kind::gcv;
  double value = 0.0;  // fixed only
};

struct RunConfig {
  Command command = Command::deblur;
  std::filesystem::path in;
  std::filesystem::path out;
  std::string psf;  // file path or gauss:/motion: spec
  BoundaryCondition bc = BoundaryCondition::reflexive;
  std::optional<std::string> noise;  // frob:VAL or std:VAL
  Method method = Method::tikhonov;
  Selector select;
  bool select_given = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> emit_picard;
  std::optional<std::filesystem::path> emit_curve;
  std::optional<std::filesystem::path> emit_trace;
  std::optional<std::filesystem::path> truth;
  std::optional<std::filesystem::path> json;

  // variational
  std::string reg = "smooth";
  double step = 0.7;
  int iterations = 1500;
  double tolerance = 1e-6;  // relative objective change; 0 runs all iterations
  // map-blind
  Index kernel_size = 7;
  int levels = 6;
  std::optional<std::filesystem::path> kernel_out;
};

Method parse_method(const std::string& name);
Selector parse_selector(const std::string& text);
NoiseSpec parse_noise(const std::string& text, std::uint64_t seed);
/// gauss:k,s1,s2,rho | motion:k,steps | path to a PSF CSV.
Psf parse_psf(const std::string& text, std::uint64_t seed);
bool psf_is_random(const std::string& text);

/// Parses a full command line (argv[0] is the program name). Conflicting
/// flags raise std::invalid_argument.
RunConfig parse_args(const std::vector<std::string>& args);

/// Runs one subcommand and returns its JSON summary, which is also written
/// to cfg.json when set. Warnings go to `err`.
nlohmann::json execute(const RunConfig& cfg, std::ostream& err);

/// Parse + execute + print the summary. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace deblur::cli
