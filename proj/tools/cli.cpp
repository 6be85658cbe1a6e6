#include "cli.hpp"

#include "deblur/convolution.hpp"
#include "deblur/filters.hpp"
#include "deblur/io.hpp"
#include "deblur/linear_operator.hpp"
#include "deblur/metrics.hpp"
#include "deblur/operator.hpp"
#include "deblur/paramselect.hpp"
#include "deblur/spectral.hpp"
#include "deblur/variational.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace deblur::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct HelpRequested {
  std::string text;
};

double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw std::invalid_argument("invalid number '" + s + "' in " + what);
  return v;
}

long to_integer(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw std::invalid_argument("invalid integer '" + s + "' in " + what);
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::string command_name(Command c) {
  switch (c) {
    case Command::blur: return "blur";
    case Command::deblur: return "deblur";
    case Command::analyze: return "analyze";
    case Command::eval: return "eval";
    case Command::psf: return "psf";
  }
  return "?";
}

std::string method_name(Method m) {
  switch (m) {
    case Method::naive: return "naive";
    case Method::tsvd: return "tsvd";
    case Method::tikhonov: return "tikhonov";
    case Method::variational: return "variational";
    case Method::map_blind: return "map-blind";
  }
  return "?";
}

std::string selector_text(const Selector& s) {
  switch (s.kind) {
    case Selector::Kind::fixed: {
      std::ostringstream o;
      o << "fixed:" << s.value;
      return o.str();
    }
    case Selector::Kind::gcv: return "gcv";
    case Selector::Kind::lcurve: return "lcurve";
    case Selector::Kind::discrepancy: return "discrepancy";
  }
  return "?";
}

json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

// Per-channel artifact path: unchanged for one channel, name.cN.ext otherwise.
fs::path channel_path(const fs::path& p, int c, int count) {
  if (count == 1) return p;
  fs::path out = p.parent_path() / p.stem();
  out += ".c" + std::to_string(c);
  out += p.extension();
  return out;
}

void write_text(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  io::write_atomically(path, body);
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

// Forward model for one channel with an SVD when one is affordable.
struct Problem {
  std::optional<SvdTriple> svd;
  LinearOperator op;
  std::string path;  // "separable" or "dense"
};

Problem build_problem(const Psf& psf, Index m, Index n, BoundaryCondition bc, bool need_svd) {
  if (psf.size() > std::min(m, n)) throw std::invalid_argument("PSF is larger than the image");
  if (auto factors = separable_factors(psf)) {
    SeparableBlur blur = build_separable(factors->second, factors->first, m, n, bc);
    std::optional<SvdTriple> svd;
    if (need_svd) svd = svd_separable(blur);
    return {std::move(svd), LinearOperator::from_separable(std::move(blur)), "separable"};
  }
  if (!need_svd) return {std::nullopt, LinearOperator::from_convolution(psf, m, n, bc), "convolution"};
  if (m * n > kDenseCap)
    throw std::invalid_argument("image has N = " + std::to_string(m * n) + " pixels, above the dense limit of " +
                                std::to_string(kDenseCap) +
                                "; use a separable PSF (e.g. gauss:k,s1,s2,0) for the Kronecker path, "
                                "or --method variational");
  DenseOperator dense = assemble_dense(psf, m, n, bc);
  SvdTriple svd = svd_dense(dense);
  return {std::move(svd), LinearOperator::from_dense(std::move(dense)), "dense"};
}

double noise_norm_for(const RunConfig& cfg, Index pixels) {
  if (!cfg.noise) throw std::invalid_argument("--select discrepancy needs --noise to state the noise level");
  const NoiseSpec spec = parse_noise(*cfg.noise, 0);
  return spec.target == NoiseSpec::Target::frobenius ? spec.value
                                                     : spec.value * std::sqrt(static_cast<double>(pixels));
}

json picard_summary(const PicardSeries& series, const SvdTriple& svd) {
  const NoiseEstimate noise = noise_plateau(series);
  const PicardVerdict verdict = picard_check(series, noise);
  return {{"eta_hat", noise.eta},
          {"plateau_index", noise.plateau_index},
          {"condition_number", number(condition_number(svd))},
          {"picard_satisfied", verdict.satisfied},
          {"picard_nonincreasing_fraction", verdict.nonincreasing_fraction}};
}

void emit_selection_curve(const fs::path& path, const SelectionResult& r) {
  if (r.method == SelectionMethod::lcurve)
    write_text(path, [&](std::ostream& o) { write_lcurve_csv(o, r); });
  else if (r.method == SelectionMethod::gcv_tikhonov || r.method == SelectionMethod::gcv_tsvd)
    write_text(path, [&](std::ostream& o) { write_gcv_csv(o, r); });
}

Image read_input(const fs::path& p, io::NetpbmInfo* info = nullptr) {
  if (p.empty()) throw std::invalid_argument("--in is required");
  return io::read_image(p, info);
}

void require_out(const RunConfig& cfg) {
  if (cfg.out.empty()) throw std::invalid_argument("--out is required for " + command_name(cfg.command));
}

void maybe_eval(const RunConfig& cfg, const Image& result, json& summary) {
  if (!cfg.truth) return;
  const Image truth = io::read_image(*cfg.truth);
  if (truth.rows() != result.rows() || truth.cols() != result.cols() ||
      truth.channel_count() != result.channel_count())
    throw std::invalid_argument("--truth does not match the reconstruction's shape");
  summary["quality"] = to_json(evaluate_quality(result, truth));
}

json cmd_blur(const RunConfig& cfg, std::uint64_t seed) {
  require_out(cfg);
  io::NetpbmInfo info;
  const Image x = read_input(cfg.in, &info);
  const Psf psf = parse_psf(cfg.psf, seed);
  Image blurred = convolve2d(x, psf, cfg.bc);
  json summary;
  double noise_norm = 0.0;
  if (cfg.noise) {
    const NoisyImage noisy = add_noise(blurred, parse_noise(*cfg.noise, seed));
    for (const auto& c : noisy.noise.channels()) noise_norm += c.squaredNorm();
    blurred = noisy.observed;
  }
  summary["noise_frobenius"] = std::sqrt(noise_norm);
  summary["psf"] = {{"spec", cfg.psf}, {"size", psf.size()}};
  io::write_image(cfg.out, blurred, info);
  summary["outputs"] = {cfg.out.string()};
  return summary;
}

json cmd_psf(const RunConfig& cfg, std::uint64_t seed) {
  require_out(cfg);
  const Psf psf = parse_psf(cfg.psf, seed);
  io::write_psf_csv(cfg.out, psf);
  return {{"psf",
           {{"spec", cfg.psf},
            {"size", psf.size()},
            {"doubly_symmetric", is_doubly_symmetric(psf)},
            {"separable", separable_factors(psf).has_value()}}},
          {"outputs", {cfg.out.string()}}};
}

json cmd_eval(const RunConfig& cfg) {
  if (!cfg.truth) throw std::invalid_argument("eval needs --truth");
  const Image x = read_input(cfg.in);
  const Image truth = io::read_image(*cfg.truth);
  if (truth.rows() != x.rows() || truth.cols() != x.cols() || truth.channel_count() != x.channel_count())
    throw std::invalid_argument("--in and --truth differ in shape");
  json summary;
  summary["quality"] = to_json(evaluate_quality(x, truth));
  return summary;
}

json cmd_analyze(const RunConfig& cfg) {
  const Image b = read_input(cfg.in);
  const Psf psf = parse_psf(cfg.psf, 0);
  json channels = json::array();
  std::vector<std::string> outputs;
  for (int c = 0; c < b.channel_count(); ++c) {
    const Problem p = build_problem(psf, b.rows(), b.cols(), cfg.bc, true);
    const Vector bv = vectorize(b.channel(c));
    const PicardSeries series = picard_series(*p.svd, bv);
    json ch = picard_summary(series, *p.svd);
    ch["operator"] = p.path;
    if (cfg.emit_picard) {
      const fs::path path = channel_path(*cfg.emit_picard, c, b.channel_count());
      write_text(path, [&](std::ostream& o) { write_csv(o, series); });
      outputs.push_back(path.string());
    }
    if (cfg.emit_curve) {
      const auto grid = default_alpha_grid(p.svd->singular_values());
      const SelectionResult r = cfg.select.kind == Selector::Kind::gcv ? gcv_tikhonov(*p.svd, bv, grid)
                                                                        : lcurve(*p.svd, bv, grid);
      const fs::path path = channel_path(*cfg.emit_curve, c, b.channel_count());
      emit_selection_curve(path, r);
      outputs.push_back(path.string());
      ch["curve"] = std::string(to_string(r.method));
      ch["alpha"] = r.alpha;
    }
    channels.push_back(ch);
  }
  return {{"channels", channels}, {"outputs", outputs}};
}

RegularizerSpec regularizer_from_name(const std::string& name) {
  if (name == "smooth") return SmoothNorm{Difference::identity};
  if (name == "smooth-diff") return SmoothNorm{Difference::first_difference};
  if (name == "pnorm") return PNorm{};
  if (name == "sparse-edge") return SparseEdge{};
  throw std::invalid_argument("unknown --reg '" + name + "' (smooth | smooth-diff | pnorm | sparse-edge)");
}

json cmd_deblur(const RunConfig& cfg, std::ostream& err) {
  require_out(cfg);
  io::NetpbmInfo info;
  const Image b = read_input(cfg.in, &info);
  std::vector<Grid> result;
  json channels = json::array();
  std::vector<std::string> outputs;
  const int count = b.channel_count();

  if (cfg.method == Method::map_blind) {
    MapConfig mc;
    mc.kernel_size = cfg.kernel_size;
    mc.levels = cfg.levels;
    mc.bc = cfg.bc;
    for (int c = 0; c < count; ++c) {
      const MapResult r = map_blind_deblur(b.channel(c), mc);
      result.push_back(r.x);
      json ch = {{"stages", r.stages.size()}, {"final_objective", r.stages.back().objective.back()}};
      if (cfg.kernel_out) {
        const fs::path path = channel_path(*cfg.kernel_out, c, count);
        io::write_psf_csv(path, r.kernel);
        outputs.push_back(path.string());
      }
      if (cfg.emit_trace) {
        const fs::path path = channel_path(*cfg.emit_trace, c, count);
        write_text(path, [&](std::ostream& o) {
          o << "stage,lambda,iteration,objective\n";
          o.precision(17);
          for (std::size_t s = 0; s < r.stages.size(); ++s)
            for (std::size_t i = 0; i < r.stages[s].objective.size(); ++i)
              o << s << ',' << r.stages[s].lambda << ',' << i << ',' << r.stages[s].objective[i] << '\n';
        });
        outputs.push_back(path.string());
      }
      channels.push_back(ch);
    }
  } else {
    const Psf psf = parse_psf(cfg.psf, 0);
    const bool spectral = cfg.method != Method::variational;
    for (int c = 0; c < count; ++c) {
      const Problem p = build_problem(psf, b.rows(), b.cols(), cfg.bc, spectral);
      const Vector bv = vectorize(b.channel(c));
      json ch = {{"operator", p.path}};
      Vector x;
      if (cfg.method == Method::variational) {
        GdConfig gd;
        gd.step = cfg.step;
        gd.lambda = cfg.select.kind == Selector::Kind::fixed ? cfg.select.value : gd.lambda;
        gd.max_iterations = cfg.iterations;
        gd.relative_tolerance = cfg.tolerance;
        const GdResult r = gradient_reconstruct(p.op, bv, regularizer_from_name(cfg.reg), gd);
        x = r.x;
        ch["lambda"] = gd.lambda;
        ch["iterations"] = r.trace.size() - 1;
        ch["converged"] = r.converged;
        if (cfg.emit_trace) {
          const fs::path path = channel_path(*cfg.emit_trace, c, count);
          write_text(path, [&](std::ostream& o) { write_trace_csv(o, r.trace); });
          outputs.push_back(path.string());
        }
      } else {
        const SvdTriple& svd = *p.svd;
        const PicardSeries series = picard_series(svd, bv);
        const json diag = picard_summary(series, svd);
        if (!diag["picard_satisfied"].get<bool>())
          err << "warning: channel " << c << ": discrete Picard condition not satisfied\n";
        ch["diagnostics"] = diag;
        if (cfg.emit_picard) {
          const fs::path path = channel_path(*cfg.emit_picard, c, count);
          write_text(path, [&](std::ostream& o) { write_csv(o, series); });
          outputs.push_back(path.string());
        }
        FilterSpec filter;
        std::optional<SelectionResult> selection;
        if (cfg.method == Method::naive) {
          filter = CustomFilter{Vector::Ones(svd.size())};
        } else if (cfg.method == Method::tsvd) {
          if (cfg.select.kind == Selector::Kind::fixed) {
            const double k = cfg.select.value;
            if (k != std::floor(k)) throw std::invalid_argument("tsvd needs an integer truncation in fixed:<k>");
            filter = Tsvd{static_cast<Index>(k)};
          } else {
            selection = gcv_tsvd(svd, bv);
            filter = Tsvd{selection->truncation};
          }
        } else {
          const auto grid = default_alpha_grid(svd.singular_values());
          switch (cfg.select.kind) {
            case Selector::Kind::fixed: filter = Tikhonov{cfg.select.value}; break;
            case Selector::Kind::gcv: selection = gcv_tikhonov(svd, bv, grid); break;
            case Selector::Kind::lcurve: selection = lcurve(svd, bv, grid); break;
            case Selector::Kind::discrepancy:
              selection = discrepancy(svd, bv, noise_norm_for(cfg, b.rows() * b.cols()));
              break;
          }
          if (selection) {
            if (!(selection->alpha > 0.0))
              throw std::runtime_error("selector returned alpha = 0; the data allow no regularization");
            filter = Tikhonov{selection->alpha};
          }
        }
        x = filtered_reconstruct(svd, bv, filter);
        if (const auto* t = std::get_if<Tikhonov>(&filter)) ch["alpha"] = t->alpha;
        if (const auto* t = std::get_if<Tsvd>(&filter)) ch["truncation"] = t->truncation;
        if (selection) {
          ch["selector"] = std::string(to_string(selection->method));
          if (cfg.emit_curve && selection->method != SelectionMethod::discrepancy) {
            const fs::path path = channel_path(*cfg.emit_curve, c, count);
            emit_selection_curve(path, *selection);
            outputs.push_back(path.string());
          }
        }
      }
      result.push_back(unvectorize(x, b.rows(), b.cols()));
      channels.push_back(ch);
    }
  }

  const Image recon(std::move(result));
  io::write_image(cfg.out, recon, info);
  outputs.insert(outputs.begin(), cfg.out.string());
  json summary = {{"channels", channels}};
  maybe_eval(cfg, recon, summary);
  summary["outputs"] = outputs;
  return summary;
}

void validate_config(const RunConfig& cfg) {
  const bool deblur = cfg.command == Command::deblur;
  const bool analyze = cfg.command == Command::analyze;
  auto reject = [](bool bad, const std::string& why) {
    if (bad) throw std::invalid_argument(why);
  };
  reject(cfg.emit_picard && !(analyze || deblur), "--emit-picard applies to deblur and analyze");
  reject(cfg.emit_curve && !(analyze || deblur), "--emit-curve applies to deblur and analyze");
  reject(cfg.emit_trace && !deblur, "--emit-trace applies to deblur");
  reject(cfg.truth && !(deblur || cfg.command == Command::eval), "--truth applies to deblur and eval");
  reject(cfg.noise && !(cfg.command == Command::blur || deblur), "--noise applies to blur and deblur");
  reject(cfg.kernel_out.has_value() && !(deblur && cfg.method == Method::map_blind),
         "--kernel-out applies to --method map-blind");
  if (cfg.command == Command::blur || cfg.command == Command::psf || cfg.command == Command::analyze ||
      (deblur && cfg.method != Method::map_blind))
    reject(cfg.psf.empty(), "--psf is required for " + command_name(cfg.command));
  if (!deblur) return;
  const bool spectral = cfg.method == Method::naive || cfg.method == Method::tsvd || cfg.method == Method::tikhonov;
  reject(cfg.emit_picard && !spectral, "--emit-picard needs a spectral method (naive | tsvd | tikhonov)");
  reject(cfg.emit_trace && spectral, "--emit-trace needs --method variational or map-blind");
  if (cfg.method == Method::variational)
    reject(cfg.select_given && cfg.select.kind != Selector::Kind::fixed,
           "--method variational takes its weight from --select fixed:<lambda>");
  if (cfg.method == Method::tsvd)
    reject(cfg.select.kind == Selector::Kind::lcurve || cfg.select.kind == Selector::Kind::discrepancy,
           "--method tsvd supports --select fixed:<k> or gcv");
  reject(cfg.emit_curve && !(cfg.method == Method::tsvd || cfg.method == Method::tikhonov),
         "--emit-curve needs --method tsvd or tikhonov");
  reject(cfg.emit_curve && cfg.select.kind != Selector::Kind::gcv && cfg.select.kind != Selector::Kind::lcurve,
         "--emit-curve needs --select gcv or lcurve");
}

}  // namespace

Method parse_method(const std::string& name) {
  if (name == "naive") return Method::naive;
  if (name == "tsvd") return Method::tsvd;
  if (name == "tikhonov") return Method::tikhonov;
  if (name == "variational") return Method::variational;
  if (name == "map-blind") return Method::map_blind;
  throw std::invalid_argument("unknown --method '" + name + "' (naive | tsvd | tikhonov | variational | map-blind)");
}

Selector parse_selector(const std::string& text) {
  if (text == "gcv") return {Selector::Kind::gcv, 0.0};
  if (text == "lcurve") return {Selector::Kind::lcurve, 0.0};
  if (text == "discrepancy") return {Selector::Kind::discrepancy, 0.0};
  if (text.rfind("fixed:", 0) == 0) {
    const double v = to_double(text.substr(6), "--select");
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("--select fixed:<value> needs a value > 0");
    return {Selector::Kind::fixed, v};
  }
  throw std::invalid_argument("unknown --select '" + text + "' (fixed:<v> | gcv | lcurve | discrepancy)");
}

NoiseSpec parse_noise(const std::string& text, std::uint64_t seed) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("--noise expects frob:VAL or std:VAL");
  const std::string kind = text.substr(0, colon);
  const double v = to_double(text.substr(colon + 1), "--noise");
  if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("--noise value must be >= 0");
  if (kind == "frob") return NoiseSpec::frobenius(v, seed);
  if (kind == "std") return NoiseSpec::std_dev(v, seed);
  throw std::invalid_argument("--noise expects frob:VAL or std:VAL");
}

bool psf_is_random(const std::string& text) { return text.rfind("motion:", 0) == 0; }

Psf parse_psf(const std::string& text, std::uint64_t seed) {
  if (text.rfind("gauss:", 0) == 0) {
    const auto parts = split(text.substr(6), ',');
    if (parts.size() != 4) throw std::invalid_argument("--psf gauss:k,s1,s2,rho");
    return gaussian_psf(to_integer(parts[0], "--psf"), to_double(parts[1], "--psf"), to_double(parts[2], "--psf"),
                        to_double(parts[3], "--psf"));
  }
  if (text.rfind("motion:", 0) == 0) {
    const auto parts = split(text.substr(7), ',');
    if (parts.size() != 2) throw std::invalid_argument("--psf motion:k,steps");
    return motion_psf(to_integer(parts[0], "--psf"), static_cast<int>(to_integer(parts[1], "--psf")), seed);
  }
  if (text.empty()) throw std::invalid_argument("--psf is required");
  return io::read_psf_csv(text);
}

RunConfig parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Model-based image deblurring", "deblur"};
  app.require_subcommand(1, 1);
  RunConfig cfg;
  std::string in, out, bc = "reflexive", method, select, picard, curve, trace, truth, json_path, kernel_out, noise;
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--in", in, "input image (PGM/PPM or CSV)");
    sub->add_option("--out", out, "output path");
    sub->add_option("--psf", cfg.psf, "PSF file or gauss:k,s1,s2,rho or motion:k,steps");
    sub->add_option("--bc", bc, "boundary condition: zero | periodic | reflexive");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--json", json_path, "write the JSON summary here");
  };
  CLI::App* blur = app.add_subcommand("blur", "blur (and optionally add noise to) an image");
  CLI::App* deblur = app.add_subcommand("deblur", "reconstruct a sharp image");
  CLI::App* analyze = app.add_subcommand("analyze", "spectral diagnostics");
  CLI::App* eval = app.add_subcommand("eval", "quality metrics against ground truth");
  CLI::App* psf = app.add_subcommand("psf", "write a PSF as CSV");
  for (CLI::App* sub : {blur, deblur, analyze, eval, psf}) common(sub);
  for (CLI::App* sub : {blur, deblur}) sub->add_option("--noise", noise, "frob:VAL or std:VAL");
  for (CLI::App* sub : {deblur, analyze}) {
    sub->add_option("--select", select, "fixed:<v> | gcv | lcurve | discrepancy");
    sub->add_option("--emit-picard", picard, "Picard CSV path");
    sub->add_option("--emit-curve", curve, "GCV or L-curve CSV path");
  }
  deblur->add_option("--method", method, "naive | tsvd | tikhonov | variational | map-blind");
  deblur->add_option("--emit-trace", trace, "objective trace CSV path");
  for (CLI::App* sub : {deblur, eval}) sub->add_option("--truth", truth, "ground-truth image");
  deblur->add_option("--reg", cfg.reg, "variational regularizer: smooth | smooth-diff | pnorm | sparse-edge");
  deblur->add_option("--step", cfg.step, "gradient-descent step size");
  deblur->add_option("--iterations", cfg.iterations, "gradient-descent iteration cap");
  deblur->add_option("--tolerance", cfg.tolerance, "gradient-descent stopping change in the objective (0 disables)");
  deblur->add_option("--kernel-size", cfg.kernel_size, "map-blind kernel size");
  deblur->add_option("--levels", cfg.levels, "map-blind lambda levels");
  deblur->add_option("--kernel-out", kernel_out, "map-blind recovered kernel CSV");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    throw HelpRequested{subs.empty() ? app.help() : subs.front()->help()};
  }

  if (blur->parsed()) cfg.command = Command::blur;
  if (deblur->parsed()) cfg.command = Command::deblur;
  if (analyze->parsed()) cfg.command = Command::analyze;
  if (eval->parsed()) cfg.command = Command::eval;
  if (psf->parsed()) cfg.command = Command::psf;
  CLI::App* sub = app.get_subcommands().front();
  auto given = [&](const std::string& flag) {
    const CLI::Option* o = sub->get_option_no_throw(flag);
    return o != nullptr && o->count() > 0;
  };

  cfg.in = in;
  cfg.out = out;
  cfg.bc = parse_boundary(bc);
  if (given("--noise")) cfg.noise = noise;
  if (given("--method")) cfg.method = parse_method(method);
  if (cfg.command == Command::analyze) cfg.select.kind = Selector::Kind::lcurve;
  if (given("--select")) {
    cfg.select = parse_selector(select);
    cfg.select_given = true;
  } else if (cfg.command == Command::deblur && cfg.method == Method::variational) {
    cfg.select = {Selector::Kind::fixed, GdConfig{}.lambda};
  }
  if (given("--seed")) cfg.seed = seed;
  if (given("--emit-picard")) cfg.emit_picard = picard;
  if (given("--emit-curve")) cfg.emit_curve = curve;
  if (given("--emit-trace")) cfg.emit_trace = trace;
  if (given("--truth")) cfg.truth = truth;
  if (given("--json")) cfg.json = json_path;
  if (given("--kernel-out")) cfg.kernel_out = kernel_out;
  validate_config(cfg);
  return cfg;
}

json execute(const RunConfig& cfg, std::ostream& err) {
  const bool random = (cfg.noise && cfg.command == Command::blur) ||
                      (psf_is_random(cfg.psf) && cfg.command != Command::eval);
  const bool generated = random && !cfg.seed;
  const std::uint64_t seed = cfg.seed ? *cfg.seed : (random ? fresh_seed() : 0);

  json summary;
  switch (cfg.command) {
    case Command::blur: summary = cmd_blur(cfg, seed); break;
    case Command::psf: summary = cmd_psf(cfg, seed); break;
    case Command::eval: summary = cmd_eval(cfg); break;
    case Command::analyze: summary = cmd_analyze(cfg); break;
    case Command::deblur: summary = cmd_deblur(cfg, err); break;
  }
  summary["command"] = command_name(cfg.command);
  summary["input"] = cfg.in.string();
  summary["bc"] = std::string(to_string(cfg.bc));
  if (!cfg.psf.empty()) summary["psf_spec"] = cfg.psf;
  if (cfg.noise) summary["noise"] = *cfg.noise;
  if (cfg.command == Command::deblur) {
    summary["method"] = method_name(cfg.method);
    if (cfg.method != Method::naive && cfg.method != Method::map_blind) summary["select"] = selector_text(cfg.select);
    if (cfg.method == Method::variational) {
      summary["reg"] = cfg.reg;
      summary["step"] = cfg.step;
      summary["iterations_cap"] = cfg.iterations;
      summary["tolerance"] = cfg.tolerance;
    }
  }
  if (random) {
    summary["seed"] = seed;
    summary["seed_generated"] = generated;
  }
  if (cfg.json) {
    summary["outputs"].push_back(cfg.json->string());
    const std::string text = summary.dump(2);
    write_text(*cfg.json, [&](std::ostream& o) { o << text << '\n'; });
  }
  return summary;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_args(args);
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  try {
    const json summary = execute(cfg, err);
    out << summary.dump(2) << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace deblur::cli
