#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "chroma_boltz/coloring.hpp"
#include "chroma_boltz/cycle_index.hpp"
#include "chroma_boltz/enum_oracle.hpp"
#include "chroma_boltz/errors.hpp"
#include "chroma_boltz/gf_oracle.hpp"
#include "chroma_boltz/samplers.hpp"
#include "chroma_boltz/spec_lang.hpp"

namespace chroma_boltz::cli {

namespace {

using nlohmann::json;

// Used by `sample --mode colored` when no --spec is given.
constexpr const char* kDefaultColoredSpec = "T = Z * MSet(T);\n";

struct Config {
  std::string spec_path;
  std::string cls;
  std::string format = "text";
  std::string t_text = "1";
  std::optional<double> x;
  std::optional<double> tune_n;
  std::optional<std::size_t> series;
  std::optional<std::size_t> cycle_index;
  std::uint64_t diag = 1;
  double n = 0.0;
  double tolerance = 1e-10;
  std::uint64_t count = 1;
  std::uint64_t seed = 0;
  std::string mode = "profiled";
  std::optional<std::size_t> max_size;
  std::optional<std::size_t> exact_size;
  std::size_t target = 0;
  double epsilon = 0.1;
  std::string window = "upper";
  bool stats = false;
  unsigned jobs = 1;
  std::uint64_t attempt_cap = 1'000'000;
  std::size_t enum_max = 4;
  bool objects = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string read_source(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read spec file '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

SpecSystem load_system(const Config& cfg, const char* fallback = nullptr) {
  if (cfg.spec_path.empty()) {
    if (fallback) return parse_spec(fallback);
    throw UsageError("--spec is required");
  }
  return parse_spec(read_source(cfg.spec_path));
}

std::string resolve_class(const SpecSystem& system, const Config& cfg) {
  const std::string name = cfg.cls.empty() ? system.root : cfg.cls;
  if (!system.contains(name)) throw ValidationError("unknown class '" + name + "'");
  return name;
}

// Decimal or fraction text to an exact rational ("1.5" -> 3/2, "10/3").
Rational parse_rational(const std::string& text) {
  try {
    if (auto slash = text.find('/'); slash != std::string::npos) {
      return Rational(BigInt(text.substr(0, slash)), BigInt(text.substr(slash + 1)));
    }
    const auto dot = text.find('.');
    if (dot == std::string::npos) return Rational(BigInt(text));
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    BigInt den = 1;
    for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
    if (digits.empty() || digits == "-") digits += "0";
    return Rational(BigInt(digits), den);
  } catch (const std::exception&) {
    throw UsageError("invalid number '" + text + "'");
  }
}

double parse_t(const Config& cfg) {
  const double t = parse_rational(cfg.t_text).convert_to<double>();
  if (!(t > 0.0)) throw UsageError("--t must be positive");
  return t;
}

unsigned integer_t(const Config& cfg) {
  const double t = parse_t(cfg);
  if (t != std::floor(t)) throw UsageError("--t must be a positive integer in this mode");
  return static_cast<unsigned>(t);
}

Window parse_window(const std::string& w) {
  if (w == "upper") return Window::UpperOnly;
  if (w == "two-sided") return Window::TwoSided;
  throw UsageError("--window must be 'upper' or 'two-sided'");
}

std::string rational_text(const Rational& q) { return q.str(); }

// ---------------------------------------------------------------- parse

int cmd_parse(const Config& cfg, std::ostream& out) {
  const SpecSystem system = load_system(cfg);
  const ValidationReport report = validate(system);
  if (cfg.format == "json") {
    json defs = json::array();
    for (const auto& d : system.definitions) defs.push_back({{"name", d.name}, {"expr", to_string(*d.expr)}});
    json classes = json::array();
    for (const auto& c : report.classes) {
      json entry = {{"name", c.name}, {"admits_epsilon", c.admits_epsilon}, {"well_founded", c.well_founded}};
      entry["min_size"] = c.min_size == kInfiniteSize ? json(nullptr) : json(c.min_size);
      classes.push_back(entry);
    }
    out << json{{"root", system.root}, {"definitions", defs}, {"classes", classes}, {"errors", report.errors}}.dump()
        << "\n";
  } else {
    out << to_string(system);
    for (const auto& c : report.classes) {
      out << "# " << c.name << ": min_size="
          << (c.min_size == kInfiniteSize ? std::string("inf") : std::to_string(c.min_size))
          << " epsilon=" << (c.admits_epsilon ? "yes" : "no") << " well_founded=" << (c.well_founded ? "yes" : "no")
          << "\n";
    }
    for (const auto& e : report.errors) out << "# error: " << e << "\n";
  }
  if (!report.ok()) throw ValidationError(report.errors.front());
  return 0;
}

// ---------------------------------------------------------------- gf

int cmd_gf(const Config& cfg, std::ostream& out) {
  const SpecSystem system = load_system(cfg);
  const std::string cls = resolve_class(system, cfg);
  const int modes = cfg.series.has_value() + cfg.cycle_index.has_value() + cfg.x.has_value();
  if (modes != 1) throw UsageError("gf needs exactly one of --series, --cycle-index, --x");

  if (cfg.series) {
    const Rational t = parse_rational(cfg.t_text);
    const CycleIndexSeries s = series_cycle_index(system, cls, *cfg.series, SeriesLimits{std::max<std::size_t>(8, *cfg.series)});
    const std::vector<Rational> coeffs = substitute_colors(s, t);
    if (cfg.format == "json") {
      json arr = json::array();
      for (const auto& c : coeffs) arr.push_back(rational_text(c));
      out << json{{"class", cls}, {"t", rational_text(t)}, {"coefficients", arr}}.dump() << "\n";
    } else {
      for (std::size_t i = 0; i < coeffs.size(); ++i) out << (i ? " " : "") << rational_text(coeffs[i]);
      out << "\n";
    }
    return 0;
  }
  if (cfg.cycle_index) {
    const CycleIndexSeries s = series_cycle_index(system, cls, *cfg.cycle_index);
    const auto terms = s.ordered_terms();
    if (cfg.format == "json") {
      json arr = json::array();
      for (const auto& [m, c] : terms) {
        arr.push_back({{"monomial", to_string(m)}, {"exponents", m}, {"coefficient", rational_text(c)}});
      }
      out << json{{"class", cls}, {"max_weight", s.max_weight}, {"terms", arr}}.dump() << "\n";
    } else {
      for (const auto& [m, c] : terms) out << rational_text(c) << " " << to_string(m) << "\n";
    }
    return 0;
  }
  const double t = parse_t(cfg);
  const double value = eval_diag(system, cls, cfg.diag, *cfg.x, t);
  const auto oracle = build_oracle(system, std::pow(*cfg.x, static_cast<double>(cfg.diag)), t);
  if (cfg.format == "json") {
    out << json{{"class", cls}, {"x", *cfg.x}, {"t", t}, {"diag", cfg.diag}, {"value", value},
                {"k_max", oracle->k_max()}}
               .dump()
        << "\n";
  } else {
    out << format_double(value) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- tune

int cmd_tune(const Config& cfg, std::ostream& out) {
  const SpecSystem system = load_system(cfg);
  const std::string cls = resolve_class(system, cfg);
  if (!(cfg.n > 0.0)) throw UsageError("--n must be positive");
  const TuneResult r = tune(system, cls, parse_t(cfg), cfg.n, cfg.tolerance);
  if (cfg.format == "json") {
    out << json{{"class", cls}, {"t", parse_t(cfg)}, {"target", cfg.n}, {"x0", r.x}, {"expected_size", r.expected_size},
                {"rho_estimate", r.rho_estimate}, {"iterations", r.iterations}}
               .dump()
        << "\n";
  } else {
    out << "x0 = " << format_double(r.x) << "\n";
    out << "expected_size = " << format_double(r.expected_size) << "\n";
    out << "rho_estimate = " << format_double(r.rho_estimate) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- sample

// Produces the output line of one sample from a freshly seeded context.
using Producer = std::function<std::string(SamplerContext&, RejectionStats&, std::uint64_t index)>;

void run_batch(const std::shared_ptr<const OracleTable>& oracle, const Config& cfg, const Producer& produce,
               RejectionStats& stats, std::ostream& out) {
  const unsigned jobs = std::max(1u, cfg.jobs);
  std::vector<SamplerContext> contexts;
  for (unsigned w = 0; w < jobs; ++w) contexts.emplace_back(oracle, 0);
  std::vector<RejectionStats> worker_stats(jobs);
  const std::uint64_t chunk = 256 * jobs;
  std::vector<std::string> lines;
  std::vector<std::exception_ptr> errors(jobs);
  for (std::uint64_t start = 0; start < cfg.count; start += chunk) {
    const std::uint64_t size = std::min(chunk, cfg.count - start);
    lines.assign(size, {});
    auto work = [&](unsigned w) {
      for (std::uint64_t i = w; i < size; i += jobs) {
        try {
          contexts[w].reseed(derive_seed(cfg.seed, start + i));
          lines[i] = produce(contexts[w], worker_stats[w], start + i);
        } catch (...) {
          errors[w] = std::current_exception();
          return;
        }
      }
    };
    if (jobs == 1) {
      work(0);
    } else {
      std::vector<std::thread> threads;
      for (unsigned w = 0; w < jobs; ++w) threads.emplace_back(work, w);
      for (auto& th : threads) th.join();
    }
    // Print in index order up to the first failure, then report it.
    std::uint64_t first_bad = size;
    std::exception_ptr first_error;
    for (unsigned w = 0; w < jobs; ++w) {
      if (!errors[w]) continue;
      for (std::uint64_t i = w; i < size; i += jobs) {
        if (lines[i].empty()) {
          if (i < first_bad) {
            first_bad = i;
            first_error = errors[w];
          }
          break;
        }
      }
    }
    for (std::uint64_t i = 0; i < first_bad; ++i) out << lines[i] << "\n";
    out.flush();
    if (first_error) std::rethrow_exception(first_error);
  }
  for (const auto& s : worker_stats) stats.merge(s);
}

std::string object_line(const Config& cfg, std::uint64_t index, const json& object, const std::string& text,
                        std::size_t size, std::optional<std::size_t> colors = std::nullopt) {
  if (cfg.format != "json") return text;
  json line = {{"index", index}, {"size", size}, {"object", object}};
  if (colors) line["colors"] = *colors;
  return line.dump();
}

int cmd_sample(const Config& cfg, std::ostream& out, spdlog::logger& log) {
  const bool colored = cfg.mode == "colored";
  if (!colored && cfg.mode != "profiled" && cfg.mode != "kcolored") {
    throw UsageError("--mode must be profiled, kcolored or colored");
  }
  const SpecSystem system = load_system(cfg, colored ? kDefaultColoredSpec : nullptr);
  const std::string cls_name = resolve_class(system, cfg);
  auto compiled = std::make_shared<const CompiledSystem>(compile(system));
  const int cls = compiled->class_index(cls_name);
  RejectionStats stats;

  if (colored) {
    if (cfg.target == 0) throw UsageError("--mode colored needs --n");
    if (cfg.x || cfg.tune_n) throw UsageError("--mode colored tunes x itself; drop --x / --tune");
    ColoredParams params;
    params.n = cfg.target;
    params.epsilon = cfg.epsilon;
    params.window = parse_window(cfg.window);
    params.attempt_cap = cfg.attempt_cap;
    const ColoredSetup setup = prepare_colored(compiled, cls, params);
    log.info("colored mode: n={} x0={} window=[{}, {}]", cfg.target, setup.tuning.x, setup.plan.window.lo,
             setup.plan.window.hi);
    const ColoredPlan& plan = setup.plan;
    run_batch(setup.oracle, cfg,
              [&](SamplerContext& ctx, RejectionStats& st, std::uint64_t index) {
                const ColoredObject obj = gamma_colored(ctx, plan, st);
                const std::size_t m = size(obj);
                return object_line(cfg, index, to_json(obj), encode(obj), m, m);
              },
              stats, out);
  } else {
    if (cfg.x.has_value() == cfg.tune_n.has_value()) throw UsageError("give exactly one of --x / --tune");
    const double t = parse_t(cfg);
    double x = 0.0;
    if (cfg.x) {
      x = *cfg.x;
    } else {
      const TuneResult r = tune(*compiled, cls, t, *cfg.tune_n);
      x = r.x;
      log.info("tuned x={} for expected size {}", x, *cfg.tune_n);
    }
    const auto oracle = build_oracle(compiled, x, t);
    log.debug("oracle built: K_max={}", oracle->k_max());
    const bool kcolored = cfg.mode == "kcolored";
    const unsigned colors = kcolored ? integer_t(cfg) : 0;
    const std::optional<std::size_t> ceiling = cfg.max_size;
    if (cfg.exact_size && !kcolored) throw UsageError("--exact-size needs --mode kcolored");
    run_batch(oracle, cfg,
              [&](SamplerContext& ctx, RejectionStats& st, std::uint64_t index) {
                if (cfg.exact_size) {
                  const ColoredObject obj = sample_kcolored_exact(ctx, cls, *cfg.exact_size, st, cfg.attempt_cap);
                  return object_line(cfg, index, to_json(obj), encode(obj), size(obj));
                }
                // Size ceiling: redraw until the object fits.
                ProfiledObject obj;
                for (std::uint64_t attempt = 0;; ++attempt) {
                  if (attempt >= cfg.attempt_cap) throw Timeout("no object within --max-size");
                  ++st.attempts;
                  try {
                    obj = ctx.sample_class(cls, ceiling);
                    break;
                  } catch (const SizeCeilingExceeded&) {
                    ++st.rejected_window;
                  }
                }
                ++st.accepted;
                ++st.accepted_size_histogram[size(obj)];
                if (kcolored) {
                  const ColoredObject c = color_profiled(obj, colors, ctx.rng());
                  return object_line(cfg, index, to_json(c), encode(c), size(c));
                }
                return object_line(cfg, index, to_json(obj), encode(obj), size(obj));
              },
              stats, out);
  }
  if (cfg.stats) {
    if (cfg.format == "json") {
      out << json{{"stats", stats.to_json()}}.dump() << "\n";
    } else {
      out << "# stats " << stats.to_json().dump() << "\n";
    }
  }
  log.info("attempts={} accepted={}", stats.attempts, stats.accepted);
  return 0;
}

// ---------------------------------------------------------------- enumerate

int cmd_enumerate(const Config& cfg, std::ostream& out) {
  const SpecSystem system = load_system(cfg);
  const std::string cls = resolve_class(system, cfg);
  const EnumTable table = enumerate_colored(system, cls, integer_t(cfg), cfg.enum_max);
  if (cfg.format == "json") {
    json counts = json::array();
    json objects = json::object();
    for (std::size_t n = 0; n <= table.max_size; ++n) {
      counts.push_back(table.count(n));
      if (cfg.objects) {
        json list = json::array();
        for (const auto& o : table.by_size[n]) list.push_back(encode(o));
        objects[std::to_string(n)] = list;
      }
    }
    json j = {{"class", cls}, {"t", table.t}, {"max_size", table.max_size}, {"counts", counts}};
    if (cfg.objects) j["objects"] = objects;
    out << j.dump() << "\n";
  } else {
    for (std::size_t n = 0; n <= table.max_size; ++n) {
      out << n << " " << table.count(n) << "\n";
      if (cfg.objects) {
        for (const auto& o : table.by_size[n]) out << "  " << encode(o) << "\n";
      }
    }
  }
  return 0;
}

// ---------------------------------------------------------------- stats

int cmd_stats(const Config& cfg, std::ostream& out) {
  const SpecSystem system = load_system(cfg);
  const std::string cls_name = resolve_class(system, cfg);
  auto compiled = std::make_shared<const CompiledSystem>(compile(system));
  const int cls = compiled->class_index(cls_name);
  const unsigned t = integer_t(cfg);
  if (cfg.x.has_value() == cfg.tune_n.has_value()) throw UsageError("give exactly one of --x / --tune");
  const double x = cfg.x ? *cfg.x : tune(*compiled, cls, t, *cfg.tune_n).x;
  const auto oracle = build_oracle(compiled, x, t);
  const std::size_t max_size = cfg.exact_size ? *cfg.exact_size : cfg.enum_max;
  const EnumTable table = enumerate_colored(system, cls_name, t, max_size);

  std::map<std::string, double> expected;
  if (cfg.exact_size) {
    for (const auto& o : table.by_size[*cfg.exact_size]) expected[encode(o)] += 1.0;
  } else {
    const BoltzmannPmf pmf = boltzmann_pmf(table, x);
    expected = pmf.probability;
    expected["tail"] = pmf.tail_mass;
  }
  std::map<std::string, std::uint64_t> observed;
  SamplerContext ctx(oracle, 0);
  RejectionStats stats;
  for (std::uint64_t i = 0; i < cfg.count; ++i) {
    ctx.reseed(derive_seed(cfg.seed, i));
    if (cfg.exact_size) {
      ++observed[encode(sample_kcolored_exact(ctx, cls, *cfg.exact_size, stats, cfg.attempt_cap))];
    } else {
      const ColoredObject obj = color_profiled(ctx.sample_class(cls), t, ctx.rng());
      ++observed[size(obj) <= max_size ? encode(obj) : "tail"];
    }
  }
  const ChiSquareResult r = chi_square_test(observed, expected);
  if (cfg.format == "json") {
    out << json{{"class", cls_name}, {"t", t}, {"x", x}, {"samples", cfg.count}, {"statistic", r.statistic},
                {"degrees_of_freedom", r.degrees_of_freedom}, {"buckets", r.buckets}, {"p_value", r.p_value}}
               .dump()
        << "\n";
  } else {
    out << "samples = " << cfg.count << "\n"
        << "chi2 = " << format_double(r.statistic) << "\n"
        << "df = " << r.degrees_of_freedom << "\n"
        << "p = " << format_double(r.p_value) << "\n";
  }
  return 0;
}

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("chroma_boltz", sink);
  logger->set_pattern("[%l] %v");
  logger->set_level(spdlog::level::warn);
  if (const char* level = std::getenv("CHROMA_BOLTZ_LOG")) logger->set_level(spdlog::level::from_str(level));
  return logger;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config cfg;
  CLI::App app{"Boltzmann sampling of colored combinatorial objects", "chroma_boltz"};
  app.require_subcommand(1);

  auto add_spec = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--spec", cfg.spec_path, "specification file");
    if (required) opt->required();
    sub->add_option("--class", cfg.cls, "class name (default: first definition)");
    sub->add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"text", "json"}));
  };

  auto* parse = app.add_subcommand("parse", "parse and validate a specification");
  add_spec(parse, true);

  auto* gf = app.add_subcommand("gf", "generating-function values and series");
  add_spec(gf, true);
  gf->add_option("--t", cfg.t_text, "number of colors (series mode accepts fractions)");
  gf->add_option("--series", cfg.series, "print [x^0..x^N] f(x, t)");
  gf->add_option("--cycle-index", cfg.cycle_index, "print the cycle-index sum up to weight W");
  gf->add_option("--x", cfg.x, "evaluate f at x");
  gf->add_option("--diag", cfg.diag, "with --x: evaluate the diagonal f(x^k, t)")->check(CLI::PositiveNumber);

  auto* tune_cmd = app.add_subcommand("tune", "solve x f'/f = n");
  add_spec(tune_cmd, true);
  tune_cmd->add_option("--t", cfg.t_text, "number of colors");
  tune_cmd->add_option("--n", cfg.n, "target expected size")->required();
  tune_cmd->add_option("--tolerance", cfg.tolerance, "relative solver tolerance");

  auto* sample = app.add_subcommand("sample", "draw objects, one per line");
  add_spec(sample, false);
  auto* opt_x = sample->add_option("--x", cfg.x, "Boltzmann parameter");
  auto* opt_tune = sample->add_option("--tune", cfg.tune_n, "tune x for this expected size");
  opt_x->excludes(opt_tune);
  sample->add_option("--t", cfg.t_text, "number of colors");
  sample->add_option("--count", cfg.count, "number of objects");
  sample->add_option("--seed", cfg.seed, "random seed");
  sample->add_option("--mode", cfg.mode, "profiled | kcolored | colored");
  sample->add_option("--max-size", cfg.max_size, "redraw objects larger than this");
  sample->add_option("--exact-size", cfg.exact_size, "kcolored: reject until the size is exactly N");
  sample->add_option("--n", cfg.target, "colored: target size");
  sample->add_option("--epsilon", cfg.epsilon, "colored: relative window width");
  sample->add_option("--window", cfg.window, "colored: upper | two-sided");
  sample->add_flag("--stats", cfg.stats, "print rejection statistics at the end");
  sample->add_option("--jobs", cfg.jobs, "worker threads (output does not depend on it)");
  sample->add_option("--attempt-cap", cfg.attempt_cap, "rejection attempts before giving up");

  auto* enumerate = app.add_subcommand("enumerate", "list canonical colored objects by size");
  add_spec(enumerate, true);
  enumerate->add_option("--t", cfg.t_text, "number of colors");
  enumerate->add_option("--max-size", cfg.enum_max, "largest size (at most 8)");
  enumerate->add_flag("--objects", cfg.objects, "print the objects");

  auto* stats = app.add_subcommand("stats", "chi-square test of the sampler against enumeration");
  add_spec(stats, true);
  auto* stats_x = stats->add_option("--x", cfg.x, "Boltzmann parameter");
  auto* stats_tune = stats->add_option("--tune", cfg.tune_n, "tune x for this expected size");
  stats_x->excludes(stats_tune);
  stats->add_option("--t", cfg.t_text, "number of colors");
  stats->add_option("--count", cfg.count, "number of samples")->default_val(100000);
  stats->add_option("--seed", cfg.seed, "random seed");
  stats->add_option("--max-size", cfg.enum_max, "objects up to this size are binned, larger ones pooled");
  stats->add_option("--exact-size", cfg.exact_size, "test uniformity at exactly this size instead");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  auto log = make_logger(err);
  try {
    if (*parse) return cmd_parse(cfg, out);
    if (*gf) return cmd_gf(cfg, out);
    if (*tune_cmd) return cmd_tune(cfg, out);
    if (*sample) return cmd_sample(cfg, out, *log);
    if (*enumerate) return cmd_enumerate(cfg, out);
    if (*stats) return cmd_stats(cfg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace chroma_boltz::cli
