#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "regldp/errors.hpp"
#include "regldp/exact.hpp"
#include "regldp/io.hpp"
#include "regldp/ldp.hpp"
#include "regldp/measures.hpp"
#include "regldp/pairing.hpp"
#include "regldp/rational.hpp"

#ifndef REGLDP_VERSION
#define REGLDP_VERSION "0.0.0"
#endif

namespace {

using namespace regldp;

constexpr const char* kSeedEnv = "REGLDP_SEED";

enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kConfig = 2,
  kInfeasible = 3,
  kScaleGuard = 4,
  kRejectionCap = 5,
  kNoConvergence = 6,
};

struct Options {
  std::string command;
  std::optional<int> n, d, q;
  std::string mu;
  std::optional<std::string> seed;
  std::uint64_t samples = 1000;
  bool simple = false;
  std::size_t max_attempts = 1000;
  std::string event;
  std::string type;
  std::string rho;
  std::string nu;
  std::string n_grid;
  std::string mode = "auto";
  int threshold = kDefaultExactThreshold;
  int max_points = OracleLimits{}.max_points;
  std::size_t budget = ReportOptions{}.enumeration_budget;
  std::string output;
  std::string format = "json";
  unsigned workers = 1;
};

// Resolved inputs shared by the subcommands.
struct Context {
  const Options& opt;
  std::uint64_t seed = 0;
  Json config = Json::object();
  std::ostream* out = &std::cout;
  bool csv = false;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a == std::string::npos) throw UsageError("empty entry in list \"" + text + "\"");
    parts.push_back(item.substr(a, b - a + 1));
  }
  if (parts.empty()) throw UsageError("empty list");
  return parts;
}

std::uint64_t parse_seed(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || text[0] == '-')
    throw UsageError(where + ": seed must be an unsigned 64-bit integer, got \"" + text + "\"");
  return v;
}

std::uint64_t resolve_seed(const Options& opt) {
  if (opt.seed) return parse_seed(*opt.seed, "--seed");
  if (const char* env = std::getenv(kSeedEnv)) return parse_seed(env, kSeedEnv);
  return 0;
}

// JSON given inline or as a path to a file.
Json load_json(const std::string& text, const std::string& flag) {
  if (text.empty()) throw UsageError(flag + " is required");
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '['))
    return Json::parse(text);
  std::ifstream in(text);
  if (!in) throw UsageError(flag + ": cannot open \"" + text + "\"");
  return Json::parse(in);
}

std::vector<Rational> parse_weights(const std::string& text) {
  std::vector<Rational> w;
  for (const auto& part : split(text, ',')) {
    Rational r = parse_rational(part);
    if (r < 0) throw UsageError("--mu: negative weight " + part);
    w.push_back(r);
  }
  return w;
}

// mu from --mu (normalized, warning when far from 1) or uniform on --q.
SpinLaw resolve_mu(Context& ctx, std::optional<int> q) {
  const Options& opt = ctx.opt;
  std::vector<Rational> w;
  if (opt.mu.empty()) {
    if (!q) throw UsageError("--q or --mu is required");
    if (*q < 1) throw UsageError("--q must be positive");
    w.assign(static_cast<std::size_t>(*q), Rational(1, *q));
  } else {
    w = parse_weights(opt.mu);
    if (q && static_cast<int>(w.size()) != *q)
      throw UsageError("--mu has " + std::to_string(w.size()) + " weights but q is " +
                       std::to_string(*q));
    Rational sum = 0;
    for (const auto& x : w) sum += x;
    if (sum <= 0) throw UsageError("--mu weights sum to zero");
    if (std::abs(sum.convert_to<double>() - 1.0) > 1e-9)
      std::cerr << "warning: mu sums to " << to_string(sum) << "; normalizing\n";
    for (auto& x : w) x /= sum;
  }
  Json echo = Json::array();
  for (const auto& x : w) echo.push_back(to_string(x));
  ctx.config["mu"] = echo;
  ctx.config["q"] = static_cast<int>(w.size());
  return SpinLaw(std::move(w));
}

int require_int(const std::optional<int>& v, const char* flag) {
  if (!v) throw UsageError(std::string(flag) + " is required");
  return *v;
}

void require_even(int n, int d) {
  if (n < 1 || d < 1) throw UsageError("--n and --d must be positive");
  if ((static_cast<long>(n) * d) % 2 != 0) throw UsageError("n * d must be even");
}

EventSpec resolve_event(Context& ctx, int q) {
  EventSpec e = ctx.opt.event.empty() ? EventSpec{} : event_from_json(load_json(ctx.opt.event, "--event"));
  e.validate(q);
  ctx.config["event"] = to_json(e);
  return e;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

void write_header(Context& ctx) {
  Json header{{"artifact", "regldp"},
              {"version", REGLDP_VERSION},
              {"command", ctx.opt.command},
              {"seed", ctx.seed},
              {"config", ctx.config},
              {"timestamp", timestamp()}};
  if (ctx.csv) {
    for (const auto& [key, value] : header.items())
      *ctx.out << "# " << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump())
               << '\n';
  } else {
    *ctx.out << Json{{"header", header}}.dump() << '\n';
  }
}

std::string join12(const Eigen::MatrixXd& m) {
  std::string s;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) s += (s.empty() ? "" : " ") + format12(m(i, j));
  return s;
}

std::string join_counts(const LatticeType& t) {
  std::string spins, bonds;
  for (int i = 0; i < t.q(); ++i) spins += (i ? " " : "") + std::to_string(t.spin_counts(i));
  for (int i = 0; i < t.q(); ++i)
    for (int j = 0; j < t.q(); ++j) bonds += (i || j ? " " : "") + std::to_string(t.bond_counts(i, j));
  return '"' + spins + "\",\"" + bonds + '"';
}

int cmd_sample(Context& ctx) {
  const Options& opt = ctx.opt;
  const int n = require_int(opt.n, "--n");
  const int d = require_int(opt.d, "--d");
  require_even(n, d);
  const SpinLaw mu = resolve_mu(ctx, opt.q);
  if (opt.max_attempts < 1) throw UsageError("--max-attempts must be positive");
  ctx.config["n"] = n;
  ctx.config["d"] = d;
  ctx.config["samples"] = opt.samples;
  ctx.config["simple"] = opt.simple;
  if (opt.simple) ctx.config["max_attempts"] = opt.max_attempts;
  write_header(ctx);

  const std::string view = opt.simple ? "simple" : "multigraph";
  if (ctx.csv) *ctx.out << "index,simple,attempts,l1,l2\n";
  for (std::uint64_t k = 0; k < opt.samples; ++k) {
    SampleRecord r;
    std::size_t attempts = 1;
    if (opt.simple) {
      SimpleSampleRecord s = draw_simple_sample(n, d, mu, ctx.seed, k, opt.max_attempts);
      r = std::move(s.record);
      attempts = s.attempts;
    } else {
      r = draw_sample(n, d, mu, ctx.seed, k);
    }
    if (ctx.csv) {
      *ctx.out << k << ',' << (r.simple ? "true" : "false") << ',' << attempts << ','
               << join12(r.l1.mass.transpose()) << ',' << join12(r.l2.mass) << '\n';
    } else {
      Json line{{"index", k}};
      if (opt.simple) line["attempts"] = attempts;
      line.update(to_json(r, view));
      *ctx.out << line.dump() << '\n';
    }
  }
  return kOk;
}

int cmd_exact(Context& ctx) {
  const Options& opt = ctx.opt;
  Json tj = load_json(opt.type, "--type");
  if (!tj.is_object()) throw UsageError("--type must be a JSON object");
  if (!tj.contains("n") && opt.n) tj["n"] = *opt.n;
  if (!tj.contains("d") && opt.d) tj["d"] = *opt.d;
  const LatticeType t = lattice_type_from_json(tj);
  if (opt.q && *opt.q != t.q()) throw UsageError("--q disagrees with the type");
  const SpinLaw mu = resolve_mu(ctx, t.q());
  ProbabilityMode mode = ProbabilityMode::kAuto;
  if (opt.mode == "exact") mode = ProbabilityMode::kExact;
  else if (opt.mode == "float") mode = ProbabilityMode::kFloat;
  ctx.config["type"] = to_json(t);
  ctx.config["mode"] = opt.mode;
  ctx.config["threshold"] = opt.threshold;
  write_header(ctx);

  const LogProb p = exact_type_probability(t, mu, mode, opt.threshold);
  const std::string exact = p.exact ? to_string(*p.exact) : "";
  if (ctx.csv) {
    *ctx.out << "n,d,q,spin_counts,bond_counts,exact,log_probability\n"
             << t.n << ',' << t.d << ',' << t.q() << ',' << join_counts(t) << ',' << exact << ','
             << format12(p.log_value) << '\n';
  } else {
    Json line{{"type", to_json(t)},
              {"feasible", p.feasible},
              {"exact", p.exact ? Json(exact) : Json(nullptr)},
              {"log_probability", real_to_json(p.log_value)}};
    *ctx.out << line.dump() << '\n';
  }
  return kOk;
}

int cmd_oracle(Context& ctx) {
  const Options& opt = ctx.opt;
  const int n = require_int(opt.n, "--n");
  const int d = require_int(opt.d, "--d");
  require_even(n, d);
  const SpinLaw mu = resolve_mu(ctx, opt.q);
  OracleLimits limits;
  limits.max_points = opt.max_points;
  ctx.config["n"] = n;
  ctx.config["d"] = d;
  ctx.config["max_points"] = opt.max_points;
  write_header(ctx);

  const TypeDistribution dist = brute_force_type_distribution(n, d, mu.q(), mu, opt.workers, limits);
  if (ctx.csv) write_csv(*ctx.out, dist);
  else *ctx.out << to_json(dist).dump() << '\n';
  return kOk;
}

int cmd_types(Context& ctx) {
  const Options& opt = ctx.opt;
  const int n = require_int(opt.n, "--n");
  const int d = require_int(opt.d, "--d");
  const int q = require_int(opt.q, "--q");
  require_even(n, d);
  if (q < 1) throw UsageError("--q must be positive");
  ctx.config["n"] = n;
  ctx.config["d"] = d;
  ctx.config["q"] = q;
  write_header(ctx);

  if (ctx.csv) *ctx.out << "n,d,q,spin_counts,bond_counts\n";
  for_each_type(n, d, q, [&](const LatticeType& t) {
    if (ctx.csv) *ctx.out << t.n << ',' << t.d << ',' << t.q() << ',' << join_counts(t) << '\n';
    else *ctx.out << to_json(t).dump() << '\n';
    return true;
  });
  return kOk;
}

int cmd_rate(Context& ctx) {
  const Options& opt = ctx.opt;
  const int d = require_int(opt.d, "--d");
  if (d < 1) throw UsageError("--d must be positive");
  if (opt.rho.empty()) throw UsageError("--rho is required");
  if (opt.nu.empty()) throw UsageError("--nu is required");
  const auto rho_parts = split(opt.rho, ',');
  const int q = static_cast<int>(rho_parts.size());
  Eigen::VectorXd rho(q);
  for (int i = 0; i < q; ++i) rho(i) = parse_rational(rho_parts[static_cast<std::size_t>(i)]).convert_to<double>();

  Eigen::MatrixXd nu(q, q);
  const auto first = opt.nu.find_first_not_of(" \t");
  if (first != std::string::npos && opt.nu[first] == '[') {
    nu = bond_measure_from_json(Json::parse(opt.nu)).mass;
  } else {
    const auto parts = split(opt.nu, ',');
    if (static_cast<int>(parts.size()) != q * q)
      throw UsageError("--nu needs q * q = " + std::to_string(q * q) + " row-major entries");
    for (int k = 0; k < q * q; ++k) nu(k / q, k % q) = parse_rational(parts[static_cast<std::size_t>(k)]).convert_to<double>();
  }
  if (nu.rows() != q || nu.cols() != q) throw UsageError("--nu must be q x q");
  const SpinLaw mu = resolve_mu(ctx, q);
  ctx.config["d"] = d;
  ctx.config["rho"] = to_json(SpinMeasure(rho));
  ctx.config["nu"] = to_json(BondMeasure(nu));
  write_header(ctx);

  const RateValue v = rate_function(SpinMeasure(rho), BondMeasure(nu), mu, d);
  if (ctx.csv) *ctx.out << "value\n" << format12(v.value) << '\n';
  else *ctx.out << Json{{"value", real_to_json(v.value)}}.dump() << '\n';
  return kOk;
}

void write_minimizer(Context& ctx, const MinimizerResult& r, bool converged) {
  if (ctx.csv) {
    *ctx.out << "converged,value,kkt_residual,iterations,rho_star,nu_star\n"
             << (converged ? "true" : "false") << ',' << format12(r.value.value) << ','
             << format12(r.kkt_residual) << ',' << r.iterations << ','
             << join12(r.rho_star.mass.transpose()) << ',' << join12(r.nu_star.mass) << '\n';
  } else {
    Json line{{"converged", converged}};
    line.update(to_json(r));
    *ctx.out << line.dump() << '\n';
  }
}

int cmd_minimize(Context& ctx) {
  const Options& opt = ctx.opt;
  const int d = require_int(opt.d, "--d");
  if (d < 1) throw UsageError("--d must be positive");
  const SpinLaw mu = resolve_mu(ctx, opt.q);
  const EventSpec event = resolve_event(ctx, mu.q());
  ctx.config["d"] = d;
  write_header(ctx);

  MinimizerOptions mo;
  mo.seed = ctx.seed;
  try {
    write_minimizer(ctx, minimize_rate(event, mu, d, mo), true);
  } catch (const NonConvergenceError& e) {
    write_minimizer(ctx, e.best(), false);
    throw;
  }
  return kOk;
}

int cmd_verify(Context& ctx) {
  const Options& opt = ctx.opt;
  const int d = require_int(opt.d, "--d");
  if (d < 1) throw UsageError("--d must be positive");
  if (opt.n_grid.empty()) throw UsageError("--n-grid is required");
  std::vector<int> grid;
  for (const auto& part : split(opt.n_grid, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != part.size()) throw UsageError("--n-grid: not an integer: " + part);
    require_even(v, d);
    grid.push_back(v);
  }
  if (opt.samples < 1) throw UsageError("--samples must be positive");
  const SpinLaw mu = resolve_mu(ctx, opt.q);
  const EventSpec event = resolve_event(ctx, mu.q());
  ctx.config["d"] = d;
  ctx.config["n_grid"] = grid;
  ctx.config["samples"] = opt.samples;
  ctx.config["budget"] = opt.budget;
  write_header(ctx);

  ReportOptions ro;
  ro.workers = opt.workers;
  ro.enumeration_budget = opt.budget;
  const auto rows = convergence_report(event, d, mu, grid, opt.samples, ctx.seed, ro);
  if (ctx.csv) {
    write_csv(*ctx.out, rows);
  } else {
    for (const ReportRow& r : rows) *ctx.out << to_json(r).dump() << '\n';
  }
  return kOk;
}

int dispatch(Context& ctx) {
  const std::string& c = ctx.opt.command;
  if (c == "sample") return cmd_sample(ctx);
  if (c == "exact") return cmd_exact(ctx);
  if (c == "oracle") return cmd_oracle(ctx);
  if (c == "types") return cmd_types(ctx);
  if (c == "rate") return cmd_rate(ctx);
  if (c == "minimize") return cmd_minimize(ctx);
  return cmd_verify(ctx);
}

int run(const Options& opt) {
  Context ctx{opt};
  ctx.seed = resolve_seed(opt);
  ctx.csv = opt.format == "csv";
  if (opt.workers < 1) throw UsageError("--workers must be at least 1");
  ctx.config["format"] = opt.format;
  ctx.config["workers"] = opt.workers;

  std::unique_ptr<std::ofstream> file;
  if (!opt.output.empty()) {
    file = std::make_unique<std::ofstream>(opt.output);
    if (!*file) throw UsageError("--output: cannot write \"" + opt.output + "\"");
    ctx.out = file.get();
  }
  const int code = dispatch(ctx);
  ctx.out->flush();
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Spinned random regular graphs: sampling, exact type probabilities and large deviations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", REGLDP_VERSION);

  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"sample", "Stream sampled (pairing, spins) records as JSON lines"},
      {"exact", "Exact probability of a lattice type"},
      {"oracle", "Type distribution by brute-force enumeration"},
      {"types", "Enumerate the lattice types of (n, d, q)"},
      {"rate", "Evaluate the rate function at (rho, nu)"},
      {"minimize", "Minimize the rate function over an event"},
      {"verify", "Monte Carlo vs lattice vs continuum report"},
  };
  for (const Command& s : commands) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->callback([&opt, name = std::string(s.name)] { opt.command = name; });
    sub->add_option("--n", opt.n, "Number of vertices");
    sub->add_option("--d", opt.d, "Degree");
    sub->add_option("--q", opt.q, "Number of spin states");
    sub->add_option("--mu", opt.mu, "Spin weights, comma separated (p/q or decimal); normalized");
    sub->add_option("--seed", opt.seed, std::string("64-bit seed; defaults to $") + kSeedEnv + " or 0");
    sub->add_option("--workers", opt.workers, "Worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber);
    sub->add_option("--output,-o", opt.output, "Output file (default stdout)");
    sub->add_option("--format", opt.format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}));
    const std::string name = s.name;
    if (name == "sample") {
      sub->add_option("--samples", opt.samples, "Number of samples");
      sub->add_flag("--simple", opt.simple, "Reject non-simple pairings");
      sub->add_option("--max-attempts", opt.max_attempts, "Rejection cap per sample");
    }
    if (name == "exact") {
      sub->add_option("--type", opt.type, "Lattice type JSON, inline or a file path");
      sub->add_option("--mode", opt.mode, "Arithmetic")->check(CLI::IsMember({"auto", "exact", "float"}));
      sub->add_option("--threshold", opt.threshold, "Auto mode uses exact arithmetic while nd <= threshold");
    }
    if (name == "oracle")
      sub->add_option("--max-points", opt.max_points, "Refuse to enumerate more than this many points");
    if (name == "rate") {
      sub->add_option("--rho", opt.rho, "rho, comma separated");
      sub->add_option("--nu", opt.nu, "nu, q*q row-major comma separated or a nested JSON array");
    }
    if (name == "minimize" || name == "verify")
      sub->add_option("--event", opt.event, "Event JSON, inline or a file path (default: always true)");
    if (name == "verify") {
      sub->add_option("--n-grid", opt.n_grid, "Comma-separated values of n");
      sub->add_option("--samples", opt.samples, "Monte Carlo samples per n");
      sub->add_option("--budget", opt.budget, "Lattice enumeration budget per n");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    return run(opt);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const Json::exception& e) {
    std::cerr << "error: bad JSON input: " << e.what() << '\n';
    return kConfig;
  } catch (const InfeasibleEventError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const ScaleGuardError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kScaleGuard;
  } catch (const RejectionCapError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRejectionCap;
  } catch (const NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}
