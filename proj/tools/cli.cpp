#include "repchain/cli.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "repchain/chain_model.hpp"
#include "repchain/distribution.hpp"
#include "repchain/errors.hpp"
#include "repchain/genfunc.hpp"
#include "repchain/montecarlo.hpp"
#include "repchain/pauli.hpp"
#include "repchain/rates.hpp"
#include "repchain/recursion.hpp"

namespace repchain {

namespace {

using Json = nlohmann::ordered_json;

// Cells are built with explicit types; a bare int would be ambiguous on purpose.
using Cell = std::variant<std::monostate, std::int64_t, std::uint64_t, double, std::string, bool>;

constexpr int kSignificantDigits = 12;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // no "-0"
  std::ostringstream os;
  os << std::setprecision(kSignificantDigits) << v;
  return os.str();
}

std::string format_cell(const Cell& c) {
  struct {
    std::string operator()(std::monostate) const { return "none"; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(const std::string& v) const { return v; }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
  } visitor;
  return std::visit(visitor, c);
}

Json cell_json(const Cell& c) {
  struct {
    Json operator()(std::monostate) const { return nullptr; }
    Json operator()(std::int64_t v) const { return v; }
    Json operator()(std::uint64_t v) const { return v; }
    Json operator()(double v) const { return std::isfinite(v) ? Json(v) : Json(format_number(v)); }
    Json operator()(const std::string& v) const { return v; }
    Json operator()(bool v) const { return v; }
  } visitor;
  return std::visit(visitor, c);
}

struct Table {
  explicit Table(std::vector<std::string> cols) : columns(std::move(cols)) {}

  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  Json extra = Json::object();  // json-only details such as solver reports

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("row width does not match header");
    rows.push_back(std::move(row));
  }
};

struct OutputOptions {
  bool json = false;
  std::string path;
};

std::string render(const Table& t, bool json) {
  std::ostringstream os;
  if (json) {
    Json doc = Json::object();
    doc["columns"] = t.columns;
    Json rows = Json::array();
    for (const auto& r : t.rows) {
      Json obj = Json::object();
      for (std::size_t i = 0; i < r.size(); ++i) obj[t.columns[i]] = cell_json(r[i]);
      rows.push_back(std::move(obj));
    }
    doc["rows"] = std::move(rows);
    for (const auto& [k, v] : t.extra.items()) doc[k] = v;
    os << doc.dump(2) << '\n';
    return os.str();
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_cell(r[i]);
    os << '\n';
  }
  return os.str();
}

class FileWriteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Whole file or nothing: write next to the target, then rename over it.
void write_atomically(const std::filesystem::path& target, const std::string& text) {
  std::filesystem::path tmp = target;
  tmp += ".partial";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw FileWriteError("cannot open " + tmp.string() + " for writing");
    f << text;
    f.close();
    if (!f) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw FileWriteError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw FileWriteError("cannot move output into place at " + target.string());
  }
}

void emit(const Table& t, const OutputOptions& o, std::ostream& out) {
  const std::string text = render(t, o.json);
  if (o.path.empty())
    out << text;
  else
    write_atomically(o.path, text);
}

void add_output_options(CLI::App* cmd, OutputOptions& o) {
  cmd->add_flag("--json", o.json, "Emit JSON instead of CSV");
  cmd->add_option("--output,-o", o.path, "Write to this file (atomically) instead of stdout");
}

Cell cutoff_cell(std::optional<int> c) { return c ? Cell(std::int64_t{*c}) : Cell(std::monostate{}); }

std::optional<int> given(const CLI::Option* opt, int value) {
  return opt->count() ? std::optional<int>(value) : std::nullopt;
}

struct IntRange {
  int lo = 1;
  int hi = 1;
};

IntRange parse_range(const std::string& text, const char* what) {
  const auto colon = text.find(':');
  try {
    std::size_t used = 0;
    IntRange r;
    if (colon == std::string::npos) {
      r.lo = r.hi = std::stoi(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } else {
      const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
      r.lo = std::stoi(a, &used);
      if (used != a.size()) throw std::invalid_argument(text);
      r.hi = std::stoi(b, &used);
      if (used != b.size()) throw std::invalid_argument(text);
    }
    if (r.hi < r.lo) throw std::invalid_argument(text);
    return r;
  } catch (const std::logic_error&) {
    throw ParameterError(std::string(what) + " must look like lo:hi with lo <= hi, got '" + text + "'");
  }
}

std::optional<int> parse_cutoff_token(const std::string& s) {
  if (s == "none" || s == "inf") return std::nullopt;
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ParameterError("cut-off must be an integer or 'none', got '" + s + "'");
  return v;
}

// ---- fidelity, pmf, approx ------------------------------------------------

struct ChainArgs {
  int n = 1;
  double p = 1.0;
  double lambda = 1.0;
  int cutoff = 0;
  CLI::Option* cutoff_opt = nullptr;

  void add_to(CLI::App* cmd, bool with_lambda = true) {
    cmd->add_option("--n", n, "Number of segments")->required();
    cmd->add_option("--p", p, "Per-round success probability of a segment")->required();
    if (with_lambda) cmd->add_option("--lambda", lambda, "Per-round memory decay factor")->required();
    cutoff_opt = cmd->add_option("--cutoff", cutoff, "Global cut-off T_c in rounds (default: none)");
  }
  std::optional<int> cut() const { return given(cutoff_opt, cutoff); }
};

void warn(std::ostream& err, const std::string& msg) {
  if (!msg.empty()) err << "warning: " << msg << '\n';
}

Table cmd_fidelity(const ChainArgs& a, std::ostream& err) {
  const ChainParams params = ChainParams::make(a.n, a.p, a.lambda, a.cut());
  const Evaluation first = evaluate_expected_lambda(params.n, params.q, params.lambda, params.cutoff);
  const Evaluation second = evaluate_expected_lambda(params.n, params.q, params.lambda * params.lambda, params.cutoff);
  warn(err, first.warning);
  warn(err, second.warning);
  const double mean = first.value;
  const double variance = std::max(0.0, second.value - mean * mean);
  Table t{{"n", "p", "lambda", "cutoff", "expected_lambda", "fidelity", "variance"}};
  t.add({std::int64_t{a.n}, a.p, a.lambda, cutoff_cell(params.cutoff), mean,
         fidelity_from_lambda(WernerParam(std::clamp(mean, 0.0, 1.0))), variance});
  t.extra["nudged"] = first.nudged || second.nudged;
  return t;
}

RoughnessPMF pmf_for(const ChainParams& params, double tail_eps) {
  return params.cutoff ? roughness_pmf_cutoff(params.n, params.q, *params.cutoff, tail_eps)
                       : roughness_pmf(params.n, params.q, tail_eps);
}

Table cmd_pmf(const ChainArgs& a, double tail_eps) {
  const ChainParams params = ChainParams::make(a.n, a.p, 1.0, a.cut());
  const RoughnessPMF pmf = pmf_for(params, tail_eps);
  Table t{{"k", "probability", "cumulative"}};
  double cumulative = 0.0;
  for (std::size_t k = 0; k < pmf.probs.size(); ++k) {
    cumulative += pmf.probs[k];
    t.add({static_cast<std::int64_t>(k), pmf.probs[k], std::min(1.0, cumulative)});
  }
  t.extra["tail_bound"] = pmf.tail_bound;
  t.extra["t_max"] = pmf.t_max;
  return t;
}

Json solver_json(const RootSolverReport& s) {
  return Json{{"scan_steps", s.scan_steps},
              {"bisection_steps", s.bisection_steps},
              {"bracket_lo", s.bracket_lo},
              {"bracket_hi", s.bracket_hi},
              {"residual", s.residual}};
}

std::string solver_line(const RootSolverReport& s) {
  std::ostringstream os;
  os << "solver: scan_steps=" << s.scan_steps << " bisection_steps=" << s.bisection_steps << " bracket=["
     << format_number(s.bracket_lo) << ", " << format_number(s.bracket_hi) << "] residual=" << format_number(s.residual);
  return os.str();
}

Table cmd_approx(const ChainArgs& a, bool fibonacci, bool quiet, std::ostream& err) {
  if (fibonacci) {
    const FibonacciCheck f = fibonacci_check();
    Table t{{"rho", "residue", "approx_f10"}};
    t.add({f.rho, f.residue, f.approx_f10});
    t.extra["solver"] = solver_json(f.solver);
    if (!quiet) err << solver_line(f.solver) << '\n';
    return t;
  }
  const ChainParams params = ChainParams::make(1, a.p, a.lambda, a.cut());
  const PoleAsymptotics pa = params.cutoff ? asymptotic_AB_cutoff(params.q, params.lambda, *params.cutoff)
                                           : asymptotic_AB(params.q, params.lambda);
  if (pa.nudged) warn(err, "near-singular parameters; pole extrapolated from neighbouring lambda");
  Table t{{"rho", "residue", "A", "B"}};
  t.add({pa.rho, pa.residue, pa.A, pa.B});
  t.extra["solver"] = solver_json(pa.solver);
  t.extra["nudged"] = pa.nudged;
  if (!quiet) err << solver_line(pa.solver) << '\n';
  return t;
}

// ---- rates ----------------------------------------------------------------

struct NoiseArgs {
  double lambda_gen = 1.0;
  double lambda_swap = 1.0;

  void add_to(CLI::App* cmd, bool with_swap = true) {
    cmd->add_option("--lambda-gen", lambda_gen, "Werner factor of each freshly generated link")->capture_default_str();
    if (with_swap)
      cmd->add_option("--lambda-swap", lambda_swap, "Werner factor of each swap")->capture_default_str();
  }
};

const std::vector<std::string> kRateColumns = {"n",   "p",   "lambda",          "cutoff", "expected_lambda",
                                               "fidelity", "skf", "delivery_rounds", "skr"};

std::vector<Cell> rate_row(const ChainParams& params, const RateReport& r) {
  return {std::int64_t{params.n},
          params.p,
          params.lambda,
          cutoff_cell(params.cutoff),
          r.expected_lambda,
          fidelity_from_lambda(WernerParam(r.expected_lambda)),
          r.skf,
          r.expected_delivery_rounds,
          r.skr_per_round};
}

Table cmd_skr(const ChainArgs& a, const NoiseArgs& noise, bool binned, double tail_eps) {
  const ChainParams params = ChainParams::make(a.n, a.p, a.lambda, noise.lambda_gen, noise.lambda_swap, a.cut());
  Table t{kRateColumns};
  if (!binned) {
    t.add(rate_row(params, skr(params)));
    return t;
  }
  const RateReport r = skr_binned(params, pmf_for(params, tail_eps));
  t.columns.insert(t.columns.end(), {"skf_binned", "skr_binned", "k_max"});
  auto row = rate_row(params, r);
  row.emplace_back(r.binned->skf_binned);
  row.emplace_back(r.binned->skr_binned);
  row.push_back(r.binned->k_max ? Cell(std::int64_t{*r.binned->k_max}) : Cell(std::monostate{}));
  t.add(std::move(row));
  return t;
}

void add_optimum_rows(Table& t, const ChainParams& params, const CutoffOptimum& opt) {
  auto best = rate_row(params.with_cutoff(opt.cutoff), opt.best);
  best.insert(best.begin(), std::string("optimum"));
  t.add(std::move(best));
  auto none = rate_row(params.with_cutoff(std::nullopt), opt.no_cutoff);
  none.insert(none.begin(), std::string("no_cutoff"));
  t.add(std::move(none));
}

Table optimize_table() {
  Table t{kRateColumns};
  t.columns.insert(t.columns.begin(), "role");
  return t;
}

Table cmd_optimize_cutoff(const ChainArgs& a, const NoiseArgs& noise, const std::string& range) {
  const IntRange r = parse_range(range, "--cutoff-range");
  const ChainParams params = ChainParams::make(a.n, a.p, a.lambda, noise.lambda_gen, noise.lambda_swap);
  const CutoffOptimum opt = optimize_cutoff(params, r.lo, r.hi);
  Table t = optimize_table();
  add_optimum_rows(t, params, opt);
  t.extra["skr_by_cutoff"] = opt.skr_by_cutoff;
  return t;
}

Table cmd_optimize_segments(double length_km, double attenuation_km, double lambda, const NoiseArgs& noise,
                            const std::string& segments, const std::string& range) {
  const IntRange ns = parse_range(segments, "--segments");
  const IntRange ts = parse_range(range, "--cutoff-range");
  const auto table = optimize_segments(length_km, lambda, noise.lambda_gen, ns.lo, ns.hi, ts.lo, ts.hi, attenuation_km);
  Table t = optimize_table();
  for (const SegmentOptimum& row : table) {
    const ChainParams params = ChainParams::make(row.n, row.p, lambda, noise.lambda_gen, 1.0);
    add_optimum_rows(t, params, row.optimum);
  }
  return t;
}

// ---- sweep ----------------------------------------------------------------

struct SweepArgs {
  std::vector<int> n;
  std::vector<double> p;
  std::vector<double> length_km;
  std::vector<double> lambda;
  std::vector<std::string> cutoffs{"none"};
  double attenuation_km = kDefaultAttenuationKm;
  int threads = 0;
};

Table cmd_sweep(const SweepArgs& s, const NoiseArgs& noise) {
  const bool by_length = !s.length_km.empty();
  const std::vector<double>& second = by_length ? s.length_km : s.p;
  if (s.n.empty() || second.empty() || s.lambda.empty() || s.cutoffs.empty())
    throw ParameterError("every sweep grid must be nonempty");
  std::vector<std::optional<int>> cutoffs;
  for (const auto& c : s.cutoffs) cutoffs.push_back(parse_cutoff_token(c));

  // grid order: n, then p (or L), then lambda, then cut-off
  std::vector<ChainParams> grid;
  for (int n : s.n)
    for (double x : second)
      for (double l : s.lambda)
        for (const auto& c : cutoffs) {
          const double p = by_length ? segment_success_prob(x, n, s.attenuation_km) : x;
          grid.push_back(ChainParams::make(n, p, l, noise.lambda_gen, noise.lambda_swap, c));
        }

  std::vector<RateReport> results(grid.size());
  std::vector<std::exception_ptr> failures(grid.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        results[i] = skr(grid[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  unsigned workers = s.threads > 0 ? static_cast<unsigned>(s.threads) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(grid.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);  // the first failure in grid order

  Table t{kRateColumns};
  for (std::size_t i = 0; i < grid.size(); ++i) t.add(rate_row(grid[i], results[i]));
  return t;
}

// ---- simulate -------------------------------------------------------------

Table cmd_simulate(const ChainArgs& a, std::int64_t runs, std::uint64_t seed, int threads, bool pmf) {
  const ChainParams params = ChainParams::make(a.n, a.p, a.lambda, a.cut());
  SimulationOptions opts;
  opts.seed = seed;
  opts.threads = threads;
  const SimulationSummary s = simulate(params, runs, opts);
  if (pmf) {
    Table t{{"k", "probability", "std_error"}};
    for (std::size_t k = 0; k < s.roughness_counts.size(); ++k) {
      const double f = static_cast<double>(s.roughness_counts[k]) / static_cast<double>(runs);
      t.add({static_cast<std::int64_t>(k), f, std::sqrt(f * (1.0 - f) / static_cast<double>(runs))});
    }
    t.extra["runs"] = runs;
    t.extra["seed"] = seed;
    return t;
  }
  Table t{{"n", "p", "lambda", "cutoff", "runs", "seed", "mean_lambda", "se_lambda", "mean_delivery", "se_delivery",
           "mean_resets"}};
  t.add({std::int64_t{a.n}, a.p, a.lambda, cutoff_cell(params.cutoff), runs, seed, s.mean_lambda, s.se_lambda,
         s.mean_delivery, s.se_delivery, s.mean_resets});
  return t;
}

// ---- pauli ----------------------------------------------------------------

std::vector<double> parse_numbers(const std::string& list, const std::string& spec) {
  std::vector<double> v;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ParameterError("bad number '" + item + "' in channel '" + spec + "'");
    }
  }
  return v;
}

// identity | depolarizing:P_I | dephasing:P | qubit:pI,pX,pY,pZ | probs:p00,p01,...
PauliChannel parse_channel(int d, const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto single = [&] {
    const auto v = parse_numbers(rest, spec);
    if (v.size() != 1) throw ParameterError("channel '" + spec + "' takes exactly one number");
    return v.front();
  };
  if (kind == "identity") return PauliChannel::identity(d);
  if (kind == "depolarizing") return PauliChannel::depolarizing(d, single());
  if (kind == "dephasing") return PauliChannel::dephasing(d, single());
  if (kind == "qubit") {
    if (d != 2) throw ParameterError("qubit channels need --d 2");
    const auto v = parse_numbers(rest, spec);
    if (v.size() != 4) throw ParameterError("qubit channel takes pI,pX,pY,pZ");
    return PauliChannel::qubit(v[0], v[1], v[2], v[3]);
  }
  if (kind == "probs") return PauliChannel(d, parse_numbers(rest, spec));
  throw ParameterError("unknown channel kind '" + kind + "'");
}

struct PauliArgs {
  int d = 2;
  std::string channel = "identity";
  std::string channel2 = "identity";
};

Table lambda_table(const LambdaVector& lv) {
  Table t{{"u", "v", "re", "im"}};
  for (int u = 0; u < lv.dim(); ++u)
    for (int v = 0; v < lv.dim(); ++v) {
      const Complex z = lv.at(u, v);
      t.add({std::int64_t{u}, std::int64_t{v}, z.real(), z.imag()});
    }
  return t;
}

Table cmd_to_lambda(const PauliArgs& a, bool qubit_order) {
  const LambdaVector lv = to_lambda(parse_channel(a.d, a.channel));
  if (!qubit_order) return lambda_table(lv);
  if (a.d != 2) throw ParameterError("--qubit-order needs --d 2");
  Table t{{"index", "re", "im"}};
  const auto ordered = qubit_lambda_order(lv);
  for (std::size_t i = 0; i < ordered.size(); ++i)
    t.add({static_cast<std::int64_t>(i + 1), ordered[i].real(), ordered[i].imag()});
  return t;
}

Table cmd_compose(const PauliArgs& a) {
  const PauliChannel ch = compose(parse_channel(a.d, a.channel), parse_channel(a.d, a.channel2));
  Table t{{"a", "b", "probability"}};
  for (int x = 0; x < a.d; ++x)
    for (int z = 0; z < a.d; ++z) t.add({std::int64_t{x}, std::int64_t{z}, ch.prob(x, z)});
  return t;
}

Table cmd_swap_oracle(const PauliArgs& a, std::ostream& err) {
  const PauliChannel ch1 = parse_channel(a.d, a.channel), ch2 = parse_channel(a.d, a.channel2);
  const SwapOutcome s = swap_oracle(ch1, ch2);
  const LambdaVector product = pointwise_product(to_lambda(ch1), to_lambda(ch2));
  Table t{{"u", "v", "re", "im", "product_re", "product_im"}};
  for (int u = 0; u < a.d; ++u)
    for (int v = 0; v < a.d; ++v) {
      const Complex z = s.lambda.at(u, v), w = product.at(u, v);
      t.add({std::int64_t{u}, std::int64_t{v}, z.real(), z.imag(), w.real(), w.imag()});
    }
  t.extra["deviation"] = s.deviation;
  t.extra["multiplicative"] = s.multiplicative;
  warn(err, s.warning);
  return t;
}

Table cmd_check_xsym(const PauliArgs& a) {
  const PauliChannel ch = parse_channel(a.d, a.channel);
  Table t{{"d", "x_symmetric", "transpose_side_symmetric"}};
  const Cell side = a.d <= kMaxOracleDim ? Cell(transpose_side_check(ch)) : Cell(std::monostate{});
  t.add({std::int64_t{a.d}, is_x_symmetric(ch), side});
  return t;
}

// ---- error reporting ------------------------------------------------------

std::string error_class(const std::exception& e) {
  if (dynamic_cast<const NearSingularParameters*>(&e)) return "NearSingularParameters";
  if (dynamic_cast<const SeriesDivergence*>(&e)) return "SeriesDivergence";
  if (dynamic_cast<const RootNotBracketed*>(&e)) return "RootNotBracketed";
  if (dynamic_cast<const ResourceLimit*>(&e)) return "ResourceLimit";
  if (dynamic_cast<const NotAChannel*>(&e)) return "NotAChannel";
  if (dynamic_cast<const NumericError*>(&e)) return "NumericError";
  if (dynamic_cast<const ParameterError*>(&e)) return "ParameterError";
  if (dynamic_cast<const FileWriteError*>(&e)) return "FileWriteError";
  return "Error";
}

void describe_parameters(const CLI::App* app, std::ostream& os) {
  for (const CLI::App* sub : app->get_subcommands()) {
    os << ' ' << sub->get_name();
    for (const CLI::Option* opt : sub->get_options()) {
      if (opt->count() == 0 || opt->get_name() == "--help") continue;
      os << ' ' << opt->get_name();
      if (opt->get_type_size() == 0) continue;
      const auto& results = opt->results();
      for (std::size_t i = 0; i < results.size(); ++i) os << (i ? ',' : ' ') << results[i];
    }
    describe_parameters(sub, os);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Analytics for swap-ASAP quantum repeater chains", "repchain"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::function<Table()> action;
  OutputOptions output;

  NoiseArgs noise;
  double tail_eps = 1e-12;

  ChainArgs fid_args;
  auto* fidelity = app.add_subcommand("fidelity", "Exact E[Lambda_n], fidelity and variance of Lambda_n");
  fid_args.add_to(fidelity);
  add_output_options(fidelity, output);
  fidelity->callback([&] { action = [&] { return cmd_fidelity(fid_args, err); }; });

  auto* pmf = app.add_subcommand("pmf", "Distribution of the roughness K");
  ChainArgs pmf_args;
  pmf_args.add_to(pmf, false);
  pmf->add_option("--tail-eps", tail_eps, "Probability mass allowed outside the table")->capture_default_str();
  add_output_options(pmf, output);
  pmf->callback([&] { action = [&] { return cmd_pmf(pmf_args, tail_eps); }; });

  bool fibonacci = false, quiet = false;
  ChainArgs approx_args;
  auto* approx = app.add_subcommand("approx", "Dominant-pole asymptotics E[Lambda_n] ~ A B^n");
  approx->add_option("--p", approx_args.p, "Per-round success probability of a segment");
  approx->add_option("--lambda", approx_args.lambda, "Per-round memory decay factor");
  approx_args.cutoff_opt = approx->add_option("--cutoff", approx_args.cutoff, "Global cut-off T_c in rounds");
  approx->add_flag("--fibonacci", fibonacci, "Run the pole solver on x/(1-x-x^2) instead");
  approx->add_flag("--quiet", quiet, "Do not print the solver report on stderr");
  add_output_options(approx, output);
  approx->callback([&] {
    if (!fibonacci && (approx->count("--p") == 0 || approx->count("--lambda") == 0))
      throw CLI::RequiredError("--p and --lambda (or --fibonacci)");
    action = [&] { return cmd_approx(approx_args, fibonacci, quiet, err); };
  });

  bool binned = false;
  auto* skr_cmd = app.add_subcommand("skr", "BB84 secret-key rate per round");
  ChainArgs skr_args;
  skr_args.add_to(skr_cmd);
  noise.add_to(skr_cmd);
  skr_cmd->add_flag("--binned", binned, "Also report the rate with per-roughness binning");
  skr_cmd->add_option("--tail-eps", tail_eps, "Tail mass for the binned pmf")->capture_default_str();
  add_output_options(skr_cmd, output);
  skr_cmd->callback([&] { action = [&] { return cmd_skr(skr_args, noise, binned, tail_eps); }; });

  std::string cutoff_range = "1:100", segments;
  double length_km = 0.0, attenuation_km = kDefaultAttenuationKm;
  ChainArgs opt_args;
  auto* optimize = app.add_subcommand("optimize", "Best cut-off, optionally for each number of segments");
  optimize->add_option("--n", opt_args.n, "Number of segments");
  optimize->add_option("--p", opt_args.p, "Per-round success probability of a segment");
  optimize->add_option("--lambda", opt_args.lambda, "Per-round memory decay factor")->required();
  noise.add_to(optimize);
  optimize->add_option("--cutoff-range", cutoff_range, "Cut-offs to scan, lo:hi")->capture_default_str();
  auto* seg_opt = optimize->add_option("--segments", segments, "Scan n over lo:hi with p from fibre loss");
  auto* len_opt = optimize->add_option("--L", length_km, "Total chain length in km (with --segments)");
  optimize->add_option("--attenuation", attenuation_km, "Attenuation length in km")->capture_default_str();
  seg_opt->needs(len_opt);
  len_opt->needs(seg_opt);
  seg_opt->excludes("--n");
  seg_opt->excludes("--p");
  add_output_options(optimize, output);
  optimize->callback([&] {
    if (seg_opt->count()) {
      action = [&] { return cmd_optimize_segments(length_km, attenuation_km, opt_args.lambda, noise, segments, cutoff_range); };
      return;
    }
    if (optimize->count("--n") == 0 || optimize->count("--p") == 0)
      throw CLI::RequiredError("--n and --p (or --segments with --L)");
    action = [&] { return cmd_optimize_cutoff(opt_args, noise, cutoff_range); };
  });

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Rates over a grid of chains");
  sweep->add_option("--n", sweep_args.n, "Segment counts")->required()->delimiter(',');
  auto* sweep_p = sweep->add_option("--p", sweep_args.p, "Success probabilities")->delimiter(',');
  auto* sweep_l = sweep->add_option("--L", sweep_args.length_km, "Total lengths in km (p from fibre loss)")->delimiter(',');
  sweep_p->excludes(sweep_l);
  sweep->add_option("--lambda", sweep_args.lambda, "Decay factors")->required()->delimiter(',');
  sweep->add_option("--cutoff", sweep_args.cutoffs, "Cut-offs; 'none' for no cut-off")->delimiter(',');
  sweep->add_option("--attenuation", sweep_args.attenuation_km, "Attenuation length in km")->capture_default_str();
  sweep->add_option("--threads", sweep_args.threads, "Worker threads (0: all cores)")->capture_default_str();
  noise.add_to(sweep);
  add_output_options(sweep, output);
  sweep->callback([&] {
    if (sweep_p->count() == 0 && sweep_l->count() == 0) throw CLI::RequiredError("--p or --L");
    action = [&] { return cmd_sweep(sweep_args, noise); };
  });

  std::int64_t runs = 100000;
  std::uint64_t seed = kDefaultSeed;
  int threads = 0;
  bool sim_pmf = false;
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of E[Lambda_n] and delivery time");
  ChainArgs sim_args;
  sim_args.add_to(simulate_cmd);
  simulate_cmd->add_option("--runs", runs, "Number of simulated deliveries")->capture_default_str();
  simulate_cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
  simulate_cmd->add_option("--threads", threads, "Worker threads (0: all cores)")->capture_default_str();
  simulate_cmd->add_flag("--pmf", sim_pmf, "Print the empirical roughness distribution instead");
  add_output_options(simulate_cmd, output);
  simulate_cmd->callback([&] { action = [&] { return cmd_simulate(sim_args, runs, seed, threads, sim_pmf); }; });

  PauliArgs pauli_args;
  bool qubit_order = false;
  auto* pauli = app.add_subcommand("pauli", "Qudit Pauli channels and lambda-vectors");
  pauli->require_subcommand(1);
  const std::string channel_help =
      "identity | depolarizing:P_I | dephasing:P | qubit:pI,pX,pY,pZ | probs:p00,p01,... (row-major in a, b)";
  auto pauli_sub = [&](const char* name, const char* help, bool two) {
    auto* sub = pauli->add_subcommand(name, help);
    sub->add_option("--d", pauli_args.d, "Qudit dimension")->capture_default_str();
    sub->add_option("--channel", pauli_args.channel, channel_help)->required();
    if (two) sub->add_option("--channel2", pauli_args.channel2, channel_help)->required();
    add_output_options(sub, output);
    return sub;
  };
  auto* to_lambda_cmd = pauli_sub("to-lambda", "Fourier transform of a channel", false);
  to_lambda_cmd->add_flag("--qubit-order", qubit_order, "List lambda_1..lambda_4 in the conventional qubit order");
  to_lambda_cmd->callback([&] { action = [&] { return cmd_to_lambda(pauli_args, qubit_order); }; });
  pauli_sub("compose", "Channel followed by channel2", true)->callback([&] {
    action = [&] { return cmd_compose(pauli_args); };
  });
  pauli_sub("swap-oracle", "Density-matrix entanglement swap of two noisy pairs", true)->callback([&] {
    action = [&] { return cmd_swap_oracle(pauli_args, err); };
  });
  pauli_sub("check-xsym", "X-symmetry and the transpose-side test", false)->callback([&] {
    action = [&] { return cmd_check_xsym(pauli_args); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitParameter;
  }

  try {
    emit(action(), output, out);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << error_class(e) << ": " << e.what() << '\n' << "parameters:";
    describe_parameters(&app, err);
    err << '\n';
    if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
    if (dynamic_cast<const ParameterError*>(&e)) return kExitParameter;
    return 1;
  }
}

}  // namespace repchain
