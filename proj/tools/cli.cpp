#include "cli.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "bgw/excursion.hpp"
#include "bgw/functionals.hpp"
#include "bgw/harness.hpp"
#include "bgw/offspring.hpp"
#include "bgw/theory.hpp"
#include "bgw/tree.hpp"

namespace bgw::cli {

namespace {

using nlohmann::json;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Settings {
  std::string family = "catalan";
  double gamma = 1.5;
  double c = 0.5;
  std::vector<double> pmf;
  double normalizer_scale = 1.0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = 1;
  std::string out;
  std::string format = "csv";

  std::vector<std::int64_t> n;
  std::int64_t R = 1000;
  std::vector<double> alpha_prime;
  std::vector<double> beta;
  std::vector<double> p;
  std::size_t m = 10000;
  std::size_t levels = 1024;
  double tolerance = 0.05;
  double attempt_multiplier = 10.0;
  double divergence_factor = 1.5;
  double stability_tolerance = 0.2;
  double max_contraction = 0.8;
  double tail_tolerance = 0.25;
  double window_low = 1e-4;
  double window_high = 0.8;
  double max_drop_fraction = 0.01;
};

// One flag that can also come from the flat config document.
struct Binding {
  std::string key;
  CLI::Option* option = nullptr;
  std::function<void(const json&)> load;
  std::function<json()> dump;
};

template <class T>
T scalar_from(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw UsageError("config: bad value for '" + key + "'");
  }
}

class Command {
 public:
  Command(CLI::App& app, std::string name, std::string help) : sub_(app.add_subcommand(std::move(name), std::move(help))) {}

  CLI::App* app() const { return sub_; }

  template <class T>
  CLI::Option* bind(const std::string& key, T& var, const std::string& help) {
    CLI::Option* opt = sub_->add_option("--" + key, var, help)->capture_default_str();
    bindings_.push_back({key, opt, [&var, key](const json& j) { var = scalar_from<T>(j, key); },
                         [&var]() { return json(var); }});
    return opt;
  }

  template <class T>
  CLI::Option* bind_list(const std::string& key, std::vector<T>& var, const std::string& help) {
    CLI::Option* opt = sub_->add_option("--" + key, var, help)->delimiter(',');
    bindings_.push_back({key, opt,
                         [&var, key](const json& j) {
                           var.clear();
                           if (j.is_array()) {
                             for (const auto& x : j) var.push_back(scalar_from<T>(x, key));
                           } else {
                             var.push_back(scalar_from<T>(j, key));
                           }
                         },
                         [&var]() { return json(var); }});
    return opt;
  }

  void bind_common(Settings& s) {
    bind("family", s.family, "offspring law: catalan, geometric, stable, pmf")
        ->check(CLI::IsMember({"catalan", "geometric", "stable", "pmf"}));
    bind("gamma", s.gamma, "stable index gamma in (1, 2]");
    bind("c", s.c, "stable coefficient c in (0, 1/gamma]");
    bind_list("pmf", s.pmf, "explicit pmf p0,p1,... (family pmf)");
    bind("normalizer-scale", s.normalizer_scale, "multiply b_n by this factor")->check(CLI::PositiveNumber);
    seed_option_ = sub_->add_option("--seed", s.seed, "base seed (auto-generated when absent)");
    bindings_.push_back({"seed", seed_option_,
                         [&s](const json& j) {
                           s.seed = scalar_from<std::uint64_t>(j, "seed");
                           s.seed_given = true;
                         },
                         [&s]() { return json(s.seed); }});
    bind("workers", s.workers, "worker threads (default $BGWF_WORKERS or 1)")->check(CLI::PositiveNumber);
    bind("out", s.out, "output file (default stdout)");
    bind("format", s.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub_->add_option("--config", config_path_, "flat JSON file with flag values");
    sub_->add_flag("--print-config", print_config_, "print the resolved configuration as JSON and exit");
  }

  // Fills options that were not given on the command line from the config file.
  void resolve(Settings& s) {
    if (seed_option_ != nullptr && seed_option_->count() > 0) s.seed_given = true;
    if (config_path_.empty()) return;
    std::ifstream in(config_path_);
    if (!in) throw UsageError("cannot read config file '" + config_path_ + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw UsageError("config file '" + config_path_ + "': " + e.what());
    }
    if (!doc.is_object()) throw UsageError("config file must be a flat JSON object");
    for (const auto& [key, value] : doc.items()) {
      const Binding* b = find(key);
      if (b == nullptr) throw UsageError("config: unknown key '" + key + "' for " + sub_->get_name());
      if (value.is_object()) throw UsageError("config: nested value for '" + key + "'");
      if (b->option->count() == 0) b->load(value);
    }
  }

  json resolved() const {
    json j = json::object();
    for (const auto& b : bindings_) j[b.key] = b.dump();
    return j;
  }

  bool print_config() const { return print_config_; }

 private:
  const Binding* find(const std::string& key) const {
    for (const auto& b : bindings_) {
      if (b.key == key) return &b;
    }
    return nullptr;
  }

  CLI::App* sub_;
  std::vector<Binding> bindings_;
  CLI::Option* seed_option_ = nullptr;
  std::string config_path_;
  bool print_config_ = false;
};

OffspringModel build_model(const Settings& s) {
  OffspringModel model = OffspringModel::catalan();
  if (s.family == "geometric") {
    model = OffspringModel::geometric();
  } else if (s.family == "stable") {
    model = OffspringModel::stable(s.gamma, s.c);
  } else if (s.family == "pmf") {
    if (s.pmf.empty()) throw UsageError("--family pmf needs --pmf p0,p1,...");
    model = OffspringModel::finite_variance(s.pmf);
  }
  if (s.normalizer_scale != 1.0) model = model.with_normalizer_scale(s.normalizer_scale);
  return model;
}

std::vector<TollSpec> build_tolls(const Settings& s) {
  std::vector<double> ap = s.alpha_prime.empty() ? std::vector<double>{1.0} : s.alpha_prime;
  std::vector<double> be = s.beta.empty() ? std::vector<double>{0.0} : s.beta;
  if (be.size() == 1) be.resize(ap.size(), be.front());
  if (ap.size() == 1) ap.resize(be.size(), ap.front());
  if (ap.size() != be.size()) throw UsageError("--alpha-prime and --beta lists must have equal length (or one value)");
  std::vector<TollSpec> tolls;
  for (std::size_t i = 0; i < ap.size(); ++i) tolls.push_back({ap[i], be[i]});
  return tolls;
}

ExperimentConfig build_config(const Settings& s, Mode mode) {
  ExperimentConfig config;
  config.mode = mode;
  config.model = build_model(s);
  config.sizes = s.n;
  config.replicates = s.R;
  config.seed = s.seed;
  config.workers = s.workers;
  config.excursion_steps = s.m;
  config.levels = s.levels;
  config.attempt_multiplier = s.attempt_multiplier;
  config.tolerance = s.tolerance;
  config.divergence_factor = s.divergence_factor;
  config.stability_tolerance = s.stability_tolerance;
  config.max_contraction = s.max_contraction;
  config.tail_tolerance = s.tail_tolerance;
  config.tail_window_low = s.window_low;
  config.tail_window_high = s.window_high;
  config.max_drop_fraction = s.max_drop_fraction;
  if (mode == Mode::Moment || mode == Mode::Continuum) config.tolls = build_tolls(s);
  if (mode == Mode::PhaseScan) {
    config.alpha_primes = s.alpha_prime;
    if (s.beta.size() > 1) throw UsageError("phase-scan takes a single --beta");
    config.beta = s.beta.empty() ? 0.0 : s.beta.front();
  }
  if (mode == Mode::HeightMoments) config.moment_orders = s.p.empty() ? std::vector<double>{-2, -1, 1, 2, 4} : s.p;
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return config;
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

int default_workers() {
  if (const char* env = std::getenv("BGWF_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 4096) return static_cast<int>(v);
  }
  return 1;
}

// Writes to --out when given, otherwise to the supplied stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot open output file '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

void emit_report(const McReport& report, const Settings& s, std::ostream& out, std::ostream& err) {
  Sink sink(s.out, out);
  if (s.format == "json") {
    sink.get() << to_json(report).dump(2) << '\n';
  } else {
    write_csv(sink.get(), report);
  }
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  for (const auto& row : report.rows) {
    if (!row.verdict.empty()) {
      err << row.mode << " n=" << row.n;
      if (std::isfinite(row.alpha_prime)) err << " alpha'=" << row.alpha_prime;
      if (std::isfinite(row.beta)) err << " beta=" << row.beta;
      err << ": " << row.verdict;
      if (!row.note.empty()) err << " (" << row.note << ')';
      err << '\n';
    }
  }
}

int run_sample(const Settings& s, std::ostream& out) {
  if (s.n.size() != 1) throw UsageError("sample takes exactly one --n");
  const OffspringModel model = build_model(s);
  const std::int64_t n = s.n.front();
  if (n < 1 || !model.support_contains(n)) throw UsageError("n = " + std::to_string(n) + " is outside the support");
  Rng rng(s.seed, 0);
  SamplerOptions opts;
  opts.attempt_multiplier = s.attempt_multiplier;
  const AnnotatedTree tree = sample_conditioned(model, n, rng, opts);
  Sink sink(s.out, out);
  if (s.format == "json") {
    json j = {{"model", model.to_json()}, {"n", tree.n},       {"seed", s.seed},
              {"height", tree.height},    {"parent", tree.parent}, {"degree", tree.degree},
              {"depth", tree.depth},      {"subtree_size", tree.subtree_size},
              {"subtree_height", tree.subtree_height}};
    sink.get() << j.dump() << '\n';
  } else {
    write_tree_csv(sink.get(), tree);
  }
  return 0;
}

int run_functional(const Settings& s, std::ostream& out) {
  if (s.n.size() != 1) throw UsageError("functional takes exactly one --n");
  const auto tolls = build_tolls(s);
  const OffspringModel model = build_model(s);
  const std::int64_t n = s.n.front();
  if (n < 1 || !model.support_contains(n)) throw UsageError("n = " + std::to_string(n) + " is outside the support");
  Rng rng(s.seed, 0);
  SamplerOptions opts;
  opts.attempt_multiplier = s.attempt_multiplier;
  const AnnotatedTree tree = sample_conditioned(model, n, rng, opts);

  std::vector<std::pair<std::string, double>> rows;
  rows.emplace_back("n", static_cast<double>(tree.n));
  rows.emplace_back("height", tree.height);
  rows.emplace_back("internal", static_cast<double>(tree.internal_count()));
  rows.emplace_back("leaves", static_cast<double>(tree.leaf_count()));
  rows.emplace_back("b_n", model.normalizer(n));
  for (const auto& t : tolls) {
    const std::string tag = "[alpha'=" + std::to_string(t.alpha_prime) + ",beta=" + std::to_string(t.beta) + "]";
    rows.emplace_back("rescaled_sum" + tag, rescaled_theorem1_sum(tree, model, t.alpha_prime, t.beta).value);
    const auto toll = TollFunction::power_mass_height(t.alpha_prime - 1.0, t.beta);
    rows.emplace_back("a_measure_internal" + tag, a_measure(tree, model, toll, true).value);
  }
  rows.emplace_back("b1_index", b1_index(tree));
  const auto tv = tv_gap_bound_check(tree, model);
  rows.emplace_back("tv_gap", tv.gap);
  rows.emplace_back("tv_bound", tv.bound);
  rows.emplace_back("tv_ok", tv.ok ? 1.0 : 0.0);
  rows.emplace_back("mass_bound_ok", mass_bound_check(tree, model) ? 1.0 : 0.0);

  Sink sink(s.out, out);
  if (s.format == "json") {
    json j = json::object();
    for (const auto& [k, v] : rows) j[k] = v;
    j["seed"] = s.seed;
    sink.get() << j.dump(2) << '\n';
  } else {
    sink.get() << "quantity,value\n";
    char buf[64];
    for (const auto& [k, v] : rows) {
      std::snprintf(buf, sizeof buf, "%.12g", v);
      if (k.find(',') != std::string::npos) {
        sink.get() << '"' << k << "\"," << buf << '\n';
      } else {
        sink.get() << k << ',' << buf << '\n';
      }
    }
  }
  return 0;
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"bgwf: conditioned BGW trees, additive functionals and their continuum limits"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "bgwf 1.0.0");

  Settings s;
  s.workers = default_workers();
  std::map<std::string, std::unique_ptr<Command>> commands;
  auto add = [&](const std::string& name, const std::string& help) -> Command& {
    auto& cmd = commands[name];
    cmd = std::make_unique<Command>(app, name, help);
    return *cmd;
  };

  {
    auto& c = add("sample", "sample one conditioned tree and dump it");
    c.bind_common(s);
    c.bind_list("n", s.n, "tree size");
    c.bind("attempt-multiplier", s.attempt_multiplier, "sampler budget multiplier")->check(CLI::PositiveNumber);
  }
  {
    auto& c = add("functional", "sample one tree and evaluate its functionals");
    c.bind_common(s);
    c.bind_list("n", s.n, "tree size");
    c.bind_list("alpha-prime", s.alpha_prime, "mass exponents alpha'");
    c.bind_list("beta", s.beta, "height exponents beta");
    c.bind("attempt-multiplier", s.attempt_multiplier, "sampler budget multiplier")->check(CLI::PositiveNumber);
  }
  {
    auto& c = add("moment", "Monte Carlo mean of the rescaled sum against theory");
    c.bind_common(s);
    c.bind_list("n", s.n, "tree sizes");
    c.bind("R", s.R, "replicates per size");
    c.bind_list("alpha-prime", s.alpha_prime, "mass exponents alpha'");
    c.bind_list("beta", s.beta, "height exponents beta");
    c.bind("tolerance", s.tolerance, "relative tolerance at the largest n")->check(CLI::PositiveNumber);
    c.bind("attempt-multiplier", s.attempt_multiplier, "sampler budget multiplier")->check(CLI::PositiveNumber);
    c.bind("max-drop-fraction", s.max_drop_fraction, "invalidate when more replicates are dropped")
        ->check(CLI::Range(0.0, 1.0));
  }
  {
    auto& c = add("phase-scan", "classify convergence of the rescaled sum over a grid of alpha'");
    c.bind_common(s);
    c.bind_list("n", s.n, "tree sizes (at least three, spanning a decade)");
    c.bind("R", s.R, "replicates per size");
    c.bind_list("alpha-prime", s.alpha_prime, "grid of alpha'");
    c.bind_list("beta", s.beta, "height exponent beta");
    c.bind("divergence-factor", s.divergence_factor, "per-decade growth that counts as divergence")
        ->check(CLI::PositiveNumber);
    c.bind("stability-tolerance", s.stability_tolerance, "relative change allowed across the top decade")
        ->check(CLI::PositiveNumber);
    c.bind("max-contraction", s.max_contraction, "largest increment ratio read as geometric convergence")
        ->check(CLI::Range(0.0, 0.999));
    c.bind("attempt-multiplier", s.attempt_multiplier, "sampler budget multiplier")->check(CLI::PositiveNumber);
    c.bind("max-drop-fraction", s.max_drop_fraction, "invalidate when more replicates are dropped")
        ->check(CLI::Range(0.0, 1.0));
  }
  {
    auto& c = add("llt", "exact local limit check b_n P(S_n = n-1) / span against g(0)");
    c.bind_common(s);
    c.bind_list("n", s.n, "sizes");
    c.bind("tolerance", s.tolerance, "relative tolerance")->check(CLI::PositiveNumber);
  }
  {
    auto& c = add("height-moments", "moments of (b_n/n) H across sizes");
    c.bind_common(s);
    c.bind_list("n", s.n, "tree sizes");
    c.bind("R", s.R, "replicates per size");
    c.bind_list("p", s.p, "moment orders");
    c.bind("stability-tolerance", s.stability_tolerance, "relative change allowed across the top decade")
        ->check(CLI::PositiveNumber);
    c.bind("attempt-multiplier", s.attempt_multiplier, "sampler budget multiplier")->check(CLI::PositiveNumber);
    c.bind("max-drop-fraction", s.max_drop_fraction, "invalidate when more replicates are dropped")
        ->check(CLI::Range(0.0, 1.0));
  }
  {
    auto& c = add("tail", "fit the tail exponents of (b_n/n) H");
    c.bind_common(s);
    c.bind_list("n", s.n, "tree sizes");
    c.bind("R", s.R, "replicates per size");
    c.bind("tail-tolerance", s.tail_tolerance, "relative tolerance on the exponent")->check(CLI::PositiveNumber);
    c.bind("window-low", s.window_low, "lowest cdf value in the fit")->check(CLI::Range(0.0, 1.0));
    c.bind("window-high", s.window_high, "highest cdf value in the fit")->check(CLI::Range(0.0, 1.0));
    c.bind("attempt-multiplier", s.attempt_multiplier, "sampler budget multiplier")->check(CLI::PositiveNumber);
    c.bind("max-drop-fraction", s.max_drop_fraction, "invalidate when more replicates are dropped")
        ->check(CLI::Range(0.0, 1.0));
  }
  {
    auto& c = add("continuum", "Monte Carlo of the continuum functional on Brownian excursions");
    c.bind_common(s);
    c.bind("m", s.m, "excursion grid steps")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 30));
    c.bind("levels", s.levels, "level count of the sweep")->check(CLI::Range(std::size_t{1}, std::size_t{1} << 24));
    c.bind("R", s.R, "replicates");
    c.bind_list("alpha-prime", s.alpha_prime, "mass exponents alpha' (toll x^{alpha'-1} u^beta)");
    c.bind_list("beta", s.beta, "height exponents beta");
    c.bind("tolerance", s.tolerance, "relative tolerance")->check(CLI::PositiveNumber);
  }
  app.add_subcommand("selftest", "run the golden-value suite");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "bgwf 1.0.0\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    // Subcommand help arrives as CallForHelp on the subcommand.
    if (e.get_exit_code() == 0) {
      for (const auto* sub : app.get_subcommands()) out << sub->help();
      if (app.get_subcommands().empty()) out << app.help();
      return 0;
    }
    err << "usage error: " << e.what() << '\n' << "run with --help for usage\n";
    return kExitUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  if (name == "selftest") return run_selftest(out) == 0 ? 0 : 2;

  Command& cmd = *commands.at(name);
  try {
    cmd.resolve(s);
    const bool randomized = name != "llt";
    if (!s.seed_given && randomized) s.seed = fresh_seed();
    if (cmd.print_config()) {
      out << cmd.resolved().dump(2) << '\n';
      return 0;
    }
    if (randomized) err << "seed: " << s.seed << '\n';

    if (name == "sample") return run_sample(s, out);
    if (name == "functional") return run_functional(s, out);

    const Mode mode = mode_from_string(name);
    const ExperimentConfig config = build_config(s, mode);
    const McReport report = run(config);
    emit_report(report, s, out, err);
    return report.exit_code();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const theory::InfiniteMoment& e) {
    err << "infinite moment: " << e.what() << '\n';
    return 3;
  } catch (const SamplerBudgetExceeded& e) {
    err << "sampler budget exceeded: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    // Model construction and range checks inside the library.
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_and_dispatch(args, out, err);
}

}  // namespace bgw::cli
