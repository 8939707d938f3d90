#include "touchbench/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "touchbench/bench.hpp"
#include "touchbench/error.hpp"
#include "touchbench/events.hpp"
#include "touchbench/features.hpp"
#include "touchbench/humanize.hpp"
#include "touchbench/numeric.hpp"
#include "touchbench/synth.hpp"
#include "touchbench/theory.hpp"

namespace fs = std::filesystem;

namespace touchbench {

namespace {

enum class Level { Error, Warn, Info, Debug };

struct Log {
  std::ostream& err;
  Level level = Level::Info;

  void write(Level l, std::string_view tag, const std::string& msg) const {
    if (l <= level) err << tag << ": " << msg << '\n';
  }
  void warn(const std::string& msg) const { write(Level::Warn, "warning", msg); }
  void info(const std::string& msg) const { write(Level::Info, "info", msg); }
  void debug(const std::string& msg) const { write(Level::Debug, "debug", msg); }
};

struct Globals {
  std::uint64_t seed = 7;
  std::string output_dir = ".";
  std::string log_level = "info";
  int threads = 1;
};

struct SynthArgs {
  int humans = 200, agents = 200, actions = 10, clusters = 5;
  double train_fraction = 0.7;
  std::string profile, output = "corpus.jsonl", refs;
};

struct IngestArgs {
  std::string input, mapping, output = "corpus.jsonl";
  bool split = false;
  double train_fraction = 0.7;
};

struct ExtractArgs {
  std::string input, output = "features.csv", ig;
  bool normalize = false;
};

struct HumanizeArgs {
  std::string input, output = "humanized.jsonl", swipe = "none", db, wrapper_config;
  bool fake = false, longpress = false, rescale_time = false;
  std::optional<double> noise_sigma, fake_rate;
};

struct BenchArgs {
  std::string input, db, utility;
  std::vector<std::string> modes{"RAW", "bspline", "history", "history+fake+long"};
  int humans = 200, agents = 200, actions = 10;
  bool frozen = false, no_clusters = false;
  std::vector<std::size_t> curve_sizes{1, 2, 4, 8, 16, 24};
  int curve_trials = 3;
};

struct TheoryArgs {
  std::size_t samples = 100000;
  std::vector<double> sigmas{0.1, 0.5, 1.0};
  std::vector<std::size_t> sizes{100, 400, 1600, 6400};
  int trials = 50;
  int bins = kDefaultJsdBins;
};

fs::path out_path(const Globals& g, const std::string& name) {
  const fs::path p(name);
  return p.is_absolute() ? p : fs::path(g.output_dir) / p;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  return f;
}

void require_input(const std::string& path) {
  if (path.empty()) throw Error(ErrorCode::InvalidConfig, "--input is required");
  if (!fs::exists(path)) throw Error(ErrorCode::IoError, "no such file: " + path);
}

// CLI11 echoes every subcommand's defaults; keep the globals and the section
// of the command that ran.
std::string manifest_text(const CLI::App& app, const std::string& command) {
  std::istringstream in(app.config_to_str(true, false));
  std::ostringstream out;
  std::string line, section;
  while (std::getline(in, line)) {
    if (line.rfind("config=", 0) == 0) continue;
    if (!line.empty() && line.front() == '[') {
      section = line.substr(1, line.find(']') - 1);
      if (section != command) continue;
    } else {
      const auto eq = line.find('=');
      const auto dot = line.find('.');
      if (dot < eq && line.substr(0, dot) != command) continue;
      if (!section.empty() && section != command) continue;
    }
    out << line << '\n';
  }
  return out.str();
}

void write_manifest(const CLI::App& app, const Globals& g, const std::string& command, const Log& log) {
  const fs::path p = out_path(g, "manifest_" + command + ".toml");
  auto f = open_out(p);
  f << manifest_text(app, command);
  log.info("manifest " + p.string());
}

// ---------------------------------------------------------------------------

int cmd_synth(const SynthArgs& a, const Globals& g, const Log& log) {
  SynthConfig cfg;
  if (!a.profile.empty()) {
    std::ifstream in(a.profile);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + a.profile);
    cfg = parse_synth_config(in);
  }
  cfg.humans = a.humans;
  cfg.agents = a.agents;
  cfg.actions_per_session = a.actions;
  cfg.clusters = a.clusters;
  cfg.train_fraction = a.train_fraction;
  cfg.seed = g.seed;
  validate(cfg);
  const LabeledCorpus corpus = gen_corpus(cfg);
  const fs::path p = out_path(g, a.output);
  {
    auto f = open_out(p);
    write_jsonl(corpus, f);
  }
  log.info("wrote " + std::to_string(corpus.sessions.size()) + " sessions to " + p.string());
  if (!a.refs.empty()) {
    const fs::path r = out_path(g, a.refs);
    auto f = open_out(r);
    const ReferenceDB db = build_reference_db(corpus, true);
    write_reference_db(db, f);
    log.info("wrote " + std::to_string(db.entries.size()) + " reference swipes to " + r.string());
  }
  return kExitOk;
}

int cmd_ingest(const IngestArgs& a, const Globals& g, const Log& log) {
  require_input(a.input);
  LabeledCorpus corpus;
  if (!a.mapping.empty()) {
    const FieldMapping mapping = load_field_mapping(a.mapping);
    std::ifstream in(a.input);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + a.input);
    corpus = convert_records(in, mapping);
  } else {
    corpus = ingest_jsonl(a.input);
  }
  if (a.split && corpus.split.empty()) {
    corpus.split = stratified_split(corpus.sessions, a.train_fraction, derive_seed(g.seed, "split"));
  }
  const fs::path p = out_path(g, a.output);
  {
    auto f = open_out(p);
    write_jsonl(corpus, f);
  }
  std::size_t human = 0, swipes = 0, taps = 0;
  for (const Session& s : corpus.sessions) {
    human += is_human(s.actor);
    for (const ActionTrace& t : s.actions) (t.kind == ActionKind::Swipe ? swipes : taps) += 1;
  }
  log.info(std::to_string(corpus.sessions.size()) + " sessions (" + std::to_string(human) +
           " human), " + std::to_string(swipes) + " swipes, " + std::to_string(taps) + " taps -> " +
           p.string());
  return kExitOk;
}

int cmd_extract(const ExtractArgs& a, const Globals& g, const Log& log) {
  require_input(a.input);
  const LabeledCorpus corpus = ingest_jsonl(a.input);
  ExtractOptions opts;
  opts.normalize = a.normalize;
  const FeatureMatrix m = build_feature_matrix(corpus, opts);
  if (m.rows.empty()) log.warn("corpus has no swipes; the feature CSV holds only a header");
  const fs::path p = out_path(g, a.output);
  {
    auto f = open_out(p);
    write_feature_csv(m, f);
  }
  log.info(std::to_string(m.rows.size()) + " feature rows -> " + p.string());
  if (!a.ig.empty()) {
    auto f = open_out(out_path(g, a.ig));
    f << "feature,information_gain\n";
    for (std::string_view name : feature_names()) {
      f << name << ',' << format_double(information_gain(m, name)) << '\n';
    }
  }
  return kExitOk;
}

int cmd_humanize(const HumanizeArgs& a, const Globals& g, const Log& log) {
  require_input(a.input);
  WrapperConfig cfg;
  if (!a.wrapper_config.empty()) cfg = load_wrapper_config(a.wrapper_config);
  cfg.seed = g.seed;
  cfg.swipe_mode = parse_swipe_mode(a.swipe);
  if (a.fake) cfg.fake.enabled = true;
  if (a.longpress) cfg.longpress.enabled = true;
  if (a.rescale_time) cfg.history.rescale_time = true;
  if (a.noise_sigma) cfg.bspline.noise_sigma = *a.noise_sigma;
  if (a.fake_rate) cfg.fake.rate_hz = *a.fake_rate;
  if (!a.db.empty()) {
    cfg.history.db = std::make_shared<ReferenceDB>(load_reference_db(a.db));
    cfg.history.db_path = a.db;
  }
  if (cfg.swipe_mode == SwipeMode::HistoryMatch && !cfg.history.db) {
    throw Error(ErrorCode::InvalidConfig, "--swipe history needs --db");
  }
  validate(cfg);
  const LabeledCorpus corpus = ingest_jsonl(a.input);
  const LabeledCorpus out = humanize_corpus(corpus, cfg, g.threads);
  const fs::path p = out_path(g, a.output);
  auto f = open_out(p);
  write_jsonl(out, f);
  log.info("humanized corpus -> " + p.string());
  return kExitOk;
}

int cmd_bench(const BenchArgs& a, const Globals& g, const Log& log) {
  LabeledCorpus corpus;
  if (!a.input.empty()) {
    require_input(a.input);
    corpus = ingest_jsonl(a.input);
  } else {
    SynthConfig cfg;
    cfg.humans = a.humans;
    cfg.agents = a.agents;
    cfg.actions_per_session = a.actions;
    cfg.seed = g.seed;
    validate(cfg);
    corpus = gen_corpus(cfg);
    log.info("generated synthetic corpus of " + std::to_string(corpus.sessions.size()) + " sessions");
  }
  std::shared_ptr<const ReferenceDB> db;
  if (!a.db.empty()) {
    db = std::make_shared<ReferenceDB>(load_reference_db(a.db));
  } else if (std::any_of(a.modes.begin(), a.modes.end(),
                         [](const std::string& m) { return m.find("history") != std::string::npos; })) {
    if (corpus.split.empty()) throw Error(ErrorCode::MissingSplit, "corpus has no train/test split");
    db = std::make_shared<ReferenceDB>(build_reference_db(corpus, true));
    log.info("reference database from " + std::to_string(db->entries.size()) + " training swipes");
  }
  std::vector<BenchMode> modes;
  for (const std::string& name : a.modes) modes.push_back(make_mode(name, db, g.seed));
  std::optional<UtilityAnnotation> utility;
  if (!a.utility.empty()) utility = load_utility(a.utility);

  BenchOptions opts;
  opts.seed = g.seed;
  opts.threads = g.threads;
  opts.retrain = !a.frozen;
  opts.per_cluster = !a.no_clusters;
  opts.curve_sizes = a.curve_sizes;
  opts.curve_trials = a.curve_trials;
  const BenchReport report = run_benchmark(corpus, modes, opts, utility ? &*utility : nullptr);
  for (const std::string& w : report.warnings) log.warn(w);

  {
    auto f = open_out(out_path(g, "bench.json"));
    f << report_to_json(report).dump(2) << '\n';
  }
  {
    auto f = open_out(out_path(g, "summary.csv"));
    write_summary_csv(report, f);
  }
  {
    auto f = open_out(out_path(g, "per_feature.csv"));
    write_per_feature_csv(report, f);
  }
  {
    auto f = open_out(out_path(g, "histograms.csv"));
    write_histogram_csv(report, f);
  }
  {
    auto f = open_out(out_path(g, "curves.csv"));
    write_curve_csv(report, f);
  }
  log.info("bench report in " + g.output_dir + " (config " + report.config_hash + ")");
  return kExitOk;
}

int cmd_theory(const TheoryArgs& a, const Globals& g, std::ostream& out, const Log& log) {
  TheoryOptions opts;
  opts.seed = g.seed;
  opts.samples = a.samples;
  opts.sigmas = a.sigmas;
  opts.sizes = a.sizes;
  opts.trials = a.trials;
  opts.bins = a.bins;
  const TheoryReport report = run_theory_checks(opts);
  {
    auto f = open_out(out_path(g, "theory.csv"));
    write_theory_csv(report, f);
  }
  {
    auto f = open_out(out_path(g, "theory.json"));
    f << theory_to_json(report).dump(2) << '\n';
  }
  auto line = [&](bool ok, std::string_view what) { out << (ok ? "PASS " : "FAIL ") << what << '\n'; };
  line(report.optimal_value_ok, "optimal detector value matches -ln 4 + 2 JSD");
  line(report.smoothing_ok, "Gaussian smoothing lowers JSD");
  line(report.convergence_ok, "history sampling converges in W1");
  for (const TheoryCheck& c : report.checks) {
    log.debug(c.experiment + " " + c.parameters + " estimate=" + format_double(c.estimate) +
              (c.pass ? " pass" : " FAIL"));
  }
  return report.all_pass() ? kExitOk : kExitCheckFailed;
}

Level parse_level(const std::string& s) {
  if (s == "error") return Level::Error;
  if (s == "warn") return Level::Warn;
  if (s == "info") return Level::Info;
  return Level::Debug;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Agent humanization benchmark for touch interaction traces", "touchbench");
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "Read options from a key = value file (a manifest works)");
  app.require_subcommand(1, 1);

  Globals g;
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--output-dir", g.output_dir, "Directory for outputs")->envname("TOUCHBENCH_OUTPUT_DIR");
  app.add_option("--log-level", g.log_level, "error|warn|info|debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
  app.add_option("--threads", g.threads, "Worker cap")->check(CLI::Range(1, 256));

  SynthArgs sa;
  CLI::App* synth = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
  synth->add_option("--humans", sa.humans);
  synth->add_option("--agents", sa.agents);
  synth->add_option("--actions", sa.actions, "Actions per session");
  synth->add_option("--clusters", sa.clusters);
  synth->add_option("--train-fraction", sa.train_fraction);
  synth->add_option("--profile", sa.profile, "Profile file (key = value)");
  synth->add_option("-o,--output", sa.output);
  synth->add_option("--refs", sa.refs, "Also write a reference swipe database from the train split");

  IngestArgs ia;
  CLI::App* ingest = app.add_subcommand("ingest", "Validate and canonicalize a JSONL corpus");
  ingest->add_option("-i,--input", ia.input);
  ingest->add_option("--mapping", ia.mapping, "Field mapping for foreign dumps");
  ingest->add_flag("--split", ia.split, "Assign a stratified train/test split when missing");
  ingest->add_option("--train-fraction", ia.train_fraction);
  ingest->add_option("-o,--output", ia.output);

  ExtractArgs ea;
  CLI::App* extract = app.add_subcommand("extract", "Write the swipe feature matrix as CSV");
  extract->add_option("-i,--input", ea.input);
  extract->add_option("-o,--output", ea.output);
  extract->add_flag("--normalize", ea.normalize, "Scale coordinates by the screen size");
  extract->add_option("--ig", ea.ig, "Also write per-feature information gain");

  HumanizeArgs ha;
  CLI::App* humanize = app.add_subcommand("humanize", "Humanize the agent sessions of a corpus");
  humanize->add_option("-i,--input", ha.input);
  humanize->add_option("-o,--output", ha.output);
  humanize->add_option("--swipe", ha.swipe)->check(CLI::IsMember({"none", "bspline", "history"}));
  humanize->add_option("--db", ha.db, "Reference swipe database (JSONL)");
  humanize->add_flag("--fake", ha.fake, "Inject fake actions");
  humanize->add_flag("--long", ha.longpress, "Resample tap durations");
  humanize->add_flag("--rescale-time", ha.rescale_time);
  humanize->add_option("--noise-sigma", ha.noise_sigma);
  humanize->add_option("--fake-rate", ha.fake_rate);
  humanize->add_option("--wrapper-config", ha.wrapper_config, "Wrapper file (key = value)");

  BenchArgs ba;
  CLI::App* bench = app.add_subcommand("bench", "Run the humanization benchmark");
  bench->add_option("-i,--input", ba.input, "Corpus; a synthetic one is generated when absent");
  bench->add_option("--modes", ba.modes, "raw|bspline|history|fake|long|online, '+'-joined");
  bench->add_option("--db", ba.db);
  bench->add_option("--utility", ba.utility, "Task success annotations (JSON)");
  bench->add_option("--humans", ba.humans);
  bench->add_option("--agents", ba.agents);
  bench->add_option("--actions", ba.actions);
  bench->add_flag("--frozen", ba.frozen, "Train detectors once on RAW data");
  bench->add_flag("--no-clusters", ba.no_clusters, "Pooled row only");
  bench->add_option("--curve-sizes", ba.curve_sizes);
  bench->add_option("--curve-trials", ba.curve_trials);

  TheoryArgs ta;
  CLI::App* theory = app.add_subcommand("theory", "Numerical checks of the divergence results");
  theory->add_option("--samples", ta.samples);
  theory->add_option("--sigma", ta.sigmas);
  theory->add_option("--sizes", ta.sizes);
  theory->add_option("--trials", ta.trials);
  theory->add_option("--bins", ta.bins);

  for (CLI::App* sub : {synth, ingest, extract, humanize, bench, theory}) sub->configurable();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  const Log log{err, parse_level(g.log_level)};
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    fs::create_directories(g.output_dir);
    log.debug("seed " + std::to_string(g.seed));
    int code = kExitOk;
    if (command == "synth") code = cmd_synth(sa, g, log);
    else if (command == "ingest") code = cmd_ingest(ia, g, log);
    else if (command == "extract") code = cmd_extract(ea, g, log);
    else if (command == "humanize") code = cmd_humanize(ha, g, log);
    else if (command == "bench") code = cmd_bench(ba, g, log);
    else code = cmd_theory(ta, g, out, log);
    write_manifest(app, g, command, log);
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::IoError ? kExitIoError : kExitConfigError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIoError;
  }
}

}  // namespace touchbench
