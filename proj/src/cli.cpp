#include "wte/cli.hpp"

#include "wte/dataset.hpp"
#include "wte/embedding.hpp"
#include "wte/error.hpp"
#include "wte/ot.hpp"
#include "wte/otdd.hpp"
#include "wte/pipeline.hpp"
#include "wte/report.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace wte::cli {

namespace fs = std::filesystem;

namespace {

/// Failure tagged with the pipeline stage and the input it concerns.
struct StageFailure {
  int code;
  std::string stage;
  std::string input;
  std::string message;
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io_error, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorKind::io_error, "write failed: " + path.string());
}

fs::path require_out_dir(const RunConfig& c) {
  if (c.out.empty()) throw StageFailure{kExitFailure, "config", "", "--out is required"};
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw StageFailure{kExitFailure, "output", c.out, ec.message()};
  return c.out;
}

std::vector<int> parse_counts(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    int v = 0;
    const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || p != item.data() + item.size()) {
      throw StageFailure{kExitFailure, "config", "", "bad task count '" + item + "' in --counts"};
    }
    out.push_back(v);
  }
  if (out.empty()) throw StageFailure{kExitFailure, "config", "", "--counts is empty"};
  return out;
}

void validate_config(const RunConfig& c) {
  auto bad = [](const std::string& what) { throw StageFailure{kExitFailure, "config", "", what}; };
  if (c.mds_dim < 1) bad("--mds-dim must be >= 1");
  if (c.reg && *c.reg < 0.0) bad("--reg must be >= 0");
  if (c.ref_size && *c.ref_size < 1) bad("--ref-size must be >= 1");
  if (c.ref_size_cap < 1) bad("--ref-size-cap must be >= 1");
  if (c.subsample && *c.subsample < 1) bad("--subsample must be >= 1");
  if (c.workers < 1) bad("--workers must be >= 1");
  if (c.image_side && *c.image_side < 1) bad("--image-side must be >= 1");
  if (c.format != "auto" && c.format != "csv" && c.format != "raw-f32") bad("--format must be auto, csv or raw-f32");
  if (c.ref_mode != "auto") parse_ref_mode(c.ref_mode);
  if (c.ref_mode == "file" && c.ref_file.empty()) bad("--ref-mode file needs --ref-file");
  parse_ref_labels(c.ref_labels);
  if (c.otdd_mode != "direct" && c.otdd_mode != "atlas") bad("--mode must be direct or atlas");
}

PipelineOptions pipeline_options(const RunConfig& c) {
  PipelineOptions o;
  o.mds_dim = c.mds_dim;
  o.reg = c.reg;
  if (c.ref_size) o.ref_size = static_cast<Eigen::Index>(*c.ref_size);
  o.ref_size_cap = static_cast<Eigen::Index>(c.ref_size_cap);
  o.ref_seed = c.ref_seed;
  if (c.ref_mode != "auto") o.ref_mode = parse_ref_mode(c.ref_mode);
  o.image_side = c.image_side;
  o.ref_labels = parse_ref_labels(c.ref_labels);
  o.ref_file = c.ref_file;
  o.workers = c.workers;
  return o;
}

std::vector<LabeledDataset> load_tasks(const RunConfig& c) {
  std::vector<LabeledDataset> tasks;
  std::map<std::string, int> seen;
  for (const auto& path : c.inputs) {
    try {
      LabeledDataset ds = c.format == "auto" ? ingest(path)
                                             : ingest(path, c.format == "csv" ? DataFormat::csv : DataFormat::raw_f32);
      if (c.subsample) ds = subsample(ds, *c.subsample, c.seed);
      const int n = ++seen[ds.name];
      if (n > 1) ds.name += "_" + std::to_string(n);
      tasks.push_back(std::move(ds));
    } catch (const Error& e) {
      throw StageFailure{kExitIngest, "ingest", path, e.what()};
    }
  }
  return tasks;
}

void require_inputs(const RunConfig& c, std::size_t n, const std::string& what) {
  if (c.inputs.size() < n) {
    throw StageFailure{kExitFailure, "config", "",
                       c.command + " needs at least " + std::to_string(n) + " " + what};
  }
}

int cmd_ingest(const RunConfig& c, std::ostream& out) {
  require_inputs(c, 1, "input file");
  const auto tasks = load_tasks(c);
  for (const auto& t : tasks) {
    std::vector<int> counts(static_cast<std::size_t>(t.num_classes()), 0);
    for (int y : t.labels) ++counts[static_cast<std::size_t>(y)];
    out << t.name << ": N=" << t.size() << " d=" << t.dim() << " J=" << t.num_classes() << "\n";
    for (int y = 0; y < t.num_classes(); ++y) out << "  " << y << " " << t.label_names[y] << " " << counts[y] << "\n";
  }
  if (!c.out.empty()) {
    if (tasks.size() != 1) throw StageFailure{kExitFailure, "config", "", "ingest --out converts exactly one file"};
    try {
      if (detect_format(c.out) == DataFormat::csv) {
        write_csv(tasks.front(), c.out);
      } else {
        write_raw_f32(tasks.front(), c.out);
      }
    } catch (const Error& e) {
      throw StageFailure{kExitFailure, "output", c.out, e.what()};
    }
    out << "wrote " << c.out << "\n";
  }
  return kExitOk;
}

int cmd_embed(const RunConfig& c, std::ostream& out) {
  require_inputs(c, 1, "task file");
  const fs::path dir = require_out_dir(c);
  const auto tasks = load_tasks(c);
  const auto solves_before = ot_solve_count();
  WteRun run;
  try {
    run = run_wte(tasks, pipeline_options(c));
  } catch (const Error& e) {
    throw StageFailure{kExitFailure, "embed", "", e.what()};
  }
  const auto solves = ot_solve_count() - solves_before;

  std::ostringstream summary;
  summary << "tasks " << tasks.size() << "\n"
          << "labels " << run.atlas.entries.size() << "\n"
          << "mds_dim " << run.atlas.l << "\n"
          << "reg " << format_double(run.reg) << "\n"
          << "atlas_stress " << format_double(run.atlas.mds_stress) << "\n"
          << "atlas_clamped " << run.atlas.clamped << "\n"
          << "atlas_residual_spectrum " << format_double(run.atlas.residual_spectrum) << "\n"
          << "reference_hash " << hash_hex(run.reference.hash) << "\n"
          << "reference_size " << run.reference.points.rows() << "\n"
          << "reference_provenance " << to_string(run.reference.provenance) << "\n"
          << "ot_solves " << solves << "\n";
  for (const auto& e : run.embeddings) {
    summary << "task " << e.dataset << " ot_cost " << format_double(e.ot_cost.value_or(0.0)) << " norm "
            << format_double(e.vector.norm()) << "\n";
  }
  try {
    write_atlas(run.atlas, dir / "atlas.wtea");
    for (const auto& e : run.embeddings) write_embedding(e, dir / (e.dataset + ".wtev"));
    write_points_csv(run.reference.points, dir / "reference.csv");
    write_text(dir / "run_config.txt", serialize(c));
    write_text(dir / "summary.txt", summary.str());
  } catch (const Error& e) {
    throw StageFailure{kExitFailure, "output", dir.string(), e.what()};
  }
  out << summary.str();
  return kExitOk;
}

int cmd_dist(const RunConfig& c, std::ostream& out) {
  require_inputs(c, 1, "embedding file");
  std::vector<TaskEmbedding> embs;
  std::vector<std::string> ids;
  for (const auto& path : c.inputs) {
    try {
      embs.push_back(read_embedding(path));
    } catch (const Error& e) {
      throw StageFailure{kExitIngest, "ingest", path, e.what()};
    }
    ids.push_back(embs.back().dataset);
  }
  SymMatrix d;
  try {
    d = pairwise_distances(embs, c.squared);
  } catch (const Error& e) {
    const int code = e.kind() == ErrorKind::incompatible_embedding ? kExitIncompatible : kExitFailure;
    throw StageFailure{code, "dist", "", e.what()};
  }
  if (c.out.empty()) {
    write_matrix_csv(ids, d.matrix(), out);
  } else {
    try {
      write_matrix_csv(ids, d.matrix(), c.out);
    } catch (const Error& e) {
      throw StageFailure{kExitFailure, "output", c.out, e.what()};
    }
  }
  return kExitOk;
}

int cmd_otdd(const RunConfig& c, std::ostream& out) {
  require_inputs(c, 2, "task files");
  const fs::path dir = require_out_dir(c);
  const auto tasks = load_tasks(c);
  OtddMatrix m;
  LabelAtlas atlas;
  double reg = 0.0;
  try {
    check_collection(tasks);
    reg = c.reg ? *c.reg : default_regularization(tasks);
    if (c.otdd_mode == "atlas") {
      const auto stats = collection_stats(tasks, reg);
      atlas = build_atlas(stats, std::min(c.mds_dim, static_cast<int>(stats.size())));
      m = otdd_matrix(tasks, AtlasLabelCost{atlas}, c.workers);
    } else {
      m = otdd_matrix(tasks, DirectLabelCost{reg}, c.workers);
    }
  } catch (const Error& e) {
    throw StageFailure{kExitFailure, "otdd", "", e.what()};
  }
  std::ostringstream timings;
  timings << "task_i,task_j,n_i,n_j,otdd,seconds\n";
  for (const auto& p : m.pairs) {
    timings << p.pair.first << "," << p.pair.second << "," << p.n_i << "," << p.n_j << ","
            << format_double(p.value) << "," << format_double(p.solve_time.count()) << "\n";
  }
  try {
    write_matrix_csv(m.ids, m.values.matrix(), dir / "otdd_matrix.csv");
    write_text(dir / "otdd_timings.csv", timings.str());
    write_text(dir / "run_config.txt", serialize(c));
  } catch (const Error& e) {
    throw StageFailure{kExitFailure, "output", dir.string(), e.what()};
  }
  out << "tasks " << tasks.size() << "\nmode " << c.otdd_mode << "\nreg " << format_double(reg) << "\not_solves "
      << m.solves << "\n";
  return kExitOk;
}

int cmd_correlate(const RunConfig& c, std::ostream& out) {
  require_inputs(c, 3, "task files");
  const fs::path dir = require_out_dir(c);
  const auto tasks = load_tasks(c);
  CorrelationReport rep;
  try {
    rep = correlate(tasks, pipeline_options(c));
  } catch (const Error& e) {
    throw StageFailure{kExitFailure, "correlate", "", e.what()};
  }
  std::ostringstream pairs;
  pairs << "task_i,task_j,wte_squared,otdd\n";
  for (const auto& p : rep.pairs) {
    pairs << p.task_i << "," << p.task_j << "," << format_double(p.wte2) << "," << format_double(p.otdd) << "\n";
  }
  std::ostringstream summary;
  summary << "tasks " << rep.ids.size() << "\n"
          << "pairs " << rep.pairs.size() << "\n"
          << "pearson_r " << format_double(rep.pearson_r) << "\n"
          << "p_value " << format_double(rep.p_value) << "\n"
          << "fit_slope " << format_double(rep.fit.slope) << "\n"
          << "fit_intercept " << format_double(rep.fit.intercept) << "\n"
          << "degenerate " << (rep.degenerate ? "yes" : "no") << "\n"
          << "wte_ot_solves " << rep.wte_solves << "\n"
          << "otdd_ot_solves " << rep.otdd_solves << "\n"
          << "mds_dim " << rep.mds_dim << "\n"
          << "atlas_stress " << format_double(rep.atlas_stress) << "\n"
          << "reg " << format_double(rep.reg) << "\n";
  try {
    write_text(dir / "correlation_pairs.csv", pairs.str());
    write_text(dir / "correlation_summary.txt", summary.str());
    write_matrix_csv(rep.ids, rep.wte2_matrix, dir / "wte_squared.csv");
    write_matrix_csv(rep.ids, rep.otdd_matrix, dir / "otdd_matrix.csv");
    write_text(dir / "run_config.txt", serialize(c));
  } catch (const Error& e) {
    throw StageFailure{kExitFailure, "output", dir.string(), e.what()};
  }
  out << summary.str();
  return kExitOk;
}

int cmd_bench(const RunConfig& c, std::ostream& out) {
  const fs::path dir = require_out_dir(c);
  BenchOptions b;
  b.counts = parse_counts(c.counts);
  b.task_size = c.task_size;
  b.classes = c.classes;
  b.dim = c.dim;
  b.repeats = c.repeats;
  b.seed = c.seed;
  b.pipeline = pipeline_options(c);
  std::vector<BenchRow> rows;
  try {
    rows = run_bench(b);
  } catch (const Error& e) {
    throw StageFailure{kExitFailure, "bench", "", e.what()};
  }
  std::ostringstream csv;
  csv << "tasks,task_size,wte_solves,otdd_solves,wte_seconds,otdd_seconds,ratio\n";
  for (const auto& r : rows) {
    csv << r.tasks << "," << c.task_size << "," << r.wte_solves << "," << r.otdd_solves << ","
        << format_double(r.wte_seconds) << "," << format_double(r.otdd_seconds) << "," << format_double(r.ratio())
        << "\n";
  }
  try {
    write_text(dir / "bench.csv", csv.str());
    write_text(dir / "run_config.txt", serialize(c));
  } catch (const Error& e) {
    throw StageFailure{kExitFailure, "output", dir.string(), e.what()};
  }
  char line[160];
  out << "   M  wte_solves  otdd_solves   wte_s    otdd_s   ratio\n";
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%4d  %10llu  %11llu  %7.3f  %8.3f  %6.2f\n", r.tasks,
                  static_cast<unsigned long long>(r.wte_solves), static_cast<unsigned long long>(r.otdd_solves),
                  r.wte_seconds, r.otdd_seconds, r.ratio());
    out << line;
  }
  return kExitOk;
}

void add_pipeline_flags(CLI::App* sub, RunConfig& c) {
  sub->add_option("--mds-dim", c.mds_dim, "label embedding dimension l (capped at the label count)");
  sub->add_option("--reg", c.reg, "covariance regularization (default 1e-6 x mean feature variance)");
  sub->add_option("--ref-size", c.ref_size, "reference size M (default median task size)");
  sub->add_option("--ref-size-cap", c.ref_size_cap, "cap on the default reference size");
  sub->add_option("--ref-seed", c.ref_seed, "reference seed");
  sub->add_option("--ref-mode", c.ref_mode, "auto | smooth-image | uniform-box | file");
  sub->add_option("--ref-file", c.ref_file, "reference points CSV for --ref-mode file");
  sub->add_option("--image-side", c.image_side, "image side for smooth-image (default sqrt(d))");
  sub->add_option("--ref-labels", c.ref_labels, "reference label coordinates: zeros | box");
}

void add_task_flags(CLI::App* sub, RunConfig& c) {
  sub->add_option("inputs", c.inputs, "task files");
  sub->add_option("--format", c.format, "auto | csv | raw-f32");
  sub->add_option("--subsample", c.subsample, "keep at most this many samples per class");
  sub->add_option("--seed", c.seed, "subsampling seed");
  sub->add_option("--workers", c.workers, "parallel OT solves");
}

}  // namespace

std::string serialize(const RunConfig& c) {
  const std::string& cmd = c.command;
  const bool tasks = cmd == "ingest" || cmd == "embed" || cmd == "otdd" || cmd == "correlate";
  const bool pipeline = cmd == "embed" || cmd == "correlate" || cmd == "bench";
  std::ostringstream os;
  os << "# wte " << cmd << "\n";
  auto kv = [&](const char* k, const auto& v) { os << k << " = " << v << "\n"; };
  for (const auto& in : c.inputs) kv("input", in);
  if (tasks) {
    kv("format", c.format);
    if (c.subsample) kv("subsample", *c.subsample);
  }
  if (tasks || cmd == "bench") kv("seed", c.seed);
  if (cmd != "ingest" && cmd != "dist") kv("workers", c.workers);
  if (pipeline || cmd == "otdd") {
    kv("mds-dim", c.mds_dim);
    if (c.reg) kv("reg", format_double(*c.reg));
  }
  if (pipeline) {
    if (c.ref_size) kv("ref-size", *c.ref_size);
    kv("ref-size-cap", c.ref_size_cap);
    kv("ref-seed", c.ref_seed);
    kv("ref-mode", c.ref_mode);
    if (!c.ref_file.empty()) kv("ref-file", c.ref_file);
    if (c.image_side) kv("image-side", *c.image_side);
    kv("ref-labels", c.ref_labels);
  }
  if (cmd == "otdd") kv("mode", c.otdd_mode);
  if (cmd == "dist") kv("squared", c.squared ? "true" : "false");
  if (cmd == "bench") {
    kv("counts", c.counts);
    kv("task-size", c.task_size);
    kv("classes", c.classes);
    kv("dim", c.dim);
    kv("repeats", c.repeats);
  }
  if (!c.out.empty()) kv("out", c.out);
  return os.str();
}

ConfigFile read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_error, "cannot open config file " + path.string());
  ConfigFile cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path.string() + ": expected key = value", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(path.string() + ": empty key", lineno);
    if (key == "input") {
      cfg.inputs.push_back(value);
    } else if (value == "true") {
      cfg.options.push_back("--" + key);
    } else if (value != "false") {
      cfg.options.push_back("--" + key);
      cfg.options.push_back(value);
    }
  }
  return cfg;
}

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  // Config file options go right after the subcommand so that explicit
  // flags, which come later, win.
  std::vector<std::string> args;
  std::optional<ConfigFile> config;
  try {
    for (std::size_t i = 0; i < args_in.size(); ++i) {
      const std::string& a = args_in[i];
      if (a == "--config" && i + 1 < args_in.size()) {
        config = read_config(args_in[++i]);
      } else if (a.rfind("--config=", 0) == 0) {
        config = read_config(a.substr(9));
      } else {
        args.push_back(a);
      }
    }
  } catch (const Error& e) {
    err << "wte: error [stage config]: " << e.what() << "\n";
    return kExitFailure;
  }
  if (config && !args.empty()) args.insert(args.begin() + 1, config->options.begin(), config->options.end());

  RunConfig c;
  CLI::App app{"Wasserstein task embedding: dataset distances via optimal transport", "wte"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  app.add_option("--config", "key = value file mirroring the flags; explicit flags win");

  auto* ingest_cmd = app.add_subcommand("ingest", "parse and validate task files, optionally convert one");
  add_task_flags(ingest_cmd, c);
  ingest_cmd->add_option("--out", c.out, "converted output file (.csv or raw-f32)");

  auto* embed_cmd = app.add_subcommand("embed", "build the label atlas and embed every task");
  add_task_flags(embed_cmd, c);
  add_pipeline_flags(embed_cmd, c);
  embed_cmd->add_option("--out", c.out, "output directory");

  auto* dist_cmd = app.add_subcommand("dist", "pairwise distances between embedding files");
  dist_cmd->add_option("inputs", c.inputs, "embedding files (.wtev)");
  dist_cmd->add_flag("--squared", c.squared, "report squared distances");
  dist_cmd->add_option("--out", c.out, "CSV output file (default stdout)");

  auto* otdd_cmd = app.add_subcommand("otdd", "pairwise exact OTDD");
  add_task_flags(otdd_cmd, c);
  otdd_cmd->add_option("--reg", c.reg, "covariance regularization");
  otdd_cmd->add_option("--mode", c.otdd_mode, "label cost: direct (Bures) | atlas");
  otdd_cmd->add_option("--mds-dim", c.mds_dim, "atlas dimension for --mode atlas");
  otdd_cmd->add_option("--out", c.out, "output directory");

  auto* corr_cmd = app.add_subcommand("correlate", "squared WTE against OTDD over all task pairs");
  add_task_flags(corr_cmd, c);
  add_pipeline_flags(corr_cmd, c);
  corr_cmd->add_option("--out", c.out, "output directory");

  auto* bench_cmd = app.add_subcommand("bench", "solve counts and wall clock, WTE against pairwise OTDD");
  add_pipeline_flags(bench_cmd, c);
  bench_cmd->add_option("--counts", c.counts, "comma-separated task counts");
  bench_cmd->add_option("--task-size", c.task_size, "samples per synthetic task");
  bench_cmd->add_option("--classes", c.classes, "classes per synthetic task");
  bench_cmd->add_option("--dim", c.dim, "feature dimension of synthetic tasks");
  bench_cmd->add_option("--repeats", c.repeats, "timing repeats (fastest is kept)");
  bench_cmd->add_option("--seed", c.seed, "synthetic data seed");
  bench_cmd->add_option("--workers", c.workers, "parallel OT solves");
  bench_cmd->add_option("--out", c.out, "output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  if (config && c.inputs.empty()) c.inputs = config->inputs;

  try {
    validate_config(c);
    if (ingest_cmd->parsed()) return c.command = "ingest", cmd_ingest(c, out);
    if (embed_cmd->parsed()) return c.command = "embed", cmd_embed(c, out);
    if (dist_cmd->parsed()) return c.command = "dist", cmd_dist(c, out);
    if (otdd_cmd->parsed()) return c.command = "otdd", cmd_otdd(c, out);
    if (corr_cmd->parsed()) return c.command = "correlate", cmd_correlate(c, out);
    if (bench_cmd->parsed()) return c.command = "bench", cmd_bench(c, out);
  } catch (const StageFailure& f) {
    err << "wte: error [stage " << f.stage << "]";
    if (!f.input.empty()) err << " input '" << f.input << "'";
    err << ": " << f.message << "\n";
    return f.code;
  } catch (const Error& e) {
    err << "wte: error [stage config]: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "wte: error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace wte::cli
