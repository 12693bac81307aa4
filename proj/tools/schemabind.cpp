// Command-line driver: dataset generation, training, evaluation, decoding
// analyses, and report rendering.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <thread>

#include "schemabind/checkpoint.hpp"
#include "schemabind/digest.hpp"
#include "schemabind/harness.hpp"
#include "schemabind/manifest.hpp"
#include "schemabind/probes.hpp"
#include "schemabind/svg.hpp"

namespace fs = std::filesystem;
using namespace schemabind;

namespace {

struct Options {
  std::string command;
  std::string experiment = "3";
  std::string arch = "ntm";
  std::string schema = "data/default.schema";
  uint64_t seed = 7;
  long steps = 30000;
  long draws = 100000;
  int trials = 1;
  long eval_interval = 500;
  int batch = 16;
  double lr = 1e-4;
  std::string probe;  // "", "hidden", "external"
  std::string out;
  std::string checkpoint;
  std::string predictions;
  std::string in_dir;
  std::string config;
  bool overwrite = false;
  bool bias_even = false;
};

std::string default_out_root() {
  const char* env = std::getenv("SCHEMABIND_OUT");
  return env && *env ? env : "out";
}

void apply_config(Options& opt, const std::map<std::string, bool>& user_set) {
  if (opt.config.empty()) return;
  RunManifest cfg = RunManifest::read(opt.config);
  auto absent = [&](const char* k) { return user_set.count(k) == 0 || !user_set.at(k); };
  if (cfg.has("experiment") && absent("experiment")) opt.experiment = cfg.get("experiment");
  if (cfg.has("arch") && absent("arch")) opt.arch = cfg.get("arch");
  if (cfg.has("schema") && absent("schema")) opt.schema = cfg.get("schema");
  if (cfg.has("seed") && absent("seed")) opt.seed = std::stoull(cfg.get("seed"));
  if (cfg.has("steps") && absent("steps")) opt.steps = std::stol(cfg.get("steps"));
  if (cfg.has("draws") && absent("draws")) opt.draws = std::stol(cfg.get("draws"));
  if (cfg.has("trials") && absent("trials")) opt.trials = std::stoi(cfg.get("trials"));
  if (cfg.has("eval_interval") && absent("eval_interval"))
    opt.eval_interval = std::stol(cfg.get("eval_interval"));
  if (cfg.has("batch") && absent("batch")) opt.batch = std::stoi(cfg.get("batch"));
  if (cfg.has("lr") && absent("lr")) opt.lr = std::stod(cfg.get("lr"));
  if (cfg.has("probe") && absent("probe")) opt.probe = cfg.get("probe");
  if (cfg.has("out") && absent("out")) opt.out = cfg.get("out");
  if (cfg.has("checkpoint") && absent("checkpoint")) opt.checkpoint = cfg.get("checkpoint");
  if (cfg.has("bias_even") && absent("bias_even")) opt.bias_even = cfg.get("bias_even") == "true";
}

void ensure_free(const fs::path& p, bool overwrite) {
  if (!overwrite && fs::exists(p))
    throw DataError("refusing to overwrite existing " + p.string() + " (pass --overwrite)");
}

struct ExperimentBundle {
  SchemaGraph graph;
  std::string schema_hash;
  ExperimentData data;
  CorrelationData corr;
  bool is_corr = false;
};

bool corr_family(const std::string& experiment) {
  return experiment == "corr" || experiment == "ambiguous" || experiment == "shuffled";
}

ExperimentBundle make_experiment(const Options& opt) {
  ExperimentBundle b;
  if (corr_family(opt.experiment)) {
    b.is_corr = true;
    CorrelationConfig cfg;
    cfg.bias_even = opt.bias_even;
    b.corr = build_correlation_sets(correlation_template(), opt.seed, cfg);
    b.data = std::move(b.corr.data);
    b.schema_hash = "correlation";
    return b;
  }
  b.graph = parse_schema(read_file(opt.schema));
  b.schema_hash = sha256_file(opt.schema);
  if (opt.experiment == "1")
    b.data = build_experiment1(b.graph, b.schema_hash, opt.seed, opt.draws);
  else if (opt.experiment == "2")
    b.data = build_experiment2(b.graph, b.schema_hash, opt.seed, opt.draws);
  else if (opt.experiment == "3")
    b.data = build_experiment3(b.graph, b.schema_hash, opt.seed);
  else
    throw DataError("unknown experiment: " + opt.experiment);
  return b;
}

RunManifest base_manifest(const Options& opt) {
  RunManifest m;
  m.set("tool", std::string("schemabind ") + kToolVersion);
  m.set("command", opt.command);
  m.set("experiment", opt.experiment);
  m.set("seed", std::to_string(opt.seed));
  if (!corr_family(opt.experiment)) {
    m.set("schema", opt.schema);
    m.set("schema_sha256", sha256_file(opt.schema));
  }
  if (opt.bias_even) m.set("bias_even", "true");
  return m;
}

void write_manifest_first(const Options& opt, RunManifest m) {
  fs::create_directories(opt.out);
  ensure_free(fs::path(opt.out) / "manifest.txt", opt.overwrite);
  m.write((fs::path(opt.out) / "manifest.txt").string());
}

int cmd_generate(const Options& opt) {
  auto m = base_manifest(opt);
  m.set("draws", std::to_string(opt.draws));
  m.set("out", opt.out);
  write_manifest_first(opt, m);
  auto bundle = make_experiment(opt);
  auto emit = [&](const char* name, const Dataset& ds) {
    fs::path p = fs::path(opt.out) / name;
    ensure_free(p, opt.overwrite);
    write_file(p.string(), ds.to_text());
    std::cout << p.string() << ": " << ds.examples.size() << " examples\n";
  };
  emit("train.txt", bundle.data.train);
  emit("test.txt", bundle.data.test);
  if (bundle.is_corr) {
    emit("ambiguous.txt", bundle.corr.ambiguous);
    emit("shuffled.txt", bundle.corr.shuffled);
  }
  return 0;
}

int cmd_train(const Options& opt) {
  auto m = base_manifest(opt);
  m.set("arch", opt.arch);
  m.set("steps", std::to_string(opt.steps));
  m.set("trials", std::to_string(opt.trials));
  m.set("draws", std::to_string(opt.draws));
  m.set("batch", std::to_string(opt.batch));
  m.set("lr", format_double(opt.lr));
  m.set("eval_interval", std::to_string(opt.eval_interval));
  m.set("out", opt.out);
  write_manifest_first(opt, m);

  auto run_trial = [&](int trial) {
    Options topt = opt;
    auto bundle = make_experiment(topt);
    uint64_t trial_seed = opt.trials == 1 ? opt.seed : derive_seed(opt.seed, "trial", trial);
    CellConfig cfg;
    cfg.arch = arch_from_name(opt.arch);
    Model model(cfg, trial_seed);
    TrainConfig tc;
    tc.experiment = opt.experiment;
    tc.arch = cfg.arch;
    tc.seed = trial_seed;
    tc.lr = opt.lr;
    tc.batch = opt.batch;
    tc.max_steps = opt.steps;
    tc.eval_interval = opt.eval_interval;
    tc.out_dir = opt.trials == 1 ? opt.out : (fs::path(opt.out) / ("trial" + std::to_string(trial))).string();
    ensure_free(fs::path(tc.out_dir) / "metrics.csv", opt.overwrite);
    auto result = train(model, bundle.data, tc);
    if (!result.metrics.empty()) {
      const auto& last = result.metrics.back();
      std::cout << "trial " << trial << " arch " << opt.arch << " final test acc "
                << format_double(last.overall_acc) << "\n";
    }
  };

  if (opt.trials == 1) {
    run_trial(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < opt.trials; ++t) pool.emplace_back(run_trial, t);
    for (auto& th : pool) th.join();
  }
  return 0;
}

int cmd_eval(const Options& opt) {
  if (opt.checkpoint.empty()) throw DataError("eval requires --checkpoint");
  auto m = base_manifest(opt);
  m.set("checkpoint", opt.checkpoint);
  m.set("out", opt.out);
  write_manifest_first(opt, m);
  auto bundle = make_experiment(opt);
  auto ck = load_checkpoint(opt.checkpoint, bundle.is_corr ? "" : bundle.schema_hash);
  Model model = model_from_checkpoint(ck);

  if (opt.experiment == "ambiguous") {
    auto preds = predict_raw(model, bundle.corr.ambiguous, bundle.data.lexicon);
    std::string dump = "query,prediction\n";
    for (size_t i = 0; i < preds.size(); ++i) {
      dump += bundle.corr.ambiguous.examples[i].query + ",";
      for (int j = 0; j < preds[i].size(); ++j) {
        if (j) dump += ';';
        dump += format_double(preds[i][j]);
      }
      dump += "\n";
    }
    fs::path p = fs::path(opt.out) / "predictions.csv";
    ensure_free(p, opt.overwrite);
    write_file(p.string(), dump);
    std::cout << p.string() << ": " << preds.size() << " predictions\n";
    return 0;
  }

  const Dataset& ds = opt.experiment == "shuffled" ? bundle.corr.shuffled : bundle.data.test;
  fs::path dump = fs::path(opt.out) / "predictions.csv";
  ensure_free(dump, opt.overwrite);
  auto detail = run_correlation_eval(model, ds, bundle.data, dump.string());
  detail.row.split = "test";
  std::string csv = metrics_csv_header() +
                    metrics_csv_row(detail.row, model.config().arch, opt.experiment, opt.seed);
  fs::path p = fs::path(opt.out) / "eval.csv";
  ensure_free(p, opt.overwrite);
  write_file(p.string(), csv);
  std::cout << "test accuracy " << format_double(detail.row.overall_acc) << " over "
            << detail.row.n << " examples\n";
  return 0;
}

int cmd_decode(const Options& opt) {
  if (opt.checkpoint.empty()) throw DataError("decode requires --checkpoint");
  auto m = base_manifest(opt);
  m.set("checkpoint", opt.checkpoint);
  m.set("probe", opt.probe);
  m.set("out", opt.out);
  write_manifest_first(opt, m);
  auto graph = parse_schema(read_file(opt.schema));
  auto ck = load_checkpoint(opt.checkpoint, sha256_file(opt.schema));
  Model model = model_from_checkpoint(ck);

  auto ds = collect_activations(model, graph, opt.seed);
  auto curves = decode_timecourse(ds, opt.seed);
  std::string csv = "source,role,timestep,mean_score\n";
  std::map<std::string, std::vector<CurveSeries>> by_source;
  for (const auto& c : curves) {
    if (!opt.probe.empty() && c.source != opt.probe) continue;
    CurveSeries s;
    s.name = c.role;
    for (size_t t = 0; t < c.mean_score.size(); ++t) {
      csv += c.source + "," + c.role + "," + std::to_string(t) + "," +
             format_double(c.mean_score[t]) + "\n";
      s.steps.push_back(static_cast<double>(t));
      s.mean.push_back(c.mean_score[t]);
    }
    by_source[c.source].push_back(std::move(s));
  }
  fs::path p = fs::path(opt.out) / "decoding.csv";
  ensure_free(p, opt.overwrite);
  write_file(p.string(), csv);
  for (auto& [source, series] : by_source) {
    fs::path sp = fs::path(opt.out) / ("decoding_" + source + ".svg");
    ensure_free(sp, opt.overwrite);
    write_file(sp.string(),
               svg_learning_curves("decoding ranking scores (" + source + ")", series, 0.5));
  }
  std::cout << p.string() << ": " << curves.size() << " curves\n";
  return 0;
}

int cmd_analyze(const Options& opt) {
  auto m = base_manifest(opt);
  m.set("checkpoint", opt.checkpoint);
  m.set("predictions", opt.predictions);
  m.set("out", opt.out);
  write_manifest_first(opt, m);

  if (!opt.checkpoint.empty()) {
    auto graph = parse_schema(read_file(opt.schema));
    std::string hash = sha256_file(opt.schema);
    auto ck = load_checkpoint(opt.checkpoint, hash);
    Model model = model_from_checkpoint(ck);
    if (model.config().arch != Arch::ReducedNtm)
      throw DataError("weight statistics need read/write weightings (reduced NTM checkpoint)");
    auto data = build_experiment3(graph, hash, opt.seed);
    Tape tape;
    std::vector<std::pair<const Example*, Trace>> traced;
    for (const auto& ex : data.test.examples) {
      tape.reset();
      auto fwd = model.forward_sequence(tape, ex.input, data.lexicon,
                                        kProbeReadWeights | kProbeWriteWeights);
      traced.emplace_back(&ex, std::move(fwd.trace));
    }
    auto stats = weight_stats(traced, graph.roles, graph.queries, model.config().ntm.slots);
    std::string wh = "role,slot,count\n", rh = "query,slot,count\n", pc = "query,role,pearson\n";
    for (const auto& role : stats.roles) {
      for (size_t s = 0; s < stats.write_hist[role].size(); ++s)
        if (stats.write_hist[role][s])
          wh += role + "," + std::to_string(s) + "," + std::to_string(stats.write_hist[role][s]) + "\n";
      for (size_t s = 0; s < stats.read_hist[role].size(); ++s)
        if (stats.read_hist[role][s])
          rh += "Q" + role + "," + std::to_string(s) + "," + std::to_string(stats.read_hist[role][s]) + "\n";
    }
    std::vector<std::string> qlabels;
    for (const auto& r : stats.roles) qlabels.push_back("Q" + r);
    for (size_t qi = 0; qi < stats.roles.size(); ++qi)
      for (size_t rj = 0; rj < stats.roles.size(); ++rj)
        pc += qlabels[qi] + "," + stats.roles[rj] + "," +
              format_double(stats.pearson.at(static_cast<int>(qi), static_cast<int>(rj))) + "\n";
    for (auto& [name, text] : std::map<std::string, std::string>{
             {"write_hist.csv", wh}, {"read_hist.csv", rh}, {"pearson.csv", pc}}) {
      fs::path p = fs::path(opt.out) / name;
      ensure_free(p, opt.overwrite);
      write_file(p.string(), text);
    }
    fs::path hp = fs::path(opt.out) / "pearson.svg";
    ensure_free(hp, opt.overwrite);
    write_file(hp.string(),
               svg_heatmap("read/write weight correlations", qlabels, stats.roles, stats.pearson));
    std::cout << "weight statistics written to " << opt.out << "\n";
  }

  if (!opt.predictions.empty()) {
    std::vector<Tensor> preds;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(opt.predictions))
      if (entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto lines = split(read_file(f.string()), '\n');
      for (size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        auto cells = split(lines[li], ',');
        auto nums = split(cells.back(), ';');
        Tensor t(static_cast<int>(nums.size()), 1);
        for (size_t j = 0; j < nums.size(); ++j) t[static_cast<int>(j)] = std::strtod(nums[j].c_str(), nullptr);
        preds.push_back(std::move(t));
      }
    }
    if (preds.empty()) throw DataError("no prediction rows found under " + opt.predictions);
    auto result = even_odd_ttest(preds);
    std::string text = "n=" + std::to_string(result.t_stats.size()) +
                       "\nt=" + format_double(result.overall.t) +
                       "\ndf=" + format_double(result.overall.df) +
                       "\np=" + format_double(result.overall.p) + "\n";
    fs::path p = fs::path(opt.out) / "even_odd_ttest.txt";
    ensure_free(p, opt.overwrite);
    write_file(p.string(), text);
    std::cout << "even/odd t-test: " << text;
  }
  return 0;
}

struct ParsedMetrics {
  std::string experiment;
  std::string arch;
  std::vector<MetricRow> rows;
};

ParsedMetrics parse_metrics_csv(const std::string& path) {
  ParsedMetrics pm;
  auto lines = split(read_file(path), '\n');
  if (lines.empty()) throw DataError("empty metrics file: " + path);
  auto header = split(lines[0], ',');
  for (size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    auto cells = split(lines[li], ',');
    if (cells.size() != header.size()) throw DataError("ragged metrics row in " + path);
    MetricRow row;
    row.step = std::stol(cells[0]);
    row.split = cells[1];
    pm.arch = cells[2];
    pm.experiment = cells[3];
    row.overall_acc = std::strtod(cells[5].c_str(), nullptr);
    row.loss = std::strtod(cells[6].c_str(), nullptr);
    for (size_t q = 0; q < metric_query_columns().size(); ++q) {
      const auto& cell = cells[7 + q];
      if (cell != "nan") row.acc_by_query[metric_query_columns()[q]] = std::strtod(cell.c_str(), nullptr);
    }
    pm.rows.push_back(std::move(row));
  }
  return pm;
}

int cmd_report(const Options& opt) {
  auto m = base_manifest(opt);
  m.set("in", opt.in_dir);
  m.set("out", opt.out);
  write_manifest_first(opt, m);

  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(opt.in_dir))
    if (entry.is_regular_file() && entry.path().filename() == "metrics.csv")
      files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no metrics.csv found under " + opt.in_dir);

  // (experiment, arch) -> trials -> rows
  std::map<std::string, std::map<std::string, std::vector<ParsedMetrics>>> grouped;
  for (const auto& f : files) {
    auto pm = parse_metrics_csv(f);
    grouped[pm.experiment][pm.arch].push_back(std::move(pm));
  }

  std::string summary = "# schemabind report\n";
  for (auto& [experiment, by_arch] : grouped) {
    std::vector<CurveSeries> curves;
    std::vector<BarGroup> bars;
    std::vector<std::string> categories = metric_query_columns();
    summary += "\n## experiment " + experiment + "\n\n";
    summary += "| arch | trials | final test accuracy (mean [min, max]) |\n";
    summary += "|------|--------|----------------------------------------|\n";
    for (auto& [arch, trials] : by_arch) {
      // mean with min/max ribbon across trials at each step
      std::map<long, std::vector<double>> by_step;
      std::vector<double> finals;
      BarGroup bar;
      bar.arch = arch;
      std::map<std::string, std::vector<double>> final_by_query;
      for (auto& trial : trials) {
        const MetricRow* last = nullptr;
        for (auto& row : trial.rows) {
          if (row.split != "test") continue;
          by_step[row.step].push_back(row.overall_acc);
          last = &row;
        }
        if (last) {
          finals.push_back(last->overall_acc);
          for (const auto& q : categories) {
            auto it = last->acc_by_query.find(q);
            if (it != last->acc_by_query.end()) final_by_query[q].push_back(it->second);
          }
        }
      }
      CurveSeries s;
      s.name = arch;
      for (auto& [step, accs] : by_step) {
        double lo = accs[0], hi = accs[0], sum = 0.0;
        for (double a : accs) {
          lo = std::min(lo, a);
          hi = std::max(hi, a);
          sum += a;
        }
        s.steps.push_back(static_cast<double>(step));
        s.mean.push_back(sum / static_cast<double>(accs.size()));
        s.lo.push_back(lo);
        s.hi.push_back(hi);
      }
      curves.push_back(std::move(s));
      for (const auto& q : categories) {
        auto it = final_by_query.find(q);
        if (it == final_by_query.end()) {
          bar.mean.push_back(0.0);
          bar.lo.push_back(0.0);
          bar.hi.push_back(0.0);
          continue;
        }
        double lo = it->second[0], hi = it->second[0], sum = 0.0;
        for (double a : it->second) {
          lo = std::min(lo, a);
          hi = std::max(hi, a);
          sum += a;
        }
        bar.mean.push_back(sum / static_cast<double>(it->second.size()));
        bar.lo.push_back(lo);
        bar.hi.push_back(hi);
      }
      bars.push_back(std::move(bar));
      if (!finals.empty()) {
        double lo = finals[0], hi = finals[0], sum = 0.0;
        for (double a : finals) {
          lo = std::min(lo, a);
          hi = std::max(hi, a);
          sum += a;
        }
        summary += "| " + arch + " | " + std::to_string(finals.size()) + " | " +
                   format_fixed(sum / static_cast<double>(finals.size()), 4) + " [" +
                   format_fixed(lo, 4) + ", " + format_fixed(hi, 4) + "] |\n";
      }
    }
    auto curve_path = fs::path(opt.out) / ("curves_experiment_" + experiment + ".svg");
    ensure_free(curve_path, opt.overwrite);
    write_file(curve_path.string(),
               svg_learning_curves("test accuracy, experiment " + experiment, curves, 0.0));
    auto bars_path = fs::path(opt.out) / ("accuracy_by_query_experiment_" + experiment + ".svg");
    ensure_free(bars_path, opt.overwrite);
    write_file(bars_path.string(),
               svg_grouped_bars("final test accuracy by query, experiment " + experiment,
                                categories, bars, 0.0));
  }
  auto sp = fs::path(opt.out) / "summary.md";
  ensure_free(sp, opt.overwrite);
  write_file(sp.string(), summary);
  std::cout << "report written to " << opt.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"schema role-filler binding experiments"};
  app.require_subcommand(1);
  Options opt;
  std::map<std::string, bool> user_set;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--experiment", opt.experiment,
                    "experiment id: 1, 2, 3, corr, ambiguous, shuffled");
    sub->add_option("--arch", opt.arch, "architecture: rnn, lstm, fw, ntm");
    sub->add_option("--schema", opt.schema, "schema DSL file");
    sub->add_option("--seed", opt.seed, "master seed; all randomness derives from it");
    sub->add_option("--steps", opt.steps, "training steps");
    sub->add_option("--draws", opt.draws, "story draws for experiments 1 and 2");
    sub->add_option("--trials", opt.trials, "independent seeded trials run in parallel");
    sub->add_option("--eval-interval", opt.eval_interval, "steps between metric rows");
    sub->add_option("--batch", opt.batch, "training batch size");
    sub->add_option("--lr", opt.lr, "learning rate");
    sub->add_option("--probe", opt.probe, "decoding source: hidden or external");
    sub->add_option("--out", opt.out, "output directory (default $SCHEMABIND_OUT or ./out)");
    sub->add_option("--checkpoint", opt.checkpoint, "checkpoint file");
    sub->add_option("--predictions", opt.predictions, "directory of prediction dumps");
    sub->add_option("--in", opt.in_dir, "input directory of metrics.csv files");
    sub->add_option("--config", opt.config, "key=value config file merged under flags");
    sub->add_flag("--overwrite", opt.overwrite, "clobber existing artifacts");
    sub->add_flag("--bias-even", opt.bias_even, "bias even indices of half the fillers");
  };

  auto* generate = app.add_subcommand("generate", "emit datasets for an experiment");
  auto* train_cmd = app.add_subcommand("train", "train one architecture");
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  auto* decode = app.add_subcommand("decode", "ridge-decoding timecourses");
  auto* analyze = app.add_subcommand("analyze", "weight statistics and retention t-test");
  auto* report = app.add_subcommand("report", "render SVG/Markdown summaries from metrics");
  for (auto* sub : {generate, train_cmd, eval_cmd, decode, analyze, report}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    opt.command = sub->get_name();
    for (const auto* o : sub->get_options())
      if (!o->get_lnames().empty()) user_set[o->get_lnames()[0]] = o->count() > 0;
    apply_config(opt, user_set);
    if (opt.out.empty()) opt.out = (fs::path(default_out_root()) / opt.command).string();

    if (opt.command == "generate") return cmd_generate(opt);
    if (opt.command == "train") return cmd_train(opt);
    if (opt.command == "eval") return cmd_eval(opt);
    if (opt.command == "decode") return cmd_decode(opt);
    if (opt.command == "analyze") return cmd_analyze(opt);
    if (opt.command == "report") return cmd_report(opt);
    std::cerr << "unknown command\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
