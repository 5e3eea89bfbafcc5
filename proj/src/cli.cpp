#include "flowbot/cli.hpp"

#include "flowbot/dataset.hpp"
#include "flowbot/evaluation.hpp"
#include "flowbot/flow.hpp"
#include "flowbot/model.hpp"
#include "flowbot/report.hpp"
#include "flowbot/select.hpp"
#include "flowbot/synth.hpp"
#include "flowbot/windows.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace flowbot {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? sep : "") + parts[i];
  return s;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto piece : split_view(text, ',')) {
    const auto t = trim(piece);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::vector<std::string> all_param_keys() {
  std::vector<std::string> keys;
  for (Family f : {Family::logreg, Family::svm, Family::rf, Family::gboost, Family::nn})
    for (auto& k : param_keys(f))
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  return keys;
}

// "seed" is spelled --model-seed so it never collides with a command's own split seed.
std::string flag_for(const std::string& key) {
  if (key == "seed") return "--model-seed";
  std::string dashed = key;
  std::replace(dashed.begin(), dashed.end(), '_', '-');
  return "--" + dashed;
}

/// --model plus one flag per hyperparameter of any family.
struct ModelOptions {
  std::string model = "rf";
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  CLI::Option* model_opt = nullptr;

  void attach(CLI::App* app, bool required = false) {
    model_opt = app->add_option("--model", model, "Model family")
                    ->check(CLI::IsMember({"logreg", "svm", "rf", "gboost", "nn"}));
    if (required) model_opt->required();
    for (const auto& key : all_param_keys()) {
      std::string names = flag_for(key);
      if (key.find('_') != std::string::npos) names += ",--" + key;
      options[key] = app->add_option(names, values[key], "Hyperparameter " + key)->group("Hyperparameters");
    }
  }

  bool any_given() const {
    return std::any_of(options.begin(), options.end(), [](const auto& kv) { return kv.second->count() > 0; });
  }

  HyperParams resolve() const { return apply(default_params(parse_family(model))); }

  HyperParams apply(HyperParams hp) const {
    const auto allowed = param_keys(hp.family);
    for (const auto& [key, opt] : options) {
      if (opt->count() == 0) continue;
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw UsageError(flag_for(key) + " does not apply to model " + std::string(to_string(hp.family)));
      try {
        set_param(hp, key, values.at(key));
      } catch (const Error& e) {
        throw UsageError(flag_for(key) + " " + values.at(key) + ": " + e.what());
      }
    }
    try {
      hp.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    return hp;
  }
};

ConfigLines model_config(const HyperParams& hp) {
  ConfigLines c;
  for (auto& kv : describe_params(hp)) c.push_back(kv);
  return c;
}

void append(ConfigLines& to, const ConfigLines& from) { to.insert(to.end(), from.begin(), from.end()); }

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  return f;
}

std::vector<Eigen::Index> parse_feature_subset(const std::string& text, const std::vector<std::string>& names) {
  std::vector<Eigen::Index> cols;
  for (const auto& tok : split_list(text)) {
    auto it = std::find(names.begin(), names.end(), tok);
    if (it != names.end()) {
      cols.push_back(it - names.begin());
      continue;
    }
    std::uint64_t idx = 0;
    if (!parse_uint(tok, idx) || idx >= names.size()) throw UsageError("--subset: unknown feature '" + tok + "'");
    cols.push_back(static_cast<Eigen::Index>(idx));
  }
  if (cols.empty()) throw UsageError("--subset: empty feature list");
  return cols;
}

std::string names_of(const std::vector<Eigen::Index>& cols, const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (auto c : cols) out.push_back(names[static_cast<std::size_t>(c)]);
  return out.empty() ? "(none)" : join(out, ",");
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  ReportFormat format = ReportFormat::text;
};

// --- subcommands ---------------------------------------------------------

struct SummarizeCmd {
  std::string input;
  std::size_t top = 10;

  void attach(CLI::App* app) {
    app->add_option("flows", input, "Bidirectional NetFlow CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--top", top, "Categories listed per column")->capture_default_str();
  }
  void exec(Context& ctx) const {
    write_config_header(ctx.out, "summarize", {{"input", input}, {"top", std::to_string(top)}});
    const FlowTable t = load_scenario(input);
    ctx.out << "accepted: " << t.parse_stats.accepted << "\nrejected: " << t.parse_stats.rejected << '\n';
    for (const auto& r : t.parse_stats.first_rejections)
      ctx.out << "  line " << r.line << ": " << to_string(r.reason) << '\n';
    print_summary(ctx.out, summarize(t, top));
  }
};

struct ExtractCmd {
  std::string input, output, origin;
  double width = 120.0, stride = 60.0;

  void attach(CLI::App* app) {
    app->add_option("flows", input, "Bidirectional NetFlow CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--width", width, "Window width in seconds")->capture_default_str();
    app->add_option("--stride", stride, "Window stride in seconds")->capture_default_str();
    app->add_option("--origin", origin, "Window origin timestamp (default: earliest flow)");
    app->add_option("-o,--output", output, "Feature CSV to write")->required();
  }
  void exec(Context& ctx) const {
    WindowConfig cfg;
    cfg.width = width;
    cfg.stride = stride;
    if (!origin.empty()) {
      cfg.origin = parse_timestamp(origin);
      if (!cfg.origin) throw UsageError("--origin: bad timestamp '" + origin + "'");
    }
    try {
      cfg.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    write_config_header(ctx.out, "extract",
                        {{"input", input},
                         {"width", format_double(width)},
                         {"stride", format_double(stride)},
                         {"origin", origin.empty() ? "earliest flow" : origin},
                         {"output", output}});
    const FlowTable t = load_scenario(input);
    Dataset ds = build_dataset(t, cfg);
    ds.meta.scenario = std::filesystem::path(input).stem().string();
    auto f = open_output(output);
    write_feature_csv(f, ds);
    if (!f.flush()) throw Error("failed writing '" + output + "'");
    ctx.out << "flows accepted: " << t.parse_stats.accepted << "\nflows rejected: " << t.parse_stats.rejected
            << "\nfeature rows: " << ds.rows() << "\nbotnet rows: " << ds.positives() << '\n';
  }
};

struct TrainCmd {
  std::string input, output;
  ModelOptions model;

  void attach(CLI::App* app) {
    app->add_option("features", input, "Feature CSV")->required()->check(CLI::ExistingFile);
    model.attach(app, true);
    app->add_option("-o,--output", output, "Model JSON to write")->required();
  }
  void exec(Context& ctx) const {
    const HyperParams hp = model.resolve();
    ConfigLines cfg{{"input", input}, {"output", output}};
    append(cfg, model_config(hp));
    write_config_header(ctx.out, "train", cfg);
    const Dataset ds = load_feature_csv(input);
    const ModelArtifact m = train(ds, hp);
    save_model(output, m);
    const Metrics fit = prf1(ds.labels, predict(m, ds.features).labels);
    Table t;
    t.columns = {"Scenario", "Botnet", "Size", "train_P", "train_R", "train_f1"};
    t.add({ds.meta.scenario, std::to_string(ds.positives()), std::to_string(ds.rows()),
           format_rate(fit.precision, ctx.format), format_rate(fit.recall, ctx.format), format_rate(fit.f1, ctx.format)});
    write_table(ctx.out, t, ctx.format);
  }
};

struct EvalCmd {
  std::string input, model_file;
  ModelOptions model;
  double train_frac = 2.0 / 3.0;
  int runs = 1;
  std::uint64_t seed = kDefaultSeed;
  bool per_run = false;

  void attach(CLI::App* app) {
    app->add_option("features", input, "Feature CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--model-file", model_file, "Model JSON whose hyperparameters are retrained on every split")
        ->check(CLI::ExistingFile);
    model.attach(app);
    app->add_option("--train-frac", train_frac, "Training share of each split")->capture_default_str();
    app->add_option("--runs", runs, "Number of random splits")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--seed", seed, "Split seed; run i uses seed + i")->capture_default_str();
    app->add_flag("--per-run", per_run, "Also print each run's confusion counts");
  }
  HyperParams params() const {
    if (model_file.empty()) return model.resolve();
    if (model.model_opt->count() > 0) throw UsageError("--model and --model-file are mutually exclusive");
    return model.apply(load_model(model_file).hyperparams);
  }
  void exec(Context& ctx) const {
    const HyperParams hp = params();
    ConfigLines cfg{{"input", input}};
    if (!model_file.empty()) cfg.emplace_back("model_file", model_file);
    cfg.insert(cfg.end(), {{"train_frac", format_double(train_frac)},
                           {"runs", std::to_string(runs)},
                           {"seed", std::to_string(seed)}});
    append(cfg, model_config(hp));
    write_config_header(ctx.out, "eval", cfg);
    const Dataset ds = load_feature_csv(input);
    const RepeatedMetrics m = repeated_eval(ds, make_trainer(hp), runs, seed, train_frac);
    write_table(ctx.out, result_table({result_row(ds.meta.scenario, ds, m)}, ctx.format), ctx.format);
    if (per_run) {
      ctx.out << '\n';
      write_table(ctx.out, run_table(m, ctx.format), ctx.format);
    }
  }
};

struct SweepCmd {
  std::string input;
  ModelOptions model;
  std::vector<std::string> grid;
  double train_frac = 2.0 / 3.0;
  int runs = 1;
  std::uint64_t seed = kDefaultSeed;

  void attach(CLI::App* app) {
    app->add_option("features", input, "Feature CSV")->required()->check(CLI::ExistingFile);
    model.attach(app, true);
    app->add_option("--grid", grid, "Axis as key=v1,v2,... (repeatable)")->required()->allow_extra_args(false);
    app->add_option("--train-frac", train_frac, "Training share of each split")->capture_default_str();
    app->add_option("--runs", runs, "Random splits per grid point")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--seed", seed, "Split seed; run i uses seed + i")->capture_default_str();
  }
  void exec(Context& ctx) const {
    const HyperParams base = model.resolve();
    const auto allowed = param_keys(base.family);
    std::vector<GridAxis> axes;
    for (const auto& spec : grid) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--grid: expected key=v1,v2,... but got '" + spec + "'");
      GridAxis axis{spec.substr(0, eq), split_list(spec.substr(eq + 1))};
      if (std::find(allowed.begin(), allowed.end(), axis.key) == allowed.end())
        throw UsageError("--grid: '" + axis.key + "' is not a hyperparameter of model " +
                         std::string(to_string(base.family)));
      if (axis.values.empty()) throw UsageError("--grid: no values for '" + axis.key + "'");
      axes.push_back(std::move(axis));
    }
    std::vector<std::pair<HyperParams, std::string>> points;
    try {
      points = expand_grid(base, axes);
    } catch (const Error& e) {
      throw UsageError(std::string("--grid: ") + e.what());
    }
    ConfigLines cfg{{"input", input},
                    {"grid", join(grid, " ")},
                    {"train_frac", format_double(train_frac)},
                    {"runs", std::to_string(runs)},
                    {"seed", std::to_string(seed)}};
    append(cfg, model_config(base));
    write_config_header(ctx.out, "sweep", cfg);
    const Dataset ds = load_feature_csv(input);
    const SweepResult r = hyperparam_sweep(ds, points, runs, seed, train_frac);
    write_table(ctx.out, sweep_table(r, ctx.format), ctx.format);
    if (!r.best) throw Error("every grid point failed");
  }
};

struct CrossScenCmd {
  std::string train_path, test_path;
  ModelOptions model;

  void attach(CLI::App* app) {
    app->add_option("--train", train_path, "Training feature CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--test", test_path, "Test feature CSV")->required()->check(CLI::ExistingFile);
    model.attach(app, true);
  }
  void exec(Context& ctx) const {
    const HyperParams hp = model.resolve();
    ConfigLines cfg{{"train", train_path}, {"test", test_path}};
    append(cfg, model_config(hp));
    write_config_header(ctx.out, "crossscen", cfg);
    const Dataset train_ds = load_feature_csv(train_path);
    const Dataset test_ds = load_feature_csv(test_path);
    if (train_ds.feature_names != test_ds.feature_names)
      throw Error("feature names differ between '" + train_path + "' and '" + test_path + "'");
    const ModelArtifact m = train(train_ds, hp);
    const Metrics fit = prf1(train_ds.labels, predict(m, train_ds.features).labels);
    const Metrics test = prf1(test_ds.labels, predict(m, test_ds.features).labels);
    write_table(ctx.out,
                result_table({result_row(train_ds.meta.scenario + " -> " + test_ds.meta.scenario, test_ds, fit, test)},
                             ctx.format),
                ctx.format);
  }
};

struct BootstrapCmd {
  std::string input;
  ModelOptions model;
  int factor = 10;
  double train_frac = 2.0 / 3.0;
  int runs = 1;
  std::uint64_t seed = kDefaultSeed;

  void attach(CLI::App* app) {
    app->add_option("features", input, "Feature CSV")->required()->check(CLI::ExistingFile);
    model.attach(app);
    app->add_option("--factor", factor, "Training rows drawn per original row")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--train-frac", train_frac, "Training share of each split")->capture_default_str();
    app->add_option("--runs", runs, "Number of random splits")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--seed", seed, "Split seed; run i uses seed + i")->capture_default_str();
  }
  void exec(Context& ctx) const {
    const HyperParams hp = model.resolve();
    ConfigLines cfg{{"input", input},
                    {"factor", std::to_string(factor)},
                    {"train_frac", format_double(train_frac)},
                    {"runs", std::to_string(runs)},
                    {"seed", std::to_string(seed)}};
    append(cfg, model_config(hp));
    write_config_header(ctx.out, "bootstrap-eval", cfg);
    const Dataset ds = load_feature_csv(input);
    const Trainer trainer = make_trainer(hp);
    const RepeatedMetrics base = repeated_eval(ds, trainer, runs, seed, train_frac);
    const RepeatedMetrics boot = bootstrap_eval(ds, trainer, factor, runs, seed, train_frac);
    write_table(ctx.out,
                result_table({result_row(ds.meta.scenario, ds, base),
                              result_row(ds.meta.scenario + " x" + std::to_string(factor), ds, boot)},
                             ctx.format),
                ctx.format);
  }
};

struct SelectCmd {
  std::string input, method, features, heatmap, projection;
  ModelOptions model;
  double threshold = 0.1, redundancy = 0.95, train_frac = 2.0 / 3.0;
  int components = 2;
  std::uint64_t seed = kDefaultSeed;

  void attach(CLI::App* app) {
    app->add_option("features", input, "Feature CSV")->required()->check(CLI::ExistingFile);
    app->add_option("--method", method, "Selection analysis")
        ->required()
        ->check(CLI::IsMember({"filter", "backward", "importance", "pca"}));
    app->add_option("--subset", features, "Restrict to these features (names or indices, comma separated)");
    app->add_option("--threshold", threshold, "filter: minimum |r| with the label")->capture_default_str();
    app->add_option("--redundancy", redundancy, "filter: maximum |r| between kept features")->capture_default_str();
    app->add_option("--heatmap", heatmap, "filter: write the correlation matrix as row,col,value CSV");
    app->add_option("--components", components, "pca: number of components")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--projection", projection, "pca: write projected rows as CSV");
    app->add_option("--train-frac", train_frac, "backward: training share of the fixed split")->capture_default_str();
    app->add_option("--seed", seed, "backward: split seed")->capture_default_str();
    model.attach(app);
  }

  void exec(Context& ctx) const {
    ConfigLines cfg{{"input", input}, {"method", method}, {"subset", features.empty() ? "all" : features}};
    HyperParams hp;
    if (method == "filter") {
      cfg.insert(cfg.end(), {{"threshold", format_double(threshold)}, {"redundancy", format_double(redundancy)}});
    } else if (method == "pca") {
      cfg.emplace_back("components", std::to_string(components));
    } else {
      hp = model.resolve();
      if (method == "importance" && hp.family != Family::rf)
        throw UsageError("--method importance needs --model rf");
      if (method == "backward")
        cfg.insert(cfg.end(), {{"train_frac", format_double(train_frac)}, {"seed", std::to_string(seed)}});
      append(cfg, model_config(hp));
    }
    if (method != "backward" && method != "importance" && (model.any_given() || model.model_opt->count()))
      throw UsageError("model options do not apply to --method " + method);

    Dataset ds = load_feature_csv(input);
    if (!features.empty()) ds = select_columns(ds, parse_feature_subset(features, ds.feature_names));
    write_config_header(ctx.out, "select", cfg);

    if (method == "filter") run_filter(ctx, ds);
    else if (method == "backward") run_backward(ctx, ds, hp);
    else if (method == "importance") run_importance(ctx, ds, hp);
    else run_pca(ctx, ds);
  }

  void run_filter(Context& ctx, const Dataset& ds) const {
    const FilterResult r = filter_select(ds, {threshold, redundancy});
    Table t;
    t.columns = {"feature", "r", "stage1", "stage2"};
    for (Eigen::Index j = 0; j < ds.cols(); ++j) {
      const auto& rj = r.label_correlation[static_cast<std::size_t>(j)];
      auto in = [j](const std::vector<Eigen::Index>& v) { return std::find(v.begin(), v.end(), j) != v.end(); };
      t.add({ds.feature_names[static_cast<std::size_t>(j)], rj ? format_rate(*rj, ctx.format) : "constant",
             in(r.selected) ? "yes" : "", in(r.pruned) ? "yes" : ""});
    }
    write_table(ctx.out, t, ctx.format);
    ctx.out << "stage1: " << names_of(r.selected, ds.feature_names) << '\n';
    ctx.out << "stage2: " << names_of(r.pruned, ds.feature_names) << '\n';
    if (!heatmap.empty()) {
      auto f = open_output(heatmap);
      write_tidy_matrix(f, correlation_matrix(ds), ds.feature_names, ds.feature_names);
    }
  }

  void run_backward(Context& ctx, const Dataset& ds, const HyperParams& hp) const {
    const SelectionTrace trace = backward_elimination(ds, make_trainer(hp), seed, train_frac);
    Table t;
    t.columns = {"step", "removed", "n_features", "f1"};
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
      const auto& s = trace.steps[i];
      t.add({std::to_string(i), s.removed ? ds.feature_names[static_cast<std::size_t>(*s.removed)] : "-",
             std::to_string(s.features.size()), format_rate(s.f1, ctx.format)});
    }
    write_table(ctx.out, t, ctx.format);
    ctx.out << "final: " << names_of(trace.steps.back().features, ds.feature_names) << '\n';
  }

  void run_importance(Context& ctx, const Dataset& ds, const HyperParams& hp) const {
    const Vector imp = train(ds, hp).feature_importances();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(imp.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return imp[a] > imp[b]; });
    Table t;
    t.columns = {"rank", "feature", "importance"};
    for (std::size_t i = 0; i < order.size(); ++i)
      t.add({std::to_string(i + 1), ds.feature_names[static_cast<std::size_t>(order[i])],
             ctx.format == ReportFormat::csv ? format_double(imp[order[i]]) : format_rate(imp[order[i]], ctx.format)});
    write_table(ctx.out, t, ctx.format);
  }

  void run_pca(Context& ctx, const Dataset& ds) const {
    if (components > ds.cols())
      throw UsageError("--components " + std::to_string(components) + " exceeds the feature count " +
                       std::to_string(ds.cols()));
    const PcaResult r = pca(ds, components);
    Table t;
    t.columns = {"component", "eigenvalue", "ratio", "cumulative"};
    double cum = 0;
    for (Eigen::Index c = 0; c < r.explained_variance_ratio.size(); ++c) {
      cum += r.explained_variance_ratio[c];
      t.add({"pc" + std::to_string(c + 1), format_double(r.explained_variance[c]),
             format_rate(r.explained_variance_ratio[c], ctx.format), format_rate(cum, ctx.format)});
    }
    write_table(ctx.out, t, ctx.format);
    ctx.out << '\n';
    Table loadings;
    loadings.columns = {"feature"};
    for (Eigen::Index c = 0; c < r.components.cols(); ++c) loadings.columns.push_back("pc" + std::to_string(c + 1));
    for (Eigen::Index j = 0; j < r.components.rows(); ++j) {
      std::vector<std::string> row{ds.feature_names[static_cast<std::size_t>(j)]};
      for (Eigen::Index c = 0; c < r.components.cols(); ++c) row.push_back(format_rate(r.components(j, c), ctx.format));
      loadings.add(std::move(row));
    }
    write_table(ctx.out, loadings, ctx.format);
    if (!projection.empty()) {
      auto f = open_output(projection);
      f << "window_index,src_addr,label";
      for (Eigen::Index c = 0; c < r.projected.cols(); ++c) f << ",pc" << c + 1;
      f << '\n';
      for (Eigen::Index i = 0; i < r.projected.rows(); ++i) {
        const auto& key = ds.keys[static_cast<std::size_t>(i)];
        f << key.window_index << ',' << key.src_addr << ',' << ds.labels[i];
        for (Eigen::Index c = 0; c < r.projected.cols(); ++c) f << ',' << format_double(r.projected(i, c));
        f << '\n';
      }
    }
  }
};

struct SynthCmd {
  std::string config, output;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON generator settings (defaults when omitted)")->check(CLI::ExistingFile);
    seed_opt = app->add_option("--seed", seed, "Override the configured seed");
    app->add_option("-o,--output", output, "Flow CSV to write")->required();
  }
  void exec(Context& ctx) const {
    SynthConfig cfg;
    if (!config.empty()) {
      std::ifstream in(config);
      std::stringstream text;
      text << in.rdbuf();
      cfg = synth_config_from_json(text.str());
    }
    if (seed_opt->count()) cfg.seed = seed;
    cfg.validate();
    ConfigLines lines{{"config", config.empty() ? "defaults" : config}, {"output", output}};
    const auto json = nlohmann::ordered_json::parse(to_json(cfg));
    for (const auto& [k, v] : json.items())
      lines.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
    write_config_header(ctx.out, "synth", lines);
    const FlowTable t = generate_scenario(cfg);
    auto f = open_output(output);
    write_flows(f, t);
    if (!f.flush()) throw Error("failed writing '" + output + "'");
    std::size_t bot = 0;
    for (const auto& r : t.records) bot += r.label.find("Botnet") != std::string::npos;
    ctx.out << "flows: " << t.records.size() << "\nbotnet flows: " << bot << '\n';
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Botnet detection from NetFlow time-window features", "flowbot"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 0;
  std::string format = "text";
  app.add_option("--threads", threads, "Worker threads (0: all cores)")->capture_default_str();
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "csv"}))->capture_default_str();

  SummarizeCmd summarize_cmd;
  ExtractCmd extract_cmd;
  TrainCmd train_cmd;
  EvalCmd eval_cmd;
  SweepCmd sweep_cmd;
  CrossScenCmd cross_cmd;
  BootstrapCmd boot_cmd;
  SelectCmd select_cmd;
  SynthCmd synth_cmd;

  std::function<void(Context&)> action;
  auto add = [&](auto& cmd, const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    cmd.attach(sub);
    auto* target = &cmd;
    sub->callback([&action, target] { action = [target](Context& c) { target->exec(c); }; });
  };
  add(summarize_cmd, "summarize", "Per-column statistics of a flow file");
  add(extract_cmd, "extract", "Aggregate flows into per-source time-window features");
  add(train_cmd, "train", "Train a model on a feature file");
  add(eval_cmd, "eval", "Repeated random-split evaluation");
  add(sweep_cmd, "sweep", "Hyperparameter grid evaluation");
  add(cross_cmd, "crossscen", "Train on one scenario, test on another");
  add(boot_cmd, "bootstrap-eval", "Evaluation with bootstrap-augmented training sets");
  add(select_cmd, "select", "Feature selection analyses");
  add(synth_cmd, "synth", "Generate a synthetic labeled flow file");

  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--threads" || args[i] == "--format") {
      ++i;
      continue;
    }
    if (args[i].starts_with("-")) continue;
    if (!app.get_subcommand_no_throw(args[i])) {
      err << "flowbot: unknown command '" << args[i] << "'\nRun 'flowbot --help' for usage.\n";
      return 2;
    }
    break;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e, out, err);
      return 0;
    }
    err << "flowbot: " << e.what() << "\nRun 'flowbot --help' for usage.\n";
    return 2;
  }

  set_thread_count(threads);
  err << "flowbot: using " << thread_count() << " thread(s)\n";
  Context ctx{out, err, parse_report_format(format)};
  set_warning_sink([&err](const std::string& m) { err << "warning: " << m << '\n'; });
  int code = 0;
  try {
    action(ctx);
  } catch (const UsageError& e) {
    err << "flowbot: " << e.what() << "\nRun 'flowbot --help' for usage.\n";
    code = 2;
  } catch (const std::exception& e) {
    err << "flowbot: error: " << e.what() << '\n';
    code = 1;
  }
  set_warning_sink({});
  out.flush();
  return code;
}

}  // namespace flowbot
