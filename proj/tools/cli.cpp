#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/program_options.hpp>

#include "cosseg/bench.hpp"
#include "cosseg/clustering.hpp"
#include "cosseg/errors.hpp"
#include "cosseg/metrics.hpp"
#include "cosseg/scene.hpp"
#include "cosseg/scene_io.hpp"
#include "cosseg/trainer.hpp"

namespace cosseg::cli {
namespace {

namespace po = boost::program_options;
namespace fs = std::filesystem;

/// Bad flags, unknown config keys, or parameter values that fail validation.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Options of one subcommand. Keeps a printer per key so the resolved values can be
// written back as a `key = value` config file (the run manifest).
class Options {
 public:
  explicit Options(const std::string& caption) : desc_(caption) {}

  template <typename T>
  Options& add(const char* key, T def, const char* help) {
    desc_.add_options()(key, po::value<T>()->default_value(def), help);
    printers_.emplace_back(key, [](const po::variable_value& v) { return render(v.as<T>()); });
    return *this;
  }

  Options& required(const char* key, const char* help) {
    desc_.add_options()(key, po::value<std::string>()->required(), help);
    printers_.emplace_back(key, [](const po::variable_value& v) { return v.as<std::string>(); });
    return *this;
  }

  [[nodiscard]] const po::options_description& description() const { return desc_; }

  [[nodiscard]] std::string dump(const po::variables_map& vm) const {
    std::ostringstream os;
    for (const auto& [key, print] : printers_) {
      os << key << " = ";
      if (vm.count(key) != 0) os << print(vm[key]);
      os << '\n';
    }
    return os.str();
  }

 private:
  static std::string render(const std::string& s) { return s; }
  static std::string render(double d) { return format_real(d); }
  static std::string render(bool b) { return b ? "true" : "false"; }
  static std::string render(long long v) { return std::to_string(v); }

  po::options_description desc_;
  std::vector<std::pair<std::string, std::function<std::string(const po::variable_value&)>>> printers_;
};

// Typed access to the parsed values of one run.
class Params {
 public:
  explicit Params(const po::variables_map& vm) : vm_(vm) {}

  [[nodiscard]] std::string str(const char* key) const { return vm_[key].as<std::string>(); }
  [[nodiscard]] double real(const char* key) const { return vm_[key].as<double>(); }
  [[nodiscard]] bool flag(const char* key) const { return vm_[key].as<bool>(); }

  [[nodiscard]] long long integer(const char* key) const { return vm_[key].as<long long>(); }

  [[nodiscard]] std::size_t count(const char* key) const {
    const long long v = integer(key);
    if (v < 0) throw UsageError(std::string("--") + key + " must be non-negative");
    return static_cast<std::size_t>(v);
  }

 private:
  const po::variables_map& vm_;
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* key) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !is.eof()) throw UsageError(std::string("--") + key + ": cannot parse list item '" + item + "'");
    out.push_back(v);
  }
  return out;
}

// Runs a validation step; configuration errors become usage errors.
template <typename Fn>
void validated(Fn&& fn) {
  try {
    fn();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

void write_manifest(const fs::path& path, const std::string& command, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write manifest " + path.string());
  out << "# cosseg " << command << " (reproduce with: cosseg " << command << " --config " << path.filename().string()
      << ")\n"
      << body;
}

fs::path manifest_path(const std::string& explicit_path, const fs::path& primary_output) {
  if (!explicit_path.empty()) return explicit_path;
  return fs::path(primary_output.string() + ".manifest");
}

// ---------------------------------------------------------------- gen

Options gen_options() {
  Options o("cosseg gen: write a synthetic scene");
  o.required("out", "output scene file")
      .add<std::string>("manifest", "", "manifest path (default <out>.manifest)")
      .add<long long>("seed", 0, "random seed")
      .add<long long>("n_instances", 8, "number of instances")
      .add<long long>("n_categories", 3, "number of semantic categories")
      .add<long long>("points_min", 256, "minimum points per instance")
      .add<long long>("points_max", 256, "maximum points per instance")
      .add<double>("region_size", 1.0, "edge length of the scene cube (meters)")
      .add<long long>("feature_dim", 8, "instance-signature feature dimension")
      .add<double>("noise_sigma", 0.1, "feature noise standard deviation");
  return o;
}

SyntheticSceneSpec scene_spec(const Params& p) {
  SyntheticSceneSpec spec;
  spec.rng_seed = static_cast<std::uint64_t>(p.integer("seed"));
  spec.n_instances = p.count("n_instances");
  spec.n_categories = static_cast<int>(p.count("n_categories"));
  spec.min_points_per_instance = p.count("points_min");
  spec.max_points_per_instance = p.count("points_max");
  spec.region_size = p.real("region_size");
  spec.feature_dim = p.count("feature_dim");
  spec.noise_sigma = p.real("noise_sigma");
  validated([&] { spec.validate(); });
  return spec;
}

void run_gen(const Params& p, const std::string& manifest, std::ostream& out) {
  const SyntheticSceneSpec spec = scene_spec(p);
  const fs::path path = p.str("out");
  const Scene scene = generate_scene(spec);
  save_scene(path, scene);
  write_manifest(manifest_path(p.str("manifest"), path), "gen", manifest);
  out << "wrote " << scene.cloud.size() << " points, " << spec.n_instances << " instances to " << path.string() << '\n';
}

// ---------------------------------------------------------------- train

Options train_options() {
  Options o("cosseg train: fit the embedding head with the cosine loss");
  o.required("scenes", "comma-separated scene files")
      .required("out", "output checkpoint")
      .add<std::string>("history", "", "loss history CSV (default <out>.history.csv)")
      .add<std::string>("manifest", "", "manifest path (default <out>.manifest)")
      .add<long long>("embedding_dim", 32, "embedding dimension")
      .add<bool>("normalize", false, "explicitly row-normalize head output")
      .add<double>("learning_rate", 1e-3, "Adam learning rate")
      .add<long long>("lr_drop_step", 1500, "step at which the learning rate drops")
      .add<double>("lr_drop_factor", 0.1, "learning rate multiplier after the drop")
      .add<long long>("batch_size", 4, "scenes sampled per step")
      .add<long long>("total_steps", 2000, "optimizer steps")
      .add<long long>("max_points", 2048, "points sampled per scene (0 = all)")
      .add<double>("adam_beta1", 0.9, "Adam beta1")
      .add<double>("adam_beta2", 0.999, "Adam beta2")
      .add<double>("adam_eps", 1e-8, "Adam epsilon")
      .add<double>("delta_v", 0.9, "intra-cluster cosine margin")
      .add<double>("delta_d", 0.4, "inter-centroid cosine margin")
      .add<double>("alpha", 0.5, "weight of l_var")
      .add<double>("beta", 0.5, "weight of l_dist")
      .add<std::string>("class_weights", "", "comma-separated class weights (default inverse frequency)")
      .add<long long>("seed", 0, "random seed (initialization and batch sampling)");
  return o;
}

TrainConfig train_config(const Params& p) {
  TrainConfig cfg;
  cfg.learning_rate = p.real("learning_rate");
  cfg.lr_drop_step = p.count("lr_drop_step");
  cfg.lr_drop_factor = p.real("lr_drop_factor");
  cfg.batch_size = p.count("batch_size");
  cfg.total_steps = p.count("total_steps");
  cfg.max_points = p.count("max_points");
  cfg.adam_beta1 = p.real("adam_beta1");
  cfg.adam_beta2 = p.real("adam_beta2");
  cfg.adam_eps = p.real("adam_eps");
  cfg.loss.delta_v = p.real("delta_v");
  cfg.loss.delta_d = p.real("delta_d");
  cfg.loss.alpha = p.real("alpha");
  cfg.loss.beta = p.real("beta");
  cfg.loss.class_weights = parse_list<double>(p.str("class_weights"), "class_weights");
  cfg.rng_seed = static_cast<std::uint64_t>(p.integer("seed"));
  validated([&] { cfg.validate(); });
  return cfg;
}

void run_train(const Params& p, const std::string& manifest, std::ostream& out) {
  const TrainConfig cfg = train_config(p);
  const auto embedding_dim = static_cast<Index>(p.count("embedding_dim"));
  const auto paths = parse_list<std::string>(p.str("scenes"), "scenes");
  if (paths.empty()) throw UsageError("--scenes needs at least one file");

  std::vector<Scene> scenes;
  for (const auto& path : paths) scenes.push_back(load_scene(path));
  for (const auto& s : scenes) {
    if (s.cloud.feature_dim() != scenes.front().cloud.feature_dim() || s.n_categories != scenes.front().n_categories)
      throw FormatError("training scenes disagree on feature dimension or category count");
  }
  if (!cfg.loss.class_weights.empty() &&
      static_cast<int>(cfg.loss.class_weights.size()) != scenes.front().n_categories)
    throw UsageError("--class_weights needs one weight per category");

  EmbeddingHead head;
  validated([&] {
    head = EmbeddingHead::initialize(scenes.front().cloud.feature_dim() + 3, embedding_dim, scenes.front().n_categories,
                                     p.flag("normalize"), cfg.rng_seed);
  });
  const TrainResult result = train(std::move(head), scenes, cfg);

  const fs::path ckpt = p.str("out");
  save_head(ckpt, result.head);
  const fs::path history = p.str("history").empty() ? fs::path(ckpt.string() + ".history.csv") : fs::path(p.str("history"));
  {
    std::ofstream csv(history);
    if (!csv) throw FormatError("cannot write " + history.string());
    write_history_csv(csv, result.history);
  }
  write_manifest(manifest_path(p.str("manifest"), ckpt), "train", manifest);
  const auto& last = result.history.back();
  out << "trained " << result.history.size() << " steps; final total=" << format_real(last.total)
      << " l_var=" << format_real(last.l_var) << " l_dist=" << format_real(last.l_dist) << '\n';
}

// ---------------------------------------------------------------- segment

Options segment_options() {
  Options o("cosseg segment: predict instance labels with DBSCAN on learned embeddings");
  o.required("head", "checkpoint file")
      .required("scene", "scene file")
      .required("out", "output label file (one 'sem inst' line per point)")
      .add<std::string>("manifest", "", "manifest path (default <out>.manifest)")
      .add<double>("eps", 0.25, "DBSCAN neighborhood radius")
      .add<long long>("min_pts", 8, "DBSCAN core-point threshold (self included)")
      .add<long long>("min_cluster_size", 35, "clusters smaller than this become noise")
      .add<double>("coord_weight", 1.0, "weight of normalized coordinates appended to embeddings")
      .add<bool>("per_category", true, "cluster each predicted category separately");
  return o;
}

DbscanConfig dbscan_config(const Params& p) {
  DbscanConfig cfg;
  cfg.eps = p.real("eps");
  cfg.min_pts = p.count("min_pts");
  cfg.min_cluster_size = p.count("min_cluster_size");
  cfg.coord_weight = p.real("coord_weight");
  validated([&] { cfg.validate(); });
  return cfg;
}

void run_segment(const Params& p, const std::string& manifest, std::ostream& out) {
  const DbscanConfig cfg = dbscan_config(p);
  const EmbeddingHead head = load_head(p.str("head"));
  const Scene scene = load_scene(p.str("scene"));
  const SceneLabels pred = segment(head, scene.cloud, p.flag("per_category"), cfg);
  const fs::path path = p.str("out");
  save_labels(path, pred);
  write_manifest(manifest_path(p.str("manifest"), path), "segment", manifest);
  out << "predicted " << pred.count_instances() << " instances for " << pred.size() << " points\n";
}

// ---------------------------------------------------------------- evaluate

Options evaluate_options() {
  Options o("cosseg evaluate: IoS-based TP/PD/FM/FP report and proposal recall");
  o.required("gt", "ground-truth scene or label file")
      .required("pred", "predicted label file (or scene file)")
      .add<std::string>("out", "", "JSON report path (default: standard output)")
      .add<std::string>("sweep", "", "optional CSV of the t sweep 0.50..0.95")
      .add<std::string>("manifest", "", "manifest path (default <out>.manifest or <pred>.eval.manifest)")
      .add<double>("ios_threshold", 0.75, "containment threshold t (> 0.5)")
      .add<double>("iou_threshold", 0.5, "proposal recall IoU threshold")
      .add<long long>("min_pred_size", 1, "predictions with fewer points are ignored");
  return o;
}

void run_evaluate(const Params& p, const std::string& manifest, std::ostream& out) {
  EvalConfig cfg;
  cfg.ios_threshold = p.real("ios_threshold");
  cfg.iou_threshold = p.real("iou_threshold");
  cfg.min_pred_size = p.count("min_pred_size");
  validated([&] { cfg.validate(); });

  const SceneLabels gt = load_labels(p.str("gt"));
  const SceneLabels pred = load_labels(p.str("pred"));
  if (gt.size() != pred.size())
    throw FormatError("GT has " + std::to_string(gt.size()) + " points, prediction has " + std::to_string(pred.size()));

  const EvalReport report = evaluate(gt, pred, cfg);
  const ProposalRecall recall = proposal_recall(gt, pred, cfg.iou_threshold);

  const std::string out_path = p.str("out");
  if (out_path.empty()) {
    write_report_json(out, report, recall);
  } else {
    std::ofstream f(out_path);
    if (!f) throw FormatError("cannot write " + out_path);
    write_report_json(f, report, recall);
    out << "f_score=" << format_real(report.f_score) << " precision=" << format_real(report.precision)
        << " recall=" << format_real(report.recall) << '\n';
  }
  if (!p.str("sweep").empty()) {
    std::ofstream csv(p.str("sweep"));
    if (!csv) throw FormatError("cannot write " + p.str("sweep"));
    const auto rows = sweep_ios_threshold(gt, pred, cfg.min_pred_size);
    write_sweep_csv(csv, rows);
  }
  const fs::path primary = out_path.empty() ? fs::path(p.str("pred") + ".eval") : fs::path(out_path);
  write_manifest(manifest_path(p.str("manifest"), primary), "evaluate", manifest);
}

// ---------------------------------------------------------------- bench

Options bench_options() {
  Options o("cosseg bench: space/time scaling of pairwise vs centroid losses");
  o.required("out", "output CSV (n_points,method,wall_time_s,peak_bytes,loss)")
      .add<std::string>("manifest", "", "manifest path (default <out>.manifest)")
      .add<std::string>("n_points", "1024,2048,4096,8192,16384", "comma-separated ascending point counts")
      .add<long long>("d_f", 32, "feature dimension of the pairwise loss")
      .add<long long>("d_e", 32, "embedding dimension of the centroid loss")
      .add<long long>("repeats", 5, "timed repeats per configuration (median reported)")
      .add<long long>("n_clusters", 8, "clusters of the centroid loss")
      .add<long long>("capacity_mb", 3072, "cap on the pairwise working buffers")
      .add<double>("min_time", 0.05, "minimum seconds per timing sample")
      .add<long long>("seed", 0, "random seed");
  return o;
}

void run_bench(const Params& p, const std::string& manifest, std::ostream& out) {
  ScalingSweepConfig cfg;
  cfg.n_points = parse_list<std::size_t>(p.str("n_points"), "n_points");
  cfg.feature_dim = static_cast<Index>(p.count("d_f"));
  cfg.embedding_dim = static_cast<Index>(p.count("d_e"));
  cfg.repeats = p.count("repeats");
  cfg.n_clusters = static_cast<int>(p.count("n_clusters"));
  cfg.capacity_bytes = p.count("capacity_mb") << 20;
  cfg.min_time = p.real("min_time");
  cfg.rng_seed = static_cast<std::uint64_t>(p.integer("seed"));
  validated([&] { cfg.validate(); });

  const auto results = run_scaling_sweep(cfg);
  const fs::path path = p.str("out");
  std::ofstream csv(path);
  if (!csv) throw FormatError("cannot write " + path.string());
  write_bench_csv(csv, results);
  write_manifest(manifest_path(p.str("manifest"), path), "bench", manifest);
  write_bench_csv(out, results);
}

// ---------------------------------------------------------------- sweep

Options sweep_options() {
  Options o("cosseg sweep: segmentation quality vs region size and point count");
  o.required("out_dir", "output directory (one subdirectory per configuration)")
      .add<std::string>("manifest", "", "manifest path (default <out_dir>/sweep.manifest)")
      .add<std::string>("n_points", "1024,2048,4096", "comma-separated point counts per scene")
      .add<std::string>("region_sizes", "1,2", "comma-separated region edge lengths (meters)")
      .add<double>("instance_density", 8.0, "instances per square meter of region footprint")
      .add<long long>("n_categories", 3, "semantic categories")
      .add<long long>("feature_dim", 8, "instance-signature feature dimension")
      .add<double>("noise_sigma", 0.1, "feature noise")
      .add<long long>("total_steps", 300, "training steps per configuration")
      .add<long long>("max_points", 2048, "points sampled per training scene")
      .add<double>("eps", 0.25, "DBSCAN radius")
      .add<long long>("min_pts", 8, "DBSCAN core threshold")
      .add<long long>("min_cluster_size", 35, "small-cluster suppression")
      .add<double>("ios_threshold", 0.75, "IoS threshold")
      .add<long long>("seed", 0, "random seed");
  return o;
}

void run_sweep(const Params& p, const std::string& manifest, std::ostream& out) {
  const auto n_points = parse_list<std::size_t>(p.str("n_points"), "n_points");
  const auto regions = parse_list<double>(p.str("region_sizes"), "region_sizes");
  if (n_points.empty() || regions.empty()) throw UsageError("--n_points and --region_sizes must be non-empty");
  const double density = p.real("instance_density");
  if (!(density > 0.0)) throw UsageError("--instance_density must be positive");

  DbscanConfig dcfg;
  dcfg.eps = p.real("eps");
  dcfg.min_pts = p.count("min_pts");
  dcfg.min_cluster_size = p.count("min_cluster_size");
  EvalConfig ecfg;
  ecfg.ios_threshold = p.real("ios_threshold");
  TrainConfig tcfg;
  tcfg.total_steps = p.count("total_steps");
  tcfg.lr_drop_step = tcfg.total_steps * 3 / 4;
  tcfg.max_points = p.count("max_points");
  tcfg.rng_seed = static_cast<std::uint64_t>(p.integer("seed"));
  validated([&] {
    dcfg.validate();
    ecfg.validate();
    tcfg.validate();
  });

  const fs::path dir = p.str("out_dir");
  fs::create_directories(dir);
  std::ofstream csv(dir / "sweep.csv");
  if (!csv) throw FormatError("cannot write " + (dir / "sweep.csv").string());
  csv << "n_points,region_size,n_instances,proposal_recall_mean,proposal_recall_total,precision,recall,f_score\n";

  for (double region : regions) {
    for (std::size_t n : n_points) {
      SyntheticSceneSpec spec;
      spec.region_size = region;
      spec.n_instances = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(density * region * region)));
      spec.n_instances = std::min(spec.n_instances, n);
      spec.min_points_per_instance = spec.max_points_per_instance = std::max<std::size_t>(1, n / spec.n_instances);
      spec.n_categories = static_cast<int>(p.count("n_categories"));
      spec.feature_dim = p.count("feature_dim");
      spec.noise_sigma = p.real("noise_sigma");
      spec.rng_seed = tcfg.rng_seed;
      validated([&] { spec.validate(); });

      std::ostringstream name;
      name << "n" << n << "_r" << format_real(region);
      const fs::path sub = dir / name.str();
      fs::create_directories(sub);

      const Scene scene = generate_scene(spec);
      save_scene(sub / "scene.spc", scene);
      const auto head = EmbeddingHead::initialize(scene.cloud.feature_dim() + 3, 32, spec.n_categories, false,
                                                  tcfg.rng_seed);
      const std::vector<Scene> scenes{scene};
      const TrainResult trained = train(head, scenes, tcfg);
      save_head(sub / "head.txt", trained.head);
      const SceneLabels pred = segment(trained.head, scene.cloud, true, dcfg);
      save_labels(sub / "pred.txt", pred);

      const EvalReport report = evaluate(scene.labels, pred, ecfg);
      const ProposalRecall recall = proposal_recall(scene.labels, pred, ecfg.iou_threshold);
      {
        std::ofstream json(sub / "report.json");
        write_report_json(json, report, recall);
      }
      csv << n << ',' << format_real(region) << ',' << spec.n_instances << ',' << format_real(recall.mean) << ','
          << format_real(recall.total) << ',' << format_real(report.precision) << ',' << format_real(report.recall)
          << ',' << format_real(report.f_score) << '\n';
      out << name.str() << ": f_score=" << format_real(report.f_score) << " proposal_recall=" << format_real(recall.total)
          << '\n';
    }
  }
  const fs::path mpath = p.str("manifest").empty() ? dir / "sweep.manifest" : fs::path(p.str("manifest"));
  write_manifest(mpath, "sweep", manifest);
}

// ---------------------------------------------------------------- dispatch

struct Command {
  const char* name;
  const char* summary;
  std::function<Options()> options;
  std::function<void(const Params&, const std::string&, std::ostream&)> body;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> table{
      {"gen", "generate a synthetic scene", gen_options, run_gen},
      {"train", "train the embedding head", train_options, run_train},
      {"segment", "cluster embeddings into instances", segment_options, run_segment},
      {"evaluate", "score a prediction against ground truth", evaluate_options, run_evaluate},
      {"bench", "pairwise vs centroid loss scaling benchmark", bench_options, run_bench},
      {"sweep", "region-size / point-count study on synthetic scenes", sweep_options, run_sweep},
  };
  return table;
}

void usage(std::ostream& os) {
  os << "usage: cosseg <command> [--key value ...] [--config file] [--print-config]\n\ncommands:\n";
  for (const auto& c : commands()) os << "  " << std::left << std::setw(10) << c.name << c.summary << '\n';
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    usage(args.empty() ? err : out);
    return args.empty() ? kExitUsage : kExitOk;
  }
  const auto& table = commands();
  const auto it = std::find_if(table.begin(), table.end(), [&](const Command& c) { return args[0] == c.name; });
  if (it == table.end()) {
    err << "cosseg: unknown command '" << args[0] << "'\n";
    usage(err);
    return kExitUsage;
  }

  const Options options = it->options();
  po::options_description generic("general");
  generic.add_options()("help,h", "show options")("config", po::value<std::string>(), "key = value config file")(
      "print-config", "print the resolved configuration and exit");
  po::options_description all;
  all.add(generic).add(options.description());

  po::variables_map vm;
  try {
    const std::vector<std::string> rest(args.begin() + 1, args.end());
    po::store(po::command_line_parser(rest).options(all).run(), vm);
    if (vm.count("help") != 0) {
      out << all << '\n';
      return kExitOk;
    }
    if (vm.count("config") != 0) {
      const std::string path = vm["config"].as<std::string>();
      std::ifstream in(path);
      if (!in) throw UsageError("cannot open config file " + path);
      po::store(po::parse_config_file(in, options.description()), vm);
    }
    if (vm.count("print-config") != 0) {
      for (const auto& opt : options.description().options()) {
        const auto& name = opt->long_name();
        if (vm.count(name) == 0) vm.insert({name, po::variable_value(std::string("<required>"), true)});
      }
      out << options.dump(vm);
      return kExitOk;
    }
    po::notify(vm);
  } catch (const po::error& e) {
    err << "cosseg " << it->name << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "cosseg " << it->name << ": " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const Params params(vm);
    it->body(params, options.dump(vm), out);
  } catch (const UsageError& e) {
    err << "cosseg " << it->name << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const boost::bad_any_cast& e) {
    err << "cosseg " << it->name << ": internal option type error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "cosseg " << it->name << ": " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace cosseg::cli
