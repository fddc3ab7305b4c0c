// semreg: command-line front end for the semantic registration pipeline.
//
// Exit codes: 0 success, 1 usage or config error, 2 data error.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "semreg/semreg.hpp"

namespace fs = std::filesystem;
using namespace semreg;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config_path;
  bool baseline = false;
  std::string label_map;
  std::string alphabet;
};

struct PairOptions {
  std::string src, dst, gt;
  std::size_t keypoints = 1000;
  std::uint64_t seed = 0;
};

PipelineConfig load_config(const CommonOptions& o) {
  PipelineConfig c = o.config_path.empty() ? PipelineConfig::outdoor() : read_config(o.config_path);
  if (o.baseline) c.match = baseline_config(c.match);
  return c;
}

// PLY with sidecar alphabet, or a SemanticKITTI .bin with its .label file.
LabeledPointCloud load_cloud(const std::string& path, const CommonOptions& o) {
  const fs::path p(path);
  if (p.extension() == ".bin") {
    if (o.label_map.empty()) throw UsageError("--label-map is required for SemanticKITTI scans");
    fs::path labels = p;
    labels.replace_extension(".label");
    return read_semantickitti_pair(p, labels, read_label_map(o.label_map));
  }
  std::optional<fs::path> alphabet;
  if (!o.alphabet.empty()) alphabet = fs::path(o.alphabet);
  return read_labeled_cloud(p, alphabet);
}

KeypointSet sample_keypoints(const LabeledPointCloud& cloud, std::size_t count, std::uint64_t seed) {
  return keypoint_sample(cloud, std::min(count, cloud.size()), seed);
}

std::size_t thread_count(std::size_t jobs) {
  std::size_t n = 0;
  if (const char* env = std::getenv("SEMREG_THREADS")) {
    const auto v = detail::parse_number<std::size_t>(env);
    if (!v) throw UsageError("SEMREG_THREADS must be a non-negative integer");
    n = *v;
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, jobs));
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  detail::write_file(path, text);
}

struct LoadedPair {
  LabeledPointCloud src, dst;
  std::optional<RigidTransform> gt;
  KeypointSet skp, dkp;
};

LoadedPair load_pair(const PairOptions& p, const CommonOptions& o) {
  if (p.keypoints == 0) throw UsageError("--keypoints must be >= 1");
  LoadedPair lp;
  lp.src = load_cloud(p.src, o);
  lp.dst = load_cloud(p.dst, o);
  if (!p.gt.empty()) lp.gt = read_transform(p.gt);
  lp.skp = sample_keypoints(lp.src, p.keypoints, p.seed);
  lp.dkp = sample_keypoints(lp.dst, p.keypoints, p.seed + 1);
  return lp;
}

void add_pair_options(CLI::App* cmd, PairOptions& p, bool gt_required) {
  cmd->add_option("--src", p.src, "source cloud (.ply or SemanticKITTI .bin)")->required();
  cmd->add_option("--dst", p.dst, "target cloud")->required();
  auto* gt = cmd->add_option("--gt", p.gt, "ground-truth transform file (maps dst onto src)");
  if (gt_required) gt->required();
  cmd->add_option("--keypoints", p.keypoints, "keypoints sampled per cloud")->capture_default_str();
  cmd->add_option("--seed", p.seed, "keypoint sampling seed")->capture_default_str();
}

int run_match(const PairOptions& p, const CommonOptions& o, const std::string& out) {
  const PipelineConfig cfg = load_config(o);
  const LoadedPair lp = load_pair(p, o);
  const auto corr = ml_semreg_pipeline(lp.src, lp.dst, lp.skp, lp.dkp, cfg.match);
  if (!out.empty()) write_text(out, correspondences_csv(corr));
  std::printf("correspondences %zu\n", corr.size());
  if (lp.gt) {
    const auto m = correspondence_metrics(corr, lp.src, lp.skp, lp.dst, lp.dkp, *lp.gt, cfg.eval.tau_e);
    std::printf("IN %zu\nIR %.9g\n", m.inlier_count, m.inlier_ratio);
  }
  return 0;
}

int run_register(const PairOptions& p, const CommonOptions& o, const std::string& out) {
  const PipelineConfig cfg = load_config(o);
  const LoadedPair lp = load_pair(p, o);
  const auto corr = ml_semreg_pipeline(lp.src, lp.dst, lp.skp, lp.dkp, cfg.match);
  const auto reg = ransac_register(lp.src, lp.skp, lp.dst, lp.dkp, corr, cfg.ransac);
  const std::string pose = serialize_poses({reg.transform});
  if (!out.empty()) write_text(out, pose);
  std::printf("correspondences %zu\ninliers %zu\niterations %zu\ntransform %s", corr.size(),
              reg.inlier_indices.size(), reg.iterations_used, pose.c_str());
  if (lp.gt) {
    const auto e = registration_errors(reg.transform, *lp.gt);
    std::printf("RE %.9g\nTE %.9g\nregistered %d\n", e.rotation_deg, e.translation,
                is_registered(e, cfg.eval) ? 1 : 0);
  }
  return 0;
}

struct BenchPair {
  std::string id;
  fs::path dir;
};

// Subdirectories holding a.ply, b.ply and gt.txt, sorted by name.
std::vector<BenchPair> find_bench_pairs(const fs::path& root) {
  if (!fs::is_directory(root)) throw ParseError("pair directory: '" + root.string() + "' is not a directory", 0);
  std::vector<BenchPair> out;
  for (const auto& e : fs::directory_iterator(root)) {
    if (!e.is_directory()) continue;
    const auto d = e.path();
    if (fs::exists(d / "a.ply") && fs::exists(d / "b.ply") && fs::exists(d / "gt.txt"))
      out.push_back({d.filename().string(), d});
  }
  std::sort(out.begin(), out.end(), [](const BenchPair& a, const BenchPair& b) { return a.id < b.id; });
  if (out.empty()) throw ParseError("no pair directories (a.ply, b.ply, gt.txt) under '" + root.string() + "'", 0);
  return out;
}

int run_bench(const std::string& dir, std::size_t keypoints, std::uint64_t seed, const CommonOptions& o,
              const std::string& csv, const std::string& json) {
  if (keypoints == 0) throw UsageError("--keypoints must be >= 1");
  const PipelineConfig cfg = load_config(o);
  const auto pairs = find_bench_pairs(dir);
  const std::string matcher = to_string(cfg.match.matcher) + (o.baseline ? "" : "+ml-semreg");

  std::vector<PairMetrics> rows(pairs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pairs.size()) return;
      try {
        PairOptions p{(pairs[i].dir / "a.ply").string(), (pairs[i].dir / "b.ply").string(),
                      (pairs[i].dir / "gt.txt").string(), keypoints, seed};
        const auto t0 = std::chrono::steady_clock::now();
        const LoadedPair lp = load_pair(p, o);
        const auto corr = ml_semreg_pipeline(lp.src, lp.dst, lp.skp, lp.dkp, cfg.match);
        const auto m = correspondence_metrics(corr, lp.src, lp.skp, lp.dst, lp.dkp, *lp.gt, cfg.eval.tau_e);
        PairMetrics& r = rows[i];
        r.pair_id = pairs[i].id;
        r.matcher = matcher;
        r.inlier_count = m.inlier_count;
        r.inlier_ratio = m.inlier_ratio;
        if (corr.size() >= cfg.ransac.sample_size) {
          const auto reg = ransac_register(lp.src, lp.skp, lp.dst, lp.dkp, corr, cfg.ransac);
          const auto e = registration_errors(reg.transform, *lp.gt);
          r.rotation_error = e.rotation_deg;
          r.translation_error = e.translation;
          r.registered = is_registered(e, cfg.eval);
        } else {
          const auto e = registration_errors(RigidTransform::identity(), *lp.gt);
          r.rotation_error = e.rotation_deg;
          r.translation_error = e.translation;
        }
        r.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = pairs.size();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = thread_count(pairs.size());
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  const BenchmarkReport report = summarize(std::move(rows));
  if (!csv.empty()) write_text(csv, report_csv(report));
  if (!json.empty()) write_text(json, report_json(report).dump(2) + "\n");
  std::printf("pairs %zu\nmean IN %.9g\nmean IR %.9g\nRR %.9g\nmean RE %.9g\nmean TE %.9g\n", report.pairs.size(),
              report.mean_in, report.mean_ir, report.recall, report.mean_re, report.mean_te);
  return 0;
}

int run_synth(SceneSpec spec, const std::string& out, bool ascii) {
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const ScenePair pair = generate_scene_pair(spec);
  fs::create_directories(out);
  const auto enc = ascii ? PlyEncoding::kAscii : PlyEncoding::kBinaryLittleEndian;
  write_labeled_cloud(fs::path(out) / "a.ply", pair.src, enc);
  write_labeled_cloud(fs::path(out) / "b.ply", pair.dst, enc);
  write_poses(fs::path(out) / "gt.txt", {pair.gt});
  std::printf("src %zu points\ndst %zu points\n", pair.src.size(), pair.dst.size());
  return 0;
}

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : detail::split_list(s)) {
    const auto v = detail::parse_number<double>(item);
    if (!v) throw UsageError("--values: bad number '" + item + "'");
    out.push_back(*v);
  }
  if (out.empty()) throw UsageError("--values: empty list");
  return out;
}

int run_sweep(const PairOptions& p, const std::string& dir, const std::string& param, const std::string& values_text,
              const CommonOptions& o, const std::string& out) {
  const PipelineConfig cfg = load_config(o);
  const auto values = parse_values(values_text);
  std::vector<LoadedPair> loaded;
  if (!dir.empty()) {
    for (const auto& bp : find_bench_pairs(dir)) {
      PairOptions q{(bp.dir / "a.ply").string(), (bp.dir / "b.ply").string(), (bp.dir / "gt.txt").string(),
                    p.keypoints, p.seed};
      loaded.push_back(load_pair(q, o));
    }
  } else {
    if (p.src.empty() || p.dst.empty() || p.gt.empty()) throw UsageError("sweep needs --dir or --src, --dst and --gt");
    loaded.push_back(load_pair(p, o));
  }
  std::vector<EvalPair> pairs;
  for (const auto& lp : loaded) pairs.push_back({&lp.src, &lp.dst, lp.skp, lp.dkp, *lp.gt});

  std::vector<SweepRow> rows;
  if (param == "r_local") {
    rows = sweep_r_local(pairs, values, cfg.match, cfg.eval.tau_e);
  } else if (param == "K") {
    for (double v : values)
      if (!(v >= 1.0) || v != std::floor(v)) throw UsageError("K values must be positive integers");
    rows = sweep_parameter(pairs, values, cfg.match, cfg.eval.tau_e,
                           [](MatchConfig& c, double v) { c.k = static_cast<std::size_t>(v); }, false);
  } else if (param == "N") {
    for (double v : values)
      if (!(v >= 1.0) || v != std::floor(v)) throw UsageError("N values must be positive integers");
    rows = sweep_parameter(pairs, values, cfg.match, cfg.eval.tau_e,
                           [](MatchConfig& c, double v) { c.bmr.rings = static_cast<int>(v); }, true);
  } else if (param == "L") {
    for (double v : values)
      if (!(v > 0.0)) throw UsageError("L values must be > 0");
    rows = sweep_parameter(pairs, values, cfg.match, cfg.eval.tau_e,
                           [](MatchConfig& c, double v) { c.bmr.width = v; }, true);
  } else {
    throw UsageError("--param must be r_local, K, N or L");
  }
  write_text(out, sweep_csv(param, rows));
  return 0;
}

int run_saliency(const std::string& cloud_path, const CommonOptions& o, const std::string& out) {
  const PipelineConfig cfg = load_config(o);
  const LabeledPointCloud cloud = load_cloud(cloud_path, o);
  if (cloud.empty()) throw ParseError("saliency: cloud has no points", 0);
  std::vector<LabelId> categories;
  for (LabelId t = 0; t < cloud.alphabet.size(); ++t)
    if (cloud.alphabet.name(t) != "unlabeled") categories.push_back(t);
  const LandmarkSet landmarks = cluster_landmarks(cloud, cluster_params_for(cfg.match, cloud.alphabet), categories);
  write_text(out, saliency_csv(compute_saliency(cloud, landmarks, cfg.match.bmr), cloud.alphabet));
  return 0;
}

int run_blur(const std::string& cloud_path, double radius, double prob, std::uint64_t seed, const CommonOptions& o,
             const std::string& out, bool ascii) {
  if (!(radius >= 0.0)) throw UsageError("--radius must be >= 0");
  if (!(prob >= 0.0 && prob <= 1.0)) throw UsageError("--prob must lie in [0, 1]");
  const LabeledPointCloud cloud = load_cloud(cloud_path, o);
  const LabeledPointCloud blurred = blur_labels(cloud, radius, prob, seed);
  write_labeled_cloud(out, blurred, ascii ? PlyEncoding::kAscii : PlyEncoding::kBinaryLittleEndian);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) changed += cloud.labels[i] != blurred.labels[i];
  std::printf("relabeled %zu of %zu\n", changed, cloud.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic point cloud registration"};
  app.require_subcommand(1);
  CommonOptions common;
  app.add_option("--config", common.config_path, "key=value pipeline config");
  app.add_flag("--baseline", common.baseline, "disable group and mask matching");
  app.add_option("--label-map", common.label_map, "raw-id to category map for SemanticKITTI scans");
  app.add_option("--alphabet", common.alphabet, "category names for PLY clouds (default: <cloud>.labels)");

  PairOptions pair;
  std::string out, csv, json, dir, param, values, cloud;
  bool ascii = false;

  auto* match = app.add_subcommand("match", "correspondences and IN / IR for a scan pair");
  add_pair_options(match, pair, false);
  match->add_option("--out", out, "correspondence CSV");

  auto* reg = app.add_subcommand("register", "estimate the transform mapping dst onto src");
  add_pair_options(reg, pair, false);
  reg->add_option("--out", out, "transform file");

  auto* bench = app.add_subcommand("bench", "benchmark every pair directory under --dir");
  bench->add_option("--dir", dir, "directory of pair subdirectories")->required();
  bench->add_option("--keypoints", pair.keypoints)->capture_default_str();
  bench->add_option("--seed", pair.seed)->capture_default_str();
  bench->add_option("--csv", csv, "CSV report path");
  bench->add_option("--json", json, "JSON report path");

  SceneSpec spec;
  auto* synth = app.add_subcommand("synth", "write a synthetic scan pair");
  synth->add_option("--seed", spec.seed)->capture_default_str();
  synth->add_option("--out", out, "output directory")->required();
  synth->add_option("--extent", spec.extent)->capture_default_str();
  synth->add_option("--repeated", spec.repeated, "identical car and pole units")->capture_default_str();
  synth->add_option("--offset", spec.overlap_offset, "distance between the two scan poses")->capture_default_str();
  synth->add_option("--density", spec.density, "points per square meter")->capture_default_str();
  synth->add_option("--noise", spec.noise, "gaussian sigma, meters")->capture_default_str();
  synth->add_option("--dropout", spec.dropout)->capture_default_str();
  synth->add_option("--label-noise", spec.instance_label_noise, "chance of mislabeling an object")
      ->capture_default_str();
  synth->add_flag("--ascii", ascii, "write ASCII PLY");

  auto* sweep = app.add_subcommand("sweep", "IN / IR over a grid of one parameter");
  sweep->add_option("--src", pair.src);
  sweep->add_option("--dst", pair.dst);
  sweep->add_option("--gt", pair.gt);
  sweep->add_option("--dir", dir, "directory of pair subdirectories");
  sweep->add_option("--keypoints", pair.keypoints)->capture_default_str();
  sweep->add_option("--seed", pair.seed)->capture_default_str();
  sweep->add_option("--param", param, "r_local, K, N or L")->required();
  sweep->add_option("--values", values, "comma-separated grid")->required();
  sweep->add_option("--out", out, "CSV path (default stdout)");

  auto* sal = app.add_subcommand("saliency", "saliency matrix of a cloud as CSV");
  sal->add_option("--cloud", cloud)->required();
  sal->add_option("--out", out, "CSV path (default stdout)");

  double radius = 0.0, prob = 0.5;
  std::uint64_t blur_seed = 0;
  auto* blur = app.add_subcommand("blur", "degrade labels near category boundaries");
  blur->add_option("--cloud", cloud)->required();
  blur->add_option("--radius", radius, "boundary radius, meters")->required();
  blur->add_option("--prob", prob)->capture_default_str();
  blur->add_option("--seed", blur_seed)->capture_default_str();
  blur->add_option("--out", out)->required();
  blur->add_flag("--ascii", ascii, "write ASCII PLY");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*match) return run_match(pair, common, out);
    if (*reg) return run_register(pair, common, out);
    if (*bench) return run_bench(dir, pair.keypoints, pair.seed, common, csv, json);
    if (*synth) return run_synth(spec, out, ascii);
    if (*sweep) return run_sweep(pair, dir, param, values, common, out);
    if (*sal) return run_saliency(cloud, common, out);
    if (*blur) return run_blur(cloud, radius, prob, blur_seed, common, out, ascii);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
