#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "lidarwx/lidarwx.hpp"
#include "lidarwx/png_export.hpp"

namespace lidarwx::cli {

namespace fs = std::filesystem;

/// Exit codes: 0 success, 1 internal error, 2 usage or input error.
enum ExitCode : int { kOk = 0, kInternal = 1, kUsage = 2 };

struct GlobalOptions {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out_dir = ".";
  std::string batch;  ///< glob over input frames, e.g. "clouds/*.bin"
};

struct MaterialOptions {
  std::string materials;  ///< empty: built-in default table
  double default_reflectance = MaterialTable::kDefaultReflectance;

  MaterialTable load() const {
    if (materials.empty()) {
      auto t = default_material_table();
      return MaterialTable(t.entries(), default_reflectance);
    }
    std::vector<std::string> warnings;
    auto t = load_material_table(materials, default_reflectance, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    return t;
  }
};

struct WeatherOptions {
  std::string condition = "rain";
  double rate = kDefaultRainRate;
  std::optional<double> alpha;
  double range_scale = kDefaultRangeUnitScale;
  double threshold = 0.03;

  WeatherParams params(std::uint64_t seed) const {
    WeatherParams w;
    w.condition = parse_condition(condition);
    w.rain_rate = rate;
    w.alpha_override = alpha;
    w.range_unit_scale = range_scale;
    w.noise_threshold = threshold;
    w.seed = seed;
    w.validate();
    return w;
  }
};

struct ScattererOptions {
  std::optional<double> n0;
  std::optional<double> lambda;
  std::optional<double> divergence;
  std::optional<double> particle_reflectivity;
  std::optional<std::size_t> max_particles;
  std::uint32_t noise_label = 0;

  ScattererModel model(Condition c) const {
    auto m = ScattererModel::for_condition(c);
    if (n0) m.fit.n0_coeff = *n0, m.fit.n0_exp = 0.0;
    if (lambda) m.fit.lambda_coeff = *lambda, m.fit.lambda_exp = 0.0;
    if (divergence) m.beam_divergence = *divergence;
    if (particle_reflectivity) m.particle_reflectivity = *particle_reflectivity;
    if (max_particles) m.max_particles = *max_particles;
    m.noise_label = noise_label;
    m.validate();
    return m;
  }
};

struct ProjectionOptions {
  std::size_t width = 2048;
  std::size_t height = 64;
  double fov_up = 3.0;
  double fov_down = -25.0;

  ProjectionConfig config() const {
    ProjectionConfig c{width, height, fov_up, fov_down};
    c.validate();
    return c;
  }
};

struct SynthOptions {
  std::string out;
  std::size_t beams = 64;
  std::size_t columns = 1024;
  std::string format = "labeled_bin";
};

struct ProjectOptions {
  std::string in;
  std::string format = "kitti_bin";
  std::string out;
  std::size_t k = kDefaultNormalNeighbors;
  std::string png;  ///< channel to export as PNG
  std::string modalities_csv;
  MaterialOptions materials;
  ProjectionOptions projection;
};

struct AugmentOptions {
  std::string in;
  std::string format = "kitti_bin";
  std::string out;
  std::string out_format = "labeled_bin";
  std::string report;
  std::size_t k = kDefaultNormalNeighbors;
  MaterialOptions materials;
  WeatherOptions weather;
  ScattererOptions scatter;
};

struct IntensityOptions {
  std::string in;
  std::string out;
  std::string png;
  WeatherOptions weather;
};

struct EvaluateOptions {
  std::string gen;
  std::string ref;
  bool paired = false;
  bool unpaired = false;
  std::size_t bins = kDefaultPdfBins;
  std::size_t error_bins = kDefaultErrorBins;
  std::string gen_channel = "intensity";
  std::string ref_channel = "intensity";
};

struct LossOptions {
  std::string gen;
  std::string target;
  std::string gen_channel = "intensity";
  std::string target_channel = "physics_aw";
  std::string x, x_rec, y, y_rec;
  std::string channel = "intensity";  ///< channel used for cycle inputs
};

// --------------------------------------------------------------------------

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Per-frame seed in batch mode: seed XOR hash(frame file name).
inline std::uint64_t frame_seed(std::uint64_t seed, const fs::path& frame) {
  return seed ^ fnv1a(frame.filename().string());
}

inline bool glob_match(std::string_view pat, std::string_view s) {
  std::size_t p = 0, i = 0, star = std::string_view::npos, mark = 0;
  while (i < s.size()) {
    if (p < pat.size() && (pat[p] == '?' || pat[p] == s[i])) {
      ++p, ++i;
    } else if (p < pat.size() && pat[p] == '*') {
      star = p++;
      mark = i;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      i = ++mark;
    } else {
      return false;
    }
  }
  while (p < pat.size() && pat[p] == '*') ++p;
  return p == pat.size();
}

/// Expands a glob whose wildcards are confined to the file-name part.
inline std::vector<fs::path> expand_glob(const std::string& pattern) {
  const fs::path pat(pattern);
  const fs::path dir = pat.has_parent_path() ? pat.parent_path() : fs::path(".");
  if (!fs::is_directory(dir)) throw IoError("batch directory does not exist: " + dir.string());
  std::vector<fs::path> out;
  const auto name = pat.filename().string();
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && glob_match(name, e.path().filename().string())) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw IoError("batch pattern matched no files: " + pattern);
  return out;
}

/// Runs `job` over frames with up to `threads` workers. Failures are
/// collected and rethrown after every frame has been attempted.
inline void run_frames(const std::vector<fs::path>& frames, unsigned threads,
                       const std::function<void(const fs::path&)>& job) {
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < frames.size(); i = next++) {
      try {
        job(frames[i]);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(frames.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

inline Grid<float> plane_for_png(const RangeImageStack& s, const std::string& channel) {
  if (channel != "mask") return stack_channel(s, channel);
  Grid<float> m(s.mask.height(), s.mask.width());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = s.mask[i] ? 1.0f : 0.0f;
  return m;
}

inline fs::path output_path(const GlobalOptions& g, const std::string& explicit_out, const fs::path& input,
                            const std::string& ext) {
  if (!explicit_out.empty()) return explicit_out;
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / (input.stem().string() + ext);
}

// --------------------------------------------------------------------------

inline void cmd_synth(const GlobalOptions& g, const SynthOptions& o) {
  SceneConfig sc;
  sc.beams = o.beams;
  sc.columns = o.columns;
  const auto scan = synthesize_scan(g.seed, sc);
  const fs::path out = o.out.empty() ? fs::path(g.out_dir) / ("synthetic_" + std::to_string(g.seed) + ".bin") : fs::path(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_pointcloud(scan.cloud, out, parse_cloud_format(o.format));
  std::cout << "{\"points\":" << scan.cloud.size() << ",\"out\":" << nlohmann::json(out.string()) << "}\n";
}

inline void project_one(const GlobalOptions& g, const ProjectOptions& o, const fs::path& in, const std::string& out) {
  ReadReport rr;
  const auto pc = read_pointcloud(in, parse_cloud_format(o.format), &rr);
  if (rr.n_clamped) std::cerr << "warning: " << in << ": clamped " << rr.n_clamped << " intensities\n";
  const auto table = o.materials.load();
  const auto mod = compute_modalities(pc, table, o.k);
  const auto stack = project(pc, mod.incidence, mod.reflectance, o.projection.config());
  const auto dest = output_path(g, out, in, std::string(kStackExtension));
  write_stack(stack, dest);
  if (!o.modalities_csv.empty()) {
    std::ofstream f(o.modalities_csv);
    if (!f) throw IoError("cannot write " + o.modalities_csv);
    write_modalities_csv(f, mod);
  }
  if (!o.png.empty()) {
    auto png = dest;
    png.replace_extension("." + o.png + ".png");
    export_png(plane_for_png(stack, o.png), png, o.png == "mask" ? nullptr : &stack.mask);
  }
}

inline void cmd_project(const GlobalOptions& g, const ProjectOptions& o) {
  if (g.batch.empty()) {
    if (o.in.empty()) throw ContractError("project: --in or --batch is required");
    project_one(g, o, o.in, o.out);
    return;
  }
  run_frames(expand_glob(g.batch), g.threads, [&](const fs::path& f) { project_one(g, o, f, ""); });
}

inline AugmentReport augment_one(const GlobalOptions& g, const AugmentOptions& o, const fs::path& in,
                                 const std::string& out, std::uint64_t seed, unsigned threads) {
  const auto pc = read_pointcloud(in, parse_cloud_format(o.format));
  const auto weather = o.weather.params(seed);
  if (weather.condition == Condition::clear) throw ContractError("augment: --condition clear has no weather to simulate");
  const auto model = o.scatter.model(weather.condition);
  const auto mod = compute_modalities(pc, o.materials.load(), o.k);
  const auto res = augment(pc, mod, weather, model, threads);
  write_pointcloud(res.cloud, output_path(g, out, in, ".bin"), parse_cloud_format(o.out_format));
  return res.report;
}

inline void cmd_augment(const GlobalOptions& g, const AugmentOptions& o) {
  if (parse_condition(o.weather.condition) == Condition::clear) {
    throw ContractError("augment: --condition clear has no weather to simulate");
  }
  if (g.batch.empty()) {
    if (o.in.empty()) throw ContractError("augment: --in or --batch is required");
    const auto rep = augment_one(g, o, o.in, o.out, g.seed, g.threads);
    std::cout << rep.to_json() << '\n';
    if (!o.report.empty()) {
      std::ofstream f(o.report);
      if (!f) throw IoError("cannot write " + o.report);
      f << rep.to_json() << '\n';
    }
    return;
  }
  const auto frames = expand_glob(g.batch);
  std::vector<std::string> lines(frames.size());
  std::mutex mu;
  run_frames(frames, g.threads, [&](const fs::path& f) {
    const auto rep = augment_one(g, o, f, "", frame_seed(g.seed, f), 1);
    const auto idx = static_cast<std::size_t>(std::find(frames.begin(), frames.end(), f) - frames.begin());
    std::lock_guard lock(mu);
    lines[idx] = rep.to_json();
  });
  std::ofstream report;
  if (!o.report.empty()) report.open(o.report);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::cout << lines[i] << '\n';
    if (report) report << lines[i] << '\n';
  }
}

inline void intensity_one(const GlobalOptions& g, const IntensityOptions& o, const fs::path& in,
                          const std::string& out) {
  auto stack = read_stack(in);
  const auto weather = o.weather.params(g.seed);
  std::vector<double> rho(stack.reflectance.data().begin(), stack.reflectance.data().end());
  std::vector<double> theta(stack.incidence.data().begin(), stack.incidence.data().end());
  std::vector<double> range(stack.range.data().begin(), stack.range.data().end());
  const auto target = physics_target_frame(rho, theta, range, weather, stack.mask.span());
  for (const auto& w : target.warnings) std::cerr << "warning: " << in << ": " << w << '\n';
  Grid<float> plane(stack.cfg.height, stack.cfg.width);
  for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = static_cast<float>(target.normalized[i]);
  stack.set_extra("physics_aw", std::move(plane), static_cast<float>(target.max));
  auto dest = output_path(g, out, in, std::string(kStackExtension));
  if (fs::exists(dest) && fs::equivalent(dest, in) && out.empty()) {
    dest.replace_filename(in.stem().string() + ".aw" + std::string(kStackExtension));
  }
  write_stack(stack, dest);
  if (!o.png.empty()) {
    auto png = dest;
    png.replace_extension("." + o.png + ".png");
    export_png(plane_for_png(stack, o.png), png, o.png == "mask" ? nullptr : &stack.mask);
  }
}

inline void cmd_intensity(const GlobalOptions& g, const IntensityOptions& o) {
  if (g.batch.empty()) {
    if (o.in.empty()) throw ContractError("intensity: --in or --batch is required");
    intensity_one(g, o, o.in, o.out);
    return;
  }
  run_frames(expand_glob(g.batch), g.threads, [&](const fs::path& f) { intensity_one(g, o, f, ""); });
}

inline void cmd_evaluate(const GlobalOptions& g, const EvaluateOptions& o) {
  if (o.paired && o.unpaired) throw ContractError("evaluate: choose one of --paired and --unpaired");
  EvalConfig cfg;
  cfg.paired = !o.unpaired;
  cfg.pdf_bins = o.bins;
  cfg.error_bins = o.error_bins;
  cfg.gen_channel = o.gen_channel;
  cfg.ref_channel = o.ref_channel;
  const auto rep = evaluate_frames(o.gen, o.ref, cfg);
  write_report_files(rep, g.out_dir);
  std::cout << rep.to_text();
}

inline void cmd_loss(const GlobalOptions&, const LossOptions& o) {
  nlohmann::json j;
  if (!o.gen.empty() || !o.target.empty()) {
    if (o.gen.empty() || o.target.empty()) throw ContractError("loss: --gen and --target go together");
    std::vector<StackChannelInfo> tinfo;
    const auto gen = read_stack(o.gen);
    const auto tgt = read_stack(o.target, &tinfo);
    const bool has_mask = std::any_of(tinfo.begin(), tinfo.end(), [](const auto& c) { return c.name == "mask"; });
    const auto& gp = stack_channel(gen, o.gen_channel);
    const auto& tp = stack_channel(tgt, o.target_channel);
    const Grid<std::uint8_t> mask = has_mask ? tgt.mask : Grid<std::uint8_t>(tp.height(), tp.width(), 1);
    j["physics_loss"] = physics_loss(gp, tp, mask);
    j["n_valid"] = std::count(mask.data().begin(), mask.data().end(), std::uint8_t{1});
  }
  const bool any_cycle = !o.x.empty() || !o.x_rec.empty() || !o.y.empty() || !o.y_rec.empty();
  if (any_cycle) {
    if (o.x.empty() || o.x_rec.empty() || o.y.empty() || o.y_rec.empty()) {
      throw ContractError("loss: cycle loss needs --x, --x-rec, --y and --y-rec");
    }
    std::vector<StackChannelInfo> xinfo, yinfo;
    const auto x = read_stack(o.x, &xinfo), xr = read_stack(o.x_rec), y = read_stack(o.y, &yinfo),
               yr = read_stack(o.y_rec);
    const auto& xp = stack_channel(x, o.channel);
    const auto& xrp = stack_channel(xr, o.channel);
    const auto& yp = stack_channel(y, o.channel);
    const auto& yrp = stack_channel(yr, o.channel);
    require_same_shape(xp, xrp, "loss");
    require_same_shape(yp, yrp, "loss");
    // reconstructions are compared on the originals' valid pixels
    auto mask_of = [](const RangeImageStack& s, const std::vector<StackChannelInfo>& info) {
      const bool has = std::any_of(info.begin(), info.end(), [](const auto& c) { return c.name == "mask"; });
      return has ? s.mask : Grid<std::uint8_t>(s.mask.height(), s.mask.width(), 1);
    };
    const auto mx = mask_of(x, xinfo), my = mask_of(y, yinfo);
    j["cycle_loss"] = cycle_loss(xp.span(), xrp.span(), yp.span(), yrp.span(), mx.span(), my.span());
  }
  if (j.empty()) throw ContractError("loss: give --gen/--target and/or the four cycle inputs");
  std::cout << j.dump() << '\n';
}

}  // namespace lidarwx::cli
