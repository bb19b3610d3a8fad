#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lidarwx/error.hpp"
#include "lidarwx/io.hpp"
#include "lidarwx/metrics.hpp"
#include "lidarwx/stack_io.hpp"

namespace lidarwx {

inline constexpr std::string_view kStackExtension = ".lwxs";

struct EvalConfig {
  bool paired = true;
  std::size_t pdf_bins = kDefaultPdfBins;
  std::size_t error_bins = kDefaultErrorBins;
  std::string gen_channel = "intensity";
  std::string ref_channel = "intensity";
};

struct FrameMetrics {
  std::string name;
  std::size_t n_valid = 0;
  double mse = 0.0;
  double ssim = 0.0;
  double kl = 0.0;
  double wasserstein = 0.0;
};

/// Aggregate over all frames. Distribution metrics (PDF, KL, Wasserstein)
/// pool every valid value; in paired mode MSE pools valid pixels and SSIM
/// is reported as mean and std over frames.
struct MetricReport {
  bool paired = true;
  std::size_t n_frames = 0;
  std::size_t n_gen_values = 0;
  std::size_t n_ref_values = 0;
  std::optional<double> mse;
  std::optional<double> ssim_mean;
  std::optional<double> ssim_std;
  double kl = 0.0;
  double wasserstein = 0.0;
  IntensityHistogram pdf_gen{kDefaultPdfBins};
  IntensityHistogram pdf_ref{kDefaultPdfBins};
  std::optional<ErrorHistogram> error_hist;
  std::vector<FrameMetrics> frames;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["mode"] = paired ? "paired" : "unpaired";
    j["n_frames"] = n_frames;
    j["n_gen_values"] = n_gen_values;
    j["n_ref_values"] = n_ref_values;
    j["kl"] = kl;
    j["wasserstein"] = wasserstein;
    if (mse) j["mse"] = *mse;
    if (ssim_mean) {
      j["ssim_mean"] = *ssim_mean;
      j["ssim_std"] = *ssim_std;
    }
    j["pdf_bins"] = pdf_gen.n_bins();
    auto& fr = j["frames"] = nlohmann::json::array();
    for (const auto& f : frames) {
      nlohmann::json e{{"name", f.name}, {"n_valid", f.n_valid}, {"kl", f.kl}, {"wasserstein", f.wasserstein}};
      if (paired) {
        e["mse"] = f.mse;
        e["ssim"] = f.ssim;
      }
      fr.push_back(std::move(e));
    }
    return j;
  }

  std::string to_text() const {
    std::ostringstream os;
    os << std::left << std::setprecision(6);
    auto row = [&](const std::string& k, const std::string& v) { os << std::setw(16) << k << v << '\n'; };
    auto num = [](double v) {
      std::ostringstream s;
      s << std::setprecision(6) << v;
      return s.str();
    };
    row("mode", paired ? "paired" : "unpaired");
    row("frames", std::to_string(n_frames));
    row("gen values", std::to_string(n_gen_values));
    row("ref values", std::to_string(n_ref_values));
    if (mse) row("mse", num(*mse));
    if (ssim_mean) row("ssim", num(*ssim_mean) + " +/- " + num(*ssim_std));
    row("kl", num(kl));
    row("wasserstein", num(wasserstein));
    return os.str();
  }
};

/// "bin_center,prob" rows.
inline void write_histogram_csv(std::ostream& os, const IntensityHistogram& h) {
  os << "bin_center,prob\n" << std::setprecision(17);
  const auto p = h.probs();
  for (std::size_t i = 0; i < p.size(); ++i) os << h.bin_center(i) << ',' << p[i] << '\n';
}

inline void write_histogram_csv(std::ostream& os, const ErrorHistogram& h) {
  os << "bin_center,prob\n" << std::setprecision(17);
  const auto p = h.probs();
  for (std::size_t i = 0; i < p.size(); ++i) os << h.bin_center(i) << ',' << p[i] << '\n';
}

namespace detail {

struct FrameValues {
  Grid<float> image;
  Grid<std::uint8_t> mask;
  bool has_mask = false;
  bool is_image = false;
  std::vector<double> values;  ///< valid intensities
};

inline FrameValues load_frame(const std::filesystem::path& path, const std::string& channel) {
  FrameValues f;
  if (path.extension() == kStackExtension) {
    std::vector<StackChannelInfo> info;
    const auto s = read_stack(path, &info);
    f.has_mask = std::any_of(info.begin(), info.end(), [](const auto& c) { return c.name == "mask"; });
    f.image = stack_channel(s, channel);
    f.mask = f.has_mask ? s.mask : Grid<std::uint8_t>(s.cfg.height, s.cfg.width, 1);
    f.is_image = true;
    for (std::size_t i = 0; i < f.image.size(); ++i) {
      if (f.mask[i]) f.values.push_back(f.image[i]);
    }
  } else {
    const auto pc = read_pointcloud(path, CloudFormat::kitti_bin);
    for (const auto& p : pc.points) f.values.push_back(p.intensity);
  }
  return f;
}

inline std::map<std::string, std::filesystem::path> list_frames(const std::filesystem::path& dir, bool stacks_only) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::map<std::string, std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension();
    if (ext == kStackExtension || (!stacks_only && ext == ".bin")) out[e.path().filename().string()] = e.path();
  }
  return out;
}

}  // namespace detail

/// Compares generated frames against reference frames.
///
/// Paired mode matches `.lwxs` stacks by file name and computes MSE, SSIM
/// and the error histogram on pixels valid in the reference mask (and in
/// the generated mask when the file carries one). Unpaired mode pools the
/// valid intensities of every frame (stacks or kitti `.bin` clouds) and
/// computes the distribution metrics only.
inline MetricReport evaluate_frames(const std::filesystem::path& gen_dir, const std::filesystem::path& ref_dir,
                                    const EvalConfig& cfg = {}) {
  MetricReport rep;
  rep.paired = cfg.paired;
  rep.pdf_gen = IntensityHistogram(cfg.pdf_bins);
  rep.pdf_ref = IntensityHistogram(cfg.pdf_bins);
  const auto gen = detail::list_frames(gen_dir, cfg.paired);
  const auto ref = detail::list_frames(ref_dir, cfg.paired);
  if (gen.empty() || ref.empty()) throw ContractError("evaluate: no frames found");

  std::vector<double> pooled_gen, pooled_ref;
  if (cfg.paired) {
    if (gen.size() != ref.size() ||
        !std::equal(gen.begin(), gen.end(), ref.begin(), [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw ContractError("evaluate: paired mode needs identical frame lists in both directories");
    }
    ErrorHistogram err(cfg.error_bins);
    double sq_sum = 0.0;
    std::size_t sq_n = 0;
    std::vector<double> ssims;
    for (const auto& [name, gpath] : gen) {
      auto g = detail::load_frame(gpath, cfg.gen_channel);
      auto r = detail::load_frame(ref.at(name), cfg.ref_channel);
      require_same_shape(g.image, r.image, ("evaluate: frame " + name).c_str());
      Grid<std::uint8_t> valid = r.mask;
      for (std::size_t i = 0; i < valid.size(); ++i) valid[i] = valid[i] && g.mask[i];
      std::vector<double> gv, rv;
      for (std::size_t i = 0; i < valid.size(); ++i) {
        if (!valid[i]) continue;
        gv.push_back(g.image[i]);
        rv.push_back(r.image[i]);
      }
      if (gv.empty()) throw ContractError("evaluate: frame " + name + " has no valid pixels");
      FrameMetrics fm;
      fm.name = name;
      fm.n_valid = gv.size();
      fm.mse = mse(gv, rv);
      fm.ssim = ssim_masked(g.image, r.image, valid);
      auto hg = IntensityHistogram::from_samples<double>(gv, cfg.pdf_bins);
      auto hr = IntensityHistogram::from_samples<double>(rv, cfg.pdf_bins);
      fm.kl = kl_divergence(hg, hr);
      fm.wasserstein = wasserstein_1d(gv, rv);
      rep.pdf_gen.merge(hg);
      rep.pdf_ref.merge(hr);
      err.merge(error_histogram<double>(gv, rv, cfg.error_bins));
      sq_sum += fm.mse * static_cast<double>(gv.size());
      sq_n += gv.size();
      ssims.push_back(fm.ssim);
      pooled_gen.insert(pooled_gen.end(), gv.begin(), gv.end());
      pooled_ref.insert(pooled_ref.end(), rv.begin(), rv.end());
      rep.frames.push_back(std::move(fm));
    }
    rep.mse = sq_sum / static_cast<double>(sq_n);
    double mean = 0.0;
    for (double s : ssims) mean += s;
    mean /= static_cast<double>(ssims.size());
    double var = 0.0;
    for (double s : ssims) var += (s - mean) * (s - mean);
    rep.ssim_mean = mean;
    rep.ssim_std = std::sqrt(var / static_cast<double>(ssims.size()));
    rep.error_hist = std::move(err);
    rep.n_frames = gen.size();
  } else {
    for (const auto& [name, path] : gen) {
      auto f = detail::load_frame(path, cfg.gen_channel);
      rep.pdf_gen.add<double>(f.values);
      pooled_gen.insert(pooled_gen.end(), f.values.begin(), f.values.end());
    }
    for (const auto& [name, path] : ref) {
      auto f = detail::load_frame(path, cfg.ref_channel);
      rep.pdf_ref.add<double>(f.values);
      pooled_ref.insert(pooled_ref.end(), f.values.begin(), f.values.end());
    }
    rep.n_frames = gen.size() + ref.size();
  }
  if (pooled_gen.empty() || pooled_ref.empty()) throw ContractError("evaluate: no valid intensities");
  rep.n_gen_values = pooled_gen.size();
  rep.n_ref_values = pooled_ref.size();
  rep.kl = kl_divergence(rep.pdf_gen, rep.pdf_ref);
  rep.wasserstein = wasserstein_1d(pooled_gen, pooled_ref);
  return rep;
}

/// Writes report.json, report.txt, pdf_gen.csv, pdf_ref.csv and, in
/// paired mode, error_hist.csv into `out_dir`.
inline void write_report_files(const MetricReport& rep, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto open = [&](const char* name) {
    std::ofstream f(out_dir / name);
    if (!f) throw IoError("cannot write " + (out_dir / name).string());
    return f;
  };
  open("report.json") << rep.to_json().dump(2) << '\n';
  open("report.txt") << rep.to_text();
  {
    auto f = open("pdf_gen.csv");
    write_histogram_csv(f, rep.pdf_gen);
  }
  {
    auto f = open("pdf_ref.csv");
    write_histogram_csv(f, rep.pdf_ref);
  }
  if (rep.error_hist) {
    auto f = open("error_hist.csv");
    write_histogram_csv(f, *rep.error_hist);
  }
}

}  // namespace lidarwx
