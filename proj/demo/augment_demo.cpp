// Walks one synthetic scan through the pipeline: modalities, range-image
// projection, physics target, then rain and snow augmentation at a few
// rates. Prints a summary table; pass a directory to also keep the files.
//
//   augment_demo [out_dir] [seed]

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "lidarwx/lidarwx.hpp"

using namespace lidarwx;

int main(int argc, char** argv) {
  const std::filesystem::path out_dir = argc > 1 ? argv[1] : "";
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;

  const auto scan = synthesize_scan(seed);
  const auto& pc = scan.cloud;
  const auto mod = compute_modalities(pc, default_material_table());
  auto stack = project(pc, mod.incidence, mod.reflectance);
  std::printf("scan %s: %zu points, %zu occupied pixels, %zu shadowed\n", pc.frame_id.c_str(), pc.size(),
              stack.valid_count(), stack.shadow.size());

  // physics target on the range image, stored as an extra channel
  std::vector<double> rho(stack.mask.size()), th(stack.mask.size()), r(stack.mask.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    rho[i] = stack.reflectance[i];
    th[i] = stack.incidence[i];
    r[i] = stack.range[i];
  }
  const auto target = physics_target_frame(rho, th, r, WeatherParams{}, stack.mask.span());
  Grid<float> aw(stack.mask.height(), stack.mask.width());
  for (std::size_t i = 0; i < aw.size(); ++i) aw[i] = static_cast<float>(target.normalized[i]);
  stack.set_extra("physics_aw", aw, static_cast<float>(target.max));
  std::printf("physics target at 30 mm/hr: frame max %.4g\n\n", target.max);

  std::printf("%-6s %8s %10s %8s %8s %10s\n", "cond", "rate", "alpha/km", "dropped", "noise", "drop_frac");
  for (auto cond : {Condition::rain, Condition::snow}) {
    for (double rate : {5.0, 15.0, 30.0}) {
      WeatherParams w;
      w.condition = cond;
      w.rain_rate = rate;
      w.seed = seed;
      const auto res = augment(pc, mod, w, ScattererModel::for_condition(cond));
      const auto& rep = res.report;
      std::printf("%-6s %8.1f %10.3f %8zu %8zu %10.4f\n", std::string(to_string(cond)).c_str(), rate, w.alpha(),
                  rep.n_dropped, rep.n_noise_added, rep.drop_fraction);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const auto name = std::string(to_string(cond)) + "_" + std::to_string(static_cast<int>(rate)) + ".bin";
        write_pointcloud(res.cloud, out_dir / name, CloudFormat::labeled_bin);
      }
    }
  }

  // intensity distance between the clear scan and a rainy version of it,
  // both on the frame-normalized scale augment works in
  WeatherParams w;
  w.seed = seed;
  const auto rainy = augment(pc, mod, w, ScattererModel{});
  IntensityHistogram clear_h, rain_h;
  clear_h.add<double>(clear_weather_intensity(mod).values);
  for (const auto& p : rainy.cloud.points) rain_h.add(p.intensity);
  std::printf("\nKL(clear || rain 30) = %.4f\n", kl_divergence(clear_h, rain_h));

  if (!out_dir.empty()) {
    write_pointcloud(pc, out_dir / "clear.bin", CloudFormat::labeled_bin);
    write_stack(stack, out_dir / "clear.lwxs");
    std::printf("wrote clouds and clear.lwxs to %s\n", out_dir.string().c_str());
  }
  return 0;
}
