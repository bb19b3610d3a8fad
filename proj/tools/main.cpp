// lidarwx command-line front end.
//
//   lidarwx [--seed N] [--threads N] [--config run.toml] [--out-dir DIR]
//           [--batch GLOB] <synth|project|augment|intensity|evaluate|loss> ...
//
// Every run writes <out-dir>/<subcommand>.manifest.toml holding the
// effective configuration; `lidarwx --config <manifest>` replays it.

#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using namespace lidarwx;
using namespace lidarwx::cli;

void add_weather(CLI::App* app, WeatherOptions& w) {
  app->add_option("--condition", w.condition, "rain | snow | clear")
      ->check(CLI::IsMember({"rain", "snow", "clear"}))
      ->capture_default_str();
  app->add_option("--rate", w.rate, "precipitation rate, mm/hr")->capture_default_str();
  app->add_option("--alpha", w.alpha, "extinction coefficient override, 1/km");
  app->add_option("--range-scale", w.range_scale, "range units per alpha length unit")->capture_default_str();
  app->add_option("--threshold", w.threshold, "sensor noise threshold on the [0,1] scale")->capture_default_str();
}

void add_materials(CLI::App* app, MaterialOptions& m) {
  app->add_option("--materials", m.materials, "material table CSV (default: built-in table)");
  app->add_option("--default-reflectance", m.default_reflectance, "reflectance for unknown labels")
      ->capture_default_str();
}

void write_manifest(const CLI::App& app, const CLI::App& sub, const GlobalOptions& g) {
  std::filesystem::create_directories(g.out_dir);
  const auto path = std::filesystem::path(g.out_dir) / (sub.get_name() + ".manifest.toml");
  std::ofstream f(path);
  if (!f) throw IoError("cannot write manifest " + path.string());
  f << "# lidarwx " << kVersion << " run manifest; replay with: lidarwx --config " << path.filename().string()
    << "\n";
  for (const CLI::Option* opt : app.get_options()) {
    const auto name = opt->get_single_name();
    if (name == "help" || name == "config" || opt->get_configurable() == false) continue;
    const auto value = opt->count() ? opt->as<std::string>() : opt->get_default_str();
    if (value.empty()) continue;
    f << name << '=' << (opt->get_type_size() == 0 ? value : "\"" + value + "\"") << '\n';
  }
  f << '[' << sub.get_name() << "]\n" << sub.config_to_str(true, false);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adverse-weather LiDAR augmentation and intensity evaluation toolkit"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "TOML configuration (flags override it)");
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "directory for outputs, reports and manifests")->capture_default_str();
  app.add_option("--batch", g.batch, "process every file matching this glob");

  SynthOptions synth;
  auto* s_synth = app.add_subcommand("synth", "ray-cast a procedural street scene")->configurable();
  s_synth->add_option("--out", synth.out, "output cloud");
  s_synth->add_option("--beams", synth.beams)->capture_default_str();
  s_synth->add_option("--columns", synth.columns)->capture_default_str();
  s_synth->add_option("--format", synth.format)->capture_default_str();

  ProjectOptions proj;
  auto* s_proj = app.add_subcommand("project", "compute modalities and write a range-image stack")->configurable();
  s_proj->add_option("--in", proj.in, "input cloud");
  s_proj->add_option("--format", proj.format, "kitti_bin | labeled_bin")->capture_default_str();
  s_proj->add_option("--out", proj.out, "output stack (.lwxs)");
  s_proj->add_option("--k", proj.k, "neighbours for normal estimation")->capture_default_str();
  s_proj->add_option("--width", proj.projection.width)->capture_default_str();
  s_proj->add_option("--height", proj.projection.height)->capture_default_str();
  s_proj->add_option("--fov-up", proj.projection.fov_up, "degrees")->capture_default_str();
  s_proj->add_option("--fov-down", proj.projection.fov_down, "degrees")->capture_default_str();
  s_proj->add_option("--png", proj.png, "also export this channel as PNG");
  s_proj->add_option("--modalities-csv", proj.modalities_csv, "dump index,R,theta,rho");
  add_materials(s_proj, proj.materials);

  AugmentOptions aug;
  auto* s_aug = app.add_subcommand("augment", "simulate rain/snow noise points and drops")->configurable();
  s_aug->add_option("--in", aug.in, "input cloud");
  s_aug->add_option("--format", aug.format)->capture_default_str();
  s_aug->add_option("--out", aug.out, "output cloud");
  s_aug->add_option("--out-format", aug.out_format)->capture_default_str();
  s_aug->add_option("--report", aug.report, "also write the JSON report here");
  s_aug->add_option("--k", aug.k)->capture_default_str();
  add_materials(s_aug, aug.materials);
  add_weather(s_aug, aug.weather);
  s_aug->add_option("--n0", aug.scatter.n0, "drop-size intercept N0, m^-3 mm^-1 (constant)");
  s_aug->add_option("--lambda", aug.scatter.lambda, "drop-size slope Lambda, mm^-1 (constant)");
  s_aug->add_option("--divergence", aug.scatter.divergence, "full beam divergence, rad");
  s_aug->add_option("--particle-reflectivity", aug.scatter.particle_reflectivity);
  s_aug->add_option("--max-particles", aug.scatter.max_particles, "per-beam particle cap");
  s_aug->add_option("--noise-label", aug.scatter.noise_label)->capture_default_str();

  IntensityOptions inten;
  auto* s_int = app.add_subcommand("intensity", "add the physics target channel physics_aw")->configurable();
  s_int->add_option("--in", inten.in, "input stack");
  s_int->add_option("--out", inten.out, "output stack");
  s_int->add_option("--png", inten.png, "also export this channel as PNG");
  add_weather(s_int, inten.weather);

  EvaluateOptions ev;
  auto* s_ev = app.add_subcommand("evaluate", "PDF, error histogram, MSE, SSIM, KL, Wasserstein")->configurable();
  s_ev->add_option("--gen", ev.gen, "directory of generated frames")->required();
  s_ev->add_option("--ref", ev.ref, "directory of reference frames")->required();
  s_ev->add_flag("--paired", ev.paired, "frame-by-frame comparison (default)");
  s_ev->add_flag("--unpaired", ev.unpaired, "pooled distribution metrics only");
  s_ev->add_option("--bins", ev.bins, "PDF bins over [0,1]")->capture_default_str();
  s_ev->add_option("--error-bins", ev.error_bins, "error histogram bins over [-1,1] (odd)")->capture_default_str();
  s_ev->add_option("--gen-channel", ev.gen_channel)->capture_default_str();
  s_ev->add_option("--ref-channel", ev.ref_channel)->capture_default_str();

  LossOptions loss;
  auto* s_loss = app.add_subcommand("loss", "physics and cycle losses between stored stacks")->configurable();
  s_loss->add_option("--gen", loss.gen, "stack holding generated intensities");
  s_loss->add_option("--target", loss.target, "stack holding the physics target");
  s_loss->add_option("--gen-channel", loss.gen_channel)->capture_default_str();
  s_loss->add_option("--target-channel", loss.target_channel)->capture_default_str();
  s_loss->add_option("--x", loss.x);
  s_loss->add_option("--x-rec", loss.x_rec);
  s_loss->add_option("--y", loss.y);
  s_loss->add_option("--y-rec", loss.y_rec);
  s_loss->add_option("--channel", loss.channel, "channel compared by the cycle loss")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  const CLI::App* sub = app.get_subcommands().front();
  try {
    if (sub == s_synth) cmd_synth(g, synth);
    else if (sub == s_proj) cmd_project(g, proj);
    else if (sub == s_aug) cmd_augment(g, aug);
    else if (sub == s_int) cmd_intensity(g, inten);
    else if (sub == s_ev) cmd_evaluate(g, ev);
    else if (sub == s_loss) cmd_loss(g, loss);
    write_manifest(app, *sub, g);
  } catch (const lidarwx::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}
