#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qsm/analysis.hpp"
#include "qsm/config.hpp"
#include "qsm/error.hpp"
#include "qsm/experiment.hpp"
#include "qsm/io.hpp"
#include "qsm/phantom.hpp"
#include "qsm/recon.hpp"

namespace {

using namespace qsm;

enum Exit { kOk = 0, kConfig = 1, kNumeric = 2, kIo = 3 };

Index3 to_index(const std::vector<int>& v) { return {v.at(0), v.at(1), v.at(2)}; }

struct ReconFlags {
  std::string method = "tkd-smooth";
  std::optional<double> hbar, s, K, bigM, eps_c, ramp, floor;
  std::optional<int> m;
  std::string cutoff;

  void attach(CLI::App* app) {
    app->add_option("--method", method,
                    "naive | tkd-classic | tkd-smooth | r-reg | t-enhanced");
    app->add_option("--hbar", hbar, "TKD threshold");
    app->add_option("--s", s, "order of R");
    app->add_option("--m", m, "power of T (even)");
    app->add_option("--K", K, "amplitude of R");
    app->add_option("--M", bigM, "support edge of C, in units of eps_c");
    app->add_option("--eps-c", eps_c, "scale of C");
    app->add_option("--ramp", ramp, "ramp width of h");
    app->add_option("--floor", floor, "clamp for naive division");
    app->add_option("--cutoff", cutoff, "smooth-exp | smoothstep");
  }

  ReconConfig resolve(const GridSpec& grid) const {
    ReconConfig rc = ReconConfig::defaults(grid, parse_method(method));
    if (!cutoff.empty()) rc.cutoff.kind = parse_cutoff_kind(cutoff);
    if (hbar) rc.params.hbar = *hbar;
    if (s) rc.params.s = *s;
    if (m) rc.params.m = *m;
    if (bigM) rc.params.bigM = *bigM;
    if (eps_c) rc.params.eps_c = *eps_c;
    if (ramp) rc.halfline.ramp = *ramp;
    if (floor) rc.naive_floor = *floor;
    rc.params.K = K.value_or(
        default_regularizer_K(rc.params.s, rc.params.eps_c, rc.cutoff));
    try {
      rc.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
    return rc;
  }
};

std::string sibling(const std::string& path, const std::string& suffix) {
  const auto dot = path.rfind(".qsmv");
  if (dot == std::string::npos) return path + suffix;
  return path.substr(0, dot) + suffix + ".qsmv";
}

int run(int argc, char** argv) {
  CLI::App app{"Dipole inversion and streak analysis on 3-D volumes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "qsm 0.1.0");

  // phantom
  auto* phantom = app.add_subcommand("phantom", "rasterize the phantom");
  std::vector<int> ph_n{64};
  std::vector<double> ph_d{1.0};
  std::string ph_file, ph_out;
  int ph_super = 1;
  bool ph_dump = false;
  phantom->add_option("-n,--size", ph_n, "grid size (one or three values)")
      ->expected(1, 3);
  phantom->add_option("--spacing", ph_d, "voxel spacing (one or three values)")
      ->expected(1, 3);
  phantom->add_option("--file", ph_file, "ellipsoid file (default: built-in)");
  phantom->add_option("--supersample", ph_super, "sub-samples per axis");
  phantom->add_flag("--dump-spec", ph_dump, "print the ellipsoid file and exit");
  phantom->add_option("-o,--out", ph_out, "output volume");

  // forward
  auto* forward = app.add_subcommand("forward", "apply the dipole forward model");
  std::string fw_in, fw_out;
  forward->add_option("-i,--in", fw_in, "susceptibility volume")->required();
  forward->add_option("-o,--out", fw_out, "field volume")->required();

  // perturb
  auto* perturb_cmd = app.add_subcommand("perturb", "add spikes and noise");
  std::string pt_in, pt_out;
  std::vector<std::string> pt_spikes;
  double pt_sigma = 0.0;
  std::uint64_t pt_seed = 0;
  perturb_cmd->add_option("-i,--in", pt_in, "field volume")->required();
  perturb_cmd->add_option("-o,--out", pt_out, "perturbed field")->required();
  perturb_cmd->add_option("--spike", pt_spikes, "'i j k amplitude|auto', repeatable");
  perturb_cmd->add_option("--noise", pt_sigma, "Gaussian noise sigma");
  perturb_cmd->add_option("--seed", pt_seed, "noise seed");

  // recon
  auto* recon = app.add_subcommand("recon", "reconstruct susceptibility");
  std::string rc_in, rc_out;
  bool rc_parts = false;
  ReconFlags rflags;
  recon->add_option("-i,--in", rc_in, "field volume")->required();
  recon->add_option("-o,--out", rc_out, "reconstruction")->required();
  recon->add_flag("--parts", rc_parts, "also write chi1/chi2/chi21/chi22");
  rflags.attach(recon);

  // metrics
  auto* metrics = app.add_subcommand("metrics", "measure a reconstruction");
  std::string mt_recon, mt_truth, mt_cone, mt_name = "recon", mt_csv;
  std::vector<int> mt_apex;
  MetricOptions mt_opts;
  metrics->add_option("--recon", mt_recon, "reconstruction")->required();
  metrics->add_option("--truth", mt_truth, "ground truth")->required();
  metrics->add_option("--cone-source", mt_cone, "volume for cone_fraction (default: recon)");
  metrics->add_option("--apex", mt_apex, "cone apex voxel")->expected(3);
  metrics->add_option("--dilation", mt_opts.dilation, "support dilation (voxels)");
  metrics->add_option("--halfwidth", mt_opts.cone_halfwidth, "cone shell halfwidth");
  metrics->add_option("--name", mt_name, "row label");
  metrics->add_option("--csv", mt_csv, "also write CSV here");

  // slice
  auto* slice = app.add_subcommand("slice", "render a PGM slice");
  std::string sl_in, sl_out, sl_plane = "sagittal";
  std::optional<int> sl_coord;
  std::vector<double> sl_window{kChiWindow.low, kChiWindow.high};
  slice->add_option("-i,--in", sl_in, "volume")->required();
  slice->add_option("-o,--out", sl_out, "PGM file")->required();
  slice->add_option("--plane", sl_plane, "sagittal | coronal | axial");
  slice->add_option("--coord", sl_coord, "slice index (default: centre)");
  slice->add_option("--window", sl_window, "low high")->expected(2);

  // run
  auto* run_cmd = app.add_subcommand("run", "full experiment from a config file");
  std::string run_cfg, run_out;
  run_cmd->add_option("config", run_cfg, "experiment file")->required();
  run_cmd->add_option("-o,--out", run_out, "output directory override");

  // selftest
  auto* selftest = app.add_subcommand("selftest", "closed-form vs operator-chain checks");
  int st_n = 32;
  std::vector<std::string> st_checks;
  std::optional<double> st_tol;
  bool st_list = false;
  selftest->add_option("-n,--size", st_n, "cubic grid size");
  selftest->add_option("--check", st_checks, "run only these checks");
  selftest->add_option("--tolerance", st_tol, "override every tolerance");
  selftest->add_flag("--list", st_list, "list check names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (phantom->parsed()) {
    if (ph_dump) {
      const PhantomSpec spec = ph_file.empty() ? shepp_logan_3d() : load_phantom_file(ph_file);
      std::cout << phantom_file_text(spec);
      return kOk;
    }
    if (ph_out.empty()) throw ConfigError("phantom: --out is required");
    auto pick = [](const auto& v, int a) { return v.size() == 1 ? v[0] : v.at(a); };
    GridSpec grid = [&] {
      try {
        return GridSpec(pick(ph_n, 0), pick(ph_n, 1), pick(ph_n, 2), pick(ph_d, 0),
                        pick(ph_d, 1), pick(ph_d, 2));
      } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
      }
    }();
    const PhantomSpec spec = ph_file.empty() ? shepp_logan_3d() : load_phantom_file(ph_file);
    write_volume(ph_out, rasterize_phantom(spec, grid, ph_super));
    return kOk;
  }

  if (forward->parsed()) {
    write_volume(fw_out, forward_model(read_volume(fw_in)));
    return kOk;
  }

  if (perturb_cmd->parsed()) {
    const RealVolume psi = read_volume(pt_in);
    PerturbationSpec spec;
    spec.noise_sigma = pt_sigma;
    spec.seed = pt_seed;
    for (const auto& text : pt_spikes) {
      std::istringstream is(text);
      int i = 0, j = 0, k = 0;
      std::string amp;
      if (!(is >> i >> j >> k >> amp)) {
        throw ConfigError("spike '" + text + "' is not 'i j k amplitude|auto'");
      }
      double a = 0.0;
      if (amp == "auto") {
        a = default_spike_amplitude(psi);
      } else {
        try {
          a = std::stod(amp);
        } catch (const std::exception&) {
          throw ConfigError("spike amplitude '" + amp + "' is not a number");
        }
      }
      if (!psi.grid().contains({i, j, k})) {
        throw ConfigError("spike '" + text + "' lies outside " + psi.grid().describe());
      }
      spec.spikes.push_back({{i, j, k}, a});
    }
    if (pt_sigma < 0.0) throw ConfigError("noise sigma must be >= 0");
    write_volume(pt_out, perturb(psi, spec));
    return kOk;
  }

  if (recon->parsed()) {
    const RealVolume psi = read_volume(rc_in);
    const ReconConfig rc = rflags.resolve(psi.grid());
    const ReconResult res = reconstruct(psi, rc);
    write_volume(rc_out, res.chi);
    if (rc_parts) {
      if (res.chi1) write_volume(sibling(rc_out, "_chi1"), *res.chi1);
      if (res.chi2) write_volume(sibling(rc_out, "_chi2"), *res.chi2);
      if (res.chi21) write_volume(sibling(rc_out, "_chi21"), *res.chi21);
      if (res.chi22) write_volume(sibling(rc_out, "_chi22"), *res.chi22);
    }
    std::fprintf(stderr, "max imaginary residue %.3g, closed/chain gap %.3g\n",
                 res.diagnostics.max_residue, res.diagnostics.max_discrepancy);
    return kOk;
  }

  if (metrics->parsed()) {
    const RealVolume truth = read_volume(mt_truth);
    const RealVolume rec = read_volume(mt_recon, truth.grid());
    const RealVolume cone = mt_cone.empty() ? rec : read_volume(mt_cone, truth.grid());
    if (!mt_apex.empty()) {
      const Index3 a = to_index(mt_apex);
      if (!truth.grid().contains(a)) throw ConfigError("apex outside the grid");
      mt_opts.apex = a;
    }
    if (mt_opts.dilation < 0) throw ConfigError("dilation must be >= 0");
    if (mt_opts.cone_halfwidth < 1.0) throw ConfigError("halfwidth must be >= 1");
    const std::vector<MetricsReport> rows{measure(mt_name, rec, truth, cone, mt_opts)};
    std::cout << metrics_table(rows);
    if (!mt_csv.empty()) write_text(mt_csv, metrics_csv(rows));
    return kOk;
  }

  if (slice->parsed()) {
    const RealVolume v = read_volume(sl_in);
    const Plane plane = parse_plane(sl_plane);
    const Window w{sl_window[0], sl_window[1]};
    if (!(w.low < w.high)) throw ConfigError("window low must be below high");
    const int coord = sl_coord.value_or(center_coordinate(v.grid(), plane));
    write_bytes(sl_out, render_slice(v, plane, coord, w).pgm());
    return kOk;
  }

  if (run_cmd->parsed()) {
    std::optional<std::filesystem::path> out;
    if (!run_out.empty()) out = run_out;
    const ExperimentOutputs res = run_experiment(run_cfg, out);
    std::cout << metrics_table(res.metrics);
    std::cout << "wrote " << res.files.size() << " files to " << res.directory.string()
              << "\n";
    return kOk;
  }

  if (selftest->parsed()) {
    if (st_list) {
      for (const auto& name : consistency_check_names()) std::cout << name << "\n";
      return kOk;
    }
    SuiteConfig sc;
    try {
      sc.grid = GridSpec::cube(st_n);
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
    if (!st_checks.empty()) sc.checks = st_checks;
    sc.tolerance = st_tol;
    const SuiteReport report = consistency_suite(sc);
    for (const auto& c : report.checks) {
      std::printf("%-22s %-4s residual %.3e  tolerance %.1e\n", c.name.c_str(),
                  c.passed ? "ok" : "FAIL", c.residual, c.tolerance);
    }
    if (!report.passed()) {
      std::string names;
      for (const auto& n : report.offenders()) names += " " + n;
      std::fprintf(stderr, "selftest failed:%s\n", names.c_str());
      return kNumeric;
    }
    std::printf("all %zu checks passed\n", report.checks.size());
    return kOk;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const qsm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const qsm::ArgumentError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const qsm::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const qsm::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  }
}
