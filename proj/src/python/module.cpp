#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include "qsm/analysis.hpp"
#include "qsm/config.hpp"
#include "qsm/error.hpp"
#include "qsm/experiment.hpp"
#include "qsm/io.hpp"
#include "qsm/phantom.hpp"
#include "qsm/recon.hpp"

namespace py = pybind11;
using namespace qsm;

namespace {

// Volumes cross the boundary as Fortran-ordered (n1, n2, n3) float64 arrays,
// so a[i, j, k] addresses voxel (i, j, k) and the memory layout matches.
using FArray = py::array_t<double, py::array::f_style | py::array::forcecast>;

GridSpec grid_for(const FArray& a, const std::array<double, 3>& spacing) {
  if (a.ndim() != 3) throw ArgumentError("expected a 3-D array");
  return GridSpec(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
                  static_cast<int>(a.shape(2)), spacing[0], spacing[1], spacing[2]);
}

RealVolume to_volume(const FArray& a, const std::array<double, 3>& spacing) {
  const GridSpec g = grid_for(a, spacing);
  return RealVolume(g, std::vector<double>(a.data(), a.data() + a.size()));
}

FArray to_array(const RealVolume& v) {
  const GridSpec& g = v.grid();
  FArray out({g.n(0), g.n(1), g.n(2)});
  std::copy(v.data().begin(), v.data().end(), out.mutable_data());
  return out;
}

py::dict metrics_dict(const MetricsReport& m) {
  py::dict d;
  d["method"] = m.method;
  d["rmse_inside"] = m.rmse_inside;
  d["streak_energy"] = m.streak_energy;
  d["cone_fraction"] = m.cone_fraction;
  d["shell_fraction"] = m.shell_fraction;
  return d;
}

Index3 to_index(const std::array<int, 3>& a) { return {a[0], a[1], a[2]}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Split dipole inversion with streak suppression";

  auto base = py::register_exception<Error>(m, "QsmError", PyExc_RuntimeError);
  py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  auto numeric = py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<SymmetryError>(m, "SymmetryError", numeric.ptr());
  py::register_exception<SymbolDomainError>(m, "SymbolDomainError", numeric.ptr());
  py::register_exception<ConsistencyError>(m, "ConsistencyError", numeric.ptr());
  auto io = py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", io.ptr());

  m.def(
      "phantom",
      [](int n, double spacing, int supersample) {
        return to_array(
            rasterize_phantom(shepp_logan_3d(), GridSpec::cube(n, spacing), supersample));
      },
      py::arg("n"), py::arg("spacing") = 1.0, py::arg("supersample") = 1,
      "Default head phantom on an n^3 grid.");

  m.def(
      "forward",
      [](const FArray& chi, std::array<double, 3> spacing) {
        return to_array(forward_model(to_volume(chi, spacing)));
      },
      py::arg("chi"), py::arg("spacing") = std::array<double, 3>{1, 1, 1},
      "Field map psi = IFFT(D * FFT(chi)).");

  m.def(
      "perturb",
      [](const FArray& psi, const std::vector<std::tuple<int, int, int, double>>& spikes,
         double noise_sigma, std::uint64_t seed) {
        PerturbationSpec p{{}, noise_sigma, seed};
        for (const auto& [i, j, k, a] : spikes) p.spikes.push_back({{i, j, k}, a});
        return to_array(perturb(to_volume(psi, {1, 1, 1}), p));
      },
      py::arg("psi"), py::arg("spikes") = std::vector<std::tuple<int, int, int, double>>{},
      py::arg("noise_sigma") = 0.0, py::arg("seed") = 0);

  m.def("default_spike_amplitude", [](const FArray& psi) {
    return default_spike_amplitude(to_volume(psi, {1, 1, 1}));
  });

  m.def(
      "reconstruct",
      [](const FArray& psi, const std::string& method, std::array<double, 3> spacing,
         std::optional<double> hbar, std::optional<double> s, std::optional<int> power,
         std::optional<double> K, std::optional<double> eps_c, std::optional<double> bigM,
         double naive_floor) {
        const RealVolume v = to_volume(psi, spacing);
        ReconConfig cfg = ReconConfig::defaults(v.grid(), parse_method(method));
        if (hbar) cfg.params.hbar = *hbar;
        if (s) cfg.params.s = *s;
        if (power) cfg.params.m = *power;
        if (bigM) cfg.params.bigM = *bigM;
        if (eps_c) cfg.params.eps_c = *eps_c;
        cfg.params.K = K ? *K
                         : default_regularizer_K(cfg.params.s, cfg.params.eps_c, cfg.cutoff);
        cfg.naive_floor = naive_floor;
        std::optional<ReconResult> res;
        {
          py::gil_scoped_release release;
          res = reconstruct(v, cfg);
        }
        const ReconResult& r = *res;
        py::dict out;
        out["chi"] = to_array(r.chi);
        if (r.chi1) out["chi1"] = to_array(*r.chi1);
        if (r.chi2) out["chi2"] = to_array(*r.chi2);
        if (r.chi21) out["chi21"] = to_array(*r.chi21);
        if (r.chi22) out["chi22"] = to_array(*r.chi22);
        out["max_discrepancy"] = r.diagnostics.max_discrepancy;
        out["max_residue"] = r.diagnostics.max_residue;
        return out;
      },
      py::arg("psi"), py::arg("method") = "tkd-smooth",
      py::arg("spacing") = std::array<double, 3>{1, 1, 1}, py::arg("hbar") = py::none(),
      py::arg("s") = py::none(), py::arg("m") = py::none(), py::arg("K") = py::none(),
      py::arg("eps_c") = py::none(), py::arg("M") = py::none(),
      py::arg("naive_floor") = 1e-3,
      "Reconstruct chi from psi. Split methods also return their parts.");

  m.def(
      "metrics",
      [](const FArray& recon, const FArray& truth, std::optional<FArray> cone_source,
         std::optional<std::array<int, 3>> apex, int dilation, double halfwidth,
         const std::string& name) {
        const RealVolume r = to_volume(recon, {1, 1, 1});
        const RealVolume t = to_volume(truth, {1, 1, 1});
        const RealVolume c = cone_source ? to_volume(*cone_source, {1, 1, 1}) : r;
        MetricOptions opts{dilation, halfwidth, std::nullopt};
        if (apex) opts.apex = to_index(*apex);
        return metrics_dict(measure(name, r, t, c, opts));
      },
      py::arg("recon"), py::arg("truth"), py::arg("cone_source") = py::none(),
      py::arg("apex") = py::none(), py::arg("dilation") = 3,
      py::arg("halfwidth") = 2.0, py::arg("name") = "recon");

  m.def(
      "g_kernel_oracle",
      [](int n, double mollify_eps, int refine, int subsample) {
        GKernelOptions opts;
        opts.mollify_eps = mollify_eps;
        opts.refine = refine;
        opts.subsample = subsample;
        const GKernelReport r = g_kernel_oracle(GridSpec::cube(n), opts);
        py::dict d;
        d["median_relative_deviation"] = r.median_relative_deviation;
        d["mean_relative_deviation"] = r.mean_relative_deviation;
        d["frequencies_tested"] = r.frequencies_tested;
        return d;
      },
      py::arg("n"), py::arg("mollify_eps") = GKernelOptions{}.mollify_eps,
      py::arg("refine") = GKernelOptions{}.refine,
      py::arg("subsample") = GKernelOptions{}.subsample);

  m.def(
      "selftest",
      [](int n, std::optional<std::vector<std::string>> checks,
         std::optional<double> tolerance) {
        SuiteConfig cfg;
        cfg.grid = GridSpec::cube(n);
        cfg.checks = checks;
        cfg.tolerance = tolerance;
        py::list out;
        for (const auto& c : consistency_suite(cfg).checks) {
          py::dict d;
          d["name"] = c.name;
          d["residual"] = c.residual;
          d["tolerance"] = c.tolerance;
          d["passed"] = c.passed;
          out.append(d);
        }
        return out;
      },
      py::arg("n") = 32, py::arg("checks") = py::none(), py::arg("tolerance") = py::none());

  m.def(
      "run_experiment",
      [](const std::filesystem::path& config,
         std::optional<std::filesystem::path> output) {
        const ExperimentOutputs r = run_experiment(config, output);
        py::dict d;
        d["directory"] = r.directory;
        d["files"] = r.files;
        py::list rows;
        for (const auto& m : r.metrics) rows.append(metrics_dict(m));
        d["metrics"] = rows;
        return d;
      },
      py::arg("config"), py::arg("output") = py::none());

  m.def(
      "write_volume",
      [](const std::filesystem::path& path, const FArray& v, std::array<double, 3> spacing) {
        write_volume(path, to_volume(v, spacing));
      },
      py::arg("path"), py::arg("volume"), py::arg("spacing") = std::array<double, 3>{1, 1, 1});

  m.def(
      "read_volume",
      [](const std::filesystem::path& path) {
        const RealVolume v = read_volume(path);
        return py::make_tuple(to_array(v), v.grid().spacings());
      },
      py::arg("path"), "Returns (array, spacing).");
}
