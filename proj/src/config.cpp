#include "qsm/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "qsm/error.hpp"

namespace qsm {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

// Typed access to an INI tree that can point at the offending line.
class IniDocument {
 public:
  IniDocument(const std::string& text, std::string origin)
      : origin_(std::move(origin)) {
    std::istringstream is(text);
    try {
      pt::read_ini(is, tree_);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(origin_ + ":" + std::to_string(e.line()) + ": " +
                        e.message());
    }
    std::istringstream lines(text);
    std::string line, section;
    for (int n = 1; std::getline(lines, line); ++n) {
      line = trim(line);
      if (line.empty() || line[0] == ';' || line[0] == '#') continue;
      if (line.front() == '[' && line.back() == ']') {
        section = trim(line.substr(1, line.size() - 2));
        section_lines_[section] = n;
        continue;
      }
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        key_lines_[section + "\n" + trim(line.substr(0, eq))] = n;
      }
    }
  }

  bool has_section(const std::string& section) const {
    return static_cast<bool>(tree_.get_child_optional(pt::ptree::path_type(section, '\0')));
  }

  std::vector<std::string> sections() const {
    std::vector<std::string> out;
    for (const auto& [name, child] : tree_) {
      if (!child.empty() || child.data().empty()) out.push_back(name);
    }
    return out;
  }

  std::optional<std::string> raw(const std::string& section,
                                 const std::string& key) const {
    auto child = tree_.get_child_optional(pt::ptree::path_type(section, '\0'));
    if (!child) return std::nullopt;
    auto v = child->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& message) const {
    int line = 0;
    if (auto it = key_lines_.find(section + "\n" + key); it != key_lines_.end()) {
      line = it->second;
    } else if (auto s = section_lines_.find(section); s != section_lines_.end()) {
      line = s->second;
    }
    std::string where = origin_;
    if (line > 0) where += ":" + std::to_string(line);
    throw ConfigError(where + ": [" + section + "] " + key + ": " + message);
  }

  double number(const std::string& section, const std::string& key,
                double fallback) const {
    auto v = raw(section, key);
    if (!v) return fallback;
    return parse_number(section, key, *v);
  }

  // Empty optional for "auto" or a missing key.
  std::optional<double> number_or_auto(const std::string& section,
                                       const std::string& key) const {
    auto v = raw(section, key);
    if (!v || *v == "auto") return std::nullopt;
    return parse_number(section, key, *v);
  }

  long integer(const std::string& section, const std::string& key,
               long fallback) const {
    auto v = raw(section, key);
    if (!v) return fallback;
    return parse_integer(section, key, *v);
  }

  double parse_number(const std::string& section, const std::string& key,
                      const std::string& text) const {
    try {
      std::size_t used = 0;
      const double d = std::stod(text, &used);
      if (used != text.size() || !std::isfinite(d)) throw std::invalid_argument(text);
      return d;
    } catch (const std::exception&) {
      fail(section, key, "expected a number, got '" + text + "'");
    }
  }

  long parse_integer(const std::string& section, const std::string& key,
                     const std::string& text) const {
    try {
      std::size_t used = 0;
      const long v = std::stol(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      fail(section, key, "expected an integer, got '" + text + "'");
    }
  }

  Window window(const std::string& section, const std::string& key,
                Window fallback) const {
    auto v = raw(section, key);
    if (!v) return fallback;
    const auto w = words(*v);
    if (w.size() != 2) fail(section, key, "expected 'low high'");
    const Window out{parse_number(section, key, w[0]),
                     parse_number(section, key, w[1])};
    if (!(out.low < out.high)) fail(section, key, "window low must be below high");
    return out;
  }

 private:
  pt::ptree tree_;
  std::string origin_;
  std::map<std::string, int> key_lines_;
  std::map<std::string, int> section_lines_;
};

std::string read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream is(path);
  if (!is) {
    throw ConfigError(std::string("cannot read ") + what + " '" +
                      path.string() + "'");
  }
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

PhantomSpec parse_phantom(const IniDocument& doc) {
  PhantomSpec spec;
  constexpr double deg = std::numbers::pi / 180.0;
  for (const auto& section : doc.sections()) {
    if (section.rfind("ellipsoid", 0) != 0) continue;
    auto vec3 = [&](const char* key, std::optional<Vec3> fallback) {
      auto v = doc.raw(section, key);
      if (!v) {
        if (fallback) return *fallback;
        doc.fail(section, key, "missing");
      }
      const auto w = words(*v);
      if (w.size() != 3) doc.fail(section, key, "expected three numbers");
      return Vec3{doc.parse_number(section, key, w[0]),
                  doc.parse_number(section, key, w[1]),
                  doc.parse_number(section, key, w[2])};
    };
    Ellipsoid e;
    e.center = vec3("center", Vec3{0.0, 0.0, 0.0});
    e.semi_axes = vec3("semi_axes", std::nullopt);
    const Vec3 angles = vec3("euler_deg", Vec3{0.0, 0.0, 0.0});
    e.euler = {angles[0] * deg, angles[1] * deg, angles[2] * deg};
    if (!doc.raw(section, "amplitude")) doc.fail(section, "amplitude", "missing");
    e.amplitude = doc.number(section, "amplitude", 0.0);
    try {
      e.validate();
    } catch (const ArgumentError& err) {
      doc.fail(section, "semi_axes", err.what());
    }
    spec.ellipsoids.push_back(e);
  }
  if (spec.ellipsoids.empty()) {
    throw ConfigError("phantom file has no [ellipsoid...] sections");
  }
  return spec;
}

void apply_recon_keys(const IniDocument& doc, const std::string& section,
                      ReconConfig& rc) {
  SymbolParams& sp = rc.params;
  sp.hbar = doc.number(section, "hbar", sp.hbar);
  sp.s = doc.number(section, "s", sp.s);
  sp.m = static_cast<int>(doc.integer(section, "m", sp.m));
  if (auto k = doc.number_or_auto(section, "K")) sp.K = *k;
  sp.bigM = doc.number(section, "M", sp.bigM);
  if (auto e = doc.number_or_auto(section, "eps_c")) sp.eps_c = *e;
  if (auto r = doc.number_or_auto(section, "ramp")) rc.halfline.ramp = *r;
  rc.naive_floor = doc.number(section, "naive_floor", rc.naive_floor);
  if (auto k = doc.raw(section, "cutoff")) {
    try {
      rc.cutoff.kind = parse_cutoff_kind(*k);
    } catch (const ConfigError& e) {
      doc.fail(section, "cutoff", e.what());
    }
  }
  rc.cutoff.inner = doc.number(section, "cutoff_inner", rc.cutoff.inner);
  rc.cutoff.outer = doc.number(section, "cutoff_outer", rc.cutoff.outer);
}

ExperimentConfig parse_document(const IniDocument& doc,
                                const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;

  cfg.seed = static_cast<std::uint64_t>(doc.integer("experiment", "seed", 0));
  if (auto out = doc.raw("experiment", "output_dir")) {
    cfg.output_dir = base_dir / *out;
  }

  // grid
  {
    std::array<int, 3> n{64, 64, 64};
    if (auto dims = doc.raw("grid", "n")) {
      const auto w = words(*dims);
      if (w.size() != 1 && w.size() != 3) {
        doc.fail("grid", "n", "expected one or three sizes");
      }
      for (int a = 0; a < 3; ++a) {
        n[a] = static_cast<int>(
            doc.parse_integer("grid", "n", w[w.size() == 1 ? 0 : a]));
      }
    }
    Vec3 d{1.0, 1.0, 1.0};
    if (auto sp = doc.raw("grid", "spacing")) {
      const auto w = words(*sp);
      if (w.size() != 1 && w.size() != 3) {
        doc.fail("grid", "spacing", "expected one or three spacings");
      }
      for (int a = 0; a < 3; ++a) {
        d[a] = doc.parse_number("grid", "spacing", w[w.size() == 1 ? 0 : a]);
      }
    }
    try {
      cfg.grid = GridSpec(n[0], n[1], n[2], d[0], d[1], d[2]);
    } catch (const ArgumentError& e) {
      doc.fail("grid", "n", e.what());
    }
  }

  // phantom
  if (auto file = doc.raw("phantom", "file")) {
    std::filesystem::path p = *file;
    if (p.is_relative()) p = base_dir / p;
    if (!std::filesystem::exists(p)) {
      doc.fail("phantom", "file", "phantom file '" + p.string() + "' not found");
    }
    cfg.phantom = load_phantom_file(p);
    cfg.phantom_file = p;
  }
  cfg.supersample = static_cast<int>(doc.integer("phantom", "supersample", 1));
  if (cfg.supersample < 1) doc.fail("phantom", "supersample", "must be >= 1");

  // perturbation
  if (auto spikes = doc.raw("perturb", "spikes")) {
    for (const auto& item : split(*spikes, ',')) {
      const auto w = words(item);
      if (w.size() != 4) {
        doc.fail("perturb", "spikes", "each spike is 'i j k amplitude|auto'");
      }
      SpikeSetting s;
      s.at = {static_cast<int>(doc.parse_integer("perturb", "spikes", w[0])),
              static_cast<int>(doc.parse_integer("perturb", "spikes", w[1])),
              static_cast<int>(doc.parse_integer("perturb", "spikes", w[2]))};
      if (!cfg.grid.contains(s.at)) {
        doc.fail("perturb", "spikes", "spike '" + item + "' outside the grid");
      }
      if (w[3] != "auto") s.amplitude = doc.parse_number("perturb", "spikes", w[3]);
      cfg.spikes.push_back(s);
    }
  }
  cfg.noise_sigma = doc.number("perturb", "noise_sigma", 0.0);
  if (cfg.noise_sigma < 0.0) doc.fail("perturb", "noise_sigma", "must be >= 0");

  // reconstructions
  {
    std::vector<std::string> names = {"naive", "tkd-classic", "tkd-smooth",
                                      "r-reg", "t-enhanced"};
    if (auto m = doc.raw("recon", "methods")) names = words(*m);
    auto is_set = [&](const std::string& section, const char* key) {
      auto v = doc.raw(section, key);
      return v && *v != "auto";
    };
    for (const auto& name : names) {
      Method method{};
      try {
        method = parse_method(name);
      } catch (const ConfigError& e) {
        doc.fail("recon", "methods", e.what());
      }
      ReconConfig rc = ReconConfig::defaults(cfg.grid, method);
      apply_recon_keys(doc, "recon", rc);
      apply_recon_keys(doc, name, rc);
      const std::string where = doc.has_section(name) ? name : "recon";
      // Grid-derived defaults follow whatever profile and order were chosen.
      if (!is_set("recon", "eps_c") && !is_set(name, "eps_c")) {
        rc.params.eps_c = default_lowpass_eps(cfg.grid, rc.cutoff);
      }
      if (!is_set("recon", "K") && !is_set(name, "K")) {
        rc.params.K = default_regularizer_K(rc.params.s, rc.params.eps_c, rc.cutoff);
      }
      try {
        rc.validate();
      } catch (const ArgumentError& e) {
        doc.fail(where, "params", e.what());
      }
      if (rc.method == Method::TEnhanced && rc.params.m % 2 != 0) {
        doc.fail(where, "m", "t-enhanced needs an even m");
      }
      if (rc.method == Method::RReg && rc.params.s < 2.0) {
        doc.fail(where, "s", "r-reg needs s >= 2");
      }
      cfg.recons.push_back(rc);
    }
  }

  // metrics
  cfg.metrics.dilation = static_cast<int>(doc.integer("metrics", "dilation", 3));
  if (cfg.metrics.dilation < 0) doc.fail("metrics", "dilation", "must be >= 0");
  cfg.metrics.cone_halfwidth = doc.number("metrics", "cone_halfwidth", 2.0);
  if (cfg.metrics.cone_halfwidth < 1.0) {
    doc.fail("metrics", "cone_halfwidth", "must be >= 1");
  }
  if (auto apex = doc.raw("metrics", "apex"); apex && *apex != "first-spike") {
    const auto w = words(*apex);
    if (w.size() != 3) doc.fail("metrics", "apex", "expected 'i j k' or first-spike");
    Index3 a{static_cast<int>(doc.parse_integer("metrics", "apex", w[0])),
             static_cast<int>(doc.parse_integer("metrics", "apex", w[1])),
             static_cast<int>(doc.parse_integer("metrics", "apex", w[2]))};
    if (!cfg.grid.contains(a)) doc.fail("metrics", "apex", "outside the grid");
    cfg.metrics.apex = a;
    cfg.apex_from_first_spike = false;
  }

  cfg.chi_window = doc.window("output", "chi_window", kChiWindow);
  cfg.psi_window = doc.window("output", "psi_window", kPsiWindow);
  return cfg;
}

}  // namespace

PhantomSpec load_phantom_file(const std::filesystem::path& path) {
  const IniDocument doc(read_file(path, "phantom file"), path.string());
  return parse_phantom(doc);
}

std::string phantom_file_text(const PhantomSpec& spec) {
  constexpr double deg = 180.0 / std::numbers::pi;
  // Shortest text that reads back to the same double.
  auto num = [](double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  auto vec = [&](const Vec3& v, double scale) {
    return num(v[0] * scale) + " " + num(v[1] * scale) + " " + num(v[2] * scale);
  };
  std::ostringstream os;
  os << "; one section per ellipsoid; amplitudes add where they overlap\n"
        "[phantom]\nversion = 1\n";
  for (std::size_t i = 0; i < spec.ellipsoids.size(); ++i) {
    const auto& e = spec.ellipsoids[i];
    os << "\n[ellipsoid" << i << "]\n"
       << "center = " << vec(e.center, 1.0) << "\n"
       << "semi_axes = " << vec(e.semi_axes, 1.0) << "\n"
       << "euler_deg = " << vec(e.euler, deg) << "\n"
       << "amplitude = " << num(e.amplitude) << "\n";
  }
  return os.str();
}

ExperimentConfig parse_experiment_config_text(
    const std::string& text, const std::filesystem::path& base_dir) {
  return parse_document(IniDocument(text, "<config>"), base_dir);
}

ExperimentConfig parse_experiment_config(const std::filesystem::path& path) {
  const std::string text = read_file(path, "config file");
  return parse_document(IniDocument(text, path.string()),
                        path.has_parent_path() ? path.parent_path() : ".");
}

ExperimentConfig default_experiment(int n) {
  ExperimentConfig cfg;
  cfg.grid = GridSpec::cube(n);
  auto voxel = [n](double x, double y, double z) {
    auto idx = [n](double c) {
      return n / 2 + static_cast<int>(std::lround(c * n / 2));
    };
    return Index3{idx(x), idx(y), idx(z)};
  };
  cfg.spikes = {{voxel(0.25, 0.0, 0.3), std::nullopt},
                {voxel(-0.3, 0.0, -0.35), std::nullopt}};
  cfg.seed = 7;
  for (Method m : {Method::Naive, Method::TkdClassic, Method::TkdSmooth,
                   Method::RReg, Method::TEnhanced}) {
    cfg.recons.push_back(ReconConfig::defaults(cfg.grid, m));
  }
  return cfg;
}

}  // namespace qsm
