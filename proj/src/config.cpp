#include "specband/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "specband/assumptions.hpp"
#include "specband/expression.hpp"
#include "specband/stencil.hpp"

namespace specband {

namespace {

void check_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const YAML::Node& node, const std::string& key, T& out, const std::string& where) {
  const auto v = node[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <class T>
void read_list(const YAML::Node& node, const std::string& key, std::vector<T>& out, const std::string& where) {
  const auto v = node[key];
  if (!v) return;
  if (!v.IsSequence()) throw ConfigError(where + "." + key + ": expected a list");
  out.clear();
  try {
    for (const auto& x : v) out.push_back(x.as<T>());
  } catch (const YAML::Exception&) {
    throw ConfigError(where + "." + key + ": wrong element type");
  }
}

void read_matrix(const YAML::Node& node, const std::string& key, std::vector<std::vector<std::string>>& out,
                 const std::string& where) {
  const auto v = node[key];
  if (!v) return;
  if (!v.IsSequence()) throw ConfigError(where + "." + key + ": expected a list of rows");
  out.clear();
  for (const auto& row : v) {
    if (!row.IsSequence()) throw ConfigError(where + "." + key + ": expected a list of rows");
    std::vector<std::string> r;
    for (const auto& x : row) r.push_back(x.as<std::string>());
    out.push_back(std::move(r));
  }
}

Face read_face(const YAML::Node& node, const std::string& key, Face def, const std::string& where) {
  std::string s;
  read(node, key, s, where);
  if (s.empty()) return def;
  try {
    return face_from_string(s);
  } catch (const std::exception&) {
    throw ConfigError(where + "." + key + ": unknown boundary condition '" + s + "'");
  }
}

void parse_geometry(const YAML::Node& node, GeometryConfig& g) {
  const std::string w = "geometry";
  check_keys(node, w, {"n", "N", "alpha", "d", "p_long", "m_trans", "transverse_low", "transverse_high", "v0"});
  read(node, "n", g.box.n, w);
  read(node, "N", g.box.N, w);
  read_list(node, "alpha", g.box.alpha, w);
  read(node, "d", g.box.d, w);
  read(node, "p_long", g.box.p_long, w);
  read(node, "m_trans", g.box.m_trans, w);
  g.bc.transverse_low = read_face(node, "transverse_low", g.bc.transverse_low, w);
  g.bc.transverse_high = read_face(node, "transverse_high", g.bc.transverse_high, w);
  read(node, "v0", g.v0, w);
}

void parse_family(const YAML::Node& node, FamilyConfig& f) {
  const std::string w = "family";
  check_keys(node, w, {"kind", "v1", "v2", "a", "a_ij", "b_ij", "k1", "k2", "g", "l2", "exactify_a1", "t0", "params"});
  read(node, "kind", f.kind, w);
  read(node, "v1", f.v1, w);
  read(node, "v2", f.v2, w);
  read_list(node, "a", f.a, w);
  read_matrix(node, "a_ij", f.a_ij, w);
  read_matrix(node, "b_ij", f.b_ij, w);
  read(node, "k1", f.k1, w);
  read(node, "k2", f.k2, w);
  read(node, "g", f.g, w);
  read(node, "l2", f.l2, w);
  read(node, "exactify_a1", f.exactify_a1, w);
  read(node, "t0", f.t0, w);
  if (const auto p = node["params"]) {
    if (!p.IsMap()) throw ConfigError("family.params: expected a mapping");
    f.params.clear();
    for (const auto& kv : p) {
      try {
        f.params[kv.first.as<std::string>()] = kv.second.as<double>();
      } catch (const YAML::Exception&) {
        throw ConfigError("family.params." + kv.first.as<std::string>() + ": expected a number");
      }
    }
  }
}

void parse_distribution(const YAML::Node& node, Distribution& d) {
  const std::string w = "experiment.distribution";
  check_keys(node, w, {"kind", "value", "b_minus", "b_plus", "p"});
  std::string kind = to_string(d.kind);
  read(node, "kind", kind, w);
  try {
    d.kind = dist_kind_from_string(kind);
  } catch (const std::exception&) {
    throw ConfigError(w + ".kind: unknown distribution '" + kind + "'");
  }
  read(node, "value", d.value, w);
  read(node, "b_minus", d.b_minus, w);
  read(node, "b_plus", d.b_plus, w);
  read(node, "p", d.p, w);
}

void parse_experiment(const YAML::Node& node, ExperimentConfig& e) {
  const std::string w = "experiment";
  check_keys(node, w,
             {"epsilons", "Ns", "epsilon_scale", "epsilon_exponent", "gamma", "c1", "c2", "samples", "distribution",
              "eigen_mode", "probe_offsets", "base_box", "shifts", "lambda_points", "c5", "ld_K", "ld_samples"});
  read_list(node, "epsilons", e.epsilons, w);
  read_list(node, "Ns", e.Ns, w);
  read(node, "epsilon_scale", e.epsilon_scale, w);
  read(node, "epsilon_exponent", e.epsilon_exponent, w);
  read(node, "gamma", e.gamma, w);
  read(node, "c1", e.c1, w);
  read(node, "c2", e.c2, w);
  read(node, "samples", e.samples, w);
  if (const auto d = node["distribution"]) parse_distribution(d, e.distribution);
  read(node, "eigen_mode", e.eigen_mode, w);
  read_list(node, "probe_offsets", e.probe_offsets, w);
  if (const auto b = node["base_box"]) {
    check_keys(b, w + ".base_box", {"corner", "size"});
    read_list(b, "corner", e.base_box.corner, w + ".base_box");
    read(b, "size", e.base_box.size, w + ".base_box");
  }
  read_list(node, "shifts", e.shifts, w);
  read(node, "lambda_points", e.lambda_points, w);
  read(node, "c5", e.c5, w);
  read_list(node, "ld_K", e.ld_K, w);
  read(node, "ld_samples", e.ld_samples, w);
}

void parse_output(const YAML::Node& node, OutputConfig& o) {
  check_keys(node, "output", {"directory", "formats"});
  read(node, "directory", o.directory, "output");
  read_list(node, "formats", o.formats, "output");
}

template <class T>
void emit_list(YAML::Emitter& out, const std::vector<T>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (const auto& x : v) {
    if constexpr (std::is_same_v<T, std::string>)
      out << YAML::DoubleQuoted << x;
    else
      out << x;
  }
  out << YAML::EndSeq;
}

void emit_matrix(YAML::Emitter& out, const std::vector<std::vector<std::string>>& m) {
  out << YAML::BeginSeq;
  for (const auto& row : m) emit_list(out, row);
  out << YAML::EndSeq;
}

std::map<std::string, double> constants(const RunConfig& c) {
  auto k = c.family.params;
  k["d"] = c.geometry.box.d;
  return k;
}

Field field(const std::string& src, const std::vector<std::string>& vars, const std::map<std::string, double>& k) {
  Expression e(src, vars, k);
  return [e](std::span<const double> x) { return e(std::vector<double>(x.begin(), x.end())); };
}

bool is_zero(const std::string& s) { return s.empty() || s == "0"; }

CoefficientMatrix coefficients(const std::vector<std::vector<std::string>>& m, int n,
                               const std::map<std::string, double>& k) {
  CoefficientMatrix out(n + 1, std::vector<CField>(n + 1));
  if (m.empty()) return out;
  if (static_cast<int>(m.size()) != n + 1) throw ConfigError("family: coefficient matrix must have n+1 rows");
  const auto vars = cell_variables(n);
  for (int i = 0; i <= n; ++i) {
    if (static_cast<int>(m[i].size()) != n + 1) throw ConfigError("family: coefficient matrix must have n+1 columns");
    for (int j = 0; j <= n; ++j) {
      if (is_zero(m[i][j])) continue;
      auto f = field(m[i][j], vars, k);
      out[i][j] = [f](std::span<const double> x) { return cplx(f(x)); };
    }
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  RunConfig c;
  if (!root || root.IsNull()) return c;
  check_keys(root, "config", {"geometry", "family", "experiment", "output", "seed"});
  try {
    if (const auto g = root["geometry"]) parse_geometry(g, c.geometry);
    if (const auto f = root["family"]) parse_family(f, c.family);
    if (const auto e = root["experiment"]) parse_experiment(e, c.experiment);
    if (const auto o = root["output"]) parse_output(o, c.output);
    read(root, "seed", c.seed, "config");
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const RunConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;

  const auto& g = c.geometry;
  out << YAML::Key << "geometry" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n" << YAML::Value << g.box.n;
  out << YAML::Key << "N" << YAML::Value << g.box.N;
  out << YAML::Key << "alpha" << YAML::Value;
  emit_list(out, g.box.alpha);
  out << YAML::Key << "d" << YAML::Value << g.box.d;
  out << YAML::Key << "p_long" << YAML::Value << g.box.p_long;
  out << YAML::Key << "m_trans" << YAML::Value << g.box.m_trans;
  out << YAML::Key << "transverse_low" << YAML::Value << to_string(g.bc.transverse_low);
  out << YAML::Key << "transverse_high" << YAML::Value << to_string(g.bc.transverse_high);
  out << YAML::Key << "v0" << YAML::Value << YAML::DoubleQuoted << g.v0;
  out << YAML::EndMap;

  const auto& f = c.family;
  out << YAML::Key << "family" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << f.kind;
  out << YAML::Key << "v1" << YAML::Value << YAML::DoubleQuoted << f.v1;
  out << YAML::Key << "v2" << YAML::Value << YAML::DoubleQuoted << f.v2;
  out << YAML::Key << "a" << YAML::Value;
  emit_list(out, f.a);
  out << YAML::Key << "a_ij" << YAML::Value;
  emit_matrix(out, f.a_ij);
  out << YAML::Key << "b_ij" << YAML::Value;
  emit_matrix(out, f.b_ij);
  out << YAML::Key << "k1" << YAML::Value << YAML::DoubleQuoted << f.k1;
  out << YAML::Key << "k2" << YAML::Value << YAML::DoubleQuoted << f.k2;
  out << YAML::Key << "g" << YAML::Value << YAML::DoubleQuoted << f.g;
  out << YAML::Key << "l2" << YAML::Value << YAML::DoubleQuoted << f.l2;
  out << YAML::Key << "exactify_a1" << YAML::Value << f.exactify_a1;
  out << YAML::Key << "t0" << YAML::Value << f.t0;
  out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : f.params) out << YAML::Key << k << YAML::Value << v;
  out << YAML::EndMap;
  out << YAML::EndMap;

  const auto& e = c.experiment;
  out << YAML::Key << "experiment" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "epsilons" << YAML::Value;
  emit_list(out, e.epsilons);
  out << YAML::Key << "Ns" << YAML::Value;
  emit_list(out, e.Ns);
  out << YAML::Key << "epsilon_scale" << YAML::Value << e.epsilon_scale;
  out << YAML::Key << "epsilon_exponent" << YAML::Value << e.epsilon_exponent;
  out << YAML::Key << "gamma" << YAML::Value << e.gamma;
  out << YAML::Key << "c1" << YAML::Value << e.c1;
  out << YAML::Key << "c2" << YAML::Value << e.c2;
  out << YAML::Key << "samples" << YAML::Value << e.samples;
  out << YAML::Key << "distribution" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << to_string(e.distribution.kind);
  out << YAML::Key << "value" << YAML::Value << e.distribution.value;
  out << YAML::Key << "b_minus" << YAML::Value << e.distribution.b_minus;
  out << YAML::Key << "b_plus" << YAML::Value << e.distribution.b_plus;
  out << YAML::Key << "p" << YAML::Value << e.distribution.p;
  out << YAML::EndMap;
  out << YAML::Key << "eigen_mode" << YAML::Value << e.eigen_mode;
  out << YAML::Key << "probe_offsets" << YAML::Value;
  emit_list(out, e.probe_offsets);
  out << YAML::Key << "base_box" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "corner" << YAML::Value;
  emit_list(out, e.base_box.corner);
  out << YAML::Key << "size" << YAML::Value << e.base_box.size;
  out << YAML::EndMap;
  out << YAML::Key << "shifts" << YAML::Value;
  emit_list(out, e.shifts);
  out << YAML::Key << "lambda_points" << YAML::Value << e.lambda_points;
  out << YAML::Key << "c5" << YAML::Value << e.c5;
  out << YAML::Key << "ld_K" << YAML::Value;
  emit_list(out, e.ld_K);
  out << YAML::Key << "ld_samples" << YAML::Value << e.ld_samples;
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "directory" << YAML::Value << YAML::DoubleQuoted << c.output.directory;
  out << YAML::Key << "formats" << YAML::Value;
  emit_list(out, c.output.formats);
  out << YAML::EndMap;

  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

nlohmann::json config_to_json(const RunConfig& c) {
  const auto& g = c.geometry;
  const auto& f = c.family;
  const auto& e = c.experiment;
  nlohmann::json j;
  j["geometry"] = {{"n", g.box.n},
                   {"N", g.box.N},
                   {"alpha", g.box.alpha},
                   {"d", g.box.d},
                   {"p_long", g.box.p_long},
                   {"m_trans", g.box.m_trans},
                   {"transverse_low", to_string(g.bc.transverse_low)},
                   {"transverse_high", to_string(g.bc.transverse_high)},
                   {"v0", g.v0}};
  j["family"] = {{"kind", f.kind}, {"v1", f.v1},   {"v2", f.v2},
                 {"a", f.a},       {"a_ij", f.a_ij}, {"b_ij", f.b_ij},
                 {"k1", f.k1},     {"k2", f.k2},   {"g", f.g},
                 {"l2", f.l2},     {"exactify_a1", f.exactify_a1}, {"t0", f.t0},
                 {"params", f.params}};
  j["experiment"] = {{"epsilons", e.epsilons},
                     {"Ns", e.Ns},
                     {"epsilon_scale", e.epsilon_scale},
                     {"epsilon_exponent", e.epsilon_exponent},
                     {"gamma", e.gamma},
                     {"c1", e.c1},
                     {"c2", e.c2},
                     {"samples", e.samples},
                     {"distribution", e.distribution.to_json()},
                     {"eigen_mode", e.eigen_mode},
                     {"probe_offsets", e.probe_offsets},
                     {"base_box", {{"corner", e.base_box.corner}, {"size", e.base_box.size}}},
                     {"shifts", e.shifts},
                     {"lambda_points", e.lambda_points},
                     {"c5", e.c5},
                     {"ld_K", e.ld_K},
                     {"ld_samples", e.ld_samples}};
  j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
  j["seed"] = c.seed;
  return j;
}

void validate_config(const RunConfig& c) {
  try {
    BoxSpec box = c.geometry.box;
    box.validate();
    if (c.geometry.box.whole_space() && !(c.geometry.bc.transverse_low == Face::Neumann &&
                                          c.geometry.bc.transverse_high == Face::Neumann))
      throw ConfigError("geometry: whole-space mode (m_trans = 1) needs neumann transverse faces");
    c.experiment.distribution.validate();
    eigen_mode_from_string(c.experiment.eigen_mode);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  static const std::set<std::string> kinds{"potential", "magnetic", "metric", "integral", "deformation",
                                           "linear_positive"};
  if (!kinds.count(c.family.kind)) throw ConfigError("family.kind: unknown family '" + c.family.kind + "'");
  if (!(c.family.t0 > 0)) throw ConfigError("family.t0 must be positive");
  const auto& e = c.experiment;
  if (e.Ns.empty()) throw ConfigError("experiment.Ns must not be empty");
  for (int N : e.Ns)
    if (N < 1) throw ConfigError("experiment.Ns entries must be >= 1");
  if (e.epsilons.empty()) throw ConfigError("experiment.epsilons must not be empty");
  if (e.samples < 1) throw ConfigError("experiment.samples must be >= 1");
  if (e.gamma < 17) throw ConfigError("experiment.gamma must be >= 17");
  if (!(e.c1 > 0) || !(e.c2 > 0)) throw ConfigError("experiment.c1 and c2 must be positive");
  if (e.epsilon_scale < 0) throw ConfigError("experiment.epsilon_scale must be >= 0");
  if (e.lambda_points < 3) throw ConfigError("experiment.lambda_points must be >= 3");
  if (static_cast<int>(e.base_box.corner.size()) != c.geometry.box.n)
    throw ConfigError("experiment.base_box.corner must have n entries");
  if (e.base_box.size < 1) throw ConfigError("experiment.base_box.size must be >= 1");
  for (int K : e.ld_K)
    if (K < 1) throw ConfigError("experiment.ld_K entries must be >= 1");
  for (const auto& fmt : c.output.formats)
    if (fmt != "csv" && fmt != "json") throw ConfigError("output.formats: unknown format '" + fmt + "'");
}

std::function<double(double)> v0_function(const RunConfig& c) {
  Expression e(c.geometry.v0, {"xt"}, constants(c));
  return [e](double xt) { return e({xt}); };
}

Grid box_grid(const RunConfig& c, int N) {
  BoxSpec spec = c.geometry.box;
  spec.N = N;
  return build_grid(spec, c.geometry.bc);
}

PerturbationFamily build_family(const RunConfig& c, const Grid& cell, const CellSpectrum& cs) {
  const auto& f = c.family;
  const int n = cell.n();
  const auto k = constants(c);
  const auto vars = cell_variables(n);
  PerturbationFamily fam;
  if (f.kind == "potential") {
    fam = potential_family(cell, sample_cell(cell, field(f.v1, vars, k)), sample_cell(cell, field(f.v2, vars, k)));
    if (f.exactify_a1) fam = exactify_a1(fam, cs);
  } else if (f.kind == "magnetic") {
    if (static_cast<int>(f.a.size()) != n + 1) throw ConfigError("family.a must have n+1 components");
    std::vector<Field> a;
    for (const auto& s : f.a) a.push_back(field(s, vars, k));
    fam = magnetic_family(cell, a);
  } else if (f.kind == "metric") {
    fam = metric_family(cell, coefficients(f.a_ij, n, k), coefficients(f.b_ij, n, k));
  } else if (f.kind == "integral") {
    const auto kv = kernel_variables(n);
    auto kernel = [&](const std::string& src) {
      Expression e(src, kv, k);
      return sample_kernel(cell, [e](std::span<const double> x, std::span<const double> y) {
        std::vector<double> v(x.begin(), x.end());
        v.insert(v.end(), y.begin(), y.end());
        return cplx(e(v));
      });
    };
    fam = integral_family(cell, kernel(f.k1), kernel(f.k2));
  } else if (f.kind == "deformation") {
    fam = boundary_deformation_family(cell, field(f.g, vars, k));
  } else if (f.kind == "linear_positive") {
    const RVec l2 = sample_cell(cell, field(f.l2, vars, k));
    fam = linear_positive_family(cell, stencil::to_complex(stencil::diag(l2)), cs);
  } else {
    throw ConfigError("family.kind: unknown family '" + f.kind + "'");
  }
  fam.t0 = f.t0;
  fam.validate();
  return fam;
}

CellSetup build_cell(const RunConfig& c) {
  BoxSpec spec = c.geometry.box;
  spec.N = 1;
  spec.alpha.assign(spec.n, 0);
  Grid cell = build_grid(spec, c.geometry.bc);
  RVec v0 = cell.spec().whole_space() ? RVec() : sample_transverse(cell, v0_function(c));
  std::span<const double> v0s(v0.data(), static_cast<size_t>(v0.size()));
  CellSpectrum cs = cell_spectrum(cell, v0s);
  SparseOperator op = cell_operator(cell, v0s);
  PerturbationFamily fam = build_family(c, cell, cs);
  return CellSetup{std::move(cell), std::move(v0), std::move(cs), std::move(op), std::move(fam)};
}

double sampling_epsilon(const ExperimentConfig& e, int N) {
  if (e.epsilon_scale > 0) return e.epsilon_scale * std::pow(static_cast<double>(N), -e.epsilon_exponent);
  return e.epsilons.front();
}

}  // namespace specband
