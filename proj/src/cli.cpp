#include "specband/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unistd.h>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "specband/assumptions.hpp"
#include "specband/expression.hpp"
#include "specband/green.hpp"
#include "specband/montecarlo.hpp"
#include "specband/parallel.hpp"
#include "specband/spectral.hpp"

namespace fs = std::filesystem;

namespace specband::cli {

namespace {

std::string num(double x) { return fmt::format("{:.17g}", x); }

/// CSV with a fixed column list; numbers at full precision.
class Csv {
 public:
  explicit Csv(std::vector<std::string> columns) : columns_(std::move(columns)) {
    for (size_t i = 0; i < columns_.size(); ++i) out_ << (i ? "," : "") << columns_[i];
    out_ << '\n';
  }
  template <class... T>
  void row(const T&... v) {
    static_assert(sizeof...(T) > 0);
    if (sizeof...(T) != columns_.size()) throw std::logic_error("csv row width mismatch");
    size_t i = 0;
    ((out_ << (i++ ? "," : "") << cell(v)), ...);
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double x) { return num(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(long x) { return std::to_string(x); }
  static std::string cell(std::uint64_t x) { return std::to_string(x); }
  static std::string cell(bool x) { return x ? "1" : "0"; }
  static std::string cell(const std::string& x) { return x; }
  static std::string cell(const char* x) { return x; }

  std::vector<std::string> columns_;
  std::ostringstream out_;
};

class Writer {
 public:
  Writer(fs::path dir, const OutputConfig& out) : dir_(std::move(dir)), out_(out) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }
  bool wants(const std::string& format) const {
    for (const auto& f : out_.formats)
      if (f == format) return true;
    return false;
  }
  void csv(const std::string& name, const Csv& c) {
    if (wants("csv")) put(name, c.str());
  }
  void json(const std::string& name, const nlohmann::json& j) {
    if (wants("json")) put(name, j.dump(2) + "\n");
  }
  void put(const std::string& name, const std::string& content) {
    write_atomic(dir_ / name, content);
    files_.push_back(name);
  }
  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  OutputConfig out_;
  std::vector<std::string> files_;
};

EigenMode mode_of(const RunConfig& c) { return eigen_mode_from_string(c.experiment.eigen_mode); }

struct BoxSetup {
  Grid grid;
  SparseOperator h0;
};

BoxSetup box_setup(const RunConfig& c, int N) {
  Grid grid = box_grid(c, N);
  const RVec v0 = grid.spec().whole_space() ? RVec() : sample_transverse(grid, v0_function(c));
  SparseOperator h0 = assemble_unperturbed(grid, std::span<const double>(v0.data(), v0.size()));
  return {std::move(grid), std::move(h0)};
}

PerturbationFamily family_on(const RunConfig& c, const Grid& g) {
  const RVec v = g.spec().whole_space() ? RVec() : sample_transverse(g, v0_function(c));
  return build_family(c, g, cell_spectrum(g, std::span<const double>(v.data(), v.size())));
}

CellAnalysis analyze(const CellSetup& s) {
  if (s.cell.spec().whole_space()) return whole_space_analysis(s.family, s.cell);
  return analyze_cell(s.family, s.cell, std::span<const double>(s.v0.data(), s.v0.size()));
}

nlohmann::json derived_constants(const RunConfig& c, const CellSetup& s, const CellAnalysis& a) {
  nlohmann::json d{{"lambda0", s.spectrum.lambda0}, {"lambda1", s.spectrum.lambda1}, {"c0", a.c0},
                   {"a1_residual", a.a1_residual}, {"cell_weight", s.spectrum.weight}};
  const auto& e = c.experiment;
  const double eabs = e.distribution.e_abs();
  nlohmann::json per_n = nlohmann::json::array();
  for (int N : e.Ns) {
    nlohmann::json row{{"N", N},
                       {"epsilon_regime_hi", epsilon_regime(N, e.c1).hi},
                       {"sampling_epsilon", sampling_epsilon(e, N)}};
    if (eabs > 0) {
      const auto in = epsilon_interval(N, e.gamma, e.c1, e.c2, eabs);
      row["I_N"] = {{"lo", in.lo}, {"hi", in.hi}, {"empty", in.empty()}, {"c3", in.c3}};
    }
    per_n.push_back(row);
  }
  d["per_N"] = per_n;
  if (eabs > 0) d["I_N_threshold"] = epsilon_interval_threshold(e.gamma, e.c1, e.c2, eabs);
  return d;
}

// --- check-assumptions ----------------------------------------------------

nlohmann::json do_check_assumptions(const RunConfig& c, const CellSetup& s, const CellAnalysis& a, Writer& w) {
  nlohmann::json j = a.to_json();
  j["schema_version"] = kSchemaVersion;
  j["family"] = s.family.name;
  j["origin"] = s.family.origin;
  const double remark_hi = a.l1psi_norm2 / (a.lambda1 - a.lambda0);
  j["diagnostics"]["remark_bound"] = {{"lower", 0.0},
                                      {"upper", remark_hi},
                                      {"holds", a.u_l1_pairing >= 0 && a.u_l1_pairing <= remark_hi}};
  const auto tg = two_grid_c0([&](const Grid& g) { return family_on(c, g); },
                              s.cell.spec(), s.cell.bc(),
                              s.cell.spec().whole_space() ? std::function<double(double)>() : v0_function(c));
  j["c0_error"] = tg.error;
  j["diagnostics"]["two_grid"] = {{"c0_fine", tg.c0_fine}, {"c0_coarse", tg.c0_coarse}};
  if (c.family.kind == "deformation" && c.geometry.v0 == "0" && s.cell.n() <= 2) {
    const auto gf = [&] {
      auto k = c.family.params;
      k["d"] = c.geometry.box.d;
      Expression e(c.family.g, cell_variables(s.cell.n()), k);
      return e;
    }();
    auto g = [gf](std::span<const double> x) {
      std::vector<double> v(x.begin(), x.end());
      v.push_back(0.0);
      return gf(v);
    };
    const double series = deformation_c0_series(g, s.cell.n(), c.geometry.box.d, 32);
    j["closed_form"] = {{"kind", "deformation_mode_series"},
                        {"modes", 32},
                        {"value", series},
                        {"relative_gap", std::abs(a.c0 - series) / std::abs(series)}};
  }
  w.json("assumptions.json", j);
  return j;
}

// --- eigen ----------------------------------------------------------------

nlohmann::json do_eigen(const RunConfig& c, const CellSetup& s, Writer& w, int workers) {
  const auto& e = c.experiment;
  struct Task {
    int N;
    double eps;
  };
  std::vector<Task> tasks;
  for (int N : e.Ns)
    for (double eps : e.epsilons) tasks.push_back({N, eps});
  struct Row {
    EigenResult r;
    double bracket = 0;
  };
  std::vector<Row> rows(tasks.size());
  std::map<int, BoxSetup> boxes;
  for (int N : e.Ns)
    if (!boxes.count(N)) boxes.emplace(N, box_setup(c, N));
  parallel_for(static_cast<int>(tasks.size()), workers, [&](int i) {
    const auto& t = tasks[i];
    const auto& b = boxes.at(t.N);
    const auto omega = sample_configuration(e.distribution, b.grid.cell_count(), c.seed, 0).omega;
    const auto h = assemble_randomized(b.grid, b.h0, s.family, t.eps, omega);
    rows[i].r = lowest_eigenpair(h, mode_of(c));
    rows[i].bracket = bracketing_bound(s.cell_op, s.family, t.eps, omega, mode_of(c));
  });
  Csv csv({"N", "epsilon", "seed", "sample", "lambda_min", "gap", "bracket", "residual", "method"});
  nlohmann::json out = nlohmann::json::array();
  for (size_t i = 0; i < tasks.size(); ++i) {
    const auto& r = rows[i].r;
    const double gap = r.lambda_min - s.spectrum.lambda0;
    csv.row(tasks[i].N, tasks[i].eps, c.seed, 0, r.lambda_min, gap, rows[i].bracket, r.residual, r.method);
    out.push_back({{"N", tasks[i].N},
                   {"epsilon", tasks[i].eps},
                   {"lambda_min", r.lambda_min},
                   {"gap", gap},
                   {"bracket", rows[i].bracket},
                   {"residual", r.residual},
                   {"method", r.method}});
  }
  w.csv("eigen.csv", csv);
  nlohmann::json j{{"schema_version", kSchemaVersion}, {"csv_columns_version", 1}, {"rows", out}};
  w.json("eigen.json", j);
  return j;
}

// --- sweep ----------------------------------------------------------------

nlohmann::json do_sweep(const RunConfig& c, const CellSetup& s, Writer& w, int workers, bool* all_pass) {
  const auto& e = c.experiment;
  const int n = c.geometry.box.n;
  const double l0 = s.spectrum.lambda0;
  Csv csv({"epsilon", "N", "seed", "sample", "lambda_min", "gap", "rhs", "bracket", "pass"});
  nlohmann::json per_n = nlohmann::json::array();
  bool ok = true;
  for (int N : e.Ns) {
    const auto b = box_setup(c, N);
    const int ns = static_cast<int>(e.samples);
    const int ne = static_cast<int>(e.epsilons.size());
    std::vector<std::vector<double>> omegas(ns);
    std::vector<double> lambdas(static_cast<size_t>(ns) * ne), brackets(lambdas.size());
    for (int k = 0; k < ns; ++k) omegas[k] = sample_configuration(e.distribution, b.grid.cell_count(), c.seed, k).omega;
    parallel_for(ns * ne, workers, [&](int i) {
      const int k = i / ne, j = i % ne;
      const double eps = e.epsilons[j];
      const auto h = assemble_randomized(b.grid, b.h0, s.family, eps, omegas[k]);
      lambdas[i] = lowest_eigenpair(h, mode_of(c)).lambda_min;
      brackets[i] = bracketing_bound(s.cell_op, s.family, eps, omegas[k], mode_of(c));
    });
    std::vector<double> gaps, epss;
    std::vector<std::vector<double>> oms;
    for (int i = 0; i < ns * ne; ++i) {
      gaps.push_back(lambdas[i] - l0);
      epss.push_back(e.epsilons[i % ne]);
      oms.push_back(omegas[i / ne]);
    }
    double c2 = std::numeric_limits<double>::quiet_NaN();
    try {
      c2 = fit_c2(gaps, epss, oms, N, n);
    } catch (const DomainError&) {
      // every sample has eps * omega = 0: nothing to fit
    }
    const bool c2_defined = std::isfinite(c2);
    if (!c2_defined) c2 = 0;
    long passes = 0;
    double slope_min = std::numeric_limits<double>::infinity(), slope_max = -slope_min;
    for (int k = 0; k < ns; ++k) {
      std::vector<double> xs, ys;
      for (int j = 0; j < ne; ++j) {
        const int i = k * ne + j;
        const auto rep = check_deterministic_bound(lambdas[i], l0, e.epsilons[j], N, n, omegas[k], c2);
        const bool pass = rep.pass && rep.lambda_gap >= -1e-9 && lambdas[i] >= brackets[i] - 1e-9;
        passes += pass;
        csv.row(e.epsilons[j], N, c.seed, k, lambdas[i], rep.lambda_gap, rep.rhs_value, brackets[i], pass);
        if (e.epsilons[j] > 0 && rep.lambda_gap > 0) {
          xs.push_back(e.epsilons[j]);
          ys.push_back(rep.lambda_gap);
        }
      }
      if (xs.size() >= 2) {
        const double sl = loglog_slope(xs, ys);
        slope_min = std::min(slope_min, sl);
        slope_max = std::max(slope_max, sl);
      }
    }
    ok = ok && passes == static_cast<long>(ns) * ne;
    nlohmann::json row{{"N", N},
                       {"rows", ns * ne},
                       {"passes", passes},
                       {"c2_hat", c2_defined ? nlohmann::json(c2) : nlohmann::json(nullptr)},
                       {"epsilon_regime_hi", epsilon_regime(N, e.c1).hi},
                       {"epsilon_max", *std::max_element(e.epsilons.begin(), e.epsilons.end())}};
    if (std::isfinite(slope_min)) row["loglog_slope"] = {{"min", slope_min}, {"max", slope_max}};
    if (e.distribution.kind == DistKind::PointMass && e.distribution.value == 1.0 && ne >= 4) {
      try {
        const auto fit = fit_lifting(e.epsilons, std::vector<double>(gaps.begin(), gaps.begin() + ne));
        row["lifting"] = {{"c0_hat", fit.c0_hat}, {"rho_hat", fit.rho_hat}};
      } catch (const DomainError& err) {
        row["lifting"] = {{"error", err.what()}};
      }
    }
    per_n.push_back(row);
  }
  w.csv("sweep.csv", csv);
  nlohmann::json j{{"schema_version", kSchemaVersion}, {"csv_columns_version", 1}, {"all_pass", ok}, {"per_N", per_n}};
  w.json("sweep.json", j);
  if (all_pass) *all_pass = ok;
  return j;
}

// --- green-decay ----------------------------------------------------------

nlohmann::json do_green(const RunConfig& c, const CellSetup& s, Writer& w, int workers, bool* checks) {
  const auto& e = c.experiment;
  const int N = e.Ns.front();
  const double eps = e.epsilons.front();
  const auto b = box_setup(c, N);
  const auto omega = sample_configuration(e.distribution, b.grid.cell_count(), c.seed, 0).omega;
  const auto h = assemble_randomized(b.grid, b.h0, s.family, eps, omega);
  const double lmin = lowest_eigenpair(h, mode_of(c)).lambda_min;
  std::vector<DecayProfile> profiles(e.probe_offsets.size());
  std::vector<double> oracle_gap(profiles.size(), 0.0);
  const bool oracle = h.dim() <= 400;
  parallel_for(static_cast<int>(profiles.size()), workers, [&](int i) {
    const double lambda = lmin + e.probe_offsets[i];
    profiles[i] = decay_profile(b.grid, h, lambda, lmin, e.base_box, e.shifts);
    if (!oracle) return;
    const auto b1 = b.grid.box_points(e.base_box);
    for (size_t k = 0; k < e.shifts.size(); ++k) {
      SubBox s2 = e.base_box;
      s2.corner[0] += e.shifts[k];
      const double ref = resolvent_block_norm_dense(h, lambda, b1, b.grid.box_points(s2));
      oracle_gap[i] = std::max(oracle_gap[i], std::abs(profiles[i].points[k].norm - ref) / ref);
    }
  });
  Csv csv({"lambda", "delta", "shift", "dist", "norm"});
  nlohmann::json ps = nlohmann::json::array();
  bool decreasing_all = true;
  for (auto& p : profiles) {
    bool decreasing = true;
    for (size_t k = 0; k < p.points.size(); ++k) {
      csv.row(p.lambda, p.delta, e.shifts[k], p.points[k].distance, p.points[k].norm);
      if (k > 0 && !(p.points[k].norm < p.points[k - 1].norm)) decreasing = false;
    }
    decreasing_all = decreasing_all && decreasing;
    auto pj = p.to_json();
    pj["strictly_decreasing"] = decreasing;
    ps.push_back(pj);
  }
  // rates ordered by delta
  std::vector<size_t> order(profiles.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b2) { return profiles[a].delta < profiles[b2].delta; });
  bool rates_increasing = true;
  for (size_t k = 1; k < order.size(); ++k)
    if (!(profiles[order[k]].fit.rate > profiles[order[k - 1]].fit.rate)) rates_increasing = false;
  nlohmann::json j{{"schema_version", kSchemaVersion},
                   {"csv_columns_version", 1},
                   {"N", N},
                   {"epsilon", eps},
                   {"lambda_min", lmin},
                   {"dimension", h.dim()},
                   {"profiles", ps},
                   {"strictly_decreasing", decreasing_all},
                   {"rates_increase_with_delta", rates_increasing}};
  if (oracle) j["oracle_max_relative_difference"] = *std::max_element(oracle_gap.begin(), oracle_gap.end());
  w.csv("green_decay.csv", csv);
  w.json("green_decay.json", j);
  if (checks) *checks = decreasing_all && rates_increasing;
  return j;
}

// --- montecarlo -----------------------------------------------------------

nlohmann::json do_montecarlo(const RunConfig& c, const CellSetup& s, Writer& w, int workers) {
  const auto& e = c.experiment;
  Csv csv({"N", "epsilon", "seed", "sample", "lambda_min", "gap", "hit"});
  nlohmann::json per_n = nlohmann::json::array();
  std::vector<TailEstimate> ests;
  for (int N : e.Ns) {
    const auto b = box_setup(c, N);
    BoxModel model{&b.grid, b.h0, &s.family, s.spectrum.lambda0, mode_of(c)};
    const double eps = sampling_epsilon(e, N);
    const double thr = 1.0 / std::sqrt(static_cast<double>(N));
    const auto res = tail_probability(model, e.distribution, eps, thr, e.samples, c.seed, workers);
    for (const auto& r : res.records) csv.row(N, eps, c.seed, r.sample, r.lambda_min, r.gap, r.hit);
    nlohmann::json row{{"N", N}, {"epsilon", eps}, {"threshold", thr}, {"estimate", res.estimate.to_json()}};
    if (e.distribution.e_abs() > 0) {
      const auto in = epsilon_interval(N, e.gamma, e.c1, e.c2, e.distribution.e_abs());
      row["I_N"] = {{"lo", in.lo}, {"hi", in.hi}, {"empty", in.empty()}};
      row["epsilon_in_I_N"] = !in.empty() && eps >= in.lo && eps <= in.hi;
    }
    per_n.push_back(row);
    ests.push_back(res.estimate);
  }
  nlohmann::json direction = nlohmann::json::array();
  for (size_t i = 1; i < ests.size(); ++i) {
    const bool dec = ests[i].estimate < ests[i - 1].estimate;
    const bool separated = ests[i].ci.hi < ests[i - 1].ci.lo;
    direction.push_back({{"from_N", e.Ns[i - 1]}, {"to_N", e.Ns[i]}, {"decreasing", dec}, {"ci_separated", separated}});
  }
  nlohmann::json j{{"schema_version", kSchemaVersion},
                   {"csv_columns_version", 1},
                   {"distribution", e.distribution.to_json()},
                   {"per_N", per_n},
                   {"direction", direction},
                   {"note", "the theorem's numeric bound is vacuous at these N; direction of effect is reported"}};
  if (e.distribution.e_abs() > 0 && !e.ld_K.empty()) {
    const auto ld = large_deviation_sweep(e.distribution, e.ld_K, c.geometry.box.n, e.ld_samples, c.seed);
    Csv ldc({"K", "samples", "hits", "estimate", "ci_low", "ci_high"});
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : ld.rows) {
      ldc.row(r.K, r.estimate.samples, r.estimate.hits, r.estimate.estimate, r.estimate.ci.lo, r.estimate.ci.hi);
      rows.push_back({{"K", r.K}, {"estimate", r.estimate.to_json()}});
    }
    j["large_deviation"] = {{"rows", rows},
                            {"c4_hat", std::isfinite(ld.c4_hat) ? nlohmann::json(ld.c4_hat) : nlohmann::json(nullptr)}};
    w.csv("large_deviation.csv", ldc);
  }
  w.csv("montecarlo.csv", csv);
  w.json("montecarlo.json", j);
  return j;
}

// --- ils ------------------------------------------------------------------

nlohmann::json do_ils(const RunConfig& c, const CellSetup& s, Writer& w, int workers) {
  const auto& e = c.experiment;
  const int N = e.Ns.front();
  const auto b = box_setup(c, N);
  BoxModel model{&b.grid, b.h0, &s.family, s.spectrum.lambda0, mode_of(c)};
  const double eps = sampling_epsilon(e, N);
  SubBox b2 = e.base_box;
  b2.corner[0] += e.shifts.back();
  const auto grid = ils_lambda_grid(s.spectrum.lambda0, N, e.lambda_points);
  const auto res = ils_experiment(model, e.distribution, eps, e.base_box, b2, grid, e.c5, e.samples, c.seed, workers);
  Csv csv({"N", "epsilon", "seed", "sample", "lambda_min", "gap", "gap_event", "decay_pass", "min_margin"});
  for (const auto& r : res.samples)
    csv.row(N, eps, c.seed, r.sample, r.lambda_min, r.gap, r.gap_event, r.decay_pass, r.min_margin);
  nlohmann::json j = res.to_json();
  j["schema_version"] = kSchemaVersion;
  j["csv_columns_version"] = 1;
  j["N"] = N;
  j["epsilon"] = eps;
  j["c5"] = e.c5;
  w.csv("ils.csv", csv);
  w.json("ils.json", j);
  return j;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_manifest(const std::string& sub, const RunConfig& c, int workers, const RunArtifacts& art, double seconds) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : art.files) {
    std::ifstream in(art.directory / f, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files.push_back({{"name", f}, {"bytes", ss.str().size()}, {"fnv1a64", fmt::format("{:016x}", fnv1a(ss.str()))}});
  }
  nlohmann::json m{{"schema_version", kSchemaVersion},
                   {"tool", "specband"},
                   {"version", SPECBAND_VERSION},
                   {"subcommand", sub},
                   {"seed", c.seed},
                   {"workers", workers},
                   {"config", config_to_json(c)},
                   {"config_yaml", emit_config(c)},
                   {"derived", art.derived},
                   {"files", files},
                   {"wall_seconds", seconds}};
  write_atomic(art.directory / "manifest.json", m.dump(2) + "\n");
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"check-assumptions", "eigen", "sweep", "green-decay",
                                          "montecarlo", "ils", "verify"};
  return s;
}

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
  }
}

RunArtifacts run(const std::string& sub, const RunConfig& config, const fs::path& out, int workers) {
  const auto t0 = std::chrono::steady_clock::now();
  validate_config(config);
  if (sub == "verify") {
    RunArtifacts art;
    art.directory = out;
    Writer w(out, config.output);
    nlohmann::json steps = nlohmann::json::array();
    bool ok = true;
    for (const std::string step : {"check-assumptions", "sweep", "green-decay", "montecarlo"}) {
      spdlog::info("verify: {}", step);
      const auto r = run(step, config, out / step, workers);
      ok = ok && r.checks_ok;
      if (art.derived.is_null()) art.derived = r.derived;
      steps.push_back({{"step", step}, {"checks_ok", r.checks_ok}, {"summary", r.summary}});
    }
    art.checks_ok = ok;
    art.summary = {{"schema_version", kSchemaVersion}, {"checks_ok", ok}, {"steps", steps}};
    w.put("verify.json", art.summary.dump(2) + "\n");
    art.files = w.files();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(sub, config, workers, art, secs);
    return art;
  }

  Writer w(out, config.output);
  const CellSetup s = build_cell(config);
  const CellAnalysis a = analyze(s);
  RunArtifacts art;
  art.directory = out;
  art.derived = derived_constants(config, s, a);
  spdlog::info("{}: lambda0 = {:.12g}, c0 = {:.6g}", sub, s.spectrum.lambda0, a.c0);
  if (sub == "check-assumptions") {
    art.summary = do_check_assumptions(config, s, a, w);
    art.checks_ok = a.a1_ok && a.a2_ok;
  } else if (sub == "eigen") {
    art.summary = do_eigen(config, s, w, workers);
  } else if (sub == "sweep") {
    art.summary = do_sweep(config, s, w, workers, &art.checks_ok);
  } else if (sub == "green-decay") {
    art.summary = do_green(config, s, w, workers, &art.checks_ok);
  } else if (sub == "montecarlo") {
    art.summary = do_montecarlo(config, s, w, workers);
  } else if (sub == "ils") {
    art.summary = do_ils(config, s, w, workers);
    art.checks_ok = art.summary["chain_exceptions"].get<long>() == 0;
  } else {
    throw ConfigError("unknown subcommand '" + sub + "'");
  }
  art.files = w.files();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(sub, config, workers, art, secs);
  return art;
}

std::string default_reference_config() { return std::string(SPECBAND_CONFIG_DIR) + "/reference.yaml"; }

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("specband");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("SPECBAND_LOG")) {
    const auto l = spdlog::level::from_str(lvl);
    // from_str maps unknown names to off; only accept the real "off"
    if (l != spdlog::level::off || std::string(lvl) == "off") spdlog::set_level(l);
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"specband: random block-perturbed operators on finite layer segments"};
  app.set_version_flag("--version", SPECBAND_VERSION);
  app.require_subcommand(1);
  std::string config_path;
  int workers = default_workers();
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  for (const auto& name : subcommands()) {
    auto* sc = app.add_subcommand(name);
    sc->add_option("--config", config_path, "run config (YAML)")->check(CLI::ExistingFile);
    sc->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sc->add_option("--seed", seed, "master seed, overrides the config");
    sc->add_option("--out", out_dir, "output directory, overrides the config");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    if (config_path.empty()) {
      if (sub != "verify") throw ConfigError("--config is required");
      config_path = default_reference_config();
    }
    RunConfig config = load_config(config_path);
    if (seed) config.seed = *seed;
    if (!out_dir.empty()) config.output.directory = out_dir;
    const auto art = run(sub, config, config.output.directory, workers);
    std::cout << art.summary.dump(2) << "\n";
    if (sub == "verify" && !art.checks_ok) return kExitCheckFailed;
    return kExitOk;
  } catch (const ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kExitConfig;
  } catch (const DomainError& e) {
    spdlog::error("invalid input: {}", e.what());
    return kExitConfig;
  } catch (const SolverError& e) {
    spdlog::error("solver failure: {} (residual {:.3e})", e.what(), e.residual());
    return kExitSolver;
  } catch (const IoError& e) {
    spdlog::error("i/o failure: {}", e.what());
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    spdlog::error("i/o failure: {}", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    spdlog::error("error: {}", e.what());
    return kExitCheckFailed;
  }
}

}  // namespace specband::cli
