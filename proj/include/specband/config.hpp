#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specband/geometry.hpp"
#include "specband/montecarlo.hpp"
#include "specband/operators.hpp"
#include "specband/perturbations.hpp"
#include "specband/spectral.hpp"

namespace specband {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeometryConfig {
  BoxSpec box;
  BoundaryCondition bc;
  std::string v0 = "0";  // expression in xt (and d, params)

  bool operator==(const GeometryConfig&) const = default;
};

/// A family is given by expression strings evaluated on the cell grid.
/// Field expressions see x1..xn, xt; kernels also see y1..yn, yt. Every
/// entry of `params` is a named constant, as are `d` and `pi`.
struct FamilyConfig {
  std::string kind = "potential";  // potential magnetic metric integral deformation linear_positive
  std::string v1 = "0";
  std::string v2 = "0";
  std::vector<std::string> a;                  // magnetic: n+1 components
  std::vector<std::vector<std::string>> a_ij;  // metric: (n+1)x(n+1), empty means zero
  std::vector<std::vector<std::string>> b_ij;
  std::string k1 = "0";
  std::string k2 = "0";
  std::string g = "0";   // deformation profile
  std::string l2 = "0";  // linear_positive: diagonal of L2
  bool exactify_a1 = false;
  double t0 = 1.0;
  std::map<std::string, double> params;

  bool operator==(const FamilyConfig&) const = default;
};

struct ExperimentConfig {
  std::vector<double> epsilons{0.05};
  std::vector<int> Ns{4};
  // > 0: the sampling experiments use eps_N = epsilon_scale * N^-epsilon_exponent
  double epsilon_scale = 0;
  double epsilon_exponent = 0.25;
  int gamma = 17;
  double c1 = 1.0;
  double c2 = 1.0;
  long samples = 100;
  Distribution distribution;
  std::string eigen_mode = "auto";
  std::vector<double> probe_offsets{-0.5, -1.0, -2.0};  // green-decay: lambda = lambda_min + offset
  SubBox base_box{{0}, 1};
  std::vector<int> shifts{0, 1, 2, 3};
  int lambda_points = 3;  // ils
  double c5 = 0.1;
  std::vector<int> ld_K{1, 2, 3, 4};
  long ld_samples = 20000;

  bool operator==(const ExperimentConfig&) const = default;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json"};

  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  GeometryConfig geometry;
  FamilyConfig family;
  ExperimentConfig experiment;
  OutputConfig output;
  std::uint64_t seed = 1;

  bool operator==(const RunConfig&) const = default;
};

/// Strict parse: unknown keys, wrong types and invalid values throw
/// ConfigError. Missing keys keep their defaults.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Fully resolved YAML; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& config);
nlohmann::json config_to_json(const RunConfig& config);

/// Semantic checks beyond types (geometry invariants, list lengths).
void validate_config(const RunConfig& config);

/// Everything an experiment needs about one cell.
struct CellSetup {
  Grid cell;
  RVec v0;  // transverse samples
  CellSpectrum spectrum;
  SparseOperator cell_op;
  PerturbationFamily family;
};

std::function<double(double)> v0_function(const RunConfig& config);
CellSetup build_cell(const RunConfig& config);
/// The configured family on a given one-cell grid (used for refinement).
PerturbationFamily build_family(const RunConfig& config, const Grid& cell, const CellSpectrum& cs);

/// Box grid with N cells per side, otherwise as configured.
Grid box_grid(const RunConfig& config, int N);

/// Coupling used by the sampling experiments at box size N.
double sampling_epsilon(const ExperimentConfig& e, int N);

}  // namespace specband
