#pragma once

#include "algshape/gmfit.hpp"
#include "algshape/poly2d.hpp"
#include "algshape/recover.hpp"
#include "algshape/sampler.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace algshape {

/// Named reconstruction experiments at desk scale, T = 1 throughout.
struct ScenarioConfig {
  std::string name;
  std::string description;
  std::string fixture;     // bounded-quartic, unbounded-quartic, ellipse, bezier
  int m = 6;               // kernel order
  double L = 11.0;         // sampling plane half-width
  double region = 11.0;    // half-width of the PSNR region
  int K = 13;              // generalized index set [-K, K]
  int degree = 4;
  AnnihilationMode mode = AnnihilationMode::Generalized;
  WindowPolicy window_policy = WindowPolicy::Grid;
  Cascade cascade = Cascade::Auto;
  double snr_db = std::numeric_limits<double>::infinity();
  int resolution = 64;  // sampler sub-cells per unit
};

std::vector<std::string> scenario_names();
/// Throws InputError for an unknown name.
ScenarioConfig scenario_config(const std::string& name);

struct ScenarioFixture {
  std::optional<BivariatePolynomial> polynomial;
  std::optional<Raster> raster;  // non-algebraic truth at 256 px/unit
  SampleGrid clean;
};

ScenarioFixture make_fixture(const ScenarioConfig& config, std::uint64_t fixture_seed);

struct TrialResult {
  std::uint64_t noise_seed = 0;
  double psnr_ls = 0.0;
  double psnr_qp = 0.0;
  double psnr_final = 0.0;
  RecoveryResult recovery;
};

struct ScenarioRun {
  ScenarioConfig config;
  std::uint64_t fixture_seed = 0;
  std::vector<TrialResult> trials;
  double seconds = 0.0;

  double median_ls() const;
  double median_qp() const;
  double median_final() const;
};

/// PSNR (256 px/unit over the scenario region) of a reconstruction against
/// the fixture.
double fixture_psnr(const ScenarioConfig& config, const ScenarioFixture& fixture, const BivariatePolynomial& test);

/// Runs `trials` noise realizations (seeds 1..trials; one trial when the
/// scenario is noiseless). gm is fitted on the fly when null.
ScenarioRun run_scenario(const ScenarioConfig& config, int trials, std::uint64_t fixture_seed = 1,
                         const GMCoefficients* gm = nullptr);

nlohmann::json to_json(const ScenarioConfig& c);
nlohmann::json to_json(const ScenarioRun& r);

double median(std::vector<double> values);

}  // namespace algshape
