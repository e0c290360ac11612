#include "algshape/scenarios.hpp"

#include "algshape/errors.hpp"
#include "algshape/metrics.hpp"
#include "algshape/shapegen.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>

namespace algshape {

namespace {

ScenarioConfig noisy_quartic(const std::string& name, const std::string& description, int m, double L, int K,
                             double snr) {
  ScenarioConfig c;
  c.name = name;
  c.description = description;
  c.fixture = "bounded-quartic";
  c.m = m;
  c.L = L;
  c.region = 11.0;
  c.K = K;
  c.snr_db = snr;
  return c;
}

const std::array<Eigen::Vector2d, 4> kBezierControl{Eigen::Vector2d(-4.5, -3.5), Eigen::Vector2d(4.5, -4.0),
                                                    Eigen::Vector2d(4.0, 4.5), Eigen::Vector2d(-5.0, 3.0)};

nlohmann::json finite_or_inf(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf"); }

}  // namespace

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::vector<std::string> scenario_names() {
  return {"noiseless", "kernel-b2", "kernel-b4", "kernel-b6", "noisy-17db", "noisy-22db", "ellipse", "unbounded", "bezier"};
}

ScenarioConfig scenario_config(const std::string& name) {
  if (name == "noiseless") {
    ScenarioConfig c;
    c.name = name;
    c.description = "noiseless 11x11 samples, conventional moments";
    c.fixture = "bounded-quartic";
    c.m = 6;
    c.L = 2.0;
    c.region = 2.0;
    c.mode = AnnihilationMode::Conventional;
    c.resolution = 1024;
    return c;
  }
  if (name == "kernel-b2") return noisy_quartic(name, "beta2, 33x33 samples at 27 dB", 2, 15.0, 15, 27.0);
  if (name == "kernel-b4") return noisy_quartic(name, "beta4, 31x31 samples at 27 dB", 4, 13.0, 14, 27.0);
  if (name == "kernel-b6") return noisy_quartic(name, "beta6, 29x29 samples at 27 dB", 6, 11.0, 13, 27.0);
  if (name == "noisy-17db") return noisy_quartic(name, "beta6, 29x29 samples at 17 dB", 6, 11.0, 13, 17.0);
  if (name == "noisy-22db") return noisy_quartic(name, "beta6, 29x29 samples at 22 dB", 6, 11.0, 13, 22.0);
  if (name == "ellipse") {
    ScenarioConfig c;
    c.name = name;
    c.description = "ellipse reconstructed with a degree-4 model";
    c.fixture = "ellipse";
    c.m = 2;
    c.L = 12.0;
    c.region = 12.0;
    c.K = 12;
    c.cascade = Cascade::Always;
    c.resolution = 1024;
    return c;
  }
  if (name == "unbounded") {
    ScenarioConfig c;
    c.name = name;
    c.description = "unbounded shape, 39x39 samples at 25 dB";
    c.fixture = "unbounded-quartic";
    c.m = 2;
    c.L = 18.0;
    c.region = 18.0;
    c.K = 15;
    c.window_policy = WindowPolicy::Plane;
    c.snr_db = 25.0;
    return c;
  }
  if (name == "bezier") {
    ScenarioConfig c;
    c.name = name;
    c.description = "Bezier boundary with four control points, 15x15 noiseless samples";
    c.fixture = "bezier";
    c.m = 2;
    c.L = 6.0;
    c.region = 6.0;
    c.K = 6;
    c.cascade = Cascade::Always;
    return c;
  }
  throw InputError("unknown scenario '" + name + "'");
}

ScenarioFixture make_fixture(const ScenarioConfig& config, std::uint64_t fixture_seed) {
  const ImagePlane plane{config.L, 1.0};
  const BSplineKernel kernel(config.m);
  ScenarioFixture f;
  if (config.fixture == "bounded-quartic") {
    f.polynomial = gen_bounded_quartic(fixture_seed, ImagePlane{config.region, 1.0});
  } else if (config.fixture == "unbounded-quartic") {
    f.polynomial = gen_unbounded_quartic(fixture_seed, plane);
  } else if (config.fixture == "ellipse") {
    f.polynomial = gen_conic({1.0, -0.5}, {5.0, 3.0}, 0.4);
  } else if (config.fixture == "bezier") {
    f.raster = gen_bezier_shape(kBezierControl, plane, 256).raster;
  } else {
    throw InputError("unknown fixture kind '" + config.fixture + "'");
  }
  if (f.polynomial) {
    f.clean = sample_shape(*f.polynomial, plane, kernel, config.resolution);
  } else {
    const IndexRange r = default_index_range(plane, kernel);
    f.clean = sample_raster(*f.raster, plane, kernel, r, r);
  }
  return f;
}

double fixture_psnr(const ScenarioConfig& config, const ScenarioFixture& fixture, const BivariatePolynomial& test) {
  if (fixture.raster) return psnr(*fixture.raster, test);
  return psnr(fixture.polynomial->with_degree(std::max(fixture.polynomial->degree(), test.degree())), test,
              ImagePlane{config.region, 1.0});
}

double ScenarioRun::median_ls() const {
  std::vector<double> v;
  for (const auto& t : trials) v.push_back(t.psnr_ls);
  return median(v);
}

double ScenarioRun::median_qp() const {
  std::vector<double> v;
  for (const auto& t : trials) v.push_back(t.psnr_qp);
  return median(v);
}

double ScenarioRun::median_final() const {
  std::vector<double> v;
  for (const auto& t : trials) v.push_back(t.psnr_final);
  return median(v);
}

ScenarioRun run_scenario(const ScenarioConfig& config, int trials, std::uint64_t fixture_seed,
                         const GMCoefficients* gm) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioRun run;
  run.config = config;
  run.fixture_seed = fixture_seed;
  std::optional<GMCoefficients> fitted;
  if (config.mode == AnnihilationMode::Generalized && !gm) {
    fitted = fit_gm(BSplineKernel(config.m), 6, config.K);
    gm = &*fitted;
  }
  const ScenarioFixture fixture = make_fixture(config, fixture_seed);
  const bool noisy = std::isfinite(config.snr_db);
  const int count = noisy ? std::max(trials, 1) : 1;
  PipelineOptions opt;
  opt.degree = config.degree;
  opt.mode = config.mode;
  opt.window_policy = config.window_policy;
  opt.cascade = config.cascade;
  for (int t = 0; t < count; ++t) {
    TrialResult tr;
    tr.noise_seed = noisy ? static_cast<std::uint64_t>(t + 1) : 0;
    const SampleGrid grid = noisy ? add_noise(fixture.clean, config.snr_db, tr.noise_seed) : fixture.clean;
    tr.recovery = run_pipeline(grid, opt, gm);
    tr.psnr_ls = fixture_psnr(config, fixture, tr.recovery.ls.p);
    tr.psnr_qp = tr.recovery.qp.ran ? fixture_psnr(config, fixture, tr.recovery.qp.p) : tr.psnr_ls;
    tr.psnr_final = fixture_psnr(config, fixture, tr.recovery.final_stage.p);
    run.trials.push_back(std::move(tr));
  }
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

nlohmann::json to_json(const ScenarioConfig& c) {
  return {{"name", c.name},
          {"description", c.description},
          {"fixture", c.fixture},
          {"m", c.m},
          {"L", c.L},
          {"psnr_region", c.region},
          {"K", c.K},
          {"degree", c.degree},
          {"mode", to_string(c.mode)},
          {"window_policy", to_string(c.window_policy)},
          {"cascade", to_string(c.cascade)},
          {"snr_db", finite_or_inf(c.snr_db)},
          {"resolution", c.resolution},
          {"psnr_resolution", 256}};
}

nlohmann::json to_json(const ScenarioRun& r) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : r.trials) {
    trials.push_back({{"noise_seed", t.noise_seed},
                      {"psnr_ls_db", finite_or_inf(t.psnr_ls)},
                      {"psnr_qp_db", finite_or_inf(t.psnr_qp)},
                      {"psnr_final_db", finite_or_inf(t.psnr_final)},
                      {"recovery", to_json(t.recovery)}});
  }
  return {{"config", to_json(r.config)},
          {"fixture_seed", r.fixture_seed},
          {"median_psnr_db",
           {{"ls", finite_or_inf(r.median_ls())},
            {"qp", finite_or_inf(r.median_qp())},
            {"final", finite_or_inf(r.median_final())}}},
          {"seconds", r.seconds},
          {"trials", trials}};
}

}  // namespace algshape
