// algshape: generate shapes, sample them, fit generalized-moment coefficients,
// reconstruct and evaluate. Exit codes: 0 ok, 2 input error, 3 numerical failure.

#include "json_config.hpp"

#include "algshape/errors.hpp"
#include "algshape/gmfit.hpp"
#include "algshape/metrics.hpp"
#include "algshape/recover.hpp"
#include "algshape/sampler.hpp"
#include "algshape/scenarios.hpp"
#include "algshape/shapegen.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace algshape;
using nlohmann::json;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

json finite_or_inf(double v) { return std::isfinite(v) ? json(v) : json("inf"); }

std::string manifest_path(const std::string& output) { return output + ".manifest.json"; }

/// The resolved configuration of the whole invocation plus the files it wrote.
void write_manifest(const CLI::App& app, const std::string& command, const std::vector<std::string>& outputs,
                    const std::string& path, const json& extra = json::object()) {
  cli::ConfigJSON fmt;
  json m = {{"command", command}, {"config", fmt.to_json(&app, true)}, {"outputs", outputs}};
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = *it;
  write_json(m, path);
}

void write_boundary_csv(const BivariatePolynomial& p, const ImagePlane& plane, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out.precision(10);
  out << "x,y\n";
  for (const auto& q : zero_set_points(p, plane)) out << q.x() << ',' << q.y() << '\n';
}

/// Accepts a polynomial JSON or a reconstruction result (its final stage).
BivariatePolynomial polynomial_or_result(const std::string& path) {
  const json j = read_json(path);
  if (j.contains("final") && j["final"].is_object()) return polynomial_from_json(j["final"]["polynomial"]);
  return polynomial_from_json(j);
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string kind;
  std::uint64_t seed = 1;
  double L = 11.0;
  double fill = 0.6;
  std::optional<double> circle;
  std::vector<double> center{0.0, 0.0};
  std::vector<double> axes{1.0, 1.0};
  double angle = 0.0;
  std::vector<double> normal{1.0, 0.0};
  double offset = 0.0;
  std::vector<double> points;
  int resolution = 256;
  std::string output;
};

void add_generate(CLI::App& app, GenerateArgs& a) {
  auto* sub = app.add_subcommand("generate", "Generate a test shape (polynomial JSON or PGM raster)");
  sub->add_option("--kind", a.kind, "Shape kind")
      ->required()
      ->check(CLI::IsMember({"bounded-quartic", "conic", "half-space", "unbounded-quartic", "bezier"}));
  sub->add_option("--seed", a.seed, "Random seed")->capture_default_str();
  sub->add_option("--L", a.L, "Half-width of the image plane")->capture_default_str();
  sub->add_option("--fill", a.fill, "Bounded quartic: radius as a fraction of L")->capture_default_str();
  sub->add_option("--circle", a.circle, "Conic: circle of this radius at the origin");
  sub->add_option("--center", a.center, "Conic center x y")->expected(2)->capture_default_str();
  sub->add_option("--axes", a.axes, "Conic semi-axes a b")->expected(2)->capture_default_str();
  sub->add_option("--angle", a.angle, "Conic rotation (radians)")->capture_default_str();
  sub->add_option("--normal", a.normal, "Half-space normal nx ny")->expected(2)->capture_default_str();
  sub->add_option("--offset", a.offset, "Half-space offset")->capture_default_str();
  sub->add_option("--points", a.points, "Bezier: four control points x1 y1 ... x4 y4")->expected(8);
  sub->add_option("--resolution", a.resolution, "Bezier raster pixels per unit")->capture_default_str();
  sub->add_option("-o,--output", a.output, "Output file")->required();
}

void run_generate(const CLI::App& app, const GenerateArgs& a) {
  const ImagePlane plane{a.L, 1.0};
  plane.validate();
  std::vector<std::string> files{a.output};
  json params = {{"seed", a.seed}, {"L", a.L}};
  if (a.kind == "bezier") {
    if (a.points.size() != 8) throw InputError("--points needs eight numbers");
    std::array<Eigen::Vector2d, 4> cp;
    for (int i = 0; i < 4; ++i) cp[i] = {a.points[2 * i], a.points[2 * i + 1]};
    const BezierShape shape = gen_bezier_shape(cp, plane, a.resolution);
    write_pgm(shape.raster, a.output);
    const std::string poly = a.output + ".polyline.csv";
    std::ofstream out(poly);
    out.precision(10);
    out << "x,y\n";
    for (const auto& q : shape.polyline) out << q.x() << ',' << q.y() << '\n';
    files.push_back(poly);
    params["points"] = a.points;
    params["resolution"] = a.resolution;
    params["polygon_area"] = shape.polygon_area;
  } else {
    BivariatePolynomial p;
    if (a.kind == "bounded-quartic") {
      p = gen_bounded_quartic(a.seed, plane, a.fill);
      params["fill"] = a.fill;
    } else if (a.kind == "unbounded-quartic") {
      p = gen_unbounded_quartic(a.seed, plane);
    } else if (a.kind == "conic") {
      if (a.circle) {
        p = gen_conic({0.0, 0.0}, {*a.circle, *a.circle}, 0.0);
        params["circle"] = *a.circle;
      } else {
        p = gen_conic({a.center[0], a.center[1]}, {a.axes[0], a.axes[1]}, a.angle);
        params["center"] = a.center;
        params["axes"] = a.axes;
        params["angle"] = a.angle;
      }
    } else {
      p = gen_half_space({a.normal[0], a.normal[1]}, a.offset);
      params["normal"] = a.normal;
      params["offset"] = a.offset;
    }
    save_polynomial(p, a.output);
  }
  write_manifest(app, "generate", files, manifest_path(a.output),
                 {{"fixture", fixture_manifest(a.kind, params, "", files)}});
}

// ------------------------------------------------------------------ sample

struct SampleArgs {
  std::string shape;
  std::string raster;
  int m = 6;
  double L = 11.0;
  double T = 1.0;
  std::optional<double> snr;
  std::uint64_t seed = 0;
  int resolution = 64;
  std::string output;
};

void add_sample(CLI::App& app, SampleArgs& a) {
  auto* sub = app.add_subcommand("sample", "Sample a shape through a B-spline kernel");
  auto* shape = sub->add_option("--shape", a.shape, "Polynomial JSON");
  auto* raster = sub->add_option("--raster", a.raster, "Binary PGM covering the plane");
  shape->excludes(raster);
  sub->add_option("--m", a.m, "B-spline order")->capture_default_str();
  sub->add_option("--L", a.L, "Half-width of the image plane")->capture_default_str();
  sub->add_option("--T", a.T, "Sampling period")->capture_default_str();
  sub->add_option("--snr", a.snr, "Sample SNR in dB (noiseless when omitted)");
  sub->add_option("--seed", a.seed, "Noise seed")->capture_default_str();
  sub->add_option("--resolution", a.resolution, "Quadrature sub-cells per unit")->capture_default_str();
  sub->add_option("-o,--output", a.output, "Samples CSV (metadata goes to the .json sidecar)")->required();
}

void run_sample(const CLI::App& app, const SampleArgs& a) {
  if (a.shape.empty() == a.raster.empty()) throw InputError("give exactly one of --shape or --raster");
  const ImagePlane plane{a.L, a.T};
  plane.validate();
  const BSplineKernel kernel(a.m);
  SampleGrid grid;
  if (!a.shape.empty()) {
    grid = sample_shape(load_polynomial(a.shape), plane, kernel, a.resolution);
  } else {
    std::ifstream probe(a.raster, std::ios::binary);
    if (!probe) throw InputError("cannot open " + a.raster);
    std::string magic;
    int w = 0;
    probe >> magic >> w;
    if (magic != "P5" || w <= 0) throw InputError(a.raster + " is not a binary PGM");
    const Raster r = read_pgm(a.raster, -a.L, a.L, 2.0 * a.L / w);
    const IndexRange range = default_index_range(plane, kernel);
    grid = sample_raster(r, plane, kernel, range, range);
  }
  if (a.snr) grid = add_noise(grid, *a.snr, a.seed);
  write_samples(grid, a.output);
  const std::string sidecar = fs::path(a.output).replace_extension(".json").string();
  write_manifest(app, "sample", {a.output, sidecar}, manifest_path(a.output));
}

// ------------------------------------------------------------------ fit-gm

struct FitArgs {
  int m = 6;
  int P = 6;
  int K = 13;
  double grid_step = 0.25;
  int max_iter = 5000;
  std::string output;
};

void add_fit(CLI::App& app, FitArgs& a) {
  auto* sub = app.add_subcommand("fit-gm", "Fit generalized-moment coefficient sets");
  sub->add_option("--m", a.m, "B-spline order")->capture_default_str();
  sub->add_option("--P", a.P, "Highest moment order")->capture_default_str();
  sub->add_option("--K", a.K, "Index set [-K, K]")->capture_default_str();
  sub->add_option("--grid-step", a.grid_step, "Positivity enforcement spacing")->capture_default_str();
  sub->add_option("--max-iter", a.max_iter, "Active-set iteration cap")->capture_default_str();
  sub->add_option("-o,--output", a.output, "Coefficient JSON")->required();
}

void run_fit(const CLI::App& app, const FitArgs& a) {
  const BSplineKernel kernel(a.m);
  const GMProblem problem = build_gm_objective(kernel, a.P, a.K, a.grid_step);
  GMSolveOptions opt;
  opt.max_iter = a.max_iter;
  const GMCoefficients init = default_init(kernel, a.P, a.K);
  const GMCoefficients c = solve_gm(problem, init, opt);
  save_gm(c, a.output);
  const PositivityReport pos = check_positivity(c, a.grid_step);
  const json summary = {{"objective", c.objective},
                        {"objective_init", gm_objective(init)},
                        {"iterations", c.iterations},
                        {"status", c.status},
                        {"window", c.window()},
                        {"min_g_grid", pos.min_grid},
                        {"min_g_interior", pos.min_interior},
                        {"max_g", pos.max_grid}};
  std::cout << summary.dump(2) << '\n';
  if (pos.min_interior <= 1e-6 * pos.max_grid) {
    std::cerr << "warning: fitted g is not strictly positive on the interior grid\n";
  }
  write_manifest(app, "fit-gm", {a.output}, manifest_path(a.output), {{"summary", summary}});
}

// ------------------------------------------------------------- reconstruct

struct ReconstructArgs {
  std::string samples;
  int n = 4;
  std::string mode = "generalized";
  std::string coefs;
  std::string rs_policy = "balanced";
  std::string window_policy = "grid";
  std::string cascade = "auto";
  double epsilon = 0.2;
  double delta = 1e-3;
  double sigma = 0.0;
  int max_iter = 10;
  double fd_step = 1e-2;
  std::string output;
  std::string render;
  std::string boundary;
  int render_resolution = 256;
};

void add_reconstruct(CLI::App& app, ReconstructArgs& a) {
  auto* sub = app.add_subcommand("reconstruct", "Recover the polynomial from samples");
  sub->add_option("--samples", a.samples, "Samples CSV with .json sidecar")->required();
  sub->add_option("--n", a.n, "Polynomial degree")->capture_default_str();
  sub->add_option("--mode", a.mode, "Moment kind")
      ->check(CLI::IsMember({"conventional", "generalized"}))
      ->capture_default_str();
  sub->add_option("--coefs", a.coefs, "Generalized coefficient JSON (generalized mode)");
  sub->add_option("--rs-policy", a.rs_policy, "Shift pairs")
      ->check(CLI::IsMember({"balanced", "full"}))
      ->capture_default_str();
  sub->add_option("--window-policy", a.window_policy, "Window admission")
      ->check(CLI::IsMember({"grid", "plane"}))
      ->capture_default_str();
  sub->add_option("--cascade", a.cascade, "Stages after least squares")
      ->check(CLI::IsMember({"auto", "always", "ls-only"}))
      ->capture_default_str();
  sub->add_option("--epsilon", a.epsilon, "Sign threshold")->capture_default_str();
  sub->add_option("--delta", a.delta, "Outside margin")->capture_default_str();
  sub->add_option("--sigma", a.sigma, "Coordinate scale (0 = automatic)")->capture_default_str();
  sub->add_option("--max-iter", a.max_iter, "Refinement iterations")->capture_default_str();
  sub->add_option("--fd-step", a.fd_step, "Finite-difference step")->capture_default_str();
  sub->add_option("-o,--output", a.output, "Result JSON")->required();
  sub->add_option("--render", a.render, "PGM of the final shape");
  sub->add_option("--boundary", a.boundary, "CSV of final zero-set points");
  sub->add_option("--render-resolution", a.render_resolution, "Pixels per unit")->capture_default_str();
}

void run_reconstruct(const CLI::App& app, const ReconstructArgs& a) {
  const SampleGrid grid = read_samples(a.samples);
  PipelineOptions opt;
  opt.degree = a.n;
  opt.mode = annihilation_mode_from_string(a.mode);
  opt.rs_policy = rs_policy_from_string(a.rs_policy);
  opt.window_policy = window_policy_from_string(a.window_policy);
  opt.cascade = cascade_from_string(a.cascade);
  opt.epsilon = a.epsilon;
  opt.delta = a.delta;
  opt.sigma = a.sigma;
  opt.refine.max_iter = a.max_iter;
  opt.refine.fd_step = a.fd_step;
  std::optional<GMCoefficients> gm;
  if (opt.mode == AnnihilationMode::Generalized) {
    if (a.coefs.empty()) throw InputError("generalized mode needs --coefs");
    gm = load_gm(a.coefs);
  }
  const RecoveryResult r = run_pipeline(grid, opt, gm ? &*gm : nullptr);
  write_json(to_json(r, false), a.output);
  std::vector<std::string> files{a.output};
  if (!a.render.empty()) {
    write_pgm(render_shape(r.result(), grid.plane, a.render_resolution), a.render);
    files.push_back(a.render);
  }
  if (!a.boundary.empty()) {
    write_boundary_csv(r.result(), grid.plane, a.boundary);
    files.push_back(a.boundary);
  }
  std::cerr << "timings (s): moments " << r.seconds_moments << ", ls " << r.seconds_ls << ", qp " << r.seconds_qp
            << ", refine " << r.seconds_refine << '\n';
  write_manifest(app, "reconstruct", files, manifest_path(a.output));
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string truth;
  std::string truth_raster;
  std::string test;
  double L = 0.0;
  int resolution = 256;
  std::string samples;
  std::string output;
};

void add_evaluate(CLI::App& app, EvaluateArgs& a) {
  auto* sub = app.add_subcommand("evaluate", "Compare a reconstruction with the truth");
  auto* t = sub->add_option("--truth", a.truth, "True polynomial JSON");
  auto* tr = sub->add_option("--truth-raster", a.truth_raster, "True shape as PGM covering [-L, L]^2");
  t->excludes(tr);
  sub->add_option("--test", a.test, "Polynomial JSON or reconstruction result")->required();
  sub->add_option("--L", a.L, "Half-width of the evaluation region")->required();
  sub->add_option("--resolution", a.resolution, "Pixels per unit")->capture_default_str();
  sub->add_option("--samples", a.samples, "Input samples, for the sample-SNR consistency");
  sub->add_option("-o,--output", a.output, "Metrics JSON")->required();
}

void run_evaluate(const CLI::App& app, const EvaluateArgs& a) {
  if (a.truth.empty() == a.truth_raster.empty()) throw InputError("give exactly one of --truth or --truth-raster");
  const ImagePlane region{a.L, 1.0};
  region.validate();
  const json test_json = read_json(a.test);
  const bool is_result = test_json.contains("final") && test_json["final"].is_object();
  const BivariatePolynomial test = polynomial_or_result(a.test);

  std::optional<BivariatePolynomial> truth;
  std::optional<Raster> truth_raster;
  if (!a.truth.empty()) {
    truth = load_polynomial(a.truth);
  } else {
    std::ifstream probe(a.truth_raster, std::ios::binary);
    std::string magic;
    int w = 0;
    probe >> magic >> w;
    if (magic != "P5" || w <= 0) throw InputError(a.truth_raster + " is not a binary PGM");
    truth_raster = read_pgm(a.truth_raster, -a.L, a.L, 2.0 * a.L / w);
  }
  auto eval = [&](const BivariatePolynomial& p) {
    if (truth) {
      const int deg = std::max(truth->degree(), p.degree());
      return evaluate(truth->with_degree(deg), p.with_degree(deg), region, a.resolution);
    }
    return evaluate(*truth_raster, p);
  };
  Evaluation ev = eval(test);
  if (!a.samples.empty()) {
    const SampleGrid grid = read_samples(a.samples);
    const ShapeSampler fwd(grid.plane, BSplineKernel(grid.m), grid.k_range, grid.l_range);
    ev.sample_snr_db = sample_snr(grid.values, fwd(test));
  }
  json out = to_json(ev);
  out["resolution"] = a.resolution;
  if (is_result) {
    json stages = json::object();
    for (const char* s : {"ls", "qp", "final"}) {
      if (test_json[s].is_object()) {
        stages[s] = finite_or_inf(eval(polynomial_from_json(test_json[s]["polynomial"])).psnr_db);
      }
    }
    out["stage_psnr_db"] = stages;
  }
  write_json(out, a.output);
  std::cout << out.dump(2) << '\n';
  write_manifest(app, "evaluate", {a.output}, manifest_path(a.output));
}

// ------------------------------------------------------------------- repro

struct ReproArgs {
  std::string scenario;
  int trials = 10;
  std::uint64_t fixture_seed = 1;
  std::string coefs;
  std::string out_dir = "repro_out";
};

void add_repro(CLI::App& app, ReproArgs& a) {
  auto* sub = app.add_subcommand("repro", "Run a named experiment scenario (use 'list' to see them)");
  sub->add_option("--scenario", a.scenario, "Scenario name")->required();
  sub->add_option("--trials", a.trials, "Noise realizations")->capture_default_str();
  sub->add_option("--fixture-seed", a.fixture_seed, "Shape seed")->capture_default_str();
  sub->add_option("--coefs", a.coefs, "Generalized coefficient JSON (fitted when omitted)");
  sub->add_option("--out", a.out_dir, "Output directory")->capture_default_str();
}

void run_repro(const CLI::App& app, const ReproArgs& a) {
  if (a.scenario == "list") {
    for (const auto& name : scenario_names()) {
      std::cout << name << ": " << scenario_config(name).description << '\n';
    }
    return;
  }
  const ScenarioConfig cfg = scenario_config(a.scenario);
  std::optional<GMCoefficients> gm;
  if (!a.coefs.empty()) gm = load_gm(a.coefs);
  const ScenarioRun run = run_scenario(cfg, a.trials, a.fixture_seed, gm ? &*gm : nullptr);
  fs::create_directories(a.out_dir);
  const std::string base = (fs::path(a.out_dir) / cfg.name).string();
  std::vector<std::string> files;
  json j = to_json(run);
  j.erase("seconds");
  for (auto& t : j["trials"]) t["recovery"].erase("timings_s");
  write_json(j, base + ".json");
  files.push_back(base + ".json");

  const ScenarioFixture fixture = make_fixture(cfg, a.fixture_seed);
  const ImagePlane plane{cfg.L, 1.0};
  if (fixture.polynomial) {
    save_polynomial(*fixture.polynomial, base + ".truth.json");
    write_boundary_csv(*fixture.polynomial, plane, base + ".truth_boundary.csv");
    files.push_back(base + ".truth.json");
    files.push_back(base + ".truth_boundary.csv");
  } else {
    write_pgm(*fixture.raster, base + ".truth.pgm");
    files.push_back(base + ".truth.pgm");
  }
  write_samples(fixture.clean, base + ".samples.csv");
  files.push_back(base + ".samples.csv");
  if (!run.trials.empty()) {
    const auto& first = run.trials.front().recovery;
    write_boundary_csv(first.result(), plane, base + ".final_boundary.csv");
    write_pgm(render_shape(first.result(), plane, 64), base + ".final.pgm");
    files.push_back(base + ".final_boundary.csv");
    files.push_back(base + ".final.pgm");
  }
  std::cout << cfg.name << ": median PSNR ls " << run.median_ls() << " dB, qp " << run.median_qp()
            << " dB, final " << run.median_final() << " dB over " << run.trials.size() << " trial(s)\n";
  write_manifest(app, "repro", files, base + ".manifest.json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling and reconstruction of algebraic shapes"};
  app.config_formatter(std::make_shared<cli::ConfigJSON>());
  app.set_config("--config", "", "JSON configuration file");
  app.require_subcommand(1);

  GenerateArgs gen;
  SampleArgs smp;
  FitArgs fit;
  ReconstructArgs rec;
  EvaluateArgs eva;
  ReproArgs rep;
  add_generate(app, gen);
  add_sample(app, smp);
  add_fit(app, fit);
  add_reconstruct(app, rec);
  add_evaluate(app, eva);
  add_repro(app, rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "generate") run_generate(app, gen);
    if (cmd == "sample") run_sample(app, smp);
    if (cmd == "fit-gm") run_fit(app, fit);
    if (cmd == "reconstruct") run_reconstruct(app, rec);
    if (cmd == "evaluate") run_evaluate(app, eva);
    if (cmd == "repro") run_repro(app, rep);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}
