#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <map>
#include <sstream>

#include "kruppa/io.hpp"
#include "kruppa/kruppa_system.hpp"
#include "kruppa/random.hpp"
#include "kruppa/reconstruction.hpp"
#include "kruppa/robust.hpp"
#include "kruppa/selfcal.hpp"
#include "kruppa/solvers.hpp"
#include "kruppa/synth.hpp"

namespace {

using namespace kruppa;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ArityError:
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::InvalidIntrinsics:
    case ErrorCode::DegenerateInput:
    case ErrorCode::DegenerateBasis:
    case ErrorCode::GeneralPositionViolation:
      return 2;
    default:
      return 1;  // solver produced no usable solution
  }
}

struct CommonFlags {
  std::string out = "-";
  double tolerance = 1e-9;
  uint64_t seed = 1;
  double focal = 0.0;
  std::vector<double> principal;
};

Intrinsics intrinsics_from_flags(const CommonFlags& flags) {
  const double f = flags.focal > 0.0 ? flags.focal : 800.0;
  double cx = 320.0, cy = 240.0;
  if (flags.principal.size() == 2) {
    cx = flags.principal[0];
    cy = flags.principal[1];
  }
  return Intrinsics(f, f, cx, cy);
}

struct SceneInput {
  Intrinsics k1, k2;
  std::vector<Correspondence> corrs;
};

SceneInput load_scene_input(const std::string& path, const CommonFlags& flags) {
  const SceneFile file = read_scene(path);
  SceneInput in;
  if (file.intrinsics1 && file.intrinsics2) {
    in.k1 = *file.intrinsics1;
    in.k2 = *file.intrinsics2;
  } else if (flags.focal > 0.0 || flags.principal.size() == 2) {
    in.k1 = in.k2 = intrinsics_from_flags(flags);
  } else {
    throw Error(ErrorCode::ValidationError,
                path + ": no intrinsics in file; pass --focal/--principal");
  }
  in.corrs = file.correspondences;
  return in;
}

std::vector<Correspondence> require_arity(const std::vector<Correspondence>& corrs,
                                          size_t needed, const char* solver) {
  if (corrs.size() < needed) {
    std::ostringstream msg;
    msg << solver << " needs at least " << needed << " correspondences, got "
        << corrs.size();
    throw Error(ErrorCode::ArityError, msg.str());
  }
  return {corrs.begin(), corrs.begin() + needed};
}

ResultFile models_result(const std::vector<EssentialModel>& models,
                         const std::vector<Correspondence>& corrs) {
  ResultFile out;
  for (const EssentialModel& m : models) {
    ResultEntry e;
    e.matrix = m.matrix;
    e.source = to_string(m.source);
    for (const Correspondence& c : corrs) {
      e.residual = std::max(e.residual, m.epipolar_residual(c));
    }
    out.models.push_back(e);
  }
  std::sort(out.models.begin(), out.models.end(),
            [](const ResultEntry& a, const ResultEntry& b) {
              return a.residual < b.residual;
            });
  return out;
}

// Calibrated solvers report models in ray coordinates; the residual ranking
// must use matching rays rather than raw pixels.
ResultFile models_result_calibrated(const std::vector<EssentialModel>& models,
                                    const std::vector<Correspondence>& corrs,
                                    const Intrinsics& k1, const Intrinsics& k2) {
  const Mat3 k1i = k1.inverse();
  const Mat3 k2i = k2.inverse();
  std::vector<Correspondence> rays(corrs.size());
  for (size_t i = 0; i < corrs.size(); ++i) {
    const Vec3 r1 = k1i * Vec3(corrs[i].x1.x(), corrs[i].x1.y(), 1.0);
    const Vec3 r2 = k2i * Vec3(corrs[i].x2.x(), corrs[i].x2.y(), 1.0);
    rays[i].x1 = Vec2(r1.x() / r1.z(), r1.y() / r1.z());
    rays[i].x2 = Vec2(r2.x() / r2.z(), r2.y() / r2.z());
  }
  return models_result(models, rays);
}

int run_synth(const CommonFlags& flags, int n_points, double noise) {
  SceneSpec spec;
  spec.seed = flags.seed;
  spec.n_points = n_points;
  spec.noise_sigma = noise;
  spec.intrinsics1 = spec.intrinsics2 = intrinsics_from_flags(flags);
  const SceneTruth truth = generate_scene(spec);
  write_scene(flags.out, truth);
  return 0;
}

int run_solve5pt(const std::string& path, const CommonFlags& flags, bool classic) {
  const SceneInput in = load_scene_input(path, flags);
  const auto corrs = require_arity(in.corrs, 5, "the five-point solver");
  SolveOptions opts;
  opts.tolerance = flags.tolerance;
  std::vector<EssentialModel> models;
  if (classic) {
    models = solve_kruppa_5pt(corrs, iac_from_intrinsics(in.k1),
                              iac_from_intrinsics(in.k2), opts);
  } else {
    models = solve_modern_5pt(corrs, in.k1, in.k2, opts);
  }
  if (models.empty()) {
    throw Error(ErrorCode::NoSolution, "no real solution for this instance");
  }
  write_result(flags.out, models_result_calibrated(models, corrs, in.k1, in.k2));
  return 0;
}

int run_solve7pt(const std::string& path, const CommonFlags& flags) {
  const SceneFile file = read_scene(path);
  const auto corrs = require_arity(file.correspondences, 7, "the seven-point solver");
  SolveOptions opts;
  opts.tolerance = flags.tolerance;
  const auto models = solve_7pt(corrs, opts);
  if (models.empty()) {
    throw Error(ErrorCode::NoSolution, "no real solution for this instance");
  }
  write_result(flags.out, models_result(models, corrs));
  return 0;
}

int run_thm2(const std::string& path, const CommonFlags& flags) {
  if (!(flags.focal > 0.0)) {
    throw Error(ErrorCode::ValidationError,
                "thm2 needs --focal (the image-2 focal length)");
  }
  const SceneInput in = load_scene_input(path, flags);
  const auto corrs = require_arity(in.corrs, 7, "the heptagon solver");
  SolveOptions opts;
  opts.tolerance = flags.tolerance;
  const Thm2Result result =
      solve_thm2(corrs, iac_from_intrinsics(in.k1), flags.focal, opts);
  if (result.solutions.empty()) {
    throw Error(ErrorCode::NoSolution, "no real principal-point solution");
  }
  ResultFile out;
  for (const Thm2Solution& s : result.solutions) {
    ResultEntry e;
    e.matrix = s.fundamental.matrix;
    e.source = to_string(ModelSource::Theorem2);
    for (const Correspondence& c : corrs) {
      e.residual = std::max(e.residual, s.fundamental.epipolar_residual(c));
    }
    out.models.push_back(e);
    out.principal_points.push_back(s.principal_point2);
  }
  out.enumerated_orientations = result.enumerated_orientations;
  write_result(flags.out, out);
  return 0;
}

int run_selfcal(const std::string& path, const CommonFlags& flags) {
  const ResultFile input = read_result(path);
  if (input.models.empty()) {
    throw Error(ErrorCode::ValidationError,
                path + ": no models to calibrate from");
  }
  Vec2 pp1(320.0, 240.0), pp2(320.0, 240.0);
  if (flags.principal.size() == 2) {
    pp1 = pp2 = Vec2(flags.principal[0], flags.principal[1]);
  }
  // Spurious fundamental branches admit no focal length; collect candidates
  // over every model in the file.
  ResultFile out;
  for (const ResultEntry& entry : input.models) {
    const EssentialModel model =
        EssentialModel::from_matrix(entry.matrix, ModelSource::SevenPoint);
    try {
      const FocalResult focal = focal_from_f(model, pp1, pp2);
      out.focal_continuum = out.focal_continuum || focal.continuum;
      for (double c : focal.candidates) {
        const bool seen = std::any_of(
            out.focal_candidates.begin(), out.focal_candidates.end(),
            [c](double x) { return std::abs(x - c) <= 1e-9 * (1.0 + c); });
        if (!seen) out.focal_candidates.push_back(c);
      }
    } catch (const Error&) {
      // Degenerate branch; skip it.
    }
  }
  std::sort(out.focal_candidates.begin(), out.focal_candidates.end());
  write_result(flags.out, out);
  if (!out.focal_continuum && out.focal_candidates.empty()) {
    throw Error(ErrorCode::NoSolution, "no positive real focal candidate");
  }
  return 0;
}

int run_ransac(const std::string& path, const CommonFlags& flags,
               int max_iterations, double confidence, double threshold) {
  const SceneInput in = load_scene_input(path, flags);
  RansacConfig cfg;
  cfg.seed = flags.seed;
  cfg.threshold = threshold;
  cfg.max_iterations = max_iterations;
  cfg.confidence = confidence;
  const RobustResult result = ransac_pose(in.corrs, in.k1, in.k2, cfg);
  ResultFile out;
  ResultEntry e;
  e.matrix = result.model.matrix;
  e.source = to_string(result.model.source);
  for (const Correspondence& c : in.corrs) {
    e.residual = std::max(e.residual, std::sqrt(sampson_error(result.model, c)));
  }
  out.models.push_back(e);
  out.rotation = result.pose.rotation;
  out.translation = result.pose.translation;
  out.inlier_mask = result.inlier_mask;
  out.iterations = result.iterations_run;
  write_result(flags.out, out);
  return 0;
}

int run_bench(const CommonFlags& flags, int instances) {
  struct SolverStats {
    std::map<int, int> histogram;
    double seconds = 0.0;
  };
  SolverStats classic, modern, seven;

  for (int i = 0; i < instances; ++i) {
    SceneSpec spec;
    spec.seed = derive_seed(flags.seed, static_cast<uint64_t>(i));
    spec.n_points = 7;
    spec.rotation_magnitude = 0.25;
    const SceneTruth scene = generate_scene(spec);
    const std::span<const Correspondence> five(scene.correspondences.data(), 5);
    const std::span<const Correspondence> seven_pts(scene.correspondences.data(), 7);

    auto timed = [](SolverStats& stats, auto&& fn) {
      const auto t0 = std::chrono::steady_clock::now();
      int count = 0;
      try {
        count = fn();
      } catch (const Error&) {
        count = -1;  // no solution / degenerate
      }
      stats.seconds +=
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      stats.histogram[count] += 1;
    };
    timed(classic, [&] {
      return static_cast<int>(
          solve_kruppa_5pt(five, scene.iac1, scene.iac2).size());
    });
    timed(modern, [&] {
      return static_cast<int>(
          solve_modern_5pt(five, spec.intrinsics1, spec.intrinsics2).size());
    });
    timed(seven, [&] { return static_cast<int>(solve_7pt(seven_pts).size()); });
  }

  // Histograms (deterministic) go to --out; timings to stderr.
  std::ostringstream csv;
  csv << "solver,solutions,instances\n";
  auto emit = [&csv](const char* name, const SolverStats& stats) {
    for (const auto& [count, freq] : stats.histogram) {
      csv << name << "," << count << "," << freq << "\n";
    }
  };
  emit("solve5pt-kruppa", classic);
  emit("solve5pt-modern", modern);
  emit("solve7pt", seven);
  if (flags.out.empty() || flags.out == "-") {
    std::fputs(csv.str().c_str(), stdout);
  } else {
    FILE* f = std::fopen(flags.out.c_str(), "w");
    if (!f) throw Error(ErrorCode::ValidationError, "cannot write " + flags.out);
    std::fputs(csv.str().c_str(), f);
    std::fclose(f);
  }
  std::fprintf(stderr,
               "timing: solve5pt-kruppa %.1f ms/instance, solve5pt-modern %.3f "
               "ms/instance, solve7pt %.3f ms/instance\n",
               1e3 * classic.seconds / instances, 1e3 * modern.seconds / instances,
               1e3 * seven.seconds / instances);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibrated two-view relative pose: five-point and companion solvers"};
  app.require_subcommand(1);

  CommonFlags flags;
  int n_points = 20;
  double noise = 0.0;
  int instances = 100;
  int max_iterations = 1000;
  double confidence = 0.99;
  double threshold = 1.0;
  std::string input;

  auto add_common = [&flags](CLI::App* cmd, bool with_seed = false) {
    cmd->add_option("--out", flags.out, "output path ('-' for stdout)");
    cmd->add_option("--tolerance", flags.tolerance, "solver tolerance override");
    cmd->add_option("--focal", flags.focal, "focal length in pixels");
    cmd->add_option("--principal", flags.principal,
                    "principal point (two values, pixels)")
        ->expected(2);
    if (with_seed) cmd->add_option("--seed", flags.seed, "random seed");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic scene");
  add_common(synth, true);
  synth->add_option("--n", n_points, "number of points");
  synth->add_option("--noise", noise, "pixel noise sigma");

  CLI::App* classic = app.add_subcommand(
      "solve5pt-kruppa", "five-point solver via the constraint-curve pipeline");
  classic->add_option("input", input, "scene or correspondence file")->required();
  add_common(classic);

  CLI::App* modern = app.add_subcommand(
      "solve5pt-modern", "five-point solver via the degree-10 polynomial");
  modern->add_option("input", input, "scene or correspondence file")->required();
  add_common(modern);

  CLI::App* seven = app.add_subcommand("solve7pt", "uncalibrated seven-point solver");
  seven->add_option("input", input, "scene or correspondence file")->required();
  add_common(seven);

  CLI::App* thm2 = app.add_subcommand(
      "thm2", "seven points, one calibrated image and the other focal length");
  thm2->add_option("input", input, "scene or correspondence file")->required();
  add_common(thm2);

  CLI::App* selfcal = app.add_subcommand(
      "selfcal", "common focal length from a fundamental matrix");
  selfcal->add_option("input", input, "result file holding models")->required();
  add_common(selfcal);

  CLI::App* ransac = app.add_subcommand("ransac", "robust pose over many matches");
  ransac->add_option("input", input, "scene file")->required();
  add_common(ransac, true);
  ransac->add_option("--threshold", threshold, "inlier Sampson threshold");
  ransac->add_option("--max-iterations", max_iterations, "trial cap");
  ransac->add_option("--confidence", confidence, "consensus confidence");

  CLI::App* bench = app.add_subcommand("bench", "solution-count and timing survey");
  add_common(bench, true);
  bench->add_option("--instances", instances, "number of instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) return run_synth(flags, n_points, noise);
    if (classic->parsed()) return run_solve5pt(input, flags, true);
    if (modern->parsed()) return run_solve5pt(input, flags, false);
    if (seven->parsed()) return run_solve7pt(input, flags);
    if (thm2->parsed()) return run_thm2(input, flags);
    if (selfcal->parsed()) return run_selfcal(input, flags);
    if (ransac->parsed()) {
      return run_ransac(input, flags, max_iterations, confidence, threshold);
    }
    if (bench->parsed()) return run_bench(flags, instances);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
