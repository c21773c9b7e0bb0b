#include "kruppa/io.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace kruppa {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& path, const std::string& text,
                             const nlohmann::detail::exception& e,
                             size_t byte_offset) {
  size_t line = 1;
  const size_t limit = std::min(byte_offset, text.size());
  for (size_t i = 0; i < limit; ++i) {
    if (text[i] == '\n') ++line;
  }
  std::ostringstream msg;
  msg << path << ":" << line << ": " << e.what();
  throw Error(ErrorCode::ParseError, msg.str());
}

json parse_file(const std::string& path, std::string* raw_out = nullptr) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (raw_out) *raw_out = text;
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    parse_fail(path, text, e, e.byte);
  }
}

double finite_number(const json& j, const char* field) {
  if (!j.is_number()) {
    throw Error(ErrorCode::ValidationError,
                std::string("field '") + field + "' is not a number");
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::ValidationError,
                std::string("non-finite value in field '") + field + "'");
  }
  return v;
}

json matrix_to_json(const Mat3& m) {
  json out = json::array();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out.push_back(m(i, j));
  }
  return out;
}

Mat3 matrix_from_json(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 9) {
    throw Error(ErrorCode::ValidationError,
                std::string("field '") + field + "' must hold 9 numbers");
  }
  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = finite_number(j[i], field);
  return m;
}

json vec3_to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec3_from_json(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::ValidationError,
                std::string("field '") + field + "' must hold 3 numbers");
  }
  return Vec3(finite_number(j[0], field), finite_number(j[1], field),
              finite_number(j[2], field));
}

json intrinsics_to_json(const Intrinsics& k, int width, int height) {
  json out;
  out["k"] = matrix_to_json(k.k);
  out["width"] = width;
  out["height"] = height;
  return out;
}

Intrinsics intrinsics_from_json(const json& j) {
  if (!j.contains("k")) {
    throw Error(ErrorCode::ValidationError, "intrinsics need a 'k' matrix");
  }
  return Intrinsics(matrix_from_json(j.at("k"), "k"));
}

std::vector<Correspondence> correspondences_from_json(const json& j) {
  if (!j.is_array()) {
    throw Error(ErrorCode::ValidationError,
                "'correspondences' must be an array");
  }
  std::vector<Correspondence> out;
  out.reserve(j.size());
  for (const json& rec : j) {
    if (!rec.is_object() || !rec.contains("x1") || !rec.contains("y1") ||
        !rec.contains("x2") || !rec.contains("y2")) {
      throw Error(ErrorCode::ValidationError,
                  "correspondence record needs fields x1, y1, x2, y2");
    }
    Correspondence c;
    c.x1 = Vec2(finite_number(rec.at("x1"), "x1"),
                finite_number(rec.at("y1"), "y1"));
    c.x2 = Vec2(finite_number(rec.at("x2"), "x2"),
                finite_number(rec.at("y2"), "y2"));
    out.push_back(c);
  }
  return out;
}

json correspondences_to_json(std::span<const Correspondence> corrs) {
  json arr = json::array();
  for (const Correspondence& c : corrs) {
    json rec;
    rec["x1"] = c.x1.x();
    rec["y1"] = c.x1.y();
    rec["x2"] = c.x2.x();
    rec["y2"] = c.x2.y();
    arr.push_back(rec);
  }
  return arr;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::ValidationError, "cannot write " + path);
  }
  out << text << "\n";
}

}  // namespace

void write_scene(const std::string& path, const SceneTruth& truth) {
  json j;
  j["intrinsics1"] = intrinsics_to_json(
      truth.spec.intrinsics1, static_cast<int>(2 * truth.spec.intrinsics1.k(0, 2)),
      static_cast<int>(2 * truth.spec.intrinsics1.k(1, 2)));
  j["intrinsics2"] = intrinsics_to_json(
      truth.spec.intrinsics2, static_cast<int>(2 * truth.spec.intrinsics2.k(0, 2)),
      static_cast<int>(2 * truth.spec.intrinsics2.k(1, 2)));
  j["correspondences"] = correspondences_to_json(truth.correspondences);
  json t;
  t["rotation"] = matrix_to_json(truth.pose.rotation);
  t["translation"] = vec3_to_json(truth.pose.translation);
  json pts = json::array();
  for (const Vec3& p : truth.points3d) pts.push_back(vec3_to_json(p));
  t["points"] = pts;
  j["truth"] = t;
  write_text(path, j.dump(2));
}

SceneFile read_scene(const std::string& path) {
  const json j = parse_file(path);
  SceneFile out;
  if (j.contains("intrinsics1")) {
    out.intrinsics1 = intrinsics_from_json(j.at("intrinsics1"));
  }
  if (j.contains("intrinsics2")) {
    out.intrinsics2 = intrinsics_from_json(j.at("intrinsics2"));
  }
  if (j.contains("correspondences")) {
    out.correspondences = correspondences_from_json(j.at("correspondences"));
  }
  if (j.contains("truth")) {
    const json& t = j.at("truth");
    RelativePose pose;
    pose.rotation = matrix_from_json(t.at("rotation"), "rotation");
    pose.translation = vec3_from_json(t.at("translation"), "translation");
    out.truth_pose = pose;
    if (t.contains("points")) {
      for (const json& p : t.at("points")) {
        out.truth_points.push_back(vec3_from_json(p, "points"));
      }
    }
  }
  return out;
}

std::vector<Correspondence> read_correspondences(const std::string& path) {
  const json j = parse_file(path);
  if (!j.contains("correspondences")) {
    throw Error(ErrorCode::ValidationError,
                path + ": no 'correspondences' array");
  }
  return correspondences_from_json(j.at("correspondences"));
}

void write_correspondences(const std::string& path,
                           std::span<const Correspondence> corrs) {
  json j;
  j["correspondences"] = correspondences_to_json(corrs);
  write_text(path, j.dump(2));
}

Intrinsics read_intrinsics(const std::string& path) {
  return intrinsics_from_json(parse_file(path));
}

void write_intrinsics(const std::string& path, const Intrinsics& k, int width,
                      int height) {
  write_text(path, intrinsics_to_json(k, width, height).dump(2));
}

void write_result(const std::string& path, const ResultFile& result) {
  json j;
  json models = json::array();
  for (const ResultEntry& e : result.models) {
    json m;
    m["matrix"] = matrix_to_json(e.matrix);
    m["source"] = e.source;
    m["residual"] = e.residual;
    models.push_back(m);
  }
  j["models"] = models;
  if (result.rotation) j["rotation"] = matrix_to_json(*result.rotation);
  if (result.translation) j["translation"] = vec3_to_json(*result.translation);
  if (!result.inlier_mask.empty()) {
    json mask = json::array();
    for (uint8_t b : result.inlier_mask) mask.push_back(static_cast<int>(b));
    j["inliers"] = mask;
  }
  if (result.iterations) j["iterations"] = *result.iterations;
  if (!result.focal_candidates.empty() || result.focal_continuum) {
    j["focal_candidates"] = result.focal_candidates;
    j["focal_continuum"] = result.focal_continuum;
  }
  if (!result.principal_points.empty()) {
    json pps = json::array();
    for (const Vec2& p : result.principal_points) {
      pps.push_back(json::array({p.x(), p.y()}));
    }
    j["principal_points"] = pps;
  }
  if (result.enumerated_orientations) {
    j["enumerated_orientations"] = *result.enumerated_orientations;
  }
  write_text(path, j.dump(2));
}

ResultFile read_result(const std::string& path) {
  const json j = parse_file(path);
  ResultFile out;
  if (j.contains("models")) {
    for (const json& m : j.at("models")) {
      ResultEntry e;
      e.matrix = matrix_from_json(m.at("matrix"), "matrix");
      e.source = m.value("source", std::string());
      e.residual = m.value("residual", 0.0);
      out.models.push_back(e);
    }
  }
  if (j.contains("rotation")) {
    out.rotation = matrix_from_json(j.at("rotation"), "rotation");
  }
  if (j.contains("translation")) {
    out.translation = vec3_from_json(j.at("translation"), "translation");
  }
  if (j.contains("inliers")) {
    for (const json& b : j.at("inliers")) {
      out.inlier_mask.push_back(static_cast<uint8_t>(b.get<int>()));
    }
  }
  if (j.contains("iterations")) out.iterations = j.at("iterations").get<int>();
  if (j.contains("focal_candidates")) {
    for (const json& f : j.at("focal_candidates")) {
      out.focal_candidates.push_back(finite_number(f, "focal_candidates"));
    }
    out.focal_continuum = j.value("focal_continuum", false);
  }
  if (j.contains("principal_points")) {
    for (const json& p : j.at("principal_points")) {
      out.principal_points.emplace_back(finite_number(p[0], "principal_points"),
                                        finite_number(p[1], "principal_points"));
    }
  }
  if (j.contains("enumerated_orientations")) {
    out.enumerated_orientations = j.at("enumerated_orientations").get<int>();
  }
  return out;
}

}  // namespace kruppa
