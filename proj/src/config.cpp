#include "stitch/config.hpp"

#include <json.hpp>

#include <cmath>

namespace stitch {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& path,
                              const std::string& what) {
  throw StitchError(ErrorCode::ConfigError, path + ": " + what);
}

double require_number(const json& obj, const std::string& key,
                      const std::string& path) {
  if (!obj.contains(key)) config_fail(path + "." + key, "missing field");
  if (!obj[key].is_number()) config_fail(path + "." + key, "must be a number");
  return obj[key].get<double>();
}

double optional_number(const json& obj, const std::string& key, double dflt,
                       const std::string& path) {
  if (!obj.contains(key)) return dflt;
  if (!obj[key].is_number()) config_fail(path + "." + key, "must be a number");
  return obj[key].get<double>();
}

Eigen::Matrix3d rotation_zyx_degrees(double yaw, double pitch, double roll) {
  const double z = yaw * M_PI / 180.0;
  const double y = pitch * M_PI / 180.0;
  const double x = roll * M_PI / 180.0;
  Eigen::Matrix3d rz, ry, rx;
  rz << std::cos(z), -std::sin(z), 0, std::sin(z), std::cos(z), 0, 0, 0, 1;
  ry << std::cos(y), 0, std::sin(y), 0, 1, 0, -std::sin(y), 0, std::cos(y);
  rx << 1, 0, 0, 0, std::cos(x), -std::sin(x), 0, std::sin(x), std::cos(x);
  return rz * ry * rx;
}

Eigen::Matrix3d parse_rotation(const json& rot, const std::string& path) {
  if (!rot.is_array()) config_fail(path, "must be an array of 3 or 9 numbers");
  std::vector<double> v;
  for (const auto& e : rot) {
    if (!e.is_number()) config_fail(path, "must contain only numbers");
    v.push_back(e.get<double>());
  }
  Eigen::Matrix3d r;
  if (v.size() == 9) {
    r << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  } else if (v.size() == 3) {
    r = rotation_zyx_degrees(v[0], v[1], v[2]);
  } else {
    config_fail(path, "must have 3 (yaw/pitch/roll deg) or 9 entries");
  }
  try {
    check_rotation(r);
  } catch (const StitchError&) {
    config_fail(path, "not an orthonormal rotation with det +1");
  }
  return r;
}

}  // namespace

StitchConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    config_fail("<document>", e.what());
  }
  if (!doc.is_object()) config_fail("<document>", "must be a JSON object");
  if (!doc.contains("views") || !doc["views"].is_array()) {
    config_fail("views", "missing or not an array");
  }
  const auto& views = doc["views"];
  if (views.size() < 2 || views.size() > 3) {
    config_fail("views", "must contain 2 or 3 entries");
  }

  StitchConfig cfg;
  for (std::size_t i = 0; i < views.size(); ++i) {
    const std::string cam_path = "cameras[" + std::to_string(i) + "]";
    const auto& view = views[i];
    if (!view.is_object()) config_fail(cam_path, "view must be an object");
    ViewSetup setup;
    if (view.contains("dir")) {
      if (!view["dir"].is_string()) config_fail(cam_path + ".dir", "must be a string");
      setup.dir = view["dir"].get<std::string>();
    }
    if (!view.contains("camera") || !view["camera"].is_object()) {
      config_fail(cam_path, "missing camera object");
    }
    const auto& cam = view["camera"];
    setup.intrinsics.fx = require_number(cam, "fx", cam_path);
    setup.intrinsics.fy = require_number(cam, "fy", cam_path);
    setup.intrinsics.cx = require_number(cam, "cx", cam_path);
    setup.intrinsics.cy = require_number(cam, "cy", cam_path);
    if (setup.intrinsics.fx <= 0 || setup.intrinsics.fy <= 0) {
      config_fail(cam_path + ".fx", "focal lengths must be positive");
    }
    if (!cam.contains("rotation")) {
      config_fail(cam_path + ".rotation", "missing field");
    }
    setup.extrinsics.rotation =
        parse_rotation(cam["rotation"], cam_path + ".rotation");
    if (!cam.contains("translation") || !cam["translation"].is_array() ||
        cam["translation"].size() != 3) {
      config_fail(cam_path + ".translation", "must be an array of 3 numbers");
    }
    for (int k = 0; k < 3; ++k) {
      if (!cam["translation"][k].is_number()) {
        config_fail(cam_path + ".translation", "must contain only numbers");
      }
      setup.extrinsics.translation(k) = cam["translation"][k].get<double>();
    }
    cfg.views.push_back(std::move(setup));
  }

  cfg.reference = 0;
  if (doc.contains("reference")) {
    if (!doc["reference"].is_number_integer()) {
      config_fail("reference", "must be an integer");
    }
    cfg.reference = doc["reference"].get<int>();
  }
  if (cfg.reference < 0 || cfg.reference >= static_cast<int>(cfg.views.size())) {
    config_fail("reference", "index out of range");
  }

  if (doc.contains("balance")) {
    const auto& b = doc["balance"];
    if (!b.is_object()) config_fail("balance", "must be an object");
    cfg.balance.lambda = optional_number(b, "lambda", 0.05, "balance");
    cfg.balance.gamma_dark = optional_number(b, "gamma_dark", 1.5, "balance");
    cfg.balance.gamma_bright =
        optional_number(b, "gamma_bright", 1.5, "balance");
    cfg.balance.target_black = static_cast<int>(
        optional_number(b, "target_black", 0, "balance"));
    cfg.balance.target_white = static_cast<int>(
        optional_number(b, "target_white", 255, "balance"));
  }
  if (!(cfg.balance.lambda > 0.0 && cfg.balance.lambda < 0.5)) {
    config_fail("balance.lambda", "must be in (0, 0.5)");
  }
  if (cfg.balance.gamma_dark <= 0.0 || cfg.balance.gamma_bright <= 0.0) {
    config_fail("balance.gamma_dark", "gammas must be positive");
  }

  if (doc.contains("flow")) {
    const auto& f = doc["flow"];
    if (!f.is_object()) config_fail("flow", "must be an object");
    cfg.flow.levels = static_cast<int>(optional_number(f, "levels", 4, "flow"));
    cfg.flow.iterations =
        static_cast<int>(optional_number(f, "iterations", 50, "flow"));
    cfg.flow.smoothness = optional_number(f, "smoothness", 15.0, "flow");
  }
  if (cfg.flow.levels < 1 || cfg.flow.iterations < 1 ||
      cfg.flow.smoothness <= 0.0) {
    config_fail("flow", "levels/iterations/smoothness must be positive");
  }

  if (doc.contains("refine")) {
    const auto& r = doc["refine"];
    if (!r.is_object()) config_fail("refine", "must be an object");
    if (r.contains("enabled")) {
      if (!r["enabled"].is_boolean()) config_fail("refine.enabled", "must be a bool");
      cfg.refine.enabled = r["enabled"].get<bool>();
    }
    cfg.refine.margin = optional_number(r, "margin", 0.15, "refine");
    cfg.refine.ransac_iters =
        static_cast<int>(optional_number(r, "ransac_iters", 500, "refine"));
    cfg.refine.inlier_px = optional_number(r, "inlier_px", 2.0, "refine");
    cfg.refine.match_ratio = optional_number(r, "ratio", 0.8, "refine");
    cfg.refine.detect_threshold =
        optional_number(r, "detect_threshold", 2e-4, "refine");
    cfg.refine.rerefine_every =
        static_cast<int>(optional_number(r, "rerefine_every", 0, "refine"));
  }
  if (cfg.refine.margin < 0.0) config_fail("refine.margin", "must be >= 0");

  cfg.threads = static_cast<int>(optional_number(doc, "threads", 1, "threads"));
  if (cfg.threads < 1) config_fail("threads", "must be >= 1");
  cfg.seed = static_cast<std::uint64_t>(
      optional_number(doc, "seed", 0, "seed"));
  cfg.window_capacity =
      static_cast<int>(optional_number(doc, "window", 3, "window"));
  if (cfg.window_capacity < 1 || cfg.window_capacity > 3) {
    config_fail("window", "must be 1, 2, or 3");
  }
  if (doc.contains("fuse_weighting")) {
    const auto& fw = doc["fuse_weighting"];
    if (!fw.is_string()) config_fail("fuse_weighting", "must be a string");
    const std::string s = fw.get<std::string>();
    if (s == "own") {
      cfg.fuse_weighting = FuseWeighting::OwnWeightOnOwnFlow;
    } else if (s == "cross") {
      cfg.fuse_weighting = FuseWeighting::CrossWeightOnOwnFlow;
    } else {
      config_fail("fuse_weighting", "must be \"own\" or \"cross\"");
    }
  }
  if (doc.contains("scene_id")) {
    if (!doc["scene_id"].is_string()) config_fail("scene_id", "must be a string");
    cfg.scene_id = doc["scene_id"].get<std::string>();
  }
  return cfg;
}

std::string serialize_config(const StitchConfig& config) {
  json doc;
  doc["views"] = json::array();
  for (const auto& view : config.views) {
    json cam;
    cam["fx"] = view.intrinsics.fx;
    cam["fy"] = view.intrinsics.fy;
    cam["cx"] = view.intrinsics.cx;
    cam["cy"] = view.intrinsics.cy;
    json rot = json::array();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) rot.push_back(view.extrinsics.rotation(r, c));
    cam["rotation"] = rot;
    cam["translation"] = {view.extrinsics.translation(0),
                          view.extrinsics.translation(1),
                          view.extrinsics.translation(2)};
    json v;
    v["dir"] = view.dir;
    v["camera"] = cam;
    doc["views"].push_back(v);
  }
  doc["reference"] = config.reference;
  doc["balance"] = {{"lambda", config.balance.lambda},
                    {"gamma_dark", config.balance.gamma_dark},
                    {"gamma_bright", config.balance.gamma_bright},
                    {"target_black", config.balance.target_black},
                    {"target_white", config.balance.target_white}};
  doc["flow"] = {{"levels", config.flow.levels},
                 {"iterations", config.flow.iterations},
                 {"smoothness", config.flow.smoothness}};
  doc["refine"] = {{"enabled", config.refine.enabled},
                   {"margin", config.refine.margin},
                   {"ransac_iters", config.refine.ransac_iters},
                   {"inlier_px", config.refine.inlier_px},
                   {"ratio", config.refine.match_ratio},
                   {"detect_threshold", config.refine.detect_threshold},
                   {"rerefine_every", config.refine.rerefine_every}};
  doc["threads"] = config.threads;
  doc["seed"] = config.seed;
  doc["window"] = config.window_capacity;
  doc["fuse_weighting"] =
      config.fuse_weighting == FuseWeighting::OwnWeightOnOwnFlow ? "own"
                                                                 : "cross";
  doc["scene_id"] = config.scene_id;
  return doc.dump(2);
}

std::string config_hash(const StitchConfig& config) {
  const std::string dump = serialize_config(config);
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : dump) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return std::string(buf);
}

void RunManifest::validate() const {
  if (!config_path.empty() && !std::filesystem::exists(config_path)) {
    throw StitchError(ErrorCode::ConfigError,
                      "config path does not exist: " + config_path.string());
  }
  if (input_dirs.size() > 0 &&
      (input_dirs.size() < 2 || input_dirs.size() > 3)) {
    throw StitchError(ErrorCode::ConfigError, "views must be 2 or 3");
  }
  for (const auto& dir : input_dirs) {
    if (!std::filesystem::is_directory(dir)) {
      throw StitchError(ErrorCode::ConfigError,
                        "input dir does not exist: " + dir.string());
    }
  }
  if (threads < 1) {
    throw StitchError(ErrorCode::ConfigError, "threads must be >= 1");
  }
}

}  // namespace stitch
