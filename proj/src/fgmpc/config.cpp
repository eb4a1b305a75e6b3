#include "fgmpc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include <json.hpp>

#include "fgmpc/error.hpp"
#include "fgmpc/io.hpp"
#include "fgmpc/plant.hpp"

namespace fgmpc {

namespace {

using nlohmann::json;

// Line on which each key path ("plant.A", "controllers[1].kind") starts.
std::map<std::string, int> locate_keys(const std::string& text) {
  struct Frame {
    bool object;
    std::string path;
    int index = 0;
    std::string key;
    bool expect_key = false;
  };
  auto child = [](const Frame& f) {
    if (f.object) return f.path.empty() ? f.key : f.path + "." + f.key;
    return f.path + "[" + std::to_string(f.index) + "]";
  };
  std::map<std::string, int> lines;
  std::vector<Frame> stack;
  int line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
    } else if (c == '"') {
      const int start = line;
      std::string s;
      std::size_t j = i + 1;
      for (; j < text.size() && text[j] != '"'; ++j) {
        if (text[j] == '\\' && j + 1 < text.size()) ++j;
        if (text[j] == '\n') ++line;
        s += text[j];
      }
      i = j;
      if (stack.empty()) continue;
      Frame& top = stack.back();
      if (top.object && top.expect_key) {
        top.key = s;
        top.expect_key = false;
        lines.emplace(child(top), start);
      } else if (!top.object) {
        lines.emplace(child(top), start);
      }
    } else if (c == '{' || c == '[') {
      std::string path;
      if (!stack.empty()) {
        path = child(stack.back());
        lines.emplace(path, line);
      }
      stack.push_back({c == '{', path, 0, "", c == '{'});
    } else if (c == '}' || c == ']') {
      if (!stack.empty()) stack.pop_back();
    } else if (c == ',') {
      if (stack.empty()) continue;
      if (stack.back().object)
        stack.back().expect_key = true;
      else
        ++stack.back().index;
    } else if (!std::isspace(static_cast<unsigned char>(c)) && !stack.empty() && !stack.back().object) {
      lines.emplace(child(stack.back()), line);
    }
  }
  return lines;
}

class Reader {
 public:
  Reader(const std::string& text, std::string base_dir)
      : lines_(locate_keys(text)), base_dir_(std::move(base_dir)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw Error(ErrorCode::kConfig,
                "config line " + std::to_string(line_of(path)) + ": " + path + ": " + what);
  }

  const json& need(const json& obj, const std::string& key, const std::string& path) const {
    if (!obj.contains(key)) fail(path.empty() ? key : path, "missing required field '" + key + "'");
    return obj.at(key);
  }

  void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) const {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!ok.count(it.key())) fail(join(path, it.key()), "unknown field");
    }
  }

  double number(const json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
  }

  int integer(const json& j, const std::string& path, int lo) const {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    const auto v = j.get<long long>();
    if (v < lo || v > 1000000000) fail(path, "must be >= " + std::to_string(lo));
    return static_cast<int>(v);
  }

  std::string string(const json& j, const std::string& path) const {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
  }

  Eigen::VectorXd vector(const json& j, const std::string& path) const {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of numbers");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = number(j[i], index(path, i));
    return v;
  }

  Eigen::MatrixXd matrix(const json& j, const std::string& path) const {
    if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
      fail(path, "expected a matrix as a non-empty array of rows");
    }
    const std::size_t cols = j[0].size();
    Eigen::MatrixXd M(j.size(), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string rp = index(path, i);
      if (!j[i].is_array() || j[i].size() != cols) {
        fail(rp, "row length differs from the first row (" + std::to_string(cols) + ")");
      }
      for (std::size_t k = 0; k < cols; ++k) M(i, k) = number(j[i][k], index(rp, k));
    }
    return M;
  }

  // Matrix, or a number meaning that multiple of the n x n identity.
  Eigen::MatrixXd weight(const json& j, const std::string& path, int n) const {
    if (j.is_number()) return number(j, path) * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd M = matrix(j, path);
    if (M.rows() != n || M.cols() != n) {
      fail(path, "expected " + std::to_string(n) + "x" + std::to_string(n) + ", got " +
                     std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
    }
    return M;
  }

  std::string resolve(const std::string& file) const {
    std::filesystem::path p(file);
    return p.is_absolute() ? file : (std::filesystem::path(base_dir_) / p).string();
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
  static std::string index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
  }

 private:
  int line_of(std::string path) const {
    for (;;) {
      auto it = lines_.find(path);
      if (it != lines_.end()) return it->second;
      const auto cut = path.find_last_of(".[");
      if (cut == std::string::npos) return 1;
      path.resize(cut);
    }
  }

  std::map<std::string, int> lines_;
  std::string base_dir_;
};

HPolyhedron read_constraints(const Reader& rd, const json& j, int ny) {
  const std::string path = "constraints";
  if (!j.is_object()) rd.fail(path, "expected an object with 'box', 'hrep' or 'A'/'b'");
  HPolyhedron Y;
  if (j.contains("box")) {
    rd.only_keys(j, path, {"box"});
    const json& box = j.at("box");
    rd.only_keys(box, "constraints.box", {"lower", "upper"});
    const Eigen::VectorXd lo = rd.vector(rd.need(box, "lower", "constraints.box"), "constraints.box.lower");
    const Eigen::VectorXd hi = rd.vector(rd.need(box, "upper", "constraints.box"), "constraints.box.upper");
    if (lo.size() != ny || hi.size() != ny) {
      rd.fail("constraints.box", "bounds must have one entry per constrained output (" + std::to_string(ny) + ")");
    }
    if ((lo.array() >= hi.array()).any()) rd.fail("constraints.box", "every lower bound must be below its upper bound");
    Y = HPolyhedron::from_box(lo, hi);
  } else if (j.contains("hrep")) {
    rd.only_keys(j, path, {"hrep"});
    const std::string file = rd.resolve(rd.string(j.at("hrep"), "constraints.hrep"));
    try {
      Y = read_hrep(file);
    } catch (const Error& e) {
      rd.fail("constraints.hrep", e.what());
    }
  } else if (j.contains("A")) {
    rd.only_keys(j, path, {"A", "b"});
    const Eigen::MatrixXd A = rd.matrix(j.at("A"), "constraints.A");
    const Eigen::VectorXd b = rd.vector(rd.need(j, "b", path), "constraints.b");
    if (A.rows() != b.size()) rd.fail("constraints.b", "length must equal the row count of constraints.A");
    Y = HPolyhedron(A, b);
  } else {
    rd.fail(path, "expected 'box', 'hrep' or 'A'/'b'");
  }
  if (Y.dim() != ny) {
    rd.fail(path, "dimension " + std::to_string(Y.dim()) + " does not match the " + std::to_string(ny) +
                      " constrained outputs");
  }
  return Y;
}

ControllerSpec read_controller(const Reader& rd, const json& j, const std::string& path, int default_horizon) {
  ControllerSpec spec;
  spec.horizon = default_horizon;
  std::string kind;
  if (j.is_string()) {
    kind = j.get<std::string>();
  } else if (j.is_object()) {
    rd.only_keys(j, path, {"kind", "horizon", "label"});
    kind = rd.string(rd.need(j, "kind", path), Reader::join(path, "kind"));
    if (j.contains("horizon")) {
      const json& h = j.at("horizon");
      if (h.is_string() && h.get<std::string>() == "nstar") {
        spec.horizon = -1;
      } else {
        spec.horizon = rd.integer(h, Reader::join(path, "horizon"), 0);
      }
    }
    if (j.contains("label")) spec.label = rd.string(j.at("label"), Reader::join(path, "label"));
  } else {
    rd.fail(path, "expected a controller name or object");
  }
  const auto parsed = parse_controller_kind(kind);
  if (!parsed) rd.fail(path, "unknown controller '" + kind + "' (expected mpc, mpc+fg or cg)");
  spec.kind = *parsed;
  if (spec.kind != ControllerKind::kCg && spec.horizon == 0) {
    rd.fail(path, "MPC controllers need a horizon of at least 1");
  }
  if (spec.label.empty()) {
    spec.label = to_string(spec.kind);
    if (spec.kind != ControllerKind::kCg) {
      spec.label += spec.horizon < 0 ? std::string("_nstar") : "_N" + std::to_string(spec.horizon);
    }
  }
  for (char& c : spec.label) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') c = '_';
  }
  return spec;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    std::string what = e.what();
    if (const auto cut = what.find("parse error"); cut != std::string::npos) what = what.substr(cut);
    throw Error(ErrorCode::kConfig, "config line " + std::to_string(line) + ": " + what);
  }
  const Reader rd(text, base_dir);
  if (!root.is_object()) rd.fail("config", "top level must be an object");
  rd.only_keys(root, "", {"name", "plant", "constraints", "epsilon", "terminal_epsilon", "Q", "R", "horizon",
                          "controller", "controllers", "x0", "r", "steps", "nstar_cap", "tol", "row_cap",
                          "slices", "timing_repeats"});

  ScenarioConfig cfg;
  if (root.contains("name")) cfg.name = rd.string(root.at("name"), "name");

  const json& plant = rd.need(root, "plant", "");
  if (!plant.is_object()) rd.fail("plant", "expected an object");
  rd.only_keys(plant, "plant", {"A", "B", "C", "D", "E", "F", "sample_time"});
  cfg.A = rd.matrix(rd.need(plant, "A", "plant"), "plant.A");
  cfg.B = rd.matrix(rd.need(plant, "B", "plant"), "plant.B");
  cfg.C = rd.matrix(rd.need(plant, "C", "plant"), "plant.C");
  cfg.D = rd.matrix(rd.need(plant, "D", "plant"), "plant.D");
  cfg.E = rd.matrix(rd.need(plant, "E", "plant"), "plant.E");
  cfg.F = rd.matrix(rd.need(plant, "F", "plant"), "plant.F");
  if (plant.contains("sample_time")) {
    cfg.sample_time = rd.number(plant.at("sample_time"), "plant.sample_time");
    if (cfg.sample_time < 0) rd.fail("plant.sample_time", "must be >= 0");
  }
  try {
    LtiPlant(cfg.A, cfg.B, cfg.C, cfg.D, cfg.E, cfg.F, cfg.sample_time);
  } catch (const Error& e) {
    rd.fail("plant", e.what());
  }
  const int nx = static_cast<int>(cfg.A.rows()), nu = static_cast<int>(cfg.B.cols());
  const int ny = static_cast<int>(cfg.C.rows()), nz = static_cast<int>(cfg.E.rows());

  cfg.Y = read_constraints(rd, rd.need(root, "constraints", ""), ny);

  auto fraction = [&](const char* key, double& out) {
    if (!root.contains(key)) return;
    out = rd.number(root.at(key), key);
    if (!(out > 0.0 && out < 1.0)) rd.fail(key, "must lie strictly between 0 and 1");
  };
  fraction("epsilon", cfg.epsilon);
  cfg.terminal_epsilon = cfg.epsilon;
  fraction("terminal_epsilon", cfg.terminal_epsilon);

  cfg.Q = root.contains("Q") ? rd.weight(root.at("Q"), "Q", nx) : Eigen::MatrixXd::Identity(nx, nx);
  cfg.R = root.contains("R") ? rd.weight(root.at("R"), "R", nu) : Eigen::MatrixXd::Identity(nu, nu);

  if (root.contains("horizon")) cfg.horizon = rd.integer(root.at("horizon"), "horizon", 0);

  if (root.contains("controller") && root.contains("controllers")) {
    rd.fail("controllers", "give either 'controller' or 'controllers', not both");
  }
  if (root.contains("controllers")) {
    const json& list = root.at("controllers");
    if (!list.is_array() || list.empty()) rd.fail("controllers", "expected a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      cfg.controllers.push_back(read_controller(rd, list[i], Reader::index("controllers", i), cfg.horizon));
    }
  } else {
    const json fallback = "mpc+fg";
    cfg.controllers.push_back(
        read_controller(rd, root.contains("controller") ? root.at("controller") : fallback, "controller", cfg.horizon));
  }
  std::set<std::string> labels;
  for (std::size_t i = 0; i < cfg.controllers.size(); ++i) {
    std::string& label = cfg.controllers[i].label;
    if (labels.count(label)) label += "_" + std::to_string(i);
    labels.insert(label);
  }

  cfg.x0 = rd.vector(rd.need(root, "x0", ""), "x0");
  if (cfg.x0.size() != nx) rd.fail("x0", "expected " + std::to_string(nx) + " entries");
  cfg.r = rd.vector(rd.need(root, "r", ""), "r");
  if (cfg.r.size() != nz) rd.fail("r", "expected " + std::to_string(nz) + " entries");

  if (root.contains("steps")) cfg.steps = rd.integer(root.at("steps"), "steps", 1);
  if (root.contains("nstar_cap")) cfg.nstar_cap = rd.integer(root.at("nstar_cap"), "nstar_cap", 0);
  if (root.contains("tol")) {
    cfg.tol = rd.number(root.at("tol"), "tol");
    if (cfg.tol <= 0) rd.fail("tol", "must be positive");
  }
  if (root.contains("row_cap")) cfg.row_cap = static_cast<std::size_t>(rd.integer(root.at("row_cap"), "row_cap", 1));
  if (root.contains("timing_repeats")) cfg.timing_repeats = rd.integer(root.at("timing_repeats"), "timing_repeats", 1);
  if (root.contains("slices")) {
    const json& s = root.at("slices");
    if (!s.is_array()) rd.fail("slices", "expected an array of references");
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string p = Reader::index("slices", i);
      Eigen::VectorXd v = s[i].is_number() ? Eigen::VectorXd::Constant(1, rd.number(s[i], p)) : rd.vector(s[i], p);
      if (v.size() != nz) rd.fail(p, "expected " + std::to_string(nz) + " entries");
      cfg.slices.push_back(std::move(v));
    }
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  return parse_config(text, parent.empty() ? "." : parent.string());
}

}  // namespace fgmpc
