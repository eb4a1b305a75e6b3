#include "fgmpc/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>

#include "fgmpc/error.hpp"
#include "fgmpc/io.hpp"

namespace fgmpc {
namespace {

const char* kValid = R"({
  "name": "di",
  "plant": {
    "A": [[1, 0.1], [0, 1]],
    "B": [[0], [0.1]],
    "C": [[1, 0], [0, 1], [0, 0]],
    "D": [[0], [0], [1]],
    "E": [[1, 0]],
    "F": [[0]],
    "sample_time": 0.1
  },
  "constraints": {"box": {"lower": [-1, -0.25, -0.25], "upper": [1, 0.25, 0.25]}},
  "epsilon": 0.01,
  "Q": 100,
  "horizon": 10,
  "controllers": ["mpc+fg", {"kind": "mpc", "horizon": "nstar"}, {"kind": "cg", "label": "baseline"}],
  "x0": [-1, 0],
  "r": [0.75],
  "slices": [-0.75, [0.5]]
})";

std::string with(const std::string& from, const std::string& to) {
  std::string text = kValid;
  const auto at = text.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  return text.replace(at, from.size(), to);
}

std::string diagnostic(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    return e.what();
  }
  return "accepted";
}

TEST(Config, ParsesAValidScenario) {
  const ScenarioConfig cfg = parse_config(kValid);
  EXPECT_EQ(cfg.name, "di");
  EXPECT_EQ(cfg.A.rows(), 2);
  EXPECT_DOUBLE_EQ(cfg.sample_time, 0.1);
  EXPECT_EQ(cfg.Y.rows(), 6);
  EXPECT_EQ(cfg.Q, 100 * Eigen::MatrixXd::Identity(2, 2));
  EXPECT_EQ(cfg.R, Eigen::MatrixXd::Identity(1, 1));
  EXPECT_DOUBLE_EQ(cfg.terminal_epsilon, 0.01);
  ASSERT_EQ(cfg.controllers.size(), 3u);
  EXPECT_EQ(cfg.controllers[0].kind, ControllerKind::kMpcFg);
  EXPECT_EQ(cfg.controllers[0].horizon, 10);
  EXPECT_EQ(cfg.controllers[0].label, "mpc_fg_N10");
  EXPECT_EQ(cfg.controllers[1].horizon, -1);
  EXPECT_EQ(cfg.controllers[2].label, "baseline");
  ASSERT_EQ(cfg.slices.size(), 2u);
  EXPECT_DOUBLE_EQ(cfg.slices[1][0], 0.5);
  EXPECT_EQ(cfg.steps, 400);
}

TEST(Config, DiagnosticsNameFieldAndLine) {
  struct Case {
    std::string text;
    std::string field;
    std::string line;
  };
  const Case cases[] = {
      {with("\"A\": [[1, 0.1], [0, 1]]", "\"A\": [[1, 0.1], [0]]"), "plant.A[1]", "line 4:"},
      {with("\"B\": [[0], [0.1]]", "\"B\": [[0], [\"x\"]]"), "plant.B[1][0]", "line 5:"},
      {with("\"epsilon\": 0.01", "\"epsilon\": 1.5"), "epsilon", "line 13:"},
      {with("\"Q\": 100", "\"Q\": [[1]]"), "Q", "line 14:"},
      {with("\"x0\": [-1, 0]", "\"x0\": [-1]"), "x0", "line 17:"},
      {with("\"r\": [0.75]", "\"r\": [0.75], \"extra\": 1"), "extra", "line 18:"},
      {with("\"mpc+fg\"", "\"pid\""), "controllers[0]", "line 16:"},
      {with("\"horizon\": \"nstar\"", "\"horizon\": -4"), "controllers[1].horizon", "line 16:"},
      {with("\"upper\": [1, 0.25, 0.25]", "\"upper\": [1, 0.25]"), "constraints.box", "line 12:"},
      {with("\"upper\": [1, 0.25, 0.25]", "\"upper\": [1, 0.25, -0.5]"), "constraints.box", "line 12:"},
      {with("\"F\": [[0]]", "\"F\": [[0, 1]]"), "plant", "line 3:"},
      {with("\"horizon\": 10", "\"horizon\": 1.5"), "horizon", "line 15:"},
      {with("[-0.75, [0.5]]", "[[0.1, 0.2]]"), "slices[0]", "line 19:"},
  };
  for (const Case& c : cases) {
    const std::string msg = diagnostic(c.text);
    EXPECT_NE(msg.find(c.field), std::string::npos) << msg;
    EXPECT_NE(msg.find(c.line), std::string::npos) << msg;
  }
}

TEST(Config, MissingRequiredFields) {
  EXPECT_NE(diagnostic(with("\"x0\": [-1, 0],", "")).find("missing required field 'x0'"), std::string::npos);
  EXPECT_NE(diagnostic(with("\"E\": [[1, 0]],", "")).find("'E'"), std::string::npos);
}

TEST(Config, SyntaxErrorsReportTheLine) {
  const std::string msg = diagnostic(with("\"horizon\": 10,", "\"horizon\": 10,,"));
  EXPECT_NE(msg.find("config line 15"), std::string::npos) << msg;
  EXPECT_NE(diagnostic("[1, 2]").find("top level"), std::string::npos);
}

TEST(Config, RejectsUnstabilizablePlant) {
  const std::string msg = diagnostic(with("\"B\": [[0], [0.1]]", "\"B\": [[0], [0]]"));
  EXPECT_NE(msg.find("plant:"), std::string::npos) << msg;
}

TEST(Config, ReadsHrepConstraintsRelativeToTheFile) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "fgmpc_config_test";
  fs::create_directories(dir);
  write_hrep((dir / "Y.hrep").string(),
             HPolyhedron::from_box(Eigen::Vector3d(-1, -0.25, -0.25), Eigen::Vector3d(1, 0.25, 0.25)));
  const std::string text =
      with(R"("constraints": {"box": {"lower": [-1, -0.25, -0.25], "upper": [1, 0.25, 0.25]}})",
           R"("constraints": {"hrep": "Y.hrep"})");
  write_file_atomic((dir / "cfg.json").string(), text);
  const ScenarioConfig cfg = load_config((dir / "cfg.json").string());
  EXPECT_EQ(cfg.Y.rows(), 6);
  const std::string missing = with(R"("constraints": {"box": {"lower": [-1, -0.25, -0.25], "upper": [1, 0.25, 0.25]}})",
                                   R"("constraints": {"hrep": "nope.hrep"})");
  EXPECT_NE(diagnostic(missing).find("constraints.hrep"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Config, SingleControllerDefaultsAndLabelsStayUnique) {
  const ScenarioConfig one = parse_config(
      with(R"("controllers": ["mpc+fg", {"kind": "mpc", "horizon": "nstar"}, {"kind": "cg", "label": "baseline"}])",
           R"("controller": "cg")"));
  ASSERT_EQ(one.controllers.size(), 1u);
  EXPECT_EQ(one.controllers[0].kind, ControllerKind::kCg);
  const ScenarioConfig twice = parse_config(
      with(R"(["mpc+fg", {"kind": "mpc", "horizon": "nstar"}, {"kind": "cg", "label": "baseline"}])",
           R"(["mpc+fg", "mpc+fg"])"));
  EXPECT_NE(twice.controllers[0].label, twice.controllers[1].label);
}

}  // namespace
}  // namespace fgmpc
