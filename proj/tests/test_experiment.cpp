#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "solscale/experiment.hpp"

using namespace solscale;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("solscale_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json summary(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "summary.json")); }

int cli(const std::string& args) {
  const int rc = std::system((std::string(SOLSCALE_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const char* kIdentity = R"({"map": {"stages": ["round"]},
  "family": {"j_from": 3, "j_to": 7, "height_fraction": 0.25}})";

const char* kAffine = R"({"map": {"stages": ["affine 1 4 0", "affine 2 0.5 0", "round"]},
  "family": {"j_from": 3, "j_to": 8, "height_fraction": 0.25}})";

const char* kPiecewise = R"({"map": {"stages": ["pwl 1 0 1,2", "round"]},
  "family": {"kind": "strips", "interval": [-8, 0], "j_from": 2, "j_to": 9, "orientation": "group_law"},
  "family_b": {"kind": "strips", "interval": [0, 8], "j_from": 2, "j_to": 9, "orientation": "group_law"}})";

}  // namespace

TEST(Run, IdentityScalingIsOne) {
  const auto dir = scratch("identity");
  const auto out = run_experiment("scaling", kIdentity, dir);
  EXPECT_EQ(out.exit_code, kExitPass);
  const auto s = summary(dir);
  EXPECT_EQ(s["results"]["k"].get<double>(), 1.0);
  EXPECT_EQ(s["status"], "PASS");
  const std::string csv = slurp(dir / "scaling.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "set_index,set_size,preimage_size,boundary_size,ratio,residual");
}

TEST(Run, CheckModeExitCodes) {
  std::string cfg = kAffine;
  cfg.insert(1, R"("scaling": {"mode": "check", "k": 0.5}, )");
  EXPECT_EQ(run_experiment("scaling", cfg, scratch("check_half")).exit_code, kExitPass);
  cfg.replace(cfg.find("0.5}"), 3, "1.0");
  EXPECT_EQ(run_experiment("scaling", cfg, scratch("check_one")).exit_code, kExitFail);
}

TEST(Run, UnconvergedEstimateIsInconclusive) {
  const auto dir = scratch("unconverged");
  const char* cfg = R"({"map": {"stages": ["affine 1 4 0", "affine 2 0.5 0", "round"]},
    "family": {"j_from": 3, "j_to": 8}})";
  EXPECT_EQ(run_experiment("scaling", cfg, dir).exit_code, kExitInconclusive);
  EXPECT_EQ(summary(dir)["status"], "INCONCLUSIVE");
}

TEST(Run, NonScalingWitness) {
  const auto dir = scratch("piecewise");
  const auto out = run_experiment("non-scaling", kPiecewise, dir);
  EXPECT_EQ(out.exit_code, kExitPass);
  EXPECT_EQ(out.status, "NOT_SCALING");
  const auto s = summary(dir);
  EXPECT_NEAR(s["results"]["a"]["limit"].get<double>() / s["results"]["b"]["limit"].get<double>(), 2.0, 0.2);
  EXPECT_TRUE(fs::exists(dir / "scaling_a.csv"));
  EXPECT_TRUE(fs::exists(dir / "scaling_b.csv"));
  // Same families, unit slope: no witness.
  std::string affine = kPiecewise;
  affine.replace(affine.find("pwl 1 0 1,2"), 11, "affine 1 1 0");
  EXPECT_EQ(run_experiment("non-scaling", affine, scratch("piecewise_affine")).exit_code, kExitFail);
}

TEST(Run, DriftBoundedAndUnbounded) {
  const auto d4 = scratch("drift4");
  EXPECT_EQ(run_experiment("drift", R"({"drift": {"m": 4.0, "J": 30}})", d4).exit_code, kExitPass);
  const std::string csv = slurp(d4 / "drift.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 31);
  EXPECT_EQ(summary(d4)["results"]["max_drift"].get<double>(), 0.0);
  EXPECT_EQ(run_experiment("drift", R"({"drift": {"m": 2.0, "J": 30}})", scratch("drift2")).exit_code, kExitFail);
}

TEST(Run, SampledChecksPass) {
  EXPECT_EQ(run_experiment("net-check", R"({"seed": 3, "net_check": {"round_trip_samples": 2000, "boxes": 20, "ball_centres": 20}})",
                           scratch("netcheck"))
                .exit_code,
            kExitPass);
  EXPECT_EQ(run_experiment("glued-check", R"({"seed": 3, "glued_check": {"centres": 20, "sets": 10}})", scratch("gluedcheck"))
                .exit_code,
            kExitPass);
  EXPECT_EQ(run_experiment("folner", R"({"family": {"j_from": 3, "j_to": 7, "height_fraction": 0.25}})", scratch("folner"))
                .exit_code,
            kExitPass);
  const auto g = scratch("growth");
  EXPECT_EQ(run_experiment("growth", R"({"growth": {"r_max": 5}})", g).exit_code, kExitPass);
  EXPECT_GT(summary(g)["results"]["log_growth_rate"].get<double>(), 0.5);
}

TEST(Run, SeedRequiredForSampledChecks) {
  EXPECT_THROW(run_experiment("net-check", "{}", scratch("noseed")), ConfigError);
  CliOverrides ov;
  ov.seed = 5;
  EXPECT_NO_THROW(run_experiment("glued-check", R"({"glued_check": {"centres": 5, "sets": 3}})", scratch("seedflag"), ov));
}

TEST(Run, MalformedConfigs) {
  const auto d = scratch("bad");
  EXPECT_THROW(run_experiment("scaling", "{not json", d), ConfigError);
  EXPECT_THROW(run_experiment("scaling", "[1, 2]", d), ConfigError);
  EXPECT_THROW(run_experiment("scaling", R"({"radiuss": 1})", d), ConfigError);
  EXPECT_THROW(run_experiment("scaling", R"({"family": {"kind": "balls"}})", d), ConfigError);
  EXPECT_THROW(run_experiment("scaling", R"({"family": {"j_from": "three"}})", d), ConfigError);
  EXPECT_THROW(run_experiment("scaling", R"({"map": {"stages": ["shear 1 4"]}})", d), ConfigError);
  EXPECT_THROW(run_experiment("scaling", R"({"scaling": {"mode": "check"}})", d), ConfigError);
  EXPECT_THROW(run_experiment("sideways", "{}", d), ConfigError);
}

TEST(Output, ByteIdenticalAcrossRuns) {
  for (const auto& [sub, cfg] : std::vector<std::pair<std::string, std::string>>{
           {"scaling", kAffine}, {"non-scaling", kPiecewise}, {"net-check", R"({"seed": 11, "net_check": {"round_trip_samples": 500, "boxes": 10, "ball_centres": 10}})"}}) {
    const auto a = scratch(sub + "_a"), b = scratch(sub + "_b");
    const auto oa = run_experiment(sub, cfg, a);
    const auto ob = run_experiment(sub, cfg, b);
    ASSERT_EQ(oa.files.size(), ob.files.size());
    for (std::size_t i = 0; i < oa.files.size(); ++i) {
      EXPECT_EQ(oa.files[i].filename(), ob.files[i].filename());
      EXPECT_EQ(slurp(oa.files[i]), slurp(ob.files[i])) << oa.files[i];
    }
  }
}

TEST(Output, DefaultsEchoed) {
  const auto d = scratch("defaults");
  run_experiment("drift", "{}", d);
  const auto c = summary(d)["config"];
  for (const char* key : {"seed", "radius", "tol", "threads", "space", "drift"}) EXPECT_TRUE(c.contains(key)) << key;
  EXPECT_EQ(c["drift"]["m"].get<double>(), 4.0);
  EXPECT_EQ(c["drift"]["J"].get<int>(), 30);
  EXPECT_EQ(c["drift"]["locus"].get<int>(), 1);
  EXPECT_DOUBLE_EQ(c["drift"]["bound"].get<double>(), 0.9624236501192069);
  EXPECT_EQ(c["space"]["gammas"], nlohmann::json::array({2.0}));
  EXPECT_EQ(c["radius"].get<double>(), 1.0);
  EXPECT_EQ(c["tol"].get<double>(), 0.01);
}

TEST(Output, FlagsOverrideConfig) {
  const auto d = scratch("override");
  CliOverrides ov;
  ov.radius = 2.0;
  ov.tol = 0.05;
  ov.threads = 2;
  run_experiment("scaling", R"({"radius": 1.0, "map": {"stages": ["round"]}, "family": {"j_from": 3, "j_to": 6, "height_fraction": 0.25}})",
                 d, ov);
  const auto c = summary(d)["config"];
  EXPECT_EQ(c["radius"].get<double>(), 2.0);
  EXPECT_EQ(c["tol"].get<double>(), 0.05);
  EXPECT_EQ(c["threads"].get<int>(), 2);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  const auto id = write("identity.json", kIdentity);
  const auto pw = write("pw.json", kPiecewise);
  const auto bad = write("bad.json", "{\"family\": 3}");
  const auto out = (dir / "out").string();
  EXPECT_EQ(cli("scaling --config " + id + " --out " + out), 0);
  EXPECT_EQ(cli("non-scaling --config " + pw + " --out " + out), 0);
  EXPECT_EQ(cli("drift --out " + out), 0);
  EXPECT_EQ(cli("scaling --config " + bad + " --out " + out), 64);
  EXPECT_EQ(cli("scaling --config " + id + " --radius -1 --out " + out), 64);
  EXPECT_EQ(cli("scaling --config /nonexistent.json"), 64);
  EXPECT_EQ(cli("frobnicate"), 64);
  EXPECT_EQ(cli(""), 64);
  EXPECT_EQ(cli("net-check --out " + out), 64);
  EXPECT_EQ(cli("net-check --seed 2 --out " + out + " --config " + write("nc.json", R"({"net_check": {"round_trip_samples": 100, "boxes": 5, "ball_centres": 5}})")), 0);
}
