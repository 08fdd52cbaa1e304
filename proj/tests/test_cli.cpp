#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "logldp/io.hpp"
#include "logldp/skeleton.hpp"

using namespace logldp;
namespace fs = std::filesystem;

#ifndef LOGLDP_BIN
#error "LOGLDP_BIN must point at the CLI binary"
#endif

namespace {

const std::string kBin = LOGLDP_BIN;

int run(const std::string& args) {
  const std::string cmd = kBin + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path tmp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("logldp_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSkeletonConfig = R"({
  "domain": {"L": 1.0, "n_modes": 6, "n_quad": 13},
  "sigma": {"kind": "linear", "param": 0.5},
  "solver": {"dt": 0.001, "T": 0.2, "oracle_mode": "heat_only"},
  "initial": {"mode": 1, "amplitude": 1.0},
  "control": {"pieces": 8, "value": 0.0},
  "seed": 3
})";

}  // namespace

TEST_CASE("deterministic double formatting round-trips") {
  for (double x : {0.0, 1.0, -1.5, 0.1, 3.141592653589793, 1e-300, 1e300}) {
    const std::string s = format_double(x);
    CHECK(std::stod(s) == x);
  }
}

TEST_CASE("trajectory binary round trip") {
  const fs::path dir = tmp_dir("bin");
  DomainConfig dom{1.0, 4, 9, 1};
  Trajectory traj;
  for (int r = 0; r <= 10; ++r) {
    traj.times.push_back(r * 0.01);
    SpectralField u = SpectralField::zero(dom);
    for (int i = 0; i < 4; ++i) u.coeffs[i] = std::sin(r + i * 0.5);
    traj.states.push_back(u);
  }
  write_trajectory_bin(dir / "t.bin", traj);
  const Trajectory back = read_trajectory_bin(dir / "t.bin");
  REQUIRE(back.times.size() == traj.times.size());
  for (std::size_t r = 0; r < traj.times.size(); ++r)
    for (int i = 0; i < 4; ++i)
      CHECK(back.states[r].coeffs[i] == traj.states[r].coeffs[i]);
}

TEST_CASE("file hash is stable and content sensitive") {
  const fs::path dir = tmp_dir("hash");
  write_file(dir / "a", "hello");
  write_file(dir / "b", "hello");
  write_file(dir / "c", "hellp");
  CHECK(file_hash(dir / "a") == file_hash(dir / "b"));
  CHECK(file_hash(dir / "a") != file_hash(dir / "c"));
  CHECK(file_hash(dir / "a").size() == 16);
}

TEST_CASE("cli rejects malformed configs with exit code 2") {
  const fs::path dir = tmp_dir("bad");
  write_file(dir / "not_json.json", "{nope");
  CHECK(run("skeleton --config " + (dir / "not_json.json").string() +
            " --output " + (dir / "o1").string()) == 2);
  write_file(dir / "unknown.json", R"({"domain": {"n_modez": 8}})");
  CHECK(run("skeleton --config " + (dir / "unknown.json").string() +
            " --output " + (dir / "o2").string()) == 2);
  write_file(dir / "aliased.json", R"({"domain": {"n_modes": 8, "n_quad": 9}})");
  CHECK(run("skeleton --config " + (dir / "aliased.json").string() +
            " --output " + (dir / "o3").string()) == 2);
  CHECK(run("skeleton --config " + (dir / "missing.json").string()) == 2);
}

TEST_CASE("cli skeleton run produces artifacts and an exact linear solution") {
  const fs::path dir = tmp_dir("skel");
  write_file(dir / "cfg.json", kSkeletonConfig);
  CHECK(run("skeleton --config " + (dir / "cfg.json").string() + " --output " +
            (dir / "out").string() + " --threads 1") == 0);
  CHECK(fs::exists(dir / "out" / "trajectory.csv"));
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  const std::string results = read_file(dir / "out" / "results.json");
  CHECK(results.find("heat_oracle_max_error") != std::string::npos);
  // linear oracle run: exact per-mode semigroup
  const Trajectory traj = read_trajectory_bin(dir / "out" / "trajectory.bin");
  const DomainConfig dom{1.0, 6, 6, 1};
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    const double expect = std::exp(-eigenvalue(dom, 1) * traj.times[r]);
    CHECK(std::abs(traj.states[r].coeffs[0] - expect) < 1e-12);
  }
}

TEST_CASE("cli numerical failures exit with code 3") {
  const fs::path dir = tmp_dir("blowup");
  write_file(dir / "cfg.json", R"({
    "domain": {"n_modes": 4, "n_quad": 9},
    "sigma": {"kind": "linear", "param": 0.5},
    "solver": {"dt": 0.001, "T": 1.0, "overflow_guard": 1e4},
    "initial": {"mode": 1, "amplitude": 1e5},
    "control": {"pieces": 8, "value": 0.0}
  })");
  CHECK(run("skeleton --config " + (dir / "cfg.json").string() + " --output " +
            (dir / "out").string()) == 3);
}

TEST_CASE("cli runs are byte-identical across thread counts") {
  const fs::path dir = tmp_dir("det");
  write_file(dir / "cfg.json", R"({
    "domain": {"n_modes": 6, "n_quad": 13},
    "sigma": {"kind": "linear", "param": 0.5},
    "solver": {"dt": 0.002, "T": 0.2},
    "initial": {"mode": 1, "amplitude": 0.8},
    "ensemble": {"n_paths": 16, "eps": 0.2},
    "seed": 5
  })");
  CHECK(run("simulate --config " + (dir / "cfg.json").string() + " --output " +
            (dir / "t1").string() + " --threads 1") == 0);
  CHECK(run("simulate --config " + (dir / "cfg.json").string() + " --output " +
            (dir / "t8").string() + " --threads 8") == 0);
  CHECK(read_file(dir / "t1" / "paths.csv") == read_file(dir / "t8" / "paths.csv"));
  CHECK(read_file(dir / "t1" / "results.json") ==
        read_file(dir / "t8" / "results.json"));
}

TEST_CASE("cli seed override changes the output, replay restores it") {
  const fs::path dir = tmp_dir("seed");
  write_file(dir / "cfg.json", R"({
    "domain": {"n_modes": 4, "n_quad": 9},
    "sigma": {"kind": "linear", "param": 0.5},
    "solver": {"dt": 0.002, "T": 0.2},
    "initial": {"mode": 1, "amplitude": 0.8},
    "ensemble": {"n_paths": 8, "eps": 0.2},
    "seed": 5
  })");
  const std::string cfg = (dir / "cfg.json").string();
  CHECK(run("simulate --config " + cfg + " --output " + (dir / "a").string()) == 0);
  CHECK(run("simulate --config " + cfg + " --output " + (dir / "b").string() +
            " --seed 99") == 0);
  CHECK(run("simulate --config " + cfg + " --output " + (dir / "c").string() +
            " --seed 99") == 0);
  CHECK(read_file(dir / "a" / "paths.csv") != read_file(dir / "b" / "paths.csv"));
  CHECK(read_file(dir / "b" / "paths.csv") == read_file(dir / "c" / "paths.csv"));
}

TEST_CASE("report summarizes a finished run") {
  const fs::path dir = tmp_dir("report");
  write_file(dir / "cfg.json", kSkeletonConfig);
  REQUIRE(run("skeleton --config " + (dir / "cfg.json").string() + " --output " +
              (dir / "out").string()) == 0);
  CHECK(run("report " + (dir / "out").string()) == 0);
  CHECK(run("report " + (dir / "empty").string()) == 2);
}
