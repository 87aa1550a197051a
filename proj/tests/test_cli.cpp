// End-to-end contract tests for the anomdiff binary: exit codes, file
// layout, determinism, and config/flag precedence. The binary path comes
// from the build system.
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "anomdiff/csv.hpp"
#include "anomdiff/detect.hpp"
#include "anomdiff/types.hpp"
#include "doctest.h"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace anomdiff;

namespace {

int run_cli(const std::string& arg_str, const std::string& log_path) {
  const std::string cmd =
      std::string("\"") + ANOMDIFF_CLI_PATH + "\" " + arg_str + " > \"" + log_path + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// Relative paths of all regular files under root, sorted.
std::vector<std::string> file_tree(const std::string& root) {
  std::vector<std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) {
      out.push_back(fs::relative(entry.path(), root).generic_string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::size_t at = 0;
  while (true) {
    const std::size_t comma = line.find(',', at);
    if (comma == std::string::npos) {
      out.push_back(line.substr(at));
      break;
    }
    out.push_back(line.substr(at, comma - at));
    at = comma + 1;
  }
  return out;
}

// Small, fast simulation shared by most cases.
const std::string kSmallSim = " --mean-particles 25 --field-size 256 ";

}  // namespace

TEST_CASE("cli: simulate twice is byte-identical") {
  testutil::TempDir tmp("cli_det");
  const std::string log = tmp.file("log.txt");
  CHECK(run_cli("simulate --out " + tmp.file("a") + " --model ssm --seed 1" + kSmallSim, log) == 0);
  CHECK(run_cli("simulate --out " + tmp.file("b") + " --model ssm --seed 1" + kSmallSim, log) == 0);

  const auto tree_a = file_tree(tmp.file("a"));
  const auto tree_b = file_tree(tmp.file("b"));
  REQUIRE(tree_a == tree_b);
  CHECK(tree_a.size() >= 5);  // run.json + experiment CSVs + FOV files
  for (const auto& rel : tree_a) {
    CAPTURE(rel);
    CHECK(read_file(tmp.file("a") + "/" + rel) == read_file(tmp.file("b") + "/" + rel));
  }
}

TEST_CASE("cli: simulate fixture mode emits per-model experiments") {
  testutil::TempDir tmp("cli_fixture");
  const std::string log = tmp.file("log.txt");
  CHECK(run_cli("simulate --out " + tmp.file("fix") + " --per-model 2 --seed 3 --jobs 4" +
                    kSmallSim,
                log) == 0);
  for (const std::string model : {"ssm", "msm", "dim", "tcm", "qtm"}) {
    for (const std::string idx : {"_00", "_01"}) {
      CAPTURE(model + idx);
      CHECK(fs::exists(tmp.file("fix") + "/" + model + idx + "/trajectories.csv"));
      CHECK(fs::exists(tmp.file("fix") + "/" + model + idx + "/fov_00/tensor_00.bin"));
    }
  }
}

TEST_CASE("cli: blank video exits 2 from track") {
  testutil::TempDir tmp("cli_blank");
  const std::string log = tmp.file("log.txt");
  // A particle density this low leaves the field empty; simulate itself
  // reports the empty result.
  CHECK(run_cli("simulate --out " + tmp.file("sim") +
                    " --model ssm --seed 7 --mean-particles 0.0001 --field-size 256",
                log) == 2);
  CHECK(run_cli("render --in " + tmp.file("sim") + "/ssm --seed 7 --field-size 256", log) == 0);
  CHECK(run_cli("track --frames " + tmp.file("sim") + "/ssm/fov_00/frames --out " +
                    tmp.file("trk"),
                log) == 2);
  // The empty result still leaves a parseable detections file behind.
  CHECK(read_detections_csv(tmp.file("trk") + "/detections.csv").empty());
}

TEST_CASE("cli: track maps every vip label") {
  testutil::TempDir tmp("cli_vip");
  const std::string log = tmp.file("log.txt");
  CHECK(run_cli("simulate --out " + tmp.file("sim") +
                    " --model ssm --seed 5 --with-video --vips 6" + kSmallSim,
                log) == 0);
  const std::string fov = tmp.file("sim") + "/ssm/fov_00";
  REQUIRE(fs::exists(fov + "/vip.pgm"));
  const auto truth_map = read_vip_map_csv(fov + "/vip_truth.csv");
  REQUIRE(!truth_map.empty());

  CHECK(run_cli("track --frames " + fov + "/frames --vip " + fov + "/vip.pgm --out " +
                    tmp.file("trk"),
                log) == 0);
  const auto vip_map = read_vip_map_csv(tmp.file("trk") + "/vip_map.csv");
  CHECK(vip_map.size() == truth_map.size());  // one row per label
  for (const auto& [label, traj] : vip_map) {
    CAPTURE(label);
    CHECK(truth_map.count(label) == 1);
  }
}

TEST_CASE("cli: infer, segment, evaluate chain on truth trajectories") {
  testutil::TempDir tmp("cli_chain");
  const std::string log = tmp.file("log.txt");
  CHECK(run_cli("simulate --out " + tmp.file("sim") + " --model msm --seed 2" + kSmallSim, log) ==
        0);
  const std::string exp = tmp.file("sim") + "/msm";
  CHECK(run_cli("infer --traj " + exp + "/trajectories.csv --out " + tmp.file("inf"), log) == 0);
  CHECK(run_cli("segment --params " + tmp.file("inf") + "/params.csv --out " + tmp.file("seg"),
                log) == 0);
  CHECK(run_cli("evaluate --pred " + tmp.file("seg") + "/segments.csv --truth " + exp +
                    "/truth_params.csv --out " + tmp.file("ev"),
                log) == 0);

  const std::string csv = read_file(tmp.file("ev") + "/report.csv");
  REQUIRE(csv.rfind("exp,n_trajs,rmse_cp,jsc_cp,alpha_mae,k_msle,state_f1,alpha_w1,k_w1\n", 0) ==
          0);
  const std::string json = read_file(tmp.file("ev") + "/report.json");
  CHECK(json.find("\"combined\"") != std::string::npos);
  CHECK(json.find("\"inputs\"") != std::string::npos);
}

TEST_CASE("cli: evaluate truth against itself scores perfectly") {
  testutil::TempDir tmp("cli_self");
  const std::string log = tmp.file("log.txt");
  CHECK(run_cli("simulate --out " + tmp.file("sim") + " --model tcm --seed 4" + kSmallSim, log) ==
        0);
  const std::string truth = tmp.file("sim") + "/tcm/truth_params.csv";
  CHECK(run_cli("evaluate --pred " + truth + " --truth " + truth +
                    " --pred-format params --out " + tmp.file("ev"),
                log) == 0);

  const std::string csv = read_file(tmp.file("ev") + "/report.csv");
  const std::size_t eol = csv.find('\n');
  REQUIRE(eol != std::string::npos);
  const auto row = split_csv_row(csv.substr(eol + 1, csv.find('\n', eol + 1) - eol - 1));
  REQUIRE(row.size() == 9);
  CHECK(std::stod(row[2]) == 0.0);  // rmse_cp
  CHECK(std::stod(row[3]) == 1.0);  // jsc_cp
  CHECK(std::stod(row[4]) == 0.0);  // alpha_mae
  CHECK(std::stod(row[5]) == 0.0);  // k_msle
  CHECK(std::stod(row[6]) == 1.0);  // state_f1
  CHECK(std::stod(row[7]) == 0.0);  // alpha_w1
  CHECK(std::stod(row[8]) == 0.0);  // k_w1
}

TEST_CASE("cli: pelt and window segmenters both emit valid partitions") {
  testutil::TempDir tmp("cli_algos");
  const std::string log = tmp.file("log.txt");
  CHECK(run_cli("simulate --out " + tmp.file("sim") + " --model msm --seed 6" + kSmallSim, log) ==
        0);
  CHECK(run_cli("infer --traj " + tmp.file("sim") + "/msm/trajectories.csv --out " +
                    tmp.file("inf"),
                log) == 0);
  for (const std::string algo : {"pelt", "window"}) {
    CAPTURE(algo);
    const std::string out = tmp.file("seg_" + algo);
    CHECK(run_cli("segment --params " + tmp.file("inf") + "/params.csv --out " + out +
                      " --cp-algo " + algo,
                  log) == 0);
    // The reader enforces the partition invariant; loading is the check.
    const auto segs = read_segments_csv(out + "/segments.csv");
    CHECK(!segs.empty());
    for (const auto& s : segs) s.check_valid();
  }
}

TEST_CASE("cli: pipeline reruns are byte-identical") {
  testutil::TempDir tmp("cli_pipe");
  const std::string log = tmp.file("log.txt");
  const std::string flags = " --model ssm --seed 1 --mean-particles 20 --field-size 256";
  CHECK(run_cli("pipeline --out " + tmp.file("p1") + flags, log) == 0);
  CHECK(run_cli("pipeline --out " + tmp.file("p2") + flags, log) == 0);
  CHECK(read_file(tmp.file("p1") + "/report.json") == read_file(tmp.file("p2") + "/report.json"));
  CHECK(read_file(tmp.file("p1") + "/report.csv") == read_file(tmp.file("p2") + "/report.csv"));
}

TEST_CASE("cli: video route produces a vip-scored report") {
  testutil::TempDir tmp("cli_video");
  const std::string log = tmp.file("log.txt");
  CHECK(run_cli("pipeline --out " + tmp.file("v") +
                    " --model ssm --seed 3 --with-video --vips 5" + kSmallSim,
                log) == 0);
  CHECK(fs::exists(tmp.file("v") + "/track/ssm/fov_00/trajectories.csv"));
  CHECK(fs::exists(tmp.file("v") + "/track/ssm/fov_00/vip_map.csv"));
  const std::string csv = read_file(tmp.file("v") + "/report.csv");
  CHECK(csv.find("ssm,") != std::string::npos);
}

TEST_CASE("cli: config file merges under explicit flags") {
  testutil::TempDir tmp("cli_config");
  const std::string log = tmp.file("log.txt");
  write_file(tmp.file("cfg.json"),
             "{\"seed\": 9, \"sim\": {\"model\": \"qtm\", \"mean_particles\": 20.0, "
             "\"field_size\": 256}, \"cp\": {\"algorithm\": \"pelt\"}}\n");
  CHECK(run_cli("simulate --config " + tmp.file("cfg.json") + " --out " + tmp.file("out") +
                    " --seed 11",
                log) == 0);
  const std::string run = read_file(tmp.file("out") + "/run.json");
  CHECK(run.find("\"seed\": 11") != std::string::npos);      // flag wins
  CHECK(run.find("\"model\": \"qtm\"") != std::string::npos);  // file applies
  CHECK(run.find("\"algorithm\": \"pelt\"") != std::string::npos);
  CHECK(fs::exists(tmp.file("out") + "/qtm/trajectories.csv"));
}

TEST_CASE("cli: exit codes for usage, empty, and validation failures") {
  testutil::TempDir tmp("cli_codes");
  const std::string log = tmp.file("log.txt");
  CHECK(run_cli("simulate --out " + tmp.file("x") + " --bogus-flag 1", log) == 1);
  CHECK(run_cli("simulate", log) == 1);  // missing required --out
  CHECK(run_cli("simulate --out " + tmp.file("y") + " --mean-particles -5", log) == 3);
  CHECK(run_cli("track --frames " + tmp.file("missing") + " --out " + tmp.file("z"), log) == 3);
  write_file(tmp.file("bad.json"), "{not json\n");
  CHECK(run_cli("simulate --config " + tmp.file("bad.json") + " --out " + tmp.file("w"), log) ==
        3);
  CHECK(run_cli("--help", log) == 0);
}
