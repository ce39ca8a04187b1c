// Copyright 2026 The diarkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "diarkit/formats.h"
#include "diarkit/timeline.h"
#include "doctest.h"

using namespace diarkit;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

Result cli(const std::string &args) {
  const fs::path tmp = fs::path(DIARKIT_TEST_TMP) / "cli_stdout.txt";
  fs::create_directories(tmp.parent_path());
  const std::string cmd =
      std::string("\"") + DIARKIT_CLI + "\" " + args + " > \"" + tmp.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  Result r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, ""};
  if (fs::exists(tmp)) r.out = read_file(tmp.string());
  return r;
}

std::string scratch(const std::string &name) {
  const fs::path dir = fs::path(DIARKIT_TEST_TMP) / "cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string q(const std::string &path) { return "\"" + path + "\""; }

}  // namespace

TEST_CASE("cli synth then run") {
  const std::string dir = scratch("run");
  REQUIRE(cli("synth --out " + q(dir) + " --recordings 3 --turns 10 --overlap 0.2").code == 0);
  CHECK(fs::exists(dir + "/config.json"));
  const Result r = cli("run " + q(dir + "/config.json"));
  CHECK(r.code == 0);
  CHECK(r.out.find("OVERALL") != std::string::npos);
  CHECK(fs::exists(dir + "/out/main.rttm"));
  CHECK(parse_rttm(read_file(dir + "/out/main.rttm")).size() == 3);

  const Result dump = cli("run --print-config " + q(dir + "/config.json"));
  CHECK(dump.code == 0);
  CHECK(dump.out.find("\"threshold\"") != std::string::npos);

  const Result der = cli("score der --ref " + q(dir + "/ref.rttm") + " --hyp " +
                         q(dir + "/out/main.rttm"));
  CHECK(der.code == 0);
  CHECK(der.out.find("rec001") != std::string::npos);
}

TEST_CASE("cli run exit codes") {
  const std::string dir = scratch("codes");
  REQUIRE(cli("synth --out " + q(dir) + " --recordings 2 --turns 6").code == 0);
  fs::remove(dir + "/rec001.xvec");
  std::string cfg = read_file(dir + "/config.json");
  const std::string dir_key = "\"dir\": \".\"";
  REQUIRE(cfg.find(dir_key) != std::string::npos);
  cfg.replace(cfg.find(dir_key), dir_key.size(), dir_key + ", \"recordings\": [\"rec000\", \"rec001\"]");
  write_file(dir + "/partial.json", cfg);
  CHECK(cli("run " + q(dir + "/partial.json")).code == 2);

  write_file(dir + "/bad.json", R"({"vbx": {"loop_p": 3}})");
  CHECK(cli("run " + q(dir + "/bad.json")).code == 1);
  write_file(dir + "/typo.json", R"({"clusterr": {}})");
  CHECK(cli("run " + q(dir + "/typo.json")).code == 1);
  CHECK(cli("run " + q(dir + "/nothere.json")).code == 1);
  CHECK(cli("frobnicate").code != 0);
}

TEST_CASE("cli stage commands chain") {
  const std::string dir = scratch("stages");
  REQUIRE(cli("synth --out " + q(dir) + " --recordings 1 --turns 8 --overlap 0.2").code == 0);
  const std::string rec = dir + "/rec000";

  REQUIRE(cli("vad --scores " + q(rec + ".vad.post") + " --out " + q(dir + "/speech.lab")).code == 0);
  const Timeline speech = read_lab(read_file(dir + "/speech.lab"));
  CHECK_FALSE(speech.empty());

  const Result win = cli("windows --lab " + q(dir + "/speech.lab"));
  REQUIRE(win.code == 0);
  const XVectorSequence xv = read_xvectors(read_file(rec + ".xvec"));
  CHECK(static_cast<std::size_t>(std::count(win.out.begin(), win.out.end(), '\n')) ==
        xv.size());

  REQUIRE(cli("cluster --xvec " + q(rec + ".xvec") + " --center recording --out " +
              q(dir + "/init.rttm")).code == 0);
  REQUIRE(cli("vbx --xvec " + q(rec + ".xvec") + " --init " + q(dir + "/init.rttm") +
              " --model " + q(dir + "/model.json") + " --center recording --out " +
              q(dir + "/vbx.rttm") + " --second " + q(dir + "/vbx.second")).code == 0);
  REQUIRE(cli("overlap --rttm " + q(dir + "/vbx.rttm") + " --osd " + q(rec + ".osd.post") +
              " --mode vbx --second " + q(dir + "/vbx.second") + " --out " +
              q(dir + "/final.rttm")).code == 0);
  REQUIRE(cli("overlap --rttm " + q(dir + "/vbx.rttm") + " --osd " + q(rec + ".osd.post") +
              " --mode heuristic --out " + q(dir + "/heur.rttm")).code == 0);
  const auto final_rttm = parse_rttm(read_file(dir + "/final.rttm"));
  REQUIRE(final_rttm.size() == 1);
  CHECK_FALSE(overlap_regions(final_rttm[0]).empty());

  const Result fused = cli("fuse --in " + q(dir + "/final.rttm") + " " + q(dir + "/heur.rttm") +
                           " " + q(dir + "/vbx.rttm") + " --rank");
  CHECK(fused.code == 0);
  CHECK(parse_rttm(fused.out).size() == 1);

  const Result der = cli("score der --ref " + q(dir + "/ref.rttm") + " --hyp " +
                         q(dir + "/final.rttm") + " --collar 0.25");
  CHECK(der.code == 0);
  CHECK(der.out.find("OVERALL") != std::string::npos);

  CHECK(cli("cluster --xvec " + q(dir + "/missing.xvec")).code == 1);
  CHECK(cli("overlap --rttm " + q(dir + "/vbx.rttm") + " --osd " + q(rec + ".osd.post") +
            " --mode vbx").code == 1);
}

TEST_CASE("cli verification scoring") {
  const std::string dir = scratch("verif");
  write_file(dir + "/scored.txt", "0.9 target\n0.1 nontarget\n0.5 target\n0.6 nontarget\n");
  Result r = cli("score verif --trials " + q(dir + "/scored.txt"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("trials 4") != std::string::npos);
  CHECK(r.out.find("EER") != std::string::npos);

  write_file(dir + "/list.txt", "a b target\na c nontarget\n");
  write_file(dir + "/s1.txt", "a b 2.0\na c -1.0\n");
  write_file(dir + "/s2.txt", "a b 1.0\na c 0.0\n");
  r = cli("score verif --trials " + q(dir + "/list.txt") + " --scores " + q(dir + "/s1.txt") +
          " " + q(dir + "/s2.txt") + " --weights 0.5 0.5");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("EER 0.0000%") != std::string::npos);

  write_file(dir + "/emb.txt", "a 1 0\nb 1 0.1\nc -1 0\n");
  r = cli("score verif --trials " + q(dir + "/list.txt") + " --embeddings " + q(dir + "/emb.txt"));
  CHECK(r.code == 0);
  CHECK(cli("score verif --trials " + q(dir + "/list.txt")).code == 1);
}
