// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <map>
#include <sstream>

#include "hinrank/cli.hpp"
#include "hinrank/ingest.hpp"
#include "temp_dir.hpp"

using namespace hinrank;
using testing_util::slurp;
using testing_util::TempDir;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> small_train(const fs::path& dataset, const fs::path& model) {
  return {"train", "--dataset", dataset.string(), "--out", model.string(), "--dim", "16",
          "--epochs", "10", "--seed", "5"};
}

/// Small generated dataset, ingested once per test binary.
struct Pipeline {
  TempDir dir{"cli"};
  fs::path data = dir.path / "data";
  fs::path dataset = dir.path / "dataset";
  fs::path model = dir.path / "model.txt";

  Pipeline() {
    REQUIRE(cli_run({"generate", "--out", data.string(), "--patients", "300", "--clusters", "5"}).code == 0);
    REQUIRE(cli_run({"ingest", "--data", data.string(), "--out", dataset.string()}).code == 0);
    REQUIRE(cli_run(small_train(dataset, model)).code == 0);
  }

  fs::path diagnostic_events() const {
    auto stays = read_events_file(dataset / "test.tsv");
    for (auto& s : stays) {
      std::erase_if(s.events, [](const ClinicalEvent& e) { return !is_diagnostic(e.type); });
    }
    const fs::path p = dir.path / "diagnostic.tsv";
    write_events_file(p, stays);
    return p;
  }
};

Pipeline& pipeline() {
  static Pipeline p;
  return p;
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(cli_run({}).code == cli::kConfigError);
  CHECK(cli_run({"frobnicate"}).code == cli::kConfigError);
  CHECK(cli_run({"--help"}).code == cli::kOk);
  CHECK(cli_run({"train", "--dataset", "x"}).code == cli::kConfigError);
}

TEST_CASE("pipeline artifacts and manifests") {
  auto& p = pipeline();
  for (const char* f : {"train.tsv", "test.tsv", "report.txt", "manifest.txt"}) {
    CHECK(fs::exists(p.dataset / f));
  }
  CHECK(fs::exists(p.data / "manifest.txt"));
  const std::string manifest = slurp(p.dataset / "manifest.txt");
  CHECK(manifest.find("input = " + (p.data / "patients.csv").string() + " fnv1a:" +
                      cli::hex_digest(cli::digest_file(p.data / "patients.csv"))) != std::string::npos);
  CHECK(fs::exists(p.model.string() + ".manifest"));
  CHECK(slurp(p.dataset / "report.txt").find("rows_rejected = 0") != std::string::npos);

  const auto g = cli_run({"graph", "--dataset", p.dataset.string()});
  CHECK(g.code == 0);
  CHECK(g.out.find("instances.symp-diag = ") != std::string::npos);

  const auto ev = cli_run({"evaluate", "--model", p.model.string(), "--dataset", p.dataset.string(), "--baseline"});
  CHECK(ev.code == 0);
  CHECK(ev.out.find("map@3 = ") != std::string::npos);
  CHECK(ev.out.find("baseline.map@3 = ") != std::string::npos);
}

TEST_CASE("missing input table names the file") {
  TempDir d("cli_missing");
  REQUIRE(cli_run({"generate", "--out", d.path.string(), "--patients", "40", "--clusters", "3"}).code == 0);
  fs::remove(d.path / "symptoms.csv");
  const auto r = cli_run({"ingest", "--data", d.path.string(), "--out", (d.path / "ds").string()});
  CHECK(r.code == cli::kDataError);
  CHECK(r.err.find("symptoms.csv") != std::string::npos);
}

TEST_CASE("predict writes k lines per patient") {
  auto& p = pipeline();
  const fs::path events = p.diagnostic_events();
  const fs::path out = p.dir.path / "pred.tsv";
  const auto r = cli_run({"predict", "--model", p.model.string(), "--events", events.string(), "--k", "10",
                          "--out", out.string()});
  REQUIRE(r.code == 0);
  std::istringstream lines(slurp(out));
  std::string line;
  std::map<std::string, std::vector<double>> per_stay;
  while (std::getline(lines, line)) {
    std::vector<std::string> fields;
    split_delimited(line, '\t', fields);
    REQUIRE(fields.size() == 4);
    auto& scores = per_stay[fields[0]];
    CHECK(std::stoul(fields[1]) == scores.size() + 1);
    scores.push_back(std::stod(fields[3]));
  }
  CHECK(per_stay.size() == read_events_file(events).size());
  for (const auto& [stay, scores] : per_stay) {
    CHECK(scores.size() == 10);
    CHECK(std::is_sorted(scores.rbegin(), scores.rend()));
  }
}

TEST_CASE("treatment events in prediction input exit with the leakage code") {
  auto& p = pipeline();
  const fs::path out = p.dir.path / "leak.tsv";
  const auto r = cli_run({"predict", "--model", p.model.string(), "--events", (p.dataset / "test.tsv").string(),
                          "--out", out.string()});
  CHECK(r.code == cli::kLeakageError);
  CHECK(r.out.empty());
  CHECK_FALSE(fs::exists(out));

  // Same through the installed binary.
  const std::string cmd = std::string(HINRANK_BINARY) + " predict --model " + p.model.string() + " --events " +
                          (p.dataset / "test.tsv").string() + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == cli::kLeakageError);
}

TEST_CASE("configuration errors") {
  auto& p = pipeline();
  const fs::path m = p.dir.path / "bad.txt";
  auto args = small_train(p.dataset, m);
  args.insert(args.end(), {"--schemas", "lab-diag,bogus-path"});
  const auto r = cli_run(args);
  CHECK(r.code == cli::kConfigError);
  for (const char* label : {"lab-diag", "symp-diag", "pati-lab", "micro-symp"}) {
    CHECK(r.err.find(label) != std::string::npos);
  }
  args = small_train(p.dataset, m);
  args.insert(args.end(), {"--omega", "1.5"});
  CHECK(cli_run(args).code == cli::kConfigError);
  CHECK(cli_run({"evaluate", "--model", (p.dir.path / "none.txt").string(), "--dataset", p.dataset.string()}).code ==
        cli::kDataError);
}

TEST_CASE("reruns are reproducible") {
  auto& p = pipeline();
  const fs::path again = p.dir.path / "again.txt";
  REQUIRE(cli_run(small_train(p.dataset, again)).code == 0);
  CHECK(slurp(again) == slurp(p.model));

  const fs::path ds2 = p.dir.path / "dataset2";
  REQUIRE(cli_run({"ingest", "--data", p.data.string(), "--out", ds2.string()}).code == 0);
  CHECK(cli::digest_file(ds2 / "train.tsv") == cli::digest_file(p.dataset / "train.tsv"));
  CHECK(cli::digest_file(ds2 / "test.tsv") == cli::digest_file(p.dataset / "test.tsv"));

  const std::vector<std::string> ev = {"evaluate", "--model", p.model.string(), "--dataset", p.dataset.string()};
  CHECK(cli_run(ev).out == cli_run(ev).out);
}

TEST_CASE("digest matches the FNV-1a reference") {
  TempDir d("cli_digest");
  d.write("a", "a");
  d.write("empty", "");
  CHECK(cli::digest_file(d.path / "empty") == 0xcbf29ce484222325ULL);
  CHECK(cli::digest_file(d.path / "a") == 0xaf63dc4c8601ec8cULL);
  CHECK(cli::hex_digest(0xabcULL) == "0000000000000abc");
}
