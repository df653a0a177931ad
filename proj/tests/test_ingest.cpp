// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "hinrank/cohort.hpp"
#include "hinrank/config.hpp"
#include "hinrank/errors.hpp"
#include "hinrank/ingest.hpp"
#include "temp_dir.hpp"

using namespace hinrank;
namespace fs = std::filesystem;

using testing_util::TempDir;

namespace {

void write_minimal_tables(const TempDir& d) {
  d.write("patients.csv",
          "stay_id,gender,ethnicity,age\n"
          "s1,F,white,45\n"
          "s2,M,asian,12\n"
          "s3,M,black,70\n");
  d.write("labevents.csv",
          "stay_id,itemid,flag\n"
          "s1,glucose,abnormal\n"
          "s1,glucose,abnormal\n"  // duplicate node
          "s1,sodium,\n"           // missing flag -> normal
          "s2,glucose,normal\n"
          "s3,glucose,weird\n"     // rejected
          "s3,sodium\n");          // malformed
  d.write("microbiologyevents.csv", "stay_id,spec_itemid,interpretation\n");
  d.write("symptoms.csv", "stay_id,symptom\ns1,\"fever, high\"\ns3,cough\n");
  d.write("prescriptions.csv", "stay_id,generic_drug_name\ns1,aspirin\n");
  d.write("procedures_icd.csv", "stay_id,icd9_code\ns3,3961\n");
  d.write("diagnoses_icd.csv", "stay_id,icd9_code\ns1,4019\ns3,25000\ns3,BAD\n");
}

std::size_t event_total(const std::vector<PatientStay>& stays) {
  std::size_t n = 0;
  for (const auto& s : stays) n += s.events.size();
  return n;
}

}  // namespace

TEST_CASE("key-value config") {
  std::istringstream in("# comment\nomega = 0.5\n\nname = a b  # trailing\nomega = 0.7\n");
  const auto kv = KeyValueConfig::parse(in);
  CHECK(kv.get_double("omega", 0) == doctest::Approx(0.7));
  CHECK(kv.get_string("name", "") == "a b");
  CHECK(kv.entries().size() == 2);
  CHECK(kv.get_uint("missing", 9) == 9);
  CHECK(split_list(" a, b ,,c ") == std::vector<std::string>{"a", "b", "c"});
  std::istringstream bad("novalue\n");
  CHECK_THROWS_AS(KeyValueConfig::parse(bad), ConfigError);
  std::istringstream num("x = abc\n");
  CHECK_THROWS_AS(KeyValueConfig::parse(num).get_double("x", 0), ConfigError);
}

TEST_CASE("delimited split honors quotes") {
  std::vector<std::string> f;
  REQUIRE(split_delimited("a,\"b, c\",\"d \"\"q\"\"\",", ',', f));
  CHECK(f == std::vector<std::string>{"a", "b, c", "d \"q\"", ""});
  CHECK_FALSE(split_delimited("a,\"open", ',', f));
}

TEST_CASE("load tables applies mapping rules and counts rows") {
  TempDir d("load");
  write_minimal_tables(d);
  const auto r = load_tables(d.path, TableSpec::standard());
  const auto& rep = r.report;

  // s2 is under 15 and is dropped whole.
  REQUIRE(r.stays.size() == 2);
  CHECK(r.stays[0].stay_id == "s1");
  CHECK(r.stays[1].stay_id == "s3");
  CHECK(rep.stays_excluded == 1);
  CHECK(rep.rows_duplicate == 1);
  CHECK(rep.rows_rejected == 2);
  CHECK(rep.rows_malformed == 1);
  CHECK(rep.rows_accepted == event_total(r.stays));
  CHECK(rep.rows_read == rep.rows_accepted + rep.rows_rejected + rep.rows_malformed +
                             rep.rows_duplicate + rep.rows_excluded);

  std::set<std::string> s1;
  for (const auto& e : r.stays[0].events) s1.insert(map_event(e).str());
  CHECK(s1.count("lab:glucose:abnormal"));
  CHECK(s1.count("lab:sodium:normal"));
  CHECK(s1.count("symp:fever, high"));
  CHECK(s1.count("diag:4019"));
  CHECK(s1.count("age:age:30-64"));
}

TEST_CASE("missing table file names the file") {
  TempDir d("missing");
  write_minimal_tables(d);
  fs::remove(d.path / "symptoms.csv");
  try {
    load_tables(d.path, TableSpec::standard());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("symptoms.csv") != std::string::npos);
  }
}

TEST_CASE("missing column is a data error") {
  TempDir d("column");
  write_minimal_tables(d);
  d.write("symptoms.csv", "stay_id,token\ns1,fever\n");
  CHECK_THROWS_AS(load_tables(d.path, TableSpec::standard()), DataError);
}

TEST_CASE("table spec round-trips through its text form") {
  TableSpec spec = TableSpec::standard();
  spec.delimiter = '\t';
  spec.missing_lab_flag = "abnormal";
  std::ostringstream out;
  spec.write(out);
  std::istringstream in(out.str());
  const TableSpec back = TableSpec::from_config(KeyValueConfig::parse(in));
  CHECK(back.delimiter == '\t');
  CHECK(back.missing_lab_flag == "abnormal");
  REQUIRE(back.sources.size() == spec.sources.size());
  for (std::size_t i = 0; i < spec.sources.size(); ++i) {
    CHECK(back.sources[i].file == spec.sources[i].file);
    CHECK(back.sources[i].type == spec.sources[i].type);
    CHECK(back.sources[i].name_column == spec.sources[i].name_column);
    CHECK(back.sources[i].value_column == spec.sources[i].value_column);
  }
}

TEST_CASE("split sizes, disjointness and determinism") {
  std::vector<PatientStay> stays;
  for (int i = 0; i < 101; ++i) stays.push_back({"s" + std::to_string(i), {}});
  const auto a = split(stays, 0.2, 5);
  const auto b = split(stays, 0.2, 5);
  CHECK(a.test.size() == 20);
  CHECK(a.train.size() == 81);
  std::set<std::string> ids;
  for (const auto& s : a.train) ids.insert(s.stay_id);
  for (const auto& s : a.test) ids.insert(s.stay_id);
  CHECK(ids.size() == 101);
  REQUIRE(a.test.size() == b.test.size());
  for (std::size_t i = 0; i < a.test.size(); ++i) CHECK(a.test[i].stay_id == b.test[i].stay_id);
  // Input order is preserved inside each half.
  for (std::size_t i = 1; i < a.train.size(); ++i) {
    CHECK(std::stoi(a.train[i - 1].stay_id.substr(1)) < std::stoi(a.train[i].stay_id.substr(1)));
  }
  CHECK_THROWS_AS(split(stays, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(split({stays[0]}, 0.5, 1), ConfigError);
}

TEST_CASE("events artifact round-trip") {
  std::vector<PatientStay> stays = {
      {"a", {{EventType::laboratory, "glucose", std::string("abnormal")},
             {EventType::symptom, "fever", std::nullopt}}},
      {"empty", {}},
      {"b", {{EventType::diagnosis, "4019", std::nullopt}}}};
  std::stringstream io;
  write_events(io, stays);
  const auto back = read_events(io);
  REQUIRE(back.size() == 3);
  CHECK(back[0].stay_id == "a");
  CHECK(back[0].events == stays[0].events);
  CHECK(back[1].events.empty());
  CHECK(back[2].events == stays[2].events);
}

TEST_CASE("cohort table") {
  const auto& t = CohortTable::standard();
  CHECK(t.size() == 20);
  CHECK(t.map("4019") == "circulatory system");
  CHECK(t.map("285") == "blood organs");
  CHECK(t.map("V101") == "supplementary factors");
  CHECK(t.map("E8889") == "external causes");
  CHECK(t.map("965") == "poisoning and complications of care");
  CHECK_FALSE(t.map("xyz").has_value());

  std::istringstream overlap("a | 001-100\nb | 050-200\n");
  CHECK_THROWS_AS(CohortTable::parse(overlap), ConfigError);

  std::ostringstream out;
  t.write(out);
  std::istringstream in(out.str());
  const auto back = CohortTable::parse(in);
  REQUIRE(back.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(back.cohorts()[i].label == t.cohorts()[i].label);
  CHECK(back.index_of("neoplasms") == t.index_of("neoplasms"));
}
