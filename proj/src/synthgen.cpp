// SPDX-License-Identifier: Apache-2.0
#include "hinrank/synthgen.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "hinrank/errors.hpp"
#include "hinrank/rng.hpp"
#include "hinrank/sampling.hpp"

namespace hinrank {
namespace {

constexpr std::size_t kSubcodes = 11;  // the 3-digit category plus .0 to .9

std::size_t category_count(const CodeRange& r) { return static_cast<std::size_t>(r.high - r.low + 1); }

std::string format_code(const CodeRange& r, std::size_t j) {
  const std::size_t width = category_count(r);
  const int cat = r.low + static_cast<int>(j % width);
  const std::size_t sub = j / width;
  char buf[16];
  if (r.family == 'V') {
    std::snprintf(buf, sizeof buf, "V%02d", cat);
  } else if (r.family == 'E') {
    std::snprintf(buf, sizeof buf, "E%03d", cat);
  } else {
    std::snprintf(buf, sizeof buf, "%03d", cat);
  }
  std::string code = buf;
  if (sub > 0) code += static_cast<char>('0' + (sub - 1));
  return code;
}

std::size_t code_capacity(const Cohort& c) {
  std::size_t n = 0;
  for (const auto& r : c.ranges) n += category_count(r) * kSubcodes;
  return n;
}

std::string cohort_code(const Cohort& c, std::size_t j) {
  for (const auto& r : c.ranges) {
    const std::size_t cap = category_count(r) * kSubcodes;
    if (j < cap) return format_code(r, j);
    j -= cap;
  }
  throw ConfigError("cohort '" + c.label + "' has too few codes");
}

// Items [begin, begin + size) of a vocabulary, owned by one cluster.
struct Block {
  std::size_t begin = 0;
  std::size_t size = 0;
};

std::vector<Block> even_blocks(std::size_t vocab, std::size_t clusters) {
  std::vector<Block> out(clusters);
  const std::size_t per = vocab / clusters;
  for (std::size_t k = 0; k < clusters; ++k) out[k] = {k * per, per};
  return out;
}

std::vector<Block> spread_blocks(std::size_t vocab, std::size_t clusters) {
  std::vector<Block> out(clusters);
  const std::size_t per = vocab / clusters;
  const std::size_t extra = vocab % clusters;
  std::size_t at = 0;
  for (std::size_t k = 0; k < clusters; ++k) {
    out[k] = {at, per + (k < extra ? 1 : 0)};
    at += out[k].size;
  }
  return out;
}

// Within a cluster, item j has weight 1/(j+1).
struct Popularity {
  std::vector<AliasTable> tables;  // indexed by block size
  const AliasTable& for_size(std::size_t n) {
    if (tables.size() <= n) {
      for (std::size_t s = tables.size(); s <= n; ++s) {
        std::vector<double> w(std::max<std::size_t>(s, 1));
        for (std::size_t j = 0; j < w.size(); ++j) w[j] = 1.0 / static_cast<double>(j + 1);
        tables.emplace_back(w);
      }
    }
    return tables[n];
  }
};

struct Vocab {
  std::size_t size;
  std::vector<Block> blocks;
};

std::size_t draw(const Vocab& v, const std::vector<std::size_t>& clusters, double beta, Rng& rng,
                 Popularity& pop, bool& from_cluster) {
  from_cluster = rng.bernoulli(beta);
  if (from_cluster) {
    const std::size_t k = clusters[rng.below(clusters.size())];
    const Block& b = v.blocks[k];
    return b.begin + pop.for_size(b.size).sample(rng);
  }
  return rng.below(v.size);
}

}  // namespace

void SynthSpec::validate(const CohortTable& table) const {
  if (patients == 0) throw ConfigError("patients must be positive");
  if (clusters == 0) throw ConfigError("clusters must be positive");
  if (clusters > table.size()) {
    throw ConfigError("more clusters (" + std::to_string(clusters) + ") than cohorts (" +
                      std::to_string(table.size()) + ")");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
  if (clusters_per_patient == 0 || clusters_per_patient > clusters) {
    throw ConfigError("clusters_per_patient must lie in [1, clusters]");
  }
  const std::pair<const char*, std::size_t> vocabs[] = {
      {"symptom_vocab", symptom_vocab},           {"lab_vocab", lab_vocab},
      {"micro_vocab", micro_vocab},               {"prescription_vocab", prescription_vocab},
      {"procedure_vocab", procedure_vocab},       {"diagnosis_vocab", diagnosis_vocab}};
  for (const auto& [name, n] : vocabs) {
    if (n < clusters) throw ConfigError(std::string(name) + " is smaller than the cluster count");
  }
  if (procedure_vocab > 9000) throw ConfigError("procedure_vocab exceeds 4-digit codes");
  const auto blocks = spread_blocks(diagnosis_vocab, clusters);
  for (std::size_t k = 0; k < clusters; ++k) {
    if (blocks[k].size > code_capacity(table.cohorts()[k])) {
      throw ConfigError("cohort '" + table.cohorts()[k].label + "' cannot hold " +
                        std::to_string(blocks[k].size) + " distinct codes");
    }
  }
  if (diagnoses_per_patient == 0) throw ConfigError("diagnoses_per_patient must be positive");
}

SynthSpec SynthSpec::from_config(const KeyValueConfig& cfg, SynthSpec b) {
  b.patients = cfg.get_uint("patients", b.patients);
  b.clusters = cfg.get_uint("clusters", b.clusters);
  b.beta = cfg.get_double("beta", b.beta);
  b.symptom_vocab = cfg.get_uint("symptom_vocab", b.symptom_vocab);
  b.lab_vocab = cfg.get_uint("lab_vocab", b.lab_vocab);
  b.micro_vocab = cfg.get_uint("micro_vocab", b.micro_vocab);
  b.prescription_vocab = cfg.get_uint("prescription_vocab", b.prescription_vocab);
  b.procedure_vocab = cfg.get_uint("procedure_vocab", b.procedure_vocab);
  b.diagnosis_vocab = cfg.get_uint("diagnosis_vocab", b.diagnosis_vocab);
  b.symptoms_per_patient = cfg.get_uint("symptoms_per_patient", b.symptoms_per_patient);
  b.labs_per_patient = cfg.get_uint("labs_per_patient", b.labs_per_patient);
  b.micro_per_patient = cfg.get_uint("micro_per_patient", b.micro_per_patient);
  b.prescriptions_per_patient = cfg.get_uint("prescriptions_per_patient", b.prescriptions_per_patient);
  b.procedures_per_patient = cfg.get_uint("procedures_per_patient", b.procedures_per_patient);
  b.diagnoses_per_patient = cfg.get_uint("diagnoses_per_patient", b.diagnoses_per_patient);
  b.clusters_per_patient = cfg.get_uint("clusters_per_patient", b.clusters_per_patient);
  b.seed = cfg.get_uint("seed", b.seed);
  return b;
}

KeyValueConfig SynthSpec::to_config() const {
  KeyValueConfig c;
  c.set("patients", std::to_string(patients));
  c.set("clusters", std::to_string(clusters));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", beta);
  c.set("beta", buf);
  c.set("symptom_vocab", std::to_string(symptom_vocab));
  c.set("lab_vocab", std::to_string(lab_vocab));
  c.set("micro_vocab", std::to_string(micro_vocab));
  c.set("prescription_vocab", std::to_string(prescription_vocab));
  c.set("procedure_vocab", std::to_string(procedure_vocab));
  c.set("diagnosis_vocab", std::to_string(diagnosis_vocab));
  c.set("symptoms_per_patient", std::to_string(symptoms_per_patient));
  c.set("labs_per_patient", std::to_string(labs_per_patient));
  c.set("micro_per_patient", std::to_string(micro_per_patient));
  c.set("prescriptions_per_patient", std::to_string(prescriptions_per_patient));
  c.set("procedures_per_patient", std::to_string(procedures_per_patient));
  c.set("diagnoses_per_patient", std::to_string(diagnoses_per_patient));
  c.set("clusters_per_patient", std::to_string(clusters_per_patient));
  c.set("seed", std::to_string(seed));
  return c;
}

SynthData generate(const SynthSpec& spec, const CohortTable& table) {
  spec.validate(table);
  const std::size_t C = spec.clusters;
  Rng rng(derive_seed(spec.seed, 0));
  Popularity pop;

  const Vocab symptoms{spec.symptom_vocab, even_blocks(spec.symptom_vocab, C)};
  const Vocab labs{spec.lab_vocab, even_blocks(spec.lab_vocab, C)};
  const Vocab micro{spec.micro_vocab, even_blocks(spec.micro_vocab, C)};
  const Vocab drugs{spec.prescription_vocab, even_blocks(spec.prescription_vocab, C)};
  const Vocab procs{spec.procedure_vocab, even_blocks(spec.procedure_vocab, C)};
  const Vocab diags{spec.diagnosis_vocab, spread_blocks(spec.diagnosis_vocab, C)};

  SynthData data;
  std::vector<std::string> diag_codes(spec.diagnosis_vocab);
  for (std::size_t k = 0; k < C; ++k) {
    const Cohort& cohort = table.cohorts()[k];
    data.cluster_cohort.push_back(cohort.label);
    for (std::size_t j = 0; j < diags.blocks[k].size; ++j) {
      diag_codes[diags.blocks[k].begin + j] = cohort_code(cohort, j);
    }
  }

  // Exactly balanced primary clusters.
  std::vector<std::size_t> primary(spec.patients);
  for (std::size_t i = 0; i < primary.size(); ++i) primary[i] = i % C;
  for (std::size_t i = primary.size(); i > 1; --i) std::swap(primary[i - 1], primary[rng.below(i)]);

  static const char* const kEthnicities[] = {"white", "black", "hispanic", "asian", "other"};
  char buf[32];
  const int width = static_cast<int>(std::to_string(spec.patients).size());
  for (std::size_t i = 0; i < spec.patients; ++i) {
    std::vector<std::size_t> mine = {primary[i]};
    while (mine.size() < spec.clusters_per_patient) {
      const std::size_t k = rng.below(C);
      if (std::find(mine.begin(), mine.end(), k) == mine.end()) mine.push_back(k);
    }

    PatientStay stay;
    std::snprintf(buf, sizeof buf, "s%0*zu", width, i + 1);
    stay.stay_id = buf;
    auto& ev = stay.events;
    bool in_cluster = false;

    std::snprintf(buf, sizeof buf, "%d", 15 + static_cast<int>(rng.below(76)));
    ev.push_back({EventType::age, "age", std::string(buf)});
    ev.push_back({EventType::gender, rng.bernoulli(0.5) ? "F" : "M", std::nullopt});
    ev.push_back({EventType::ethnicity, kEthnicities[rng.below(5)], std::nullopt});

    for (std::size_t n = 0; n < spec.symptoms_per_patient; ++n) {
      std::snprintf(buf, sizeof buf, "symptom_%03zu", draw(symptoms, mine, spec.beta, rng, pop, in_cluster));
      ev.push_back({EventType::symptom, buf, std::nullopt});
    }
    for (std::size_t n = 0; n < spec.labs_per_patient; ++n) {
      const std::size_t item = draw(labs, mine, spec.beta, rng, pop, in_cluster);
      const char* flag = in_cluster ? "abnormal" : (rng.bernoulli(0.5) ? "normal" : "abnormal");
      std::snprintf(buf, sizeof buf, "%zu", 50000 + item);
      ev.push_back({EventType::laboratory, buf, std::string(flag)});
    }
    for (std::size_t n = 0; n < spec.micro_per_patient; ++n) {
      const std::size_t item = draw(micro, mine, spec.beta, rng, pop, in_cluster);
      const char* interp = in_cluster ? "resistant" : (rng.bernoulli(0.5) ? "sensitive" : "intermediate");
      std::snprintf(buf, sizeof buf, "%zu", 70000 + item);
      ev.push_back({EventType::microbiology, buf, std::string(interp)});
    }
    for (std::size_t n = 0; n < spec.prescriptions_per_patient; ++n) {
      std::snprintf(buf, sizeof buf, "drug_%03zu", draw(drugs, mine, spec.beta, rng, pop, in_cluster));
      ev.push_back({EventType::prescription, buf, std::nullopt});
    }
    for (std::size_t n = 0; n < spec.procedures_per_patient; ++n) {
      std::snprintf(buf, sizeof buf, "%04zu", 1000 + draw(procs, mine, spec.beta, rng, pop, in_cluster));
      ev.push_back({EventType::procedure, buf, std::nullopt});
    }
    for (std::size_t n = 0; n < spec.diagnoses_per_patient; ++n) {
      ev.push_back({EventType::diagnosis, diag_codes[draw(diags, mine, spec.beta, rng, pop, in_cluster)],
                    std::nullopt});
    }
    data.stays.push_back(std::move(stay));
    data.clusters.push_back(std::move(mine));
  }
  return data;
}

namespace {

std::ofstream open_table(const std::filesystem::path& path, const char* header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << header << '\n';
  return out;
}

}  // namespace

void write_tables(const std::filesystem::path& dir, const SynthData& data) {
  std::filesystem::create_directories(dir);
  auto patients = open_table(dir / "patients.csv", "stay_id,gender,ethnicity,age");
  auto labs = open_table(dir / "labevents.csv", "stay_id,itemid,flag");
  auto micro = open_table(dir / "microbiologyevents.csv", "stay_id,spec_itemid,interpretation");
  auto symptoms = open_table(dir / "symptoms.csv", "stay_id,symptom");
  auto drugs = open_table(dir / "prescriptions.csv", "stay_id,generic_drug_name");
  auto procs = open_table(dir / "procedures_icd.csv", "stay_id,icd9_code");
  auto diags = open_table(dir / "diagnoses_icd.csv", "stay_id,icd9_code");
  auto truth = open_table(dir / "truth.csv", "stay_id,cluster,cohort");

  for (std::size_t i = 0; i < data.stays.size(); ++i) {
    const PatientStay& s = data.stays[i];
    std::string gender, ethnicity, age;
    for (const auto& e : s.events) {
      const std::string& id = s.stay_id;
      switch (e.type) {
        case EventType::gender: gender = e.name; break;
        case EventType::ethnicity: ethnicity = e.name; break;
        case EventType::age: age = e.value.value_or(e.name); break;
        case EventType::laboratory: labs << id << ',' << e.name << ',' << e.value.value_or("") << '\n'; break;
        case EventType::microbiology: micro << id << ',' << e.name << ',' << e.value.value_or("") << '\n'; break;
        case EventType::symptom: symptoms << id << ',' << e.name << '\n'; break;
        case EventType::prescription: drugs << id << ',' << e.name << '\n'; break;
        case EventType::procedure: procs << id << ',' << e.name << '\n'; break;
        case EventType::diagnosis: diags << id << ',' << e.name << '\n'; break;
      }
    }
    patients << s.stay_id << ',' << gender << ',' << ethnicity << ',' << age << '\n';
    const std::size_t k = data.clusters[i].front();
    truth << s.stay_id << ',' << k << ",\"" << data.cluster_cohort[k] << "\"\n";
  }
}

}  // namespace hinrank
