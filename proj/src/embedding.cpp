// SPDX-License-Identifier: Apache-2.0
#include "hinrank/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "hinrank/errors.hpp"
#include "hinrank/rng.hpp"

namespace hinrank {

namespace {

constexpr char kBinaryMagic[8] = {'H', 'I', 'N', 'R', 'B', 'I', 'N', '1'};

std::size_t weight_index(EventType t) {
  if (!is_diagnostic(t)) {
    throw ConfigError("type weights exist only for diagnostic types, not " +
                      std::string(type_tag(t)));
  }
  return index_of(t);
}

void append_real(std::string& out, double x) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
  out.append(buf, static_cast<std::size_t>(n));
}

double parse_real(const char*& cursor) {
  char* end = nullptr;
  const double x = std::strtod(cursor, &end);
  if (end == cursor) throw DataError("model file: expected a number");
  cursor = end;
  return x;
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw DataError("model file: truncated");
  return v;
}

}  // namespace

EmbeddingModel EmbeddingModel::init(std::size_t node_count, std::size_t dim, std::uint64_t seed) {
  if (node_count < 1 || dim < 1) throw ConfigError("embedding needs at least one node and dim >= 1");
  EmbeddingModel m;
  m.dim_ = dim;
  m.node_count_ = node_count;
  m.data_.resize(node_count * dim);
  Rng rng(seed);
  const double half = 0.5 / static_cast<double>(dim);
  for (double& x : m.data_) x = rng.uniform(-half, half);
  m.weights_.fill(1.0 / static_cast<double>(kDiagnosticTypeCount));
  return m;
}

EmbeddingModel EmbeddingModel::for_graph(const HeteroGraph& g, std::size_t dim,
                                         std::uint64_t seed) {
  EmbeddingModel m = init(g.node_count(), dim, seed);
  std::vector<NodeKey> keys;
  keys.reserve(g.node_count());
  for (std::size_t v = 0; v < g.node_count(); ++v) keys.push_back(g.key(static_cast<NodeId>(v)));
  m.set_vocabulary(std::move(keys));
  return m;
}

double EmbeddingModel::type_weight(EventType t) const { return weights_[weight_index(t)]; }

void EmbeddingModel::set_type_weight(EventType t, double w) { weights_[weight_index(t)] = w; }

std::optional<NodeId> EmbeddingModel::find(const NodeKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<NodeId> EmbeddingModel::nodes_of_type(NodeType t) const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (keys_[i].type == t) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

void EmbeddingModel::set_vocabulary(std::vector<NodeKey> keys) {
  if (keys.size() != node_count_) throw ConfigError("vocabulary size does not match node count");
  keys_ = std::move(keys);
  index_.clear();
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (!index_.emplace(keys_[i], static_cast<NodeId>(i)).second) {
      throw DataError("duplicate node key " + keys_[i].str());
    }
  }
}

void EmbeddingModel::save_text(std::ostream& out) const {
  std::string buf;
  buf += "hinrank-model 1\ndim " + std::to_string(dim_) + "\nnodes " +
         std::to_string(node_count_) + "\nweights";
  for (EventType t : kDiagnosticTypes) {
    buf += ' ';
    buf += type_tag(t);
    buf += '=';
    append_real(buf, weights_[index_of(t)]);
  }
  buf += '\n';
  out << buf;
  for (std::size_t v = 0; v < node_count_; ++v) {
    buf.clear();
    buf += std::to_string(v);
    buf += '\t';
    if (keys_.empty()) {
      buf += "-\t";
    } else {
      buf += type_tag(keys_[v].type);
      buf += '\t';
      buf += keys_[v].identity;
    }
    buf += '\t';
    const auto x = vec(static_cast<NodeId>(v));
    for (std::size_t i = 0; i < dim_; ++i) {
      if (i) buf += ' ';
      append_real(buf, x[i]);
    }
    buf += '\n';
    out << buf;
  }
}

EmbeddingModel EmbeddingModel::load_text(std::istream& in) {
  std::string line;
  auto fail = [](const std::string& what) { return DataError("model file: " + what); };
  if (!std::getline(in, line) || line != "hinrank-model 1") throw fail("bad header");
  EmbeddingModel m;
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "dim %zu", &m.dim_) != 1) {
    throw fail("missing dim");
  }
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "nodes %zu", &m.node_count_) != 1) {
    throw fail("missing node count");
  }
  if (m.dim_ == 0) throw fail("dim must be positive");
  if (!std::getline(in, line) || line.rfind("weights", 0) != 0) throw fail("missing weights");
  for (EventType t : kDiagnosticTypes) {
    const std::string tag = " " + std::string(type_tag(t)) + "=";
    const auto pos = line.find(tag);
    if (pos == std::string::npos) throw fail("missing weight for " + std::string(type_tag(t)));
    const char* cursor = line.c_str() + pos + tag.size();
    m.weights_[index_of(t)] = parse_real(cursor);
  }
  m.data_.resize(m.node_count_ * m.dim_);
  std::vector<NodeKey> keys;
  bool anonymous = false;
  for (std::size_t v = 0; v < m.node_count_; ++v) {
    if (!std::getline(in, line)) throw fail("truncated node section");
    const auto t1 = line.find('\t');
    const auto t2 = line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos) throw fail("bad node line");
    if (std::strtoull(line.c_str(), nullptr, 10) != v) throw fail("node ids must be dense and ordered");
    const std::string tag = line.substr(t1 + 1, t2 - t1 - 1);
    std::size_t vec_start = t2 + 1;
    if (tag == "-") {
      anonymous = true;
    } else {
      const auto t3 = line.find('\t', t2 + 1);
      if (t3 == std::string::npos) throw fail("bad node line");
      auto type = parse_node_type(tag);
      if (!type) throw fail("unknown node type '" + tag + "'");
      keys.push_back({*type, line.substr(t2 + 1, t3 - t2 - 1)});
      vec_start = t3 + 1;
    }
    const char* cursor = line.c_str() + vec_start;
    auto x = m.vec(static_cast<NodeId>(v));
    for (std::size_t i = 0; i < m.dim_; ++i) x[i] = parse_real(cursor);
  }
  if (!anonymous) m.set_vocabulary(std::move(keys));
  return m;
}

void EmbeddingModel::save_binary(std::ostream& out) const {
  out.write(kBinaryMagic, sizeof kBinaryMagic);
  write_pod<std::uint64_t>(out, dim_);
  write_pod<std::uint64_t>(out, node_count_);
  for (double w : weights_) write_pod(out, w);
  write_pod<std::uint8_t>(out, keys_.empty() ? 0 : 1);
  for (std::size_t v = 0; v < node_count_; ++v) {
    if (!keys_.empty()) {
      write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(keys_[v].type));
      write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(keys_[v].identity.size()));
      out.write(keys_[v].identity.data(), static_cast<std::streamsize>(keys_[v].identity.size()));
    }
    out.write(reinterpret_cast<const char*>(vec(static_cast<NodeId>(v)).data()),
              static_cast<std::streamsize>(dim_ * sizeof(double)));
  }
}

EmbeddingModel EmbeddingModel::load_binary(std::istream& in) {
  char magic[sizeof kBinaryMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kBinaryMagic, sizeof magic) != 0) {
    throw DataError("model file: bad binary magic");
  }
  EmbeddingModel m;
  m.dim_ = read_pod<std::uint64_t>(in);
  m.node_count_ = read_pod<std::uint64_t>(in);
  if (m.dim_ == 0) throw DataError("model file: dim must be positive");
  for (double& w : m.weights_) w = read_pod<double>(in);
  const bool has_keys = read_pod<std::uint8_t>(in) != 0;
  m.data_.resize(m.node_count_ * m.dim_);
  std::vector<NodeKey> keys;
  for (std::size_t v = 0; v < m.node_count_; ++v) {
    if (has_keys) {
      const auto type = read_pod<std::uint8_t>(in);
      if (type >= kNodeTypeCount) throw DataError("model file: bad node type");
      const auto len = read_pod<std::uint32_t>(in);
      std::string identity(len, '\0');
      if (!in.read(identity.data(), len)) throw DataError("model file: truncated");
      keys.push_back({static_cast<NodeType>(type), std::move(identity)});
    }
    if (!in.read(reinterpret_cast<char*>(m.vec(static_cast<NodeId>(v)).data()),
                 static_cast<std::streamsize>(m.dim_ * sizeof(double)))) {
      throw DataError("model file: truncated");
    }
  }
  if (has_keys) m.set_vocabulary(std::move(keys));
  return m;
}

void EmbeddingModel::save(const std::filesystem::path& path, bool binary) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model " + path.string());
  if (binary) {
    save_binary(out);
  } else {
    save_text(out);
  }
  if (!out) throw DataError("failed writing model " + path.string());
}

EmbeddingModel EmbeddingModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing model file: " + path.string());
  char magic[sizeof kBinaryMagic] = {};
  in.read(magic, sizeof magic);
  const bool binary = in.gcount() == sizeof magic &&
                      std::memcmp(magic, kBinaryMagic, sizeof magic) == 0;
  in.clear();
  in.seekg(0);
  return binary ? load_binary(in) : load_text(in);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sigmoid(double x) {
  x = std::clamp(x, -kSigmoidClamp, kSigmoidClamp);
  return 1.0 / (1.0 + std::exp(-x));
}

double neg_log_sigmoid(double x) {
  const double s = std::clamp(sigmoid(x), kProbabilityFloor, 1.0 - kProbabilityFloor);
  return -std::log(s);
}

double unsup_loss(const EmbeddingModel& model, NodeId v, NodeId c,
                  std::span<const NodeId> negatives) {
  const auto fv = model.vec(v);
  double loss = neg_log_sigmoid(dot(model.vec(c), fv));
  for (NodeId u : negatives) loss += neg_log_sigmoid(-dot(model.vec(u), fv));
  return loss;
}

double unsup_step(EmbeddingModel& model, NodeId v, NodeId c, std::span<const NodeId> negatives,
                  double lr) {
  const std::size_t d = model.dim();
  thread_local std::vector<double> old_v;
  thread_local std::vector<double> grad_v;
  thread_local std::vector<double> coef;
  old_v.assign(model.vec(v).begin(), model.vec(v).end());
  grad_v.assign(d, 0.0);
  coef.resize(negatives.size() + 1);

  // dL/df(c) = -(1 - s(c.v)) f(v);  dL/df(u) = s(u.v) f(v);
  // dL/df(v) = -(1 - s(c.v)) f(c) + sum_u s(u.v) f(u).
  const double pos_dot = dot(model.vec(c), old_v);
  double loss = neg_log_sigmoid(pos_dot);
  coef[0] = -(1.0 - sigmoid(pos_dot));
  for (std::size_t l = 0; l < negatives.size(); ++l) {
    const double neg_dot = dot(model.vec(negatives[l]), old_v);
    loss += neg_log_sigmoid(-neg_dot);
    coef[l + 1] = sigmoid(neg_dot);
  }
  {
    const auto fc = model.vec(c);
    for (std::size_t i = 0; i < d; ++i) grad_v[i] += coef[0] * fc[i];
  }
  for (std::size_t l = 0; l < negatives.size(); ++l) {
    const auto fu = model.vec(negatives[l]);
    for (std::size_t i = 0; i < d; ++i) grad_v[i] += coef[l + 1] * fu[i];
  }
  {
    auto fc = model.vec(c);
    for (std::size_t i = 0; i < d; ++i) fc[i] -= lr * coef[0] * old_v[i];
  }
  for (std::size_t l = 0; l < negatives.size(); ++l) {
    auto fu = model.vec(negatives[l]);
    for (std::size_t i = 0; i < d; ++i) fu[i] -= lr * coef[l + 1] * old_v[i];
  }
  auto fv = model.vec(v);
  for (std::size_t i = 0; i < d; ++i) fv[i] -= lr * grad_v[i];
  return loss;
}

}  // namespace hinrank
