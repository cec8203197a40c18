#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "cte/learner.hpp"
#include "cte/numeric.hpp"
#include "cte/oracle.hpp"
#include "cte/topic_model.hpp"

namespace cte {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  CTE_CHECK(in.good(), "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  CTE_CHECK(out.good(), "cannot write " + path.string());
  out << content;
}

inline std::uint64_t file_hash(const fs::path& path) {
  return fnv1a64(read_file(path));
}

// ---------------------------------------------------------------------------
// binary float64 blobs
// ---------------------------------------------------------------------------

inline void write_f64_blob(const fs::path& path, const double* data, std::size_t n) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  CTE_CHECK(out.good(), "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(n * sizeof(double)));
}

inline std::vector<double> read_f64_blob(const fs::path& path, std::size_t expect) {
  std::string raw = read_file(path);
  CTE_CHECK(raw.size() == expect * sizeof(double),
            "blob size mismatch in " + path.string());
  std::vector<double> out(expect);
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

// ---------------------------------------------------------------------------
// topic model: JSON header + row-major float64 matrix
// ---------------------------------------------------------------------------

inline json prior_to_json(const PriorSpec& p) {
  json j;
  if (p.kind == PriorSpec::Kind::SymmetricDirichlet) {
    j["kind"] = "symmetric-dirichlet";
    j["beta"] = p.beta;
    return j;
  }
  j["kind"] = p.pure_topic() ? "pure-topic" : "finite-support";
  j["atom_probs"] = p.atom_probs;
  std::vector<std::vector<double>> atoms;
  for (const auto& a : p.atoms) {
    atoms.emplace_back(a.data(), a.data() + a.size());
  }
  j["atoms"] = atoms;
  return j;
}

inline PriorSpec prior_from_json(const json& j) {
  std::string kind = j.at("kind");
  if (kind == "symmetric-dirichlet") {
    return PriorSpec::symmetric_dirichlet(j.at("beta").get<double>());
  }
  std::vector<Eigen::VectorXd> atoms;
  for (const auto& a : j.at("atoms")) {
    auto v = a.get<std::vector<double>>();
    atoms.push_back(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<int>(v.size())));
  }
  return PriorSpec::finite_support(std::move(atoms),
                                   j.at("atom_probs").get<std::vector<double>>());
}

inline json length_to_json(const LengthSpec& l) {
  json j;
  if (l.kind == LengthSpec::Kind::Fixed) {
    j["kind"] = "fixed";
    j["m"] = l.fixed_m;
  } else {
    j["kind"] = "poisson";
    j["lambda"] = l.lambda;
  }
  return j;
}

inline LengthSpec length_from_json(const json& j) {
  if (j.at("kind") == "fixed") return LengthSpec::fixed(j.at("m").get<int>());
  return LengthSpec::poisson(j.at("lambda").get<double>());
}

inline void save_topic_model(const TopicModel& m, const fs::path& json_path) {
  fs::path bin_path = json_path;
  bin_path.replace_extension(".o.bin");
  // row-major on disk
  std::vector<double> rowmajor(static_cast<std::size_t>(m.K) * m.V);
  for (int k = 0; k < m.K; ++k) {
    for (int v = 0; v < m.V; ++v) {
      rowmajor[static_cast<std::size_t>(k) * m.V + v] = m.O(k, v);
    }
  }
  write_f64_blob(bin_path, rowmajor.data(), rowmajor.size());
  json j;
  j["K"] = m.K;
  j["V"] = m.V;
  j["prior"] = prior_to_json(m.prior);
  j["length"] = length_to_json(m.length);
  j["matrix_file"] = bin_path.filename().string();
  j["matrix_hash"] = hash_hex(file_hash(bin_path));
  write_file(json_path, j.dump(2) + "\n");
}

inline TopicModel load_topic_model(const fs::path& json_path) {
  json j = json::parse(read_file(json_path));
  TopicModel m;
  m.K = j.at("K").get<int>();
  m.V = j.at("V").get<int>();
  m.prior = prior_from_json(j.at("prior"));
  m.length = length_from_json(j.at("length"));
  fs::path bin_path = json_path.parent_path() / j.at("matrix_file").get<std::string>();
  auto data = read_f64_blob(bin_path, static_cast<std::size_t>(m.K) * m.V);
  m.O.resize(m.K, m.V);
  for (int k = 0; k < m.K; ++k) {
    for (int v = 0; v < m.V; ++v) {
      m.O(k, v) = data[static_cast<std::size_t>(k) * m.V + v];
    }
  }
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// corpus: JSONL, one document per line; objects carry the generating topic
// ---------------------------------------------------------------------------

inline void save_corpus(const Corpus& c, const fs::path& path) {
  std::ostringstream out;
  bool with_topics = !c.topics.empty();
  for (int i = 0; i < c.size(); ++i) {
    json j;
    j["tokens"] = c.docs[static_cast<std::size_t>(i)].tokens;
    if (with_topics) j["topic"] = c.topics[static_cast<std::size_t>(i)];
    out << j.dump() << "\n";
  }
  write_file(path, out.str());
}

inline Corpus load_corpus(const fs::path& path) {
  Corpus c;
  std::istringstream in(read_file(path));
  std::string line;
  bool any_topic = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    Document d;
    if (j.is_array()) {
      d.tokens = j.get<std::vector<TokenId>>();
      c.topics.push_back(-1);
    } else {
      d.tokens = j.at("tokens").get<std::vector<TokenId>>();
      if (j.contains("topic")) {
        c.topics.push_back(j.at("topic").get<int>());
        any_topic = true;
      } else {
        c.topics.push_back(-1);
      }
    }
    c.docs.push_back(std::move(d));
  }
  if (!any_topic) c.topics.clear();
  return c;
}

// ---------------------------------------------------------------------------
// contrastive dataset: provenance header line + one pair per line
// ---------------------------------------------------------------------------

inline void save_dataset(const ContrastiveDataset& ds, const fs::path& path) {
  std::ostringstream out;
  json h;
  h["provenance"] = {
      {"corpus_hash", hash_hex(ds.provenance.corpus_hash)},
      {"seed", ds.provenance.seed},
      {"scheme", ds.provenance.scheme == PairScheme::Algorithm1 ? "algorithm1"
                                                                : "paired-permutation"},
      {"split",
       ds.provenance.split_mode == SplitMode::Contiguous ? "contiguous"
                                                         : "random-partition"},
      {"self_negatives", ds.provenance.self_negatives},
      {"discarded_collisions", ds.provenance.discarded_collisions},
      {"shared_split", ds.provenance.shared_split},
  };
  out << h.dump() << "\n";
  for (const auto& p : ds.pairs) {
    json j;
    j["first"] = p.first.tokens;
    j["second"] = p.second.tokens;
    j["y"] = p.label;
    j["src"] = {p.src_first, p.src_second};
    out << j.dump() << "\n";
  }
  write_file(path, out.str());
}

inline ContrastiveDataset load_dataset(const fs::path& path) {
  ContrastiveDataset ds;
  std::istringstream in(read_file(path));
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    if (header) {
      header = false;
      const auto& p = j.at("provenance");
      ds.provenance.seed = p.at("seed").get<std::uint64_t>();
      ds.provenance.scheme = p.at("scheme") == "algorithm1"
                                 ? PairScheme::Algorithm1
                                 : PairScheme::PairedPermutation;
      ds.provenance.split_mode = p.at("split") == "contiguous"
                                     ? SplitMode::Contiguous
                                     : SplitMode::RandomPartition;
      ds.provenance.self_negatives = p.at("self_negatives").get<int>();
      ds.provenance.discarded_collisions = p.at("discarded_collisions").get<int>();
      ds.provenance.shared_split = p.at("shared_split").get<bool>();
      ds.provenance.corpus_hash =
          std::stoull(p.at("corpus_hash").get<std::string>(), nullptr, 16);
      continue;
    }
    ContrastivePair pair;
    pair.first.tokens = j.at("first").get<std::vector<TokenId>>();
    pair.second.tokens = j.at("second").get<std::vector<TokenId>>();
    pair.label = j.at("y").get<int>();
    pair.src_first = j.at("src")[0].get<int>();
    pair.src_second = j.at("src")[1].get<int>();
    ds.pairs.push_back(std::move(pair));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// checkpoints: JSON header + float64 parameter blob (+ batchnorm stats)
// ---------------------------------------------------------------------------

inline void save_checkpoint(const ContrastiveNet& net, int epoch,
                            const std::string& config_hash, const fs::path& json_path) {
  fs::path blob = json_path;
  blob.replace_extension(".params.bin");
  Eigen::VectorXd params = net.flatten();
  Eigen::VectorXd state = net.state_flatten();
  std::vector<double> all(params.data(), params.data() + params.size());
  all.insert(all.end(), state.data(), state.data() + state.size());
  write_f64_blob(blob, all.data(), all.size());

  const auto& c = net.config();
  json j;
  j["kind"] = c.kind == ModelKind::PairMlp ? "pair-mlp" : "bilinear";
  j["vocab"] = c.vocab;
  j["depth"] = c.depth;
  j["width"] = c.width;
  j["embed_dim"] = c.embed_dim;
  j["batchnorm"] = c.batchnorm;
  j["dropout"] = c.dropout;
  j["init_seed"] = c.init_seed;
  j["epoch"] = epoch;
  j["config_hash"] = config_hash;
  j["param_count"] = static_cast<std::int64_t>(params.size());
  j["state_count"] = static_cast<std::int64_t>(state.size());
  j["blob_file"] = blob.filename().string();
  j["blob_hash"] = hash_hex(file_hash(blob));
  write_file(json_path, j.dump(2) + "\n");
}

struct LoadedCheckpoint {
  ContrastiveNet net;
  int epoch = 0;
  std::string config_hash;
};

inline LoadedCheckpoint load_checkpoint(const fs::path& json_path) {
  json j = json::parse(read_file(json_path));
  NetConfig c;
  c.kind = j.at("kind") == "pair-mlp" ? ModelKind::PairMlp : ModelKind::Bilinear;
  c.vocab = j.at("vocab").get<int>();
  c.depth = j.at("depth").get<int>();
  c.width = j.at("width").get<int>();
  c.embed_dim = j.at("embed_dim").get<int>();
  c.batchnorm = j.at("batchnorm").get<bool>();
  c.dropout = j.at("dropout").get<double>();
  c.init_seed = j.at("init_seed").get<std::uint64_t>();
  LoadedCheckpoint out;
  out.net = ContrastiveNet::make(c);
  out.epoch = j.at("epoch").get<int>();
  out.config_hash = j.at("config_hash").get<std::string>();
  auto n_params = j.at("param_count").get<std::int64_t>();
  auto n_state = j.at("state_count").get<std::int64_t>();
  CTE_CHECK(n_params == out.net.param_count(), "checkpoint: parameter count mismatch");
  fs::path blob = json_path.parent_path() / j.at("blob_file").get<std::string>();
  auto data = read_f64_blob(blob, static_cast<std::size_t>(n_params + n_state));
  Eigen::VectorXd params =
      Eigen::Map<Eigen::VectorXd>(data.data(), static_cast<Eigen::Index>(n_params));
  out.net.unflatten(params);
  if (n_state > 0) {
    Eigen::VectorXd state = Eigen::Map<Eigen::VectorXd>(
        data.data() + n_params, static_cast<Eigen::Index>(n_state));
    out.net.state_unflatten(state);
  }
  return out;
}

// ---------------------------------------------------------------------------
// landmark sets: JSON (token lists, mode, basis spec) + binary L matrix
// ---------------------------------------------------------------------------

inline void save_landmarks(const LandmarkSet& set, const fs::path& json_path) {
  fs::path blob = json_path;
  blob.replace_extension(".L.bin");
  // column-major N x M
  write_f64_blob(blob, set.L().data(), static_cast<std::size_t>(set.L().size()));
  json j;
  j["mode"] = set.mode() == LandmarkSet::Mode::SingleTopic ? "single-topic" : "monomial";
  j["strategy"] = set.strategy() == LandmarkSet::Strategy::Anchor    ? "anchor"
                  : set.strategy() == LandmarkSet::Strategy::Sampled ? "sampled"
                                                                     : "user";
  j["d_o"] = set.anchor_degree();
  j["rows"] = set.representation_dim();
  j["cols"] = set.num_landmarks();
  if (set.basis()) {
    j["basis"] = {{"K", set.basis()->K()}, {"m_max", set.basis()->max_degree()}};
  }
  std::vector<std::vector<TokenId>> docs;
  for (const auto& d : set.landmarks()) docs.push_back(d.tokens);
  j["landmarks"] = docs;
  j["min_singular"] = set.min_singular();
  j["L_file"] = blob.filename().string();
  j["L_hash"] = hash_hex(file_hash(blob));
  write_file(json_path, j.dump(2) + "\n");
}

inline LandmarkSet load_landmarks(const fs::path& json_path) {
  json j = json::parse(read_file(json_path));
  int rows = j.at("rows").get<int>();
  int cols = j.at("cols").get<int>();
  fs::path blob = json_path.parent_path() / j.at("L_file").get<std::string>();
  auto data = read_f64_blob(blob, static_cast<std::size_t>(rows) * cols);
  Eigen::MatrixXd L =
      Eigen::Map<Eigen::MatrixXd>(data.data(), rows, cols);
  std::vector<Document> docs;
  for (const auto& t : j.at("landmarks")) {
    docs.push_back(Document{t.get<std::vector<TokenId>>()});
  }
  auto mode = j.at("mode") == "single-topic" ? LandmarkSet::Mode::SingleTopic
                                             : LandmarkSet::Mode::Monomial;
  auto strategy = j.at("strategy") == "anchor"    ? LandmarkSet::Strategy::Anchor
                  : j.at("strategy") == "sampled" ? LandmarkSet::Strategy::Sampled
                                                  : LandmarkSet::Strategy::User;
  std::shared_ptr<const MonomialBasis> basis;
  if (j.contains("basis")) {
    basis = std::make_shared<const MonomialBasis>(j["basis"].at("K").get<int>(),
                                                  j["basis"].at("m_max").get<int>());
  }
  return LandmarkSet::make(std::move(docs), std::move(L), mode, strategy,
                           j.at("d_o").get<int>(), basis);
}

// ---------------------------------------------------------------------------
// CSV + manifest
// ---------------------------------------------------------------------------

inline std::string csv_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

struct RunManifest {
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> artifacts;  // path, hash
  std::vector<std::pair<std::string, double>> timings_sec;
  std::string version;

  void add_artifact(const fs::path& path) {
    artifacts.emplace_back(path.filename().string(), hash_hex(file_hash(path)));
  }

  void save(const fs::path& path) const {
    json j;
    j["config_hash"] = config_hash;
    j["version"] = version;
    json arts = json::array();
    for (const auto& [p, h] : artifacts) arts.push_back({{"path", p}, {"hash", h}});
    j["artifacts"] = arts;
    json times = json::object();
    for (const auto& [k, v] : timings_sec) times[k] = v;
    j["timings_sec"] = times;
    write_file(path, j.dump(2) + "\n");
  }

  static RunManifest load(const fs::path& path) {
    json j = json::parse(read_file(path));
    RunManifest m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.version = j.value("version", "");
    for (const auto& a : j.at("artifacts")) {
      m.artifacts.emplace_back(a.at("path").get<std::string>(),
                               a.at("hash").get<std::string>());
    }
    return m;
  }
};

// one process owns a run directory at a time
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    if (fs::exists(path_)) {
      throw Error("run directory is locked by another process: " + path_.string() +
                  " (remove the stale .lock file if no run is active)");
    }
    write_file(path_, "locked\n");
  }
  ~DirLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
};

}  // namespace cte
