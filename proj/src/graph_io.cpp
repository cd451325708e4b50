#include "propgraph/graph_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "propgraph/error.hpp"

namespace propgraph {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kPassages = "passages.jsonl";
constexpr const char* kPropositions = "propositions.jsonl";
constexpr const char* kEntities = "entities.jsonl";
constexpr const char* kEdges = "edges.tsv";
constexpr const char* kPropositionVecs = "proposition_embeddings.bin";
constexpr const char* kEntityVecs = "entity_embeddings.bin";

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const fs::path& path) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw Error(ErrorCode::CorruptFile, path.string() + " is truncated");
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error(ErrorCode::CorruptFile, "cannot read " + path.string());
  return in;
}

void write_matrix(const EmbeddingMatrix& m, std::size_t dimension, const fs::path& path) {
  auto out = open_out(path, std::ios::binary);
  write_le<std::uint64_t>(out, m.rows());
  write_le<std::uint64_t>(out, dimension);
  for (float x : m.data()) write_le<float>(out, x);
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

EmbeddingMatrix read_matrix(const fs::path& path, std::size_t expect_rows,
                            std::size_t expect_dim) {
  auto in = open_in(path, std::ios::binary);
  const auto rows = read_le<std::uint64_t>(in, path);
  const auto dim = read_le<std::uint64_t>(in, path);
  if (rows != expect_rows || dim != expect_dim) {
    throw Error(ErrorCode::CorruptFile, path.string() + " header disagrees with manifest");
  }
  EmbeddingMatrix m(dim);
  auto& data = m.mutable_data();
  data.resize(rows * dim);
  for (auto& x : data) x = read_le<float>(in, path);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::CorruptFile, path.string() + " has trailing bytes");
  }
  return m;
}

std::vector<json> read_jsonl(const fs::path& path, std::size_t expect) {
  auto in = open_in(path);
  std::vector<json> out;
  out.reserve(expect);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::CorruptFile, path.string() + ": " + e.what());
    }
  }
  if (out.size() != expect) {
    throw Error(ErrorCode::CorruptFile, path.string() + " holds " + std::to_string(out.size()) +
                                            " records, manifest says " + std::to_string(expect));
  }
  return out;
}

}  // namespace

void save_graph(const HeteroGraph& graph, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  const json manifest = {
      {"format_version", kGraphFormatVersion},
      {"passages", graph.passage_count()},
      {"propositions", graph.proposition_count()},
      {"entities", graph.entity_count()},
      {"edges", graph.edge_count()},
      {"dimension", graph.dimension()},
  };
  open_out(dir / kManifest) << manifest.dump(2) << '\n';

  {
    auto out = open_out(dir / kPassages);
    for (const auto& p : graph.passages()) {
      out << json{{"id", p.id.index},
                  {"text", p.text},
                  {"source_doc", p.source_doc},
                  {"span", {p.span.begin, p.span.end}}}
                 .dump()
          << '\n';
    }
  }
  {
    auto out = open_out(dir / kPropositions);
    for (const auto& p : graph.propositions()) {
      std::vector<std::uint32_t> ents;
      for (const auto e : p.entity_refs) ents.push_back(e.index);
      out << json{{"id", p.id.index},
                  {"text", p.text},
                  {"passage", p.passage.index},
                  {"entities", ents}}
                 .dump()
          << '\n';
    }
  }
  {
    auto out = open_out(dir / kEntities);
    for (const auto& e : graph.entities()) {
      out << json{{"id", e.id.index}, {"name", e.canonical_name}, {"aliases", e.aliases}}.dump()
          << '\n';
    }
  }
  {
    auto out = open_out(dir / kEdges);
    for (const auto& [a, b] : graph.edges()) out << to_string(a) << '\t' << to_string(b) << '\n';
  }
  write_matrix(graph.proposition_embeddings(), graph.dimension(), dir / kPropositionVecs);
  write_matrix(graph.entity_embeddings(), graph.dimension(), dir / kEntityVecs);
}

HeteroGraph load_graph(const fs::path& dir) {
  json manifest;
  try {
    auto in = open_in(dir / kManifest);
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptFile, "manifest: " + std::string(e.what()));
  }

  try {
    const int version = manifest.at("format_version").get<int>();
    if (version != kGraphFormatVersion) {
      throw Error(ErrorCode::VersionMismatch, "graph format " + std::to_string(version) +
                                                  ", expected " +
                                                  std::to_string(kGraphFormatVersion));
    }
    const auto n_passages = manifest.at("passages").get<std::size_t>();
    const auto n_props = manifest.at("propositions").get<std::size_t>();
    const auto n_entities = manifest.at("entities").get<std::size_t>();
    const auto n_edges = manifest.at("edges").get<std::size_t>();
    const auto dim = manifest.at("dimension").get<std::size_t>();

    const auto passages = read_jsonl(dir / kPassages, n_passages);
    const auto props = read_jsonl(dir / kPropositions, n_props);
    const auto entities = read_jsonl(dir / kEntities, n_entities);
    const auto prop_vecs = read_matrix(dir / kPropositionVecs, n_props, dim);
    const auto entity_vecs = read_matrix(dir / kEntityVecs, n_entities, dim);

    HeteroGraph g;
    for (std::size_t i = 0; i < n_entities; ++i) {
      const auto& e = entities[i];
      if (e.at("id").get<std::size_t>() != i) throw Error(ErrorCode::CorruptFile, "entity order");
      g.add_entity(e.at("name").get<std::string>(), entity_vecs.row(i),
                   e.at("aliases").get<std::vector<std::string>>());
    }
    for (std::size_t i = 0; i < n_passages; ++i) {
      const auto& p = passages[i];
      if (p.at("id").get<std::size_t>() != i) throw Error(ErrorCode::CorruptFile, "passage order");
      const auto span = p.at("span").get<std::vector<std::size_t>>();
      if (span.size() != 2) throw Error(ErrorCode::CorruptFile, "passage span");
      g.add_passage(p.at("text").get<std::string>(), p.at("source_doc").get<std::string>(),
                    {span[0], span[1]});
    }
    for (std::size_t i = 0; i < n_props; ++i) {
      const auto& p = props[i];
      if (p.at("id").get<std::size_t>() != i) {
        throw Error(ErrorCode::CorruptFile, "proposition order");
      }
      std::vector<NodeId> ents;
      for (auto e : p.at("entities").get<std::vector<std::uint32_t>>()) {
        ents.push_back(NodeId::entity(e));
      }
      g.add_proposition(p.at("text").get<std::string>(),
                        NodeId::passage(p.at("passage").get<std::uint32_t>()), ents,
                        prop_vecs.row(i));
    }

    std::vector<std::pair<NodeId, NodeId>> edges;
    {
      auto in = open_in(dir / kEdges);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw Error(ErrorCode::CorruptFile, "edge line: " + line);
        edges.emplace_back(parse_node_id(std::string_view(line).substr(0, tab)),
                           parse_node_id(std::string_view(line).substr(tab + 1)));
      }
    }
    if (edges.size() != n_edges || edges != g.edges()) {
      throw Error(ErrorCode::CorruptFile, "edge file disagrees with node records");
    }
    g.finalize();
    return g;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptFile, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::VersionMismatch || e.code() == ErrorCode::CorruptFile) throw;
    throw Error(ErrorCode::CorruptFile, e.what());
  }
}

}  // namespace propgraph
