#pragma once

#include <filesystem>

#include "propgraph/graph.hpp"

namespace propgraph {

inline constexpr int kGraphFormatVersion = 1;

/// Writes `graph` into directory `dir` (created if needed):
///
///   manifest.json                  format version, node counts, dimension
///   passages.jsonl                 one record per passage, in index order
///   propositions.jsonl             one record per proposition
///   entities.jsonl                 one record per entity
///   edges.tsv                      "prop:i<TAB>psg:j" / "prop:i<TAB>ent:k", sorted
///   proposition_embeddings.bin     u64 rows, u64 dim, then rows*dim f32 (all LE)
///   entity_embeddings.bin          same layout
void save_graph(const HeteroGraph& graph, const std::filesystem::path& dir);

/// Inverse of save_graph. The result is finalized. Throws VersionMismatch for an
/// unknown format version and CorruptFile for truncated or inconsistent content.
HeteroGraph load_graph(const std::filesystem::path& dir);

}  // namespace propgraph
