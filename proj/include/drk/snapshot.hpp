#pragma once

#include "drk/hybrid_index.hpp"

#include <filesystem>
#include <string>

namespace drk::index {

// Snapshot file layout, all integers little-endian:
//   magic "DRK1" | u32 version | u32 section count
//   sections: u32 name length | name | u64 payload length | payload
//   trailing u64 FNV-1a checksum over every preceding byte
// Sections: params, chunks, postings, vectors, graph. The graph topology is
// serialized as-is, never rebuilt, so a loaded index answers every query
// exactly like the saved one.
void snapshot_save(const HybridIndex& index, const std::filesystem::path& path);
HybridIndex snapshot_load(const std::filesystem::path& path);

// In-memory variants used by the file API and the round-trip tests.
std::string snapshot_serialize(const HybridIndex& index);
HybridIndex snapshot_parse(const std::string& bytes);

} // namespace drk::index
