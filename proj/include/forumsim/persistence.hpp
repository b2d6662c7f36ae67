#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "forumsim/types.hpp"

namespace forumsim {

inline constexpr int kTranscriptSchemaVersion = 1;

/// Canonical line-delimited JSON: one header record, then one record per
/// post in sequence order. Equal transcripts give equal bytes.
std::string serialize_transcript(const Transcript& t);

/// Inverse of serialize_transcript. Validates every transcript invariant;
/// throws SchemaVersionError or CorruptTranscriptError (with line number).
Transcript parse_transcript(std::string_view text);

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

void write_transcript(const Transcript& t, const std::filesystem::path& path);
Transcript read_transcript(const std::filesystem::path& path);

struct TranscriptLoad {
  /// Sorted by file name.
  std::vector<Transcript> transcripts;
  std::vector<std::pair<std::filesystem::path, std::string>> failures;
};

/// Reads every *.jsonl in `dir`; unreadable files are collected, not thrown.
TranscriptLoad read_transcript_dir(const std::filesystem::path& dir);

}  // namespace forumsim
