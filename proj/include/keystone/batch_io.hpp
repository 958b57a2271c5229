#pragma once

// Candidate batch files.
//
// structured-text: {"shape": [K, T, A], "candidates": [[[...], ...], ...]}
// delimiter-separated: a `K,T,A` header line, then K*T rows of A values;
// row t of candidate i sits on data line i*T + t.

#include <filesystem>
#include <string>
#include <string_view>

#include "keystone/geometry.hpp"

namespace keystone {

enum class BatchFormat { kStructuredText, kDelimited };

/// "json"/"structured" or "csv"/"delimited".
BatchFormat parse_batch_format(std::string_view name);
/// By extension: .csv/.txt are delimited, everything else structured.
BatchFormat guess_batch_format(const std::filesystem::path& path);

CandidateBatch parse_batch(std::string_view text, BatchFormat format);
CandidateBatch parse_batch_file(const std::filesystem::path& path, BatchFormat format);

std::string write_batch(const CandidateBatch& batch, BatchFormat format);
void write_batch_file(const CandidateBatch& batch, const std::filesystem::path& path, BatchFormat format);

}  // namespace keystone
