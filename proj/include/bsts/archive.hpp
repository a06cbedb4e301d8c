#pragma once

#include <filesystem>
#include <string>

#include "bsts/gibbs.hpp"

namespace bsts {

struct ArchiveOptions {
  /// Also store every state path (m x n values per draw).
  bool include_states = true;
};

/// Writes `<dir>/<stem>.csv` (one row per retained draw, full precision) and
/// `<dir>/<stem>.json` (layout, names, sampler config and seed).
void write_archive(const PosteriorDraws& draws, const std::filesystem::path& dir, const std::string& stem = "draws",
                   const ArchiveOptions& options = {});

/// Reads an archive back. The returned draws carry the layout and names of
/// the original model but no system matrices or design, which is enough for
/// posterior_summary, variance_summary and dynamic_coefficient_paths.
PosteriorDraws read_archive(const std::filesystem::path& dir, const std::string& stem = "draws");

}  // namespace bsts
