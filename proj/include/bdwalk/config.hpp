#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bdwalk/experiments.hpp"
#include "bdwalk/serialize.hpp"

namespace bdwalk {

/// Reads an experiment configuration (JSON). Unknown keys are errors and
/// come with the nearest known key as a suggestion. A previous bdwalk output
/// is accepted too: its embedded manifest config is used.
///
/// Throws ConfigError naming the first offending field; the message lists
/// every problem found.
ExperimentSpec load_config(const std::filesystem::path& path);

/// Same, from text. `source` prefixes parse diagnostics. Text starting with
/// '#' is a CSV output: its first line holds the manifest.
ExperimentSpec parse_config(const std::string& text, const std::string& source = "<config>");

/// Same, from a parsed document. Fields absent from `j` keep the values in
/// `base`.
ExperimentSpec config_from_json(const io::Json& j, ExperimentSpec base = {});

/// The JSON document behind a config: parse errors carry source:line:col,
/// and a previous output is reduced to its manifest config.
io::Json parse_document(const std::string& text, const std::string& source = "<config>");
io::Json load_document(const std::filesystem::path& path);

/// Levenshtein distance.
std::size_t edit_distance(const std::string& a, const std::string& b);

/// Closest candidate within edit distance 2 (ties: first listed), or "".
std::string suggest_key(const std::string& key, const std::vector<std::string>& known);

}  // namespace bdwalk
