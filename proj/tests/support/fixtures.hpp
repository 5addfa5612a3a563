#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "mmslu/embeddings.hpp"
#include "mmslu/model.hpp"

namespace mmslu::support {

/// Fresh, empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

/// Gaussian table with one row per token.
std::shared_ptr<const EmbeddingTable> random_table(const std::string& name,
                                                   const std::vector<std::string>& tokens,
                                                   std::size_t dim, std::uint64_t seed);

std::shared_ptr<const CompositeEmbedder> single_space(const std::vector<std::string>& tokens,
                                                      std::size_t dim, std::uint64_t seed,
                                                      OovPolicy policy = OovPolicy::ZeroFill);

/// Random utterance drawn from `vocab`, 1..max_len tokens.
std::vector<std::string> random_tokens(const std::vector<std::string>& vocab, std::size_t max_len,
                                       std::uint64_t seed);

}  // namespace mmslu::support
