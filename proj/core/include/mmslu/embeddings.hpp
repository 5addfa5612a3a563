#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mmslu/matrix.hpp"

namespace mmslu {

/// A pretrained token -> vector map (GloVe, Word2Vec, Speech2Vec, ...).
struct EmbeddingTable {
  std::string name;
  std::size_t dim = 0;
  std::vector<std::string> tokens;  // row order
  std::unordered_map<std::string, std::size_t> vocab;
  Matrix matrix;  // |vocab| x dim

  std::size_t size() const { return tokens.size(); }
  std::span<const double> row(std::size_t index) const { return matrix.row(index); }
  /// Looks the token up after lowercasing it, then verbatim.
  std::optional<std::size_t> find(std::string_view token) const;

  friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
    return a.name == b.name && a.dim == b.dim && a.tokens == b.tokens && a.matrix == b.matrix;
  }
};

/// Reads the GloVe/Word2Vec text format: one "token v1 ... vD" entry per line,
/// with an optional leading "count dim" header line (auto-detected).
EmbeddingTable load_table(const std::filesystem::path& path, std::string name);

/// Writes the same text format; `with_header` emits the Word2Vec "count dim" line.
void write_table(const std::filesystem::path& path, const EmbeddingTable& table, bool with_header);

EmbeddingTable make_table(std::string name, std::vector<std::string> tokens, Matrix matrix);

enum class OovPolicy { ZeroFill, TrainableUnk };
/// Union: each space contributes whatever it has. Intersection: a token
/// missing from any space is treated as missing from all of them.
enum class VocabAlignment { Union, Intersection };

std::string to_string(OovPolicy policy);
OovPolicy parse_oov_policy(std::string_view text);
std::string to_string(VocabAlignment alignment);
VocabAlignment parse_vocab_alignment(std::string_view text);

/// Concatenation of several embedding spaces in a fixed order.
class CompositeEmbedder {
 public:
  CompositeEmbedder(std::vector<std::shared_ptr<const EmbeddingTable>> spaces,
                    std::vector<OovPolicy> policies,
                    VocabAlignment alignment = VocabAlignment::Union);

  std::size_t total_dim() const { return total_dim_; }
  std::size_t space_count() const { return spaces_.size(); }
  const EmbeddingTable& space(std::size_t s) const { return *spaces_[s]; }
  OovPolicy policy(std::size_t s) const { return policies_[s]; }
  VocabAlignment alignment() const { return alignment_; }
  /// Column where space s starts inside a composite vector.
  std::size_t offset(std::size_t s) const { return offsets_[s]; }

  /// Row index per space, or nullopt where the token counts as OOV.
  std::vector<std::optional<std::size_t>> locate(std::string_view token) const;

  /// Concatenated vector of length total_dim. OOV slices are zeros under
  /// ZeroFill and the space's UNK row under TrainableUnk.
  Vector embed(std::string_view token) const;

  const Vector& unk_row(std::size_t s) const { return unk_rows_[s]; }
  void set_unk_row(std::size_t s, Vector row);

 private:
  std::vector<std::shared_ptr<const EmbeddingTable>> spaces_;
  std::vector<OovPolicy> policies_;
  VocabAlignment alignment_;
  std::vector<std::size_t> offsets_;
  std::vector<Vector> unk_rows_;
  std::size_t total_dim_ = 0;
};

CompositeEmbedder concat_spaces(std::vector<std::shared_ptr<const EmbeddingTable>> tables,
                                std::vector<OovPolicy> policies);

struct SpaceCoverage {
  std::string name;
  std::size_t covered = 0;
  std::size_t vocab_size = 0;
  double oov_rate = 0.0;
};

/// Per-space coverage of a corpus vocabulary (membership only, before any
/// alignment policy is applied).
std::vector<SpaceCoverage> coverage_report(const CompositeEmbedder& embedder,
                                           std::span<const std::string> corpus_vocab);

}  // namespace mmslu
