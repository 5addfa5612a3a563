#include "mmslu/embeddings.hpp"

#include <fstream>
#include <unordered_set>

#include "mmslu/error.hpp"
#include "mmslu/text_format.hpp"

namespace mmslu {

std::optional<std::size_t> EmbeddingTable::find(std::string_view token) const {
  const std::string folded = to_lower(token);
  if (auto it = vocab.find(folded); it != vocab.end()) return it->second;
  if (folded != token) {
    if (auto it = vocab.find(std::string(token)); it != vocab.end()) return it->second;
  }
  return std::nullopt;
}

namespace {

bool is_header(const std::vector<std::string_view>& fields) {
  std::size_t count = 0, dim = 0;
  return fields.size() == 2 && parse_count(fields[0], count) && parse_count(fields[1], dim);
}

}  // namespace

EmbeddingTable load_table(const std::filesystem::path& path, std::string name) {
  const auto lines = read_lines(path);
  const std::string where = path.string();
  EmbeddingTable table;
  table.name = std::move(name);

  std::size_t first = 0;
  while (first < lines.size() && split_whitespace(lines[first]).empty()) ++first;
  if (first == lines.size()) throw FormatError(where + ": empty embedding file");
  if (is_header(split_whitespace(lines[first]))) ++first;

  std::vector<double> values;
  for (std::size_t ln = first; ln < lines.size(); ++ln) {
    const auto fields = split_whitespace(lines[ln]);
    if (fields.empty()) continue;
    const std::size_t line_no = ln + 1;
    if (fields.size() < 2) {
      throw FormatError(where + ":" + std::to_string(line_no) + ": entry has no vector");
    }
    const std::size_t dim = fields.size() - 1;
    if (table.dim == 0) {
      table.dim = dim;
    } else if (dim != table.dim) {
      throw FormatError(where + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(table.dim) + " values, found " + std::to_string(dim));
    }
    std::string token(fields[0]);
    if (table.vocab.contains(token)) {
      throw FormatError(where + ":" + std::to_string(line_no) + ": duplicate token '" + token +
                        "'");
    }
    for (std::size_t k = 1; k < fields.size(); ++k) {
      double v = 0.0;
      if (!parse_real(fields[k], v)) {
        throw FormatError(where + ":" + std::to_string(line_no) + ": malformed real '" +
                          std::string(fields[k]) + "'");
      }
      values.push_back(v);
    }
    table.vocab.emplace(token, table.tokens.size());
    table.tokens.push_back(std::move(token));
  }
  if (table.tokens.empty()) throw FormatError(where + ": no embedding entries");
  table.matrix = Matrix(table.tokens.size(), table.dim, std::move(values));
  return table;
}

void write_table(const std::filesystem::path& path, const EmbeddingTable& table,
                 bool with_header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  if (with_header) out << table.size() << ' ' << table.dim << '\n';
  for (std::size_t r = 0; r < table.size(); ++r) {
    out << table.tokens[r] << ' ' << format_reals(table.row(r), ' ') << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

EmbeddingTable make_table(std::string name, std::vector<std::string> tokens, Matrix matrix) {
  if (matrix.rows() != tokens.size() || matrix.cols() == 0) {
    throw ShapeError("embedding table '" + name + "': " + std::to_string(tokens.size()) +
                     " tokens against a " + std::to_string(matrix.rows()) + "x" +
                     std::to_string(matrix.cols()) + " matrix");
  }
  EmbeddingTable table;
  table.name = std::move(name);
  table.dim = matrix.cols();
  for (std::size_t r = 0; r < tokens.size(); ++r) {
    if (!table.vocab.emplace(tokens[r], r).second) {
      throw FormatError("embedding table '" + table.name + "': duplicate token '" + tokens[r] +
                        "'");
    }
  }
  table.tokens = std::move(tokens);
  table.matrix = std::move(matrix);
  return table;
}

std::string to_string(OovPolicy policy) {
  return policy == OovPolicy::ZeroFill ? "zero-fill" : "trainable-unk";
}

OovPolicy parse_oov_policy(std::string_view text) {
  if (text == "zero-fill") return OovPolicy::ZeroFill;
  if (text == "trainable-unk") return OovPolicy::TrainableUnk;
  throw ConfigError("unknown OOV policy '" + std::string(text) +
                    "' (expected zero-fill or trainable-unk)");
}

std::string to_string(VocabAlignment alignment) {
  return alignment == VocabAlignment::Union ? "union" : "intersection";
}

VocabAlignment parse_vocab_alignment(std::string_view text) {
  if (text == "union") return VocabAlignment::Union;
  if (text == "intersection") return VocabAlignment::Intersection;
  throw ConfigError("unknown vocabulary alignment '" + std::string(text) +
                    "' (expected union or intersection)");
}

CompositeEmbedder::CompositeEmbedder(std::vector<std::shared_ptr<const EmbeddingTable>> spaces,
                                     std::vector<OovPolicy> policies, VocabAlignment alignment)
    : spaces_(std::move(spaces)), policies_(std::move(policies)), alignment_(alignment) {
  if (spaces_.empty()) throw EmptyInputError("composite embedder needs at least one space");
  if (policies_.empty()) policies_.assign(spaces_.size(), OovPolicy::ZeroFill);
  if (policies_.size() != spaces_.size()) {
    throw ShapeError("composite embedder: " + std::to_string(spaces_.size()) + " spaces but " +
                     std::to_string(policies_.size()) + " OOV policies");
  }
  for (const auto& space : spaces_) {
    offsets_.push_back(total_dim_);
    total_dim_ += space->dim;
    unk_rows_.emplace_back(space->dim, 0.0);
  }
}

std::vector<std::optional<std::size_t>> CompositeEmbedder::locate(std::string_view token) const {
  std::vector<std::optional<std::size_t>> rows;
  rows.reserve(spaces_.size());
  bool all_present = true;
  for (const auto& space : spaces_) {
    rows.push_back(space->find(token));
    all_present = all_present && rows.back().has_value();
  }
  if (alignment_ == VocabAlignment::Intersection && !all_present) {
    for (auto& r : rows) r.reset();
  }
  return rows;
}

Vector CompositeEmbedder::embed(std::string_view token) const {
  Vector out(total_dim_, 0.0);
  const auto rows = locate(token);
  for (std::size_t s = 0; s < spaces_.size(); ++s) {
    std::span<const double> source;
    if (rows[s]) {
      source = spaces_[s]->row(*rows[s]);
    } else if (policies_[s] == OovPolicy::TrainableUnk) {
      source = unk_rows_[s];
    } else {
      continue;
    }
    std::copy(source.begin(), source.end(), out.begin() + static_cast<std::ptrdiff_t>(offsets_[s]));
  }
  return out;
}

void CompositeEmbedder::set_unk_row(std::size_t s, Vector row) {
  if (row.size() != spaces_.at(s)->dim) {
    throw ShapeError("UNK row for space '" + spaces_[s]->name + "' must have dim " +
                     std::to_string(spaces_[s]->dim));
  }
  unk_rows_[s] = std::move(row);
}

CompositeEmbedder concat_spaces(std::vector<std::shared_ptr<const EmbeddingTable>> tables,
                                std::vector<OovPolicy> policies) {
  return CompositeEmbedder(std::move(tables), std::move(policies));
}

std::vector<SpaceCoverage> coverage_report(const CompositeEmbedder& embedder,
                                           std::span<const std::string> corpus_vocab) {
  if (corpus_vocab.empty()) throw EmptyInputError("coverage report over an empty vocabulary");
  std::unordered_set<std::string> distinct(corpus_vocab.begin(), corpus_vocab.end());
  std::vector<SpaceCoverage> report;
  for (std::size_t s = 0; s < embedder.space_count(); ++s) {
    SpaceCoverage entry;
    entry.name = embedder.space(s).name;
    entry.vocab_size = distinct.size();
    for (const auto& token : distinct) {
      if (embedder.space(s).find(token)) ++entry.covered;
    }
    entry.oov_rate = static_cast<double>(entry.vocab_size - entry.covered) /
                     static_cast<double>(entry.vocab_size);
    report.push_back(entry);
  }
  return report;
}

}  // namespace mmslu
