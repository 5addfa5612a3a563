#include "mmslu/sidecar.hpp"

#include <fstream>
#include <set>
#include <utility>

#include "mmslu/error.hpp"
#include "mmslu/text_format.hpp"

namespace mmslu {

namespace {

Vector parse_vector_field(std::string_view field, const std::string& where) {
  Vector values;
  for (std::string_view item : split(field, ',')) {
    double v = 0.0;
    if (!parse_real(item, v)) {
      throw FormatError(where + ": malformed real '" + std::string(item) + "'");
    }
    values.push_back(v);
  }
  return values;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

FeatureMap read_vector_sidecar(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  FeatureMap features;
  std::size_t dim = 0;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(ln + 1);
    const auto fields = split(lines[ln], '\t');
    if (fields.size() != 2 || fields[0].empty()) {
      throw FormatError(where + ": expected 'id<TAB>comma-separated reals'");
    }
    Vector values = parse_vector_field(fields[1], where);
    if (dim == 0) {
      dim = values.size();
    } else if (values.size() != dim) {
      throw FormatError(where + ": row has " + std::to_string(values.size()) +
                        " values, expected " + std::to_string(dim));
    }
    std::string id(fields[0]);
    if (!features.emplace(id, std::move(values)).second) {
      throw FormatError(where + ": duplicate utterance id '" + id + "'");
    }
  }
  return features;
}

void write_vector_sidecar(const std::filesystem::path& path, const FeatureMap& features) {
  auto out = open_for_write(path);
  for (const auto& [id, values] : features) out << id << '\t' << format_reals(values) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<FrameRow> read_frame_sidecar(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  std::vector<FrameRow> rows;
  std::set<std::pair<std::string, std::size_t>> seen;
  std::size_t dim = 0;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(ln + 1);
    const auto fields = split(lines[ln], '\t');
    FrameRow row;
    if (fields.size() != 3 || fields[0].empty() || !parse_count(fields[1], row.frame_index)) {
      throw FormatError(where + ": expected 'id<TAB>frame-index<TAB>comma-separated reals'");
    }
    row.utterance_id = std::string(fields[0]);
    row.values = parse_vector_field(fields[2], where);
    if (dim == 0) {
      dim = row.values.size();
    } else if (row.values.size() != dim) {
      throw FormatError(where + ": row has " + std::to_string(row.values.size()) +
                        " values, expected " + std::to_string(dim));
    }
    if (!seen.emplace(row.utterance_id, row.frame_index).second) {
      throw FormatError(where + ": duplicate frame " + std::to_string(row.frame_index) +
                        " for utterance '" + row.utterance_id + "'");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_frame_sidecar(const std::filesystem::path& path, const std::vector<FrameRow>& rows) {
  auto out = open_for_write(path);
  for (const auto& row : rows) {
    out << row.utterance_id << '\t' << row.frame_index << '\t' << format_reals(row.values) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace mmslu
