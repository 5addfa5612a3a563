#include "mmslu/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "mmslu/error.hpp"

namespace mmslu {

namespace {

constexpr std::array<char, 8> kMagic = {'M', 'M', 'S', 'L', 'U', 'C', 'K', 'P'};

template <class T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  for (std::size_t k = 0; k < sizeof(T); ++k) bytes[k] = static_cast<unsigned char>(value >> (8 * k));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in, const std::string& what) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw FormatError("truncated checkpoint while reading " + what);
  }
  T value = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) value |= static_cast<T>(bytes[k]) << (8 * k);
  return value;
}

struct Header {
  ModelConfig config;
  nlohmann::json tensors;
};

Header read_header(std::istream& in, const std::filesystem::path& path) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw FormatError(path.string() + ": not a checkpoint file");
  }
  const auto version = get_le<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto length = get_le<std::uint64_t>(in, "header length");
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) {
    throw FormatError(path.string() + ": truncated checkpoint header");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": corrupt checkpoint header: " + e.what());
  }
  return {model_config_from_json(j.at("config")), j.at("tensors")};
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return in;
}

}  // namespace

nlohmann::ordered_json model_config_to_json(const ModelConfig& config) {
  nlohmann::ordered_json j;
  j["tags"] = config.tags.labels();
  j["intents"] = config.intents.labels();
  auto spaces = nlohmann::ordered_json::array();
  for (const auto& s : config.spaces) {
    spaces.push_back({{"name", s.name}, {"dim", s.dim}, {"oov", to_string(s.oov)}});
  }
  j["spaces"] = std::move(spaces);
  j["alignment"] = to_string(config.alignment);
  j["hidden_dim"] = config.hidden_dim;
  auto features = nlohmann::ordered_json::array();
  for (const auto& f : config.fusion.features) {
    features.push_back({{"kind", to_string(f.kind)},
                        {"input_dim", f.input_dim},
                        {"projection_dim", f.projection_dim}});
  }
  j["fusion"] = std::move(features);
  j["fine_tune_embeddings"] = config.fine_tune_embeddings;
  j["tuned_vocabulary"] = config.tuned_vocabulary;
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  try {
    ModelConfig config;
    config.tags = make_tag_set(j.at("tags").get<std::vector<std::string>>());
    config.intents = LabelSet(j.at("intents").get<std::vector<std::string>>());
    for (const auto& s : j.at("spaces")) {
      config.spaces.push_back({s.at("name").get<std::string>(), s.at("dim").get<std::size_t>(),
                               parse_oov_policy(s.at("oov").get<std::string>())});
    }
    config.alignment = parse_vocab_alignment(j.at("alignment").get<std::string>());
    config.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    for (const auto& f : j.at("fusion")) {
      config.fusion.features.push_back({parse_utterance_feature(f.at("kind").get<std::string>()),
                                        f.at("input_dim").get<std::size_t>(),
                                        f.at("projection_dim").get<std::size_t>()});
    }
    config.fine_tune_embeddings = j.at("fine_tune_embeddings").get<bool>();
    config.tuned_vocabulary = j.at("tuned_vocabulary").get<std::vector<std::string>>();
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model config: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const HJoint2Model& model) {
  const auto tensors = model.params().tensors();
  const auto names = model.params().tensor_names();
  nlohmann::ordered_json header;
  header["config"] = model_config_to_json(model.config());
  auto shapes = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    shapes.push_back({{"name", names[k]}, {"rows", tensors[k]->rows()}, {"cols", tensors[k]->cols()}});
  }
  header["tensors"] = std::move(shapes);
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const Matrix* m : tensors) {
    for (double v : m->values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw IoError("failed while writing checkpoint " + path.string());
}

ModelConfig read_checkpoint_config(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_header(in, path).config;
}

HJoint2Model load_checkpoint(const std::filesystem::path& path,
                             std::shared_ptr<const CompositeEmbedder> embedder) {
  auto in = open_in(path);
  Header header = read_header(in, path);
  // Shapes come from the config; the stored shapes are cross-checked below.
  HJoint2Model shape_model(header.config, embedder, 0);
  ModelParams params = shape_model.params().zeros_like();
  const auto tensors = params.tensors();
  const auto names = params.tensor_names();
  if (header.tensors.size() != tensors.size()) {
    throw FormatError(path.string() + ": checkpoint lists " + std::to_string(header.tensors.size()) +
                      " tensors, config implies " + std::to_string(tensors.size()));
  }
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    const auto& entry = header.tensors[k];
    if (entry.at("name").get<std::string>() != names[k] ||
        entry.at("rows").get<std::size_t>() != tensors[k]->rows() ||
        entry.at("cols").get<std::size_t>() != tensors[k]->cols()) {
      throw FormatError(path.string() + ": tensor " + std::to_string(k) + " (" + names[k] +
                        ") does not match the recorded config");
    }
    for (double& v : tensors[k]->values()) {
      v = std::bit_cast<double>(get_le<std::uint64_t>(in, names[k]));
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(path.string() + ": trailing bytes after the last tensor");
  }
  return restore_model(std::move(header.config), std::move(embedder), std::move(params));
}

}  // namespace mmslu
