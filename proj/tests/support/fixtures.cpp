#include "support/fixtures.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "mmslu/random.hpp"

namespace mmslu::support {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const fs::path dir = fs::temp_directory_path() /
                       ("mmslu-test-" + std::to_string(::getpid()) + "-" + tag + "-" +
                        std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::shared_ptr<const EmbeddingTable> random_table(const std::string& name,
                                                   const std::vector<std::string>& tokens,
                                                   std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(tokens.size(), dim);
  for (double& v : m.values()) v = rng.normal(0.0, 0.5);
  return std::make_shared<const EmbeddingTable>(make_table(name, tokens, std::move(m)));
}

std::shared_ptr<const CompositeEmbedder> single_space(const std::vector<std::string>& tokens,
                                                      std::size_t dim, std::uint64_t seed,
                                                      OovPolicy policy) {
  return std::make_shared<const CompositeEmbedder>(
      std::vector<std::shared_ptr<const EmbeddingTable>>{random_table("words", tokens, dim, seed)},
      std::vector<OovPolicy>{policy});
}

std::vector<std::string> random_tokens(const std::vector<std::string>& vocab, std::size_t max_len,
                                       std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = 1 + rng.index(max_len);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(vocab[rng.index(vocab.size())]);
  return out;
}

}  // namespace mmslu::support
