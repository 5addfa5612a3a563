#include <gtest/gtest.h>

#include <cstring>

#include "mmslu/checkpoint.hpp"
#include "mmslu/error.hpp"
#include "mmslu/random.hpp"
#include "support/fixtures.hpp"

using namespace mmslu;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kVocab{"go", "slower", "please", "left", "door"};

std::shared_ptr<const CompositeEmbedder> two_spaces() {
  auto a = support::random_table("text", kVocab, 4, 1);
  auto b = support::random_table("speech", {"go", "left"}, 3, 2);
  return std::make_shared<const CompositeEmbedder>(
      std::vector<std::shared_ptr<const EmbeddingTable>>{a, b},
      std::vector<OovPolicy>{OovPolicy::ZeroFill, OovPolicy::TrainableUnk});
}

HJoint2Model sample_model() {
  ModelConfig c;
  c.hidden_dim = 5;
  c.fusion.features = {{UtteranceFeature::VisualRoad, 7, 0}, {UtteranceFeature::Acoustic, 6, 3}};
  c.fine_tune_embeddings = true;
  c.tuned_vocabulary = {"go", "door"};
  HJoint2Model m(c, two_spaces(), 17);
  Rng rng(3);
  for (Matrix* t : m.params().tensors()) {
    for (double& v : t->values()) v += rng.normal(0.0, 1e-3);
  }
  m.params().intent_out.bias.values()[0] = -0.0;
  m.params().intent_out.bias.values()[1] = 4.9e-324;
  return m;
}

bool same_bits(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto dir = support::scratch_dir("ckpt");
  const HJoint2Model m = sample_model();
  save_checkpoint(dir / "m.ckpt", m);
  const HJoint2Model back = load_checkpoint(dir / "m.ckpt", two_spaces());
  const auto a = m.params().tensors();
  const auto b = back.params().tensors();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_TRUE(same_bits(a[k]->values(), b[k]->values())) << k;
  EXPECT_EQ(back.config().hidden_dim, 5u);
  EXPECT_EQ(back.config().fusion, m.config().fusion);
  EXPECT_EQ(back.config().tuned_vocabulary, m.config().tuned_vocabulary);
  EXPECT_EQ(back.config().spaces, m.config().spaces);

  // Saving the loaded model reproduces the file byte for byte.
  save_checkpoint(dir / "again.ckpt", back);
  EXPECT_EQ(support::read_file(dir / "m.ckpt"), support::read_file(dir / "again.ckpt"));

  const std::vector<std::string> tokens{"go", "left", "unknown"};
  UtteranceFeatures f;
  f.acoustic = Vector(6, 0.3);
  f.visual_road = Vector(7, -0.1);
  EXPECT_TRUE(same_bits(m.predict(tokens, f).intent_distribution, back.predict(tokens, f).intent_distribution));
}

TEST(Checkpoint, ConfigJsonRoundTrip) {
  const ModelConfig c = sample_model().config();
  const ModelConfig back = model_config_from_json(nlohmann::json::parse(model_config_to_json(c).dump()));
  EXPECT_EQ(back.tags, c.tags);
  EXPECT_EQ(back.intents, c.intents);
  EXPECT_EQ(back.fusion, c.fusion);
  EXPECT_EQ(back.alignment, c.alignment);
}

TEST(Checkpoint, MismatchedEmbedderIsConfigError) {
  const auto dir = support::scratch_dir("ckpt");
  save_checkpoint(dir / "m.ckpt", sample_model());
  EXPECT_THROW(load_checkpoint(dir / "m.ckpt", support::single_space(kVocab, 4, 1)), ConfigError);
}

TEST(Checkpoint, CorruptFilesAreRejected) {
  const auto dir = support::scratch_dir("ckpt");
  save_checkpoint(dir / "m.ckpt", sample_model());
  const std::string bytes = support::read_file(dir / "m.ckpt");

  support::write_file(dir / "magic.ckpt", "NOTACKPT" + bytes.substr(8));
  EXPECT_THROW(load_checkpoint(dir / "magic.ckpt", two_spaces()), FormatError);

  support::write_file(dir / "short.ckpt", bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(load_checkpoint(dir / "short.ckpt", two_spaces()), FormatError);

  support::write_file(dir / "long.ckpt", bytes + "x");
  EXPECT_THROW(load_checkpoint(dir / "long.ckpt", two_spaces()), FormatError);

  EXPECT_THROW(load_checkpoint(dir / "absent.ckpt", two_spaces()), IoError);
}
