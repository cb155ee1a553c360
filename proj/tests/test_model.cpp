#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "jshield/dataset.hpp"
#include "jshield/model.hpp"
#include "jshield/preprocess.hpp"
#include "jshield/rng.hpp"
#include "test_util.hpp"

using namespace jshield;
using Catch::Matchers::ContainsSubstring;

namespace {

// Two-class model over one pixel with fixed logits via the bias terms.
ModelWeights logit_model(double logit0, double logit1) {
  ArchitectureSpec arch;
  arch.in_channels = 1;
  arch.in_height = 1;
  arch.in_width = 1;
  arch.layers = {DenseLayer{2}};
  ModelWeights w = zero_weights<float>(arch);
  w.params[1].data = {static_cast<float>(logit0), static_cast<float>(logit1)};
  return w;
}

StdTensor one_pixel_input() {
  Image img(1, 1, 1);
  img.pixels = {128};
  return standardize<float>(img, 0.0, 1.0);
}

Dataset tiny_digits(std::size_t n, Split split = Split::kTrain) {
  return dataset_head(
      load_dataset(testutil::data_dir() + "/digits", DatasetFormat::kMnistIdx, split), n);
}

}  // namespace

TEST_CASE("softmax of logits (0, ln 9) is (0.1, 0.9)") {
  const ModelWeights w = logit_model(0.0, std::log(9.0));
  const Prediction pred = predict(w, one_pixel_input());
  REQUIRE(pred.probs[0] == Catch::Approx(0.1).margin(1e-6));
  REQUIRE(pred.probs[1] == Catch::Approx(0.9).margin(1e-6));
  REQUIRE(pred.top_class == 1);
  REQUIRE(pred.top_prob == Catch::Approx(0.9).margin(1e-6));
  REQUIRE_FALSE(pred.tie_flag);
}

TEST_CASE("exact ties pick the smallest class and set the flag") {
  const ModelWeights w = logit_model(0.7, 0.7);
  const Prediction pred = predict(w, one_pixel_input());
  REQUIRE(pred.top_class == 0);
  REQUIRE(pred.tie_flag);
}

TEST_CASE("probabilities sum to one on random models") {
  SplitMix64 rng(0x4D4F4401);
  ArchitectureSpec arch;
  arch.in_channels = 1;
  arch.in_height = 6;
  arch.in_width = 6;
  arch.layers = {ConvLayer{3, 3, 1, Padding::kSame}, ReluLayer{}, DenseLayer{7}};
  for (int trial = 0; trial < 10; ++trial) {
    const auto w = testutil::random_weights<float>(arch, rng, 1.0);
    const auto x = testutil::random_tensor<float>({1, 6, 6}, rng, 2.0);
    const Prediction pred = predict(w, StdTensor{x, 0.0, 1.0});
    double total = 0.0;
    for (double p : pred.probs) {
      REQUIRE(p >= 0.0);
      total += p;
    }
    REQUIRE(total == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("logit shifts through the final bias do not change predictions") {
  SplitMix64 rng(0x4D4F4402);
  ArchitectureSpec arch;
  arch.in_channels = 1;
  arch.in_height = 4;
  arch.in_width = 4;
  arch.layers = {DenseLayer{5}};
  auto w = testutil::random_weights<float>(arch, rng, 0.8);
  auto shifted = w;
  for (float& b : shifted.params[1].data) b += 3.25f;

  const auto x = testutil::random_tensor<float>({1, 4, 4}, rng, 1.5);
  const Prediction a = predict(w, StdTensor{x, 0.0, 1.0});
  const Prediction b = predict(shifted, StdTensor{x, 0.0, 1.0});
  REQUIRE(a.top_class == b.top_class);
  for (std::size_t i = 0; i < a.probs.size(); ++i) {
    REQUIRE(a.probs[i] == Catch::Approx(b.probs[i]).margin(1e-5));
  }
}

TEST_CASE("standardization stats are exact on a handmade dataset") {
  Dataset ds;
  ds.class_count = 2;
  Image a(2, 1, 1), b(2, 1, 1);
  a.pixels = {0, 255};
  b.pixels = {255, 255};
  ds.images = {a, b};
  ds.labels = {0, 1};
  ds.ids = {0, 1};
  const auto [mean, scale] = compute_std_stats(ds);
  REQUIRE(mean == Catch::Approx(0.75).margin(1e-12));
  REQUIRE(scale == Catch::Approx(std::sqrt(3.0) / 4.0).margin(1e-12));
}

TEST_CASE("training overfits a 32-image subset") {
  const Dataset subset = tiny_digits(32);
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.batch_size = 8;
  cfg.learning_rate = 0.05;
  cfg.seed = 1;
  const TrainResult result = train(mnist_arch(), subset, cfg);
  INFO("final loss " << result.final_train_loss);
  REQUIRE(result.final_train_loss < 0.01);
  REQUIRE(dataset_accuracy(result.weights, subset) == 1.0);
}

TEST_CASE("zero learning rate leaves the weights at initialization") {
  const Dataset subset = tiny_digits(8);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.learning_rate = 0.0;
  cfg.momentum = 0.0;
  cfg.seed = 3;
  const TrainResult result = train(mnist_arch(), subset, cfg);
  const ModelWeights fresh = init_weights(mnist_arch(), 3);
  for (std::size_t p = 0; p < fresh.params.size(); ++p) {
    REQUIRE(result.weights.params[p].data == fresh.params[p].data);
  }
}

TEST_CASE("training is bit-identical for a fixed seed") {
  const Dataset subset = tiny_digits(24);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 11;
  const TrainResult a = train(mnist_arch(), subset, cfg);
  const TrainResult b = train(mnist_arch(), subset, cfg);
  REQUIRE(a.epoch_losses == b.epoch_losses);
  for (std::size_t p = 0; p < a.weights.params.size(); ++p) {
    REQUIRE(a.weights.params[p].data == b.weights.params[p].data);
  }
}

TEST_CASE("different seeds give different weights") {
  const Dataset subset = tiny_digits(8);
  TrainConfig cfg;
  cfg.epochs = 1;
  const TrainResult a = train(mnist_arch(), subset, TrainConfig{1, 32, 0.05, 0.9, 1});
  const TrainResult b = train(mnist_arch(), subset, TrainConfig{1, 32, 0.05, 0.9, 2});
  REQUIRE(a.weights.params[0].data != b.weights.params[0].data);
}

TEST_CASE("mean epoch loss does not increase over the first epochs") {
  const Dataset subset = tiny_digits(256);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 5;
  const TrainResult result = train(mnist_arch(), subset, cfg);
  REQUIRE(result.epoch_losses.size() == 3);
  REQUIRE(result.epoch_losses[1] <= result.epoch_losses[0]);
  REQUIRE(result.epoch_losses[2] <= result.epoch_losses[1]);
}

TEST_CASE("training on an empty dataset is rejected") {
  Dataset empty;
  REQUIRE_THROWS_WITH(train(mnist_arch(), empty, TrainConfig{}), ContainsSubstring("empty"));
}

TEST_CASE("weights survive a serialization round trip bit-identically") {
  const Dataset subset = tiny_digits(16);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.seed = 9;
  const TrainResult result = train(mnist_arch(), subset, cfg);

  const auto bytes = serialize_weights(result.weights);
  const ModelWeights back = deserialize_weights(bytes);

  REQUIRE(back.std_mean == result.weights.std_mean);
  REQUIRE(back.std_scale == result.weights.std_scale);
  REQUIRE(back.class_names == result.weights.class_names);
  REQUIRE(back.params.size() == result.weights.params.size());
  for (std::size_t p = 0; p < back.params.size(); ++p) {
    REQUIRE(back.params[p].shape == result.weights.params[p].shape);
    REQUIRE(back.params[p].data == result.weights.params[p].data);
  }
  // Same architecture: serializing again reproduces the same bytes.
  REQUIRE(serialize_weights(back) == bytes);
}

TEST_CASE("corrupted weight files are rejected with specific errors") {
  const ModelWeights w = logit_model(0.0, 1.0);
  const auto bytes = serialize_weights(w);

  SECTION("magic mismatch") {
    auto bad = bytes;
    bad[0] = 'X';
    REQUIRE_THROWS_WITH(deserialize_weights(bad), ContainsSubstring("magic mismatch"));
  }
  SECTION("unsupported version") {
    auto bad = bytes;
    bad[4] = 99;
    REQUIRE_THROWS_WITH(deserialize_weights(bad), ContainsSubstring("unsupported version 99"));
  }
  SECTION("flipped payload byte breaks the checksum") {
    auto bad = bytes;
    // Inside the final parameter's float data, just before the CRC trailer:
    // the structure still parses, so only the checksum can catch it.
    bad[bytes.size() - 5] ^= 0x40;
    REQUIRE_THROWS_WITH(deserialize_weights(bad), ContainsSubstring("CRC mismatch"));
  }
  SECTION("truncation") {
    std::vector<std::uint8_t> bad(bytes.begin(), bytes.begin() + bytes.size() / 2);
    REQUIRE_THROWS_WITH(deserialize_weights(bad), ContainsSubstring("offset"));
  }
}

TEST_CASE("save and load round-trip through a file") {
  const std::string path = "/tmp/jshield_test_weights.bin";
  const ModelWeights w = logit_model(0.25, -0.5);
  save_weights(w, path);
  const ModelWeights back = load_weights(path);
  REQUIRE(back.params[1].data == w.params[1].data);
  std::remove(path.c_str());
}
