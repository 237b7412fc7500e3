// Copyright 2026 The ToxiShield Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "toxishield/filter.hpp"
#include "test_support.hpp"

using namespace toxishield;

namespace {

TextSample sample(std::string body) { return TextSample{"t", std::move(body)}; }

ClassifierHandle lexicon_handle(std::vector<std::string> terms = {"damn", "crap", "shit"}) {
  return ClassifierHandle::from_lexicon(Lexicon::with_default_anger(terms));
}

Vocab tiny_vocab() { return Vocab::from_tokens({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "good", "bad", "code"}); }

/// dim 2: "bad" pushes toward class 1, "good" toward class 0.
std::shared_ptr<EmbeddingBagClassifier> tiny_model() {
  std::vector<float> emb = {0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0};
  std::vector<float> w = {1, -1, -1, 1};  // [dim][out]
  std::vector<float> b = {0, 0};
  return std::make_shared<EmbeddingBagClassifier>("tiny", 7, 2, 2, emb, w, b);
}

}  // namespace

TEST(Lexicon, WordBoundaries) {
  const auto lex = Lexicon::with_default_anger({"ass", "damn", "screw you"});
  EXPECT_TRUE(lex.profanity_hits("classical music").empty());
  EXPECT_TRUE(lex.profanity_hits("assert(x)").empty());
  EXPECT_TRUE(lex.profanity_hits("is_ass_ok").empty());
  EXPECT_EQ(lex.profanity_hits("Kick ASS.").size(), 1u);
  EXPECT_EQ(lex.profanity_hits("damn, damn DAMN").size(), 1u);
  EXPECT_EQ(lex.profanity_hits("well screw   you then").size(), 1u);
  EXPECT_TRUE(lex.profanity_hits("screw driver you").empty());
}

TEST(Lexicon, AngerPatterns) {
  const auto lex = Lexicon::with_default_anger({});
  EXPECT_EQ(lex.anger_hits("fine").size(), 0u);
  EXPECT_EQ(lex.anger_hits("WHY IS THIS BROKEN").count("shouting"), 1u);
  EXPECT_EQ(lex.anger_hits("use the HTTP API").count("shouting"), 0u);
  EXPECT_EQ(lex.anger_hits("stop!!").count("repeated_exclamation"), 1u);
  EXPECT_EQ(lex.anger_hits("why??").count("repeated_question"), 1u);
  EXPECT_EQ(lex.anger_hits("what?!").count("interrobang"), 1u);
  EXPECT_EQ(lex.anger_hits("STOP BREAKING MASTER?\?!!").size(), 4u);
}

TEST(Lexicon, LoadsShippedFiles) {
  const auto lex = fixtures::shipped_lexicon();
  EXPECT_GE(lex.term_count(), 15u);
  EXPECT_EQ(lex.anger_patterns().size(), 4u);
  EXPECT_THROW(Lexicon::load("/nonexistent/lex.txt"), ConfigError);
  EXPECT_THROW(Lexicon::parse_anger_patterns("no equals sign"), ConfigError);
  EXPECT_THROW(Lexicon::parse_anger_patterns("bad = ([unclosed"), ConfigError);
}

TEST(LexiconScore, KnownExamples) {
  const auto h = lexicon_handle();
  EXPECT_EQ(score(sample("this looks fine"), h).value(), 0.0);
  EXPECT_DOUBLE_EQ(score(sample("damn, this is slow"), h).value(), 0.9);
  EXPECT_DOUBLE_EQ(lexicon_probability(1, 0), 0.9);
  EXPECT_DOUBLE_EQ(lexicon_probability(0, 1), 0.3);
  EXPECT_DOUBLE_EQ(lexicon_probability(2, 0), 1.0 - 0.01);
  EXPECT_DOUBLE_EQ(lexicon_probability(1, 1), 1.0 - 0.1 * 0.7);
}

TEST(LexiconScore, AddingHitNeverDecreases) {
  for (std::size_t h = 0; h < 8; ++h)
    for (std::size_t a = 0; a < 5; ++a) {
      EXPECT_LE(lexicon_probability(h, a), lexicon_probability(h + 1, a));
      EXPECT_LE(lexicon_probability(h, a), lexicon_probability(h, a + 1));
      EXPECT_GE(lexicon_probability(h, a), 0.0);
      EXPECT_LE(lexicon_probability(h, a), 1.0);
    }
}

TEST(LexiconScore, ObfuscatedProfanityIsNotCaught) {
  const auto h = ClassifierHandle::from_lexicon(Lexicon::with_default_anger({"fuck"}));
  EXPECT_EQ(score(sample("f u c k this"), h).value(), 0.0);
}

TEST(Score, EmptyBodyRejected) { EXPECT_THROW(score(sample("  "), lexicon_handle()), EmptyInput); }

TEST(Decide, InclusiveThreshold) {
  EXPECT_EQ(decide(ToxicityScore(0.5), 0.5), BinaryLabel::toxic);
  EXPECT_EQ(decide(ToxicityScore(0.0), 0.01), BinaryLabel::non_toxic);
  EXPECT_EQ(decide(ToxicityScore(0.49), 0.5), BinaryLabel::non_toxic);
  EXPECT_EQ(decide(ToxicityScore(0.0), 0.0), BinaryLabel::toxic);
  EXPECT_THROW(decide(ToxicityScore(0.3), 1.5), InvalidArgument);
}

TEST(Decide, MonotoneInP) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    double p1 = u(rng), p2 = u(rng), t = u(rng);
    if (p1 > p2) std::swap(p1, p2);
    if (decide(ToxicityScore(p1), t) == BinaryLabel::toxic) {
      EXPECT_EQ(decide(ToxicityScore(p2), t), BinaryLabel::toxic);
    }
  }
}

TEST(Softmax, SymmetricAndNormalized) {
  EXPECT_DOUBLE_EQ(toxic_probability({0.0f, 0.0f}), 0.5);
  EXPECT_NEAR(toxic_probability({1000.0f, -1000.0f}), 0.0, 1e-12);
  EXPECT_NEAR(toxic_probability({-1000.0f, 1000.0f}), 1.0, 1e-12);
  std::mt19937_64 rng(11);
  std::normal_distribution<float> n(0.0f, 5.0f);
  for (int i = 0; i < 1000; ++i) {
    const float a = n(rng), b = n(rng);
    EXPECT_NEAR(toxic_probability({a, b}) + toxic_probability({b, a}), 1.0, 1e-6);
  }
  EXPECT_THROW(toxic_probability({1.0f}), ShapeError);
  EXPECT_THROW(toxic_probability({1.0f, 2.0f, 3.0f}), ShapeError);
}

TEST(SerializedModel, ScoresThroughTokenizer) {
  const auto h = ClassifierHandle::from_model(tiny_model(), std::make_shared<const Vocab>(tiny_vocab()));
  EXPECT_EQ(h.backend(), Backend::serialized_model);
  EXPECT_EQ(h.model_id(), "tiny");
  const double bad = score(sample("bad bad code"), h).value();
  const double good = score(sample("good code"), h).value();
  EXPECT_GT(bad, 0.5);
  EXPECT_LT(good, 0.5);
  EXPECT_EQ(score(sample("bad bad code"), h).value(), bad);
  // Only specials and unknowns: pooled vector is zero -> logits (0,0).
  EXPECT_DOUBLE_EQ(score(sample("zzz"), h).value(), 0.5);
}

TEST(SerializedModel, Fp32RoundTripIsExact) {
  const auto m = tiny_model();
  const auto back = EmbeddingBagClassifier::parse(m->serialize(TensorType::f32));
  TokenSequence seq = tokenize("bad code good", tiny_vocab());
  EXPECT_EQ(back->logits(seq), m->logits(seq));
  EXPECT_EQ(back->model_id(), "tiny");
}

TEST(SerializedModel, Int8KeepsTheOutputContract) {
  std::mt19937_64 rng(5);
  std::normal_distribution<float> n(0.0f, 1.0f);
  const std::size_t vocab = 7, dim = 8;
  std::vector<float> emb(vocab * dim), w(dim * 2), b(2);
  for (auto* t : {&emb, &w, &b})
    for (auto& x : *t) x = n(rng);
  EmbeddingBagClassifier m("rand", vocab, dim, 2, emb, w, b);
  const auto q = EmbeddingBagClassifier::parse(m.serialize(TensorType::int8));
  EmbeddingBagClassifier big("big", 500, 32, 2, std::vector<float>(500 * 32, 0.25f), std::vector<float>(64, -0.5f),
                            std::vector<float>(2, 0.1f));
  EXPECT_LT(big.serialize(TensorType::int8).size(), big.serialize(TensorType::f32).size() / 3);
  const auto v = std::make_shared<const Vocab>(tiny_vocab());
  for (const char* text : {"good", "bad", "code bad", "good good code", "zzz bad"}) {
    const auto seq = tokenize(text, *v);
    const auto lf = m.logits(seq), lq = q->logits(seq);
    ASSERT_EQ(lq.size(), 2u);
    EXPECT_NEAR(toxic_probability(lf), toxic_probability(lq), 0.05) << text;
  }
}

TEST(SerializedModel, LoadErrors) {
  const auto bytes = tiny_model()->serialize(TensorType::f32);
  EXPECT_THROW(EmbeddingBagClassifier::parse("NOTMODEL"), ModelLoadError);
  EXPECT_THROW(EmbeddingBagClassifier::parse(bytes.substr(0, bytes.size() - 3)), ModelLoadError);
  EXPECT_THROW(EmbeddingBagClassifier::parse(bytes + "x"), ModelLoadError);
  EXPECT_THROW(EmbeddingBagClassifier::load("/nonexistent/model.txsm"), ModelLoadError);

  EmbeddingBagClassifier three("three", 7, 2, 3, std::vector<float>(14), std::vector<float>(6), std::vector<float>(3));
  EXPECT_THROW(EmbeddingBagClassifier::parse(three.serialize(TensorType::f32)), ShapeError);
  EXPECT_THROW(EmbeddingBagClassifier("x", 7, 2, 2, {}, {}, {}), ShapeError);
}

TEST(SerializedModel, LoadFromFileAndVocabMismatch) {
  const std::string dir = ::testing::TempDir();
  {
    std::ofstream(dir + "/tiny.txsm", std::ios::binary) << tiny_model()->serialize(TensorType::int8);
    std::ofstream(dir + "/tiny_vocab.txt") << "[PAD]\n[UNK]\n[CLS]\n[SEP]\ngood\nbad\ncode\n";
    std::ofstream(dir + "/short_vocab.txt") << "[PAD]\n[UNK]\n[CLS]\n[SEP]\n";
  }
  const auto h = ClassifierHandle::load_model(dir + "/tiny.txsm", dir + "/tiny_vocab.txt");
  EXPECT_GT(score(sample("bad"), h).value(), 0.5);
  EXPECT_THROW(ClassifierHandle::load_model(dir + "/tiny.txsm", dir + "/short_vocab.txt"), ModelLoadError);
}

TEST(Backend, Names) {
  EXPECT_EQ(backend_from_string("lexicon"), Backend::lexicon);
  EXPECT_EQ(backend_from_string("onnx"), Backend::serialized_model);
  EXPECT_THROW(backend_from_string("gpu"), ConfigError);
  EXPECT_THROW(ClassifierHandle::from_lexicon(Lexicon{}, 1.5), ConfigError);
}
