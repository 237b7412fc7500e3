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

#include <sstream>

#include "toxishield/jsonio.hpp"

using namespace toxishield;
using nlohmann::json;

TEST(Jsonl, ReadSkipsBlankAndRejectsGarbage) {
  std::istringstream in("{\"id\":\"a\",\"body\":\"x\"}\n\n{\"id\":2,\"body\":\"y\",\"p\":0.4,\"label\":1}\n");
  std::vector<io::DatasetRecord> recs;
  io::read_jsonl(in, [&](const json& j, std::size_t n) { recs.push_back(io::dataset_record(j, n)); });
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].sample.id, "a");
  EXPECT_EQ(recs[1].sample.id, "2");
  EXPECT_EQ(*recs[1].p, 0.4);
  EXPECT_EQ(*recs[1].label, "1");

  std::istringstream bad("{\"body\":\"x\"}\nnot json\n");
  EXPECT_THROW(io::read_jsonl(bad, [](const json&, std::size_t) {}), InvalidArgument);
  EXPECT_THROW(io::dataset_record(json{{"id", "x"}}, 3), InvalidArgument);
}

TEST(Jsonl, WriteReadRoundTrip) {
  io::DatasetRecord r{TextSample{"i", "body \"quoted\"\nline"}, 0.3, std::string("toxic")};
  std::ostringstream out;
  io::write_jsonl(out, {io::to_json(r)});
  std::istringstream in(out.str());
  io::read_jsonl(in, [&](const json& j, std::size_t) {
    const auto back = io::dataset_record(j);
    EXPECT_EQ(back.sample.body, r.sample.body);
    EXPECT_EQ(back.p, r.p);
    EXPECT_EQ(back.label, r.label);
  });
}

TEST(Json, VerdictShape) {
  AnalysisVerdict v;
  v.id = "q";
  v.score = ToxicityScore(0.9);
  v.label = BinaryLabel::toxic;
  v.classification = ClassificationResult{LabelSet{Category::Insult}, "r", "raw", 1, {}};
  v.reframer_error = StageFailure{"ClientError", "timeout: slow"};
  const auto j = io::to_json(v);
  EXPECT_EQ(j["label"], "toxic");
  EXPECT_EQ(j["classification"]["labels"], json::array({"Insult"}));
  EXPECT_EQ(j["classification"]["retry_count"], 1);
  EXPECT_FALSE(j.contains("detox"));
  EXPECT_EQ(j["degraded"]["reframer"], true);
  EXPECT_EQ(j["degraded"]["coach"], false);
  EXPECT_EQ(j["errors"]["reframer"]["type"], "ClientError");
  EXPECT_TRUE(j["timings_ms"].contains("filter"));
}

TEST(Json, TstPairAcceptsBoolOrNumberFluent) {
  const auto a = io::tst_pair(json::parse(R"({"id":"1","orig_p":0.9,"detox_p":0.1,"fluent":true,"sim":0.8})"));
  EXPECT_EQ(a.fluent, 1.0);
  const auto b = io::tst_pair(json::parse(R"({"id":"1","orig_p":0.9,"detox_p":0.1,"fluent":0.25,"sim":0.8})"));
  EXPECT_EQ(b.fluent, 0.25);
  EXPECT_THROW(io::tst_pair(json::parse(R"({"id":"1","orig_p":0.9})"), 4), InvalidArgument);
}

TEST(Tables, BinaryLayout) {
  const auto r = metrics::binary_report({BinaryLabel::toxic, BinaryLabel::non_toxic},
                                        {BinaryLabel::toxic, BinaryLabel::toxic});
  const auto t = io::binary_table("lexicon", r);
  EXPECT_NE(t.find("P0"), std::string::npos);
  EXPECT_NE(t.find("F1_1"), std::string::npos);
  EXPECT_NE(t.find("Accuracy"), std::string::npos);
  EXPECT_NE(t.find("0.50"), std::string::npos);
}

TEST(Tables, TstLayout) {
  metrics::TstReport r;
  r.detox = 96.17, r.fluency = 99.01, r.preserve = 73.86, r.j_score = metrics::j_score(96.17, 99.01, 73.86);
  const auto t = io::tst_table("teacher", r);
  EXPECT_NE(t.find("88.14"), std::string::npos);
  EXPECT_NE(t.find("J-Score"), std::string::npos);
}
