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

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "toxishield/config.hpp"
#include "toxishield/curation.hpp"
#include "toxishield/jsonio.hpp"
#include "toxishield/metrics.hpp"
#include "toxishield/service.hpp"
#include "toxishield/tokenizer.hpp"

using namespace toxishield;
using nlohmann::json;

namespace {

struct Globals {
  std::string config;
  std::uint64_t seed = 42;
  bool json = false;
};

/// "-" reads stdin; an existing file path reads the file; anything else is the text itself.
std::string text_arg(const std::string& arg) {
  if (arg == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  std::error_code ec;
  if (std::filesystem::is_regular_file(arg, ec)) return read_text_file(arg);
  return arg;
}

std::vector<io::DatasetRecord> read_records(const std::string& path) {
  std::vector<io::DatasetRecord> out;
  io::read_jsonl_file(path, [&](const json& j, std::size_t n) { out.push_back(io::dataset_record(j, n)); });
  return out;
}

void print(const Globals& g, const json& j, const std::string& human) {
  if (g.json) std::cout << j.dump(2) << "\n";
  else std::cout << human;
}

std::string human_verdict(const AnalysisVerdict& v) {
  std::ostringstream s;
  s << "label:    " << to_string(v.label) << "\n"
    << "p_toxic:  " << io::fixed(v.score.value(), 4) << "\n";
  if (v.classification) {
    s << "category: " << v.classification->labels.to_string() << "\n"
      << "why:      " << v.classification->rationale << "\n";
  } else if (v.coach_error) {
    s << "category: unavailable (" << v.coach_error->kind << ": " << v.coach_error->message << ")\n";
  }
  if (v.detox) {
    s << "rewrite:  " << v.detox->detoxified << "\n"
      << "changes:  " << v.detox->rationale << "\n";
  } else if (v.reframer_error) {
    s << "rewrite:  unavailable (" << v.reframer_error->kind << ": " << v.reframer_error->message << ")\n";
  }
  s << "time:     " << io::fixed(v.timings.total_ms, 1) << " ms\n";
  return s.str();
}

service::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

std::vector<unsigned> parse_ratios(const std::string& s) {
  std::vector<unsigned> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, ':'))
    for (std::stringstream in2(part); std::getline(in2, part, ',');) out.push_back(static_cast<unsigned>(std::stoul(part)));
  return out;
}

std::vector<LabelSet> label_column(const std::vector<json>& rows, const char* key) {
  std::vector<LabelSet> out;
  for (const auto& r : rows) {
    std::vector<Category> cats;
    const auto& v = r.at(key);
    if (v.is_array()) {
      for (const auto& x : v) cats.push_back(normalize_label(x.get<std::string>()));
    } else {
      for (const auto& tok : PromptConfig::split_label_list(v.get<std::string>())) cats.push_back(normalize_label(tok));
    }
    out.push_back(LabelSet::from(cats));
  }
  return out;
}

BinaryLabel binary_value(const json& v) {
  if (v.is_boolean()) return v.get<bool>() ? BinaryLabel::toxic : BinaryLabel::non_toxic;
  if (v.is_number()) return binary_label_from_string(std::to_string(v.get<int>()));
  return binary_label_from_string(v.get<std::string>());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ToxiShield moderation engine for code-review comments"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("-c,--config", g.config, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for sampling and splits");
  app.add_flag("--json", g.json, "Emit JSON");

  auto runtime = [&](bool need_llm) {
    const auto cfg = ServiceConfig::load(g.config);
    if (need_llm && cfg.llm_endpoint.empty())
      throw ConfigError("no LLM endpoint configured (set [llm] endpoint or LLM_ENDPOINT)");
    return make_runtime(cfg);
  };

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string host;
  int port = -1;
  serve->add_option("--host", host, "Bind address (overrides config)");
  serve->add_option("--port", port, "Port (overrides config)");
  serve->callback([&] {
    const auto rt = runtime(false);
    service::Server server(rt.pipeline, rt.config.cors_origins, rt.config.threads);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    const auto h = host.empty() ? rt.config.host : host;
    const int p = port >= 0 ? port : rt.config.port;
    std::cerr << "toxishield: serving on " << h << ":" << p << " (backend " << to_string(rt.filter.backend())
              << (rt.config.llm_endpoint.empty() ? ", no LLM" : ", LLM " + rt.config.llm_model) << ")\n";
    if (!server.listen(h, p)) throw ConfigError("cannot listen on " + h + ":" + std::to_string(p));
    g_server = nullptr;
  });

  // analyze / classify / detoxify
  std::string text;
  auto* analyze = app.add_subcommand("analyze", "Score a comment and, if toxic, classify and rewrite it");
  analyze->add_option("text", text, "Comment text, a file path, or - for stdin")->required();
  analyze->callback([&] {
    const auto rt = runtime(false);
    const auto v = rt.pipeline->analyze({"cli", text_arg(text)});
    print(g, io::to_json(v), human_verdict(v));
  });

  auto* classify = app.add_subcommand("classify", "Assign toxicity subcategories with the LLM");
  classify->add_option("text", text, "Comment text, a file path, or - for stdin")->required();
  classify->callback([&] {
    const auto rt = runtime(true);
    const auto r = rt.pipeline->classify({"cli", text_arg(text)});
    print(g, io::to_json(r), r.labels.to_string() + "\n" + r.rationale + "\n");
  });

  auto* detox = app.add_subcommand("detoxify", "Rewrite a comment in a civil tone with the LLM");
  detox->add_option("text", text, "Comment text, a file path, or - for stdin")->required();
  detox->callback([&] {
    const auto rt = runtime(true);
    const auto r = rt.pipeline->detoxify({"cli", text_arg(text)});
    print(g, io::to_json(r), r.detoxified + "\n" + r.rationale + "\n");
  });

  // tokenize
  std::string vocab_path;
  std::size_t max_len = kDefaultMaxLen;
  auto* tok = app.add_subcommand("tokenize", "WordPiece-encode a comment");
  tok->add_option("text", text, "Comment text, a file path, or - for stdin")->required();
  tok->add_option("--vocab", vocab_path, "Vocabulary file, one token per line")->required()->check(CLI::ExistingFile);
  tok->add_option("--max-len", max_len, "Sequence length");
  tok->callback([&] {
    const auto vocab = Vocab::load(vocab_path);
    const auto seq = tokenize(text_arg(text), vocab, max_len);
    std::vector<std::string> pieces;
    std::ostringstream s;
    for (std::size_t i = 0; i < seq.length; ++i) {
      pieces.push_back(vocab.token(seq.ids[i]));
      s << seq.ids[i] << "\t" << pieces.back() << "\n";
    }
    print(g, json{{"ids", seq.ids}, {"attention_mask", seq.attention_mask}, {"length", seq.length}, {"tokens", pieces}, {"words", detokenize(seq, vocab)}},
          s.str());
  });

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Compute metrics from scored records");
  evaluate->require_subcommand(1);
  std::string in_path, mode = "net_reduction", name = "model";
  double threshold = 0.5;
  auto* etst = evaluate->add_subcommand("tst", "DETOX / FL / PRESERVE / J-Score from scored pairs");
  etst->add_option("file", in_path, "JSONL with orig_p, detox_p, fluent, sim")->required()->check(CLI::ExistingFile);
  etst->add_option("--mode", mode, "net_reduction or style_accuracy")
      ->check(CLI::IsMember({"net_reduction", "style_accuracy"}));
  etst->add_option("--threshold", threshold, "Toxic threshold for style_accuracy");
  etst->add_option("--name", name, "Row label in the table");
  etst->callback([&] {
    std::vector<metrics::TstPair> pairs;
    io::read_jsonl_file(in_path, [&](const json& j, std::size_t n) { pairs.push_back(io::tst_pair(j, n)); });
    const auto r = metrics::tst_report(
        std::move(pairs), mode == "net_reduction" ? metrics::DetoxMode::net_reduction : metrics::DetoxMode::style_accuracy,
        threshold);
    auto j = io::to_json(r);
    j.erase("pairs");
    print(g, j, io::tst_table(name, r));
  });

  bool skip_empty = false;
  auto* ecls = evaluate->add_subcommand("cls", "Binary or multilabel metrics from pred/gold records");
  ecls->add_option("file", in_path, "JSONL with 'pred' and 'gold'")->required()->check(CLI::ExistingFile);
  ecls->add_option("--name", name, "Row label in the table");
  ecls->add_flag("--skip-empty", skip_empty, "Leave classes with no support out of macro means");
  ecls->callback([&] {
    std::vector<json> rows;
    io::read_jsonl_file(in_path, [&](const json& j, std::size_t n) {
      if (!j.contains("pred") || !j.contains("gold"))
        throw InvalidArgument("line " + std::to_string(n) + ": needs 'pred' and 'gold'");
      rows.push_back(j);
    });
    if (rows.empty()) throw EmptyDataset("no records in " + in_path);
    metrics::AggregateOptions opt{skip_empty};
    const auto& first = rows.front()["gold"];
    const bool binary = first.is_boolean() || first.is_number() ||
                        (first.is_string() && (first == "toxic" || first == "non_toxic" || first == "non-toxic"));
    if (binary) {
      std::vector<BinaryLabel> p, gl;
      for (const auto& r : rows) p.push_back(binary_value(r["pred"])), gl.push_back(binary_value(r["gold"]));
      const auto rep = metrics::binary_report(p, gl, opt);
      print(g, io::to_json(rep), io::binary_table(name, rep));
    } else {
      const auto rep = metrics::multilabel_report(label_column(rows, "pred"), label_column(rows, "gold"), opt);
      print(g, io::to_json(rep), io::multilabel_table(name, rep));
    }
  });

  // curate
  auto* curate = app.add_subcommand("curate", "Dataset curation steps over JSONL records");
  curate->require_subcommand(1);
  std::string out_path;
  std::size_t quota = curation::kDefaultQuotaPerBin;

  auto* cscore = curate->add_subcommand("score", "Add the filter probability 'p' to each record");
  cscore->add_option("in", in_path, "Input JSONL")->required()->check(CLI::ExistingFile);
  cscore->add_option("out", out_path, "Output JSONL")->required();
  cscore->callback([&] {
    const auto rt = runtime(false);
    std::vector<json> out;
    for (auto r : read_records(in_path)) {
      r.p = score(r.sample, rt.filter).value();
      out.push_back(io::to_json(r));
    }
    io::write_jsonl_file(out_path, out);
    std::cerr << "scored " << out.size() << " records\n";
  });

  auto* cbin = curate->add_subcommand("bin", "Stratified sample over probability bins");
  cbin->add_option("in", in_path, "Scored JSONL (needs 'p')")->required()->check(CLI::ExistingFile);
  cbin->add_option("out", out_path, "Output JSONL")->required();
  cbin->add_option("--quota", quota, "Samples per bin");
  cbin->callback([&] {
    std::vector<curation::ScoredSample> scored;
    for (auto& r : read_records(in_path)) {
      if (!r.p) throw InvalidArgument("record '" + r.sample.id + "' has no 'p'; run 'curate score' first");
      scored.push_back({r.sample, ToxicityScore(*r.p)});
    }
    const auto res = curation::stratified_sample(scored, quota, g.seed);
    std::vector<json> out;
    for (const auto& c : res.candidates) out.push_back(io::to_json(c));
    io::write_jsonl_file(out_path, out);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    std::cerr << "sampled " << out.size() << " candidates\n";
  });

  std::string removed_path;
  auto* cfilter = curate->add_subcommand("filter", "Drop records with a lexicon hit");
  cfilter->add_option("in", in_path, "Input JSONL")->required()->check(CLI::ExistingFile);
  cfilter->add_option("out", out_path, "Kept records")->required();
  cfilter->add_option("--removed", removed_path, "Write dropped records here");
  cfilter->callback([&] {
    const auto cfg = ServiceConfig::load(g.config);
    const auto lex = Lexicon::load(cfg.data_file(cfg.lexicon_path, "lexicon.txt"), cfg.data_file(cfg.anger_path, "anger.txt"));
    std::vector<TextSample> samples;
    for (auto& r : read_records(in_path)) samples.push_back(r.sample);
    const auto res = curation::lexicon_filter(samples, lex);
    auto dump = [](const std::vector<TextSample>& v) {
      std::vector<json> out;
      for (const auto& s : v) out.push_back(io::to_json(io::DatasetRecord{s, std::nullopt, std::nullopt}));
      return out;
    };
    io::write_jsonl_file(out_path, dump(res.kept));
    if (!removed_path.empty()) io::write_jsonl_file(removed_path, dump(res.removed));
    std::cerr << "kept " << res.kept.size() << ", removed " << res.removed.size() << "\n";
  });

  std::size_t concurrency = 4;
  auto* cpair = curate->add_subcommand("pair", "Build a parallel corpus with the teacher LLM");
  cpair->add_option("in", in_path, "Toxic records JSONL")->required()->check(CLI::ExistingFile);
  cpair->add_option("out", out_path, "Pairs JSONL")->required();
  cpair->add_option("--concurrency", concurrency, "Parallel teacher requests");
  cpair->callback([&] {
    const auto rt = runtime(true);
    std::vector<TextSample> samples;
    for (auto& r : read_records(in_path)) samples.push_back(r.sample);
    auto client = std::make_shared<HttpChatClient>(rt.config.llm_endpoint, rt.config.llm_model, rt.config.api_key);
    curation::CorpusOptions opt;
    opt.concurrency = concurrency;
    const auto res = curation::build_parallel_corpus(samples, *client, rt.pipeline->reframe_config(),
                                                     rt.config.reframer_gen, opt);
    std::vector<json> out;
    for (const auto& p : res.pairs) out.push_back(io::to_json(p));
    io::write_jsonl_file(out_path, out);
    for (const auto& f : res.failures) std::cerr << "failed: " << io::to_json(f).dump() << "\n";
    std::cerr << "paired " << res.pairs.size() << ", failed " << res.failures.size() << "\n";
  });

  std::string ratios = "80:10:10", out_dir;
  bool stratify = false;
  auto* csplit = curate->add_subcommand("split", "Seeded train/validation/test split");
  csplit->add_option("in", in_path, "Input JSONL")->required()->check(CLI::ExistingFile);
  csplit->add_option("out_dir", out_dir, "Directory for <part>.jsonl")->required();
  csplit->add_option("--ratios", ratios, "Percentages, e.g. 80:20 or 80:10:10");
  csplit->add_flag("--stratify", stratify, "Keep label proportions (uses 'label')");
  csplit->callback([&] {
    std::vector<io::DatasetRecord> recs = read_records(in_path);
    curation::SplitSpec spec;
    spec.ratios = parse_ratios(ratios);
    spec.seed = g.seed;
    spec.stratify = stratify;
    if (stratify)
      for (const auto& r : recs)
        if (!r.label) throw InvalidArgument("record '" + r.sample.id + "' has no 'label' to stratify on");
    const auto parts = curation::split(recs, spec, [](const io::DatasetRecord& r) { return r.label.value_or(""); });
    std::filesystem::create_directories(out_dir);
    for (const auto& p : parts) {
      std::vector<json> out;
      for (const auto& r : p.items) out.push_back(io::to_json(r));
      io::write_jsonl_file((std::filesystem::path(out_dir) / (p.name + ".jsonl")).string(), out);
      std::cerr << p.name << ": " << out.size() << "\n";
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    if (g.json) std::cout << io::error_json(e.kind(), e.what()).dump() << "\n";
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return e.kind() == "ConfigError" ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
