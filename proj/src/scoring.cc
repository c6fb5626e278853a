// Copyright 2026 The biaseval Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "biaseval/scoring.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <map>
#include <set>
#include <thread>

#include "biaseval/io.h"

namespace biaseval {

using nlohmann::json;

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
// (lowest index) is rethrown after all workers finish.
template <typename Fn>
void ParallelFor(std::size_t n, int threads, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

bool IsSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

struct Word {
  CharSpan span;
  std::string_view key;
};

std::vector<Word> SplitWords(std::string_view sentence) {
  std::vector<Word> words;
  std::size_t i = 0;
  while (i < sentence.size()) {
    while (i < sentence.size() && IsSpace(sentence[i])) ++i;
    const std::size_t start = i;
    while (i < sentence.size() && !IsSpace(sentence[i])) ++i;
    if (i > start) {
      words.push_back(
          {{start, i}, MatchKey(sentence.substr(start, i - start))});
    }
  }
  return words;
}

// Lexicographically smallest LCS of `a` and `b`, as matched index pairs.
std::vector<std::pair<std::size_t, std::size_t>> SmallestLcs(
    const std::vector<Word>& a, const std::vector<Word>& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  // suffix[i][j] = LCS length of a[i:] and b[j:].
  std::vector<std::vector<int>> suffix(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      suffix[i][j] = a[i].key == b[j].key
                         ? suffix[i + 1][j + 1] + 1
                         : std::max(suffix[i + 1][j], suffix[i][j + 1]);
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::size_t i = 0;
  std::size_t j = 0;
  while (suffix[i][j] > 0) {
    std::set<std::string_view> tried;
    std::optional<std::pair<std::size_t, std::size_t>> best;
    for (std::size_t ii = i; ii < n; ++ii) {
      if (!tried.insert(a[ii].key).second) continue;
      std::size_t jj = j;
      while (jj < m && b[jj].key != a[ii].key) ++jj;
      if (jj == m || suffix[ii + 1][jj + 1] + 1 != suffix[i][j]) continue;
      if (!best || a[ii].key < a[best->first].key) best = {ii, jj};
    }
    matches.push_back(*best);
    i = best->first + 1;
    j = best->second + 1;
  }
  return matches;
}

TokenAlignment BuildAlignment(std::string_view sentence,
                              const std::vector<Word>& words,
                              const std::vector<bool>& matched) {
  TokenAlignment out;
  out.sentence = std::string(sentence);
  for (std::size_t k = 0; k < words.size(); ++k) {
    (matched[k] ? out.unmodified : out.modified).push_back(words[k].span);
  }
  return out;
}

std::vector<std::string> SpanTexts(const std::string& sentence,
                                   const std::vector<CharSpan>& spans) {
  std::vector<std::string> out;
  out.reserve(spans.size());
  for (const CharSpan& s : spans) out.push_back(sentence.substr(s.begin, s.size()));
  return out;
}

}  // namespace

MultipleChoiceItem AsMultipleChoice(const BbqExample& example) {
  return {example.id, example.context, example.question,
          std::vector<std::string>(example.options.begin(),
                                   example.options.end())};
}

MultipleChoiceItem AsMultipleChoice(const BelebeleExample& example) {
  return {example.id, example.passage, example.question,
          std::vector<std::string>(example.options.begin(),
                                   example.options.end())};
}

std::string BuildPrompt(const MultipleChoiceItem& item, const JoinConfig& join) {
  return item.context + join.context_question + item.question;
}

std::pair<int, bool> SelectOption(std::span<const double> logliks,
                                  double tie_tolerance) {
  if (logliks.empty()) throw ValidationError("no options to select from");
  const double best = *std::max_element(logliks.begin(), logliks.end());
  int chosen = -1;
  int within = 0;
  for (std::size_t i = 0; i < logliks.size(); ++i) {
    if (logliks[i] >= best - tie_tolerance) {
      if (chosen < 0) chosen = static_cast<int>(i);
      ++within;
    }
  }
  return {chosen, within >= 2};
}

PredictionRecord ScoreMultipleChoice(const LogprobBackend& backend,
                                     const MultipleChoiceItem& item,
                                     const JoinConfig& join,
                                     double tie_tolerance) {
  if (item.options.empty()) {
    throw ValidationError("example " + item.id + " has no options");
  }
  const std::string prompt = BuildPrompt(item, join);
  PredictionRecord record;
  record.example_id = item.id;
  std::vector<double> logliks;
  try {
    for (std::size_t k = 0; k < item.options.size(); ++k) {
      const ContinuationScore s =
          backend.ScoreContinuation(prompt, join.before_option + item.options[k]);
      ChoiceScore choice;
      choice.example_id = item.id;
      choice.option_index = static_cast<int>(k);
      choice.per_token = s.token_logprobs;
      for (double lp : choice.per_token) choice.loglik += lp;
      logliks.push_back(choice.loglik);
      record.scores.push_back(std::move(choice));
    }
  } catch (const Error& e) {
    throw ScoringError(item.id, e);
  }
  std::tie(record.chosen_index, record.tie) = SelectOption(logliks, tie_tolerance);
  return record;
}

std::vector<PredictionRecord> ScoreMultipleChoiceAll(
    const LogprobBackend& backend, std::span<const MultipleChoiceItem> items,
    const JoinConfig& join, double tie_tolerance, int threads) {
  std::vector<PredictionRecord> out(items.size());
  ParallelFor(items.size(), threads, [&](std::size_t i) {
    out[i] = ScoreMultipleChoice(backend, items[i], join, tie_tolerance);
  });
  return out;
}

std::vector<std::string> TokenAlignment::UnmodifiedWords() const {
  return SpanTexts(sentence, unmodified);
}

std::vector<std::string> TokenAlignment::ModifiedWords() const {
  return SpanTexts(sentence, modified);
}

std::string_view MatchKey(std::string_view word) {
  auto punct = [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 && std::ispunct(u);
  };
  std::size_t b = 0;
  std::size_t e = word.size();
  while (b < e && punct(word[b])) ++b;
  while (e > b && punct(word[e - 1])) --e;
  if (b == e) return word;
  return word.substr(b, e - b);
}

std::pair<TokenAlignment, TokenAlignment> AlignPair(std::string_view sent_more,
                                                    std::string_view sent_less) {
  if (sent_more == sent_less) {
    throw AlignmentError("cannot align identical sentences");
  }
  const std::vector<Word> a = SplitWords(sent_more);
  const std::vector<Word> b = SplitWords(sent_less);
  if (a.empty() || b.empty()) {
    throw AlignmentError("cannot align an empty sentence");
  }
  std::vector<bool> matched_a(a.size(), false);
  std::vector<bool> matched_b(b.size(), false);
  for (auto [i, j] : SmallestLcs(a, b)) {
    matched_a[i] = true;
    matched_b[j] = true;
  }
  return {BuildAlignment(sent_more, a, matched_a),
          BuildAlignment(sent_less, b, matched_b)};
}

std::string_view PllModeName(PllMode mode) {
  return mode == PllMode::kCausal ? "causal" : "masked";
}

PllMode ParsePllMode(std::string_view name) {
  if (name == "causal") return PllMode::kCausal;
  if (name == "masked") return PllMode::kMasked;
  throw UsageError("unknown pll mode '" + std::string(name) +
                   "' (expected causal or masked)");
}

double ScorePll(const LogprobBackend& backend, std::string_view sentence,
                const TokenAlignment& alignment, PllMode mode) {
  if (alignment.sentence != sentence) {
    throw AlignmentError("alignment does not belong to this sentence");
  }
  if (alignment.unmodified.empty()) return 0.0;

  if (mode == PllMode::kMasked) {
    double total = 0.0;
    for (double lp : backend.MaskedLogprobs(sentence, alignment.unmodified)) {
      total += lp;
    }
    return total;
  }

  const ContinuationScore s = backend.ScoreContinuation("", sentence);
  CheckTokenAlignment("", sentence, s.tokens);
  double total = 0.0;
  std::size_t offset = 0;
  std::size_t word = 0;
  for (std::size_t t = 0; t < s.tokens.size(); ++t) {
    const std::string& token = s.tokens[t];
    const std::size_t begin = offset;
    offset += token.size();
    std::size_t first = begin;
    while (first < offset && IsSpace(sentence[first])) ++first;
    if (first == offset) continue;  // whitespace-only token
    while (word < alignment.unmodified.size() &&
           alignment.unmodified[word].end <= first) {
      ++word;
    }
    if (word < alignment.unmodified.size() &&
        alignment.unmodified[word].begin <= first) {
      total += s.token_logprobs[t];
    }
  }
  return total;
}

PairScore MakePairScore(std::string example_id, double score_more,
                        double score_less) {
  PairScore out;
  out.example_id = std::move(example_id);
  out.score_more = score_more;
  out.score_less = score_less;
  out.diff = score_more - score_less;
  out.prefers_stereotype = score_more > score_less;
  return out;
}

PairScore ScorePair(const LogprobBackend& backend,
                    const CrowsPairsExample& example, PllMode mode) {
  try {
    auto [more, less] = AlignPair(example.sent_more, example.sent_less);
    const double score_more = ScorePll(backend, example.sent_more, more, mode);
    const double score_less = ScorePll(backend, example.sent_less, less, mode);
    return MakePairScore(example.id, score_more, score_less);
  } catch (const ScoringError&) {
    throw;
  } catch (const Error& e) {
    throw ScoringError(example.id, e);
  }
}

std::vector<PairScore> ScorePairsAll(const LogprobBackend& backend,
                                     std::span<const CrowsPairsExample> examples,
                                     PllMode mode, int threads) {
  std::vector<PairScore> out(examples.size());
  ParallelFor(examples.size(), threads, [&](std::size_t i) {
    out[i] = ScorePair(backend, examples[i], mode);
  });
  return out;
}

// ---- Predictions file -------------------------------------------------------

json ToJson(const PredictionRecord& r) {
  json logliks = json::array();
  json per_token = json::array();
  for (const ChoiceScore& s : r.scores) {
    logliks.push_back(s.loglik);
    per_token.push_back(s.per_token);
  }
  return json{{"kind", "multiple_choice"},
              {"example_id", r.example_id},
              {"chosen_index", r.chosen_index},
              {"tie", r.tie},
              {"logliks", logliks},
              {"per_token", per_token}};
}

PredictionRecord PredictionRecordFromJson(const json& j) {
  PredictionRecord r;
  r.example_id = j.at("example_id").get<std::string>();
  r.chosen_index = j.at("chosen_index").get<int>();
  r.tie = j.at("tie").get<bool>();
  const auto logliks = j.at("logliks").get<std::vector<double>>();
  const auto per_token = j.at("per_token").get<std::vector<std::vector<double>>>();
  if (logliks.size() != per_token.size()) {
    throw ValidationError("prediction " + r.example_id +
                          ": logliks and per_token disagree in length");
  }
  for (std::size_t k = 0; k < logliks.size(); ++k) {
    r.scores.push_back({r.example_id, static_cast<int>(k), logliks[k],
                        per_token[k]});
  }
  return r;
}

json ToJson(const PairScore& s) {
  return json{{"kind", "pair"},
              {"example_id", s.example_id},
              {"score_more", s.score_more},
              {"score_less", s.score_less},
              {"diff", s.diff},
              {"prefers_stereotype", s.prefers_stereotype}};
}

PairScore PairScoreFromJson(const json& j) {
  return MakePairScore(j.at("example_id").get<std::string>(),
                       j.at("score_more").get<double>(),
                       j.at("score_less").get<double>());
}

namespace {

template <typename Record>
void WriteRecords(const std::filesystem::path& path, std::string_view run_id,
                  std::span<const Record> records) {
  std::string out;
  for (const Record& r : records) {
    json j = ToJson(r);
    j["run_id"] = run_id;
    out += CanonicalDump(j);
    out += '\n';
  }
  WriteFileAtomic(path, out);
}

template <typename Record, typename Parse>
std::vector<Record> ReadRecords(const std::filesystem::path& path,
                                std::string_view kind, Parse parse) {
  std::vector<Record> out;
  std::size_t line = 0;
  for (const json& j : ParseJsonLines(ReadFile(path))) {
    ++line;
    try {
      if (j.at("kind").get<std::string>() != kind) {
        throw ParseError(line, "kind", "expected " + std::string(kind));
      }
      out.push_back(parse(j));
    } catch (const json::exception& e) {
      throw ParseError(line, "<record>", e.what());
    }
  }
  return out;
}

}  // namespace

void WritePredictions(const std::filesystem::path& path, std::string_view run_id,
                      std::span<const PredictionRecord> records) {
  WriteRecords(path, run_id, records);
}

void WritePredictions(const std::filesystem::path& path, std::string_view run_id,
                      std::span<const PairScore> records) {
  WriteRecords(path, run_id, records);
}

std::vector<PredictionRecord> ReadMultipleChoicePredictions(
    const std::filesystem::path& path) {
  return ReadRecords<PredictionRecord>(path, "multiple_choice",
                                       PredictionRecordFromJson);
}

std::vector<PairScore> ReadPairPredictions(const std::filesystem::path& path) {
  return ReadRecords<PairScore>(path, "pair", PairScoreFromJson);
}

}  // namespace biaseval
