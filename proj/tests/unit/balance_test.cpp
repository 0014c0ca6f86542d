//
// Copyright 2026 The lmbias Authors
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
//


#include <gtest/gtest.h>

#include <random>
#include <set>
#include <string>
#include <vector>

#include "lmbias/balance.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace lmbias {
namespace {

using testing::GenderSpec;
using testing::PairCorpus;

const std::vector<std::string> kWomanVariants = {"woman", "female", "Woman", "FEMALE"};
const std::vector<std::string> kManVariants = {"man", "male", "Male"};

std::vector<std::string> TokenTexts(const CorpusDocument& d) {
  std::vector<std::string> out;
  for (const auto& t : d.tokens) out.push_back(t.text);
  return out;
}

// Replays the ledger on concat strings only and compares with the output.
void ExpectLedgerReplays(const Corpus& input, const Corpus& output, const std::vector<Edit>& edits) {
  auto texts = testing::Texts(input);
  ASSERT_TRUE(oracle::ReplayText(texts, testing::ToTextEdits(edits)));
  EXPECT_EQ(texts, testing::Texts(output));
  EXPECT_EQ(ReplayEdits(input, edits), output);
  EXPECT_EQ(ReplayEdits(input, ParseLedger(SerializeLedger(edits))), output);
}

TEST(ValidateSpecTest, NormalizesAndRejects) {
  BalanceSpec spec;
  spec.synonym_groups = {{"Woman", {"Female"}}};
  spec.group_pairs = {{"Woman", "man"}};
  auto v = ValidateSpec(spec);
  EXPECT_EQ(v.synonym_groups.begin()->first, "woman");
  EXPECT_EQ(v.group_pairs[0].first, "woman");

  auto overlap = spec;
  overlap.synonym_groups = {{"woman", {"female"}}, {"lady", {"female"}}};
  EXPECT_THROW(ValidateSpec(overlap), InputError);

  auto phrase = spec;
  phrase.anchor_words = {"black people"};
  EXPECT_THROW(ValidateSpec(phrase), InputError);

  auto partial = spec;
  partial.harmful_lexicon = {"criminal", "thug"};
  partial.substitution_map = {{"criminal", "person"}};
  EXPECT_THROW(ValidateSpec(partial), InputError);

  auto stray = spec;
  stray.substitution_map = {{"criminal", "person"}};
  EXPECT_THROW(ValidateSpec(stray), InputError);

  auto self_pair = spec;
  self_pair.group_pairs = {{"man", "man"}};
  EXPECT_THROW(ValidateSpec(self_pair), InputError);

  auto window = spec;
  window.window = "paragraph";
  EXPECT_THROW(ValidateSpec(window), InputError);
}

TEST(SpecJsonTest, ParsesAllFields) {
  auto spec = BalanceSpecFromJson(nlohmann::json::parse(R"({
    "synonym_groups": {"woman": ["female"]},
    "group_pairs": [["woman", "man"]],
    "harmful_lexicon": ["criminal"],
    "substitution_map": {"criminal": "person"},
    "anchor_words": ["black"],
    "report_words": ["white"],
    "seed": 9
  })"));
  EXPECT_EQ(spec.seed, 9u);
  EXPECT_EQ(spec.group_pairs.size(), 1u);
  EXPECT_EQ(spec.report_words, std::vector<std::string>{"white"});
  EXPECT_NO_THROW(ValidateSpec(spec));
  EXPECT_THROW(BalanceSpecFromJson(nlohmann::json::parse(R"({"group_pairs": [["a"]]})")), InputError);
  EXPECT_THROW(BalanceSpecFromJson(nlohmann::json::parse(R"({"seed": -1})")), InputError);
}

TEST(CanonicalizeTest, MapsVariantsToCanonical) {
  Corpus corpus{MakeDocument("d", "", "female woman male")};
  auto r = Canonicalize(corpus, ValidateSpec(GenderSpec(0)));
  EXPECT_EQ(TokenTexts(r.corpus[0]), (std::vector<std::string>{"woman", "woman", "man"}));
  EXPECT_EQ(r.corpus[0].concat, "woman woman man");
  ASSERT_EQ(r.edits.size(), 2u);
  EXPECT_EQ(r.edits[0].old_text, "female");
  EXPECT_EQ(r.edits[1].offset, 12u);
  ExpectLedgerReplays(corpus, r.corpus, r.edits);
}

TEST(CanonicalizeTest, CountsAreSummedVariantCounts) {
  auto corpus = PairCorpus(3, 281, 134, kWomanVariants, kManVariants);
  auto r = Canonicalize(corpus, ValidateSpec(GenderSpec(0)));
  EXPECT_EQ(CountWord(r.corpus, "woman"), 281u);
  EXPECT_EQ(CountWord(r.corpus, "man"), 134u);
  EXPECT_EQ(CountWord(r.corpus, "female"), 0u);
  ExpectLedgerReplays(corpus, r.corpus, r.edits);
}

TEST(CanonicalizeTest, NoVariantsNoEdits) {
  Corpus corpus{MakeDocument("d", "A", "woman and man.")};
  auto r = Canonicalize(corpus, ValidateSpec(GenderSpec(0)));
  EXPECT_TRUE(r.edits.empty());
  EXPECT_EQ(r.corpus, corpus);
}

TEST(EqualizeTest, TargetIsRoundedMean) {
  EXPECT_EQ(EqualizationTarget(281, 134), 208u);
  EXPECT_EQ(EqualizationTarget(4, 2), 3u);
  EXPECT_EQ(EqualizationTarget(5, 5), 5u);
  EXPECT_EQ(EqualizationTarget(1, 2), 2u);
}

TEST(BalanceTest, PaperCountsReachTarget) {
  auto corpus = PairCorpus(2024, 281, 134, kWomanVariants, kManVariants);
  auto r = Balance(corpus, GenderSpec(7));
  EXPECT_EQ(CountWord(r.corpus, "woman"), 208u);
  EXPECT_EQ(CountWord(r.corpus, "man"), 208u);
  auto rows = BalanceReport(r.plan);
  ASSERT_EQ(rows.counts.size(), 2u);
  EXPECT_EQ(rows.counts[0].word, "woman");
  EXPECT_EQ(rows.counts[0].before, 281u);
  EXPECT_EQ(rows.counts[0].after, 208u);
  EXPECT_EQ(rows.counts[1].word, "man");
  EXPECT_EQ(rows.counts[1].before, 134u);
  EXPECT_EQ(rows.counts[1].after, 208u);
  EXPECT_EQ(*rows.counts[1].target, 208u);
  ExpectLedgerReplays(corpus, r.corpus, r.plan.edits);
}

TEST(BalanceTest, SmallCountsReachTarget) {
  Corpus corpus{MakeDocument("a", "", "A woman spoke. The woman left. A man came."),
                MakeDocument("b", "", "Woman and woman. Man alone!")};
  auto r = Balance(corpus, GenderSpec(1));
  EXPECT_EQ(CountWord(r.corpus, "woman"), 3u);
  EXPECT_EQ(CountWord(r.corpus, "man"), 3u);
  ExpectLedgerReplays(corpus, r.corpus, r.plan.edits);
}

TEST(BalanceTest, BalancedPairHasNoEdits) {
  Corpus corpus{MakeDocument("a", "", "woman man. woman man. woman man. woman. man. woman man.")};
  auto r = Balance(corpus, GenderSpec(1));
  EXPECT_TRUE(r.plan.edits.empty());
  EXPECT_EQ(r.corpus, corpus);
  EXPECT_EQ(r.plan.counts[0].before, 5u);
}

TEST(BalanceTest, DeterministicUnderSeed) {
  auto corpus = PairCorpus(99, 281, 134, kWomanVariants, kManVariants);
  auto a = Balance(corpus, GenderSpec(42));
  auto b = Balance(corpus, GenderSpec(42));
  EXPECT_EQ(a.corpus, b.corpus);
  EXPECT_EQ(SerializeLedger(a.plan.edits), SerializeLedger(b.plan.edits));
  EXPECT_EQ(SerializeCorpus(a.corpus), SerializeCorpus(b.corpus));
  auto c = Balance(corpus, GenderSpec(43));
  EXPECT_NE(SerializeLedger(a.plan.edits), SerializeLedger(c.plan.edits));
}

TEST(BalanceTest, AbsentPairWordIsAnError) {
  Corpus corpus{MakeDocument("a", "", "woman only.")};
  EXPECT_THROW(Balance(corpus, GenderSpec(1)), InputError);
}

TEST(BalanceTest, RandomCountsAlwaysHitTargetAndReplay) {
  std::mt19937_64 rng(5150);
  for (int trial = 0; trial < 60; ++trial) {
    const auto a = testing::Pick(rng, 1, 80);
    const auto b = testing::Pick(rng, 1, 80);
    auto corpus = PairCorpus(rng(), a, b, kWomanVariants, kManVariants);
    auto r = Balance(corpus, GenderSpec(rng()));
    const auto target = EqualizationTarget(a, b);
    EXPECT_EQ(CountWord(r.corpus, "woman"), target) << a << "/" << b;
    EXPECT_EQ(CountWord(r.corpus, "man"), target) << a << "/" << b;
    ExpectLedgerReplays(corpus, r.corpus, r.plan.edits);
  }
}

TEST(BalanceTest, SentencesDenseWithBothWordsStillBalance) {
  // Every sentence holds both words, so no clean site exists for either.
  Corpus corpus{MakeDocument("a", "", "woman woman woman man. woman woman man woman. man woman woman woman.")};
  auto r = Balance(corpus, GenderSpec(3));
  EXPECT_EQ(CountWord(r.corpus, "woman"), 6u);
  EXPECT_EQ(CountWord(r.corpus, "man"), 6u);
  ExpectLedgerReplays(corpus, r.corpus, r.plan.edits);
}

TEST(BalanceTest, SeveralPairsDoNotDisturbEachOther) {
  BalanceSpec spec;
  spec.group_pairs = {{"woman", "man"}, {"white", "black"}};
  spec.seed = 11;
  auto corpus = PairCorpus(8, 40, 12, {"woman"}, {"man"});
  auto race = PairCorpus(9, 9, 30, {"white"}, {"black"});
  for (auto& d : race) d.doc_id = "r" + d.doc_id;
  corpus.insert(corpus.end(), race.begin(), race.end());
  auto r = Balance(corpus, spec);
  EXPECT_EQ(CountWord(r.corpus, "woman"), 26u);
  EXPECT_EQ(CountWord(r.corpus, "man"), 26u);
  EXPECT_EQ(CountWord(r.corpus, "white"), 20u);
  EXPECT_EQ(CountWord(r.corpus, "black"), 20u);
  ExpectLedgerReplays(corpus, r.corpus, r.plan.edits);
}

BalanceSpec SubstitutionSpec() {
  BalanceSpec spec;
  spec.harmful_lexicon = {"criminal", "thug"};
  spec.substitution_map = {{"criminal", "person"}, {"thug", "citizen"}};
  spec.anchor_words = {"black"};
  return spec;
}

TEST(SubstituteTest, OnlyAnchoredSentences) {
  Corpus corpus{MakeDocument("a", "", "black X criminal"), MakeDocument("b", "", "white criminal"),
                MakeDocument("c", "", "The thug ran. A black thug? criminal black.")};
  auto r = SubstituteHarmful(corpus, ValidateSpec(SubstitutionSpec()));
  EXPECT_EQ(r.corpus[0].concat, "black X person");
  EXPECT_EQ(r.corpus[1].concat, "white criminal");
  EXPECT_EQ(r.corpus[2].concat, "The thug ran. A black citizen? person black.");
  EXPECT_EQ(r.edits.size(), 3u);
  ExpectLedgerReplays(corpus, r.corpus, r.edits);
}

TEST(SubstituteTest, NeedsAnchors) {
  auto spec = ValidateSpec(SubstitutionSpec());
  spec.anchor_words.clear();
  EXPECT_THROW(SubstituteHarmful({}, spec), InputError);
}

TEST(SubstituteTest, EditCoverageMatchesRecount) {
  std::mt19937_64 rng(404);
  static const char* kWords[] = {"black", "white", "criminal", "thug", "people", "news", "said"};
  Corpus corpus;
  for (int d = 0; d < 40; ++d) {
    std::string text;
    for (std::size_t s = 0, n = testing::Pick(rng, 1, 4); s < n; ++s) {
      for (std::size_t w = 0, m = testing::Pick(rng, 1, 6); w < m; ++w) {
        text += std::string(w ? " " : (s ? " " : "")) + kWords[testing::Pick(rng, 0, 6)];
      }
      text += ".";
    }
    corpus.push_back(MakeDocument("d" + std::to_string(d), "", text));
  }
  // Recount: sentences with an anchor and a harmful word, and harmful tokens
  // outside anchored sentences.
  std::set<std::pair<std::string, std::size_t>> expected_sentences;
  std::size_t expected_edits = 0, untouched_harmful = 0;
  for (const auto& doc : corpus) {
    const auto sentences = SplitSentences(doc);
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      bool anchored = false;
      std::size_t harmful = 0;
      for (const auto& t : doc.tokens) {
        if (t.offset < sentences[s].begin || t.offset >= sentences[s].content_end) continue;
        anchored |= t.text == "black";
        harmful += (t.text == "criminal" || t.text == "thug");
      }
      if (anchored && harmful) {
        expected_sentences.insert({doc.doc_id, s});
        expected_edits += harmful;
      } else {
        untouched_harmful += harmful;
      }
    }
  }
  ASSERT_GT(expected_sentences.size(), 0u);
  auto r = SubstituteHarmful(corpus, ValidateSpec(SubstitutionSpec()));
  EXPECT_EQ(r.edits.size(), expected_edits);
  std::set<std::pair<std::string, std::size_t>> edited;
  for (const auto& e : r.edits) {
    const auto& doc = *std::find_if(corpus.begin(), corpus.end(),
                                    [&](const CorpusDocument& d) { return d.doc_id == e.doc_id; });
    const auto sentences = SplitSentences(doc);
    // Sentence ordinal = terminators before the edit; replacements hold none.
    const auto& out = *std::find_if(r.corpus.begin(), r.corpus.end(),
                                    [&](const CorpusDocument& d) { return d.doc_id == e.doc_id; });
    const auto ordinal = static_cast<std::size_t>(std::count(out.concat.begin(),
                                                             out.concat.begin() + static_cast<std::ptrdiff_t>(e.offset), '.'));
    ASSERT_LT(ordinal, sentences.size());
    edited.insert({e.doc_id, ordinal});
  }
  EXPECT_EQ(edited, expected_sentences);
  EXPECT_EQ(CountWord(r.corpus, "criminal") + CountWord(r.corpus, "thug"), untouched_harmful);
}

TEST(BalanceReportTest, SubstitutionOnlyKeepsCounts) {
  // 86 "white" and 97 "black" occurrences; harmful words next to "black".
  Corpus corpus;
  for (int i = 0; i < 86; ++i) corpus.push_back(MakeDocument("w" + std::to_string(i), "", "a white criminal."));
  for (int i = 0; i < 97; ++i) {
    corpus.push_back(MakeDocument("b" + std::to_string(i), "", i % 2 ? "a black thug." : "the black neighbor."));
  }
  auto spec = SubstitutionSpec();
  spec.report_words = {"white", "black"};
  auto r = Balance(corpus, spec);
  auto rows = BalanceReport(r.plan);
  ASSERT_EQ(rows.counts.size(), 2u);
  EXPECT_EQ(rows.counts[0].word, "white");
  EXPECT_EQ(rows.counts[0].before, 86u);
  EXPECT_EQ(rows.counts[0].after, 86u);
  EXPECT_FALSE(rows.counts[0].target.has_value());
  EXPECT_EQ(rows.counts[1].word, "black");
  EXPECT_EQ(rows.counts[1].before, 97u);
  EXPECT_EQ(rows.counts[1].after, 97u);
  ASSERT_EQ(rows.edits_by_reason.size(), 1u);
  EXPECT_EQ(rows.edits_by_reason[0].first, "substitute");
  EXPECT_EQ(rows.edits_by_reason[0].second, 48u);
  EXPECT_EQ(CountWord(r.corpus, "criminal"), 86u);
}

TEST(BalanceReportTest, EmptyPlanEmptyTable) {
  auto rows = BalanceReport({});
  EXPECT_TRUE(rows.counts.empty());
  EXPECT_TRUE(rows.edits_by_reason.empty());
  auto r = Balance({MakeDocument("a", "", "text")}, {});
  EXPECT_TRUE(r.plan.edits.empty());
  EXPECT_TRUE(BalanceReport(r.plan).counts.empty());
}

TEST(LedgerTest, RoundTripAndMismatchDetection) {
  auto corpus = PairCorpus(12, 30, 9, kWomanVariants, kManVariants);
  auto r = Balance(corpus, GenderSpec(2));
  const auto ledger = SerializeLedger(r.plan.edits);
  auto parsed = ParseLedger(ledger);
  ASSERT_EQ(parsed.size(), r.plan.edits.size());
  EXPECT_EQ(SerializeLedger(parsed), ledger);

  auto broken = r.plan.edits;
  broken[0].old_text = "zzz";
  EXPECT_THROW(ReplayEdits(corpus, broken), InputError);
  EXPECT_THROW(ParseLedger("{\"doc_id\":\"a\",\"offset\":-1,\"old\":\"\",\"new\":\"\",\"reason\":\"substitute\"}\n"),
               ParseError);
}

TEST(LedgerTest, PretokenizedInputReplays) {
  auto load = LoadCorpusJsonl(
      "{\"doc_id\":\"k1\",\"title\":\"\",\"comment\":\"여자가 왔다. 남자가 갔다.\",\"tokens\":[\"여자\",\"가\",\"왔다\",\"남자\",\"가\",\"갔다\"]}\n"
      "{\"doc_id\":\"k2\",\"title\":\"\",\"comment\":\"여자는 웃었다. 여자와 여자.\",\"tokens\":[\"여자\",\"는\",\"웃었다\",\"여자\",\"와\",\"여자\"]}\n");
  ASSERT_TRUE(load.errors.empty());
  BalanceSpec spec;
  spec.group_pairs = {{"여자", "남자"}};
  spec.seed = 4;
  auto r = Balance(load.documents, spec);
  EXPECT_EQ(CountWord(r.corpus, "여자"), 3u);
  EXPECT_EQ(CountWord(r.corpus, "남자"), 3u);
  ExpectLedgerReplays(load.documents, r.corpus, r.plan.edits);
  // The serialized form keeps the external segmentation.
  auto reloaded = LoadCorpusJsonl(SerializeCorpus(r.corpus));
  ASSERT_TRUE(reloaded.errors.empty());
  EXPECT_EQ(reloaded.documents, r.corpus);
}

}  // namespace
}  // namespace lmbias
