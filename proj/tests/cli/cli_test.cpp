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

#include <cmath>
#include <string>
#include <vector>

#include "lmbias/balance.hpp"
#include "lmbias/corpus.hpp"
#include "lmbias/probe_io.hpp"
#include "lmbias/records_io.hpp"
#include "support/generators.hpp"
#include "support/process.hpp"

namespace lmbias {
namespace {

using testing::RecordsFor;
using testing::Scratch;

const std::string kCli = LMBIAS_CLI_PATH;

std::string ToyCorpus() {
  return "{\"doc_id\":\"1\",\"title\":\"\",\"comment\":\"a b a\"}\n"
         "{\"doc_id\":\"2\",\"title\":\"\",\"comment\":\"b c\"}\n";
}

TEST(CliExpandTest, PresetCounts) {
  Scratch s("expand");
  auto r = s.Run(kCli, {"expand", "--preset", "gender", "-o", s.Path("g.jsonl")});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.err.find("55 conditional + 1 prior"), std::string::npos);
  EXPECT_EQ(ParseProbes(s.Read("g.jsonl")).size(), 56u);

  r = s.Run(kCli, {"expand", "--preset", "ethnicity-3t", "-o", "-"});
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(ParseProbes(r.out).size(), 168u);
}

TEST(CliExpandTest, ErrorsExitTwo) {
  Scratch s("expand-err");
  auto r = s.Run(kCli, {"expand", "--preset", "religion"});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("unknown preset"), std::string::npos);
  EXPECT_EQ(s.Run(kCli, {"expand"}).exit_code, 2);
  EXPECT_EQ(s.Run(kCli, {"expand", "--bogus"}).exit_code, 2);
  EXPECT_EQ(s.Run(kCli, {}).exit_code, 2);
  s.Write("bad.json", "{\"templates\":[{\"template_id\":\"t\",\"text\":\"GROUP_SLOT only\"}],"
                      "\"groups\":{\"words\":[\"a\"]},\"contexts\":{\"words\":[\"x\"]}}");
  EXPECT_EQ(s.Run(kCli, {"expand", "--templates", s.Path("bad.json")}).exit_code, 2);
}

TEST(CliExpandTest, CustomDefinition) {
  Scratch s("expand-custom");
  s.Write("set.json",
          "{\"name\":\"toy\",\"templates\":[{\"template_id\":\"t\",\"category\":\"race\","
          "\"text\":\"GROUP_SLOT is a CONTEXT_SLOT.\"}],"
          "\"groups\":{\"words\":[\"A\",\"B\"]},\"contexts\":{\"words\":[\"x\",\"y\"]}}");
  auto r = s.Run(kCli, {"expand", "--templates", s.Path("set.json"), "-o", "-"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(ParseProbes(r.out).size(), 3u);
}

class CliScoreTest : public ::testing::Test {
 protected:
  CliScoreTest() : s_("score") {}

  void WriteToyProbes() {
    probes_ = ExpandProbes({{"t1", Category::kRace, "GROUP_SLOT is a CONTEXT_SLOT."}},
                           {"g", WordRole::kGroup, {"A", "B"}, {}},
                           {"c", WordRole::kContext, {"x"}, {}});
    s_.Write("probes.jsonl", SerializeProbes(probes_));
  }

  Scratch s_;
  std::vector<ProbeInstance> probes_;
};

TEST_F(CliScoreTest, IdenticalRecordsAllZero) {
  ASSERT_EQ(s_.Run(kCli, {"expand", "--preset", "gender", "-o", s_.Path("probes.jsonl")}).exit_code, 0);
  probes_ = ParseProbes(s_.Read("probes.jsonl"));
  s_.Write("probs.jsonl", SerializeRecords(RecordsFor(probes_, [](const ProbeInstance&, const std::string&) {
             return std::vector<double>{-1.25};
           })));
  auto r = s_.Run(kCli, {"score", "--probes", s_.Path("probes.jsonl"), "--input", s_.Path("probs.jsonl"),
                         "--format", "json", "-o", "-"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j.size(), 1u);
  for (const char* key : {"lpbs_mean", "mean_abs_gap", "r_term", "cbs"}) EXPECT_EQ(j[0][key], 0.0) << key;
  EXPECT_EQ(j[0]["context_gaps"].size(), 55u);
}

TEST_F(CliScoreTest, WorkedTableCsvAndBreakdownFile) {
  WriteToyProbes();
  s_.Write("probs.jsonl", SerializeRecords(RecordsFor(probes_, [](const ProbeInstance& p, const std::string& c) {
             if (p.condition == Condition::kPrior) return std::vector<double>{std::log(0.5)};
             return std::vector<double>{std::log(c == "A" ? 0.8 : 0.2)};
           })));
  auto r = s_.Run(kCli, {"score", "--probes", s_.Path("probes.jsonl"), "--input", s_.Path("probs.jsonl"),
                         "-o", s_.Path("report.csv")});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto report = s_.Read("report.csv");
  EXPECT_NE(report.find("race,toy-model,A;B,1,1,2,4,1.3863,1.3863,1.3863,0.1500,0"), std::string::npos) << report;
  EXPECT_NE(s_.Read("report_breakdown.csv").find("race,context_gap,t1,x,1.3863"), std::string::npos);
}

TEST_F(CliScoreTest, MissingRecordsExitThreeWithIds) {
  WriteToyProbes();
  auto records = RecordsFor(probes_, [](const ProbeInstance&, const std::string&) {
    return std::vector<double>{-1.0};
  });
  records.erase(records.begin());  // t1#c000, candidate A
  s_.Write("probs.jsonl", SerializeRecords(records));
  auto r = s_.Run(kCli, {"score", "--probes", s_.Path("probes.jsonl"), "--input", s_.Path("probs.jsonl")});
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("t1#c000"), std::string::npos) << r.err;
}

TEST_F(CliScoreTest, CompareEmitsDelta) {
  WriteToyProbes();
  s_.Write("before.jsonl", SerializeRecords(RecordsFor(probes_, [](const ProbeInstance& p, const std::string& c) {
             if (p.condition == Condition::kPrior) return std::vector<double>{std::log(0.5)};
             return std::vector<double>{std::log(c == "A" ? 0.8 : 0.2)};
           })));
  s_.Write("after.jsonl", SerializeRecords(RecordsFor(probes_, [](const ProbeInstance&, const std::string&) {
             return std::vector<double>{std::log(0.5)};
           })));
  auto r = s_.Run(kCli, {"score", "--probes", s_.Path("probes.jsonl"), "--input", s_.Path("before.jsonl"),
                         "--compare", s_.Path("after.jsonl"), "-o", "-"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("race,cbs,0.1500,0.0000,-0.1500"), std::string::npos) << r.out;
}

TEST_F(CliScoreTest, BadInputsExitTwo) {
  WriteToyProbes();
  s_.Write("probs.jsonl", "not json\n");
  EXPECT_EQ(s_.Run(kCli, {"score", "--probes", s_.Path("probes.jsonl"), "--input", s_.Path("probs.jsonl")}).exit_code, 2);
  EXPECT_EQ(s_.Run(kCli, {"score", "--probes", s_.Path("nope.jsonl"), "--input", s_.Path("probs.jsonl")}).exit_code, 2);
  EXPECT_EQ(s_.Run(kCli, {"score", "--probes", s_.Path("probes.jsonl"), "--input", s_.Path("probs.jsonl"),
                          "-o", s_.Path("probes.jsonl")}).exit_code, 2);
  EXPECT_EQ(s_.Run(kCli, {"score", "--probes", s_.Path("probes.jsonl"), "--input", s_.Path("probs.jsonl"),
                          "--format", "xml"}).exit_code, 2);
}

TEST(CliTfidfTest, ToyCorpusTopTwo) {
  Scratch s("tfidf");
  s.Write("c.jsonl", ToyCorpus());
  auto r = s.Run(kCli, {"tfidf", "--input", s.Path("c.jsonl"), "--top-k", "2", "-o", "-"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out, "rank,word,tfidf,frequency,document_frequency\n1,a,0.2773,2,1\n2,c,0.1386,1,1\n");
  r = s.Run(kCli, {"tfidf", "--input", s.Path("c.jsonl"), "--top-k", "50"});
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("3,b,0.0000,2,2"), std::string::npos);
  EXPECT_EQ(s.Run(kCli, {"tfidf", "--input", s.Path("c.jsonl"), "--top-k", "0"}).exit_code, 2);
  EXPECT_EQ(s.Run(kCli, {"tfidf", "--input", s.Path("missing.jsonl")}).exit_code, 2);
}

TEST(CliTfidfTest, CsvInput) {
  Scratch s("tfidf-csv");
  s.Write("c.csv", "doc_id,title,comment\n1,,a b a\n2,,b c\n");
  auto r = s.Run(kCli, {"tfidf", "--input", s.Path("c.csv"), "--top-k", "1", "--format", "json"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)[0]["word"], "a");
}

TEST(CliBalanceTest, WomanManToyCorpus) {
  Scratch s("balance");
  s.Write("c.jsonl",
          "{\"doc_id\":\"a\",\"title\":\"\",\"comment\":\"A woman spoke. The female left. A man came.\"}\n"
          "{\"doc_id\":\"b\",\"title\":\"Woman\",\"comment\":\"and a male friend.\"}\n"
          "{\"doc_id\":\"c\",\"title\":\"\",\"comment\":\"Nothing here.\"}\n"
          "{\"doc_id\":\"d\",\"title\":\"\",\"comment\":\"Just a woman.\"}\n");
  s.Write("spec.json",
          "{\"synonym_groups\":{\"woman\":[\"female\"],\"man\":[\"male\"]},\"group_pairs\":[[\"woman\",\"man\"]],"
          "\"seed\":5}");
  auto r = s.Run(kCli, {"balance", "--input", s.Path("c.jsonl"), "--spec", s.Path("spec.json"), "--output",
                        s.Path("out.jsonl")});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto report = s.Read("out_report.csv");
  EXPECT_NE(report.find("woman,4,3,3"), std::string::npos) << report;
  EXPECT_NE(report.find("man,2,3,3"), std::string::npos) << report;

  auto input = LoadCorpusJsonl(s.Read("c.jsonl")).documents;
  auto output = LoadCorpusJsonl(s.Read("out.jsonl"));
  ASSERT_TRUE(output.errors.empty());
  EXPECT_EQ(CountWord(output.documents, "woman"), 3u);
  EXPECT_EQ(ReplayEdits(input, ParseLedger(s.Read("out_ledger.jsonl"))), output.documents);

  // Same inputs and seed give byte-identical files.
  ASSERT_EQ(s.Run(kCli, {"balance", "--input", s.Path("c.jsonl"), "--spec", s.Path("spec.json"), "--output",
                         s.Path("again.jsonl")}).exit_code, 0);
  EXPECT_EQ(s.Read("again.jsonl"), s.Read("out.jsonl"));
  EXPECT_EQ(s.Read("again_ledger.jsonl"), s.Read("out_ledger.jsonl"));
}

TEST(CliBalanceTest, EmptySpecIsIdentity) {
  Scratch s("balance-id");
  s.Write("c.jsonl", ToyCorpus());
  s.Write("spec.json", "{}");
  auto r = s.Run(kCli, {"balance", "--input", s.Path("c.jsonl"), "--spec", s.Path("spec.json"), "--output",
                        s.Path("out.jsonl")});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(LoadCorpusJsonl(s.Read("out.jsonl")).documents, LoadCorpusJsonl(ToyCorpus()).documents);
  EXPECT_EQ(s.Read("out_ledger.jsonl"), "");
}

TEST(CliBalanceTest, ErrorsExitTwo) {
  Scratch s("balance-err");
  EXPECT_EQ(s.Run(kCli, {"balance", "--input", s.Path("missing.jsonl"), "--output", s.Path("o.jsonl")}).exit_code, 2);
  s.Write("c.jsonl", ToyCorpus() + "{\"doc_id\":\"3\"}\n");
  auto r = s.Run(kCli, {"balance", "--input", s.Path("c.jsonl"), "--output", s.Path("o.jsonl")});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("row 3"), std::string::npos) << r.err;
  s.Write("ok.jsonl", ToyCorpus());
  s.Write("spec.json", "{\"group_pairs\":[[\"woman\",\"man\"]]}");
  EXPECT_EQ(s.Run(kCli, {"balance", "--input", s.Path("ok.jsonl"), "--spec", s.Path("spec.json"), "--output",
                         s.Path("o.jsonl")}).exit_code, 2);
  EXPECT_EQ(s.Run(kCli, {"balance", "--input", s.Path("ok.jsonl"), "--output", s.Path("ok.jsonl")}).exit_code, 2);
}

}  // namespace
}  // namespace lmbias
