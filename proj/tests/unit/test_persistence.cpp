#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "forumsim/errors.hpp"
#include "forumsim/experiment.hpp"
#include "forumsim/metrics.hpp"
#include "forumsim/persistence.hpp"
#include "scenarios.hpp"

using namespace forumsim;
using namespace forumsim::testing;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("forumsim_persist_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

const fs::path kGolden = fs::path(FORUMSIM_SOURCE_DIR) / "tests/fixtures/conformist_trio.jsonl";

/// The pinned run the golden file was generated from.
Transcript pinned_trio() {
  auto cfg = conformist_trio();
  cfg.trial_id = "trial_000";
  cfg.seed = 20251016;
  cfg.experiment = "golden";
  cfg.group_label = "fixture";
  return run_trial(cfg).transcript;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  return s;
}

}  // namespace

TEST(Serialize, RoundTripsScriptedTranscripts) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto t = run_trial(random_trial(seed, 2 + seed % 6, 2 + seed % 4)).transcript;
    EXPECT_EQ(parse_transcript(serialize_transcript(t)), t);
  }
}

TEST(Serialize, RoundTripsIncompleteTranscript) {
  auto t = run_trial(conformist_trio()).transcript;
  t.posts.resize(7);
  t.abort_reason = "endpoint 'x' retries exhausted";
  t.attempts = 2;
  const auto back = parse_transcript(serialize_transcript(t));
  EXPECT_EQ(back, t);
  EXPECT_FALSE(back.complete());
}

TEST(Serialize, RoundTripsAwkwardText) {
  auto t = run_trial(conformist_trio()).transcript;
  t.posts[0].body = "line one\nline \"two\"\té中 \\ end";
  t.topic.question = "Café?\n";
  EXPECT_EQ(parse_transcript(serialize_transcript(t)), t);
}

TEST(Serialize, Canonical) {
  const auto a = pinned_trio();
  const auto b = pinned_trio();
  EXPECT_EQ(serialize_transcript(a), serialize_transcript(b));
  const auto text = serialize_transcript(a);
  ASSERT_FALSE(text.empty());
  EXPECT_EQ(text.back(), '\n');
  EXPECT_EQ(lines_of(text).size(), 1 + a.posts.size());
}

TEST(WriteTranscript, SameTranscriptTwiceGivesIdenticalBytes) {
  const auto dir = fresh_dir("twice");
  const auto t = run_trial(random_trial(8)).transcript;
  write_transcript(t, dir / "a.jsonl");
  write_transcript(t, dir / "b.jsonl");
  EXPECT_EQ(slurp(dir / "a.jsonl"), slurp(dir / "b.jsonl"));
  EXPECT_EQ(read_transcript(dir / "a.jsonl"), t);
  fs::remove_all(dir);
}

TEST(WriteTranscript, LeavesNoTemporaryFiles) {
  const auto dir = fresh_dir("tmp");
  write_transcript(pinned_trio(), dir / "t.jsonl");
  write_transcript(pinned_trio(), dir / "t.jsonl");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1u);
  fs::remove_all(dir);
}

TEST(WriteTranscript, FailedRenameLeavesNoPartialFile) {
  const auto dir = fresh_dir("atomic");
  // A non-empty directory at the target path makes the final rename fail
  // after the content has been written to the temporary file.
  const auto target = dir / "t.jsonl";
  fs::create_directories(target / "occupied");
  EXPECT_THROW(write_transcript(pinned_trio(), target), IoError);
  EXPECT_TRUE(fs::is_directory(target));
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1u);
  fs::remove_all(dir);
}

TEST(WriteTranscript, UnwritableDestinationNamesThePath) {
  try {
    write_transcript(pinned_trio(), "/proc/forumsim_cannot_write/t.jsonl");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("forumsim_cannot_write"), std::string::npos);
  }
}

TEST(ReadTranscript, GoldenFixture) {
  if (std::getenv("FORUMSIM_REGENERATE_GOLDEN")) write_transcript(pinned_trio(), kGolden);
  ASSERT_TRUE(fs::exists(kGolden)) << kGolden;
  const auto t = read_transcript(kGolden);
  EXPECT_EQ(t, pinned_trio());
  EXPECT_EQ(serialize_transcript(t), slurp(kGolden));

  // Hand-checked content of the pinned run.
  EXPECT_EQ(t.trial_id, "trial_000");
  EXPECT_EQ(t.seed, 20251016u);
  ASSERT_EQ(t.posts.size(), 15u);
  std::vector<int> conformist;
  for (const Post& p : t.posts)
    if (p.author == "conformist") conformist.push_back(value(p.declared_stance));
  EXPECT_EQ(conformist, (std::vector<int>{-2, -1, 0, 1, 2}));
  EXPECT_EQ(compute_trial_metrics(t).conformity_rate, Rational(1, 3));
}

TEST(ReadTranscript, TruncatedFileIsCorrupt) {
  const std::string text = serialize_transcript(pinned_trio());
  const auto dir = fresh_dir("trunc");
  for (std::size_t cut : {text.size() - 1, text.size() / 2, std::size_t{10}}) {
    spit(dir / "t.jsonl", text.substr(0, cut));
    EXPECT_THROW(read_transcript(dir / "t.jsonl"), CorruptTranscriptError) << cut;
  }
  // whole trailing record lost: post_count no longer matches
  auto lines = lines_of(text);
  lines.pop_back();
  spit(dir / "t.jsonl", join(lines));
  EXPECT_THROW(read_transcript(dir / "t.jsonl"), CorruptTranscriptError);
  fs::remove_all(dir);
}

TEST(ReadTranscript, FutureSchemaVersionIsRejected) {
  auto lines = lines_of(serialize_transcript(pinned_trio()));
  auto header = nlohmann::ordered_json::parse(lines[0]);
  header["schema_version"] = kTranscriptSchemaVersion + 1;
  lines[0] = header.dump();
  try {
    parse_transcript(join(lines));
    FAIL();
  } catch (const SchemaVersionError& e) {
    EXPECT_EQ(e.found(), kTranscriptSchemaVersion + 1);
  }
}

TEST(ReadTranscript, InvariantViolationsNameTheLine) {
  const auto base = lines_of(serialize_transcript(pinned_trio()));

  auto swapped = base;
  std::swap(swapped[2], swapped[3]);
  try {
    parse_transcript(join(swapped));
    FAIL();
  } catch (const CorruptTranscriptError& e) {
    EXPECT_GE(e.line(), 2u);
  }

  auto bad_stance = base;
  auto rec = nlohmann::ordered_json::parse(bad_stance[5]);
  rec["declared_stance"] = 7;
  bad_stance[5] = rec.dump();
  try {
    parse_transcript(join(bad_stance));
    FAIL();
  } catch (const CorruptTranscriptError& e) {
    EXPECT_EQ(e.line(), 6u);
  }

  auto forward_ref = base;
  rec = nlohmann::ordered_json::parse(forward_ref[4]);
  rec["references"] = nlohmann::ordered_json::array({{{"round", 3}, {"author", "anchor_1"}}});
  forward_ref[4] = rec.dump();
  EXPECT_THROW(parse_transcript(join(forward_ref)), CorruptTranscriptError);

  auto garbage = base;
  garbage[3] = "{not json";
  try {
    parse_transcript(join(garbage));
    FAIL();
  } catch (const CorruptTranscriptError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(ReadTranscript, MissingFileIsIoError) {
  EXPECT_THROW(read_transcript("/nonexistent/forumsim/t.jsonl"), IoError);
}

TEST(ReadTranscriptDir, CollectsFailuresAndSortsByName) {
  const auto dir = fresh_dir("dir");
  ExperimentConfig cfg;
  cfg.trial = random_trial(1);
  cfg.repetitions = 5;
  const auto outcomes = run_trials_serial(cfg, nullptr);
  for (auto it = outcomes.rbegin(); it != outcomes.rend(); ++it) {
    write_transcript(it->transcript, dir / (it->transcript.trial_id + ".jsonl"));
  }
  spit(dir / "trial_002.jsonl", "{broken\n");
  spit(dir / "notes.txt", "ignored");
  const auto load = read_transcript_dir(dir);
  ASSERT_EQ(load.transcripts.size(), 4u);
  ASSERT_EQ(load.failures.size(), 1u);
  EXPECT_EQ(load.failures[0].first.filename(), "trial_002.jsonl");
  EXPECT_EQ(load.transcripts[0].trial_id, "trial_000");
  EXPECT_EQ(load.transcripts[2].trial_id, "trial_003");
  fs::remove_all(dir);
}
