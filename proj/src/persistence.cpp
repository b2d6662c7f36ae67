#include "forumsim/persistence.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "forumsim/errors.hpp"

namespace forumsim {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string dump(const ojson& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

ojson header_record(const Transcript& t) {
  ojson h;
  h["record"] = "header";
  h["schema_version"] = kTranscriptSchemaVersion;
  h["trial_id"] = t.trial_id;
  h["experiment"] = t.experiment;
  h["group_label"] = t.group_label;
  h["topic"] = {{"id", t.topic.id}, {"question", t.topic.question}};
  h["announcement"] = {{"sequence", 0}, {"text", topic_announcement(t.topic)}};
  auto& personas = h["personas"] = ojson::array();
  for (const auto& p : t.personas) {
    ojson jp;
    jp["id"] = p.id;
    jp["display_name"] = p.display_name;
    jp["demographics"] = p.demographics;
    jp["communicative_style"] = p.communicative_style;
    jp["initial_stance"] = value(p.initial_stance);
    jp["receptiveness"] = p.receptiveness;
    personas.push_back(std::move(jp));
  }
  h["rounds_total"] = t.rounds_total;
  h["seed"] = t.seed;
  h["backend_descriptor"] = t.backend_descriptor;
  h["attempts"] = t.attempts;
  h["status"] = t.complete() ? "complete" : "incomplete";
  h["abort_reason"] = t.abort_reason ? ojson(*t.abort_reason) : ojson(nullptr);
  h["post_count"] = t.posts.size();
  return h;
}

ojson post_record(const Post& p) {
  ojson r;
  r["record"] = "post";
  r["trial_id"] = p.trial_id;
  r["sequence"] = p.sequence;
  r["round"] = p.round;
  r["author"] = p.author;
  r["declared_stance"] = value(p.declared_stance);
  r["stance_label"] = name(p.declared_stance);
  r["stance_source"] = to_string(p.stance_source);
  auto& refs = r["references"] = ojson::array();
  for (const auto& ref : p.references) refs.push_back({{"round", ref.round}, {"author", ref.author}});
  r["body"] = p.body;
  return r;
}

/// Typed field access that reports the line on any mismatch.
class Fields {
 public:
  Fields(const nlohmann::json& obj, std::size_t line) : obj_(obj), line_(line) {}

  const nlohmann::json& at(const char* key) const {
    auto it = obj_.find(key);
    if (it == obj_.end()) fail(std::string("missing field '") + key + "'");
    return *it;
  }
  std::string str(const char* key) const {
    const auto& v = at(key);
    if (!v.is_string()) fail(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
  }
  std::int64_t integer(const char* key) const {
    const auto& v = at(key);
    if (!v.is_number_integer()) fail(std::string("field '") + key + "' must be an integer");
    return v.get<std::int64_t>();
  }
  std::uint64_t unsigned_integer(const char* key) const {
    const auto& v = at(key);
    if (!v.is_number_unsigned()) fail(std::string("field '") + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  }
  Stance stance(const char* key) const {
    try {
      return stance_from_value(static_cast<int>(integer(key)));
    } catch (const DomainError& e) {
      fail(e.what());
    }
  }
  [[noreturn]] void fail(const std::string& what) const { throw CorruptTranscriptError(line_, what); }

 private:
  const nlohmann::json& obj_;
  std::size_t line_;
};

}  // namespace

std::string serialize_transcript(const Transcript& t) {
  std::string out = dump(header_record(t));
  out += '\n';
  for (const auto& p : t.posts) {
    out += dump(post_record(p));
    out += '\n';
  }
  return out;
}

Transcript parse_transcript(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      throw CorruptTranscriptError(lines.size() + 1, "final record is not newline-terminated (truncated file?)");
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  if (lines.empty()) throw CorruptTranscriptError(0, "file is empty");

  auto parse_line = [&](std::size_t idx) {
    auto j = nlohmann::json::parse(lines[idx], nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw CorruptTranscriptError(idx + 1, "not a JSON object");
    }
    return j;
  };

  // Header. Version is checked before anything else is interpreted.
  const auto header = parse_line(0);
  const Fields h(header, 1);
  if (h.str("record") != "header") h.fail("first record must be the header");
  const auto version = h.integer("schema_version");
  if (version != kTranscriptSchemaVersion) throw SchemaVersionError(version, kTranscriptSchemaVersion);

  Transcript t;
  t.trial_id = h.str("trial_id");
  t.experiment = h.str("experiment");
  t.group_label = h.str("group_label");
  {
    const Fields topic(h.at("topic"), 1);
    t.topic.id = topic.str("id");
    t.topic.question = topic.str("question");
    if (t.topic.question.empty()) h.fail("topic question is empty");
  }
  const auto& personas = h.at("personas");
  if (!personas.is_array()) h.fail("'personas' must be an array");
  std::set<std::string> ids;
  for (const auto& jp : personas) {
    if (!jp.is_object()) h.fail("persona entries must be objects");
    const Fields f(jp, 1);
    Persona p;
    p.id = f.str("id");
    p.display_name = f.str("display_name");
    p.demographics = f.str("demographics");
    p.communicative_style = f.str("communicative_style");
    p.initial_stance = f.stance("initial_stance");
    p.receptiveness = f.str("receptiveness");
    if (p.id.empty() || !ids.insert(p.id).second) h.fail("persona ids must be non-empty and unique");
    t.personas.push_back(std::move(p));
  }
  if (t.personas.size() < 2) h.fail("at least 2 personas are required");
  t.rounds_total = static_cast<int>(h.integer("rounds_total"));
  if (t.rounds_total < 2) h.fail("rounds_total must be >= 2");
  t.seed = h.unsigned_integer("seed");
  t.backend_descriptor = h.str("backend_descriptor");
  t.attempts = static_cast<int>(h.integer("attempts"));
  if (const auto& reason = h.at("abort_reason"); !reason.is_null()) {
    if (!reason.is_string()) h.fail("'abort_reason' must be a string or null");
    t.abort_reason = reason.get<std::string>();
  }
  const auto status = h.str("status");
  if (status != "complete" && status != "incomplete") h.fail("unknown status '" + status + "'");
  const auto declared_posts = h.unsigned_integer("post_count");

  const std::size_t agents = t.personas.size();
  std::uint64_t last_sequence = 0;
  for (std::size_t idx = 1; idx < lines.size(); ++idx) {
    const std::size_t line = idx + 1;
    const auto rec = parse_line(idx);
    const Fields f(rec, line);
    if (f.str("record") != "post") f.fail("expected a post record");

    const std::size_t k = idx - 1;
    Post p;
    p.trial_id = f.str("trial_id");
    p.sequence = f.unsigned_integer("sequence");
    p.round = static_cast<int>(f.integer("round"));
    p.author = f.str("author");
    p.declared_stance = f.stance("declared_stance");
    const auto source = stance_source_from_string(f.str("stance_source"));
    if (!source) f.fail("unknown stance_source");
    p.stance_source = *source;
    p.body = f.str("body");
    const auto& refs = f.at("references");
    if (!refs.is_array()) f.fail("'references' must be an array");
    for (const auto& jr : refs) {
      if (!jr.is_object()) f.fail("reference entries must be objects");
      const Fields rf(jr, line);
      p.references.push_back({static_cast<int>(rf.integer("round")), rf.str("author")});
    }

    if (p.trial_id != t.trial_id) f.fail("post trial_id does not match header");
    if (p.sequence <= last_sequence) f.fail("sequence numbers must strictly increase");
    last_sequence = p.sequence;
    if (k >= t.expected_post_count()) f.fail("more posts than personas x rounds_total");
    const int expected_round = static_cast<int>(k / agents) + 1;
    const std::string& expected_author = t.personas[k % agents].id;
    if (p.round != expected_round || p.author != expected_author) {
      f.fail("post breaks round-robin order: expected round " + std::to_string(expected_round) +
             " by '" + expected_author + "'");
    }
    if (p.round == 1 && !p.references.empty()) f.fail("round 1 posts cannot carry references");
    for (const auto& ref : p.references) {
      const bool earlier = std::any_of(t.posts.begin(), t.posts.end(), [&](const Post& q) {
        return q.round == ref.round && q.author == ref.author;
      });
      if (!earlier) f.fail("reference does not name an earlier post");
    }
    t.posts.push_back(std::move(p));
  }

  const std::size_t last_line = lines.size();
  if (declared_posts != t.posts.size()) {
    throw CorruptTranscriptError(last_line, "header declares " + std::to_string(declared_posts) +
                                                " posts but file holds " + std::to_string(t.posts.size()) +
                                                " (truncated file?)");
  }
  if ((status == "complete") != t.complete()) {
    throw CorruptTranscriptError(1, "status '" + status + "' does not match the posts present");
  }
  return t;
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir, "cannot create directory: " + ec.message());

  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp." + std::to_string(::getpid()) +
                              "." + std::to_string(std::hash<std::string_view>{}(content) & 0xffffff));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open temporary file for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw IoError(path, "write failed");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError(path, "cannot move file into place: " + ec.message());
  }
}

void write_transcript(const Transcript& t, const fs::path& path) {
  write_file_atomic(path, serialize_transcript(t));
}

Transcript read_transcript(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open transcript");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_transcript(buf.str());
}

TranscriptLoad read_transcript_dir(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError(dir, "not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  TranscriptLoad out;
  for (const auto& f : files) {
    try {
      out.transcripts.push_back(read_transcript(f));
    } catch (const std::exception& e) {
      out.failures.emplace_back(f, e.what());
    }
  }
  return out;
}

}  // namespace forumsim
