#include "forumsim/llm_client.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "forumsim/errors.hpp"

namespace forumsim {

using nlohmann::json;

namespace {

constexpr std::size_t kFallbackWindow = 200;

// Alternation order puts the two-word labels first so they win at any given
// position.
constexpr const char* kLabelPattern =
    R"((strongly[\s_\-]*support|strongly[\s_\-]*oppose|support|oppose|neutral))";

const std::regex& tag_regex() {
  static const std::regex re(std::string(R"(STANCE\s*\**\s*:\s*\**\s*)") + kLabelPattern + R"(\b)",
                             std::regex::ECMAScript | std::regex::icase);
  return re;
}

const std::regex& bare_label_regex() {
  static const std::regex re(std::string(R"(\b)") + kLabelPattern + R"(\b)",
                             std::regex::ECMAScript | std::regex::icase);
  return re;
}

const std::regex& citation_regex() {
  static const std::regex re(R"(\[\s*Round\s*(\d+)\s*\]\s*@?([A-Za-z0-9_.\-]+))",
                             std::regex::ECMAScript | std::regex::icase);
  return re;
}

std::optional<std::pair<Stance, std::string>> last_match(std::string_view text, const std::regex& re,
                                                         int label_group) {
  std::optional<std::pair<Stance, std::string>> found;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    if (auto st = parse_label((*it)[label_group].str())) found = {{*st, it->str()}};
  }
  return found;
}

std::optional<Stance> find_stance_tag(std::string_view text) {
  if (auto m = last_match(text, tag_regex(), 1)) return m->first;
  return std::nullopt;
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

std::vector<std::string> validate_endpoint(const EndpointConfig& cfg) {
  std::vector<std::string> problems;
  const std::string where = "endpoint '" + cfg.name + "': ";
  const auto url = parse_url(cfg.base_url);
  if (!url) {
    problems.push_back(where + "base_url '" + cfg.base_url + "' is not a valid http(s) URL");
  }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  else if (url->scheme == "https") {
    problems.push_back(where + "https endpoints need a build with OpenSSL support");
  }
#endif
  if (cfg.model.empty()) problems.push_back(where + "model must be non-empty");
  if (!(cfg.temperature >= 0.0)) problems.push_back(where + "temperature must be >= 0");
  if (cfg.max_tokens <= 0) problems.push_back(where + "max_tokens must be positive");
  if (cfg.request_timeout.count() <= 0) problems.push_back(where + "timeout must be positive");
  if (cfg.max_retries < 0 || cfg.max_retries > kMaxRetriesLimit) {
    problems.push_back(where + "max_retries must be in [0, " + std::to_string(kMaxRetriesLimit) + "]");
  }
  if (cfg.retry_backoff_base.count() < 0) problems.push_back(where + "retry backoff must be >= 0");
  if (cfg.max_concurrent < 1) problems.push_back(where + "max_concurrent must be >= 1");
  return problems;
}

std::string ParsedUrl::origin() const {
  return scheme + "://" + host + ":" + std::to_string(port);
}

std::optional<ParsedUrl> parse_url(std::string_view url) {
  static const std::regex re(R"(^(https?)://([A-Za-z0-9.\-]+|\[[0-9A-Fa-f:.]+\])(?::(\d{1,5}))?(/[^?#\s]*)?$)",
                             std::regex::ECMAScript | std::regex::icase);
  std::cmatch m;
  if (!std::regex_match(url.data(), url.data() + url.size(), m, re)) return std::nullopt;
  ParsedUrl out;
  out.scheme = m[1].str();
  std::transform(out.scheme.begin(), out.scheme.end(), out.scheme.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  out.host = m[2].str();
  if (m[3].matched) {
    out.port = std::stoi(m[3].str());
    if (out.port < 1 || out.port > 65535) return std::nullopt;
  } else {
    out.port = out.scheme == "https" ? 443 : 80;
  }
  out.path = m[4].matched ? m[4].str() : "";
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

std::string render_post_line(const Post& p) {
  return "[Round " + std::to_string(p.round) + "] " + p.author + ": " + p.body;
}

std::vector<ChatMessage> build_prompt(const Persona& persona, const Topic& topic,
                                      std::span<const Post> visible_posts, int round,
                                      int rounds_total) {
  std::ostringstream sys;
  sys << "You are " << persona.display_name << " (forum handle: " << persona.id
      << "), a participant in an online discussion forum.\n"
      << "Demographics: " << persona.demographics << "\n"
      << "Communicative style: " << persona.communicative_style << "\n"
      << "Initial stance on the topic: " << label(persona.initial_stance) << "\n"
      << "Receptiveness: " << persona.receptiveness << "\n\n"
      << "Stay in character and write a single forum post of a few sentences. "
      << "You may keep or change your stance as the discussion develops.\n"
      << kStanceContract;

  std::ostringstream user;
  user << "The forum manager announced the topic: " << topic.question << "\n\n";
  if (visible_posts.empty()) {
    user << "No posts yet.\n\n";
  } else {
    user << "Conversation so far:\n";
    for (const Post& p : visible_posts) user << render_post_line(p) << "\n";
    user << "\n";
  }
  user << "This is round " << round << " of " << rounds_total << ". ";
  if (round <= 1) {
    user << "Submit your initial statement on the topic, reflecting your persona and your stance ("
         << label(persona.initial_stance) << ").";
  } else {
    user << kQuotingInstruction << " Then give your current position.";
  }

  return {{Role::System, sys.str()}, {Role::User, user.str()}};
}

std::string chat_request_body(const EndpointConfig& cfg, std::span<const ChatMessage> messages) {
  nlohmann::ordered_json body;
  body["model"] = cfg.model;
  auto& msgs = body["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : messages) {
    msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  body["temperature"] = cfg.temperature;
  body["max_tokens"] = cfg.max_tokens;
  return body.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::optional<std::string> parse_chat_response(std::string_view body) {
  const json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  const auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) return std::nullopt;
  const json& first = (*choices)[0];
  if (!first.is_object()) return std::nullopt;
  const auto message = first.find("message");
  if (message == first.end() || !message->is_object()) return std::nullopt;
  const auto content = message->find("content");
  if (content == message->end() || !content->is_string()) return std::nullopt;
  return content->get<std::string>();
}

StanceExtraction extract_stance(std::string_view reply_text, Stance previous) {
  if (auto m = last_match(reply_text, tag_regex(), 1)) {
    return {m->first, StanceSource::Parsed, m->second};
  }
  std::size_t start = reply_text.size() > kFallbackWindow ? reply_text.size() - kFallbackWindow : 0;
  // Back up to a word boundary so a label is never cut in half.
  while (start > 0 && !std::isspace(static_cast<unsigned char>(reply_text[start - 1]))) --start;
  if (auto m = last_match(reply_text.substr(start), bare_label_regex(), 1)) {
    return {m->first, StanceSource::Parsed, m->second};
  }
  return {previous, StanceSource::FallbackPrevious, ""};
}

std::vector<Reference> extract_references(std::string_view reply_text, std::span<const Post> prior) {
  std::vector<Reference> refs;
  const std::string s(reply_text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), citation_regex());
       it != std::sregex_iterator(); ++it) {
    const std::string digits = (*it)[1].str();
    if (digits.size() > 6) continue;
    Reference ref{std::stoi(digits), (*it)[2].str()};
    // Handles may be followed by sentence punctuation.
    while (!ref.author.empty() && (ref.author.back() == '.' || ref.author.back() == '-')) {
      ref.author.pop_back();
    }
    const bool exists = std::any_of(prior.begin(), prior.end(), [&](const Post& p) {
      return p.round == ref.round && p.author == ref.author;
    });
    if (exists && std::find(refs.begin(), refs.end(), ref) == refs.end()) refs.push_back(ref);
  }
  return refs;
}

ChatClient::ChatClient(EndpointConfig cfg, Sleeper sleeper, std::uint64_t jitter_seed)
    : cfg_(std::move(cfg)),
      sleeper_(std::move(sleeper)),
      jitter_(jitter_seed != 0 ? jitter_seed : (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}()) {
    auto problems = validate_endpoint(cfg_);
    if (!problems.empty()) throw ConfigError(std::move(problems));
    url_ = *parse_url(cfg_.base_url);
    if (!sleeper_) {
      sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
}

std::string ChatClient::describe() const {
  std::ostringstream out;
  out << "llm:" << cfg_.model << "@" << cfg_.base_url << "(temperature=" << cfg_.temperature
      << ",max_tokens=" << cfg_.max_tokens << ")";
  return out.str();
}

std::uint64_t ChatClient::request_count() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::chrono::milliseconds ChatClient::backoff_delay(int attempt) {
  const auto cap = cfg_.retry_backoff_base.count() * (std::int64_t{1} << attempt);
  if (cap <= 0) return std::chrono::milliseconds{0};
  std::lock_guard lock(mutex_);
  return std::chrono::milliseconds{
      static_cast<std::int64_t>(jitter_.uniform(static_cast<std::uint64_t>(cap) + 1))};
}

std::string ChatClient::complete(std::span<const ChatMessage> messages) {
  {
    std::unique_lock lock(mutex_);
    slot_free_.wait(lock, [&] { return in_flight_ < cfg_.max_concurrent; });
    ++in_flight_;
  }
  struct SlotRelease {
    ChatClient& self;
    ~SlotRelease() {
      {
        std::lock_guard lock(self.mutex_);
        --self.in_flight_;
      }
      self.slot_free_.notify_one();
    }
  } release{*this};

  const std::string body = chat_request_body(cfg_, messages);
  const std::string path = url_.path + "/chat/completions";
  httplib::Headers headers;
  if (!cfg_.api_key_env.empty()) {
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  const auto timeout = cfg_.request_timeout;
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);

  int attempts = 0;
  int last_status = 0;
  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    ++attempts;
    {
      std::lock_guard lock(mutex_);
      ++requests_;
    }
    httplib::Client cli(url_.origin());
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());

    auto res = cli.Post(path, headers, body, "application/json");
    if (!res) {
      last_status = 0;
      last_error = "transport failure: " + httplib::to_string(res.error());
    } else if (res->status >= 200 && res->status < 300) {
      if (auto content = parse_chat_response(res->body)) return *content;
      throw ProtocolError("endpoint '" + cfg_.name + "' returned a body that is not a chat completion",
                          res->status, attempts);
    } else if (retryable_status(res->status)) {
      last_status = res->status;
      last_error = "retryable HTTP status " + std::to_string(res->status);
    } else {
      throw TransportError("endpoint '" + cfg_.name + "' rejected the request: " +
                               res->body.substr(0, 200),
                           res->status, attempts);
    }
    if (attempt < cfg_.max_retries) sleeper_(backoff_delay(attempt));
  }
  throw TransportError("endpoint '" + cfg_.name + "' retries exhausted, last error: " + last_error,
                       last_status, attempts);
}

std::string chat_complete(const EndpointConfig& cfg, std::span<const ChatMessage> messages) {
  ChatClient client(cfg);
  return client.complete(messages);
}

void EndpointRegistry::add(EndpointConfig cfg, ChatClient::Sleeper sleeper) {
  auto name = cfg.name;
  clients_[name] = std::make_shared<ChatClient>(std::move(cfg), std::move(sleeper));
}

std::shared_ptr<ChatClient> EndpointRegistry::find(std::string_view name) const {
  auto it = clients_.find(name);
  return it == clients_.end() ? nullptr : it->second;
}

LlmBackend::LlmBackend(std::shared_ptr<ChatClient> client) : client_(std::move(client)) {}

AgentReply LlmBackend::compose(const AgentContext& ctx) {
  auto messages = build_prompt(ctx.persona, ctx.topic, ctx.visible_posts, ctx.round, ctx.rounds_total);
  if (ctx.correction) messages.push_back({Role::User, *ctx.correction});

  std::string text = client_->complete(messages);
  StanceExtraction stance = extract_stance(text, ctx.own_previous_stance);

  if (client_->config().reprompt_on_missing_stance && !find_stance_tag(text)) {
    messages.push_back({Role::Assistant, text.empty() ? std::string("(empty)") : text});
    messages.push_back({Role::User, std::string(kStanceReprompt)});
    std::string retry = client_->complete(messages);
    if (auto tagged = find_stance_tag(retry)) {
      text = std::move(retry);
      stance = extract_stance(text, ctx.own_previous_stance);
    }
  }

  AgentReply reply;
  reply.references = extract_references(text, ctx.visible_posts);
  reply.body = std::move(text);
  reply.declared_stance = stance.stance;
  reply.stance_source = stance.source;
  return reply;
}

std::string LlmBackend::describe() const { return client_->describe(); }

}  // namespace forumsim
