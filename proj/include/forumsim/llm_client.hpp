#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forumsim/agents.hpp"
#include "forumsim/rng.hpp"
#include "forumsim/types.hpp"

namespace forumsim {

/// One OpenAI-compatible chat-completions endpoint. The API key is never part
/// of the config, only the name of the environment variable holding it.
struct EndpointConfig {
  std::string name;
  std::string base_url;
  std::string model;
  std::string api_key_env;
  double temperature = 0.7;
  int max_tokens = 512;
  std::chrono::milliseconds request_timeout{60'000};
  int max_retries = 3;
  std::chrono::milliseconds retry_backoff_base{500};
  int max_concurrent = 4;
  /// Ask once more for the STANCE line before falling back.
  bool reprompt_on_missing_stance = false;

  bool operator==(const EndpointConfig&) const = default;
};

inline constexpr int kMaxRetriesLimit = 10;

/// Human-readable problems; empty when valid.
std::vector<std::string> validate_endpoint(const EndpointConfig& cfg);

struct ParsedUrl {
  std::string scheme;
  std::string host;
  int port = 0;
  /// Path below the origin without trailing slash, e.g. "/v1".
  std::string path;

  std::string origin() const;
};

std::optional<ParsedUrl> parse_url(std::string_view url);

enum class Role : std::uint8_t { System, User, Assistant };

std::string_view to_string(Role r) noexcept;

struct ChatMessage {
  Role role = Role::User;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

/// Instruction added from round 2 on.
inline constexpr std::string_view kQuotingInstruction =
    "Quote or reference at least one earlier post from the conversation log, citing it as "
    "[Round <number>] <author>.";

inline constexpr std::string_view kStanceContract =
    "End your post with a final line of the form `STANCE: <label>`, where <label> is one of: "
    "Strongly Oppose, Oppose, Neutral, Support, Strongly Support.";

inline constexpr std::string_view kStanceReprompt =
    "Your reply must end with STANCE: <label>. Restate your post and finish with that line.";

/// "[Round r] <author>: <body>"
std::string render_post_line(const Post& p);

/// System message (persona and output contract) followed by one user message
/// (topic, full visible history, round instruction). Deterministic.
std::vector<ChatMessage> build_prompt(const Persona& persona, const Topic& topic,
                                      std::span<const Post> visible_posts, int round,
                                      int rounds_total);

/// JSON request body for POST {base_url}/chat/completions.
std::string chat_request_body(const EndpointConfig& cfg, std::span<const ChatMessage> messages);

/// choices[0].message.content, or nullopt when the body is not a
/// chat-completion response.
std::optional<std::string> parse_chat_response(std::string_view body);

struct StanceExtraction {
  Stance stance = Stance::Neutral;
  StanceSource source = StanceSource::FallbackPrevious;
  /// Text that produced the stance; empty on fallback to the previous one.
  std::string raw;
};

/// Last `STANCE: <label>` tag wins. Failing that, the last bare label in the
/// final 200 characters (longest label first). Failing that, `previous`.
StanceExtraction extract_stance(std::string_view reply_text, Stance previous);

/// Citations of the form "[Round r] author" that name a post in `prior`.
std::vector<Reference> extract_references(std::string_view reply_text, std::span<const Post> prior);

/// Blocking, thread-safe client for one endpoint. Retries transport errors,
/// 429 and 5xx with full-jitter exponential backoff; at most max_retries + 1
/// attempts. Concurrent calls beyond max_concurrent wait their turn.
class ChatClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit ChatClient(EndpointConfig cfg, Sleeper sleeper = {}, std::uint64_t jitter_seed = 0);

  std::string complete(std::span<const ChatMessage> messages);

  const EndpointConfig& config() const noexcept { return cfg_; }
  std::string describe() const;

  /// Requests sent so far, retries included.
  std::uint64_t request_count() const;

 private:
  std::chrono::milliseconds backoff_delay(int attempt);

  EndpointConfig cfg_;
  ParsedUrl url_;
  Sleeper sleeper_;

  mutable std::mutex mutex_;
  std::condition_variable slot_free_;
  int in_flight_ = 0;
  SplitMix64 jitter_;
  std::uint64_t requests_ = 0;
};

/// One-shot call with a fresh client.
std::string chat_complete(const EndpointConfig& cfg, std::span<const ChatMessage> messages);

/// Named endpoints shared by every trial of an experiment.
class EndpointRegistry {
 public:
  void add(EndpointConfig cfg, ChatClient::Sleeper sleeper = {});
  std::shared_ptr<ChatClient> find(std::string_view name) const;
  bool empty() const noexcept { return clients_.empty(); }

 private:
  std::map<std::string, std::shared_ptr<ChatClient>, std::less<>> clients_;
};

class LlmBackend final : public AgentBackend {
 public:
  explicit LlmBackend(std::shared_ptr<ChatClient> client);

  AgentReply compose(const AgentContext& ctx) override;
  std::string describe() const override;

 private:
  std::shared_ptr<ChatClient> client_;
};

}  // namespace forumsim
