#pragma once

// Line protocol to an out-of-process text generator, plus a child-process
// transport speaking it over the child's stdin/stdout.
//
//   request:  GENERATE max_words=<int> temperature=<decimal> sample=<0|1> seed_rng=<uint> text=<pct>
//   response: OK text=<pct>   |   ERR <reason>
//
// <pct> escapes space, '%' and newline as %20, %25 and %0A.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <csignal>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "gvb/common.hpp"
#include "gvb/message_generator.hpp"

namespace gvb {

inline std::string percent_encode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case ' ': out += "%20"; break;
      case '%': out += "%25"; break;
      case '\n': out += "%0A"; break;
      default: out += c;
    }
  }
  return out;
}

/// Decodes any %XX escape. Returns nullopt on a malformed escape.
inline std::optional<std::string> percent_decode(std::string_view s) {
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '%') {
      out += s[i];
      continue;
    }
    if (i + 2 >= s.size()) return std::nullopt;
    int hi = hex(s[i + 1]), lo = hex(s[i + 2]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out += static_cast<char>(hi * 16 + lo);
    i += 2;
  }
  return out;
}

inline std::string format_generate_request(std::string_view seed, const GenerationParams& params) {
  std::string line = "GENERATE";
  line += " max_words=" + std::to_string(params.max_words);
  line += " temperature=" + text::format_double(params.temperature);
  line += std::string(" sample=") + (params.sampling ? "1" : "0");
  line += " seed_rng=" + std::to_string(params.rng_seed);
  line += " text=" + percent_encode(seed);
  return line;
}

struct GenerateRequest {
  std::string seed;
  GenerationParams params;
};

/// Server-side parse of a request line; used by stub generators and tests.
inline std::optional<GenerateRequest> parse_generate_request(std::string_view line) {
  auto tokens = text::split_whitespace(line);
  if (tokens.size() != 6 || tokens[0] != "GENERATE") return std::nullopt;
  auto value_of = [&](std::size_t i, std::string_view key) -> std::optional<std::string_view> {
    std::string_view tok = tokens[i];
    if (!tok.starts_with(key) || tok.size() <= key.size() || tok[key.size()] != '=') return std::nullopt;
    return tok.substr(key.size() + 1);
  };
  GenerateRequest req;
  auto mw = value_of(1, "max_words");
  auto temp = value_of(2, "temperature");
  auto sample = value_of(3, "sample");
  auto seed_rng = value_of(4, "seed_rng");
  auto txt = value_of(5, "text");
  if (!mw || !temp || !sample || !seed_rng || !txt) return std::nullopt;
  auto mw_v = text::parse_int<int>(*mw);
  auto temp_v = text::parse_double(*temp);
  auto seed_v = text::parse_int<std::uint64_t>(*seed_rng);
  auto decoded = percent_decode(*txt);
  if (!mw_v || !temp_v || !seed_v || !decoded || (*sample != "0" && *sample != "1")) return std::nullopt;
  req.params.max_words = *mw_v;
  req.params.temperature = *temp_v;
  req.params.sampling = *sample == "1";
  req.params.rng_seed = *seed_v;
  req.seed = std::move(*decoded);
  return req;
}

struct GenerateReply {
  bool ok = false;
  std::string text;  // decoded message when ok, otherwise the error reason
};

inline std::optional<GenerateReply> parse_generate_reply(std::string_view line) {
  if (line.starts_with("OK text=")) {
    auto decoded = percent_decode(line.substr(8));
    if (!decoded) return std::nullopt;
    return GenerateReply{true, std::move(*decoded)};
  }
  if (line == "ERR") return GenerateReply{false, ""};
  if (line.starts_with("ERR ")) return GenerateReply{false, std::string(line.substr(4))};
  return std::nullopt;
}

enum class ExchangeStatus { Ok, Timeout, Unavailable };

struct ExchangeResult {
  ExchangeStatus status = ExchangeStatus::Unavailable;
  std::string line;
};

/// One request line out, one response line back.
class LineTransport {
 public:
  virtual ~LineTransport() = default;
  virtual ExchangeResult exchange(std::string_view request_line, std::chrono::milliseconds timeout) = 0;
};

/// Runs `/bin/sh -c <command>` and talks to it over its stdin/stdout. The
/// child is started lazily and restarted after a timeout or exit; a timed-out
/// child is killed since its reply stream can no longer be trusted.
class SubprocessTransport final : public LineTransport {
 public:
  explicit SubprocessTransport(std::string command) : command_(std::move(command)) {}
  ~SubprocessTransport() override { stop(); }

  SubprocessTransport(const SubprocessTransport&) = delete;
  SubprocessTransport& operator=(const SubprocessTransport&) = delete;

  ExchangeResult exchange(std::string_view request_line, std::chrono::milliseconds timeout) override {
    using Clock = std::chrono::steady_clock;
    const auto deadline = Clock::now() + timeout;
    if (pid_ < 0 && !start()) return {ExchangeStatus::Unavailable, {}};

    std::string out(request_line);
    out += '\n';
    if (!write_all(out)) {
      stop();
      return {ExchangeStatus::Unavailable, {}};
    }

    for (;;) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return {ExchangeStatus::Ok, std::move(line)};
      }
      auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      if (remaining.count() <= 0) {
        stop();
        return {ExchangeStatus::Timeout, {}};
      }
      pollfd pfd{from_child_, POLLIN, 0};
      int rc = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
      if (rc < 0 && errno == EINTR) continue;
      if (rc < 0) {
        stop();
        return {ExchangeStatus::Unavailable, {}};
      }
      if (rc == 0) continue;
      char chunk[4096];
      ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        stop();
        return {ExchangeStatus::Unavailable, {}};
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  bool start() {
    std::signal(SIGPIPE, SIG_IGN);
    int in_pipe[2], out_pipe[2];
    if (::pipe(in_pipe) != 0) return false;
    if (::pipe(out_pipe) != 0) {
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      return false;
    }
    pid_t pid = ::fork();
    if (pid < 0) {
      for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
      return false;
    }
    if (pid == 0) {
      ::setpgid(0, 0);
      ::dup2(in_pipe[0], STDIN_FILENO);
      ::dup2(out_pipe[1], STDOUT_FILENO);
      for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::setpgid(pid, pid);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
    ::fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    buffer_.clear();
    return true;
  }

  bool write_all(std::string_view data) {
    while (!data.empty()) {
      ssize_t n = ::write(to_child_, data.data(), data.size());
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return false;
      data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
  }

  void stop() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    to_child_ = from_child_ = -1;
    if (pid_ > 0) {
      ::kill(-pid_, SIGKILL);
      ::kill(pid_, SIGKILL);
      int status = 0;
      while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
      }
    }
    pid_ = -1;
    buffer_.clear();
  }

  std::string command_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

/// Message plus what happened on the way to it.
struct GenerationOutcome {
  GeneratedMessage message;
  std::optional<std::string> request_line;     // set when the external backend was contacted
  std::optional<std::string> fallback_reason;  // set when the template backend stood in
};

inline constexpr std::chrono::milliseconds kDefaultExternalTimeout{2000};

/// Generates with the requested backend. External failures (timeout, ERR,
/// unreachable, malformed reply) are not fatal: the template output is
/// returned and the reason recorded.
inline GenerationOutcome generate_message(std::string_view seed, const GenerationParams& params,
                                          BackendKind backend, LineTransport* transport = nullptr,
                                          std::chrono::milliseconds timeout = kDefaultExternalTimeout,
                                          double speaking_rate = kDefaultSpeakingRate) {
  if (text::trim(seed).empty()) throw Error(ErrorCode::EmptySeed, "seed text is empty");
  validate(params);
  GenerationOutcome outcome;
  if (backend == BackendKind::External) {
    if (!transport) {
      outcome.fallback_reason = "unavailable";
    } else {
      outcome.request_line = format_generate_request(seed, params);
      ExchangeResult res = transport->exchange(*outcome.request_line, timeout);
      if (res.status == ExchangeStatus::Timeout) {
        outcome.fallback_reason = "timeout";
      } else if (res.status == ExchangeStatus::Unavailable) {
        outcome.fallback_reason = "unavailable";
      } else if (auto reply = parse_generate_reply(res.line); !reply) {
        outcome.fallback_reason = "malformed";
      } else if (!reply->ok) {
        outcome.fallback_reason = "ERR " + reply->text;
      } else if (text::trim(reply->text).empty()) {
        outcome.fallback_reason = "empty";
      } else {
        outcome.message = make_message(text::trim(reply->text), BackendKind::External, speaking_rate);
        return outcome;
      }
    }
  }
  outcome.message = template_generate(seed, params, speaking_rate);
  return outcome;
}

}  // namespace gvb
