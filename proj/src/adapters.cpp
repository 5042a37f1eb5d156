#include "travkit/adapters.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "travkit/errors.hpp"

extern char** environ;

namespace travkit {

using nlohmann::json;

std::string frame_stem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu", index);
  return buf;
}

std::vector<std::string> split_command(const std::string& command) {
  std::istringstream ss(command);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

// ---------------------------------------------------------------- protocol

std::string encode_request(const PromptRequest& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["image"] = r.image.string();
  j["prompts"] = nlohmann::ordered_json::array();
  for (const auto& p : r.prompts) j["prompts"].push_back({p.x(), p.y()});
  return j.dump();
}

std::string encode_request(const SemanticRequest& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["image"] = r.image.string();
  return j.dump();
}

std::string encode_response(const PromptResponse& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["masks"] = nlohmann::ordered_json::array();
  for (const auto& m : r.masks) j["masks"].push_back(m.string());
  j["scores"] = r.scores;
  return j.dump();
}

std::string encode_response(const SemanticResponse& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["semantic"] = r.semantic.string();
  j["vocabulary"] = r.vocabulary.string();
  return j.dump();
}

namespace {

json parse_line(const std::string& line) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw ProtocolError("adapter message is not a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("adapter sent invalid JSON: ") + e.what());
  }
}

long long get_id(const json& j) {
  if (!j.contains("id") || !j["id"].is_number_integer()) {
    throw ProtocolError("adapter message lacks an integer \"id\"");
  }
  return j["id"].get<long long>();
}

void check_response_header(const json& j, long long expected_id) {
  const long long id = get_id(j);
  if (id != expected_id) {
    throw ProtocolError("adapter answered id " + std::to_string(id) + ", expected " +
                        std::to_string(expected_id));
  }
  if (j.contains("error")) {
    throw ProtocolError("adapter reported an error for request " + std::to_string(id) + ": " +
                        (j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump()));
  }
}

std::string get_string(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ProtocolError(std::string("adapter message lacks string field \"") + key + "\"");
  }
  return j[key].get<std::string>();
}

}  // namespace

PromptResponse decode_prompt_response(const std::string& line, long long expected_id) {
  const json j = parse_line(line);
  check_response_header(j, expected_id);
  PromptResponse r;
  r.id = expected_id;
  if (!j.contains("masks") || !j["masks"].is_array()) {
    throw ProtocolError("prompt response lacks a \"masks\" array");
  }
  for (const auto& m : j["masks"]) {
    if (!m.is_string()) throw ProtocolError("prompt response mask entries must be paths");
    r.masks.emplace_back(m.get<std::string>());
  }
  if (j.contains("scores")) {
    if (!j["scores"].is_array()) throw ProtocolError("prompt response \"scores\" must be an array");
    for (const auto& s : j["scores"]) {
      if (!s.is_number()) throw ProtocolError("prompt response scores must be numbers");
      const double v = s.get<double>();
      if (!(v >= 0.0 && v <= 1.0)) throw ProtocolError("prompt response score outside [0, 1]");
      r.scores.push_back(v);
    }
    if (r.scores.size() != r.masks.size()) {
      throw ProtocolError("prompt response has " + std::to_string(r.masks.size()) + " masks but " +
                          std::to_string(r.scores.size()) + " scores");
    }
  } else {
    r.scores.assign(r.masks.size(), 1.0);
  }
  return r;
}

SemanticResponse decode_semantic_response(const std::string& line, long long expected_id) {
  const json j = parse_line(line);
  check_response_header(j, expected_id);
  return SemanticResponse{expected_id, get_string(j, "semantic"), get_string(j, "vocabulary")};
}

PromptRequest decode_prompt_request(const std::string& line) {
  const json j = parse_line(line);
  PromptRequest r;
  r.id = get_id(j);
  r.image = get_string(j, "image");
  if (!j.contains("prompts") || !j["prompts"].is_array()) {
    throw ProtocolError("prompt request lacks a \"prompts\" array");
  }
  for (const auto& p : j["prompts"]) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ProtocolError("prompt entries must be [u, v] pairs");
    }
    r.prompts.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return r;
}

SemanticRequest decode_semantic_request(const std::string& line) {
  const json j = parse_line(line);
  return SemanticRequest{get_id(j), get_string(j, "image")};
}

// ---------------------------------------------------------------- processes

JsonLineProcess::JsonLineProcess(std::vector<std::string> argv) {
  if (argv.empty()) throw InvalidParameter("adapter command is empty");
  static std::once_flag ignore_sigpipe;
  std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });

  int in_pipe[2], out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw InputError("pipe() failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw InputError("pipe() failed");
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

  std::vector<char*> args;
  for (auto& a : argv) args.push_back(a.data());
  args.push_back(nullptr);
  pid_t pid = -1;
  const int rc = ::posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    throw InputError("cannot spawn adapter '" + argv[0] + "': " + std::strerror(rc));
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

JsonLineProcess::~JsonLineProcess() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
}

std::string JsonLineProcess::read_line() {
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw ProtocolError("adapter closed its output before answering");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::string JsonLineProcess::round_trip(const std::string& line) {
  std::lock_guard lock(mutex_);
  std::string msg = line + "\n";
  std::size_t off = 0;
  while (off < msg.size()) {
    const ssize_t n = ::write(to_child_, msg.data() + off, msg.size() - off);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw ProtocolError("adapter input closed");
    off += static_cast<std::size_t>(n);
  }
  return read_line();
}

PromptResponse SubprocessPromptSegmenter::segment(const PromptRequest& request) {
  return decode_prompt_response(process_.round_trip(encode_request(request)), request.id);
}

SemanticResponse SubprocessSemanticSegmenter::segment(const SemanticRequest& request) {
  return decode_semantic_response(process_.round_trip(encode_request(request)), request.id);
}

// ---------------------------------------------------------------- fixtures

PromptResponse FixturePromptSegmenter::segment(const PromptRequest& request) {
  namespace fs = std::filesystem;
  if (request.id < 0) throw ProtocolError("fixture requests need a non-negative id");
  const fs::path dir = root_ / frame_stem(static_cast<std::size_t>(request.id));
  PromptResponse r;
  r.id = request.id;
  if (fs::is_directory(dir / "masks")) {
    for (const auto& e : fs::directory_iterator(dir / "masks")) {
      if (e.is_regular_file() && e.path().extension() == ".png") r.masks.push_back(e.path());
    }
  }
  std::sort(r.masks.begin(), r.masks.end());
  if (fs::exists(dir / "scores.json")) {
    std::ifstream in(dir / "scores.json");
    try {
      json j;
      in >> j;
      r.scores = j.get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ProtocolError("bad fixture scores in " + dir.string() + ": " + e.what());
    }
    if (r.scores.size() != r.masks.size()) {
      throw ProtocolError("fixture " + dir.string() + " has mismatched masks and scores");
    }
  } else {
    r.scores.assign(r.masks.size(), 1.0);
  }
  return r;
}

SemanticResponse FixtureSemanticSegmenter::segment(const SemanticRequest& request) {
  namespace fs = std::filesystem;
  if (request.id < 0) throw ProtocolError("fixture requests need a non-negative id");
  const fs::path dir = root_ / frame_stem(static_cast<std::size_t>(request.id));
  SemanticResponse r;
  r.id = request.id;
  r.semantic = dir / "semantic.png";
  if (!fs::exists(r.semantic)) throw InputError("fixture semantic map missing: " + r.semantic.string());
  r.vocabulary = fs::exists(dir / "vocabulary.json") ? dir / "vocabulary.json" : root_ / "vocabulary.json";
  if (!fs::exists(r.vocabulary)) throw InputError("fixture vocabulary missing under " + root_.string());
  return r;
}

}  // namespace travkit
