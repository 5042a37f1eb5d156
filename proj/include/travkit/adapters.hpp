#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace travkit {

// Segmentation adapters speak newline-delimited JSON:
//   prompt request    {"id":int,"image":"path","prompts":[[u,v],...]}
//   prompt response   {"id":int,"masks":["path",...],"scores":[f,...]}
//   semantic request  {"id":int,"image":"path"}
//   semantic response {"id":int,"semantic":"path","vocabulary":"path"}
// A response {"id":int,"error":"message"} reports a failed request.

struct PromptRequest {
  long long id = 0;
  std::filesystem::path image;
  std::vector<Eigen::Vector2d> prompts;
};

struct PromptResponse {
  long long id = 0;
  std::vector<std::filesystem::path> masks;
  std::vector<double> scores;  // defaults to 1.0 per mask when absent
};

struct SemanticRequest {
  long long id = 0;
  std::filesystem::path image;
};

struct SemanticResponse {
  long long id = 0;
  std::filesystem::path semantic;
  std::filesystem::path vocabulary;
};

std::string encode_request(const PromptRequest& request);
std::string encode_request(const SemanticRequest& request);
std::string encode_response(const PromptResponse& response);
std::string encode_response(const SemanticResponse& response);
/// Strict decoders: throw ProtocolError on malformed JSON, missing or
/// mistyped fields, error responses, or an id other than `expected_id`.
PromptResponse decode_prompt_response(const std::string& line, long long expected_id);
SemanticResponse decode_semantic_response(const std::string& line, long long expected_id);
PromptRequest decode_prompt_request(const std::string& line);
SemanticRequest decode_semantic_request(const std::string& line);

class PromptSegmenter {
 public:
  virtual ~PromptSegmenter() = default;
  virtual PromptResponse segment(const PromptRequest& request) = 0;
};

class SemanticSegmenter {
 public:
  virtual ~SemanticSegmenter() = default;
  virtual SemanticResponse segment(const SemanticRequest& request) = 0;
};

/// A spawned child process exchanging one JSON line per request over its
/// stdin/stdout. Calls are serialized by an internal mutex.
class JsonLineProcess {
 public:
  explicit JsonLineProcess(std::vector<std::string> argv);
  ~JsonLineProcess();
  JsonLineProcess(const JsonLineProcess&) = delete;
  JsonLineProcess& operator=(const JsonLineProcess&) = delete;

  std::string round_trip(const std::string& line);

 private:
  std::string read_line();

  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::mutex mutex_;
};

class SubprocessPromptSegmenter : public PromptSegmenter {
 public:
  explicit SubprocessPromptSegmenter(std::vector<std::string> argv) : process_(std::move(argv)) {}
  PromptResponse segment(const PromptRequest& request) override;

 private:
  JsonLineProcess process_;
};

class SubprocessSemanticSegmenter : public SemanticSegmenter {
 public:
  explicit SubprocessSemanticSegmenter(std::vector<std::string> argv) : process_(std::move(argv)) {}
  SemanticResponse segment(const SemanticRequest& request) override;

 private:
  JsonLineProcess process_;
};

/// Fixture layout, keyed by request id (= keyframe index, zero-padded to 6):
///   DIR/000007/masks/*.png      proposals, sorted by file name
///   DIR/000007/scores.json      optional array of scores
///   DIR/000007/semantic.png     class-index map
///   DIR/000007/vocabulary.json  optional; falls back to DIR/vocabulary.json
class FixturePromptSegmenter : public PromptSegmenter {
 public:
  explicit FixturePromptSegmenter(std::filesystem::path root) : root_(std::move(root)) {}
  PromptResponse segment(const PromptRequest& request) override;

 private:
  std::filesystem::path root_;
};

class FixtureSemanticSegmenter : public SemanticSegmenter {
 public:
  explicit FixtureSemanticSegmenter(std::filesystem::path root) : root_(std::move(root)) {}
  SemanticResponse segment(const SemanticRequest& request) override;

 private:
  std::filesystem::path root_;
};

std::string frame_stem(std::size_t index);  // "000042"

/// Splits a command line on whitespace (no quoting support).
std::vector<std::string> split_command(const std::string& command);

}  // namespace travkit
