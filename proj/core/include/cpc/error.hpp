#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace cpc {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoFailure : public Error {
 public:
  explicit IoFailure(const std::string& what) : Error("I/O failure: " + what) {}
};

class EmptyInput : public Error {
 public:
  explicit EmptyInput(const std::string& what) : Error("empty input: " + what) {}
};

// corpus

class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line, const std::string& reason);
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class MissingImage : public Error {
 public:
  explicit MissingImage(const std::filesystem::path& path)
      : Error("missing image: " + path.string()), path_(path) {}
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

class UnknownAdapter : public Error {
 public:
  explicit UnknownAdapter(const std::string& name) : Error("unknown adapter: " + name) {}
};

class SourceLayoutMismatch : public Error {
 public:
  explicit SourceLayoutMismatch(const std::string& what)
      : Error("source layout mismatch: " + what) {}
};

// endpoints

class EndpointFailure : public Error {
 public:
  explicit EndpointFailure(const std::string& what) : Error("endpoint failure: " + what) {}
};

// Failure that may succeed on retry (HTTP 408/409/429/5xx, dropped connection).
class TransientFailure : public EndpointFailure {
 public:
  explicit TransientFailure(const std::string& what) : EndpointFailure("transient: " + what) {}
};

class Timeout : public TransientFailure {
 public:
  explicit Timeout(const std::string& what) : TransientFailure("timeout: " + what) {}
};

// Never retried.
class AuthFailure : public EndpointFailure {
 public:
  explicit AuthFailure(const std::string& what) : EndpointFailure("auth: " + what) {}
};

// pairgen

class BoxOutOfBounds : public Error {
 public:
  explicit BoxOutOfBounds(const std::string& what) : Error("box out of bounds: " + what) {}
};

class ImageDecodeFailure : public Error {
 public:
  explicit ImageDecodeFailure(const std::string& what) : Error("image decode failure: " + what) {}
};

// metrics

class EmptyTruths : public Error {
 public:
  EmptyTruths() : Error("ANLS needs at least one ground truth") {}
};

// harness

class UnknownDataset : public Error {
 public:
  explicit UnknownDataset(const std::string& name) : Error("no prompt for dataset: " + name) {}
};

// ftgen

class EmptyAnswer : public Error {
 public:
  EmptyAnswer() : Error("answer text must be non-empty") {}
};

class MalformedLinks : public Error {
 public:
  explicit MalformedLinks(const std::string& what) : Error("malformed link tokens: " + what) {}
};

class NegEqualsPositive : public Error {
 public:
  NegEqualsPositive() : Error("negative answer equals the positive answer") {}
};

class AlreadyAugmented : public Error {
 public:
  AlreadyAugmented() : Error("query already carries the link-token instruction") {}
};

class PerturbationImpossible : public Error {
 public:
  explicit PerturbationImpossible(const std::string& answer)
      : Error("cannot produce 3 distinct perturbations of \"" + answer + "\"") {}
};

// report

class UnknownPairReference : public Error {
 public:
  explicit UnknownPairReference(const std::string& pair_id)
      : Error("response references unknown pair: " + pair_id) {}
};

}  // namespace cpc
