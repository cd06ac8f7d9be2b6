#pragma once

#include <stdexcept>
#include <string>

namespace beamnet {

// Exit-code buckets used by the command line tool.
enum class ErrorCode { Parse = 2, Validation = 3, Runtime = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct NotSkew : Error {
  explicit NotSkew(const std::string& w) : Error(ErrorCode::Runtime, "NotSkew: " + w) {}
};

struct NotSPD : Error {
  explicit NotSPD(const std::string& w) : Error(ErrorCode::Runtime, "NotSPD: " + w) {}
};

struct NotRotation : Error {
  explicit NotRotation(const std::string& w) : Error(ErrorCode::Runtime, "NotRotation: " + w) {}
};

struct EigenSplitFailure : Error {
  explicit EigenSplitFailure(const std::string& w)
      : Error(ErrorCode::Runtime, "EigenSplitFailure: " + w) {}
};

struct SingularNodeMatrix : Error {
  explicit SingularNodeMatrix(const std::string& w)
      : Error(ErrorCode::Runtime, "SingularNodeMatrix: " + w) {}
};

struct BlowUp : Error {
  explicit BlowUp(const std::string& w) : Error(ErrorCode::Runtime, "BlowUp: " + w) {}
};

struct TraceDimensionMismatch : Error {
  explicit TraceDimensionMismatch(const std::string& w)
      : Error(ErrorCode::Runtime, "TraceDimensionMismatch: " + w) {}
};

struct ProfileIncompatible : Error {
  explicit ProfileIncompatible(const std::string& w)
      : Error(ErrorCode::Runtime, "ProfileIncompatible: " + w) {}
};

struct TraceUnavailable : Error {
  explicit TraceUnavailable(const std::string& w)
      : Error(ErrorCode::Runtime, "TraceUnavailable: " + w) {}
};

struct PlanStalled : Error {
  explicit PlanStalled(const std::string& w) : Error(ErrorCode::Runtime, "PlanStalled: " + w) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& w) : Error(ErrorCode::Parse, "ParseError: " + w) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& w)
      : Error(ErrorCode::Validation, "ValidationError: " + w) {}
};

}  // namespace beamnet
