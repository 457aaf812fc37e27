#pragma once
#include <stdexcept>
#include <string>

namespace rpl {

enum class ErrorKind {
  InvalidInput,
  UnsupportedOrder,
  Pole,
  IncompatibleGrids,
  NoGroundState,
  ConvergenceFailure,
  InstabilityDetected,
  EigensolverFailure,
  NegativeKreinSignature,
  ClassificationAmbiguous,
  KTooLarge,
  RecursionOrder,
  NearResonance,
  SingularProjection,
  IllConditioned,
  FgrUnresolved,
  UnreliableAmplitude,
  StepFailure,
  NoConvergence,
  InsufficientData,
  Config,
  Io,
};

const char* kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rpl
