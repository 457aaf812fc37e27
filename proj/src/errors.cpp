#include "rpl/errors.hpp"

namespace rpl {

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::UnsupportedOrder: return "unsupported-order";
    case ErrorKind::Pole: return "pole";
    case ErrorKind::IncompatibleGrids: return "incompatible-grids";
    case ErrorKind::NoGroundState: return "no-ground-state";
    case ErrorKind::ConvergenceFailure: return "convergence-failure";
    case ErrorKind::InstabilityDetected: return "instability-detected";
    case ErrorKind::EigensolverFailure: return "eigensolver-failure";
    case ErrorKind::NegativeKreinSignature: return "negative-krein-signature";
    case ErrorKind::ClassificationAmbiguous: return "classification-ambiguous";
    case ErrorKind::KTooLarge: return "K-too-large";
    case ErrorKind::RecursionOrder: return "recursion-order-violation";
    case ErrorKind::NearResonance: return "near-resonance";
    case ErrorKind::SingularProjection: return "singular-projection";
    case ErrorKind::IllConditioned: return "ill-conditioned";
    case ErrorKind::FgrUnresolved: return "fgr-unresolved";
    case ErrorKind::UnreliableAmplitude: return "unreliable-amplitude";
    case ErrorKind::StepFailure: return "step-failure";
    case ErrorKind::NoConvergence: return "no-convergence";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::Config: return "config-error";
    case ErrorKind::Io: return "io-error";
  }
  return "error";
}

}  // namespace rpl
