#pragma once

#include <stdexcept>
#include <string>

namespace avecq {

/// Root of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define AVECQ_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

// curve_crypto
AVECQ_DEFINE_ERROR(EncodingError);
AVECQ_DEFINE_ERROR(DomainError);
AVECQ_DEFINE_ERROR(CodecError);

// merkle_accumulator
AVECQ_DEFINE_ERROR(CapacityError);
AVECQ_DEFINE_ERROR(OutOfRangeError);

// relations
AVECQ_DEFINE_ERROR(MalformedStatement);
AVECQ_DEFINE_ERROR(RelationUnsatisfied);

// policy_engine
AVECQ_DEFINE_ERROR(PolicyError);

// ledger_sim
AVECQ_DEFINE_ERROR(InsufficientFunds);
AVECQ_DEFINE_ERROR(PhaseViolation);
AVECQ_DEFINE_ERROR(DeadlinePassed);
AVECQ_DEFINE_ERROR(EscrowUnderflow);
AVECQ_DEFINE_ERROR(LedgerError);

// protocol_actors
AVECQ_DEFINE_ERROR(DuplicateIdentifier);
AVECQ_DEFINE_ERROR(ThresholdNotCleared);
AVECQ_DEFINE_ERROR(ProtocolError);
AVECQ_DEFINE_ERROR(MalformedEvidence);

// harness_cli
AVECQ_DEFINE_ERROR(ConfigError);
AVECQ_DEFINE_ERROR(FixtureError);

#undef AVECQ_DEFINE_ERROR

}  // namespace avecq
