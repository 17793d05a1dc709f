#pragma once

#include <stdexcept>
#include <string>

namespace sbmlab {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SBMLAB_DEFINE_ERROR(Name)                      \
  class Name : public Error {                          \
   public:                                             \
    explicit Name(const std::string& msg) : Error(msg) {} \
  }

SBMLAB_DEFINE_ERROR(NegativeRate);        // rate/probability parameters out of range
SBMLAB_DEFINE_ERROR(RangeError);          // scalar argument outside its domain
SBMLAB_DEFINE_ERROR(SizeMismatch);        // container sizes inconsistent
SBMLAB_DEFINE_ERROR(LabelOutOfRange);     // labeling not total or label outside [0, q)
SBMLAB_DEFINE_ERROR(BadLength);           // walk length < 1
SBMLAB_DEFINE_ERROR(TooLarge);            // instance exceeds an enumeration/recursion guard
SBMLAB_DEFINE_ERROR(InsufficientCandidates);  // representative pool too thin
SBMLAB_DEFINE_ERROR(EmptyInterval);       // walk-length schedule constraints contradictory
SBMLAB_DEFINE_ERROR(NumericalUnderflow);  // all belief weights vanished
SBMLAB_DEFINE_ERROR(NumericalOverflow);   // walk statistics left the representable range
SBMLAB_DEFINE_ERROR(DegenerateGap);       // detection expectations too close to separate
SBMLAB_DEFINE_ERROR(ConfigError);         // sweep configuration unreadable/inconsistent
SBMLAB_DEFINE_ERROR(SchemaMismatch);      // serialized graph fails structural validation
SBMLAB_DEFINE_ERROR(IoError);             // file could not be opened/written

#undef SBMLAB_DEFINE_ERROR

}  // namespace sbmlab
