#pragma once

#include <stdexcept>
#include <string>

namespace ecgmm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ECGMM_DEFINE_ERROR(Name)            \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  };

ECGMM_DEFINE_ERROR(FormatError)
ECGMM_DEFINE_ERROR(IntegrityError)
ECGMM_DEFINE_ERROR(ValueError)
ECGMM_DEFINE_ERROR(ShapeError)
ECGMM_DEFINE_ERROR(ConfigError)
ECGMM_DEFINE_ERROR(NumericError)
ECGMM_DEFINE_ERROR(StateError)
ECGMM_DEFINE_ERROR(UnsupportedError)
ECGMM_DEFINE_ERROR(SamplingError)
ECGMM_DEFINE_ERROR(InputError)
ECGMM_DEFINE_ERROR(TrainingError)

#undef ECGMM_DEFINE_ERROR

}  // namespace ecgmm
