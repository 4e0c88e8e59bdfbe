#pragma once

#include <stdexcept>
#include <string>

namespace stochsort {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define STOCHSORT_DEFINE_ERROR(Name)                  \
  class Name : public Error {                         \
   public:                                            \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

STOCHSORT_DEFINE_ERROR(InstanceTooSmall);
STOCHSORT_DEFINE_ERROR(IncompleteArray);
STOCHSORT_DEFINE_ERROR(EmptyInput);
STOCHSORT_DEFINE_ERROR(NonMonotoneQuantile);
STOCHSORT_DEFINE_ERROR(InvalidConfig);
STOCHSORT_DEFINE_ERROR(ArrayFull);
STOCHSORT_DEFINE_ERROR(CellOccupied);
STOCHSORT_DEFINE_ERROR(BucketFull);
STOCHSORT_DEFINE_ERROR(TooLarge);
STOCHSORT_DEFINE_ERROR(IoError);

#undef STOCHSORT_DEFINE_ERROR

}  // namespace stochsort
