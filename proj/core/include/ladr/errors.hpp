#pragma once

#include <stdexcept>
#include <string>

namespace ladr {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingImage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidBox : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateBox : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CoincidentKeypoints : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteLoss : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyDataset : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ladr
