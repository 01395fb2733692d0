#pragma once

#include <stdexcept>
#include <string>

namespace sfcsim {

// Invalid user input (config, topology, weight file). The CLI maps it to exit 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Output could not be written. The CLI maps it to exit 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sfcsim
