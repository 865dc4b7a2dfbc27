#pragma once

#include <stdexcept>
#include <string>

namespace lasernoise {

// Error taxonomy mirrors the CLI exit codes: validation -> 2,
// numerical failure -> 3, I/O -> 4.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lasernoise
