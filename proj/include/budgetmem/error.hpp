#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace budgetmem {

// Base for every error the library raises. The CLI maps these to exit code 3.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class invalid_candidate : public error {
 public:
  using error::error;
};

class unknown_id : public error {
 public:
  explicit unknown_id(const std::string& id)
      : error("unknown id '" + id + "'"), id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class parameter_error : public error {
 public:
  using error::error;
};

// Raised when an exhaustive audit would exceed its assignment cap.
class scope_error : public error {
 public:
  using error::error;
};

class io_error : public error {
 public:
  io_error(const std::string& path, const std::string& what) : error(what + ": " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// An exact denominator could not be certified. The CLI maps this to exit code 2.
class certification_error : public error {
 public:
  using error::error;
};

class parse_error : public error {
 public:
  parse_error(std::string field_path, const std::string& what,
              std::optional<std::size_t> byte_offset = std::nullopt)
      : error(format(field_path, what, byte_offset)),
        field_path_(std::move(field_path)),
        byte_offset_(byte_offset) {}

  const std::string& field_path() const noexcept { return field_path_; }
  std::optional<std::size_t> byte_offset() const noexcept { return byte_offset_; }

 private:
  static std::string format(const std::string& path, const std::string& what,
                            std::optional<std::size_t> offset) {
    std::string out = "parse error at " + path;
    if (offset) out += " (byte " + std::to_string(*offset) + ")";
    return out + ": " + what;
  }

  std::string field_path_;
  std::optional<std::size_t> byte_offset_;
};

}  // namespace budgetmem
