#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lfhc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class MissingView : public Error {
 public:
  MissingView(int row, int col, const std::string& path)
      : Error("missing view (" + std::to_string(row) + "," + std::to_string(col) + "): " + path),
        row_(row), col_(col), path_(path) {}
  int row() const { return row_; }
  int col() const { return col_; }
  const std::string& path() const { return path_; }

 private:
  int row_;
  int col_;
  std::string path_;
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error("dimension mismatch: " + what) {}
};

class ImageReadError : public Error {
 public:
  ImageReadError(const std::string& path, const std::string& why)
      : Error("cannot read image " + path + ": " + why), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class ImageWriteError : public Error {
 public:
  ImageWriteError(const std::string& path, const std::string& why)
      : Error("cannot write image " + path + ": " + why) {}
};

class UnsupportedGrid : public Error {
 public:
  explicit UnsupportedGrid(int grid)
      : Error("no scan order tables for a " + std::to_string(grid) + "x" + std::to_string(grid) +
              " grid"),
        grid_(grid) {}
  int grid() const { return grid_; }

 private:
  int grid_;
};

class EmptyInput : public Error {
 public:
  explicit EmptyInput(const std::string& what) : Error("empty input: " + what) {}
};

class NonFiniteInput : public Error {
 public:
  explicit NonFiniteInput(const std::string& what) : Error("non-finite input: " + what) {}
};

/// Raised for malformed coded data. `offset()` is the byte position at which decoding failed.
class DecodeError : public Error {
 public:
  DecodeError(std::size_t offset, const std::string& what)
      : Error("decode error at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class PayloadCountMismatch : public DecodeError {
 public:
  PayloadCountMismatch(std::size_t offset, std::size_t expected, std::size_t actual)
      : DecodeError(offset, "expected " + std::to_string(expected) + " payloads, found " +
                                std::to_string(actual)),
        expected_(expected), actual_(actual) {}
  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class ExternalCodecError : public Error {
 public:
  using Error::Error;
};

}  // namespace lfhc
