#pragma once

#include <stdexcept>
#include <string>

namespace sdrloc {

struct DimensionMismatch : std::invalid_argument {
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct LengthMismatch : std::invalid_argument {
  explicit LengthMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct NotHermitian : std::invalid_argument {
  explicit NotHermitian(const std::string& what) : std::invalid_argument(what) {}
};

struct NotPsd : std::invalid_argument {
  explicit NotPsd(const std::string& what) : std::invalid_argument(what) {}
};

struct NotUnitDiagonal : std::invalid_argument {
  explicit NotUnitDiagonal(const std::string& what) : std::invalid_argument(what) {}
};

struct NotBoundary : std::invalid_argument {
  explicit NotBoundary(const std::string& what) : std::invalid_argument(what) {}
};

struct DegenerateRow : std::invalid_argument {
  explicit DegenerateRow(const std::string& what) : std::invalid_argument(what) {}
};

struct NonPositiveRange : std::runtime_error {
  explicit NonPositiveRange(const std::string& what) : std::runtime_error(what) {}
};

struct RankDeficient : std::runtime_error {
  explicit RankDeficient(const std::string& what) : std::runtime_error(what) {}
};

// Parse failures carry the 1-based line number of the offending input.
struct ParseError : std::runtime_error {
  ParseError(int line_number, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_number) + ": " + what),
        line(line_number) {}
  int line;
};

}  // namespace sdrloc
