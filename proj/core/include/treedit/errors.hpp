#pragma once

#include <stdexcept>
#include <string>

namespace treedit {

/// Lexical or syntactic error in an input text. line/col are 1-based.
class ParseError : public std::runtime_error {
public:
  ParseError(std::string msg, int line, int col)
      : std::runtime_error(std::move(msg)), line(line), col(col) {}
  int line;
  int col;
};

/// An edit script referenced a dead node, moved a node into its own
/// subtree, or otherwise could not be applied.
class ApplyError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A script operation has no encoding as a path in the augmented tree.
class UnrepresentableError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A gold operation is missing from the enumerated candidate list.
class CoverageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed corpus layout, record file, or checkpoint.
class DataError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace treedit
