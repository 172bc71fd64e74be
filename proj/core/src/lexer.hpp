#ifndef OPEN3D_LEXER_HPP
#define OPEN3D_LEXER_HPP

#include <string>
#include <vector>

#include "open3d/model.hpp"

namespace open3d::detail {

struct Token {
  std::string text;
  int line = 0;
  int col = 0;
};

// Whitespace-separated tokenizer; '(' ')' ';' are standalone tokens.
// '#' starts a comment running to end of line; comment lines are kept
// separately so writers can stash extension markers there.
class Lexer {
 public:
  explicit Lexer(const std::string& text);

  bool eof() const { return pos_ >= tokens_.size(); }
  const Token& peek() const;
  Token next();
  // Consumes a token and requires exact text.
  void expect(const std::string& text);
  // Consumes tokens up to and including the next ';'.
  void skip_statement();

  [[noreturn]] void fail(const std::string& msg) const;

  const std::vector<std::string>& comments() const { return comments_; }

 private:
  std::vector<Token> tokens_;
  std::vector<std::string> comments_;
  std::size_t pos_ = 0;
};

}  // namespace open3d::detail

#endif
