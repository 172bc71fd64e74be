#include "lexer.hpp"

#include <cctype>

namespace open3d::detail {

Lexer::Lexer(const std::string& text) {
  int line = 1, col = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
      continue;
    }
    if (c == '#') {
      std::size_t end = text.find('\n', i);
      if (end == std::string::npos) end = text.size();
      comments_.push_back(text.substr(i + 1, end - i - 1));
      i = end;
      continue;
    }
    if (c == '(' || c == ')' || c == ';') {
      tokens_.push_back({std::string(1, c), line, col});
      ++i;
      ++col;
      continue;
    }
    int start_col = col;
    std::size_t start = i;
    while (i < text.size()) {
      char d = text[i];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' ||
          d == ')' || d == ';' || d == '#')
        break;
      ++i;
      ++col;
    }
    tokens_.push_back({text.substr(start, i - start), line, start_col});
  }
}

const Token& Lexer::peek() const {
  if (eof()) throw ParseError("unexpected end of input", 0, 0);
  return tokens_[pos_];
}

Token Lexer::next() {
  if (eof()) throw ParseError("unexpected end of input", 0, 0);
  return tokens_[pos_++];
}

void Lexer::expect(const std::string& text) {
  Token t = next();
  if (t.text != text)
    throw ParseError("expected '" + text + "', got '" + t.text + "'", t.line,
                     t.col);
}

void Lexer::skip_statement() {
  while (!eof()) {
    if (next().text == ";") return;
  }
}

void Lexer::fail(const std::string& msg) const {
  if (pos_ < tokens_.size())
    throw ParseError(msg, tokens_[pos_].line, tokens_[pos_].col);
  throw ParseError(msg, 0, 0);
}

}  // namespace open3d::detail
