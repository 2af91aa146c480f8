#pragma once

// Tokenizer shared by the formula and first-order parsers.

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>

#include "slr/formula.hpp"

namespace slr::detail {

enum class Tok { End, Ident, Var, Num, Sym };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  long num = 0;
  std::size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) { advance(); }

  const Token& peek() const { return cur_; }

  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    cur_ = Token{};
    cur_.pos = i_;
    if (i_ >= s_.size()) return;
    char c = s_[i_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i_;
      while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
      cur_.kind = Tok::Num;
      cur_.text = std::string(s_.substr(i_, j - i_));
      if (cur_.text.size() > 9) throw ParseError("number too large", i_);
      cur_.num = std::stol(cur_.text);
      i_ = j;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i_;
      while (j < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_'))
        ++j;
      std::string word(s_.substr(i_, j - i_));
      if (word == "reach" && j < s_.size() && s_[j] == '+') {
        word += '+';
        ++j;
      }
      if (word.size() >= 2 && word[0] == 'x' &&
          std::all_of(word.begin() + 1, word.end(),
                      [](char d) { return std::isdigit(static_cast<unsigned char>(d)); })) {
        cur_.kind = Tok::Var;
        if (word.size() > 4) throw ParseError("variable index too large", i_);
        cur_.num = std::stol(word.substr(1));
        if (cur_.num < 1) throw ParseError("variable index must be >= 1", i_);
        if (cur_.num > kMaxVar) throw ParseError("variable index too large", i_);
      } else {
        cur_.kind = Tok::Ident;
      }
      cur_.text = word;
      i_ = j;
      return;
    }
    static const char* syms[] = {"<=>", "|->", "-*", "-o", "~>", "!=", "/\\", "\\/",
                                 "=>",  ">=",  "<=", "(",  ")",  ",",  ";",  "=",
                                 "*",   "[",   "]",  "_",  "."};
    for (const char* sym : syms) {
      std::string_view sv(sym);
      if (s_.substr(i_, sv.size()) == sv) {
        cur_.kind = Tok::Sym;
        cur_.text = std::string(sv);
        i_ += sv.size();
        return;
      }
    }
    throw ParseError(std::string("unexpected character '") + c + "'", i_);
  }

  std::string_view s_;
  std::size_t i_ = 0;
  Token cur_;
};

}  // namespace slr::detail
