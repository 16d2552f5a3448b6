#include "redbench/sql_analyzer.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include <fmt/format.h>

#include "redbench/error.hpp"

namespace redbench {

namespace {

enum class TokenKind { word, quoted, lparen, rparen, comma, dot, semicolon, other };

struct Token {
  TokenKind kind;
  std::string text;  // lowercased for words and quoted identifiers
  std::size_t offset;
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string excerpt(std::string_view sql, std::size_t offset, std::size_t length = 40) {
  offset = std::min(offset, sql.size());
  return std::string(sql.substr(offset, length));
}

bool is_word_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

std::vector<Token> tokenize(std::string_view sql) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = sql.size();
  while (i < n) {
    const char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      while (i < n && sql[i] != '\n') ++i;
    } else if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
      const auto end = sql.find("*/", i + 2);
      if (end == std::string_view::npos) {
        throw AnalysisError(excerpt(sql, i), "unterminated block comment");
      }
      i = end + 2;
    } else if (c == '\'') {
      const std::size_t start = i++;
      while (true) {
        if (i >= n) throw AnalysisError(excerpt(sql, start), "unterminated string literal");
        if (sql[i] == '\'') {
          if (i + 1 < n && sql[i + 1] == '\'') {
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        ++i;
      }
      tokens.push_back({TokenKind::other, "'", start});
    } else if (c == '"' || c == '`') {
      const std::size_t start = i;
      const auto end = sql.find(c, i + 1);
      if (end == std::string_view::npos) {
        throw AnalysisError(excerpt(sql, start), "unterminated quoted identifier");
      }
      tokens.push_back({TokenKind::quoted, lower(sql.substr(i + 1, end - i - 1)), start});
      i = end + 1;
    } else if (is_word_start(c)) {
      const std::size_t start = i;
      while (i < n && is_word_char(sql[i])) ++i;
      tokens.push_back({TokenKind::word, lower(sql.substr(start, i - start)), start});
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = i;
      while (i < n && (std::isalnum(static_cast<unsigned char>(sql[i])) || sql[i] == '.')) ++i;
      tokens.push_back({TokenKind::other, std::string(sql.substr(start, i - start)), start});
    } else {
      TokenKind kind = TokenKind::other;
      switch (c) {
        case '(': kind = TokenKind::lparen; break;
        case ')': kind = TokenKind::rparen; break;
        case ',': kind = TokenKind::comma; break;
        case '.': kind = TokenKind::dot; break;
        case ';': kind = TokenKind::semicolon; break;
        default: break;
      }
      tokens.push_back({kind, std::string(1, c), i});
      ++i;
    }
  }
  return tokens;
}

// Keywords that close a FROM clause at the current nesting level.
const std::unordered_set<std::string>& clause_terminators() {
  static const std::unordered_set<std::string> words = {
      "where",  "group",  "having", "order",  "limit",     "union",  "intersect",
      "except", "window", "qualify", "offset", "fetch",    "returning", "minus"};
  return words;
}

// Words that can never name a table where one is expected.
const std::unordered_set<std::string>& non_table_words() {
  static const std::unordered_set<std::string> words = {
      "select", "from", "where", "join", "on",  "using", "inner", "left", "right", "full",
      "outer",  "cross", "natural", "as", "and", "or",   "not",   "group", "order", "having",
      "limit",  "union", "intersect", "except", "with", "values"};
  return words;
}

enum class CteState { none, expect_name, after_name, expect_body, after_body };
enum class Opened { plain, from_item, cte_columns, cte_body };

struct Level {
  Opened opened = Opened::plain;
  std::size_t open_offset = 0;
  bool select_capable = false;
  bool in_from = false;
  bool expect_table = false;
  bool statement_start = true;
  std::size_t from_offset = 0;
  CteState cte = CteState::none;
};

class Scanner {
 public:
  Scanner(std::string_view sql, const AnalyzeOptions& options)
      : sql_(sql), options_(options), tokens_(tokenize(sql)) {}

  SqlAnalysis run() {
    levels_.push_back(Level{});
    levels_.back().select_capable = true;

    for (pos_ = 0; pos_ < tokens_.size(); ++pos_) step(tokens_[pos_]);

    if (levels_.size() > 1) {
      throw AnalysisError(excerpt(sql_, levels_.back().open_offset),
                          "unbalanced parentheses: '(' is never closed");
    }
    check_from_resolved(levels_.back());

    SqlAnalysis out;
    out.cte_names.assign(cte_names_.begin(), cte_names_.end());
    std::sort(out.cte_names.begin(), out.cte_names.end());
    for (auto& [name, offset] : candidates_) {
      if (options_.cte_exclusion && cte_names_.count(name)) continue;
      out.references.push_back(name);
    }
    if (out.references.empty()) {
      throw AnalysisError(excerpt(sql_, 0), "statement references no base table");
    }
    out.scanset = Scanset(out.references);
    return out;
  }

 private:
  Level& top() { return levels_.back(); }

  const Token* peek(std::size_t ahead = 1) const {
    return pos_ + ahead < tokens_.size() ? &tokens_[pos_ + ahead] : nullptr;
  }

  void check_from_resolved(const Level& level) const {
    if (level.in_from && level.expect_table) {
      throw AnalysisError(excerpt(sql_, level.from_offset),
                          "FROM clause does not resolve to a table");
    }
  }

  void step(const Token& t) {
    Level& level = top();
    const bool at_start = level.statement_start;
    level.statement_start = false;

    switch (t.kind) {
      case TokenKind::lparen: open_paren(t); return;
      case TokenKind::rparen: close_paren(t); return;
      case TokenKind::comma:
        if (level.cte == CteState::after_body) {
          level.cte = CteState::expect_name;
        } else if (level.in_from) {
          check_from_resolved(level);
          level.expect_table = true;
        }
        return;
      case TokenKind::semicolon:
        if (levels_.size() == 1) {
          check_from_resolved(level);
          level = Level{};
          level.select_capable = true;
        }
        return;
      case TokenKind::quoted:
        if (level.cte == CteState::expect_name) {
          cte_names_.insert(t.text);
          level.cte = CteState::after_name;
        } else if (level.expect_table) {
          take_table(t);
        }
        return;
      case TokenKind::word: word(t, at_start); return;
      default: return;
    }
  }

  void word(const Token& t, bool at_start) {
    Level& level = top();
    const std::string& w = t.text;

    switch (level.cte) {
      case CteState::expect_name:
        if (w != "recursive") {
          cte_names_.insert(w);
          level.cte = CteState::after_name;
        }
        return;
      case CteState::after_name:
        if (w == "as") level.cte = CteState::expect_body;
        return;
      case CteState::expect_body:
        return;  // MATERIALIZED / NOT MATERIALIZED
      case CteState::after_body:
      case CteState::none:
        break;
    }

    if (w == "with" && at_start) {
      level.select_capable = true;
      level.in_from = false;
      level.expect_table = false;
      level.cte = CteState::expect_name;
      return;
    }
    if (w == "select") {
      if (!at_start) check_from_resolved(level);
      level.select_capable = true;
      level.in_from = false;
      level.expect_table = false;
      level.cte = CteState::none;
      return;
    }
    if (w == "from") {
      if (!level.select_capable) return;  // EXTRACT(x FROM y), TRIM(... FROM ...)
      check_from_resolved(level);
      level.in_from = true;
      level.expect_table = true;
      level.from_offset = t.offset;
      return;
    }
    if (!level.in_from) return;

    if (w == "join") {
      check_from_resolved(level);
      level.expect_table = true;
      return;
    }
    if (w == "on" || w == "using") {
      check_from_resolved(level);
      level.expect_table = false;
      return;
    }
    if (clause_terminators().count(w)) {
      check_from_resolved(level);
      level.in_from = false;
      level.expect_table = false;
      return;
    }
    if (!level.expect_table) return;
    if (w == "lateral" || w == "only") return;
    if (w == "values") {
      level.in_from = false;
      level.expect_table = false;
      return;
    }
    if (non_table_words().count(w)) {
      throw AnalysisError(excerpt(sql_, level.from_offset),
                          fmt::format("expected a table name, found '{}'", w));
    }
    take_table(t);
  }

  void take_table(const Token& first) {
    Level& level = top();
    std::string name = first.text;
    while (true) {
      const Token* dot = peek();
      const Token* part = peek(2);
      if (!dot || dot->kind != TokenKind::dot || !part ||
          (part->kind != TokenKind::word && part->kind != TokenKind::quoted)) {
        break;
      }
      name = part->text;  // schema-qualified: keep the table component
      pos_ += 2;
    }
    level.expect_table = false;
    if (const Token* next = peek(); next && next->kind == TokenKind::lparen) {
      return;  // table function such as unnest(...)
    }
    candidates_.emplace_back(std::move(name), first.offset);
  }

  void open_paren(const Token& t) {
    Level& parent = top();
    Level child;
    child.open_offset = t.offset;
    if (parent.cte == CteState::after_name) {
      child.opened = Opened::cte_columns;
    } else if (parent.cte == CteState::expect_body) {
      child.opened = Opened::cte_body;
    } else if (parent.expect_table) {
      parent.expect_table = false;
      child.opened = Opened::from_item;
      // Either a derived table (SELECT follows) or a parenthesised join list.
      child.select_capable = true;
      child.in_from = true;
      child.expect_table = true;
      child.from_offset = t.offset;
    }
    levels_.push_back(child);
  }

  void close_paren(const Token& t) {
    if (levels_.size() == 1) {
      throw AnalysisError(excerpt(sql_, t.offset),
                          "unbalanced parentheses: unexpected ')'");
    }
    check_from_resolved(top());
    const Opened opened = top().opened;
    levels_.pop_back();
    if (opened == Opened::cte_body) top().cte = CteState::after_body;
  }

  std::string_view sql_;
  AnalyzeOptions options_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<Level> levels_;
  std::vector<std::pair<std::string, std::size_t>> candidates_;
  std::unordered_set<std::string> cte_names_;
};

}  // namespace

SqlAnalysis analyze_sql(std::string_view sql, const AnalyzeOptions& options) {
  return Scanner(sql, options).run();
}

}  // namespace redbench
