#pragma once

// Question/document pairs with answer-string supervision, plus the
// line-delimited JSON dataset format shared by every CLI subcommand:
//
//   {"id": str, "question": str, "paragraphs": [str, ...], "answers": [str, ...]}
//
// Paragraph and question strings are lowercased, stripped of punctuation and
// whitespace-tokenized on load. Paragraph order is the ranking order.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsqa/errors.hpp"

namespace dsqa {

inline constexpr int kDefaultMaxParagraphs = 8;
inline constexpr int kDefaultMaxTokens = 400;

struct Token {
  std::string text;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Paragraph {
  int index = 0;
  std::vector<Token> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
};

struct AnswerString {
  std::string raw;
  std::string normalized;
};

// The set A. Entries are unique by normalized form; the first raw
// spelling of each normalized form is kept.
class AnswerStringSet {
 public:
  AnswerStringSet() = default;
  explicit AnswerStringSet(std::span<const std::string> raw_strings);

  void add(std::string raw);

  const std::vector<AnswerString>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  bool contains_normalized(std::string_view normalized) const;

 private:
  std::vector<AnswerString> entries_;
};

struct DocumentQuestionPair {
  std::string id;
  std::vector<Token> question;
  std::vector<Paragraph> paragraphs;
  AnswerStringSet answers;
};

namespace detail {

inline bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

inline bool is_article(std::string_view w) { return w == "a" || w == "an" || w == "the"; }

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

namespace detail {

// Lowercase (ASCII) and strip ASCII punctuation. Bytes >= 0x80 pass through.
inline std::string clean_chars(std::string_view s) {
  std::string cleaned;
  cleaned.reserve(s.size());
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::ispunct(c)) continue;
    cleaned.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
  }
  return cleaned;
}

}  // namespace detail

// Cleaned characters, collapsed whitespace, leading articles dropped.
inline std::string normalize_string(std::string_view s) {
  auto words = detail::split_ws(detail::clean_chars(s));
  std::size_t first = 0;
  while (first < words.size() && detail::is_article(words[first])) ++first;
  std::string out;
  for (std::size_t i = first; i < words.size(); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += words[i];
  }
  return out;
}

// Articles stay: they are ordinary tokens inside a paragraph.
inline std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> tokens;
  for (auto& w : detail::split_ws(detail::clean_chars(s))) tokens.push_back(Token{std::move(w)});
  return tokens;
}

inline std::string join_tokens(std::span<const Token> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t.text;
  }
  return out;
}

// Normalized surface string of tokens[begin..end] (inclusive).
inline std::string span_text(const Paragraph& p, int begin, int end) {
  std::span<const Token> all(p.tokens);
  return normalize_string(join_tokens(all.subspan(begin, end - begin + 1)));
}

inline AnswerStringSet::AnswerStringSet(std::span<const std::string> raw_strings) {
  for (const auto& s : raw_strings) add(s);
}

inline void AnswerStringSet::add(std::string raw) {
  auto norm = normalize_string(raw);
  if (contains_normalized(norm)) return;
  entries_.push_back(AnswerString{std::move(raw), std::move(norm)});
}

inline bool AnswerStringSet::contains_normalized(std::string_view normalized) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const AnswerString& a) { return a.normalized == normalized; });
}

// Builds a pair from raw strings, applying the paragraph cap, the token
// cap and empty-paragraph removal, in that order.
inline DocumentQuestionPair make_pair(std::string id, std::string_view question,
                                      std::span<const std::string> paragraphs,
                                      std::span<const std::string> answers,
                                      int k_max = kDefaultMaxParagraphs,
                                      int t_max = kDefaultMaxTokens) {
  if (k_max < 1 || t_max < 1) throw DomainError("k_max and t_max must be >= 1");
  DocumentQuestionPair pair;
  pair.id = std::move(id);
  pair.question = tokenize(question);
  const std::size_t keep = std::min<std::size_t>(paragraphs.size(), static_cast<std::size_t>(k_max));
  for (std::size_t k = 0; k < keep; ++k) {
    auto tokens = tokenize(paragraphs[k]);
    if (tokens.size() > static_cast<std::size_t>(t_max)) tokens.resize(static_cast<std::size_t>(t_max));
    if (tokens.empty()) continue;
    pair.paragraphs.push_back(Paragraph{static_cast<int>(pair.paragraphs.size()), std::move(tokens)});
  }
  pair.answers = AnswerStringSet(answers);
  return pair;
}

namespace detail {

inline std::vector<std::string> string_array(const nlohmann::json& j, const char* field,
                                             std::size_t line) {
  if (!j.contains(field)) throw SchemaError(line, std::string("missing field '") + field + "'");
  const auto& arr = j.at(field);
  if (!arr.is_array()) throw SchemaError(line, std::string("field '") + field + "' must be an array");
  std::vector<std::string> out;
  for (const auto& v : arr) {
    if (!v.is_string()) throw SchemaError(line, std::string("field '") + field + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

inline std::string string_field(const nlohmann::json& j, const char* field, std::size_t line) {
  if (!j.contains(field)) throw SchemaError(line, std::string("missing field '") + field + "'");
  if (!j.at(field).is_string()) throw SchemaError(line, std::string("field '") + field + "' must be a string");
  return j.at(field).get<std::string>();
}

}  // namespace detail

inline DocumentQuestionPair parse_record(std::string_view line_text, std::size_t line,
                                         int k_max = kDefaultMaxParagraphs,
                                         int t_max = kDefaultMaxTokens) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line, e.what());
  }
  if (!j.is_object()) throw ParseError(line, "record is not a JSON object");
  auto id = detail::string_field(j, "id", line);
  auto question = detail::string_field(j, "question", line);
  auto paragraphs = detail::string_array(j, "paragraphs", line);
  auto answers = detail::string_array(j, "answers", line);
  return make_pair(std::move(id), question, paragraphs, answers, k_max, t_max);
}

// Blank lines are skipped; line numbers in errors count them.
inline std::vector<DocumentQuestionPair> read_dataset(std::istream& in,
                                                      int k_max = kDefaultMaxParagraphs,
                                                      int t_max = kDefaultMaxTokens) {
  std::vector<DocumentQuestionPair> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (std::all_of(text.begin(), text.end(), [](char c) { return detail::is_space(static_cast<unsigned char>(c)); }))
      continue;
    out.push_back(parse_record(text, line, k_max, t_max));
  }
  return out;
}

inline std::vector<DocumentQuestionPair> load_dataset(const std::string& path,
                                                      int k_max = kDefaultMaxParagraphs,
                                                      int t_max = kDefaultMaxTokens) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset '" + path + "'");
  return read_dataset(in, k_max, t_max);
}

inline nlohmann::json to_json(const DocumentQuestionPair& pair) {
  nlohmann::json paragraphs = nlohmann::json::array();
  for (const auto& p : pair.paragraphs) paragraphs.push_back(join_tokens(p.tokens));
  nlohmann::json answers = nlohmann::json::array();
  for (const auto& a : pair.answers.entries()) answers.push_back(a.raw);
  return {{"id", pair.id},
          {"question", join_tokens(pair.question)},
          {"paragraphs", std::move(paragraphs)},
          {"answers", std::move(answers)}};
}

inline void write_dataset(std::ostream& out, std::span<const DocumentQuestionPair> pairs) {
  for (const auto& p : pairs) out << to_json(p).dump() << '\n';
}

inline void save_dataset(const std::string& path, std::span<const DocumentQuestionPair> pairs) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset '" + path + "'");
  write_dataset(out, pairs);
}

}  // namespace dsqa
