#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace binmt {

// One sentence: whitespace-free tokens plus a language id ("en", "tl", ...).
struct Sentence {
  std::vector<std::string> tokens;
  std::string lang;

  Sentence() = default;
  Sentence(std::vector<std::string> toks, std::string language = "")
      : tokens(std::move(toks)), lang(std::move(language)) {}

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool operator==(const Sentence& o) const { return tokens == o.tokens; }
};

std::string join_tokens(const std::vector<std::string>& tokens);
std::vector<std::string> split_ws(const std::string& line);

// Decodes a UTF-8 string into code-point substrings. Throws on malformed input.
std::vector<std::string> utf8_chars(const std::string& s);

// FNV-1a over raw bytes; used to fingerprint corpora and artifacts.
std::uint64_t fnv1a(const std::string& data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t hash_lines(const std::vector<std::string>& lines);
std::string hash_hex(std::uint64_t h);

std::vector<std::string> read_lines(const std::filesystem::path& file);
// Writes via temp file + rename so readers never see partial output.
void write_lines_atomic(const std::filesystem::path& file, const std::vector<std::string>& lines);
void write_text_atomic(const std::filesystem::path& file, const std::string& text);

std::vector<Sentence> read_sentences(const std::filesystem::path& file, const std::string& lang);
void write_sentences_atomic(const std::filesystem::path& file, const std::vector<Sentence>& sents);

}  // namespace binmt
