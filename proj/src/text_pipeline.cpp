#include "binmt/text_pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace binmt {

namespace {

const std::unordered_map<std::string, std::string>& punct_map() {
  static const std::unordered_map<std::string, std::string> m = {
      {"“", "\""}, {"”", "\""}, {"„", "\""}, {"«", "\""}, {"»", "\""},
      {"‘", "'"},  {"’", "'"},  {"‚", "'"},  {"‹", "'"},  {"›", "'"},
      {"–", "-"},  {"—", "-"},  {"―", "-"},  {"−", "-"},
      {"…", "..."},
  };
  return m;
}

bool is_unicode_space(const std::string& cp) {
  if (cp == " " || cp == " " || cp == "　" || cp == " " || cp == " ")
    return true;
  // U+2000..U+200B
  if (cp.size() == 3 && static_cast<unsigned char>(cp[0]) == 0xE2 &&
      static_cast<unsigned char>(cp[1]) == 0x80) {
    unsigned char c = static_cast<unsigned char>(cp[2]);
    return c >= 0x80 && c <= 0x8B;
  }
  return false;
}

bool is_control(const std::string& cp) {
  if (cp.size() == 1) {
    unsigned char c = static_cast<unsigned char>(cp[0]);
    return c < 0x20 || c == 0x7F;
  }
  // C1 block U+0080..U+009F
  return cp.size() == 2 && static_cast<unsigned char>(cp[0]) == 0xC2 &&
         static_cast<unsigned char>(cp[1]) < 0xA0;
}

std::string lowercase_ascii(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_word_char(const std::string& cp) {
  if (cp.size() > 1) return true;  // non-ASCII treated as letters
  unsigned char c = static_cast<unsigned char>(cp[0]);
  return std::isalnum(c) != 0;
}

}  // namespace

std::string normalize(const std::string& line) {
  std::string mapped;
  mapped.reserve(line.size());
  for (const auto& cp : utf8_chars(line)) {
    auto it = punct_map().find(cp);
    if (it != punct_map().end()) {
      mapped += it->second;
    } else if (is_unicode_space(cp) || cp == "\t") {
      mapped += ' ';
    } else if (is_control(cp)) {
      // dropped
    } else {
      mapped += cp;
    }
  }
  std::string out;
  out.reserve(mapped.size());
  bool in_space = true;  // swallow leading spaces
  for (char c : mapped) {
    if (c == ' ') {
      if (!in_space) out += ' ';
      in_space = true;
    } else {
      out += c;
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

Sentence tokenize(const std::string& text, const std::string& lang) {
  Sentence s;
  s.lang = lang;
  for (const auto& word : split_ws(text)) {
    auto cps = utf8_chars(word);
    // split into maximal runs of word / non-word characters
    std::vector<std::string> runs;
    std::vector<bool> wordish;
    for (const auto& cp : cps) {
      bool w = is_word_char(cp);
      if (runs.empty() || wordish.back() != w) {
        runs.push_back(cp);
        wordish.push_back(w);
      } else {
        runs.back() += cp;
      }
    }
    // glue an apostrophe run onto the following word run: don't -> don 't
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
      if (!wordish[i] && runs[i] == "'" && wordish[i + 1]) {
        runs[i + 1] = runs[i] + runs[i + 1];
        runs[i].clear();
      }
    }
    for (const auto& r : runs)
      if (!r.empty()) s.tokens.push_back(r);
  }
  return s;
}

TruecaseModel learn_truecaser(const std::vector<Sentence>& corpus) {
  if (corpus.empty()) throw std::runtime_error("learn_truecaser: empty corpus");
  struct FormStats {
    long non_initial = 0;
    long all = 0;
    long first_seen = 0;  // global occurrence index, for tie-breaking
  };
  std::map<std::string, std::map<std::string, FormStats>> stats;
  long occurrence = 0;
  for (const auto& sent : corpus) {
    for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
      const std::string& form = sent.tokens[i];
      auto& fs = stats[lowercase_ascii(form)][form];
      if (fs.all == 0) fs.first_seen = occurrence;
      fs.all++;
      if (i > 0) fs.non_initial++;
      occurrence++;
    }
  }
  TruecaseModel model;
  for (const auto& [lc, forms] : stats) {
    bool have_non_initial = std::any_of(forms.begin(), forms.end(),
                                        [](const auto& f) { return f.second.non_initial > 0; });
    // tie-break: prefer the all-lowercase form, then earliest occurrence
    const std::string* best = nullptr;
    long best_count = -1;
    long best_seen = 0;
    for (const auto& [form, fs] : forms) {
      long count = have_non_initial ? fs.non_initial : fs.all;
      bool better = count > best_count;
      if (count == best_count) {
        bool cur_lc = (*best == lc);
        bool new_lc = (form == lc);
        better = (!cur_lc && new_lc) || (cur_lc == new_lc && fs.first_seen < best_seen);
      }
      if (better) {
        best = &form;
        best_count = count;
        best_seen = fs.first_seen;
      }
    }
    model.best_form[lc] = {*best, best_count};
  }
  return model;
}

Sentence apply_truecase(const TruecaseModel& model, const Sentence& s) {
  if (s.empty()) return s;
  Sentence out = s;
  auto it = model.best_form.find(lowercase_ascii(out.tokens[0]));
  if (it != model.best_form.end()) out.tokens[0] = it->second.first;
  return out;
}

std::vector<std::pair<Sentence, Sentence>> filter_parallel(
    const std::vector<std::pair<Sentence, Sentence>>& pairs, std::size_t max_len) {
  std::vector<std::pair<Sentence, Sentence>> out;
  for (const auto& p : pairs) {
    std::size_t a = p.first.size(), b = p.second.size();
    if (a >= 1 && a <= max_len && b >= 1 && b <= max_len) out.push_back(p);
  }
  return out;
}

std::vector<Sentence> filter_mono(const std::vector<Sentence>& lines, std::size_t min_exclusive) {
  std::vector<Sentence> out;
  for (const auto& s : lines)
    if (s.size() > min_exclusive) out.push_back(s);
  return out;
}

void TruecaseModel::save(const std::filesystem::path& file) const {
  std::vector<std::string> lines;
  for (const auto& [lc, fc] : best_form)
    lines.push_back(lc + "\t" + fc.first + "\t" + std::to_string(fc.second));
  write_lines_atomic(file, lines);
}

TruecaseModel TruecaseModel::load(const std::filesystem::path& file) {
  TruecaseModel m;
  for (const auto& line : read_lines(file)) {
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos)
      throw std::runtime_error("bad truecase line: " + line);
    m.best_form[line.substr(0, t1)] = {line.substr(t1 + 1, t2 - t1 - 1),
                                       std::stol(line.substr(t2 + 1))};
  }
  return m;
}

}  // namespace binmt
