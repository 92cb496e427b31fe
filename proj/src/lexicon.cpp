// Copyright 2026 The speechcaps-forge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "speechcaps/lexicon.hpp"

#include <array>
#include <cctype>
#include <sstream>

#include "speechcaps/error.hpp"
#include "speechcaps/jsonl.hpp"

namespace speechcaps {

namespace {

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

bool is_digraph(char a, char b) {
  return (b == 'h' && (a == 't' || a == 's' || a == 'c' || a == 'p' || a == 'w')) ||
         (a == 'c' && b == 'k');
}

constexpr std::array<std::string_view, 10> kDigitWords = {
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"};

std::string normalize_token(std::string_view raw) {
  std::string out;
  for (char c : raw) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) out.push_back(static_cast<char>(std::tolower(u)));
  }
  return out;
}

}  // namespace

void PhonemeLexicon::add(std::string_view word, int phonemes) {
  counts_.try_emplace(normalize_token(word), phonemes);
}

int PhonemeLexicon::lookup(std::string_view normalized_word) const {
  auto it = counts_.find(std::string(normalized_word));
  return it == counts_.end() ? -1 : it->second;
}

PhonemeLexicon PhonemeLexicon::parse(std::string_view text) {
  PhonemeLexicon lex;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.rfind(";;;", 0) == 0 || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word.size() > 3 && word.back() == ')') continue;  // WORD(2) variant
    int n = 0;
    std::string ph;
    while (ls >> ph) ++n;
    if (n > 0) lex.add(word, n);
  }
  return lex;
}

PhonemeLexicon PhonemeLexicon::load(const std::filesystem::path& path) {
  return parse(read_text(path));
}

std::vector<std::string> normalize_words(std::string_view transcript) {
  std::vector<std::string> words;
  std::istringstream in{std::string(transcript)};
  std::string raw;
  while (in >> raw) {
    std::string w = normalize_token(raw);
    if (!w.empty()) words.push_back(std::move(w));
  }
  return words;
}

int fallback_phoneme_count(std::string_view w) {
  int count = 0;
  for (std::size_t i = 0; i < w.size();) {
    const char c = w[i];
    if (!std::isalpha(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    ++count;
    if (is_vowel(c)) {
      while (i < w.size() && is_vowel(w[i])) ++i;
    } else if (i + 1 < w.size() && is_digraph(c, w[i + 1])) {
      i += 2;
    } else {
      ++i;
    }
  }
  return count;
}

namespace {

int count_word(const std::string& w, const PhonemeLexicon& lexicon) {
  const int hit = lexicon.lookup(w);
  if (hit >= 0) return hit;
  bool has_digit = false;
  for (char c : w) has_digit |= std::isdigit(static_cast<unsigned char>(c)) != 0;
  if (!has_digit) return fallback_phoneme_count(w);
  // Split letter runs from digits; digits are read one by one.
  int total = 0;
  std::string letters;
  auto flush = [&] {
    if (!letters.empty()) total += count_word(letters, lexicon);
    letters.clear();
  };
  for (char c : w) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      flush();
      total += count_word(std::string(kDigitWords[static_cast<std::size_t>(c - '0')]), lexicon);
    } else {
      letters.push_back(c);
    }
  }
  flush();
  return total;
}

}  // namespace

int count_phonemes(std::string_view transcript, const PhonemeLexicon& lexicon) {
  int total = 0;
  for (const auto& w : normalize_words(transcript)) total += count_word(w, lexicon);
  return total;
}

}  // namespace speechcaps
