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

#ifndef SPEECHCAPS_LEXICON_HPP_
#define SPEECHCAPS_LEXICON_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace speechcaps {

/// Word -> phoneme count, read from "WORD PH1 PH2 ..." lines (CMU dict style).
/// Lines starting with ";;;" or "#" are comments; alternate pronunciations
/// "WORD(2)" are ignored in favour of the first.
class PhonemeLexicon {
 public:
  PhonemeLexicon() = default;

  static PhonemeLexicon load(const std::filesystem::path& path);
  static PhonemeLexicon parse(std::string_view text);

  void add(std::string_view word, int phonemes);
  // Count for a normalized word, or -1 when absent.
  int lookup(std::string_view normalized_word) const;
  std::size_t size() const { return counts_.size(); }

 private:
  std::unordered_map<std::string, int> counts_;
};

/// Lowercase, strip everything but letters/digits/whitespace, split on
/// whitespace.
std::vector<std::string> normalize_words(std::string_view transcript);

/// Letter-based estimate for out-of-lexicon words: each maximal vowel cluster
/// (a, e, i, o, u, y) counts 1, each consonant letter counts 1, and the
/// digraphs th/sh/ch/ph/wh/ck count 1 together.
int fallback_phoneme_count(std::string_view normalized_word);

/// Sum of per-word phoneme counts. Digits are spelled out as number words.
int count_phonemes(std::string_view transcript, const PhonemeLexicon& lexicon);

}  // namespace speechcaps

#endif  // SPEECHCAPS_LEXICON_HPP_
