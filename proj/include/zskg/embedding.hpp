#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "zskg/matrix.hpp"

namespace zskg {

// ASCII case folding; bytes >= 0x80 pass through untouched.
std::string casefold(std::string_view s);
bool is_casefolded(std::string_view s);

// Splits on whitespace, '_' and ASCII punctuation; drops empty pieces.
std::vector<std::string> tokenize(std::string_view text);

// Rule-based lemmatizer: inflection suffixes are stripped only when the
// stripped form is a known base form; irregular forms go through an alias table.
class Lexicon {
 public:
  Lexicon() = default;

  void add_base_form(std::string word);
  // Alias targets count as base forms.
  void add_alias(std::string surface, std::string canonical);

  bool is_base_form(const std::string& word) const { return base_forms_.contains(word); }
  const std::set<std::string>& base_forms() const noexcept { return base_forms_; }
  const std::map<std::string, std::string>& aliases() const noexcept { return aliases_; }

  // Case-folds, then resolves aliases, then tries the suffix rules in a fixed
  // order. Idempotent.
  std::string normalize(std::string_view token) const;

  // Base-form file: one word per line. Alias file: surface<TAB>canonical.
  static Lexicon load(const std::filesystem::path& base_forms, const std::filesystem::path& aliases = {});

 private:
  std::set<std::string> base_forms_;
  std::map<std::string, std::string> aliases_;
};

std::string normalize_token(std::string_view token, const Lexicon& lexicon);

// Levenshtein distance, unit costs, byte-wise.
std::size_t med(std::string_view a, std::string_view b);

inline constexpr std::size_t kDefaultMedThreshold = 2;

// Exact match after normalization, else the vocab token at minimal edit
// distance within threshold (ties: lexicographically smallest), else nullopt.
std::optional<std::string> resolve_concept(std::string_view token, const std::set<std::string>& vocab,
                                           const Lexicon& lexicon,
                                           std::size_t threshold = kDefaultMedThreshold);

struct PhraseVector {
  Vector values;
  bool out_of_vocabulary = false;
};

// Frozen token embeddings (GloVe text format).
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return index_.size(); }
  bool contains(const std::string& token) const { return index_.contains(token); }

  // Keeps the first vector for a repeated token; returns false on a repeat.
  bool add(std::string token, std::span<const double> values);
  // nullptr when absent.
  const double* find(const std::string& token) const;
  std::span<const double> at(const std::string& token) const;

  // Tokens in insertion order.
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::size_t dim_;
  std::vector<std::string> tokens_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t dim);
EmbeddingTable parse_embeddings(const std::string& text, std::size_t dim, const std::string& source_name);
std::string serialize_embeddings(const EmbeddingTable& table);

// Mean of the in-vocabulary token vectors (tokens normalized through the
// lexicon). All-OOV phrases give the zero vector with the flag set. Throws
// ContractError when the phrase has no tokens at all.
PhraseVector phrase_vector(const EmbeddingTable& table, std::string_view phrase, const Lexicon& lexicon);

}  // namespace zskg
