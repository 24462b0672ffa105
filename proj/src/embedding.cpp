#include "zskg/embedding.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "zskg/error.hpp"
#include "zskg/io.hpp"

namespace zskg {

std::string casefold(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool is_casefolded(std::string_view s) {
  return std::none_of(s.begin(), s.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    const bool sep = u < 0x80 && !std::isalnum(u) && c != '\'' && c != '-';
    if (sep) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

void Lexicon::add_base_form(std::string word) { base_forms_.insert(casefold(word)); }

void Lexicon::add_alias(std::string surface, std::string canonical) {
  auto target = casefold(canonical);
  base_forms_.insert(target);
  aliases_[casefold(surface)] = std::move(target);
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_consonant(char c) { return std::string_view("bcdfghjklmnpqrstvwxz").find(c) != std::string_view::npos; }

struct SuffixRule {
  std::string_view suffix;
  std::string_view replacement;
};

// Tried in order; the first candidate that is a base form wins.
constexpr std::array<SuffixRule, 7> kRules{{
    {"ies", "y"},
    {"es", ""},
    {"s", ""},
    {"ing", ""},
    {"ing", "e"},
    {"ed", ""},
    {"ed", "e"},
}};

}  // namespace

std::string Lexicon::normalize(std::string_view token) const {
  std::string folded = casefold(token);
  if (base_forms_.contains(folded)) return folded;
  if (auto it = aliases_.find(folded); it != aliases_.end()) return it->second;
  for (const auto& rule : kRules) {
    if (!ends_with(folded, rule.suffix)) continue;
    std::string stem = folded.substr(0, folded.size() - rule.suffix.size());
    std::string candidate = stem + std::string(rule.replacement);
    if (base_forms_.contains(candidate)) return candidate;
    // running -> runn -> run
    if (rule.replacement.empty() && (rule.suffix == "ing" || rule.suffix == "ed") && stem.size() >= 3 &&
        stem.back() == stem[stem.size() - 2] && is_consonant(stem.back())) {
      stem.pop_back();
      if (base_forms_.contains(stem)) return stem;
    }
  }
  return folded;
}

Lexicon Lexicon::load(const std::filesystem::path& base_forms, const std::filesystem::path& aliases) {
  Lexicon lex;
  if (!base_forms.empty()) {
    std::istringstream in(read_file(base_forms));
    std::string line;
    while (std::getline(in, line)) {
      auto w = strip(line);
      if (!w.empty() && w.front() != '#') lex.add_base_form(w);
    }
  }
  if (!aliases.empty()) {
    std::istringstream in(read_file(aliases));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      line = rstrip(line);
      if (line.empty() || line.front() == '#') continue;
      auto tab = line.find('\t');
      if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
        throw ParseError(aliases.string(), line_no, "expected surface<TAB>canonical");
      }
      lex.add_alias(strip(line.substr(0, tab)), strip(line.substr(tab + 1)));
    }
  }
  return lex;
}

std::string normalize_token(std::string_view token, const Lexicon& lexicon) { return lexicon.normalize(token); }

std::size_t med(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

std::optional<std::string> resolve_concept(std::string_view token, const std::set<std::string>& vocab,
                                           const Lexicon& lexicon, std::size_t threshold) {
  const std::string norm = lexicon.normalize(token);
  if (vocab.contains(norm)) return norm;
  std::optional<std::string> best;
  std::size_t best_d = threshold + 1;
  for (const auto& v : vocab) {
    // Length gap is a lower bound on the distance.
    const std::size_t gap = v.size() > norm.size() ? v.size() - norm.size() : norm.size() - v.size();
    if (gap >= best_d) continue;
    const std::size_t d = med(norm, v);
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

bool EmbeddingTable::add(std::string token, std::span<const double> values) {
  if (values.size() != dim_) {
    throw ContractError("embedding for '" + token + "' has " + std::to_string(values.size()) +
                        " components, table dim is " + std::to_string(dim_));
  }
  if (index_.contains(token)) return false;
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  data_.insert(data_.end(), values.begin(), values.end());
  return true;
}

const double* EmbeddingTable::find(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? nullptr : data_.data() + it->second * dim_;
}

std::span<const double> EmbeddingTable::at(const std::string& token) const {
  const double* p = find(token);
  if (p == nullptr) throw ContractError("no embedding for token '" + token + "'");
  return {p, dim_};
}

EmbeddingTable parse_embeddings(const std::string& text, std::size_t dim, const std::string& source_name) {
  if (dim == 0) throw ContractError("embedding dim must be positive");
  EmbeddingTable table(dim);
  std::vector<double> values;
  values.reserve(dim);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    // Skip blank lines.
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    std::size_t i = 0;
    auto skip_ws = [&] {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    };
    skip_ws();
    std::size_t tok_begin = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    std::string token(line.substr(tok_begin, i - tok_begin));
    values.clear();
    while (true) {
      skip_ws();
      if (i >= line.size()) break;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + line.size(), v);
      if (ec != std::errc() || (ptr != line.data() + line.size() && *ptr != ' ' && *ptr != '\t' && *ptr != '\r')) {
        throw ParseError(source_name, line_no, "bad number in embedding for '" + token + "'");
      }
      if (!std::isfinite(v)) throw ParseError(source_name, line_no, "non-finite component");
      values.push_back(v);
      i = static_cast<std::size_t>(ptr - line.data());
    }
    if (values.size() != dim) {
      throw ParseError(source_name, line_no,
                       "expected " + std::to_string(dim) + " components, got " + std::to_string(values.size()));
    }
    table.add(std::move(token), values);
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t dim) {
  return parse_embeddings(read_file(path), dim, path.string());
}

std::string serialize_embeddings(const EmbeddingTable& table) {
  std::string out;
  char buf[32];
  for (const auto& tok : table.tokens()) {
    out += tok;
    for (double v : table.at(tok)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out += ' ';
      out.append(buf, ptr);
    }
    out += '\n';
  }
  return out;
}

PhraseVector phrase_vector(const EmbeddingTable& table, std::string_view phrase, const Lexicon& lexicon) {
  auto tokens = tokenize(phrase);
  if (tokens.empty()) throw ContractError("empty phrase");
  // Summing in sorted order makes the mean exactly permutation-invariant.
  for (auto& t : tokens) t = lexicon.normalize(t);
  std::sort(tokens.begin(), tokens.end());
  PhraseVector out{Vector(table.dim(), 0.0), false};
  std::size_t hits = 0;
  for (const auto& t : tokens) {
    const double* v = table.find(t);
    if (v == nullptr) continue;
    for (std::size_t d = 0; d < table.dim(); ++d) out.values[d] += v[d];
    ++hits;
  }
  if (hits == 0) {
    out.out_of_vocabulary = true;
    return out;
  }
  const double inv = 1.0 / static_cast<double>(hits);
  for (double& x : out.values) x *= inv;
  return out;
}

}  // namespace zskg
