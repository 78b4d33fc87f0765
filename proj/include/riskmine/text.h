#pragma once

// Document ingest: tokenization with byte offsets, rule lemmatization and
// abbreviation-aware sentence segmentation.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace riskmine {

struct RawDocument {
  std::string doc_id;
  std::string text;
  std::optional<std::string> source_tag;
};

struct Token {
  std::string surface;
  std::string lemma;
  std::size_t char_start = 0;  // byte offset into the document text
  std::size_t char_end = 0;    // exclusive
  std::size_t token_index = 0;
};

// Half-open token range [begin, end).
struct SentenceRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const SentenceRange&) const = default;
};

struct Document {
  std::string doc_id;
  std::string text;
  std::vector<Token> tokens;
  std::vector<SentenceRange> sentences;

  // Index of the sentence containing token_index. Requires a valid index.
  std::size_t sentence_of(std::size_t token_index) const;
};

// Splits text into word tokens (letter/digit runs keeping internal '-', '\''
// and '.') and single-character punctuation tokens. Lemmas are left empty.
std::vector<Token> tokenize(std::string_view text);

// Lowercase + exception table + ordered suffix rules, iterated to a fixed
// point so that lemmatize(lemmatize(x)) == lemmatize(x).
class Lemmatizer {
 public:
  // Uses the built-in irregular-form table.
  Lemmatizer();
  explicit Lemmatizer(std::unordered_map<std::string, std::string> exceptions);

  // Reads "form<TAB or space>lemma" lines; '#' starts a comment.
  static Lemmatizer from_file(const std::filesystem::path& path);

  std::string lemmatize(std::string_view surface) const;

  const std::unordered_map<std::string, std::string>& exceptions() const {
    return exceptions_;
  }

 private:
  std::string step(const std::string& word) const;

  std::unordered_map<std::string, std::string> exceptions_;
};

class Sentencizer {
 public:
  // Uses the built-in abbreviation list.
  Sentencizer();
  explicit Sentencizer(std::unordered_set<std::string> abbreviations);

  // One abbreviation per line, without the trailing period; '#' comments.
  static Sentencizer from_file(const std::filesystem::path& path);

  std::vector<SentenceRange> sentencize(std::span<const Token> tokens,
                                        std::string_view text) const;

  bool is_abbreviation(std::string_view lowered) const;
  const std::unordered_set<std::string>& abbreviations() const { return abbreviations_; }

 private:
  std::unordered_set<std::string> abbreviations_;
};

// Bundles the lemmatizer and sentencizer used for a corpus run.
class Ingestor {
 public:
  Ingestor() = default;
  Ingestor(Lemmatizer lemmatizer, Sentencizer sentencizer)
      : lemmatizer_(std::move(lemmatizer)),
        sentencizer_(std::move(sentencizer)) {}

  // Throws Error(kInvalidDocument) for an empty doc_id.
  Document ingest(const RawDocument& raw) const;

  // Tokenize + lemmatize only; the building block for term normalization.
  std::vector<std::string> lemma_tokens(std::string_view phrase) const;

  const Lemmatizer& lemmatizer() const { return lemmatizer_; }
  const Sentencizer& sentencizer() const { return sentencizer_; }

 private:
  Lemmatizer lemmatizer_;
  Sentencizer sentencizer_;
};

// Free-function forms backed by the default tables.
std::string lemmatize(std::string_view surface);
std::vector<SentenceRange> sentencize(std::span<const Token> tokens,
                                      std::string_view text);
Document ingest_document(const RawDocument& raw);

const Ingestor& default_ingestor();

// True for a token made only of punctuation (no letter or digit).
bool is_punctuation_token(std::string_view surface);
bool contains_letter(std::string_view s);

std::string ascii_lower(std::string_view s);

// Reads a directory of .txt files (doc_id = relative path, '/' separated) or
// a JSON-lines file with {"doc_id","text"} objects. Result sorted by doc_id.
std::vector<RawDocument> read_corpus(const std::filesystem::path& path);

// Reads non-empty, non-comment lines; strips a trailing '\r'.
std::vector<std::string> read_list_file(const std::filesystem::path& path);

}  // namespace riskmine
