#include "riskmine/text.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "riskmine/error.h"

namespace riskmine {

namespace {

struct CodePoint {
  char32_t value;
  std::size_t length;
};

// Malformed sequences decode as a single byte so offsets always advance.
CodePoint decode_utf8(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {b0, 1};
  }
  if (pos + len > s.size()) return {b0, 1};
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return {b0, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

bool is_space(char32_t c) {
  switch (c) {
    case ' ': case '\t': case '\n': case '\r': case '\f': case '\v':
    case 0x00A0: case 0x200B: case 0x3000: case 0xFEFF:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_word_char(char32_t c) {
  if (c < 0x80) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9');
  }
  if (is_space(c)) return false;
  if (c >= 0x00A1 && c <= 0x00BF) return false;
  if (c == 0x00D7 || c == 0x00F7) return false;
  if (c >= 0x2010 && c <= 0x206F) return false;
  if (c >= 0x20A0 && c <= 0x20CF) return false;
  if (c >= 0x3001 && c <= 0x303F) return false;
  return true;
}

// Characters kept when they sit between two word characters.
bool is_joiner(char32_t c) {
  return c == '-' || c == '\'' || c == '.' || c == 0x2019 || c == 0x2010 ||
         c == 0x2011;
}

bool is_terminator(std::string_view t) {
  return t == "." || t == "!" || t == "?";
}

bool is_closer(std::string_view t) {
  return t == "\"" || t == "'" || t == ")" || t == "]" || t == "}" ||
         t == "\xE2\x80\x9D" || t == "\xE2\x80\x99" || t == "\xC2\xBB";
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

bool is_consonant(char c) { return c >= 'a' && c <= 'z' && !is_vowel(c); }

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() &&
         w.substr(w.size() - suffix.size()) == suffix;
}

// Only plain lowercase words (optionally hyphenated or with an apostrophe)
// go through suffix stripping.
bool suffix_eligible(std::string_view w) {
  bool letter = false;
  for (char c : w) {
    if (c >= 'a' && c <= 'z') {
      letter = true;
    } else if (c != '-' && c != '\'') {
      return false;
    }
  }
  return letter;
}

constexpr std::size_t kMinStem = 3;

// Repairs a stem left by removing -ed / -ing.
std::string repair_stem(std::string stem) {
  const std::size_t n = stem.size();
  if (ends_with(stem, "at") || ends_with(stem, "bl") || ends_with(stem, "iz") ||
      stem.back() == 'v' || (stem.back() == 'c' && is_vowel(stem[n - 2])) ||
      ends_with(stem, "nc") || ends_with(stem, "rc")) {
    return stem + "e";
  }
  if (n >= 3 && stem[n - 1] == 'l' && is_consonant(stem[n - 2]) &&
      is_consonant(stem[n - 3])) {
    return stem + "e";
  }
  if (n >= kMinStem + 1 && stem[n - 1] == stem[n - 2] &&
      is_consonant(stem[n - 1]) && stem[n - 1] != 'l' && stem[n - 1] != 's' &&
      stem[n - 1] != 'z') {
    stem.pop_back();
    return stem;
  }
  if (n == 3 && is_consonant(stem[0]) && is_vowel(stem[1]) &&
      is_consonant(stem[2]) && stem[2] != 'w' && stem[2] != 'x' &&
      stem[2] != 'y') {
    return stem + "e";
  }
  return stem;
}

bool has_vowel(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](char c) { return is_vowel(c) || c == 'y'; });
}

constexpr std::array<std::pair<const char*, const char*>, 62>
    kDefaultExceptions = {{
        {"am", "be"},           {"is", "be"},
        {"are", "be"},          {"was", "be"},
        {"were", "be"},         {"been", "be"},
        {"being", "be"},        {"has", "have"},
        {"had", "have"},        {"having", "have"},
        {"does", "do"},         {"did", "do"},
        {"done", "do"},         {"goes", "go"},
        {"went", "go"},         {"gone", "go"},
        {"said", "say"},        {"says", "say"},
        {"made", "make"},       {"paid", "pay"},
        {"sued", "sue"},        {"sues", "sue"},
        {"suing", "sue"},       {"took", "take"},
        {"taken", "take"},      {"gave", "give"},
        {"given", "give"},      {"found", "find"},
        {"brought", "bring"},   {"bought", "buy"},
        {"sold", "sell"},       {"stole", "steal"},
        {"stolen", "steal"},    {"men", "man"},
        {"women", "woman"},     {"children", "child"},
        {"people", "person"},   {"feet", "foot"},
        {"mice", "mouse"},      {"news", "news"},
        {"series", "series"},   {"species", "species"},
        {"crises", "crisis"},   {"analyses", "analysis"},
        {"data", "data"},       {"media", "media"},
        {"during", "during"},   {"nothing", "nothing"},
        {"something", "something"}, {"anything", "anything"},
        {"everything", "everything"}, {"morning", "morning"},
        {"evening", "evening"}, {"bring", "bring"},
        {"thing", "thing"},     {"things", "thing"},
        {"bias", "bias"},       {"alias", "alias"},
        {"gas", "gas"},         {"atlas", "atlas"},
        {"indices", "index"},   {"lives", "life"},
    }};

constexpr std::array<const char*, 48> kDefaultAbbreviations = {
    "mr",   "mrs",  "ms",   "dr",   "prof", "sr",   "jr",   "st",
    "inc",  "corp", "co",   "ltd",  "llc",  "plc",  "bros", "dept",
    "gov",  "gen",  "col",  "lt",   "sgt",  "capt", "rep",  "sen",
    "u.s",  "u.k",  "u.n",  "e.g",  "i.e",  "etc",  "vs",   "no",
    "jan",  "feb",  "mar",  "apr",  "jun",  "jul",  "aug",  "sep",
    "sept", "oct",  "nov",  "dec",  "approx", "est", "fig", "a.m",
};

}  // namespace

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool is_punctuation_token(std::string_view surface) {
  if (surface.empty()) return false;
  for (std::size_t pos = 0; pos < surface.size();) {
    const CodePoint cp = decode_utf8(surface, pos);
    if (is_word_char(cp.value)) return false;
    pos += cp.length;
  }
  return true;
}

bool contains_letter(std::string_view s) {
  for (std::size_t pos = 0; pos < s.size();) {
    const CodePoint cp = decode_utf8(s, pos);
    if (is_word_char(cp.value) && !(cp.value >= '0' && cp.value <= '9')) {
      return true;
    }
    pos += cp.length;
  }
  return false;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  auto emit = [&](std::size_t start, std::size_t end) {
    Token t;
    t.surface = std::string(text.substr(start, end - start));
    t.char_start = start;
    t.char_end = end;
    t.token_index = tokens.size();
    tokens.push_back(std::move(t));
  };
  while (pos < text.size()) {
    const CodePoint cp = decode_utf8(text, pos);
    if (is_space(cp.value)) {
      pos += cp.length;
      continue;
    }
    if (!is_word_char(cp.value)) {
      emit(pos, pos + cp.length);
      pos += cp.length;
      continue;
    }
    const std::size_t start = pos;
    pos += cp.length;
    while (pos < text.size()) {
      const CodePoint next = decode_utf8(text, pos);
      if (is_word_char(next.value)) {
        pos += next.length;
        continue;
      }
      if (is_joiner(next.value) && pos + next.length < text.size()) {
        const CodePoint after = decode_utf8(text, pos + next.length);
        if (is_word_char(after.value)) {
          pos += next.length + after.length;
          continue;
        }
      }
      break;
    }
    emit(start, pos);
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// Lemmatizer

Lemmatizer::Lemmatizer() {
  for (const auto& [form, lemma] : kDefaultExceptions) {
    exceptions_.emplace(form, lemma);
  }
}

Lemmatizer::Lemmatizer(std::unordered_map<std::string, std::string> exceptions)
    : exceptions_(std::move(exceptions)) {
  // A cycle in the table would break idempotence.
  for (const auto& [form, lemma] : exceptions_) {
    std::string cur = lemma;
    bool settled = false;
    for (int i = 0; i < 32; ++i) {
      std::string next = step(cur);
      if (next == cur) {
        settled = true;
        break;
      }
      cur = std::move(next);
    }
    if (!settled) {
      throw Error(Errc::kParse, "lemma exception cycle through '" + form + "'");
    }
  }
}

Lemmatizer Lemmatizer::from_file(const std::filesystem::path& path) {
  std::unordered_map<std::string, std::string> table;
  std::size_t line_no = 0;
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string form, lemma, extra;
    if (!(fields >> form)) continue;
    if (!(fields >> lemma) || (fields >> extra)) {
      throw Error(Errc::kParse, path.string() + ":" + std::to_string(line_no) +
                                    ": expected 'form lemma'");
    }
    table[ascii_lower(form)] = ascii_lower(lemma);
  }
  return Lemmatizer(std::move(table));
}

std::string Lemmatizer::step(const std::string& w) const {
  if (auto it = exceptions_.find(w); it != exceptions_.end()) {
    return it->second;
  }
  if (!suffix_eligible(w)) return w;
  const std::size_t n = w.size();

  if (ends_with(w, "'s")) return w.substr(0, n - 2);
  if (ends_with(w, "s'")) return w.substr(0, n - 1);
  if (ends_with(w, "ies")) {
    return n - 3 + 1 >= kMinStem ? w.substr(0, n - 3) + "y" : w.substr(0, n - 1);
  }
  if (ends_with(w, "sses")) return w.substr(0, n - 2);
  if (ends_with(w, "xes") || ends_with(w, "ches") || ends_with(w, "shes") ||
      ends_with(w, "zzes")) {
    if (n - 2 >= kMinStem) return w.substr(0, n - 2);
  }
  if (ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") &&
      !ends_with(w, "is")) {
    return n - 1 >= kMinStem ? w.substr(0, n - 1) : w;
  }
  if (ends_with(w, "ied")) {
    return n - 3 + 1 >= kMinStem ? w.substr(0, n - 3) + "y" : w;
  }
  if (ends_with(w, "eed")) {
    return n - 1 >= 5 ? w.substr(0, n - 1) : w;
  }
  for (std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
    if (!ends_with(w, suffix)) continue;
    const std::string stem = w.substr(0, n - suffix.size());
    if (stem.size() < kMinStem || !has_vowel(stem)) return w;
    return repair_stem(stem);
  }
  return w;
}

std::string Lemmatizer::lemmatize(std::string_view surface) const {
  std::string cur = ascii_lower(surface);
  // Typographic apostrophe folds to ASCII.
  for (std::size_t p = cur.find("\xE2\x80\x99"); p != std::string::npos;
       p = cur.find("\xE2\x80\x99", p)) {
    cur.replace(p, 3, "'");
  }
  if (cur.empty()) return cur;
  // Every non-exception step shortens the word, so this terminates.
  for (;;) {
    std::string next = step(cur);
    if (next == cur) return cur;
    cur = std::move(next);
  }
}

// ---------------------------------------------------------------------------
// Sentencizer

Sentencizer::Sentencizer() {
  for (const char* abbr : kDefaultAbbreviations) abbreviations_.insert(abbr);
}

Sentencizer::Sentencizer(std::unordered_set<std::string> abbreviations)
    : abbreviations_(std::move(abbreviations)) {}

Sentencizer Sentencizer::from_file(const std::filesystem::path& path) {
  std::unordered_set<std::string> abbrs;
  for (const auto& entry : read_list_file(path)) {
    std::string a = ascii_lower(entry);
    while (!a.empty() && a.back() == '.') a.pop_back();
    if (!a.empty()) abbrs.insert(std::move(a));
  }
  return Sentencizer(std::move(abbrs));
}

bool Sentencizer::is_abbreviation(std::string_view lowered) const {
  return abbreviations_.count(std::string(lowered)) > 0;
}

std::vector<SentenceRange> Sentencizer::sentencize(
    std::span<const Token> tokens, std::string_view /*text*/) const {
  std::vector<SentenceRange> out;
  const std::size_t n = tokens.size();
  std::size_t begin = 0;
  std::size_t i = 0;
  while (i < n) {
    const std::string& surface = tokens[i].surface;
    if (!is_terminator(surface)) {
      ++i;
      continue;
    }
    if (surface == "." && i > 0 && tokens[i - 1].char_end == tokens[i].char_start &&
        is_abbreviation(ascii_lower(tokens[i - 1].surface))) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n && (is_terminator(tokens[j].surface) || is_closer(tokens[j].surface))) {
      ++j;
    }
    out.push_back({begin, j});
    begin = j;
    i = j;
  }
  if (begin < n) out.push_back({begin, n});
  return out;
}

// ---------------------------------------------------------------------------

std::size_t Document::sentence_of(std::size_t token_index) const {
  auto it = std::upper_bound(
      sentences.begin(), sentences.end(), token_index,
      [](std::size_t idx, const SentenceRange& s) { return idx < s.end; });
  return static_cast<std::size_t>(it - sentences.begin());
}

Document Ingestor::ingest(const RawDocument& raw) const {
  if (raw.doc_id.empty()) {
    throw Error(Errc::kInvalidDocument, "document has an empty doc_id");
  }
  Document doc;
  doc.doc_id = raw.doc_id;
  doc.text = raw.text;
  doc.tokens = tokenize(doc.text);
  for (Token& t : doc.tokens) t.lemma = lemmatizer_.lemmatize(t.surface);
  doc.sentences = sentencizer_.sentencize(doc.tokens, doc.text);
  return doc;
}

std::vector<std::string> Ingestor::lemma_tokens(std::string_view phrase) const {
  std::vector<std::string> out;
  for (const Token& t : tokenize(phrase)) {
    out.push_back(lemmatizer_.lemmatize(t.surface));
  }
  return out;
}

const Ingestor& default_ingestor() {
  static const Ingestor instance;
  return instance;
}

std::string lemmatize(std::string_view surface) {
  return default_ingestor().lemmatizer().lemmatize(surface);
}

std::vector<SentenceRange> sentencize(std::span<const Token> tokens,
                                      std::string_view text) {
  return default_ingestor().sentencizer().sentencize(tokens, text);
}

Document ingest_document(const RawDocument& raw) {
  return default_ingestor().ingest(raw);
}

// ---------------------------------------------------------------------------
// Corpus files

std::vector<std::string> read_list_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t");
    out.push_back(line.substr(first, last - first + 1));
  }
  return out;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::vector<RawDocument> read_corpus(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::vector<RawDocument> docs;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".txt") {
        continue;
      }
      RawDocument doc;
      doc.doc_id = fs::relative(entry.path(), path).generic_string();
      doc.text = read_file(entry.path());
      docs.push_back(std::move(doc));
    }
  } else {
    std::ifstream in(path);
    if (!in) throw Error(Errc::kIo, "cannot open corpus " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const std::string where = path.string() + ":" + std::to_string(line_no);
      nlohmann::json obj;
      try {
        obj = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::kParse, where + ": " + e.what());
      }
      if (!obj.is_object() || !obj.contains("doc_id") || !obj.contains("text") ||
          !obj["doc_id"].is_string() || !obj["text"].is_string()) {
        throw Error(Errc::kParse, where + ": expected {\"doc_id\",\"text\"}");
      }
      RawDocument doc;
      doc.doc_id = obj["doc_id"].get<std::string>();
      doc.text = obj["text"].get<std::string>();
      if (obj.contains("source_tag") && obj["source_tag"].is_string()) {
        doc.source_tag = obj["source_tag"].get<std::string>();
      }
      if (doc.doc_id.empty()) {
        throw Error(Errc::kInvalidDocument, where + ": empty doc_id");
      }
      docs.push_back(std::move(doc));
    }
  }
  std::sort(docs.begin(), docs.end(),
            [](const RawDocument& a, const RawDocument& b) { return a.doc_id < b.doc_id; });
  for (std::size_t i = 1; i < docs.size(); ++i) {
    if (docs[i].doc_id == docs[i - 1].doc_id) {
      throw Error(Errc::kInvalidDocument, "duplicate doc_id " + docs[i].doc_id);
    }
  }
  return docs;
}

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::kInvalidDocument: return "InvalidDocument";
    case Errc::kParse: return "ParseError";
    case Errc::kEmptyTaxonomy: return "EmptyTaxonomy";
    case Errc::kEmptyEntityList: return "EmptyEntityList";
    case Errc::kUnknownTerm: return "UnknownTerm";
    case Errc::kNotACandidate: return "NotACandidate";
    case Errc::kDivisionByZero: return "DivisionByZero";
    case Errc::kEmptyVocabulary: return "EmptyVocabulary";
    case Errc::kNonFiniteLoss: return "NonFiniteLoss";
    case Errc::kNoRepresentation: return "NoRepresentation";
    case Errc::kZeroVector: return "ZeroVector";
    case Errc::kOutOfVocabularyTerm: return "OutOfVocabularyTerm";
    case Errc::kNoSentences: return "NoSentences";
    case Errc::kInsufficientRecords: return "InsufficientRecords";
    case Errc::kUnknownPair: return "UnknownPair";
    case Errc::kEmptyComparison: return "EmptyComparison";
    case Errc::kDomainError: return "DomainError";
    case Errc::kLengthMismatch: return "LengthMismatch";
    case Errc::kEmptyInput: return "EmptyInput";
    case Errc::kInvalidConfig: return "InvalidConfig";
    case Errc::kIo: return "IoError";
  }
  return "Error";
}

}  // namespace riskmine
