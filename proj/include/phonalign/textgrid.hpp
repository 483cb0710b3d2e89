#pragma once

#include "phonalign/alignment.hpp"
#include "phonalign/text.hpp"

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phonalign {

namespace textgrid_detail {

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

struct Token {
  enum class Kind { number, string, flag } kind;
  double number = 0.0;
  std::string str;  // string payload, or the flag text
  std::size_t line = 0;
};

// Praat text files are read as a stream of numbers, quoted strings and <flags>. Labels
// such as `xmin =` and bracketed indices like `item [1]:` carry no data and are skipped,
// which lets one reader serve both the long and the short text format.
inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1;
  std::size_t i = 0;
  const auto n = src.size();
  while (i < n) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (c == '"') {
      std::string s;
      const auto start_line = line;
      ++i;
      for (;;) {
        if (i >= n) throw ParseError("unterminated string", start_line);
        if (src[i] == '"') {
          if (i + 1 < n && src[i + 1] == '"') {
            s += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        if (src[i] == '\n') ++line;
        s += src[i++];
      }
      out.push_back({Token::Kind::string, 0.0, std::move(s), start_line});
    } else if (c == '[') {
      const auto close = src.find(']', i);
      if (close == std::string_view::npos) throw ParseError("unterminated '['", line);
      i = close + 1;
    } else if (c == '!') {
      while (i < n && src[i] != '\n') ++i;
    } else if (c == '<') {
      const auto close = src.find('>', i);
      if (close == std::string_view::npos) throw ParseError("unterminated '<'", line);
      out.push_back({Token::Kind::flag, 0.0, std::string(src.substr(i + 1, close - i - 1)), line});
      i = close + 1;
    } else if ((c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.') {
      auto j = i;
      while (j < n && !std::isspace(static_cast<unsigned char>(src[j]))) ++j;
      auto word = src.substr(i, j - i);
      if (!word.empty() && word.front() == '+') word.remove_prefix(1);
      const auto v = text::to_double(word);
      if (!v) throw ParseError("malformed number '" + std::string(src.substr(i, j - i)) + "'", line);
      out.push_back({Token::Kind::number, *v, {}, line});
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      while (i < n && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
    } else {
      ++i;
    }
  }
  return out;
}

class Cursor {
 public:
  explicit Cursor(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  double number(const char* what) {
    const auto& t = next(what);
    if (t.kind != Token::Kind::number) throw ParseError(std::string("expected number for ") + what, t.line);
    return t.number;
  }

  std::string string(const char* what) {
    const auto& t = next(what);
    if (t.kind != Token::Kind::string) throw ParseError(std::string("expected string for ") + what, t.line);
    return t.str;
  }

  std::size_t count(const char* what) {
    const auto line = peek_line();
    const double v = number(what);
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw ParseError(std::string("invalid count for ") + what, line);
    return static_cast<std::size_t>(v);
  }

  bool at_flag() const { return pos_ < tokens_.size() && tokens_[pos_].kind == Token::Kind::flag; }
  std::string flag() { return tokens_[pos_++].str; }

 private:
  std::size_t peek_line() const { return pos_ < tokens_.size() ? tokens_[pos_].line : 0; }

  const Token& next(const char* what) {
    if (pos_ >= tokens_.size())
      throw ParseError(std::string("unexpected end of file while reading ") + what);
    return tokens_[pos_++];
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace textgrid_detail

struct TextGridInterval {
  double xmin = 0.0;
  double xmax = 0.0;
  std::string text;
};

struct TextGridTier {
  std::string tier_class;  // "IntervalTier" or "TextTier"
  std::string name;
  double xmin = 0.0;
  double xmax = 0.0;
  std::vector<TextGridInterval> items;  // points carry xmin == xmax
};

struct TextGrid {
  double xmin = 0.0;
  double xmax = 0.0;
  std::vector<TextGridTier> tiers;
};

inline TextGrid parse_textgrid(std::string_view contents) {
  using namespace textgrid_detail;
  Cursor cur(tokenize(contents));
  if (cur.string("file type") != "ooTextFile") throw ParseError("not a Praat text file", 1);
  if (cur.string("object class") != "TextGrid") throw ParseError("object class is not TextGrid", 2);
  TextGrid grid;
  grid.xmin = cur.number("xmin");
  grid.xmax = cur.number("xmax");
  if (!cur.at_flag()) throw ParseError("missing tiers flag");
  if (cur.flag() != "exists") return grid;
  const auto n_tiers = cur.count("tier count");
  for (std::size_t t = 0; t < n_tiers; ++t) {
    TextGridTier tier;
    tier.tier_class = cur.string("tier class");
    tier.name = cur.string("tier name");
    tier.xmin = cur.number("tier xmin");
    tier.xmax = cur.number("tier xmax");
    const auto n_items = cur.count("interval count");
    const bool intervals = tier.tier_class == "IntervalTier";
    if (!intervals && tier.tier_class != "TextTier")
      throw ParseError("unknown tier class '" + tier.tier_class + "'");
    for (std::size_t k = 0; k < n_items; ++k) {
      TextGridInterval item;
      item.xmin = cur.number("interval xmin");
      item.xmax = intervals ? cur.number("interval xmax") : item.xmin;
      item.text = cur.string("interval text");
      tier.items.push_back(std::move(item));
    }
    grid.tiers.push_back(std::move(tier));
  }
  return grid;
}

// Reads one interval tier as an Alignment; empty-label intervals are skipped. With no
// tier name the first interval tier is used.
inline Alignment read_textgrid(std::string_view contents, std::optional<std::string> tier_name = std::nullopt,
                               std::string utterance_id = {}) {
  const auto grid = parse_textgrid(contents);
  const TextGridTier* chosen = nullptr;
  std::string available;
  for (const auto& tier : grid.tiers) {
    if (tier.tier_class != "IntervalTier") continue;
    if (!available.empty()) available += ", ";
    available += "\"" + tier.name + "\"";
    if (!chosen && (!tier_name || tier.name == *tier_name)) chosen = &tier;
  }
  if (!chosen) {
    if (tier_name)
      throw DataError("no interval tier named \"" + *tier_name + "\"; available tiers: [" + available + "]");
    throw DataError("TextGrid has no interval tier");
  }
  Alignment out;
  out.utterance_id = std::move(utterance_id);
  out.duration = grid.xmax;
  for (const auto& item : chosen->items) {
    const auto label = text::trim(item.text);
    if (label.empty()) continue;
    out.segments.push_back({std::string(label), item.xmin, item.xmax, std::nullopt});
  }
  return out;
}

// Writes a long-format TextGrid with one interval tier. Gaps become empty intervals so
// the tier covers [0, extent] contiguously. Confidences are not represented.
inline std::string write_textgrid(const Alignment& alignment, std::string_view tier_name = "phones") {
  using textgrid_detail::quote;
  using text::exact;

  std::vector<TextGridInterval> items;
  double t = 0.0;
  for (const auto& seg : alignment.segments) {
    if (seg.start > t) items.push_back({t, seg.start, ""});
    items.push_back({seg.start, seg.end, seg.label});
    t = seg.end;
  }
  const double xmax = alignment.extent();
  if (xmax > t) items.push_back({t, xmax, ""});

  std::string out;
  out += "File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n";
  out += "xmin = 0 \nxmax = " + exact(xmax) + " \ntiers? <exists> \nsize = 1 \nitem []: \n";
  out += "    item [1]:\n        class = \"IntervalTier\" \n";
  out += "        name = " + quote(tier_name) + " \n";
  out += "        xmin = 0 \n        xmax = " + exact(xmax) + " \n";
  out += "        intervals: size = " + std::to_string(items.size()) + " \n";
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += "        intervals [" + std::to_string(i + 1) + "]:\n";
    out += "            xmin = " + exact(items[i].xmin) + " \n";
    out += "            xmax = " + exact(items[i].xmax) + " \n";
    out += "            text = " + quote(items[i].text) + " \n";
  }
  return out;
}

}  // namespace phonalign
