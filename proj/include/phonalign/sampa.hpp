#pragma once

#include "phonalign/alignment.hpp"
#include "phonalign/text.hpp"

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace phonalign {

// Built-in copy of data/sampa_arpabet_v1.csv. The test suite checks the two agree.
inline constexpr int kSampaTableVersion = 1;

inline constexpr std::array<std::pair<std::string_view, std::string_view>, 50> kSampaToArpabet{{
    // consonants
    {"p", "P"}, {"b", "B"}, {"t", "T"}, {"d", "D"}, {"k", "K"}, {"g", "G"},
    {"tS", "CH"}, {"dZ", "JH"},
    {"f", "F"}, {"v", "V"}, {"T", "TH"}, {"D", "DH"}, {"s", "S"}, {"z", "Z"},
    {"S", "SH"}, {"Z", "ZH"}, {"h", "HH"},
    {"m", "M"}, {"n", "N"}, {"N", "NG"},
    {"r", "R"}, {"l", "L"}, {"w", "W"}, {"j", "Y"},
    {"?", "Q"},
    {"m=", "EM"}, {"n=", "EN"}, {"l=", "EL"},
    // checked vowels
    {"I", "IH"}, {"e", "EH"}, {"{", "AE"}, {"Q", "AA"}, {"V", "AH"}, {"U", "UH"}, {"@", "AX"},
    // free vowels and diphthongs
    {"i:", "IY"}, {"eI", "EY"}, {"aI", "AY"}, {"OI", "OY"}, {"u:", "UW"}, {"@U", "OW"},
    {"aU", "AW"}, {"I@", "IH"}, {"e@", "EH"}, {"U@", "UH"}, {"3:", "ER"}, {"A:", "AA"},
    {"O:", "AO"},
    // weak vowels
    {"i", "IY"}, {"u", "UW"},
}};

// Full ARPABET symbol set (stressless), the codomain of the SAMPA table.
inline constexpr std::array<std::string_view, 50> kArpabetSymbols{
    "AA", "AE", "AH", "AO", "AW", "AX", "AXR", "AY", "B",  "CH", "D",  "DH",
    "DX", "EH", "EL", "EM", "EN", "ER",  "EY", "F",  "G",  "HH", "IH", "IX",
    "IY", "JH", "K",  "L",  "M",  "N",   "NG", "NX", "OW", "OY", "P",  "Q",
    "R",  "S",  "SH", "T",  "TH", "UH",  "UW", "UX", "V",  "W",  "WH", "Y",  "Z",  "ZH",
};

// Symbol table loaded from a `symbol,arpabet` CSV. '#' lines and the header row are skipped.
class SampaTable {
 public:
  SampaTable() {
    for (const auto& [from, to] : kSampaToArpabet) map_.emplace(from, to);
  }

  static SampaTable from_csv(std::string_view csv) {
    SampaTable t;
    t.map_.clear();
    const auto all = text::lines(csv);
    for (std::size_t i = 0; i < all.size(); ++i) {
      const auto line = text::trim(all[i]);
      if (line.empty() || line.front() == '#' || line == "symbol,arpabet") continue;
      const auto comma = line.find(',');
      if (comma == std::string_view::npos || comma == 0 || comma + 1 >= line.size())
        throw ParseError("expected 'symbol,arpabet'", i + 1);
      auto [it, inserted] = t.map_.emplace(std::string(line.substr(0, comma)),
                                           std::string(text::trim(line.substr(comma + 1))));
      if (!inserted) throw ParseError("duplicate SAMPA symbol '" + it->first + "'", i + 1);
    }
    return t;
  }

  static SampaTable from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open SAMPA table " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_csv(ss.str());
  }

  // nullopt means unmappable.
  std::optional<std::string> lookup(std::string_view sampa) const {
    if (auto it = map_.find(std::string(sampa)); it != map_.end()) return it->second;
    return std::nullopt;
  }

  const std::map<std::string, std::string>& entries() const noexcept { return map_; }

 private:
  std::map<std::string, std::string> map_;
};

inline const SampaTable& default_sampa_table() {
  static const SampaTable table;
  return table;
}

inline std::optional<std::string> sampa_to_arpabet(std::string_view symbol) {
  return default_sampa_table().lookup(symbol);
}

inline PhoneInventory arpabet_inventory() {
  PhoneInventory inv;
  for (auto s : kArpabetSymbols) inv.add(std::string(s));
  return inv;
}

struct DroppedSymbol {
  std::string symbol;
  std::size_t line = 0;
  friend bool operator==(const DroppedSymbol&, const DroppedSymbol&) = default;
};

struct ScribeLabels {
  Alignment alignment;
  std::vector<DroppedSymbol> dropped;
};

// Parses a SCRIBE per-phone label file: `<start_sample> <end_sample> <SAMPA>` lines, '#'
// comments allowed. The whole file is one utterance. Symbols without an ARPABET image,
// or whose image is outside `inventory`, are dropped and reported.
inline ScribeLabels parse_scribe_labels(std::string_view contents, double sample_rate,
                                        const PhoneInventory& inventory = arpabet_inventory(),
                                        const SampaTable& table = default_sampa_table(),
                                        std::string utterance_id = {}) {
  if (!(sample_rate > 0.0)) throw DataError("sample rate must be positive");
  ScribeLabels out;
  out.alignment.utterance_id = std::move(utterance_id);
  double last_end = 0.0;
  const auto all = text::lines(contents);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto lineno = i + 1;
    const auto line = text::trim(all[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto f = text::fields(line);
    if (f.size() != 3) throw ParseError("expected 3 fields, got " + std::to_string(f.size()), lineno);
    const auto start = text::to_int(f[0]);
    const auto end = text::to_int(f[1]);
    if (!start || !end) throw ParseError("non-integer sample index", lineno);
    if (*start < 0) throw ParseError("negative sample index", lineno);
    if (*end <= *start) throw ParseError("end before start", lineno);
    const double t0 = static_cast<double>(*start) / sample_rate;
    const double t1 = static_cast<double>(*end) / sample_rate;
    if (t0 < last_end) throw ParseError("segment overlaps the previous one", lineno);
    last_end = t1;

    auto mapped = table.lookup(f[2]);
    if (!mapped || !inventory.contains(*mapped)) {
      out.dropped.push_back({std::string(f[2]), lineno});
      continue;
    }
    out.alignment.segments.push_back({std::move(*mapped), t0, t1, std::nullopt});
  }
  return out;
}

}  // namespace phonalign
