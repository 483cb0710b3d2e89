#include "phonalign/alignment_json.hpp"
#include "phonalign/pipeline.hpp"
#include "phonalign/sampa.hpp"
#include "phonalign/textgrid.hpp"
#include "phonalign/timit.hpp"

#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "sampa_chart.hpp"

using namespace phonalign;

namespace {

Alignment make(std::initializer_list<PhoneSegment> segs, std::optional<double> duration = std::nullopt) {
  return Alignment{"utt", std::vector<PhoneSegment>(segs), duration};
}

}  // namespace

TEST(PhoneInventory, InsertionOrderBijection) {
  PhoneInventory inv({"sil", "aa", "b"});
  EXPECT_EQ(inv.id("sil"), 0);
  EXPECT_EQ(inv.id("b"), 2);
  EXPECT_EQ(inv.symbol(1), "aa");
  EXPECT_EQ(inv.add("aa"), 1);
  EXPECT_EQ(inv.add("zz"), 3);
  EXPECT_THROW(PhoneInventory({"a", "a"}), DataError);
  EXPECT_THROW(inv.id("nope"), DataError);
}

TEST(Timit, ConvertsSamplesToSeconds) {
  const auto a = parse_timit_phn("0 3050 h#\n3050 4559 sh\n");
  ASSERT_EQ(a.segments.size(), 2u);
  EXPECT_EQ(a.segments[0].label, "h#");
  EXPECT_EQ(a.segments[0].start, 0.0);
  EXPECT_EQ(a.segments[0].end, 0.190625);
  EXPECT_EQ(a.segments[1].label, "sh");
  EXPECT_EQ(a.segments[1].start, 0.190625);
  EXPECT_EQ(a.segments[1].end, 0.2849375);
  EXPECT_FALSE(a.segments[0].confidence.has_value());
}

TEST(Timit, EmptyInputAndBlankLines) {
  EXPECT_TRUE(parse_timit_phn("").segments.empty());
  EXPECT_EQ(parse_timit_phn("\n0 10 a\n\r\n10 20 b").segments.size(), 2u);
}

TEST(Timit, ErrorsNameTheLine) {
  try {
    parse_timit_phn("100 50 aa");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_STREQ(e.what(), "end before start, line 1");
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_THROW(parse_timit_phn("0 10 a\n10 x b"), ParseError);
  EXPECT_THROW(parse_timit_phn("0 10"), ParseError);
  EXPECT_THROW(parse_timit_phn("0 10 a extra"), ParseError);
  EXPECT_THROW(parse_timit_phn("0 10 a", 0.0), DataError);
}

TEST(Timit, MonotoneInputGivesMonotoneTimes) {
  Rng rng(3);
  std::string text;
  std::int64_t t = 0;
  for (int i = 0; i < 200; ++i) {
    const auto len = 1 + static_cast<std::int64_t>(rng.below(4000));
    text += std::to_string(t) + " " + std::to_string(t + len) + " p\n";
    t += len;
  }
  const auto a = parse_timit_phn(text);
  for (std::size_t i = 1; i < a.segments.size(); ++i) EXPECT_LE(a.segments[i - 1].start, a.segments[i].start);
  EXPECT_TRUE(alignment_violations(a).empty());
}

TEST(Timit, FoldingTo39) {
  const auto a = parse_timit_phn("0 100 h#\n100 200 bcl\n200 300 b\n300 400 q\n400 500 ix\n500 600 ih\n");
  const auto f = fold_timit_39(a);
  ASSERT_EQ(f.segments.size(), 3u);
  EXPECT_EQ(f.segments[0].label, "sil");  // h# + bcl merged
  EXPECT_DOUBLE_EQ(f.segments[0].end, 200.0 / 16000);
  EXPECT_EQ(f.segments[1].label, "b");
  EXPECT_EQ(f.segments[2].label, "ih");  // q dropped, ix + ih merged
  EXPECT_DOUBLE_EQ(f.segments[2].start, 400.0 / 16000);
  std::set<std::string> image;
  for (const auto& [from, to] : kTimitFolding)
    if (!to.empty()) image.insert(std::string(to));
  EXPECT_TRUE(image.count("sil"));
}

TEST(Sampa, CoversTheEnglishChart) {
  for (const auto& e : testutil::kEnglishSampaChart) {
    const auto got = sampa_to_arpabet(e.sampa);
    ASSERT_TRUE(got.has_value()) << e.sampa << " (" << e.example << ")";
    EXPECT_EQ(*got, e.arpabet) << e.sampa << " (" << e.example << ")";
  }
  EXPECT_EQ(std::size(testutil::kEnglishSampaChart), kSampaToArpabet.size());
}

TEST(Sampa, Examples) {
  EXPECT_EQ(sampa_to_arpabet("I"), "IH");
  EXPECT_EQ(sampa_to_arpabet("{"), "AE");
  EXPECT_FALSE(sampa_to_arpabet("X").has_value());
  EXPECT_FALSE(sampa_to_arpabet("x").has_value());
}

TEST(Sampa, ImageIsArpabetAndPure) {
  const auto inv = arpabet_inventory();
  for (const auto& [from, to] : kSampaToArpabet) {
    EXPECT_TRUE(inv.contains(std::string(to))) << from;
    EXPECT_EQ(sampa_to_arpabet(from), sampa_to_arpabet(from));
  }
}

TEST(Sampa, ShippedTableMatchesBuiltIn) {
  const auto file = SampaTable::from_file(std::string(PHONALIGN_SOURCE_DIR) + "/data/sampa_arpabet_v1.csv");
  EXPECT_EQ(file.entries(), default_sampa_table().entries());
  EXPECT_THROW(SampaTable::from_csv("a,B\na,C\n"), ParseError);
  EXPECT_THROW(SampaTable::from_csv("nocomma\n"), ParseError);
}

TEST(Scribe, DropsUnmappableSymbols) {
  const auto r = parse_scribe_labels("# test\n0 1600 D\n1600 3200 @\n3200 4800 X\n4800 8000 s\n", 16000.0);
  ASSERT_EQ(r.alignment.segments.size(), 3u);
  EXPECT_EQ(r.alignment.segments[0].label, "DH");
  EXPECT_EQ(r.alignment.segments[1].label, "AX");
  EXPECT_EQ(r.alignment.segments[2].label, "S");
  EXPECT_DOUBLE_EQ(r.alignment.segments[2].start, 0.3);
  ASSERT_EQ(r.dropped.size(), 1u);
  EXPECT_EQ(r.dropped[0], (DroppedSymbol{"X", 4}));
  EXPECT_TRUE(alignment_violations(r.alignment).empty());
}

TEST(Scribe, AllMappableAndEmpty) {
  EXPECT_TRUE(parse_scribe_labels("0 100 p\n100 200 {\n200 300 t\n", 16000.0).dropped.empty());
  const auto e = parse_scribe_labels("", 16000.0);
  EXPECT_TRUE(e.alignment.segments.empty());
  EXPECT_TRUE(e.dropped.empty());
}

TEST(Scribe, RestrictedInventoryDropsToo) {
  const PhoneInventory only_s({"S"});
  const auto r = parse_scribe_labels("0 100 s\n100 200 p\n", 16000.0, only_s);
  EXPECT_EQ(r.alignment.segments.size(), 1u);
  EXPECT_EQ(r.dropped.size(), 1u);
}

TEST(Scribe, MalformedLines) {
  try {
    parse_scribe_labels("0 100 p\n100 50 t\n", 16000.0);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_scribe_labels("0 100\n", 16000.0), ParseError);
  EXPECT_THROW(parse_scribe_labels("0 100 p\n50 200 t\n", 16000.0), ParseError);
}

TEST(TextGrid, GapsBecomeEmptyIntervals) {
  const auto a = make({{"a", 0.1, 0.3, {}}, {"b", 0.5, 0.7, {}}}, 1.0);
  const auto text = write_textgrid(a);
  const auto grid = parse_textgrid(text);
  ASSERT_EQ(grid.tiers.size(), 1u);
  EXPECT_EQ(grid.tiers[0].name, "phones");
  ASSERT_EQ(grid.tiers[0].items.size(), 5u);  // gap, a, gap, b, tail
  EXPECT_EQ(grid.tiers[0].items[0].text, "");
  EXPECT_EQ(grid.tiers[0].items[1].text, "a");
  EXPECT_EQ(grid.tiers[0].items[2].xmin, 0.3);
  EXPECT_EQ(grid.tiers[0].items[2].xmax, 0.5);
  EXPECT_EQ(grid.tiers[0].items[4].xmax, 1.0);
  for (std::size_t i = 1; i < grid.tiers[0].items.size(); ++i)
    EXPECT_EQ(grid.tiers[0].items[i].xmin, grid.tiers[0].items[i - 1].xmax);
}

TEST(TextGrid, ContiguousSegmentsNeedNoFillers) {
  const auto a = make({{"a", 0.0, 0.1, {}}, {"b", 0.1, 0.3, {}}});
  EXPECT_EQ(parse_textgrid(write_textgrid(a)).tiers[0].items.size(), 2u);
}

TEST(TextGrid, EmptyAlignmentWithDuration) {
  const auto grid = parse_textgrid(write_textgrid(make({}, 1.0)));
  ASSERT_EQ(grid.tiers[0].items.size(), 1u);
  EXPECT_EQ(grid.tiers[0].items[0].xmin, 0.0);
  EXPECT_EQ(grid.tiers[0].items[0].xmax, 1.0);
  EXPECT_EQ(grid.tiers[0].items[0].text, "");
}

TEST(TextGrid, RoundTripProperty) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Alignment a;
    a.utterance_id = "u";
    double t = rng.uniform();
    const int n = static_cast<int>(rng.below(30));
    for (int i = 0; i < n; ++i) {
      if (rng.uniform() < 0.3) t += rng.uniform() * 0.1;
      const double len = 0.001 + rng.uniform() * 0.2;
      a.segments.push_back({"p" + std::to_string(rng.below(50)) + (rng.uniform() < 0.1 ? "\"q" : ""), t, t + len, {}});
      t += len;
    }
    if (rng.uniform() < 0.5) a.duration = t + rng.uniform();
    const auto back = read_textgrid(write_textgrid(a), std::string("phones"), "u");
    ASSERT_EQ(back.segments.size(), a.segments.size());
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
      EXPECT_EQ(back.segments[i].label, a.segments[i].label);
      EXPECT_NEAR(back.segments[i].start, a.segments[i].start, 1e-9);
      EXPECT_NEAR(back.segments[i].end, a.segments[i].end, 1e-9);
    }
  }
}

constexpr const char* kPraatLong = R"(File type = "ooTextFile"
Object class = "TextGrid"

xmin = 0
xmax = 0.5
tiers? <exists>
size = 2
item []:
    item [1]:
        class = "IntervalTier"
        name = "phones"
        xmin = 0
        xmax = 0.5
        intervals: size = 3
        intervals [1]:
            xmin = 0
            xmax = 0.12
            text = "sil"
        intervals [2]:
            xmin = 0.12
            xmax = 0.3
            text = ""
        intervals [3]:
            xmin = 0.3
            xmax = 0.5
            text = "AA1"
    item [2]:
        class = "TextTier"
        name = "events"
        xmin = 0
        xmax = 0.5
        points: size = 1
        points [1]:
            number = 0.25
            mark = "click"
)";

constexpr const char* kPraatShort = R"(File type = "ooTextFile"
Object class = "TextGrid"

0
0.5
<exists>
1
"IntervalTier"
"phones"
0
0.5
2
0
0.2
"a"
0.2
0.5
"b"
)";

TEST(TextGrid, ReadsPraatLongFormat) {
  const auto a = read_textgrid(kPraatLong, std::string("phones"));
  ASSERT_EQ(a.segments.size(), 2u);  // empty interval skipped
  EXPECT_EQ(a.segments[0].label, "sil");
  EXPECT_EQ(a.segments[1].label, "AA1");
  EXPECT_DOUBLE_EQ(a.segments[1].start, 0.3);
  EXPECT_EQ(a.duration, 0.5);
}

TEST(TextGrid, ReadsPraatShortFormat) {
  const auto a = read_textgrid(kPraatShort);
  ASSERT_EQ(a.segments.size(), 2u);
  EXPECT_EQ(a.segments[1].label, "b");
}

TEST(TextGrid, MissingTierListsAvailable) {
  try {
    read_textgrid(write_textgrid(make({{"a", 0, 1, {}}})), std::string("words"));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("[\"phones\"]"), std::string::npos) << e.what();
  }
}

TEST(TextGrid, MalformedInput) {
  EXPECT_THROW(read_textgrid("hello"), ParseError);
  EXPECT_THROW(read_textgrid("File type = \"ooTextFile\"\nObject class = \"TextGrid\"\nxmin = 0\n"), ParseError);
  std::string truncated = write_textgrid(make({{"a", 0, 1, {}}}));
  truncated.resize(truncated.size() - 20);
  EXPECT_THROW(read_textgrid(truncated), ParseError);
}

TEST(AlignmentJson, RoundTripIsExact) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Alignment a;
    a.utterance_id = "utt" + std::to_string(trial);
    double t = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double len = rng.uniform() * 0.3 + 1e-3;
      std::optional<double> c;
      if (rng.uniform() < 0.5) c = rng.uniform();
      a.segments.push_back({"x" + std::to_string(i), t, t + len, c});
      t += len;
    }
    if (trial % 2) a.duration = t;
    EXPECT_EQ(read_alignment_json(write_alignment_json(a)), a);
  }
}

TEST(AlignmentJson, SchemaErrors) {
  EXPECT_THROW(read_alignment_json("{"), ParseError);
  EXPECT_THROW(read_alignment_json(R"({"utterance_id": "u"})"), ParseError);
  EXPECT_THROW(read_alignment_json(R"({"utterance_id": "u", "segments": [{"label": 1}]})"), ParseError);
  const auto a = read_alignment_json(R"({"utterance_id": "u", "duration": null, "segments": []})");
  EXPECT_FALSE(a.duration.has_value());
}

TEST(AlignmentFiles, DispatchOnExtension) {
  testutil::TempDir dir("files");
  write_file(dir / "a.PHN", "0 1600 h#\n1600 3200 aa\n");
  write_file(dir / "b.sam", "0 1600 p\n1600 3200 x\n");
  write_file(dir / "c.TextGrid", write_textgrid(make({{"t", 0.0, 0.5, {}}})));
  write_file(dir / "d.json", write_alignment_json(Alignment{"dee", {{"z", 0.0, 0.1, 0.7}}, 0.1}));
  write_file(dir / "notes.txt", "ignored");
  const auto all = load_alignments(dir.path());
  ASSERT_EQ(all.size(), 4u);
  EXPECT_EQ(all[0].utterance_id, "a");
  EXPECT_EQ(all[1].segments.size(), 1u);
  EXPECT_EQ(all[1].segments[0].label, "P");
  EXPECT_EQ(all[2].segments[0].label, "t");
  EXPECT_EQ(all[3].utterance_id, "dee");

  AlignmentReadOptions fold;
  fold.fold_timit = true;
  EXPECT_EQ(load_alignment_file(dir / "a.PHN", fold).segments[0].label, "sil");
}

TEST(Alignment, ViolationsAreReported) {
  EXPECT_TRUE(alignment_violations(make({{"a", 0, 1, {}}, {"b", 1, 2, 0.5}})).empty());
  EXPECT_FALSE(alignment_violations(make({{"a", 0, 1, {}}, {"b", 0.5, 2, {}}})).empty());
  EXPECT_FALSE(alignment_violations(make({{"a", 1, 1, {}}})).empty());
  EXPECT_FALSE(alignment_violations(make({{"a", 0, 2, {}}}, 1.0)).empty());
  EXPECT_FALSE(alignment_violations(make({{"a", 0, 1, 1.5}})).empty());
}
