#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "semreg/io.hpp"
#include "semreg/synth.hpp"
#include "test_support.hpp"

using namespace semreg;
using semreg::test::alphabet_of;
using semreg::test::make_cloud;

namespace {

// Float-representable coordinates so float PLY round trips are exact.
LabeledPointCloud random_cloud(std::size_t n, std::uint64_t seed, std::size_t labels = 4) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-100.0f, 100.0f);
  std::uniform_int_distribution<LabelId> lab(0, static_cast<LabelId>(labels - 1));
  LabeledPointCloud c;
  c.alphabet = alphabet_of(labels);
  for (std::size_t i = 0; i < n; ++i) {
    c.points.emplace_back(u(rng), u(rng), u(rng));
    c.labels.push_back(lab(rng));
  }
  return c;
}

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("semreg_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

template <class F>
ParseError parse_error_of(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no ParseError thrown";
  return ParseError("none", 0);
}

const char* kHeader =
    "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\n"
    "property uint label\nend_header\n";

}  // namespace

// --- Alphabet -------------------------------------------------------------

TEST(Alphabet, RoundTripWithDynamicFlags) {
  const LabelAlphabet a({"ground", "car", "person"}, {false, false, true});
  const auto text = serialize_alphabet(a);
  EXPECT_EQ(text, "ground\ncar\nperson dynamic\n");
  EXPECT_EQ(parse_alphabet(text), a);
}

TEST(Alphabet, Errors) {
  EXPECT_THROW(parse_alphabet(""), ParseError);
  EXPECT_THROW(parse_alphabet("a\n\nb\n"), ParseError);
  EXPECT_THROW(parse_alphabet("a b\n"), ParseError);
  EXPECT_THROW(parse_alphabet("a\na\n"), ParseError);
  EXPECT_NO_THROW(parse_alphabet("a\nb\n\n"));
}

TEST(Alphabet, SidecarPath) { EXPECT_EQ(alphabet_path_for("d/scan.ply"), std::filesystem::path("d/scan.labels")); }

// --- PLY ------------------------------------------------------------------

TEST(Ply, OnePointAscii) {
  const auto c = parse_ply(std::string(kHeader) + "1 2 3 0\n", alphabet_of(1));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.points[0], Point3(1, 2, 3));
  EXPECT_EQ(c.labels[0], 0u);
}

TEST(Ply, ByteStableRoundTrips) {
  const auto c = random_cloud(500, 1);
  for (auto enc : {PlyEncoding::kAscii, PlyEncoding::kBinaryLittleEndian})
    for (auto prec : {PlyPrecision::kFloat, PlyPrecision::kDouble}) {
      const auto bytes = serialize_ply(c, enc, prec);
      const auto back = parse_ply(bytes, c.alphabet);
      EXPECT_EQ(back, c);
      EXPECT_EQ(serialize_ply(back, enc, prec), bytes);
    }
}

TEST(Ply, DoublePrecisionKeepsArbitraryCoordinates) {
  std::mt19937_64 rng(2);
  auto pts = semreg::test::random_points(100, rng);
  const auto c = make_cloud(pts, std::vector<LabelId>(100, 1), alphabet_of(2));
  for (auto enc : {PlyEncoding::kAscii, PlyEncoding::kBinaryLittleEndian})
    EXPECT_EQ(parse_ply(serialize_ply(c, enc, PlyPrecision::kDouble), c.alphabet), c);
}

TEST(Ply, FileRoundTripWithSidecar) {
  TempDir dir;
  const auto c = random_cloud(50, 3);
  const auto path = dir.path() / "scan.ply";
  write_labeled_cloud(path, c);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "scan.labels"));
  EXPECT_EQ(read_labeled_cloud(path), c);
  write_alphabet(dir.path() / "other.txt", c.alphabet);
  EXPECT_EQ(read_labeled_cloud(path, dir.path() / "other.txt"), c);
}

TEST(Ply, MissingLabelProperty) {
  const std::string text =
      "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n"
      "1 2 3\n";
  EXPECT_THROW(parse_ply(text, alphabet_of(1)), ParseError);
}

TEST(Ply, MalformedHeaderReportsLine) {
  const std::string text = "ply\nformat ascii 1.0\nelement vertex\nend_header\n";
  const auto e = parse_error_of([&] { parse_ply(text, alphabet_of(1)); });
  EXPECT_EQ(e.unit(), ParseError::Unit::kLine);
  EXPECT_EQ(e.offset(), 3u);
  EXPECT_THROW(parse_ply("plx\n", alphabet_of(1)), ParseError);
  EXPECT_THROW(parse_ply("ply\nformat binary_big_endian 1.0\n", alphabet_of(1)), ParseError);
  EXPECT_THROW(parse_ply("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\n", alphabet_of(1)), ParseError);
}

TEST(Ply, LabelOutsideAlphabetReportsLine) {
  const auto e = parse_error_of([&] { parse_ply(std::string(kHeader) + "1 2 3 5\n", alphabet_of(2)); });
  EXPECT_EQ(e.unit(), ParseError::Unit::kLine);
  EXPECT_EQ(e.offset(), 9u);
}

TEST(Ply, LabelOutsideAlphabetBinaryReportsByte) {
  auto c = random_cloud(3, 4, 4);
  c.labels[2] = 3;
  const auto bytes = serialize_ply(c);
  const auto header_len = bytes.size() - 3 * 16;
  const auto e = parse_error_of([&] { parse_ply(bytes, alphabet_of(3)); });
  EXPECT_EQ(e.unit(), ParseError::Unit::kByte);
  EXPECT_EQ(e.offset(), header_len + 2 * 16);
}

TEST(Ply, TrailingGarbageRejectedWithOffset) {
  const std::string good = std::string(kHeader) + "1 2 3 0\n";
  const auto e = parse_error_of([&] { parse_ply(good + "  junk\n", alphabet_of(1)); });
  EXPECT_EQ(e.unit(), ParseError::Unit::kByte);
  EXPECT_EQ(e.offset(), good.size() + 2);
  EXPECT_NO_THROW(parse_ply(good + "\n\n", alphabet_of(1)));

  const auto c = random_cloud(4, 5);
  const auto bytes = serialize_ply(c);
  const auto eb = parse_error_of([&] { parse_ply(bytes + "x", c.alphabet); });
  EXPECT_EQ(eb.offset(), bytes.size());
}

TEST(Ply, TruncatedData) {
  const auto c = random_cloud(4, 6);
  const auto bytes = serialize_ply(c);
  EXPECT_THROW(parse_ply(bytes.substr(0, bytes.size() - 1), c.alphabet), ParseError);
  EXPECT_THROW(parse_ply(std::string(kHeader), alphabet_of(1)), ParseError);
}

TEST(Ply, BadValuesAndTypes) {
  EXPECT_THROW(parse_ply(std::string(kHeader) + "1 2 z 0\n", alphabet_of(1)), ParseError);
  EXPECT_THROW(parse_ply(std::string(kHeader) + "1 2 3\n", alphabet_of(1)), ParseError);
  EXPECT_THROW(parse_ply(std::string(kHeader) + "1 2 nan 0\n", alphabet_of(1)), ParseError);
  const std::string signed_label =
      "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\n"
      "property int label\nend_header\n1 2 3 0\n";
  EXPECT_THROW(parse_ply(signed_label, alphabet_of(1)), ParseError);
}

TEST(Ply, ExtraPropertiesAndUcharLabels) {
  const std::string text =
      "ply\nformat ascii 1.0\ncomment from elsewhere\nelement vertex 2\nproperty double x\nproperty double y\n"
      "property double z\nproperty float intensity\nproperty uchar label\nelement face 0\n"
      "property list uchar int vertex_indices\nend_header\n0 0 0 0.5 1\n1 1 1 0.25 0\n";
  // list properties are rejected outright, even on empty elements
  EXPECT_THROW(parse_ply(text, alphabet_of(2)), ParseError);
  const std::string plain =
      "ply\nformat ascii 1.0\nelement vertex 2\nproperty double x\nproperty double y\n"
      "property double z\nproperty float intensity\nproperty uchar label\nend_header\n0 0 0 0.5 1\n1 1 1 0.25 0\n";
  const auto c = parse_ply(plain, alphabet_of(2));
  EXPECT_EQ(c.labels, (std::vector<LabelId>{1, 0}));
}

// --- SemanticKITTI --------------------------------------------------------

namespace {

const char* kMap = "# raw name\n0 unlabeled\n40 road\n44 parking\n10 car\n252 car dynamic\n80 pole\n";

}

TEST(LabelMapTest, Parse) {
  const auto m = parse_label_map(kMap);
  EXPECT_EQ(m.alphabet.names(), (std::vector<std::string>{"unlabeled", "road", "parking", "car", "pole"}));
  EXPECT_TRUE(m.alphabet.is_dynamic(3));
  EXPECT_EQ(m.map(40), 1u);
  EXPECT_EQ(m.map(252), 3u);
  EXPECT_EQ(m.map(999), m.unlabeled());
  EXPECT_EQ(m.raw_of(3), 10u);
}

TEST(LabelMapTest, UnlabeledAppendedWhenMissing) {
  const auto m = parse_label_map("40 road\n");
  EXPECT_EQ(m.alphabet.names(), (std::vector<std::string>{"road", "unlabeled"}));
  EXPECT_EQ(m.map(7), 1u);
}

TEST(LabelMapTest, Errors) {
  EXPECT_THROW(parse_label_map("40\n"), ParseError);
  EXPECT_THROW(parse_label_map("x road\n"), ParseError);
  EXPECT_THROW(parse_label_map("40 road\n40 lane\n"), ParseError);
  EXPECT_THROW(parse_label_map("70000 road\n"), ParseError);
  EXPECT_THROW(parse_label_map("40 road static\n"), ParseError);
}

TEST(SemanticKitti, OnePoint) {
  const auto m = parse_label_map(kMap);
  std::string bin, lab;
  for (float v : {1.0f, 2.0f, 3.0f, 0.7f}) detail::store_le<float>(bin, v);
  detail::store_le<std::uint32_t>(lab, (17u << 16) | 80u);  // instance id in the high half
  const auto c = parse_semantickitti(bin, lab, m);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.points[0], Point3(1, 2, 3));
  EXPECT_EQ(c.labels[0], 4u);
}

TEST(SemanticKitti, ByteStableRoundTrip) {
  const auto m = parse_label_map(kMap);
  auto c = random_cloud(300, 7, m.alphabet.size());
  c.alphabet = m.alphabet;
  const auto [bin, lab] = serialize_semantickitti(c, m);
  const auto back = parse_semantickitti(bin, lab, m);
  EXPECT_EQ(back, c);
  const auto [bin2, lab2] = serialize_semantickitti(back, m);
  EXPECT_EQ(bin2, bin);
  EXPECT_EQ(lab2, lab);
}

TEST(SemanticKitti, FileRoundTrip) {
  TempDir dir;
  const auto m = parse_label_map(kMap);
  auto c = random_cloud(20, 8, m.alphabet.size());
  c.alphabet = m.alphabet;
  write_semantickitti_pair(dir.path() / "000000.bin", dir.path() / "000000.label", c, m);
  EXPECT_EQ(read_semantickitti_pair(dir.path() / "000000.bin", dir.path() / "000000.label", m), c);
}

TEST(SemanticKitti, SizeErrors) {
  const auto m = parse_label_map(kMap);
  const std::string bin16(16, '\0'), lab4(4, '\0');
  const auto e = parse_error_of([&] { parse_semantickitti(bin16 + "abc", lab4, m); });
  EXPECT_EQ(e.offset(), 16u);
  EXPECT_THROW(parse_semantickitti(bin16, lab4 + "x", m), ParseError);
  EXPECT_THROW(parse_semantickitti(bin16 + bin16, lab4, m), ParseError);
  EXPECT_THROW(parse_semantickitti(bin16, lab4 + lab4, m), ParseError);
  EXPECT_NO_THROW(parse_semantickitti("", "", m));
}

TEST(SemanticKitti, CategoryWithoutRawIdCannotBeWritten) {
  const auto m = parse_label_map("40 road\n");
  const auto c = make_cloud({Point3::Zero()}, {m.unlabeled()}, m.alphabet);
  EXPECT_THROW(serialize_semantickitti(c, m), InvalidArgument);
}

// --- Poses ----------------------------------------------------------------

TEST(Poses, RoundTripExact) {
  std::mt19937_64 rng(9);
  std::vector<RigidTransform> poses;
  for (int i = 0; i < 10; ++i) poses.push_back(semreg::test::random_transform(rng, 100.0));
  const auto text = serialize_poses(poses);
  const auto back = parse_poses(text);
  ASSERT_EQ(back.size(), poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    EXPECT_EQ(back[i].rotation, poses[i].rotation);
    EXPECT_EQ(back[i].translation, poses[i].translation);
  }
  EXPECT_EQ(serialize_poses(back), text);
}

TEST(Poses, Errors) {
  EXPECT_THROW(parse_poses("1 0 0 0 0 1 0 0 0 0 1\n"), ParseError);
  EXPECT_THROW(parse_poses("2 0 0 0 0 1 0 0 0 0 1 0\n"), ParseError);
  const auto e = parse_error_of([] { parse_poses("1 0 0 0 0 1 0 0 0 0 1 0\n1 0 0 0 0 1 0 0 0 0 1 q\n"); });
  EXPECT_EQ(e.offset(), 2u);
}

// --- Reports --------------------------------------------------------------

TEST(Reports, CsvSortedAndFormatted) {
  std::vector<PairMetrics> rows(2);
  rows[0].pair_id = "b";
  rows[0].matcher = "nn";
  rows[0].inlier_count = 3;
  rows[0].inlier_ratio = 1.0 / 3.0;
  rows[1].pair_id = "a";
  rows[1].matcher = "nn";
  rows[1].registered = true;
  const auto csv = report_csv(summarize(rows));
  EXPECT_EQ(csv, std::string(kReportColumns) + "\na,nn,0,0,0,0,1,0\nb,nn,3,0.333333333,0,0,0,0\n");
  const auto j = report_json(summarize(rows));
  EXPECT_EQ(j["pairs"][0]["pair_id"], "a");
  EXPECT_DOUBLE_EQ(j["summary"]["recall"].get<double>(), 0.5);
}

TEST(Reports, SaliencyCsv) {
  Eigen::MatrixXd w(2, 2);
  w << 1, 0.5, 0.25, 0;
  EXPECT_EQ(saliency_csv(w, alphabet_of(2)), "category,ring_1,ring_2\nc0,1,0.5\nc1,0.25,0\n");
}
