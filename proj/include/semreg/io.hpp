#ifndef SEMREG_IO_HPP_
#define SEMREG_IO_HPP_

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "semreg/common.hpp"
#include "semreg/metrics.hpp"
#include "semreg/semantic.hpp"
#include "semreg/transform.hpp"

namespace semreg {

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidArgument("write failed for '" + path.string() + "'");
}

template <class T>
T load_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    std::reverse(b, b + sizeof(T));
  }
  return v;
}

template <class T>
void store_le(std::string& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) std::reverse(b, b + sizeof(T));
  out.append(b, sizeof(T));
}

inline std::string fmt_double(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Splits on ASCII whitespace.
inline std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t s = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > s) out.push_back(line.substr(s, i - s));
  }
  return out;
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
  T v{};
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) return std::nullopt;
  return v;
}

inline bool only_whitespace(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}

// Walks a text buffer line by line while tracking byte offsets.
class LineReader {
 public:
  explicit LineReader(std::string_view text, std::size_t start = 0) : text_(text), pos_(start) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    line_start_ = pos_;
    const std::size_t nl = text_.find('\n', pos_);
    const std::size_t end = nl == std::string_view::npos ? text_.size() : nl;
    line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = nl == std::string_view::npos ? text_.size() : nl + 1;
    ++line_no_;
    return true;
  }

  std::size_t line_no() const { return line_no_; }
  std::size_t line_start() const { return line_start_; }
  std::size_t pos() const { return pos_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  std::size_t line_no_ = 0;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Label alphabet sidecar: one category name per line, line number (0-based)
// is the id. A trailing `dynamic` token marks a dynamic category.

inline LabelAlphabet parse_alphabet(std::string_view text) {
  std::vector<std::string> names;
  std::vector<bool> dynamic;
  detail::LineReader lines(text);
  std::string_view line;
  while (lines.next(line)) {
    const auto t = detail::tokens(line);
    if (t.empty()) {
      // blank lines are allowed only at the end
      std::string_view rest;
      while (lines.next(rest))
        if (!detail::only_whitespace(rest))
          throw ParseError("alphabet: blank line inside the name list", lines.line_no() - 1, ParseError::Unit::kLine);
      break;
    }
    if (t.size() > 2 || (t.size() == 2 && t[1] != "dynamic"))
      throw ParseError("alphabet: expected '<name>' or '<name> dynamic'", lines.line_no(), ParseError::Unit::kLine);
    names.emplace_back(t[0]);
    dynamic.push_back(t.size() == 2);
  }
  if (names.empty()) throw ParseError("alphabet: no category names", 0);
  try {
    return LabelAlphabet(std::move(names), std::move(dynamic));
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("alphabet: ") + e.what(), 0);
  }
}

inline std::string serialize_alphabet(const LabelAlphabet& a) {
  std::string out;
  for (LabelId i = 0; i < a.size(); ++i) {
    out += a.name(i);
    if (a.is_dynamic(i)) out += " dynamic";
    out += '\n';
  }
  return out;
}

inline LabelAlphabet read_alphabet(const std::filesystem::path& path) {
  return parse_alphabet(detail::read_file(path));
}

inline void write_alphabet(const std::filesystem::path& path, const LabelAlphabet& a) {
  detail::write_file(path, serialize_alphabet(a));
}

/// Default sidecar location: `scan.ply` -> `scan.labels`.
inline std::filesystem::path alphabet_path_for(const std::filesystem::path& cloud_path) {
  auto p = cloud_path;
  p.replace_extension(".labels");
  return p;
}

// ---------------------------------------------------------------------------
// PLY

enum class PlyEncoding { kAscii, kBinaryLittleEndian };
enum class PlyPrecision { kFloat, kDouble };

namespace detail {

enum class PlyType { kI8, kU8, kI16, kU16, kI32, kU32, kF32, kF64 };

inline std::optional<PlyType> ply_type(std::string_view s) {
  if (s == "char" || s == "int8") return PlyType::kI8;
  if (s == "uchar" || s == "uint8") return PlyType::kU8;
  if (s == "short" || s == "int16") return PlyType::kI16;
  if (s == "ushort" || s == "uint16") return PlyType::kU16;
  if (s == "int" || s == "int32") return PlyType::kI32;
  if (s == "uint" || s == "uint32") return PlyType::kU32;
  if (s == "float" || s == "float32") return PlyType::kF32;
  if (s == "double" || s == "float64") return PlyType::kF64;
  return std::nullopt;
}

inline std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::kI8: case PlyType::kU8: return 1;
    case PlyType::kI16: case PlyType::kU16: return 2;
    case PlyType::kI32: case PlyType::kU32: case PlyType::kF32: return 4;
    case PlyType::kF64: return 8;
  }
  return 0;
}

inline bool ply_unsigned_int(PlyType t) { return t == PlyType::kU8 || t == PlyType::kU16 || t == PlyType::kU32; }
inline bool ply_float(PlyType t) { return t == PlyType::kF32 || t == PlyType::kF64; }

inline double ply_load_binary(PlyType t, const char* p) {
  switch (t) {
    case PlyType::kI8: return load_le<std::int8_t>(p);
    case PlyType::kU8: return load_le<std::uint8_t>(p);
    case PlyType::kI16: return load_le<std::int16_t>(p);
    case PlyType::kU16: return load_le<std::uint16_t>(p);
    case PlyType::kI32: return load_le<std::int32_t>(p);
    case PlyType::kU32: return load_le<std::uint32_t>(p);
    case PlyType::kF32: return load_le<float>(p);
    case PlyType::kF64: return load_le<double>(p);
  }
  return 0.0;
}

inline std::optional<double> ply_parse_ascii(PlyType t, std::string_view s) {
  if (t == PlyType::kF32) {
    // parse as float so that float-valued files round trip bit-exactly
    auto v = parse_number<float>(s);
    return v ? std::optional<double>(*v) : std::nullopt;
  }
  if (t == PlyType::kF64) return parse_number<double>(s);
  if (ply_unsigned_int(t)) {
    auto v = parse_number<std::uint64_t>(s);
    return v ? std::optional<double>(static_cast<double>(*v)) : std::nullopt;
  }
  auto v = parse_number<std::int64_t>(s);
  return v ? std::optional<double>(static_cast<double>(*v)) : std::nullopt;
}

struct PlyProperty {
  std::string name;
  PlyType type;
};

}  // namespace detail

/// Parses a labeled PLY buffer; `alphabet` gives names to the label ids.
inline LabeledPointCloud parse_ply(std::string_view bytes, const LabelAlphabet& alphabet) {
  using detail::PlyType;
  detail::LineReader lines(bytes);
  std::string_view line;
  if (!lines.next(line) || line != "ply") throw ParseError("ply: missing 'ply' magic", 1, ParseError::Unit::kLine);

  std::optional<PlyEncoding> encoding;
  std::optional<std::size_t> count;
  std::vector<detail::PlyProperty> props;
  bool in_vertex = false;
  bool header_done = false;
  while (lines.next(line)) {
    const auto t = detail::tokens(line);
    const auto here = lines.line_no();
    if (t.empty()) continue;
    if (t[0] == "end_header") {
      if (t.size() != 1) throw ParseError("ply: malformed end_header", here, ParseError::Unit::kLine);
      header_done = true;
      break;
    }
    if (t[0] == "comment" || t[0] == "obj_info") continue;
    if (t[0] == "format") {
      if (t.size() != 3 || t[2] != "1.0") throw ParseError("ply: malformed format line", here, ParseError::Unit::kLine);
      if (t[1] == "ascii")
        encoding = PlyEncoding::kAscii;
      else if (t[1] == "binary_little_endian")
        encoding = PlyEncoding::kBinaryLittleEndian;
      else
        throw ParseError("ply: unsupported format '" + std::string(t[1]) + "'", here, ParseError::Unit::kLine);
      continue;
    }
    if (t[0] == "element") {
      if (t.size() != 3) throw ParseError("ply: malformed element line", here, ParseError::Unit::kLine);
      const auto n = detail::parse_number<std::size_t>(t[2]);
      if (!n) throw ParseError("ply: bad element count", here, ParseError::Unit::kLine);
      if (t[1] == "vertex") {
        if (count) throw ParseError("ply: duplicate vertex element", here, ParseError::Unit::kLine);
        count = *n;
        in_vertex = true;
      } else {
        if (*n != 0)
          throw ParseError("ply: unsupported element '" + std::string(t[1]) + "'", here, ParseError::Unit::kLine);
        in_vertex = false;
      }
      continue;
    }
    if (t[0] == "property") {
      if (t.size() >= 2 && t[1] == "list")
        throw ParseError("ply: list properties are not supported", here, ParseError::Unit::kLine);
      if (t.size() != 3) throw ParseError("ply: malformed property line", here, ParseError::Unit::kLine);
      const auto type = detail::ply_type(t[1]);
      if (!type) throw ParseError("ply: unknown property type '" + std::string(t[1]) + "'", here, ParseError::Unit::kLine);
      if (!in_vertex) continue;
      for (const auto& p : props)
        if (p.name == t[2]) throw ParseError("ply: duplicate property '" + p.name + "'", here, ParseError::Unit::kLine);
      props.push_back({std::string(t[2]), *type});
      continue;
    }
    throw ParseError("ply: unexpected header line", here, ParseError::Unit::kLine);
  }
  if (!header_done) throw ParseError("ply: header has no end_header", lines.line_no(), ParseError::Unit::kLine);
  if (!encoding) throw ParseError("ply: header has no format line", lines.line_no(), ParseError::Unit::kLine);
  if (!count) throw ParseError("ply: header has no vertex element", lines.line_no(), ParseError::Unit::kLine);

  int ix = -1, iy = -1, iz = -1, il = -1;
  for (std::size_t i = 0; i < props.size(); ++i) {
    const auto& p = props[i];
    int* slot = p.name == "x" ? &ix : p.name == "y" ? &iy : p.name == "z" ? &iz : p.name == "label" ? &il : nullptr;
    if (slot) *slot = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) throw ParseError("ply: missing x, y or z property", lines.line_no(), ParseError::Unit::kLine);
  if (il < 0) throw ParseError("ply: missing label property", lines.line_no(), ParseError::Unit::kLine);
  for (int i : {ix, iy, iz})
    if (!detail::ply_float(props[static_cast<std::size_t>(i)].type))
      throw ParseError("ply: coordinates must be float or double", lines.line_no(), ParseError::Unit::kLine);
  if (!detail::ply_unsigned_int(props[static_cast<std::size_t>(il)].type))
    throw ParseError("ply: label must be an unsigned integer property", lines.line_no(), ParseError::Unit::kLine);

  LabeledPointCloud cloud;
  cloud.alphabet = alphabet;
  cloud.points.reserve(*count);
  cloud.labels.reserve(*count);
  std::vector<double> values(props.size());

  auto push = [&](std::size_t offset, ParseError::Unit unit) {
    const double l = values[static_cast<std::size_t>(il)];
    if (l >= static_cast<double>(alphabet.size()))
      throw ParseError("ply: label id " + detail::fmt_double(l, 10) + " outside alphabet", offset, unit);
    const Point3 p(values[static_cast<std::size_t>(ix)], values[static_cast<std::size_t>(iy)],
                   values[static_cast<std::size_t>(iz)]);
    if (!is_finite(p)) throw ParseError("ply: non-finite coordinate", offset, unit);
    cloud.points.push_back(p);
    cloud.labels.push_back(static_cast<LabelId>(l));
  };

  if (*encoding == PlyEncoding::kAscii) {
    for (std::size_t v = 0; v < *count; ++v) {
      if (!lines.next(line)) throw ParseError("ply: file ends before all vertices", bytes.size());
      const auto t = detail::tokens(line);
      if (t.size() != props.size())
        throw ParseError("ply: expected " + std::to_string(props.size()) + " values", lines.line_no(),
                         ParseError::Unit::kLine);
      for (std::size_t i = 0; i < props.size(); ++i) {
        const auto x = detail::ply_parse_ascii(props[i].type, t[i]);
        if (!x) throw ParseError("ply: bad value '" + std::string(t[i]) + "'", lines.line_no(), ParseError::Unit::kLine);
        values[i] = *x;
      }
      push(lines.line_no(), ParseError::Unit::kLine);
    }
    const std::size_t rest = lines.pos();
    for (std::size_t i = rest; i < bytes.size(); ++i)
      if (!std::isspace(static_cast<unsigned char>(bytes[i]))) throw ParseError("ply: trailing data after vertices", i);
  } else {
    std::size_t stride = 0;
    for (const auto& p : props) stride += detail::ply_size(p.type);
    std::size_t pos = lines.pos();
    if ((bytes.size() - pos) / stride < *count)
      throw ParseError("ply: file ends before all vertices", bytes.size());
    for (std::size_t v = 0; v < *count; ++v) {
      const std::size_t start = pos;
      for (std::size_t i = 0; i < props.size(); ++i) {
        values[i] = detail::ply_load_binary(props[i].type, bytes.data() + pos);
        pos += detail::ply_size(props[i].type);
      }
      push(start, ParseError::Unit::kByte);
    }
    if (pos != bytes.size()) throw ParseError("ply: trailing data after vertices", pos);
  }
  return cloud;
}

inline std::string serialize_ply(const LabeledPointCloud& cloud, PlyEncoding encoding = PlyEncoding::kBinaryLittleEndian,
                                 PlyPrecision precision = PlyPrecision::kFloat) {
  cloud.validate();
  const bool dbl = precision == PlyPrecision::kDouble;
  std::string out = "ply\nformat ";
  out += encoding == PlyEncoding::kAscii ? "ascii" : "binary_little_endian";
  out += " 1.0\nelement vertex " + std::to_string(cloud.size()) + "\n";
  for (const char* axis : {"x", "y", "z"}) out += std::string("property ") + (dbl ? "double " : "float ") + axis + "\n";
  out += "property uint label\nend_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    if (encoding == PlyEncoding::kAscii) {
      for (int a = 0; a < 3; ++a) {
        out += dbl ? detail::fmt_double(p[a], 17) : detail::fmt_double(static_cast<float>(p[a]), 9);
        out += ' ';
      }
      out += std::to_string(cloud.labels[i]);
      out += '\n';
    } else {
      for (int a = 0; a < 3; ++a) {
        if (dbl)
          detail::store_le<double>(out, p[a]);
        else
          detail::store_le<float>(out, static_cast<float>(p[a]));
      }
      detail::store_le<std::uint32_t>(out, cloud.labels[i]);
    }
  }
  return out;
}

/// Reads a labeled PLY; the alphabet comes from `alphabet_path`, or from the
/// `.labels` sidecar next to the cloud when none is given.
inline LabeledPointCloud read_labeled_cloud(const std::filesystem::path& path,
                                            std::optional<std::filesystem::path> alphabet_path = std::nullopt) {
  const LabelAlphabet alphabet = read_alphabet(alphabet_path.value_or(alphabet_path_for(path)));
  return parse_ply(detail::read_file(path), alphabet);
}

/// Writes the cloud and its `.labels` sidecar.
inline void write_labeled_cloud(const std::filesystem::path& path, const LabeledPointCloud& cloud,
                                PlyEncoding encoding = PlyEncoding::kBinaryLittleEndian,
                                PlyPrecision precision = PlyPrecision::kFloat) {
  detail::write_file(path, serialize_ply(cloud, encoding, precision));
  write_alphabet(alphabet_path_for(path), cloud.alphabet);
}

// ---------------------------------------------------------------------------
// SemanticKITTI scans

/// Raw SemanticKITTI ids to alphabet names. Ids without an entry map to the
/// `unlabeled` category, which is always part of the alphabet.
struct LabelMap {
  std::map<std::uint32_t, LabelId> to_label;
  LabelAlphabet alphabet;

  LabelId unlabeled() const { return alphabet.id_of("unlabeled"); }

  LabelId map(std::uint32_t raw) const {
    const auto it = to_label.find(raw);
    return it == to_label.end() ? unlabeled() : it->second;
  }

  /// Lowest raw id mapping to the label.
  std::optional<std::uint32_t> raw_of(LabelId label) const {
    for (const auto& [raw, l] : to_label)
      if (l == label) return raw;
    return std::nullopt;
  }
};

/// Lines of `<raw-id> <name>` with an optional trailing `dynamic`; `#` starts
/// a comment. Names get ids in order of first appearance.
inline LabelMap parse_label_map(std::string_view text) {
  std::vector<std::string> names;
  std::vector<bool> dynamic;
  std::vector<std::pair<std::uint32_t, std::size_t>> entries;
  detail::LineReader lines(text);
  std::string_view line;
  while (lines.next(line)) {
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const auto t = detail::tokens(line);
    if (t.empty()) continue;
    if (t.size() < 2 || t.size() > 3 || (t.size() == 3 && t[2] != "dynamic"))
      throw ParseError("label map: expected '<raw-id> <name> [dynamic]'", lines.line_no(), ParseError::Unit::kLine);
    const auto raw = detail::parse_number<std::uint32_t>(t[0]);
    if (!raw || *raw > 0xFFFF) throw ParseError("label map: raw id must be a 16-bit integer", lines.line_no(), ParseError::Unit::kLine);
    const std::string name(t[1]);
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
      names.push_back(name);
      dynamic.push_back(t.size() == 3);
      it = names.end() - 1;
    } else if (t.size() == 3) {
      dynamic[static_cast<std::size_t>(it - names.begin())] = true;
    }
    for (const auto& e : entries)
      if (e.first == *raw) throw ParseError("label map: duplicate raw id", lines.line_no(), ParseError::Unit::kLine);
    entries.emplace_back(*raw, static_cast<std::size_t>(it - names.begin()));
  }
  if (std::find(names.begin(), names.end(), "unlabeled") == names.end()) {
    names.emplace_back("unlabeled");
    dynamic.push_back(false);
  }
  LabelMap m;
  m.alphabet = LabelAlphabet(std::move(names), std::move(dynamic));
  for (const auto& [raw, idx] : entries) m.to_label[raw] = static_cast<LabelId>(idx);
  return m;
}

inline LabelMap read_label_map(const std::filesystem::path& path) { return parse_label_map(detail::read_file(path)); }

inline LabeledPointCloud parse_semantickitti(std::string_view bin, std::string_view labels, const LabelMap& map) {
  if (bin.size() % 16 != 0) throw ParseError("semantickitti: scan length is not a multiple of 16", bin.size() - bin.size() % 16);
  if (labels.size() % 4 != 0)
    throw ParseError("semantickitti: label length is not a multiple of 4", labels.size() - labels.size() % 4);
  const std::size_t n = bin.size() / 16;
  if (labels.size() / 4 != n)
    throw ParseError("semantickitti: scan has " + std::to_string(n) + " points but " +
                         std::to_string(labels.size() / 4) + " labels",
                     std::min(labels.size(), n * 4));
  LabeledPointCloud cloud;
  cloud.alphabet = map.alphabet;
  cloud.points.reserve(n);
  cloud.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const char* p = bin.data() + 16 * i;
    const Point3 q(detail::load_le<float>(p), detail::load_le<float>(p + 4), detail::load_le<float>(p + 8));
    if (!is_finite(q)) throw ParseError("semantickitti: non-finite coordinate", 16 * i);
    cloud.points.push_back(q);
    cloud.labels.push_back(map.map(detail::load_le<std::uint32_t>(labels.data() + 4 * i) & 0xFFFFu));
  }
  return cloud;
}

inline LabeledPointCloud read_semantickitti_pair(const std::filesystem::path& bin_path,
                                                 const std::filesystem::path& label_path, const LabelMap& map) {
  return parse_semantickitti(detail::read_file(bin_path), detail::read_file(label_path), map);
}

/// Writes x, y, z, intensity 0 and the lowest raw id of each point's label.
inline std::pair<std::string, std::string> serialize_semantickitti(const LabeledPointCloud& cloud, const LabelMap& map) {
  cloud.validate();
  if (cloud.alphabet != map.alphabet) throw InvalidArgument("semantickitti: cloud alphabet differs from the label map");
  std::vector<std::uint32_t> raw(cloud.alphabet.size());
  for (LabelId l = 0; l < cloud.alphabet.size(); ++l) raw[l] = map.raw_of(l).value_or(0xFFFFFFFFu);
  std::string bin, lab;
  bin.reserve(16 * cloud.size());
  lab.reserve(4 * cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int a = 0; a < 3; ++a) detail::store_le<float>(bin, static_cast<float>(cloud.points[i][a]));
    detail::store_le<float>(bin, 0.0f);
    const std::uint32_t r = raw[cloud.labels[i]];
    if (r == 0xFFFFFFFFu)
      throw InvalidArgument("semantickitti: no raw id for category '" + cloud.alphabet.name(cloud.labels[i]) + "'");
    detail::store_le<std::uint32_t>(lab, r);
  }
  return {std::move(bin), std::move(lab)};
}

inline void write_semantickitti_pair(const std::filesystem::path& bin_path, const std::filesystem::path& label_path,
                                     const LabeledPointCloud& cloud, const LabelMap& map) {
  const auto [bin, lab] = serialize_semantickitti(cloud, map);
  detail::write_file(bin_path, bin);
  detail::write_file(label_path, lab);
}

// ---------------------------------------------------------------------------
// Pose files: one transform per line, 12 numbers, row-major [R | t].

inline std::vector<RigidTransform> parse_poses(std::string_view text) {
  std::vector<RigidTransform> out;
  detail::LineReader lines(text);
  std::string_view line;
  while (lines.next(line)) {
    const auto t = detail::tokens(line);
    if (t.empty()) continue;
    if (t.size() != 12) throw ParseError("pose: expected 12 numbers", lines.line_no(), ParseError::Unit::kLine);
    double v[12];
    for (int i = 0; i < 12; ++i) {
      const auto x = detail::parse_number<double>(t[static_cast<std::size_t>(i)]);
      if (!x || !std::isfinite(*x)) throw ParseError("pose: bad number", lines.line_no(), ParseError::Unit::kLine);
      v[i] = *x;
    }
    RigidTransform tr;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) tr.rotation(r, c) = v[4 * r + c];
      tr.translation[r] = v[4 * r + 3];
    }
    if (!tr.is_valid(1e-6)) throw ParseError("pose: rotation block is not a rotation", lines.line_no(), ParseError::Unit::kLine);
    out.push_back(tr);
  }
  return out;
}

inline std::string serialize_poses(const std::vector<RigidTransform>& poses) {
  std::string out;
  for (const auto& p : poses) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out += detail::fmt_double(p.rotation(r, c), 17) + ' ';
      out += detail::fmt_double(p.translation[r], 17);
      out += r == 2 ? '\n' : ' ';
    }
  }
  return out;
}

inline std::vector<RigidTransform> read_poses(const std::filesystem::path& path) {
  return parse_poses(detail::read_file(path));
}

inline void write_poses(const std::filesystem::path& path, const std::vector<RigidTransform>& poses) {
  detail::write_file(path, serialize_poses(poses));
}

/// First transform of a pose file.
inline RigidTransform read_transform(const std::filesystem::path& path) {
  const auto poses = read_poses(path);
  if (poses.empty()) throw ParseError("pose: file holds no transform", 0);
  return poses.front();
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline constexpr const char* kReportColumns =
    "pair_id,matcher,inlier_count,inlier_ratio,rotation_error,translation_error,registered,time_ms";

/// One row per pair, sorted by pair id then matcher, 9 significant digits.
inline std::string report_csv(const BenchmarkReport& report) {
  std::vector<PairMetrics> rows = report.pairs;
  std::stable_sort(rows.begin(), rows.end(), [](const PairMetrics& a, const PairMetrics& b) {
    return a.pair_id != b.pair_id ? a.pair_id < b.pair_id : a.matcher < b.matcher;
  });
  std::string out = std::string(kReportColumns) + "\n";
  for (const auto& r : rows) {
    out += detail::csv_field(r.pair_id) + ',' + detail::csv_field(r.matcher) + ',' + std::to_string(r.inlier_count) +
           ',' + detail::fmt_double(r.inlier_ratio, 9) + ',' + detail::fmt_double(r.rotation_error, 9) + ',' +
           detail::fmt_double(r.translation_error, 9) + ',' + (r.registered ? "1" : "0") + ',' +
           detail::fmt_double(r.time_ms, 9) + '\n';
  }
  return out;
}

inline nlohmann::json report_json(const BenchmarkReport& report) {
  std::vector<PairMetrics> rows = report.pairs;
  std::stable_sort(rows.begin(), rows.end(), [](const PairMetrics& a, const PairMetrics& b) {
    return a.pair_id != b.pair_id ? a.pair_id < b.pair_id : a.matcher < b.matcher;
  });
  nlohmann::json j;
  j["pairs"] = nlohmann::json::array();
  for (const auto& r : rows)
    j["pairs"].push_back({{"pair_id", r.pair_id},
                          {"matcher", r.matcher},
                          {"inlier_count", r.inlier_count},
                          {"inlier_ratio", r.inlier_ratio},
                          {"rotation_error", r.rotation_error},
                          {"translation_error", r.translation_error},
                          {"registered", r.registered},
                          {"time_ms", r.time_ms}});
  j["summary"] = {{"mean_re", report.mean_re},
                  {"mean_te", report.mean_te},
                  {"mean_in", report.mean_in},
                  {"mean_ir", report.mean_ir},
                  {"recall", report.recall}};
  return j;
}

inline std::string correspondences_csv(const CorrespondenceSet& corr) {
  std::string out = "src_index,dst_index,score,group\n";
  for (const auto& c : corr)
    out += std::to_string(c.src_index) + ',' + std::to_string(c.dst_index) + ',' + detail::fmt_double(c.score, 9) +
           ',' + (c.group_label == kNoGroup ? std::string("-") : std::to_string(c.group_label)) + '\n';
  return out;
}

/// Rows are categories, columns rings 1..N.
inline std::string saliency_csv(const SaliencyMatrix& w, const LabelAlphabet& alphabet) {
  std::string out = "category";
  for (Eigen::Index k = 0; k < w.cols(); ++k) out += ",ring_" + std::to_string(k + 1);
  out += '\n';
  for (Eigen::Index t = 0; t < w.rows(); ++t) {
    out += detail::csv_field(alphabet.name(static_cast<LabelId>(t)));
    for (Eigen::Index k = 0; k < w.cols(); ++k) out += ',' + detail::fmt_double(w(t, k), 9);
    out += '\n';
  }
  return out;
}

inline std::string sweep_csv(const std::string& parameter, const std::vector<SweepRow>& rows) {
  std::string out = parameter + ",mean_in,mean_ir\n";
  for (const auto& r : rows)
    out += detail::fmt_double(r.value, 9) + ',' + detail::fmt_double(r.mean_in, 9) + ',' +
           detail::fmt_double(r.mean_ir, 9) + '\n';
  return out;
}

}  // namespace semreg

#endif  // SEMREG_IO_HPP_
