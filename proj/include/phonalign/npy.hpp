#pragma once

// NPY array container, as written by numpy.save.
//
// Layout: the 6-byte magic "\x93NUMPY", a major and minor version byte, a little-endian
// header length (uint16 for version 1.0, uint32 for 2.0), then an ASCII Python dict
//   {'descr': '<f4', 'fortran_order': False, 'shape': (49, 1024), }
// padded with spaces and terminated by '\n' so that the data starts on a 64-byte
// boundary. The data follows in C order. Writers here always emit version 1.0; the
// reader also accepts 2.0 headers. Only little-endian and byte-order-free dtypes are
// supported.

#include "phonalign/common.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace phonalign::npy {

static_assert(std::endian::native == std::endian::little, "NPY IO assumes a little-endian host");

inline constexpr char kMagic[] = "\x93NUMPY";
inline constexpr std::size_t kMagicLen = 6;

template <class T>
struct Dtype;
template <>
struct Dtype<float> {
  static constexpr std::string_view descr = "<f4";
  static constexpr std::string_view name = "float32";
};
template <>
struct Dtype<double> {
  static constexpr std::string_view descr = "<f8";
  static constexpr std::string_view name = "float64";
};
template <>
struct Dtype<std::int32_t> {
  static constexpr std::string_view descr = "<i4";
  static constexpr std::string_view name = "int32";
};
template <>
struct Dtype<std::int64_t> {
  static constexpr std::string_view descr = "<i8";
  static constexpr std::string_view name = "int64";
};

struct Header {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::uint64_t> shape;
  std::uint64_t data_offset = 0;  // bytes from file start to the first element

  std::uint64_t element_count() const {
    return std::accumulate(shape.begin(), shape.end(), std::uint64_t{1}, std::multiplies<>{});
  }
};

namespace detail {

inline std::size_t skip_space(std::string_view s, std::size_t i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n')) ++i;
  return i;
}

inline std::size_t find_key(std::string_view dict, std::string_view key) {
  for (char q : {'\'', '"'}) {
    std::string pat;
    pat += q;
    pat += key;
    pat += q;
    auto pos = dict.find(pat);
    if (pos != std::string_view::npos) {
      pos = skip_space(dict, pos + pat.size());
      if (pos >= dict.size() || dict[pos] != ':') throw FormatError("NPY header: missing ':' after " + std::string(key));
      return skip_space(dict, pos + 1);
    }
  }
  throw FormatError("NPY header: missing key '" + std::string(key) + "'");
}

inline Header parse_dict(std::string_view dict) {
  Header h;
  auto i = find_key(dict, "descr");
  if (i >= dict.size() || (dict[i] != '\'' && dict[i] != '"')) throw FormatError("NPY header: descr is not a string");
  const char q = dict[i];
  const auto close = dict.find(q, i + 1);
  if (close == std::string_view::npos) throw FormatError("NPY header: unterminated descr");
  h.descr = std::string(dict.substr(i + 1, close - i - 1));

  i = find_key(dict, "fortran_order");
  if (dict.substr(i, 4) == "True") h.fortran_order = true;
  else if (dict.substr(i, 5) == "False") h.fortran_order = false;
  else throw FormatError("NPY header: fortran_order is not a bool");

  i = find_key(dict, "shape");
  if (i >= dict.size() || dict[i] != '(') throw FormatError("NPY header: shape is not a tuple");
  const auto end = dict.find(')', i);
  if (end == std::string_view::npos) throw FormatError("NPY header: unterminated shape");
  auto body = dict.substr(i + 1, end - i - 1);
  std::size_t p = 0;
  while (true) {
    p = skip_space(body, p);
    if (p >= body.size()) break;
    std::uint64_t v = 0;
    std::size_t digits = 0;
    while (p < body.size() && body[p] >= '0' && body[p] <= '9') {
      v = v * 10 + static_cast<std::uint64_t>(body[p] - '0');
      ++p;
      ++digits;
    }
    if (digits == 0) throw FormatError("NPY header: malformed shape");
    if (p < body.size() && body[p] == 'L') ++p;
    h.shape.push_back(v);
    p = skip_space(body, p);
    if (p < body.size()) {
      if (body[p] != ',') throw FormatError("NPY header: malformed shape");
      ++p;
    }
  }
  return h;
}

}  // namespace detail

inline Header read_header(std::istream& in) {
  char magic[kMagicLen];
  if (!in.read(magic, kMagicLen) || std::memcmp(magic, kMagic, kMagicLen) != 0)
    throw FormatError("not an NPY file (bad magic)");
  unsigned char ver[2];
  if (!in.read(reinterpret_cast<char*>(ver), 2)) throw FormatError("truncated NPY header");
  std::uint32_t header_len = 0;
  std::uint64_t prefix = kMagicLen + 2;
  if (ver[0] == 1 && ver[1] == 0) {
    unsigned char b[2];
    if (!in.read(reinterpret_cast<char*>(b), 2)) throw FormatError("truncated NPY header");
    header_len = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8);
    prefix += 2;
  } else if (ver[0] == 2 && ver[1] == 0) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError("truncated NPY header");
    header_len = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                 (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    prefix += 4;
  } else {
    throw FormatError("unsupported NPY version " + std::to_string(ver[0]) + "." + std::to_string(ver[1]));
  }
  std::string dict(header_len, '\0');
  if (!in.read(dict.data(), header_len)) throw FormatError("truncated NPY header");
  auto h = detail::parse_dict(dict);
  h.data_offset = prefix + header_len;
  return h;
}

inline Header read_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_header(in);
}

inline std::string make_header(std::string_view descr, std::span<const std::uint64_t> shape) {
  std::string dict = "{'descr': '" + std::string(descr) + "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    dict += std::to_string(shape[i]);
    if (shape.size() == 1 || i + 1 < shape.size()) dict += ",";
    if (i + 1 < shape.size()) dict += " ";
  }
  dict += "), }";
  const std::size_t unpadded = kMagicLen + 2 + 2 + dict.size() + 1;
  dict.append((64 - unpadded % 64) % 64, ' ');
  dict += '\n';
  if (dict.size() > 0xFFFF) throw FormatError("NPY header too long for version 1.0");
  std::string out(kMagic, kMagicLen);
  out += '\x01';
  out += '\x00';
  out += static_cast<char>(dict.size() & 0xFF);
  out += static_cast<char>((dict.size() >> 8) & 0xFF);
  out += dict;
  return out;
}

// A typed array of any rank, C order.
template <class T>
struct Array {
  std::vector<std::uint64_t> shape;
  std::vector<T> data;
};

template <class T>
Array<T> read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  const auto h = read_header(in);
  if (h.descr != Dtype<T>::descr)
    throw FormatError(path + ": expected dtype " + std::string(Dtype<T>::name) + " ('" +
                      std::string(Dtype<T>::descr) + "'), got '" + h.descr + "'");
  if (h.fortran_order) throw FormatError(path + ": Fortran-ordered arrays are not supported");
  Array<T> out;
  out.shape = h.shape;
  const auto count = h.element_count();
  const auto bytes = count * sizeof(T);
  in.seekg(0, std::ios::end);
  const auto available = static_cast<std::uint64_t>(in.tellg()) - h.data_offset;
  if (available < bytes)
    throw FormatError(path + ": truncated data, expected " + std::to_string(bytes) + " bytes, got " +
                      std::to_string(available));
  in.seekg(static_cast<std::streamoff>(h.data_offset));
  out.data.resize(count);
  in.read(reinterpret_cast<char*>(out.data.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw FormatError(path + ": read failed");
  return out;
}

template <class T>
void write(const std::string& path, std::span<const std::uint64_t> shape, std::span<const T> data) {
  const auto count = std::accumulate(shape.begin(), shape.end(), std::uint64_t{1}, std::multiplies<>{});
  if (count != data.size()) throw DataError("NPY write: shape does not match element count");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  const auto header = make_header(Dtype<T>::descr, shape);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(T)));
  if (!out) throw Error("write failed: " + path);
}

template <class T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> read_matrix(const std::string& path) {
  auto arr = read<T>(path);
  if (arr.shape.size() != 2)
    throw FormatError(path + ": expected rank 2, got " + std::to_string(arr.shape.size()));
  using M = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  M m(static_cast<Eigen::Index>(arr.shape[0]), static_cast<Eigen::Index>(arr.shape[1]));
  if (!arr.data.empty()) std::memcpy(m.data(), arr.data.data(), arr.data.size() * sizeof(T));
  return m;
}

template <class Derived>
void write_matrix(const std::string& path, const Eigen::MatrixBase<Derived>& m) {
  using T = typename Derived::Scalar;
  const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  const std::uint64_t shape[2] = {static_cast<std::uint64_t>(rm.rows()), static_cast<std::uint64_t>(rm.cols())};
  write<T>(path, shape, std::span<const T>(rm.data(), static_cast<std::size_t>(rm.size())));
}

template <class T>
std::vector<T> read_vector(const std::string& path) {
  auto arr = read<T>(path);
  if (arr.shape.size() != 1)
    throw FormatError(path + ": expected rank 1, got " + std::to_string(arr.shape.size()));
  return std::move(arr.data);
}

template <class T>
void write_vector(const std::string& path, std::span<const T> v) {
  const std::uint64_t shape[1] = {v.size()};
  write<T>(path, shape, v);
}

}  // namespace phonalign::npy
