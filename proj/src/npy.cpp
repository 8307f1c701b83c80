#include "eegbench/npy.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <regex>

#include "eegbench/errors.hpp"

namespace eegbench {

static_assert(std::endian::native == std::endian::little, "npy I/O assumes a little-endian host");

namespace {

constexpr unsigned char kMagic[] = {0x93, 'N', 'U', 'M', 'P', 'Y'};

std::string dict_value(const std::string& header, const std::string& key) {
  const std::regex re("['\"]" + key + "['\"]\\s*:\\s*('[^']*'|\"[^\"]*\"|\\([^)]*\\)|True|False)");
  std::smatch m;
  if (!std::regex_search(header, m, re)) throw FormatError("npy: header missing '" + key + "'");
  return m[1].str();
}

}  // namespace

NpyArray parse_npy(std::span<const unsigned char> bytes) {
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw FormatError("npy: bad magic string");
  const int major = bytes[6];
  const int minor = bytes[7];
  if (major != 1 || minor != 0)
    throw FormatError("npy: unsupported version " + std::to_string(major) + "." + std::to_string(minor));
  const std::size_t header_len = static_cast<std::size_t>(bytes[8]) | (static_cast<std::size_t>(bytes[9]) << 8);
  if (bytes.size() < 10 + header_len) throw FormatError("npy: truncated header");
  const std::string header(reinterpret_cast<const char*>(bytes.data() + 10), header_len);

  std::string descr = dict_value(header, "descr");
  descr = descr.substr(1, descr.size() - 2);
  std::size_t elem = 0;
  if (descr == "<f8")
    elem = 8;
  else if (descr == "<f4")
    elem = 4;
  else
    throw FormatError("npy: unsupported descr '" + descr + "'");

  if (dict_value(header, "fortran_order") != "False") throw FormatError("npy: fortran_order arrays unsupported");

  NpyArray out;
  const std::string shape = dict_value(header, "shape");
  const std::regex num(R"(\d+)");
  for (auto it = std::sregex_iterator(shape.begin(), shape.end(), num); it != std::sregex_iterator(); ++it)
    out.shape.push_back(static_cast<std::size_t>(std::stoull(it->str())));
  std::size_t count = 1;
  for (auto d : out.shape) count *= d;

  const std::size_t offset = 10 + header_len;
  if (bytes.size() - offset != count * elem)
    throw FormatError("npy: payload holds " + std::to_string(bytes.size() - offset) + " bytes, shape needs " +
                      std::to_string(count * elem));
  out.data.resize(count);
  const unsigned char* p = bytes.data() + offset;
  for (std::size_t i = 0; i < count; ++i) {
    if (elem == 8) {
      double v;
      std::memcpy(&v, p + 8 * i, 8);
      out.data[i] = v;
    } else {
      float v;
      std::memcpy(&v, p + 4 * i, 4);
      out.data[i] = static_cast<double>(v);
    }
  }
  return out;
}

NpyArray read_npy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("npy: cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_npy(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Matrix load_npy(const std::filesystem::path& path) {
  NpyArray a = read_npy(path);
  Matrix m;
  if (a.shape.size() == 1) {
    m.rows = 1;
    m.cols = a.shape[0];
  } else if (a.shape.size() == 2) {
    m.rows = a.shape[0];
    m.cols = a.shape[1];
  } else {
    throw FormatError(path.string() + ": expected a rank-1 or rank-2 array");
  }
  m.data = std::move(a.data);
  return m;
}

std::vector<unsigned char> encode_npy(std::span<const double> data, const std::vector<std::size_t>& shape) {
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  if (count != data.size()) throw FormatError("npy: shape does not match data length");
  std::string shape_str = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    shape_str += std::to_string(shape[i]);
    if (shape.size() == 1 || i + 1 < shape.size()) shape_str += ",";
    if (i + 1 < shape.size()) shape_str += " ";
  }
  shape_str += ")";
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': " + shape_str + ", }";
  // Pad so the payload starts on a 64-byte boundary; header ends with '\n'.
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');

  std::vector<unsigned char> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(1);
  out.push_back(0);
  out.push_back(static_cast<unsigned char>(header.size() & 0xFF));
  out.push_back(static_cast<unsigned char>((header.size() >> 8) & 0xFF));
  out.insert(out.end(), header.begin(), header.end());
  const std::size_t base = out.size();
  out.resize(base + 8 * data.size());
  std::memcpy(out.data() + base, data.data(), 8 * data.size());
  return out;
}

void save_npy(const std::filesystem::path& path, std::span<const double> data, const std::vector<std::size_t>& shape) {
  const auto bytes = encode_npy(data, shape);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("npy: cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void save_npy(const std::filesystem::path& path, const Matrix& m) { save_npy(path, m.data, {m.rows, m.cols}); }

}  // namespace eegbench
