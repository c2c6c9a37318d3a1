#include "dfs/blob_io.hpp"

#include "dfs/error.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dfs {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint32_t to_little_endian(std::uint32_t x) {
  if constexpr (std::endian::native == std::endian::little) return x;
  return ((x & 0xffu) << 24) | ((x & 0xff00u) << 8) | ((x >> 8) & 0xff00u) | (x >> 24);
}

}  // namespace

Manifest Manifest::read(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open manifest " + path.string());
  Manifest m;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto colon = t.find(':');
    if (colon == std::string::npos)
      fail(ErrorCode::kFormat, path.string() + ":" + std::to_string(line_no) + ": expected 'key: value'");
    m.set(trim(t.substr(0, colon)), trim(t.substr(colon + 1)));
  }
  return m;
}

void Manifest::write(const fs::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write manifest " + path.string());
  for (const auto& [k, v] : entries_) out << k << ": " << v << '\n';
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

void Manifest::set(std::string key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

bool Manifest::has(std::string_view key) const { return find(key).has_value(); }

std::optional<std::string> Manifest::find(std::string_view key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

const std::string& Manifest::get(std::string_view key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  fail(ErrorCode::kFormat, "manifest is missing key '" + std::string(key) + "'");
}

std::size_t Manifest::get_size(std::string_view key) const {
  const std::string& v = get(key);
  std::size_t pos = 0;
  unsigned long long n = 0;
  try {
    n = std::stoull(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size() || v.front() == '-')
    fail(ErrorCode::kFormat, "manifest key '" + std::string(key) + "' is not a count: " + v);
  return static_cast<std::size_t>(n);
}

void Manifest::expect(std::string_view kind) const {
  const std::string& version = get("format_version");
  if (version != std::to_string(kFormatVersion))
    fail(ErrorCode::kVersionMismatch, "format_version " + version + ", this build reads " +
                                          std::to_string(kFormatVersion));
  if (get("kind") != kind)
    fail(ErrorCode::kFormat, "manifest kind is '" + get("kind") + "', expected '" +
                                 std::string(kind) + "'");
}

BlobRef parse_blob_ref(const std::string& value) {
  std::istringstream in(value);
  BlobRef ref;
  long long rows = -1, cols = -1;
  if (!(in >> ref.file >> rows >> cols) || rows < 0 || cols < 0)
    fail(ErrorCode::kFormat, "bad blob entry '" + value + "', expected '<file> <rows> <cols>'");
  std::string extra;
  if (in >> extra) fail(ErrorCode::kFormat, "trailing text in blob entry '" + value + "'");
  ref.rows = static_cast<std::size_t>(rows);
  ref.cols = static_cast<std::size_t>(cols);
  return ref;
}

std::string format_blob_ref(const BlobRef& ref) {
  return ref.file + " " + std::to_string(ref.rows) + " " + std::to_string(ref.cols);
}

void write_blob(const fs::path& path, const RowMatrix& m) {
  std::vector<std::uint32_t> words(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const float f = static_cast<float>(m.data()[i]);
    words[static_cast<std::size_t>(i)] = to_little_endian(std::bit_cast<std::uint32_t>(f));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write blob " + path.string());
  out.write(reinterpret_cast<const char*>(words.data()),
            static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

RowMatrix read_blob(const fs::path& path, std::size_t rows, std::size_t cols) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) fail(ErrorCode::kIo, "cannot open blob " + path.string());
  const auto bytes = static_cast<std::size_t>(in.tellg());
  const std::size_t expected = rows * cols * sizeof(float);
  if (bytes < expected)
    fail(ErrorCode::kTruncated, path.string() + " holds " + std::to_string(bytes) +
                                    " bytes, manifest declares " + std::to_string(expected));
  if (bytes > expected)
    fail(ErrorCode::kShapeMismatch, path.string() + " holds " + std::to_string(bytes) +
                                        " bytes, manifest declares " + std::to_string(expected));
  in.seekg(0);
  std::vector<std::uint32_t> words(rows * cols);
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(expected));
  if (!in) fail(ErrorCode::kTruncated, "short read from " + path.string());
  RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < words.size(); ++i)
    m.data()[i] = static_cast<double>(std::bit_cast<float>(to_little_endian(words[i])));
  return m;
}

void store_blob(Manifest& manifest, const fs::path& manifest_path, const std::string& name,
                const RowMatrix& m) {
  const std::string file = manifest_path.stem().string() + "." + name + ".f32";
  write_blob(manifest_path.parent_path() / file, m);
  manifest.set("blob." + name, format_blob_ref({file, static_cast<std::size_t>(m.rows()),
                                                static_cast<std::size_t>(m.cols())}));
}

RowMatrix load_blob(const Manifest& manifest, const fs::path& manifest_path,
                    const std::string& name, std::size_t expected_rows,
                    std::size_t expected_cols) {
  const BlobRef ref = parse_blob_ref(manifest.get("blob." + name));
  if ((expected_rows && ref.rows != expected_rows) || (expected_cols && ref.cols != expected_cols))
    fail(ErrorCode::kShapeMismatch,
         "blob '" + name + "' declared " + std::to_string(ref.rows) + "x" +
             std::to_string(ref.cols) + ", expected " + std::to_string(expected_rows) + "x" +
             std::to_string(expected_cols));
  return read_blob(manifest_path.parent_path() / ref.file, ref.rows, ref.cols);
}

RowMatrix column_of(const std::vector<int>& values) {
  RowMatrix m(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = values[i];
  return m;
}

std::vector<int> ints_of(const RowMatrix& m, const std::string& what) {
  if (m.cols() != 1 && m.rows() > 0)
    fail(ErrorCode::kShapeMismatch, what + " must be a single column");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double v = m(i, 0);
    if (!std::isfinite(v)) fail(ErrorCode::kNonFinite, what + " contains a non-finite value");
    if (v != std::floor(v) || std::abs(v) > 16777216.0)
      fail(ErrorCode::kFormat, what + " contains a non-integral value");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

}  // namespace dfs
