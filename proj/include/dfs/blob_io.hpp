#pragma once

#include "dfs/types.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dfs {

inline constexpr int kFormatVersion = 1;

// Plain-text manifest of "key: value" lines. Lines starting with '#' and
// blank lines are ignored; key order is preserved on write.
class Manifest {
 public:
  static Manifest read(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;

  void set(std::string key, std::string value);
  bool has(std::string_view key) const;
  // Throws kFormat when the key is missing.
  const std::string& get(std::string_view key) const;
  std::optional<std::string> find(std::string_view key) const;
  std::size_t get_size(std::string_view key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  // Checks "format_version" and "kind".
  void expect(std::string_view kind) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// A blob entry: "blob.<name>: <file> <rows> <cols>".
struct BlobRef {
  std::string file;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

BlobRef parse_blob_ref(const std::string& value);
std::string format_blob_ref(const BlobRef& ref);

// Raw little-endian float32, row-major.
void write_blob(const std::filesystem::path& path, const RowMatrix& m);
// Throws kTruncated when the file is shorter than rows*cols floats and
// kShapeMismatch when it is longer.
RowMatrix read_blob(const std::filesystem::path& path, std::size_t rows, std::size_t cols);

// Writes m next to the manifest as "<stem>.<name>.f32" and records it.
void store_blob(Manifest& manifest, const std::filesystem::path& manifest_path,
                const std::string& name, const RowMatrix& m);
// Reads blob.<name>; expected_rows/cols of 0 mean "any".
RowMatrix load_blob(const Manifest& manifest, const std::filesystem::path& manifest_path,
                    const std::string& name, std::size_t expected_rows = 0,
                    std::size_t expected_cols = 0);

RowMatrix column_of(const std::vector<int>& values);
// Converts an N x 1 blob of integral floats back to ints.
std::vector<int> ints_of(const RowMatrix& m, const std::string& what);

}  // namespace dfs
