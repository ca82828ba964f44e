#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cphbl {

/// Per-EFS binary cache decision X_{n,f}, stored row-major N x F.
struct Placement {
  std::size_t num_efs = 0;
  std::size_t num_files = 0;
  std::vector<std::uint8_t> bits;

  Placement() = default;
  Placement(std::size_t efs, std::size_t files) : num_efs(efs), num_files(files), bits(efs * files, 0) {}

  bool cached(std::size_t efs, std::size_t file) const { return bits[efs * num_files + file] != 0; }
  std::span<std::uint8_t> row(std::size_t efs) {
    return std::span<std::uint8_t>(bits).subspan(efs * num_files, num_files);
  }
  std::span<const std::uint8_t> row(std::size_t efs) const {
    return std::span<const std::uint8_t>(bits).subspan(efs * num_files, num_files);
  }

  bool operator==(const Placement&) const = default;
};

/// Total size of the files selected in `row`.
inline std::int64_t used_storage(std::span<const std::uint8_t> row, std::span<const std::int64_t> sizes) {
  std::int64_t used = 0;
  for (std::size_t f = 0; f < row.size(); ++f) {
    if (row[f] != 0) used += sizes[f];
  }
  return used;
}

}  // namespace cphbl
