#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace lawq::io {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

// Writes to a sibling temporary and renames it into place, so a failed
// write never leaves a partial file at `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& contents);

// gzip streams are recognised by their magic bytes and inflated.
std::vector<std::uint8_t> maybe_gunzip(std::vector<std::uint8_t> bytes);

}  // namespace lawq::io
