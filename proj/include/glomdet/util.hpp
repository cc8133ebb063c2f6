#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

namespace glomdet {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
// Full-string parse; nullopt-like failure reported through the bool.
bool parse_double(std::string_view text, double& out);
bool parse_int64(std::string_view text, std::int64_t& out);

std::string read_text_file(const std::filesystem::path& path);
// Throws IoError when the file cannot be created or written.
void write_text_file(const std::filesystem::path& path, std::string_view content);
void ensure_directory(const std::filesystem::path& dir);

// 64-bit FNV-1a over the file bytes, hex encoded. Used to fingerprint inputs
// in run manifests.
std::string file_fingerprint(const std::filesystem::path& path);

// Runs fn(i) for i in [0, count) on up to `workers` threads. Exceptions are
// rethrown on the calling thread (the one with the lowest index wins).
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace glomdet
