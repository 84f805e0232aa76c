#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace pgr {

std::string read_file(const std::filesystem::path& path);

// write-temp-then-rename so readers never observe a partial file
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::vector<std::string> split_lines(const std::string& text);

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be written
// into caller-owned slots indexed by i, so the outcome is independent of the
// schedule. jobs <= 1 runs inline.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace pgr
