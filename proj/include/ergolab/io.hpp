#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace ergolab {

// Shortest decimal string that round-trips the double exactly (17
// significant digits); every report file uses this so reruns are
// byte-identical.
std::string format_double(double v);

// Write-temp-then-rename so concurrent experiments never observe a
// partially written report.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

// FNV-1a 64-bit, hex encoded; used for config and output fingerprints.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace ergolab
