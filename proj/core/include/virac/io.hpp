#pragma once

#include <string>

namespace virac {

// Writes via a sibling temp file and an atomic rename, so readers never see a
// partially written file. Throws IoError.
void write_file_atomic(const std::string& path, const std::string& content);

// Whole-file read. Throws IoError when the file cannot be opened.
std::string read_file(const std::string& path);

}  // namespace virac
