#pragma once

#include <ostream>
#include <string>
#include <vector>

// Minimal CSV support for the fixed, documented schemas this tool emits.
// Fields never contain commas or quotes, so no escaping is implemented;
// the writer asserts that.

namespace noiseshape {

void csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Reads all rows; every row must have the same field count as the header.
std::vector<std::vector<std::string>> csv_read_file(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace noiseshape
