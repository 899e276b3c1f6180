#include "noiseshape/csvio.hpp"

#include <fstream>
#include <sstream>

#include "noiseshape/errors.hpp"

namespace noiseshape {

void csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string& f = fields[i];
        if (f.find(',') != std::string::npos || f.find('"') != std::string::npos ||
            f.find('\n') != std::string::npos)
            fail_usage("csv field contains a delimiter: " + f);
        if (i) out << ',';
        out << f;
    }
    out << '\n';
}

std::vector<std::vector<std::string>> csv_read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail_usage("cannot read csv file: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::size_t width = 0;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                row.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        row.push_back(cur);
        if (rows.empty()) {
            width = row.size();
        } else if (row.size() != width) {
            fail_usage("csv row width mismatch in " + path);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail_usage("cannot write file: " + path);
    f << content;
    if (!f) fail_usage("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail_usage("cannot read file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace noiseshape
