#include "tsc/trace.hpp"

#include <fstream>
#include <stdexcept>

#include "tsc/digest.hpp"

namespace tsc {

void TraceLog::add(const std::string& line) {
    digest_ = fnv64(line, digest_);
    digest_ = fnv64("\n", digest_);
    lines_.push_back(line);
}

void TraceLog::write_to(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open trace output: " + path);
    for (const auto& line : lines_) out << line << '\n';
}

std::map<std::string, std::string> parse_trace_line(const std::string& line) {
    std::map<std::string, std::string> fields;
    std::size_t pos = 0;
    while (pos < line.size()) {
        const std::size_t end = line.find(' ', pos);
        const std::string token =
            line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
        const std::size_t eq = token.find('=');
        if (eq != std::string::npos) fields[token.substr(0, eq)] = token.substr(eq + 1);
        if (end == std::string::npos) break;
        pos = end + 1;
    }
    return fields;
}

std::vector<std::string> read_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace tsc
