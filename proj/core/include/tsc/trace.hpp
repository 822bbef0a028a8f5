#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tsc {

/// Line-oriented run log. Lines are UTF-8 `key=value` tokens separated by
/// single spaces; the digest is a pure function of the emitted bytes, which
/// is what the determinism contract is checked against.
class TraceLog {
public:
    void add(const std::string& line);

    std::uint64_t digest() const { return digest_; }
    std::size_t size() const { return lines_.size(); }
    const std::vector<std::string>& lines() const { return lines_; }

    void write_to(const std::string& path) const;

private:
    std::vector<std::string> lines_;
    std::uint64_t digest_ = 0xcbf29ce484222325ull;
};

// Parses one trace line into its key=value tokens.
std::map<std::string, std::string> parse_trace_line(const std::string& line);

std::vector<std::string> read_trace_file(const std::string& path);

}  // namespace tsc
