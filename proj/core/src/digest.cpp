#include "tsc/digest.hpp"

#include <string>

namespace tsc {

void append_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>(v & 0xff));
        v >>= 8;
    }
}

void append_i64(std::string& out, std::int64_t v) {
    append_u64(out, static_cast<std::uint64_t>(v));
}

void append_bytes(std::string& out, std::string_view bytes) {
    append_u64(out, bytes.size());
    out.append(bytes);
}

}  // namespace tsc
