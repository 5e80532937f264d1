#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>

namespace aslsim {

// Writes through a temporary file and renames into place, so readers never
// observe a partially written output.
inline void write_file_atomic(const std::filesystem::path& path, bool binary,
                              const std::function<void(std::ostream&)>& fill) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, binary ? std::ios::binary : std::ios::out);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        fill(os);
        if (!os) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace aslsim
