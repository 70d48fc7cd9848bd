#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace observer::service {

/// Minimal zip writer: every entry is stored uncompressed (the payload is
/// mostly PNG data that would not shrink anyway).
class ZipWriter {
public:
    /// Adds a file entry. Names ending in '/' are directory entries.
    void add(const std::string& name, std::span<const std::uint8_t> data);
    void add(const std::string& name, const std::string& data);
    void add_directory(const std::string& name);

    /// Central directory and end record appended; the writer is spent.
    std::string finish();

private:
    struct Entry {
        std::string name;
        std::uint32_t crc = 0;
        std::uint32_t size = 0;
        std::uint32_t offset = 0;
    };
    std::string buffer_;
    std::vector<Entry> entries_;
};

/// Reads an archive produced by ZipWriter (stored entries only). Keys are
/// entry names. Throws FormatError on anything else or a CRC mismatch.
std::map<std::string, std::string> read_zip(const std::string& archive);

}  // namespace observer::service
