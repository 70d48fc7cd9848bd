#include "observer/service/zip.hpp"

#include <zlib.h>

#include "observer/error.hpp"

namespace observer::service {

namespace {

constexpr std::uint32_t kLocalHeader = 0x04034b50;
constexpr std::uint32_t kCentralHeader = 0x02014b50;
constexpr std::uint32_t kEndRecord = 0x06054b50;
// 1980-01-01 00:00, the zip epoch.
constexpr std::uint16_t kDosTime = 0;
constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;

void put16(std::string& out, std::uint16_t v)
{
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get(const std::string& in, std::size_t pos, int bytes)
{
    if (pos + static_cast<std::size_t>(bytes) > in.size()) throw FormatError("zip: truncated archive");
    std::uint32_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
    }
    return v;
}

}  // namespace

void ZipWriter::add(const std::string& name, std::span<const std::uint8_t> data)
{
    if (buffer_.size() + data.size() > 0xffffffffULL) throw FormatError("zip: archive exceeds 4 GiB");
    Entry e;
    e.name = name;
    e.size = static_cast<std::uint32_t>(data.size());
    e.crc = static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), data.data(), static_cast<uInt>(data.size())));
    e.offset = static_cast<std::uint32_t>(buffer_.size());

    put32(buffer_, kLocalHeader);
    put16(buffer_, 20);  // version needed
    put16(buffer_, 0x0800);  // UTF-8 names
    put16(buffer_, 0);  // stored
    put16(buffer_, kDosTime);
    put16(buffer_, kDosDate);
    put32(buffer_, e.crc);
    put32(buffer_, e.size);
    put32(buffer_, e.size);
    put16(buffer_, static_cast<std::uint16_t>(name.size()));
    put16(buffer_, 0);
    buffer_ += name;
    buffer_.append(reinterpret_cast<const char*>(data.data()), data.size());
    entries_.push_back(std::move(e));
}

void ZipWriter::add(const std::string& name, const std::string& data)
{
    add(name, std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

void ZipWriter::add_directory(const std::string& name)
{
    add(name.ends_with('/') ? name : name + "/", std::span<const std::uint8_t>{});
}

std::string ZipWriter::finish()
{
    const auto central_offset = static_cast<std::uint32_t>(buffer_.size());
    for (const auto& e : entries_) {
        put32(buffer_, kCentralHeader);
        put16(buffer_, 20);  // made by
        put16(buffer_, 20);  // needed
        put16(buffer_, 0x0800);
        put16(buffer_, 0);
        put16(buffer_, kDosTime);
        put16(buffer_, kDosDate);
        put32(buffer_, e.crc);
        put32(buffer_, e.size);
        put32(buffer_, e.size);
        put16(buffer_, static_cast<std::uint16_t>(e.name.size()));
        put16(buffer_, 0);  // extra
        put16(buffer_, 0);  // comment
        put16(buffer_, 0);  // disk
        put16(buffer_, 0);  // internal attrs
        put32(buffer_, e.name.ends_with('/') ? 0x10 : 0);  // external attrs
        put32(buffer_, e.offset);
        buffer_ += e.name;
    }
    const auto central_size = static_cast<std::uint32_t>(buffer_.size()) - central_offset;
    put32(buffer_, kEndRecord);
    put16(buffer_, 0);
    put16(buffer_, 0);
    put16(buffer_, static_cast<std::uint16_t>(entries_.size()));
    put16(buffer_, static_cast<std::uint16_t>(entries_.size()));
    put32(buffer_, central_size);
    put32(buffer_, central_offset);
    put16(buffer_, 0);
    entries_.clear();
    return std::move(buffer_);
}

std::map<std::string, std::string> read_zip(const std::string& archive)
{
    if (archive.size() < 22) throw FormatError("zip: too short");
    const std::size_t end = archive.size() - 22;
    if (get(archive, end, 4) != kEndRecord) throw FormatError("zip: missing end record");
    const auto count = get(archive, end + 10, 2);
    std::size_t pos = get(archive, end + 16, 4);

    std::map<std::string, std::string> files;
    for (std::uint32_t i = 0; i < count; ++i) {
        if (get(archive, pos, 4) != kCentralHeader) throw FormatError("zip: bad central header");
        if (get(archive, pos + 10, 2) != 0) throw FormatError("zip: only stored entries supported");
        const auto crc = get(archive, pos + 16, 4);
        const auto size = get(archive, pos + 20, 4);
        const auto name_len = get(archive, pos + 28, 2);
        const auto extra_len = get(archive, pos + 30, 2);
        const auto comment_len = get(archive, pos + 32, 2);
        const auto offset = get(archive, pos + 42, 4);
        if (pos + 46 + name_len > archive.size()) throw FormatError("zip: truncated name");
        const std::string name = archive.substr(pos + 46, name_len);
        pos += 46 + name_len + extra_len + comment_len;

        if (get(archive, offset, 4) != kLocalHeader) throw FormatError("zip: bad local header");
        const std::size_t data = offset + 30 + get(archive, offset + 26, 2) + get(archive, offset + 28, 2);
        if (data + size > archive.size()) throw FormatError("zip: truncated entry " + name);
        std::string content = archive.substr(data, size);
        const auto actual = static_cast<std::uint32_t>(
            crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef*>(content.data()),
                  static_cast<uInt>(content.size())));
        if (actual != crc) throw FormatError("zip: CRC mismatch in " + name);
        files.emplace(name, std::move(content));
    }
    return files;
}

}  // namespace observer::service
