/*
 * Copyright (c) 2026 The gattcrypt Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Minimal reader for the zip container: central directory walk plus
// stored/deflate members. No zip64, no encryption.

#include "gattcrypt/smali_ir.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <iterator>

namespace gattcrypt::smali {

namespace {

constexpr std::uint32_t kEndOfCentralDir = 0x06054b50;
constexpr std::uint32_t kCentralHeader = 0x02014b50;
constexpr std::uint32_t kLocalHeader = 0x04034b50;

std::uint16_t le16(const std::vector<unsigned char> &b, std::size_t at)
{
    if (at + 2 > b.size()) throw std::runtime_error("truncated zip archive");
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t le32(const std::vector<unsigned char> &b, std::size_t at)
{
    if (at + 4 > b.size()) throw std::runtime_error("truncated zip archive");
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::string inflate_raw(const unsigned char *data, std::size_t size, std::size_t expected)
{
    std::string out(expected, '\0');
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw std::runtime_error("inflateInit2 failed");
    zs.next_in = const_cast<unsigned char *>(data);
    zs.avail_in = static_cast<uInt>(size);
    zs.next_out = reinterpret_cast<unsigned char *>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw std::runtime_error("corrupt deflate stream");
    out.resize(zs.total_out);
    return out;
}

} // namespace

std::vector<std::pair<std::string, std::string>> read_zip_sources(const std::filesystem::path &archive)
{
    std::ifstream in(archive, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + archive.string());
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 22) throw std::runtime_error("not a zip archive: " + archive.string());

    std::size_t eocd = std::string::npos;
    std::size_t floor = buf.size() > 22 + 0xFFFF ? buf.size() - 22 - 0xFFFF : 0;
    for (std::size_t i = buf.size() - 22 + 1; i-- > floor;) {
        if (le32(buf, i) == kEndOfCentralDir) {
            eocd = i;
            break;
        }
    }
    if (eocd == std::string::npos) throw std::runtime_error("zip end-of-central-directory not found");

    const std::uint16_t entries = le16(buf, eocd + 10);
    std::size_t at = le32(buf, eocd + 16);
    std::vector<std::pair<std::string, std::string>> out;
    for (std::uint16_t e = 0; e < entries; ++e) {
        if (le32(buf, at) != kCentralHeader) throw std::runtime_error("corrupt zip central directory");
        const std::uint16_t method = le16(buf, at + 10);
        const std::uint32_t csize = le32(buf, at + 20);
        const std::uint32_t usize = le32(buf, at + 24);
        const std::uint16_t name_len = le16(buf, at + 28);
        const std::uint16_t extra_len = le16(buf, at + 30);
        const std::uint16_t comment_len = le16(buf, at + 32);
        const std::uint32_t local = le32(buf, at + 42);
        if (at + 46 + name_len > buf.size()) throw std::runtime_error("truncated zip archive");
        std::string name(buf.begin() + static_cast<std::ptrdiff_t>(at + 46),
                         buf.begin() + static_cast<std::ptrdiff_t>(at + 46 + name_len));
        at += 46 + name_len + extra_len + comment_len;

        if (name.size() < 6 || name.substr(name.size() - 6) != ".smali") continue;
        if (le32(buf, local) != kLocalHeader) throw std::runtime_error("corrupt zip local header for " + name);
        std::size_t data = local + 30 + le16(buf, local + 26) + le16(buf, local + 28);
        if (data + csize > buf.size()) throw std::runtime_error("truncated zip member " + name);
        if (method == 0) {
            out.emplace_back(name, std::string(buf.begin() + static_cast<std::ptrdiff_t>(data),
                                               buf.begin() + static_cast<std::ptrdiff_t>(data + csize)));
        } else if (method == 8) {
            out.emplace_back(name, inflate_raw(buf.data() + data, csize, usize));
        } else {
            throw std::runtime_error("unsupported zip compression method " + std::to_string(method));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace gattcrypt::smali
