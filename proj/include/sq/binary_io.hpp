#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "sq/error.hpp"

namespace sq::io {

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, std::string_view bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

/// Little-endian writer used by every snapshot format in the library.
class binary_writer {
  public:
    void magic(std::string_view m) { m_buf.insert(m_buf.end(), m.begin(), m.end()); }

    void u32(std::uint32_t v) { put_le(v); }
    void u64(std::uint64_t v) { put_le(v); }
    void f32(float v) { put_le(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }
    void u8(std::uint8_t v) { m_buf.push_back(static_cast<char>(v)); }

    void str(std::string_view s)
    {
        u32(static_cast<std::uint32_t>(s.size()));
        m_buf.insert(m_buf.end(), s.begin(), s.end());
    }

    std::size_t size() const { return m_buf.size(); }
    const std::string& bytes() const { return m_buf; }

    void patch_u64(std::size_t pos, std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i) m_buf[pos + i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    }

    void save(const std::string& path) const { write_file(path, m_buf); }

  private:
    template <typename T>
    void put_le(T v)
    {
        for (std::size_t i = 0; i < sizeof(T); ++i)
            m_buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }

    std::string m_buf;
};

/// Bounds-checked little-endian reader; every overrun raises TruncatedFile.
class binary_reader {
  public:
    explicit binary_reader(std::string data) : m_buf(std::move(data)) {}

    static binary_reader from_file(const std::string& path) { return binary_reader(read_file(path)); }

    void expect_magic(std::string_view m)
    {
        if (m_buf.size() < m.size() || std::string_view(m_buf).substr(0, m.size()) != m)
            throw BadMagic("expected magic '" + std::string(m) + "'");
        m_pos += m.size();
    }

    std::uint8_t u8()
    {
        need(1);
        return static_cast<std::uint8_t>(m_buf[m_pos++]);
    }
    std::uint32_t u32() { return get_le<std::uint32_t>(); }
    std::uint64_t u64() { return get_le<std::uint64_t>(); }
    float f32() { return std::bit_cast<float>(get_le<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }

    std::string str()
    {
        auto n = u32();
        need(n);
        std::string s = m_buf.substr(m_pos, n);
        m_pos += n;
        return s;
    }

    void seek(std::size_t pos)
    {
        if (pos > m_buf.size()) throw TruncatedFile("seek past end of file");
        m_pos = pos;
    }

    std::size_t position() const { return m_pos; }
    std::size_t size() const { return m_buf.size(); }
    bool at_end() const { return m_pos == m_buf.size(); }

    void need(std::size_t n) const
    {
        if (m_buf.size() - m_pos < n) throw TruncatedFile("unexpected end of data");
    }

  private:
    template <typename T>
    T get_le()
    {
        need(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            v |= static_cast<T>(static_cast<unsigned char>(m_buf[m_pos + i])) << (8 * i);
        m_pos += sizeof(T);
        return v;
    }

    std::string m_buf;
    std::size_t m_pos = 0;
};

}  // namespace sq::io
