// Copyright 2026 The NSQST Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

namespace nsqst::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

class FormatError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

class ByteWriter {
   public:
    explicit ByteWriter(std::ostream& out) : out_(out) {}

    template <typename T>
        requires std::is_arithmetic_v<T>
    void put(T value) {
        out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
        if (!out_) throw std::runtime_error("write failed");
    }
    void put_magic(std::string_view magic) { out_.write(magic.data(), static_cast<std::streamsize>(magic.size())); }
    void put_string(std::string_view s) {
        put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

   private:
    std::ostream& out_;
};

class ByteReader {
   public:
    explicit ByteReader(std::istream& in) : in_(in) {}

    template <typename T>
        requires std::is_arithmetic_v<T>
    T get() {
        T value{};
        in_.read(reinterpret_cast<char*>(&value), sizeof(T));
        if (in_.gcount() != static_cast<std::streamsize>(sizeof(T))) throw FormatError("unexpected end of file");
        return value;
    }
    void expect_magic(std::string_view magic) {
        std::string buf(magic.size(), '\0');
        in_.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (buf != magic) throw FormatError("bad magic: expected " + std::string(magic));
    }
    std::string get_string(std::uint32_t max_len = 1u << 20) {
        const auto len = get<std::uint32_t>();
        if (len > max_len) throw FormatError("string field too long");
        std::string s(len, '\0');
        in_.read(s.data(), static_cast<std::streamsize>(len));
        if (in_.gcount() != static_cast<std::streamsize>(len)) throw FormatError("unexpected end of file");
        return s;
    }
    /// Throws unless the stream is exhausted.
    void expect_end() {
        if (in_.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after payload");
    }

   private:
    std::istream& in_;
};

}  // namespace nsqst::io
